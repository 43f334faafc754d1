"""Command-line entry point: one subcommand per pipeline stage plus ``demo``.

Exit codes: 0 success, 1 domain error, 2 usage error. Failures print one
JSON line ``{"error": <category>, "message": ...}`` on stderr. All output
files are written atomically.
"""

import argparse
import json
import sys
from pathlib import Path

from . import formats, pipeline, rng
from .basis import compute_basis, load_basis, save_basis
from .coords import project_batch
from .errors import EmptyCategoryError, FactorForgeError, InvalidArgumentError
from .sampler import generate_for_category
from .semantics import (
    CATEGORY_NAMES,
    SemanticLabel,
    category_index,
    compute_ranges,
    labels_to_json,
    load_labels,
    load_ranges,
    partition_by_label,
    save_ranges,
)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _fail(category, message, code):
    line = json.dumps({"error": category, "message": str(message).replace("\n", " ")})
    print(line, file=sys.stderr)
    return code


def _input(path):
    p = Path(path)
    if not p.is_file():
        raise InvalidArgumentError(f"input file not found: {path}")
    return p


def _output(path):
    p = Path(path)
    if not p.parent.exists():
        raise InvalidArgumentError(f"output directory does not exist: {p.parent}")
    if p.is_dir():
        raise InvalidArgumentError(f"output path is a directory: {path}")
    return p


def _positive(name, value, minimum=1):
    if value is not None and value < minimum:
        raise InvalidArgumentError(f"--{name} must be >= {minimum}, got {value}")
    return value


def _category(name, table=None):
    c = category_index(name)
    if c < 0 or (table is not None and c not in table):
        raise EmptyCategoryError(f"category {name!r} has no range (known: {', '.join(CATEGORY_NAMES)})")
    return c


def cmd_basis(args):
    weights = _input(args.weights)
    out = _output(args.out)
    _positive("k", args.k)
    basis = compute_basis(formats.read_matrix(weights), args.k)
    save_basis(out, basis)
    return {"dim": basis.dim, "k": basis.k, "out": str(out)}


def cmd_project(args):
    bpath, lpath = _input(args.basis), _input(args.latents)
    out = _output(args.out)
    coords = project_batch(load_basis(bpath), formats.read_matrix(lpath))
    formats.write_matrix(out, coords)
    return {"n": coords.shape[0], "k": coords.shape[1], "out": str(out)}


def cmd_ranges(args):
    cpath, lpath = _input(args.coords), _input(args.labels)
    out = _output(args.out)
    coords = formats.read_matrix(cpath)
    labels, _ = load_labels(lpath)
    table = compute_ranges(partition_by_label(coords, labels), coords.shape[1])
    save_ranges(out, table)
    return {"k": table.k, "categories": [CATEGORY_NAMES[c] for c in table.present()], "out": str(out)}


def cmd_sample(args):
    rpath, bpath = _input(args.ranges), _input(args.basis)
    out = _output(args.out)
    _positive("n", args.n, 0)
    rng.check_seed(args.seed)
    table = load_ranges(rpath)
    c = _category(args.category, table)
    latents = generate_for_category(table, load_basis(bpath), c, args.n, args.seed)
    formats.write_matrix(out, latents)
    return {"category": CATEGORY_NAMES[c], "n": args.n, "seed": args.seed, "out": str(out)}


def cmd_baseline(args):
    mpath = _input(args.config)
    out = _output(args.out)
    labels_out = _output(args.labels_out) if args.labels_out else out.with_suffix(".labels.json")
    _positive("n", args.n)
    _positive("max-draws", args.max_draws, args.n)
    rng.check_seed(args.seed)
    spec, labeler = pipeline.load_model(mpath)
    result = pipeline.baseline_collect(spec, labeler, args.n, args.seed, args.max_draws)
    latents = result.stacked()
    cats, ages = pipeline.label_indices(labeler, spec.render(latents))
    formats.write_matrix(out, latents)
    formats.write_json(labels_out, labels_to_json([SemanticLabel.from_index(int(c)) for c in cats], ages))
    return {
        "n_per_category": args.n,
        "draws": result.draws,
        "out": str(out),
        "labels": str(labels_out),
    }


def cmd_evaluate(args):
    mpath, lpath = _input(args.config), _input(args.latents)
    c = _category(args.category)
    spec, labeler = pipeline.load_model(mpath)
    latents = formats.read_matrix(lpath)
    metric = pipeline.get_metric(args.metric)
    result = {
        "category": CATEGORY_NAMES[c],
        "metric": metric.name,
        "n": int(latents.shape[0]),
        "diversity": pipeline.mean_pairwise_distance(spec.render(latents), metric),
        "retention": pipeline.retention_rate(latents, spec, labeler, c),
    }
    if args.out:
        formats.write_json(_output(args.out), result)
    return result


def cmd_demo(args):
    out = _output(args.out)
    config = pipeline.ExperimentConfig(
        dim=args.dim,
        image_dim=args.dim,
        k=args.k,
        n_per_category=args.n,
        seed=args.seed,
        model_seed=args.model_seed,
        metric=args.metric,
        max_draws=args.max_draws,
    )
    config.validate()
    spec, labeler = pipeline.synthetic_model(config.dim, config.image_dim, config.model_seed)
    report = pipeline.run_comparison(config, spec, labeler)
    formats.atomic_write_bytes(out, report.dumps().encode("utf-8"))
    if args.export_model:
        pipeline.save_model(args.export_model, spec, labeler)
    sys.stdout.write(report.table())
    return {"out": str(out)}


def build_parser():
    parser = _Parser(prog="factorforge", description=__doc__.splitlines()[0], allow_abbrev=False)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, fn, help_):
        p = sub.add_parser(name, help=help_, allow_abbrev=False)
        p.set_defaults(fn=fn)
        return p

    p = add("basis", cmd_basis, "factor basis from a weight matrix (FCK1 -> FCB1)")
    p.add_argument("--weights", required=True)
    p.add_argument("--k", type=int)
    p.add_argument("--out", required=True)

    p = add("project", cmd_project, "latents (FCK1) to factor coordinates (FCK1)")
    p.add_argument("--basis", required=True)
    p.add_argument("--latents", required=True)
    p.add_argument("--out", required=True)

    p = add("ranges", cmd_ranges, "per-category coordinate ranges from coordinates and labels")
    p.add_argument("--coords", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--out", required=True)

    p = add("sample", cmd_sample, "uniform box samples of one category, as latents")
    p.add_argument("--ranges", required=True)
    p.add_argument("--basis", required=True)
    p.add_argument("--category", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)

    p = add("baseline", cmd_baseline, "rejection-sample latents per category")
    p.add_argument("--config", required=True, help="model.json")
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-draws", type=int, default=10 ** 6)
    p.add_argument("--out", required=True)
    p.add_argument("--labels-out")

    p = add("evaluate", cmd_evaluate, "diversity and retention of a latent batch")
    p.add_argument("--config", required=True, help="model.json")
    p.add_argument("--latents", required=True)
    p.add_argument("--category", required=True)
    p.add_argument("--metric", default="euclidean")
    p.add_argument("--out")

    p = add("demo", cmd_demo, "full comparison on the synthetic generator")
    p.add_argument("--dim", type=int, default=64)
    p.add_argument("--k", type=int)
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--model-seed", type=int, default=0)
    p.add_argument("--metric", default="euclidean")
    p.add_argument("--max-draws", type=int, default=10 ** 6)
    p.add_argument("--out", default="report.json")
    p.add_argument("--export-model", metavar="DIR")
    return parser


def dispatch(argv=None):
    """Run one subcommand; returns the process exit code."""
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        return _fail("usage", exc, 2)
    try:
        pipeline.worker_threads()
        summary = args.fn(args)
    except FactorForgeError as exc:
        return _fail(exc.category, exc, 1)
    if args.command != "demo":
        print(json.dumps(summary))
    return 0


def main():
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
