"""Command-line front end.

Exit codes: 0 success, 1 validation failure, 2 input error.
"""
import argparse
import json
import logging
import os
import sys

from . import diet, engine, synthetic
from .clustering import load_observations_csv, write_observations_csv
from .errors import MlioError
from .metric import Metric
from .polytope import constraints_from_dict

log = logging.getLogger("mlio")

METHODS = [m.value for m in engine.Method]


class InputError(Exception):
    pass


def _load_json(path):
    if not path:
        raise InputError("a required path was not given")
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc})") from None


def load_feasible_set(path):
    """Constraint file or nutrient spec, told apart by the ``matrix`` key."""
    data = _load_json(path)
    if isinstance(data, dict) and "matrix" in data:
        return diet.build_diet_polytope(diet.spec_from_dict(data))
    return constraints_from_dict(data)


def _observations(path):
    if not path:
        raise InputError("--observations is required")
    if not os.path.exists(path):
        raise InputError(f"observations file not found: {path}")
    return load_observations_csv(path)


def _feasible_set(args, required=True):
    if args.constraints:
        return load_feasible_set(args.constraints)
    if required and not getattr(args, "unconstrained", False):
        raise InputError("--constraints is required unless --unconstrained is given")
    return None


def parse_range(text):
    try:
        a, b = text.split("..")
        lo, hi = int(a), int(b)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected A..B, got {text!r}") from None
    if lo < 1 or hi < lo:
        raise argparse.ArgumentTypeError(f"invalid cluster range {text!r}")
    return range(lo, hi + 1)


def _write_text(path, text):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="") as fh:
            fh.write(text)


def dump_json(data) -> str:
    return json.dumps(data, indent=2) + "\n"


def cmd_fit(args):
    obs = _observations(args.observations)
    fs = _feasible_set(args)
    if fs is not None and fs.n != obs.n:
        raise InputError(f"observations have {obs.n} columns, constraints have {fs.n} variables")
    sol = engine.fit(args.method, obs, fs, args.clusters, args.seed, args.metric, args.max_iter,
                     args.unconstrained)
    _write_text(args.out, dump_json(engine.solution_to_dict(sol, obs, fs)))
    return 0


def cmd_sweep(args):
    obs = _observations(args.observations)
    fs = _feasible_set(args)
    train, test = obs, None
    if args.split is not None:
        train, test = diet.train_test_split(obs, args.split, args.seed)
    methods = args.method.split(",") if args.method else ["kmeans", "seq", "emb", "exact"]
    for m in methods:
        if m not in METHODS:
            raise InputError(f"unknown method {m!r}")
    L_range = args.cluster_range or range(args.clusters, args.clusters + 1)
    rows = engine.sweep(train, fs, L_range, args.seed, args.metric, methods, test,
                        args.max_iter, args.unconstrained)
    out = [["L", "method", "train_total", "train_avg", "test_avg", "gap_sum"]]
    for r in rows:
        out.append([r.L, r.method, f"{r.train_total:.12g}", f"{r.train_avg:.12g}",
                    "" if r.test_avg is None else f"{r.test_avg:.12g}", f"{r.gap_sum:.12g}"])
    _write_text(args.out, "".join(",".join(str(c) for c in row) + "\n" for row in out))
    return 0


def cmd_validate(args):
    obs = _observations(args.observations)
    data = _load_json(args.solution)
    unconstrained = args.unconstrained or bool(data.get("unconstrained", False))
    fs = load_feasible_set(args.constraints) if args.constraints else None
    if fs is None and not unconstrained:
        raise InputError("--constraints is required to validate a constrained solution")
    metric = args.metric if args.metric_given else data.get("metric", args.metric)
    try:
        sol = engine.solution_from_dict(data, obs, fs, metric)
    except (KeyError, ValueError, TypeError) as exc:
        raise InputError(f"malformed solution: {exc}") from None
    sol.unconstrained = unconstrained
    report = engine.validate(sol, obs, fs)
    lines = report.lines() + ["PASS" if report.passed else "FAIL"]
    _write_text(args.out, "\n".join(lines) + "\n")
    return 0 if report.passed else 1


def cmd_report(args):
    obs = _observations(args.observations)
    spec_data = _load_json(args.constraints)
    if not isinstance(spec_data, dict) or "matrix" not in spec_data:
        raise InputError("report needs a nutrient spec (foods/nutrients/matrix/lb/ub)")
    spec = diet.spec_from_dict(spec_data)
    fs = diet.build_diet_polytope(spec)
    data = _load_json(args.solution)
    sol = engine.solution_from_dict(data, obs, fs)
    seed = data.get("seed") if data.get("seed") is not None else args.seed
    km = engine.kmeans_solution(obs, sol.L, seed, sol.metric, args.max_iter)
    centroids = km.representatives()
    out_dir = args.out or "."
    os.makedirs(out_dir, exist_ok=True)
    diet.write_nutrient_csv(os.path.join(out_dir, "nutrient_report.csv"),
                            diet.nutrient_report(sol, spec, centroids))
    if spec.groups:
        diet.write_group_csv(os.path.join(out_dir, "food_group_report.csv"),
                             diet.food_group_report(sol, spec, centroids))
    return 0


def cmd_gen2d(args):
    out_dir = args.out or "."
    os.makedirs(out_dir, exist_ok=True)
    obs = synthetic.gen2d(args.count, args.seed)
    write_observations_csv(os.path.join(out_dir, "observations.csv"), obs)
    _write_text(os.path.join(out_dir, "constraints.json"), dump_json(synthetic.EXAMPLE_CONSTRAINTS))
    return 0


def cmd_gen_diet(args):
    out_dir = args.out or "."
    os.makedirs(out_dir, exist_ok=True)
    obs = synthetic.gen_diet_observations(args.count, args.seed)
    write_observations_csv(os.path.join(out_dir, "observations.csv"), obs)
    _write_text(os.path.join(out_dir, "nutrient_spec.json"), dump_json(synthetic.diet_spec_dict()))
    return 0


class _MetricAction(argparse.Action):
    def __call__(self, parser, namespace, values, option_string=None):
        setattr(namespace, self.dest, values)
        namespace.metric_given = True


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--constraints", metavar="PATH")
    common.add_argument("--observations", metavar="PATH")
    common.add_argument("--method", metavar="NAME",
                        help="fit: one method (default emb); sweep: comma list (default all)")
    common.add_argument("--metric", metavar="NAME", default="sqeuclidean",
                        choices=[m.value for m in Metric], action=_MetricAction)
    group = common.add_mutually_exclusive_group()
    group.add_argument("--clusters", metavar="INT", type=int, default=3)
    group.add_argument("--cluster-range", metavar="A..B", type=parse_range)
    common.add_argument("--seed", metavar="INT", type=int, default=42)
    common.add_argument("--max-iter", metavar="INT", type=int, default=500)
    common.add_argument("--split", metavar="RATIO", type=float)
    common.add_argument("--out", metavar="PATH")
    common.add_argument("--unconstrained", action="store_true",
                        help="treat the feasible set as all of R^n")
    common.add_argument("--solution", metavar="PATH")
    common.add_argument("--count", metavar="INT", type=int)
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="mlio", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, func, help_ in [
        ("fit", cmd_fit, "fit one method and write the solution JSON"),
        ("sweep", cmd_sweep, "loss versus number of clusters, as CSV"),
        ("validate", cmd_validate, "re-check a solution JSON"),
        ("report", cmd_report, "diet nutrient and food-group reports"),
        ("gen2d", cmd_gen2d, "write the 2-D demo observations and constraints"),
        ("gen-diet", cmd_gen_diet, "write the synthetic diet spec and observations"),
    ]:
        p = sub.add_parser(name, parents=[common], help=help_)
        p.set_defaults(func=func, metric_given=False)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "fit" and args.method is None:
        args.method = "emb"
    if args.command == "fit" and args.method not in METHODS:
        print(f"error: unknown method {args.method!r}", file=sys.stderr)
        return 2
    if args.clusters is not None and args.clusters < 1:
        print("error: --clusters must be at least 1", file=sys.stderr)
        return 2
    if args.count is None:
        args.count = 80 if args.command == "gen2d" else 200
    try:
        return args.func(args)
    except (InputError, MlioError, OSError, ValueError, KeyError, TypeError) as exc:
        # malformed input files surface as ValueError/KeyError/TypeError from the loaders
        msg = f"missing field {exc}" if isinstance(exc, KeyError) else str(exc)
        print(f"error: {msg}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
