"""Command-line interface: ``contextacert <command> [graph source] [options]``.

Exit codes: 0 success (or SelfTestable), 1 usage/parse/solver error,
2 NotSelfTestable (classify) or refused input, 3 Inconclusive.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import asdict, dataclass, fields, replace

from contextacert import __version__, canonical, certifier, exgraph, experiment, sdp
from contextacert.errors import ContextaCertError, NotSelfTestable

CONFIG_ENV = "CONTEXTACERT_CONFIG"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


@dataclass(frozen=True)
class CliConfig:
    gap_tol: float = 1e-8
    feas_tol: float = 1e-8
    rank_tol: float = 1e-6
    overlap_tol: float = 1e-6
    retries: int = 5
    seed: int = 0
    format: str = "text"

    def __post_init__(self):
        for name in ("gap_tol", "feas_tol", "rank_tol", "overlap_tol"):
            if not getattr(self, name) > 0:
                raise UsageError(f"{name} must be positive")
        if self.format not in ("text", "json"):
            raise UsageError("format must be 'text' or 'json'")
        if self.retries < 0:
            raise UsageError("retries must be non-negative")

    def solver_options(self) -> sdp.SolverOptions:
        return sdp.SolverOptions(gap_tol=self.gap_tol, feas_tol=self.feas_tol, seed=self.seed)

    def classify_options(self) -> certifier.ClassifyOptions:
        return certifier.ClassifyOptions(
            solver=self.solver_options(),
            rank_tol=self.rank_tol,
            overlap_tol=self.overlap_tol,
            retries=self.retries,
            seed=self.seed,
        )


def load_config(env=None) -> CliConfig:
    """Defaults overridden by the JSON file named in ``CONTEXTACERT_CONFIG``."""
    env = os.environ if env is None else env
    path = env.get(CONFIG_ENV)
    if not path:
        return CliConfig()
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    known = {f.name for f in fields(CliConfig)}
    unknown = set(data) - known
    if unknown:
        raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
    return CliConfig(**data)


def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def _float_list(text):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers: {exc}") from exc


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--format", choices=("text", "json"))
    common.add_argument("--tol-gap", type=float, dest="gap_tol")
    common.add_argument("--tol-feas", type=float, dest="feas_tol")
    common.add_argument("--tol-rank", type=float, dest="rank_tol")
    common.add_argument("--seed", type=int)
    common.add_argument("--retries", type=int)

    source = _Parser(add_help=False)
    group = source.add_mutually_exclusive_group(required=True)
    group.add_argument("--cycle", type=int, metavar="N")
    group.add_argument("--anticycle", type=int, metavar="N")
    group.add_argument("--counterexample6", action="store_true")
    group.add_argument("--file", metavar="PATH")

    parser = _Parser(prog="contextacert", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sub.add_parser("alpha", parents=[common, source], help="independence number (NCHV bound)")
    sub.add_parser("theta", parents=[common, source], help="Lovasz theta with solver diagnostics")
    sub.add_parser("classify", parents=[common, source], help="self-testing verdict")

    p = sub.add_parser("canonical", parents=[common], help="closed-form optimal ensemble")
    p.add_argument("family", choices=("hole", "antihole"))
    p.add_argument("n", type=int)

    p = sub.add_parser("certify", parents=[common, source], help="simulate the certification protocol")
    p.add_argument("--device", choices=[k.value for k in experiment.DeviceKind if k.value != "custom"], default="honest")
    p.add_argument("--eta", type=float, default=0.0)
    p.add_argument("--shots", type=_positive_int, default=100_000)
    p.add_argument("--confidence", type=float, default=0.99)

    p = sub.add_parser("robustness", parents=[common, source], help="perturbation sweep and fitted exponent")
    p.add_argument("--levels", type=_float_list, default=list(experiment.DEFAULT_LEVELS))
    p.add_argument("--trials", type=_positive_int, default=20)
    return parser


def graph_from_args(args) -> exgraph.ExclusivityGraph:
    if args.cycle is not None:
        return exgraph.cycle(args.cycle)
    if args.anticycle is not None:
        return exgraph.anticycle(args.anticycle)
    if args.counterexample6:
        return exgraph.counterexample6()
    return exgraph.load_graph(args.file)


def _emit(cfg, payload, text):
    if cfg.format == "json":
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        print(text)


def _envelope(cfg, command, g=None):
    out = {"version": __version__, "command": command, "config": asdict(cfg)}
    if g is not None:
        out["graph"] = {"name": g.label(), **g.to_dict()}
    return out


def cmd_alpha(args, cfg):
    g = graph_from_args(args)
    mis = exgraph.maximum_independent_set(g)
    payload = {**_envelope(cfg, "alpha", g), "alpha": len(mis), "independent_set": list(mis)}
    _emit(cfg, payload, f"{len(mis)}")
    return 0


def cmd_theta(args, cfg):
    g = graph_from_args(args)
    sol = sdp.solve_theta(g, cfg.solver_options())
    payload = {**_envelope(cfg, "theta", g), "theta": sol.theta, "diagnostics": sol.solution.diagnostics(),
               "residuals": sol.residuals()}
    text = f"{sol.theta:.7f}\n# iterations={sol.solution.iterations} gap={sol.solution.gap:.2e}"
    _emit(cfg, payload, text)
    return 0


def cmd_classify(args, cfg):
    g = graph_from_args(args)
    v = certifier.classify(g, cfg.classify_options())
    payload = {**_envelope(cfg, "classify", g), **v.to_dict()}
    lines = [
        v.verdict.value,
        f"theta={v.theta:.7f} alpha={v.nchv_bound} rank_X={v.rank_X} rank_Z={v.rank_Z}",
        f"strict_complementarity={v.strict_complementarity} null_dim={v.null_dim} "
        f"overlaps_nonzero={v.overlaps_nonzero} retries_used={v.retries_used}",
    ]
    lines += [f"note: {n}" for n in v.notes]
    _emit(cfg, payload, "\n".join(lines))
    return v.exit_code


def cmd_canonical(args, cfg):
    if args.family == "hole":
        ens = canonical.hole_umbrella_vectors(args.n)
    else:
        ens = canonical.antihole_vectors(args.n)
    payload = {**_envelope(cfg, "canonical"), "ensemble": ens.to_dict()}
    lines = [f"{ens.family.value} n={ens.n} d={ens.d} theta={ens.theta:.7f} source={ens.source}",
             "state " + " ".join(f"{x:.10f}" for x in ens.state)]
    lines += [f"u{j + 1} " + " ".join(f"{x:.10f}" for x in v) for j, v in enumerate(ens.projector_vectors)]
    _emit(cfg, payload, "\n".join(lines))
    return 0


def cmd_certify(args, cfg):
    g = graph_from_args(args)
    device = experiment.DeviceModel(args.device, args.shots, cfg.seed, eta=args.eta)
    report = experiment.run_certification(g, device, args.confidence)
    payload = {**_envelope(cfg, "certify", g), "report": report.to_dict()}
    text = (f"{'ACCEPT' if report.accept else 'REJECT'}\n"
            f"S={report.observed_sum:.6f} threshold={report.threshold:.6f} "
            f"theta={report.theta:.6f} delta={report.delta:.6f} shots={report.shots}")
    _emit(cfg, payload, text)
    return 0


def cmd_robustness(args, cfg):
    g = graph_from_args(args)
    for level in args.levels:
        if not 0.0 <= level <= 0.1:
            raise UsageError(f"levels must lie in [0, 0.1], got {level}")
    result = experiment.robustness_sweep(g, args.levels, args.trials, cfg.seed)
    payload = {**_envelope(cfg, "robustness", g), "sweep": result.to_dict()}
    slope = "nan" if result.slope is None else f"{result.slope:.4f}"
    const = "nan" if result.constant is None else f"{result.constant:.4f}"
    text = result.to_csv() + f"# slope={slope} constant={const} fitted_points={result.fitted_points}"
    _emit(cfg, payload, text)
    return 0


COMMANDS = {
    "alpha": cmd_alpha,
    "theta": cmd_theta,
    "classify": cmd_classify,
    "canonical": cmd_canonical,
    "certify": cmd_certify,
    "robustness": cmd_robustness,
}


def main(argv=None) -> int:
    logging.basicConfig(level=logging.ERROR, format="%(levelname)s: %(message)s")
    try:
        args = build_parser().parse_args(argv)
        cfg = load_config()
        overrides = {k: getattr(args, k) for k in ("format", "gap_tol", "feas_tol", "rank_tol", "seed", "retries")
                     if getattr(args, k, None) is not None}
        cfg = replace(cfg, **overrides)
        return COMMANDS[args.command](args, cfg)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except NotSelfTestable as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return 2
    except (ContextaCertError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
