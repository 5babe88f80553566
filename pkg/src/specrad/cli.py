"""Command-line driver.

Exit codes: 0 success, 1 usage or configuration error, 2 verification failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict
from pathlib import Path

from . import digraph as dg
from .dist import EntryDistribution
from .ensemble import sample_matrix
from .errors import ConfigurationError, SpecradError
from .experiments import ExperimentConfig, ExperimentResult, run, write_csv
from .spectral import default_k, eigenvalues, radius_bounds

EXIT_OK, EXIT_USAGE, EXIT_VERIFY = 0, 1, 2

_SUBCOMMANDS = {
    "figure1": "figure1",
    "convergence": "convergence",
    "toy-phase": "toy_phase",
    "lemmas": "lemma_suite",
    "ak-freq": "ak_frequency",
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _int_list(s: str) -> list[int]:
    try:
        return [int(x) for x in s.split(",") if x]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {s!r}") from exc


def _float_list(s: str) -> list[float]:
    try:
        return [float(x) for x in s.split(",") if x]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {s!r}") from exc


def _dist_arg(s: str) -> dict:
    """A JSON descriptor, a path to one, or a bare kind name."""
    if s.lstrip().startswith("{"):
        return json.loads(s)
    p = Path(s)
    if p.suffix == ".json" and p.exists():
        return json.loads(p.read_text())
    return {"kind": s}


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON config file; flags override its values")
    p.add_argument("--n", type=_int_list, help="matrix sizes, comma separated")
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--alpha", type=_float_list, help="Pareto tail index (list for figure1)")
    p.add_argument("--q", type=_float_list, help="sparse toy probability (list for toy-phase)")
    p.add_argument("--eps", type=float)
    p.add_argument("--B", type=float, help="assumed bound on E|x|^(2+eps)")
    p.add_argument("--delta", type=float)
    p.add_argument("--k", type=_int_list, help="moment order / path half-length")
    p.add_argument("--out", help="output directory")
    p.add_argument("--dist", type=_dist_arg, help="entry law: JSON descriptor, .json file or kind name")
    p.add_argument("--workers", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="specrad", description="Spectral radius experiments for heavy-tailed random matrices.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in (*_SUBCOMMANDS, "enumerate", "spectrum"):
        _common(sub.add_parser(name))
    return parser


def _config_from_args(experiment: str, args) -> ExperimentConfig:
    d: dict = {}
    if args.config:
        try:
            d = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigurationError(f"cannot read config {args.config}: {exc}") from exc
        if d.setdefault("experiment", experiment) != experiment:
            raise ConfigurationError(f"config is for {d['experiment']!r}, not {experiment!r}")
    d["experiment"] = experiment
    overrides = {
        "n_values": args.n, "trials": args.trials, "seed": args.seed, "eps": args.eps, "B": args.B,
        "delta": args.delta, "output_dir": args.out, "dist": args.dist, "workers": args.workers,
    }
    d.update({key: v for key, v in overrides.items() if v is not None})
    if args.k is not None:
        if experiment == "ak_frequency":
            d["k_values"] = args.k
        else:
            d["k_override"] = args.k[0]
    if args.alpha is not None:
        if experiment == "figure1":
            d["alphas"] = args.alpha
        else:
            d["dist"] = {"kind": "pareto", "alpha": args.alpha[0]}
    if args.q is not None:
        if experiment == "toy_phase":
            d["q_values"] = args.q
        else:
            base = dict(d.get("dist") or {"kind": "sparse_toy", "eps": d.get("eps", 0.5)})
            base.update(kind="sparse_toy", q=args.q[0])
            base.setdefault("eps", d.get("eps", 0.5))
            d["dist"] = base
    return ExperimentConfig.from_dict(d)


def _report(res: ExperimentResult) -> None:
    for row in res.summary:
        print(json.dumps(row, sort_keys=True, default=str))
    print(f"wrote {len(res.files)} files to {res.config.output_dir}")


def _apply_plain_config(args) -> None:
    """Fill unset flags of enumerate/spectrum from a config file (same keys as ExperimentConfig)."""
    if not args.config:
        return
    try:
        d = json.loads(Path(args.config).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigurationError(f"cannot read config {args.config}: {exc}") from exc
    allowed = {"experiment", "dist", "n_values", "seed", "k_override", "k_values", "output_dir"}
    unknown = set(d) - allowed
    if unknown:
        raise ConfigurationError(f"unknown config keys for {args.command}: {sorted(unknown)}")
    ks = d.get("k_values") or ([d["k_override"]] if d.get("k_override") is not None else None)
    for attr, val in (("dist", d.get("dist")), ("n", d.get("n_values")), ("seed", d.get("seed")),
                      ("k", ks), ("out", d.get("output_dir"))):
        if getattr(args, attr) is None and val is not None:
            setattr(args, attr, val)


def _enumerate(args) -> int:
    ns = args.n or [4]
    ks = args.k or [3]
    out = Path(args.out or "results")
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    for N in ns:
        for k in ks:
            rows += [asdict(r) for r in dg.even_digraph_census(N, k)]
    write_csv(out / "census.csv", rows, ["k", "l", "N", "labeled_count", "class_count", "bound", "bound_ok"])
    for r in rows:
        print(json.dumps(r))
    return EXIT_OK if all(r["bound_ok"] for r in rows) else EXIT_VERIFY


def _spectrum(args) -> int:
    d = args.dist or {"kind": "gaussian"}
    if args.alpha is not None:
        d = {"kind": "pareto", "alpha": args.alpha[0]}
    if args.q is not None:
        d = {"kind": "sparse_toy", "q": args.q[0], "eps": args.eps if args.eps is not None else 0.5}
    dist = EntryDistribution.from_dict(d)
    n = (args.n or [200])[0]
    X = sample_matrix(dist, n, args.seed or 0)
    out = Path(args.out or "results")
    out.mkdir(parents=True, exist_ok=True)
    spec = eigenvalues(X)
    spec.to_csv(out / "spectrum.csv")
    k = (args.k or [default_k(n)])[0]
    rb = radius_bounds(X, ks=sorted({2, k}), ms=(1, 2, 4, 8))
    rb.to_json(out / "bounds.json")
    print(rb.to_json())
    ok = all(b["value"] >= rb.rho_exact * (1 - 1e-9) for b in rb.to_dict()["bounds"])
    return EXIT_OK if ok else EXIT_VERIFY


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command in ("enumerate", "spectrum"):
            _apply_plain_config(args)
        if args.command == "enumerate":
            return _enumerate(args)
        if args.command == "spectrum":
            return _spectrum(args)
        try:
            cfg = _config_from_args(_SUBCOMMANDS[args.command], args)
        except TypeError as exc:  # wrongly typed config values
            raise ConfigurationError(str(exc)) from exc
        res = run(cfg)
    except (ConfigurationError, json.JSONDecodeError) as exc:
        print(f"specrad: config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SpecradError as exc:
        print(f"specrad: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    _report(res)
    return EXIT_OK if res.ok else EXIT_VERIFY


if __name__ == "__main__":
    sys.exit(main())
