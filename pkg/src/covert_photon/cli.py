"""covert-photon: bounds, sweeps, Monte Carlo runs, oracle checks and plots.

Exit codes: 0 success, 2 configuration or input error, 3 domain error,
4 bound violation or failed check. Reports go to stdout, diagnostics to stderr.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import bounds, experiments, verify
from .config import ConfigError, RunConfig
from .errors import CovertPhotonError
from .metrics import pinsker_quantum_lb

SCHEMA_TAG = "covert-photon v1"
SWEEP_COLUMNS = ["n", "epsilon", "delta", "eta", "n_b", "nbar", "bits_exact", "c_d",
                 "c_c_paper", "c_c_exact"]
SIM_COLUMNS = ["scenario", "n", "trials", "estimate", "ci_low", "ci_high", "analytic_bound", "pass"]

EXIT_CONFIG, EXIT_DOMAIN, EXIT_VIOLATION = 2, 3, 4


def _fmt(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, int):
        return str(x)
    if isinstance(x, float) and x.is_integer() and abs(x) < 2 ** 53:
        return str(int(x))
    return repr(float(x))


def _write(path: str | None, text: str) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _resolve_seed(flag: int | None, cfg: RunConfig) -> int:
    if flag is not None:
        return flag
    if cfg.sim.seed is not None:
        return cfg.sim.seed
    env = os.environ.get("COVERT_PHOTON_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise ConfigError(f"COVERT_PHOTON_SEED={env!r} is not an integer") from None
    return 0


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def bounds_report(cfg: RunConfig) -> dict:
    ch, b = cfg.channel, cfg.budget
    rep = bounds.bits_homodyne(b.n, b.epsilon, b.delta, ch.eta, ch.n_b)
    qre = bounds.qre_thermal_closed(rep.nbar, ch.eta, ch.n_b)
    doc = {
        "schema": "covert-photon/bounds/v1",
        "inputs": {"eta": ch.eta, "n_b": ch.n_b, "epsilon": b.epsilon, "delta": b.delta, "n": b.n},
        "nbar": rep.nbar,
        "qre_per_symbol_nats": qre,
        "qre_total_nats": b.n * qre,
        "willie_error_lb": pinsker_quantum_lb(b.n * qre).lower,
        "sigma_sq": rep.sigma_sq,
        "bits_exact": rep.bits_exact,
        "c_d": rep.c_d,
        "c_c_paper": rep.c_c,
        "c_c_exact": rep.c_c_exact,
        "sqrt_n_term": rep.sqrt_n_term,
        "o1_term": rep.o1_term,
    }
    if ch.p_d > 0:
        doc["darkcount_nbar"] = bounds.covert_nbar_darkcount(b.epsilon, ch.eta, ch.p_d, b.n)
    return doc


def _sweep_row(args: tuple) -> list:
    n, eps, delta, eta, n_b = args
    r = bounds.bits_homodyne(n, eps, delta, eta, n_b)
    return [n, eps, delta, eta, n_b, r.nbar, r.bits_exact, r.c_d, r.c_c, r.c_c_exact]


def sweep_csv(cfg: RunConfig, workers: int = 1) -> str:
    b, ch = cfg.budget, cfg.channel
    grid = b.grid()
    if not grid or not b.epsilons or not b.deltas:
        raise ConfigError("sweep grid is empty")
    jobs = sorted((eps, delta, n) for eps in set(b.epsilons) for delta in set(b.deltas) for n in grid)
    args = [(n, eps, delta, ch.eta, ch.n_b) for eps, delta, n in jobs]
    for a in args[:1]:
        _sweep_row(a)  # surface domain errors before forking
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_sweep_row, args, chunksize=16))
    else:
        rows = [_sweep_row(a) for a in args]
    lines = [f"# {SCHEMA_TAG}", ",".join(SWEEP_COLUMNS)]
    lines += [",".join(_fmt(x) for x in row) for row in rows]
    return "\n".join(lines) + "\n"


def simulate(cfg: RunConfig, seed: int, trials: int | None, workers: int) -> tuple[str, dict]:
    if trials is not None and trials < 100:
        raise ConfigError("simulate needs at least 100 trials")
    results = experiments.run_all(cfg, seed, trials, workers)
    lines = [f"# {SCHEMA_TAG}", ",".join(SIM_COLUMNS)]
    for r in results:
        e = r.estimate
        lines.append(",".join([r.scenario, _fmt(r.n), _fmt(e.trials), _fmt(e.estimate),
                               _fmt(e.ci_low), _fmt(e.ci_high), _fmt(r.analytic_bound),
                               _fmt(r.passed)]))
    summary = {
        "schema": "covert-photon/simulate/v1",
        "seed": seed,
        "all_pass": all(r.passed for r in results),
        "scenarios": [
            {"scenario": r.scenario, "n": r.n, "trials": r.estimate.trials, "errors": r.estimate.errors,
             "estimate": r.estimate.estimate, "ci": [r.estimate.ci_low, r.estimate.ci_high],
             "analytic_bound": r.analytic_bound, "bound_side": r.side, "pass": r.passed,
             "params": r.params}
            for r in results
        ],
    }
    return "\n".join(lines) + "\n", summary


def verify_table(checks: list[verify.Check]) -> str:
    w = max(len(c.name) for c in checks)
    out = [f"{'check':<{w}}  {'max_dev':>12}  {'tolerance':>12}  result"]
    for c in checks:
        out.append(f"{c.name:<{w}}  {c.max_dev:12.3e}  {c.tol:12.3e}  {'pass' if c.passed else 'FAIL'}")
    return "\n".join(out) + "\n"


def read_sweep(path: str) -> list[dict]:
    """Rows of a sweep CSV as floats; ConfigError if anything is off."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None
    body = [ln for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    reader = csv.DictReader(io.StringIO("\n".join(body)))
    need = {"n", "epsilon", "delta", "bits_exact"}
    if reader.fieldnames is None or not need <= set(reader.fieldnames):
        raise ConfigError(f"{path}: missing columns {sorted(need - set(reader.fieldnames or []))}")
    rows = []
    for i, row in enumerate(reader, start=1):
        try:
            rows.append({k: float(row[k]) for k in need})
        except (TypeError, ValueError):
            raise ConfigError(f"{path}: row {i} is not numeric") from None
    if not rows:
        raise ConfigError(f"{path}: no data rows")
    return rows


def plot_svg(rows: list[dict], out: str) -> int:
    """Log-x chart of bits_exact vs n, one line per (epsilon, delta). Returns series count."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    matplotlib.rcParams["svg.hashsalt"] = "covert-photon"
    series: dict[tuple[float, float], list[tuple[float, float]]] = {}
    for r in rows:
        series.setdefault((r["epsilon"], r["delta"]), []).append((r["n"], r["bits_exact"]))
    fig, ax = plt.subplots(figsize=(6.4, 4.4))
    for (eps, delta), pts in sorted(series.items()):
        pts.sort()
        ax.plot([p[0] for p in pts], [p[1] for p in pts], label=f"eps={eps:g}, delta={delta:g}",
                gid=f"series-eps{eps:g}-delta{delta:g}")
    ax.set_xscale("log")
    ax.set_xlabel("n (channel uses)")
    ax.set_ylabel("covert bits")
    ax.grid(True, which="major", alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(out, format="svg", metadata={"Date": None})
    plt.close(fig)
    return len(series)


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="covert-photon", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration")
    common.add_argument("--seed", type=int, help="master seed (default: config, then $COVERT_PHOTON_SEED)")
    common.add_argument("--out", help="output path (default: stdout, or config output.path)")
    common.add_argument("--trials", type=int, help="Monte Carlo trials per scenario")
    common.add_argument("--workers", type=int, help="worker processes")
    sub.add_parser("bounds", parents=[common], help="closed-form covert budget and throughput")
    sub.add_parser("sweep", parents=[common], help="throughput over an (n, epsilon, delta) grid")
    sub.add_parser("simulate", parents=[common], help="Monte Carlo scenarios against their bounds")
    v = sub.add_parser("verify", parents=[common], help="closed forms against independent oracles")
    v.add_argument("--tolerance-scale", type=float, help=argparse.SUPPRESS)
    pl = sub.add_parser("plot", parents=[common], help="SVG of a sweep CSV")
    pl.add_argument("csv", help="CSV written by the sweep command")
    return p


def _run(args: argparse.Namespace) -> int:
    cfg = RunConfig.load(args.config)
    out = args.out or cfg.output_path
    workers = args.workers or cfg.sim.workers
    if args.command == "bounds":
        _write(out, json.dumps(bounds_report(cfg), indent=2) + "\n")
        return 0
    if args.command == "sweep":
        _write(out, sweep_csv(cfg, workers))
        return 0
    if args.command == "simulate":
        seed = _resolve_seed(args.seed, cfg)
        if args.trials is None and cfg.sim.trials < 100:
            raise ConfigError("simulate needs at least 100 trials")
        text, summary = simulate(cfg, seed, args.trials, workers)
        doc = json.dumps(summary, indent=2) + "\n"
        if out is None:
            sys.stdout.write(text)
        else:
            Path(out).write_text(text)
            Path(out).with_suffix(".json").write_text(doc)
            sys.stdout.write(doc)
        return 0 if summary["all_pass"] else EXIT_VIOLATION
    if args.command == "verify":
        scale = args.tolerance_scale if args.tolerance_scale is not None else cfg.tolerance_scale
        checks = verify.run_checks(scale)
        sys.stdout.write(verify_table(checks))
        if out is not None:
            Path(out).write_text(json.dumps({"schema": "covert-photon/verify/v1",
                                             "checks": [c.__dict__ for c in checks]}, indent=2) + "\n")
        return 0 if all(c.passed for c in checks) else EXIT_VIOLATION
    if args.command == "plot":
        target = out or str(Path(args.csv).with_suffix(".svg"))
        count = plot_svg(read_sweep(args.csv), target)
        print(f"wrote {target} ({count} series)", file=sys.stderr)
        return 0
    raise AssertionError(args.command)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _run(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CovertPhotonError as exc:
        print(f"domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
