"""Covert throughput versus n for several (epsilon, delta); writes CSV and SVG.

    python scripts/fig_bhom.py --outdir out/
"""
import argparse
import math
from pathlib import Path

from covert_photon import cli
from covert_photon.config import RunConfig

HERE = Path(__file__).resolve().parent


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--config", default=str(HERE / "configs" / "fig_bhom.json"))
    ap.add_argument("--outdir", default="out")
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()

    out = Path(args.outdir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / "bhom.csv"
    csv_path.write_text(cli.sweep_csv(RunConfig.load(args.config), args.workers))
    rows = cli.read_sweep(str(csv_path))
    series = cli.plot_svg(rows, str(out / "bhom.svg"))
    print(f"wrote {csv_path} and {out / 'bhom.svg'} ({series} series)")

    by = {(r["epsilon"], r["delta"], r["n"]): r["bits_exact"] for r in rows}
    n_top = max(r["n"] for r in rows)
    for eps in sorted({r["epsilon"] for r in rows}):
        lo, hi = by.get((eps, 0.01, n_top)), by.get((eps, 0.1, n_top))
        if lo is not None and hi is not None:
            print(f"eps={eps:g}, n={n_top:.0e}: bits {lo:.1f} (delta=0.01) vs {hi:.1f} (delta=0.1), "
                  f"gap {hi - lo:.4f} = log2(10) {math.log2(10):.4f}")


if __name__ == "__main__":
    main()
