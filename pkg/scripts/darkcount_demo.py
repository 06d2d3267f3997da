"""Dark-count channel: covert OOK budget, Willie's exact error and Bob's random-coding bound."""
import argparse
import math

from covert_photon import bounds, metrics, sim


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--eta", type=float, default=0.5)
    ap.add_argument("--p-d", type=float, default=1e-3)
    ap.add_argument("--epsilon", type=float, default=0.1)
    ap.add_argument("--trials", type=int, default=200)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    print(f"{'n':>7} {'|alpha|^2':>10} {'exact':>8} {'pinsker':>8}")
    for n in (100, 1000, 10_000, 100_000):
        a = bounds.covert_nbar_darkcount(args.epsilon, args.eta, args.p_d, n)
        p1 = bounds.darkcount_click_prob(1.0, a, args.eta, args.p_d)
        exact = sim.exact_binomial_error(n, args.p_d, p1)
        lb = metrics.pinsker_classical_lb(n * bounds.cre_darkcount_ub(1.0, a, args.eta, args.p_d)).lower
        print(f"{n:>7} {a:>10.4g} {exact:>8.4f} {lb:>8.4f}")

    n, m, q, alpha_sq, p_b = 10_000, 256, 0.5, 0.07, 0.1
    bound, s = bounds.ook_error_bound(n, math.log(m) / n, q, args.eta, alpha_sq, p_b)
    est = sim.bob_bac_error(n, m, q, args.eta, alpha_sq, p_b, args.trials, seed=args.seed)
    print(f"Bob OOK, n={n}, M={m}, |alpha|^2={alpha_sq}: simulated {est.estimate:.3f} "
          f"[{est.ci_low:.3f}, {est.ci_high:.3f}], Gallager bound {bound:.3f} at s={s:.3f}")


if __name__ == "__main__":
    main()
