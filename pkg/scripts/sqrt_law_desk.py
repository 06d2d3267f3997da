"""Square-root law at desk scale: Willie's optimal error and Bob's decoding error versus n.

With the covert power nbar ~ 1/sqrt(n), Willie's error stays near 1/2 - epsilon
while Bob's error falls. Holding nbar fixed instead lets Willie win as n grows.
"""
import argparse

from covert_photon import bounds, sim
from covert_photon.fock import ChannelParams


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--eta", type=float, default=0.5)
    ap.add_argument("--n-b", type=float, default=1.0)
    ap.add_argument("--epsilon", type=float, default=0.1)
    ap.add_argument("--m", type=int, default=16, help="codebook size for Bob")
    ap.add_argument("--trials", type=int, default=2000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    link = ChannelParams(eta=args.eta, n_b=args.n_b)
    fixed = bounds.covert_nbar_thermal(args.epsilon, args.eta, args.n_b, 256)
    print(f"{'n':>6} {'nbar':>10} {'willie':>8} {'willie@fixed':>13} {'bob':>8}")
    for n in (256, 1024, 4096, 16384):
        nbar = bounds.covert_nbar_thermal(args.epsilon, args.eta, args.n_b, n)
        mu0, mu1 = sim.willie_means(link, nbar)
        willie = sim.exact_count_test_error(mu0, mu1, n)
        willie_fixed = sim.exact_count_test_error(*sim.willie_means(link, fixed), n)
        bob = sim.bob_homodyne_error(link, nbar, n, args.m, args.trials, seed=args.seed + n)
        print(f"{n:>6} {nbar:>10.4g} {willie:>8.4f} {willie_fixed:>13.4f} {bob.estimate:>8.4f}")


if __name__ == "__main__":
    main()
