"""Grid search over inverse-time alpha and the resulting tODE MSE curves."""

import numpy as np

from _common import channel, parser
from ode_mmse import InverseTime, grid_search_alpha, gram_eigensystem, mmse_mse, mse_curve
from ode_mmse.analysis import write_functional_table


def main():
    p = parser(__doc__)
    p.add_argument("--alpha", type=float, nargs="+", default=[1, 10, 50, 100])
    p.add_argument("--horizon", type=float, default=0.8)
    args = p.parse_args()
    cfg, H = channel(args)
    eig = gram_eigensystem(H)
    best, results = grid_search_alpha(args.alpha, eig, cfg.sigma2, args.horizon)
    write_functional_table(args.output / "gridsearch_functional.csv", results,
                           {"channel_sha256": H.digest(), "T": args.horizon, "best_alpha": best})
    grid = np.linspace(0, 3, 3001)
    for a in args.alpha:
        mse_curve(eig, cfg.sigma2, grid, schedule=InverseTime(a, cfg.sigma2)).to_csv(
            args.output / f"gridsearch_alpha{a:g}.csv", {"channel_sha256": H.digest()})
    print(" ".join(f"F({r.alpha:g})={r.value:.4f}" for r in results), f"best={best:g}",
          f"MSE_mmse={mmse_mse(eig, cfg.sigma2):.4f}")


if __name__ == "__main__":
    main()
