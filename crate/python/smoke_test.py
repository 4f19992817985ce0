"""Smoke test for the phaseret_py extension module.

Build first:  pip install --no-build-isolation -e crates/python
Then run:     python python/smoke_test.py
"""

import cmath
import random

import phaseret_py as pr


def random_signal(n, seed):
    rng = random.Random(seed)
    return [complex(rng.gauss(0, 0.7), rng.gauss(0, 0.7)) for _ in range(n)]


def main():
    n = 12
    x = random_signal(n, 1)
    norm2 = sum(abs(v) ** 2 for v in x)

    for kind in ("phi", "psi"):
        ens = pr.Ensemble(kind, n)
        assert len(ens) == 4 * (n - 1), repr(ens)
        b = ens.measure(x)

        rep = pr.recover(kind, b, n)
        assert rep.degenerate_count == 0
        assert pr.aligned_error(x, rep.x_hat) <= 1e-18 * norm2

        # a global phase leaves the intensities unchanged
        shifted = [v * cmath.exp(0.7j) for v in x]
        assert max(abs(p - q) for p, q in zip(b, ens.measure(shifted))) < 1e-12

        noisy = pr.add_noise(b, 1e-6, seed=3)
        assert pr.aligned_error(x, pr.recover(kind, noisy, n).x_hat) < 1e-2 * norm2

        m = pr.mask_measure(kind, x)
        assert pr.aligned_error(x, pr.recover_masked(kind, m, n)) <= 1e-18 * norm2

        spec = pr.certificate_spectrum(kind, x)
        assert abs(spec[-1]) <= 1e-9 * spec[0] < spec[-2]

        checks = pr.verify("certificate", kind, 8, 5, 0)
        assert all(c[0] for c in checks), checks

    small = random_signal(6, 2)
    ens = pr.Ensemble("psi", 6)
    res = pr.solve_phaselift(ens, ens.measure(small))
    assert res.converged and res.rank1_gap < 1e-5
    assert pr.aligned_error(small, res.x_hat) <= 1e-8 * sum(abs(v) ** 2 for v in small)

    high, _low, threshold_db, _crossing = pr.bound_psi(100.0)
    assert abs(high - 0.72) < 1e-12 and abs(threshold_db - 9.542) < 1e-3

    csv = pr.run_bench("psi", 16, [20.0, 40.0], trials=50, seed=5, jobs=2)
    assert csv == pr.run_bench("psi", 16, [20.0, 40.0], trials=50, seed=5, jobs=1)
    assert csv.splitlines()[0] == "snr_db,mse_mean,mse_std,bound_high,bound_low,trials,degenerate"

    try:
        pr.Ensemble("random", 4)
    except ValueError:
        pass
    else:
        raise AssertionError("random ensembles need an explicit size")

    print("python smoke test passed")


if __name__ == "__main__":
    main()
