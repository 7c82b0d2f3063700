"""Shared test oracles, kept independent of the library's evaluation paths."""

import mpmath as mp
import pytest


def oracle_ml(rho: float, x: float, beta: float = 1.0, digits: int = 30) -> float:
    """Reference value of sum_k (-x)^k / Gamma(rho k + beta).

    Straight high-precision summation with working precision scaled to the
    largest term, so it stays trustworthy deep into the cancellation regime.
    """
    hump = x ** (1.0 / rho) if x > 0 else 0.0
    with mp.workdps(digits + 10 + int(0.45 * hump)):
        z = -mp.mpf(x)
        r, b = mp.mpf(rho), mp.mpf(beta)
        total = mp.mpf(0)
        k = 0
        tiny = mp.mpf(10) ** (-(digits + 10))
        while True:
            term = mp.power(z, k) / mp.gamma(r * k + b)
            total += term
            if k > hump and abs(term) < tiny * max(1, abs(total)):
                return float(total)
            k += 1
            if k > 100000:
                raise RuntimeError("oracle did not converge")


@pytest.fixture(scope="session")
def ml_oracle():
    return oracle_ml
