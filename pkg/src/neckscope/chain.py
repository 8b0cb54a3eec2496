"""Quantitative constant chain: neck quality to curvature-ratio lower bound.

``delta_of_Lb`` is the relative-volume target produced by a unit-radius neck
of half-length L_b; ``ascr_lower_bound`` inverts the final comparison between
that small relative volume and the hypersurface-area lower bound to produce a
guaranteed lower bound for the limit of R * d^2; ``constants_for`` searches
for the smallest neck demands delivering a requested bound.

Configuration covers the quantities the chain consumes but does not derive:
the Gauss-Bonnet remainder constant c(n) (from the hypersurface module) and
the ball-capping thresholds (eps_a, k_a, L_a), which are placeholders for
constants the underlying capping argument never makes explicit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import BelowFloor, InvalidInput
from .necks import epsilon_prime
from .warped import unit_sphere_volume

__all__ = [
    "ChainConfig",
    "ChainConstants",
    "delta_of_Lb",
    "ascr_lower_bound",
    "constants_for",
    "DEFAULT_CONFIG",
]


@dataclass(frozen=True)
class ChainConfig:
    """Configured (non-derived) inputs of the chain.

    eps_a, k_a, L_a are placeholder ball-capping thresholds (flagged as
    conventions, not derived values); c_n is the dimension constant of the
    Gauss-Bonnet remainder bound; eta1, eta2 in (0, 1] are the closeness
    slacks used when converting measured profiles into limit statements.
    """

    eps_a: float = 0.1
    k_a: int = 2
    L_a: float = 16.0
    eta1: float = 0.5
    eta2: float = 0.5
    c_n: dict = field(default_factory=lambda: {3: 1.0, 5: 2.0})

    def c(self, n: int) -> float:
        if n not in self.c_n:
            raise InvalidInput(f"no c(n) configured for n={n}")
        return self.c_n[n]


DEFAULT_CONFIG = ChainConfig()


def delta_of_Lb(n: int, L_b: float) -> float:
    """Relative-volume target delta produced by a unit neck of half-length L_b.

    delta = (11/10)^n * omega_{n-1} * (10/9) * 12
            / [ (omega_{n-1}/n) * ((9 L_b/10 + 2)^n - (9 L_b/10 - 2)^n) ].

    Strictly decreasing in L_b and O(1/L_b^2) as L_b grows.
    """
    if n < 3 or n % 2 == 0:
        raise InvalidInput("dimension must be odd and >= 3")
    if L_b < 16:
        raise BelowFloor("delta target requires L_b >= 16")
    omega = unit_sphere_volume(n)
    x = 0.9 * L_b
    numerator = (1.1 ** n) * omega * (10.0 / 9.0) * 12.0
    denominator = (omega / n) * ((x + 2.0) ** n - (x - 2.0) ** n)
    return numerator / denominator


def _rhs(a: float, n: int, c_n: float) -> float:
    """1 / [(c(n) * sum_{p<=m} a^{2p} + 1) * ((12/pi) a + 1)^n]; decreasing in a."""
    m = (n - 1) // 2
    s = sum(a ** (2 * p) for p in range(1, m + 1))
    return 1.0 / ((c_n * s + 1.0) * ((12.0 / math.pi) * a + 1.0) ** n)


def ascr_lower_bound(n: int, L0: float, c_n: float = None, eta1: float = 0.5,
                     config: ChainConfig = DEFAULT_CONFIG, tol: float = 1e-10) -> float:
    """Guaranteed lower bound C0 for the curvature ratio given a neck at L0.

    Solves delta_of_Lb(n, L0) = 1 / [(c(n) sum a^{2p} + 1) ((12/pi) a + 1)^n]
    for the critical ratio level a (the right side is strictly decreasing, so
    bisection applies) and returns C0 = max(a - eta1, 0)^2.
    """
    if not (0 < eta1 < 1):
        raise InvalidInput("eta1 must lie in (0, 1)")
    if c_n is None:
        c_n = config.c(n)
    if c_n <= 0:
        raise InvalidInput("c(n) must be positive")
    lhs = delta_of_Lb(n, L0)
    if lhs >= _rhs(0.0, n, c_n):
        return 0.0
    lo, hi = 0.0, 1.0
    while _rhs(hi, n, c_n) > lhs:
        hi *= 2.0
        if hi > 1e154:
            raise OverflowError("critical ratio level out of numeric range")
    while hi - lo > tol * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        if _rhs(mid, n, c_n) > lhs:
            lo = mid
        else:
            hi = mid
    a_star = 0.5 * (lo + hi)
    return max(a_star - eta1, 0.0) ** 2


@dataclass(frozen=True)
class ChainConstants:
    n: int
    C0_requested: float
    L_b: float
    delta: float
    eps_b: float
    eps0: float
    k0: int
    L0: float
    C0_bound: float
    config: ChainConfig

    def provenance(self) -> dict:
        """Which fields are derived versus configured conventions."""
        return {
            "L_b": "derived",
            "delta": "derived",
            "eps_b": "derived",
            "eps0": "derived (min with configured eps_a)",
            "k0": "configured placeholder",
            "L0": "derived",
            "C0_bound": "derived",
            "eps_a/k_a/L_a": "configured placeholder",
            "c_n": "module constant with regeneration test",
            "eta1/eta2": "configured",
        }


def constants_for(n: int, C0: float, config: ChainConfig = DEFAULT_CONFIG) -> ChainConstants:
    """Smallest neck demands (eps0, k0, L0) guaranteeing a ratio bound of C0.

    Doubles L_b from the floor until the bound clears C0, then bisects; the
    closeness demand is eps_b = epsilon_prime(1/10, 1, L_b) combined with the
    configured capping threshold via eps0 = min(eps_a, eps_b).
    """
    if n < 3 or n % 2 == 0:
        raise InvalidInput("dimension must be odd and >= 3")
    if C0 < 0:
        raise InvalidInput("C0 must be nonnegative")
    floor = max(config.L_a, 16.0)
    bound = lambda L: ascr_lower_bound(n, L, config.c(n), config.eta1)
    if C0 == 0.0 or bound(floor) >= C0:
        L_b = floor
    else:
        lo, hi = floor, 2.0 * floor
        while bound(hi) < C0:
            lo, hi = hi, hi * 2.0
            if hi > 1e150:
                raise OverflowError("requested C0 beyond numeric range")
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if bound(mid) >= C0:
                hi = mid
            else:
                lo = mid
            if hi - lo <= 1e-9 * hi:
                break
        L_b = hi
    eps_b = epsilon_prime(0.1, 1, L_b, n=n)
    eps0 = min(config.eps_a, eps_b)
    return ChainConstants(n, C0, L_b, delta_of_Lb(n, L_b), eps_b, eps0,
                          config.k_a, L_b, bound(L_b), config)
