"""Closed-form predictions: attachment rates, limiting degree law, regimes.

``A`` and ``B`` are evaluated in exact rational arithmetic from the inputs
(decimal strings are parsed exactly), then rounded once to float.  Per-degree
rates are ``l * A_l = l * A + B``.

The degree law comes from the ratio recursion

    p(l) = p(l-1) * (l-1) A_{l-1} / (l A_l + 1),   l >= 3,

seeded with ``p(1) = (1-alpha)/(A_1+1)`` and
``p(2) = (A_1+alpha)/((A_1+1)(2A_2+1))``.  The product form usually quoted
for ``l >= 3`` omits a factor ``l`` in its denominator; the version used as a
cross-check here is

    p(l) = (A_1+alpha) / (A_1 * l A_l * prod_{j<=l} (1 + 1/(j A_j))),

which agrees with the recursion for every ``l >= 2`` and reduces to
``4/(l(l+1)(l+2))`` when ``alpha = delta = 0``.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

import numpy as np

Number = Union[int, float, str, Fraction]

DEFAULT_LMAX = 10_000


class Regime(str, enum.Enum):
    SUB = "Sub"
    CRITICAL = "Critical"
    SUPER = "Super"


def _exact(x: Number) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, str):
        return Fraction(x.strip())
    return Fraction(x)


def _check(alpha: Fraction, delta: Fraction) -> None:
    if not 0 <= alpha <= 1:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
    if not delta > -1:
        raise ValueError(f"delta must be > -1, got {delta}")


def exact_rates(alpha: Number, delta: Number) -> tuple[Fraction, Fraction]:
    """``(A, B)`` as exact fractions."""
    a, d = _exact(alpha), _exact(delta)
    _check(a, d)
    denom = (a + 1) * (2 * (a + 1) + d)
    return ((a + 1) ** 2 + d * a) / denom, d * (1 + a) * (1 - a) / denom


def compute_A(alpha: Number, delta: Number) -> float:
    return float(exact_rates(alpha, delta)[0])


def compute_B(alpha: Number, delta: Number) -> float:
    return float(exact_rates(alpha, delta)[1])


def gamma(alpha: Number, delta: Number) -> float:
    """Power-law exponent ``1 + 1/A``."""
    A, _ = exact_rates(alpha, delta)
    return float(1 + 1 / A)


def classify_regime(alpha: Number, delta: Number) -> Regime:
    """Regime from the parameters, compared exactly (no rounding of ``A``)."""
    a, d = _exact(alpha), _exact(delta)
    _check(a, d)
    if d == 0 or a == 1:
        return Regime.CRITICAL
    return Regime.SUB if d > 0 else Regime.SUPER


def rate_table(alpha: Number, delta: Number, l_max: int) -> np.ndarray:
    """``A_l = A + B/l`` for ``l = 1..l_max`` (index 0 holds ``l = 1``)."""
    A, B = exact_rates(alpha, delta)
    ell = np.arange(1, l_max + 1, dtype=np.float64)
    return float(A) + float(B) / ell


def degree_law_recursion(alpha: Number, delta: Number, l_max: int) -> np.ndarray:
    """``p(l)`` for ``l = 1..l_max`` from the ratio recursion."""
    if l_max < 2:
        raise ValueError("l_max must be at least 2")
    a = float(_exact(alpha))
    A_l = rate_table(alpha, delta, l_max)
    ell = np.arange(1, l_max + 1, dtype=np.float64)
    rate = ell * A_l  # l * A_l
    p = np.empty(l_max)
    p[0] = (1 - a) / (A_l[0] + 1)
    p[1] = (A_l[0] + a) / ((A_l[0] + 1) * (2 * A_l[1] + 1))
    if l_max > 2:
        ratios = rate[1:-1] / (rate[2:] + 1)
        # cumprod applies the ratios in sequence, exactly like the scalar loop
        p[2:] = p[1] * np.cumprod(ratios)
    return p


def degree_law_product(alpha: Number, delta: Number, l_max: int) -> np.ndarray:
    """Product-form ``p(l)`` for ``l = 2..l_max``; entry 0 is ``p(1)``.

    Independent of the recursion: built from the running product
    ``prod_j (1 + 1/(j A_j))`` rather than from successive ratios.
    """
    a = float(_exact(alpha))
    A_l = rate_table(alpha, delta, l_max)
    ell = np.arange(1, l_max + 1, dtype=np.float64)
    rate = ell * A_l
    prod = np.cumprod(1.0 + 1.0 / rate)
    p = (A_l[0] + a) / (A_l[0] * rate * prod)
    p[0] = (1 - a) / (A_l[0] + 1)
    return p


def barabasi_albert_law(ell) -> np.ndarray:
    """``4 / (l(l+1)(l+2))``, the limit law at ``alpha = delta = 0``."""
    ell = np.asarray(ell, dtype=np.float64)
    return 4.0 / (ell * (ell + 1) * (ell + 2))


@dataclass(frozen=True)
class TheoryTable:
    alpha: float
    delta: float
    A: float
    B: float
    gamma: float
    regime: Regime
    p: np.ndarray
    A_l: np.ndarray
    l_max: int

    def header(self) -> dict:
        return {"alpha": self.alpha, "delta": self.delta, "A": self.A, "B": self.B,
                "gamma": self.gamma, "regime": self.regime.value}

    def p_of(self, ell: int) -> float:
        return float(self.p[ell - 1])

    def to_csv(self) -> str:
        lines = ["# " + json.dumps(self.header()), "l,p_l,A_l"]
        for i, (pl, al) in enumerate(zip(self.p, self.A_l), start=1):
            lines.append(f"{i},{float(pl)!r},{float(al)!r}")
        return "\n".join(lines) + "\n"


def degree_law(alpha: Number, delta: Number, l_max: int = DEFAULT_LMAX) -> TheoryTable:
    A, B = exact_rates(alpha, delta)
    return TheoryTable(
        alpha=float(_exact(alpha)),
        delta=float(_exact(delta)),
        A=float(A),
        B=float(B),
        gamma=float(1 + 1 / A),
        regime=classify_regime(alpha, delta),
        p=degree_law_recursion(alpha, delta, l_max),
        A_l=rate_table(alpha, delta, l_max),
        l_max=l_max,
    )


def loglog_slope(x, y) -> tuple[float, float, float]:
    """OLS fit of ``log y`` on ``log x``: ``(slope, intercept, r_squared)``."""
    lx = np.log(np.asarray(x, dtype=np.float64))
    ly = np.log(np.asarray(y, dtype=np.float64))
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    ss_tot = float(((ly - ly.mean()) ** 2).sum())
    r2 = 1.0 - float((resid**2).sum()) / ss_tot if ss_tot > 0 else 1.0
    return float(slope), float(intercept), min(max(r2, 0.0), 1.0)


def tail_exponent_check(table: TheoryTable, l_lo: int, l_hi: int) -> float:
    """Least-squares slope of ``log p(l)`` against ``log l`` over ``[l_lo, l_hi]``."""
    if not 2 <= l_lo < l_hi <= table.l_max:
        raise ValueError(f"need 2 <= l_lo < l_hi <= {table.l_max}")
    ell = np.arange(l_lo, l_hi + 1)
    return loglog_slope(ell, table.p[l_lo - 1 : l_hi])[0]


@dataclass(frozen=True)
class TailBounds:
    """Truncation slack for ``sum p`` and ``sum l p`` beyond ``l_max``.

    The tail constant ``c = p(L) L^gamma`` is read off the last entry and the
    tail sums are bounded by twice their integral approximations
    ``c L^{1-gamma}/(gamma-1)`` and ``c L^{2-gamma}/(gamma-2)``, plus a
    floating-point summation floor.
    """

    mass: float
    mean: float


def tail_bounds(table: TheoryTable, safety: float = 2.0) -> TailBounds:
    L = table.l_max
    g = table.gamma
    c = table.p[-1] * L**g
    floor = 64 * np.finfo(np.float64).eps * math.log2(L)
    mass = safety * c * L ** (1 - g) / (g - 1) + floor
    mean = safety * c * L ** (2 - g) / (g - 2) + 4 * floor if g > 2 else math.inf
    return TailBounds(mass, mean)


@dataclass(frozen=True)
class Scaling:
    """``Theta`` class of an expectation; ``exponent`` is the power of ``t``."""

    law: str
    exponent: float
    log_power: int = 0


def predicted_scalings(alpha: Number, delta: Number) -> dict[str, Scaling]:
    """Growth classes of ``E[C_t]`` (``"triples"``) and ``E[C2(t)]`` (``"c2"``)."""
    regime = classify_regime(alpha, delta)
    A = compute_A(alpha, delta)
    if regime is Regime.SUB:
        return {"triples": Scaling("t", 1.0), "c2": Scaling("1", 0.0)}
    if regime is Regime.CRITICAL:
        return {"triples": Scaling("t ln t", 1.0, 1), "c2": Scaling("1/ln t", 0.0, -1)}
    return {"triples": Scaling("t^(2A)", 2 * A), "c2": Scaling("t^(1-2A)", 1 - 2 * A)}
