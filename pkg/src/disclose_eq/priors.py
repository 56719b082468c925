"""Prior valuation distributions on [0, 1].

Three families: uniform, power (cdf v**a), and piecewise-linear cdfs.
Every moment the solvers consume is closed form, including the power
moments of the cdf, so the nested bisections upstream never touch a
quadrature rule.  Methods accept floats (fast path inside solver loops)
and numpy arrays (grids, sampling).
"""
from __future__ import annotations

import bisect as _stdbisect
from dataclasses import dataclass
from typing import Any, Union

import numpy as np

from .errors import ConfigError, DomainError

ArrayLike = Union[float, np.ndarray]

_CONVEXITY_GRID = 1001
_CONVEXITY_TOL = -1e-10


def _check_unit_interval(x: ArrayLike, name: str) -> None:
    if isinstance(x, np.ndarray):
        if x.size and (float(np.min(x)) < 0.0 or float(np.max(x)) > 1.0):
            raise DomainError(f"{name} must lie in [0, 1]")
    elif not 0.0 <= x <= 1.0:
        raise DomainError(f"{name} must lie in [0, 1], got {x!r}")


@dataclass(frozen=True)
class TruncatedMoments:
    """Conditional moments of the prior on an interval (a, b).

    mass       F(b) - F(a)
    mu_tilde   E[v | a < v < b]
    eta_tilde  E[F(v)**(n-1) | a < v < b] = (F(b)**n - F(a)**n) / (n * mass)
    """

    mass: float
    mu_tilde: float
    eta_tilde: float


class Prior:
    """Common moment machinery; subclasses provide cdf/quantile primitives."""

    # -- primitives supplied by subclasses --------------------------------
    def cdf(self, v: ArrayLike) -> ArrayLike:
        raise NotImplementedError

    def pdf(self, v: ArrayLike) -> ArrayLike:
        raise NotImplementedError

    def quantile(self, q: ArrayLike) -> ArrayLike:
        raise NotImplementedError

    def cum_cdf(self, v: ArrayLike) -> ArrayLike:
        """Integral of F from 0 to v."""
        raise NotImplementedError

    def cum_pow_cdf(self, v: ArrayLike, k: int) -> ArrayLike:
        """Integral of F**k from 0 to v (k >= 1)."""
        raise NotImplementedError

    def pow_cdf_deriv(self, v: float, n: int) -> float:
        """Derivative of F(v)**(n-1); right-continuous at kinks."""
        raise NotImplementedError

    def to_json_dict(self) -> dict[str, Any]:
        raise NotImplementedError

    # -- derived moments ---------------------------------------------------
    def mean(self) -> float:
        return 1.0 - float(self.cum_cdf(1.0))

    def partial_vf(self, a: float, b: float) -> float:
        """Integral of v dF over (a, b), by parts: vF| - int F."""
        fa = self.cdf(a)
        fb = self.cdf(b)
        return b * fb - a * fa - (self.cum_cdf(b) - self.cum_cdf(a))

    def conditional_mean_above(self, a: float) -> float:
        """E[v | v > a]."""
        mass = 1.0 - self.cdf(a)
        if mass <= 0.0:
            raise DomainError("conditional mean above the support top")
        return self.partial_vf(a, 1.0) / mass

    def conditional_mean_below(self, b: float) -> float:
        """E[v | v < b]."""
        mass = self.cdf(b)
        if mass <= 0.0:
            raise DomainError("conditional mean below the support bottom")
        return self.partial_vf(0.0, b) / mass

    def truncated_moments(self, a: float, b: float, n: int) -> TruncatedMoments:
        if b <= a:
            raise DomainError(f"degenerate interval: need a < b, got [{a}, {b}]")
        _check_unit_interval(a, "a")
        _check_unit_interval(b, "b")
        fa = self.cdf(a)
        fb = self.cdf(b)
        mass = fb - fa
        mu_tilde = self.partial_vf(a, b) / mass
        eta_tilde = (fb**n - fa**n) / (n * mass)
        return TruncatedMoments(mass=mass, mu_tilde=mu_tilde, eta_tilde=eta_tilde)

    def check_convexity(self, n: int) -> bool:
        """True iff F(v)**(n-1) is weakly convex on [0, 1]."""
        grid = np.linspace(0.0, 1.0, _CONVEXITY_GRID)
        y = np.asarray(self.cdf(grid)) ** (n - 1)
        second = y[2:] - 2.0 * y[1:-1] + y[:-2]
        return bool(np.min(second) >= _CONVEXITY_TOL)


@dataclass(frozen=True)
class UniformPrior(Prior):
    """F(v) = v."""

    def cdf(self, v: ArrayLike) -> ArrayLike:
        _check_unit_interval(v, "v")
        return v

    def pdf(self, v: ArrayLike) -> ArrayLike:
        return np.ones_like(v) if isinstance(v, np.ndarray) else 1.0

    def quantile(self, q: ArrayLike) -> ArrayLike:
        _check_unit_interval(q, "q")
        return q

    def cum_cdf(self, v: ArrayLike) -> ArrayLike:
        return 0.5 * v * v

    def cum_pow_cdf(self, v: ArrayLike, k: int) -> ArrayLike:
        return v ** (k + 1) / (k + 1)

    def pow_cdf_deriv(self, v: float, n: int) -> float:
        if n == 2:
            return 1.0
        return (n - 1) * v ** (n - 2)

    def check_convexity(self, n: int) -> bool:
        return n >= 2

    def to_json_dict(self) -> dict[str, Any]:
        return {"family": "uniform"}


@dataclass(frozen=True)
class PowerPrior(Prior):
    """F(v) = v**a with a > 0.

    F**(n-1) is weakly convex iff a*(n-1) >= 1; the constructor does not
    enforce that (the prior carries no n), solvers check it.
    """

    a: float

    def __post_init__(self) -> None:
        if not (np.isfinite(self.a) and self.a > 0.0):
            raise DomainError(f"power exponent must be positive, got {self.a!r}")

    def cdf(self, v: ArrayLike) -> ArrayLike:
        _check_unit_interval(v, "v")
        return v**self.a

    def pdf(self, v: ArrayLike) -> ArrayLike:
        return self.a * v ** (self.a - 1.0)

    def quantile(self, q: ArrayLike) -> ArrayLike:
        _check_unit_interval(q, "q")
        return q ** (1.0 / self.a)

    def cum_cdf(self, v: ArrayLike) -> ArrayLike:
        return v ** (self.a + 1.0) / (self.a + 1.0)

    def cum_pow_cdf(self, v: ArrayLike, k: int) -> ArrayLike:
        return v ** (self.a * k + 1.0) / (self.a * k + 1.0)

    def pow_cdf_deriv(self, v: float, n: int) -> float:
        e = self.a * (n - 1) - 1.0
        if e == 0.0:
            return self.a * (n - 1)
        return self.a * (n - 1) * v**e

    def check_convexity(self, n: int) -> bool:
        return self.a * (n - 1) >= 1.0 - 1e-12

    def to_json_dict(self) -> dict[str, Any]:
        return {"family": "power", "a": self.a}


@dataclass(frozen=True)
class PiecewiseLinearPrior(Prior):
    """Piecewise-linear cdf through knots ((0,0), ..., (1,1)).

    Knot values and cumulative probabilities must be strictly increasing,
    which keeps the density positive and finite on every piece; all
    integrals below are exact piece-wise polynomials.
    """

    knots: tuple[tuple[float, float], ...]

    def __post_init__(self) -> None:
        ks = self.knots
        if len(ks) < 3:
            raise DomainError("piecewise cdf needs at least 3 knots (>= 2 segments)")
        if ks[0] != (0.0, 0.0) or ks[-1] != (1.0, 1.0):
            raise DomainError("piecewise cdf must start at (0,0) and end at (1,1)")
        xs = [k[0] for k in ks]
        qs = [k[1] for k in ks]
        if any(x1 <= x0 for x0, x1 in zip(xs, xs[1:])):
            raise DomainError("knot values must be strictly increasing")
        if any(q1 <= q0 for q0, q1 in zip(qs, qs[1:])):
            raise DomainError("knot probabilities must be strictly increasing")

    # cached views (plain tuples keep the dataclass hashable)
    @property
    def _xs(self) -> tuple[float, ...]:
        return tuple(k[0] for k in self.knots)

    @property
    def _qs(self) -> tuple[float, ...]:
        return tuple(k[1] for k in self.knots)

    @property
    def _slopes(self) -> tuple[float, ...]:
        xs, qs = self._xs, self._qs
        return tuple((qs[i + 1] - qs[i]) / (xs[i + 1] - xs[i]) for i in range(len(xs) - 1))

    def _piece(self, v: float) -> int:
        i = _stdbisect.bisect_right(self._xs, v) - 1
        return min(max(i, 0), len(self._xs) - 2)

    def cdf(self, v: ArrayLike) -> ArrayLike:
        _check_unit_interval(v, "v")
        if isinstance(v, np.ndarray):
            return np.interp(v, self._xs, self._qs)
        i = self._piece(v)
        return self._qs[i] + self._slopes[i] * (v - self._xs[i])

    def pdf(self, v: ArrayLike) -> ArrayLike:
        if isinstance(v, np.ndarray):
            idx = np.clip(np.searchsorted(self._xs, v, side="right") - 1, 0, len(self._slopes) - 1)
            return np.asarray(self._slopes)[idx]
        return self._slopes[self._piece(v)]

    def quantile(self, q: ArrayLike) -> ArrayLike:
        _check_unit_interval(q, "q")
        if isinstance(q, np.ndarray):
            return np.interp(q, self._qs, self._xs)
        j = min(max(_stdbisect.bisect_right(self._qs, q) - 1, 0), len(self._qs) - 2)
        return self._xs[j] + (q - self._qs[j]) / self._slopes[j]

    def _knot_cum(self, k: int) -> tuple[float, ...]:
        """Integral of F**k from 0 up to each knot."""
        xs, qs, ms = self._xs, self._qs, self._slopes
        out = [0.0]
        for i in range(len(ms)):
            piece = (qs[i + 1] ** (k + 1) - qs[i] ** (k + 1)) / (ms[i] * (k + 1))
            out.append(out[-1] + piece)
        return tuple(out)

    def cum_pow_cdf(self, v: ArrayLike, k: int) -> ArrayLike:
        cums = self._knot_cum(k)
        xs, qs, ms = self._xs, self._qs, self._slopes
        if isinstance(v, np.ndarray):
            idx = np.clip(np.searchsorted(xs, v, side="right") - 1, 0, len(ms) - 1)
            f = np.interp(v, xs, qs)
            base = np.asarray(cums)[idx]
            q0 = np.asarray(qs)[idx]
            m = np.asarray(ms)[idx]
            return base + (f ** (k + 1) - q0 ** (k + 1)) / (m * (k + 1))
        i = self._piece(v)
        f = qs[i] + ms[i] * (v - xs[i])
        return cums[i] + (f ** (k + 1) - qs[i] ** (k + 1)) / (ms[i] * (k + 1))

    def cum_cdf(self, v: ArrayLike) -> ArrayLike:
        return self.cum_pow_cdf(v, 1)

    def pow_cdf_deriv(self, v: float, n: int) -> float:
        f = self.cdf(v)
        return (n - 1) * f ** (n - 2) * self.pdf(v) if n > 2 else self.pdf(v)

    def to_json_dict(self) -> dict[str, Any]:
        return {"family": "piecewise", "knots": [list(k) for k in self.knots]}


def prior_from_json(spec: dict[str, Any]) -> Prior:
    """Build a Prior from its JSON encoding; raises ConfigError on bad specs."""
    if not isinstance(spec, dict) or "family" not in spec:
        raise ConfigError("prior spec must be an object with a 'family' key")
    family = spec["family"]
    try:
        if family == "uniform":
            return UniformPrior()
        if family == "power":
            return PowerPrior(a=float(spec["a"]))
        if family == "piecewise":
            knots = tuple((float(x), float(q)) for x, q in spec["knots"])
            return PiecewiseLinearPrior(knots=knots)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"malformed prior spec: {exc}") from exc
    except DomainError as exc:
        raise ConfigError(str(exc)) from exc
    raise ConfigError(f"unknown prior family {family!r}")
