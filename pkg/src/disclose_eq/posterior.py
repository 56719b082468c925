"""Piecewise posterior-mean distributions.

A posterior cdf is a contiguous list of segments on [0, top] plus at most
one atom.  Segment kinds:

  full_disclosure  cdf follows the prior F on [a, b]
  flat             cdf constant at `level` on [a, b] (a support gap)
  affine_power     cdf = (base + slope*(v - anchor)) ** (1/root_power),
                   i.e. cdf**root_power is affine on [a, b]

The cdf is right-continuous; an atom of mass m at x shows up as a jump
between the segment ending at x and the one starting there.  Every
integral used downstream (plain and power moments of the cdf) is closed
form per segment.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Union

import numpy as np

from .errors import DomainError, ValidationFailureError
from .priors import Prior

ArrayLike = Union[float, np.ndarray]

_CONTINUITY_TOL = 1e-9


@dataclass(frozen=True)
class FullDisclosure:
    a: float
    b: float


@dataclass(frozen=True)
class Flat:
    a: float
    b: float
    level: float


@dataclass(frozen=True)
class AffinePower:
    a: float
    b: float
    base: float
    slope: float
    anchor: float
    root_power: int  # cdf**root_power is affine; root_power = n - 1


Segment = Union[FullDisclosure, Flat, AffinePower]


def _affine_w(seg: AffinePower, v: ArrayLike) -> ArrayLike:
    return seg.base + seg.slope * (v - seg.anchor)


@dataclass(frozen=True)
class PosteriorDistribution:
    prior: Prior
    segments: tuple[Segment, ...]
    atom: tuple[float, float] | None = None  # (location, mass)

    # -- segment bookkeeping ----------------------------------------------
    def _seg_cdf(self, seg: Segment, v: ArrayLike) -> ArrayLike:
        if isinstance(seg, FullDisclosure):
            return self.prior.cdf(v)
        if isinstance(seg, Flat):
            return np.full_like(v, seg.level) if isinstance(v, np.ndarray) else seg.level
        w = _affine_w(seg, v)
        w = np.clip(w, 0.0, 1.0) if isinstance(w, np.ndarray) else min(max(w, 0.0), 1.0)
        if seg.root_power == 1:
            return w
        return w ** (1.0 / seg.root_power)

    def _seg_levels(self, seg: Segment) -> tuple[float, float]:
        return float(self._seg_cdf(seg, seg.a)), float(self._seg_cdf(seg, seg.b))

    def _seg_integral(self, seg: Segment, lo: float, hi: float) -> float:
        """Integral of the segment cdf over [lo, hi] (within [a, b])."""
        if hi <= lo:
            return 0.0
        if isinstance(seg, FullDisclosure):
            return float(self.prior.cum_cdf(hi) - self.prior.cum_cdf(lo))
        if isinstance(seg, Flat):
            return seg.level * (hi - lo)
        p = seg.root_power
        w_lo = min(max(_affine_w(seg, lo), 0.0), 1.0)
        w_hi = min(max(_affine_w(seg, hi), 0.0), 1.0)
        e = (p + 1.0) / p
        return p / (seg.slope * (p + 1.0)) * (w_hi**e - w_lo**e)

    def _seg_pow_integral(self, seg: Segment, lo: float, hi: float, k: int) -> float:
        """Integral of cdf**k over [lo, hi] (within [a, b])."""
        if hi <= lo:
            return 0.0
        if isinstance(seg, FullDisclosure):
            return float(self.prior.cum_pow_cdf(hi, k) - self.prior.cum_pow_cdf(lo, k))
        if isinstance(seg, Flat):
            return seg.level**k * (hi - lo)
        p = seg.root_power
        w_lo = min(max(_affine_w(seg, lo), 0.0), 1.0)
        w_hi = min(max(_affine_w(seg, hi), 0.0), 1.0)
        e = (k + p) / p
        return p / (seg.slope * (k + p)) * (w_hi**e - w_lo**e)

    # -- public surface -----------------------------------------------------
    @property
    def top(self) -> float:
        """Top of the support (cdf reaches 1 there)."""
        last = self.segments[-1].b
        if self.atom is not None:
            return max(last, self.atom[0])
        return last

    def breakpoints(self) -> list[float]:
        pts = {0.0, 1.0}
        for seg in self.segments:
            pts.add(seg.a)
            pts.add(seg.b)
        if self.atom is not None:
            pts.add(self.atom[0])
        return sorted(pts)

    def cdf_left(self, v: float) -> float:
        """Left limit of the cdf at v (drops the atom's own mass)."""
        out = float(self.cdf(v))
        if self.atom is not None and abs(self.atom[0] - v) <= 1e-15:
            out -= self.atom[1]
        return out

    def support_bottom(self) -> float:
        """Lowest value carrying mass (the inverse cdf at zero)."""
        return float(self.sample(0.0))

    def cdf(self, v: ArrayLike) -> ArrayLike:
        """Right-continuous cdf; atoms jump at their location."""
        scalar = not isinstance(v, np.ndarray)
        arr = np.atleast_1d(np.asarray(v, dtype=float))
        out = np.ones_like(arr)
        # side="right" sends a segment boundary to the *next* segment, which
        # makes the cdf right-continuous across an atom between segments.
        ends = np.array([seg.b for seg in self.segments])
        idx = np.searchsorted(ends, arr, side="right")
        for i, seg in enumerate(self.segments):
            mask = idx == i
            if np.any(mask):
                out[mask] = self._seg_cdf(seg, arr[mask])
        out[arr >= self.top] = 1.0
        return float(out[0]) if scalar else out

    def cum_integral(self, z: ArrayLike) -> ArrayLike:
        """Integral of the cdf from 0 to z."""
        return self._cum(z, k=1)

    def pow_cum_integral(self, z: ArrayLike, k: int) -> ArrayLike:
        """Integral of cdf**k from 0 to z."""
        return self._cum(z, k=k)

    def _cum(self, z: ArrayLike, k: int) -> ArrayLike:
        scalar = not isinstance(z, np.ndarray)
        arr = np.atleast_1d(np.asarray(z, dtype=float))
        prefix = [0.0]
        for seg in self.segments:
            if k == 1:
                prefix.append(prefix[-1] + self._seg_integral(seg, seg.a, seg.b))
            else:
                prefix.append(prefix[-1] + self._seg_pow_integral(seg, seg.a, seg.b, k))
        ends = np.array([seg.b for seg in self.segments])
        idx = np.searchsorted(ends, arr, side="left")
        out = np.empty_like(arr)
        for i, seg in enumerate(self.segments):
            mask = idx == i
            if np.any(mask):
                zs = arr[mask]
                if k == 1:
                    part = np.array([self._seg_integral(seg, seg.a, min(zz, seg.b)) for zz in zs])
                else:
                    part = np.array([self._seg_pow_integral(seg, seg.a, min(zz, seg.b), k) for zz in zs])
                out[mask] = prefix[i] + part
        beyond = idx >= len(self.segments)
        if np.any(beyond):
            out[beyond] = prefix[-1] + (arr[beyond] - ends[-1])  # cdf == 1 past the top
        return float(out[0]) if scalar else out

    def mean(self) -> float:
        return 1.0 - float(self.cum_integral(1.0))

    def excess_above(self, r: ArrayLike) -> ArrayLike:
        """E[(v - r)+] = integral of (1 - cdf) from r to 1."""
        return (1.0 - r) - (self.cum_integral(1.0) - self.cum_integral(r))

    def sample(self, u: ArrayLike) -> ArrayLike:
        """Inverse-cdf sampling; u in [0, 1)."""
        scalar = not isinstance(u, np.ndarray)
        arr = np.atleast_1d(np.asarray(u, dtype=float))
        if arr.size and (arr.min() < 0.0 or arr.max() >= 1.0):
            raise DomainError("sampling variates must lie in [0, 1)")
        table: list[tuple[float, float, Any]] = []  # (q_lo, q_hi, inverter)
        for seg in self.segments:
            lo, hi = self._seg_levels(seg)
            if hi > lo:
                table.append((lo, hi, seg))
        if self.atom is not None:
            loc, mass = self.atom
            lo = float(self.cdf(loc)) - mass
            table.append((lo, lo + mass, ("atom", loc)))
        table.sort(key=lambda t: t[0])
        q_los = np.array([t[0] for t in table])
        out = np.empty_like(arr)
        idx = np.clip(np.searchsorted(q_los, arr, side="right") - 1, 0, len(table) - 1)
        for i, (lo, hi, seg) in enumerate(table):
            mask = idx == i
            if not np.any(mask):
                continue
            q = np.clip(arr[mask], lo, hi)
            if isinstance(seg, tuple):
                out[mask] = seg[1]
            elif isinstance(seg, FullDisclosure):
                out[mask] = self.prior.quantile(q)
            else:
                out[mask] = seg.anchor + (q**seg.root_power - seg.base) / seg.slope
        return float(out[0]) if scalar else out

    def validate(self) -> None:
        """Structural checks: contiguous, nondecreasing, reaches 1 at the top."""
        prev_end = 0.0
        prev_level = 0.0
        for seg in self.segments:
            if abs(seg.a - prev_end) > _CONTINUITY_TOL:
                raise ValidationFailureError("segment-contiguity", f"gap at {seg.a}")
            lo, hi = self._seg_levels(seg)
            jump = 0.0
            if self.atom is not None and abs(self.atom[0] - seg.a) <= 1e-15:
                jump = self.atom[1]
            if lo + 1e-9 < prev_level or abs(lo - prev_level - jump) > _CONTINUITY_TOL:
                raise ValidationFailureError(
                    "cdf-continuity", f"level {prev_level}->{lo} at {seg.a} (atom {jump})"
                )
            if hi < lo - _CONTINUITY_TOL:
                raise ValidationFailureError("cdf-monotone", f"segment on [{seg.a},{seg.b}]")
            prev_end = seg.b
            prev_level = hi
        if self.atom is not None and abs(self.atom[0] - prev_end) <= 1e-15:
            prev_level += self.atom[1]
        if abs(prev_level - 1.0) > _CONTINUITY_TOL:
            raise ValidationFailureError("cdf-top", f"cdf({prev_end}) = {prev_level} != 1")

    def to_json_dict(self) -> dict[str, Any]:
        segs = []
        for seg in self.segments:
            if isinstance(seg, FullDisclosure):
                segs.append({"kind": "full_disclosure", "a": seg.a, "b": seg.b})
            elif isinstance(seg, Flat):
                segs.append({"kind": "flat", "a": seg.a, "b": seg.b, "level": seg.level})
            else:
                segs.append(
                    {
                        "kind": "affine_power",
                        "a": seg.a,
                        "b": seg.b,
                        "base": seg.base,
                        "beta": seg.slope,
                        "r_anchor": seg.anchor,
                        "root_power": seg.root_power,
                    }
                )
        return {"segments": segs, "atom": list(self.atom) if self.atom else None}


def full_disclosure_distribution(prior: Prior) -> PosteriorDistribution:
    return PosteriorDistribution(prior=prior, segments=(FullDisclosure(0.0, 1.0),))


def point_mass(prior: Prior, loc: float) -> PosteriorDistribution:
    """Degenerate posterior: all mass at loc (the no-information signal)."""
    return PosteriorDistribution(
        prior=prior, segments=(Flat(0.0, loc, 0.0),), atom=(loc, 1.0)
    )
