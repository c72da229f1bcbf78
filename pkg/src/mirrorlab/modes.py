"""Exact single-mode quantities of the fixed-mirror + delta-mirror cavity.

The perfect mirror sits at x = 0 and the thin mirror at x = q > 0. For a wave
number k the mode is ``L sin(kx)`` inside the cavity and
``sqrt(2/pi) sin(k(x - q) + delta)`` outside it.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

__all__ = [
    "DomainError",
    "ModeParams",
    "ModeEvaluation",
    "ResonanceTable",
    "eval_mode",
    "transmissivity",
    "xi_from_reflectivity",
    "resonance_table",
    "lorentzian_lk_sq",
]

SQRT_2_OVER_PI = math.sqrt(2.0 / math.pi)


class DomainError(ValueError):
    """Raised for non-finite or out-of-domain inputs."""


@dataclass(frozen=True)
class ModeParams:
    k: float
    chi0: float

    def __post_init__(self):
        if not (math.isfinite(self.k) and math.isfinite(self.chi0)):
            raise DomainError("k and chi0 must be finite")
        if self.k <= 0:
            raise DomainError(f"k must be > 0, got {self.k}")
        if self.chi0 < 0:
            raise DomainError(f"chi0 must be >= 0, got {self.chi0}")

    @property
    def xi(self) -> float:
        return 4.0 * math.pi * self.chi0 * self.k


@dataclass(frozen=True)
class ModeEvaluation:
    """Mode amplitude and scattering phase at one mirror position.

    ``delta`` is the principal value in (-pi, pi]; every consumer uses it only
    through ``cos``/``sin`` so the branch is irrelevant.
    """

    q: float
    k: float
    L: float
    delta: float
    sin_delta: float
    cos_delta: float

    @property
    def phase(self) -> float:
        """Phase ``Phi = delta - k q`` of the laser-referenced mode."""
        return self.delta - self.k * self.q

    def profile_inside(self, x):
        return self.L * np.sin(self.k * np.asarray(x, dtype=float))

    def profile_outside(self, x):
        x = np.asarray(x, dtype=float)
        return SQRT_2_OVER_PI * np.sin(self.k * (x - self.q) + self.delta)

    def profile(self, x):
        """Piecewise mode profile V_k(x, q) for x >= 0."""
        x = np.asarray(x, dtype=float)
        return np.where(x <= self.q, self.profile_inside(x), self.profile_outside(x))


def _denominator(kq: float, xi: float) -> float:
    s = math.sin(kq)
    return 1.0 + xi * xi * s * s - xi * math.sin(2.0 * kq)


def eval_mode(q: float, p: ModeParams) -> ModeEvaluation:
    if not math.isfinite(q):
        raise DomainError(f"q must be finite, got {q!r}")
    if q <= 0:
        raise DomainError(f"q must be > 0, got {q}")
    kq = p.k * q
    xi = p.xi
    d = _denominator(kq, xi)
    L = SQRT_2_OVER_PI / math.sqrt(d)
    root = math.sqrt(d)
    s = math.sin(kq) / root
    c = (math.cos(kq) - xi * math.sin(kq)) / root
    delta = math.atan2(s, c)
    if delta == -math.pi:
        delta = math.pi
    return ModeEvaluation(q=q, k=p.k, L=L, delta=delta, sin_delta=s, cos_delta=c)


def transmissivity(xi: float) -> tuple[float, float]:
    """Return ``(T, R)`` of the delta mirror, ``T = 1 / (1 + (xi/2)^2)``."""
    if not math.isfinite(xi) or xi < 0:
        raise DomainError(f"xi must be finite and >= 0, got {xi!r}")
    t = 1.0 / (1.0 + 0.25 * xi * xi)
    return t, 1.0 - t


def xi_from_reflectivity(R: float) -> float:
    """Inverse of :func:`transmissivity`: ``xi = 2 sqrt(R / (1 - R))``."""
    if not 0 <= R <= 1:
        raise DomainError(f"reflectivity must lie in [0, 1], got {R}")
    if R == 1:
        raise OverflowError("a perfect mirror (R = 1) corresponds to xi = infinity")
    return 2.0 * math.sqrt(R / (1.0 - R))


@dataclass(frozen=True)
class ResonanceTable:
    """Extremizers of ``L_k(q)``.

    Positions are in metres; ``hwhm_kq`` is the resonance half-width in units
    of kq and ``hwhm_q`` the same width in metres.
    """

    k: float
    xi: float
    maximizers: np.ndarray
    minimizers: np.ndarray
    peak_values: np.ndarray
    trough_values: np.ndarray
    seeds: np.ndarray
    hwhm_kq: float
    hwhm_q: float
    numeric_fallback: bool = False
    notes: list = field(default_factory=list)


def _g(kq, xi):
    # dD/d(kq) / xi; vanishes exactly where tan(2kq) = 2/xi
    return xi * math.sin(2.0 * kq) - 2.0 * math.cos(2.0 * kq)


def _polish(a, b, xi):
    return brentq(_g, a, b, args=(xi,), xtol=1e-15, rtol=4 * np.finfo(float).eps)


def resonance_table(p: ModeParams, n_max: int) -> ResonanceTable:
    """Maximizers ``q_{2n}`` and minimizers ``q_{2n+1}`` of ``L_k(q)``, n < n_max.

    For xi >= 5 each extremizer is seeded at ``kq = j pi/2 + 1/xi`` (one Newton
    step from ``j pi/2``) and polished by bracketed root-finding on
    ``tan(2kq) = 2/xi``. Below that the seeds are unreliable and the extrema
    are located from a dense grid before polishing; ``numeric_fallback`` is set
    and a warning is emitted.
    """
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    xi = p.xi
    if xi == 0:
        raise DomainError("L_k(q) is constant for a transparent mirror (xi = 0)")
    notes = []
    fallback = xi < 5
    j = np.arange(2 * n_max)
    seeds = j * math.pi / 2 + 1.0 / xi
    kq = np.empty(2 * n_max)
    if not fallback:
        for i, s in enumerate(seeds):
            base = j[i] * math.pi / 2
            # the root for index j sits in (j pi/2, j pi/2 + pi/4); tighten around the seed when possible
            lo, hi = base, base + math.pi / 4
            width = 2.0 / xi**2
            if lo < s - width and s + width < hi and _g(s - width, xi) * _g(s + width, xi) < 0:
                lo, hi = s - width, s + width
            kq[i] = _polish(lo, hi, xi)
    else:
        msg = f"xi = {xi:.4g} < 5: analytic seeds skipped, using grid extremization"
        warnings.warn(msg, RuntimeWarning, stacklevel=2)
        notes.append(msg)
        for i in range(2 * n_max):
            base = j[i] * math.pi / 2
            grid = np.linspace(base, base + math.pi / 2, 4097)
            d = 1.0 + xi**2 * np.sin(grid) ** 2 - xi * np.sin(2 * grid)
            idx = int(np.argmin(d) if j[i] % 2 == 0 else np.argmax(d))
            lo = grid[max(idx - 1, 0)]
            hi = grid[min(idx + 1, grid.size - 1)]
            if _g(lo, xi) * _g(hi, xi) < 0:
                kq[i] = _polish(lo, hi, xi)
            else:
                kq[i] = grid[idx]
    q = kq / p.k
    L = SQRT_2_OVER_PI / np.sqrt(1.0 + xi**2 * np.sin(kq) ** 2 - xi * np.sin(2 * kq))
    return ResonanceTable(
        k=p.k,
        xi=xi,
        maximizers=q[0::2],
        minimizers=q[1::2],
        peak_values=L[0::2],
        trough_values=L[1::2],
        seeds=seeds / p.k,
        hwhm_kq=xi**-2,
        hwhm_q=xi**-2 / p.k,
        numeric_fallback=fallback,
        notes=notes,
    )


def lorentzian_lk_sq(q, p: ModeParams, n: int, q_center: float | None = None):
    """Lorentzian approximation of ``L_k(q)^2`` around the maximizer ``q_{2n}``.

    Returns ``(value, valid)``; ``valid`` is ``|k (q - q_{2n})| < 0.5``.
    """
    xi = p.xi
    if xi == 0:
        raise DomainError("Lorentzian form needs xi > 0")
    if q_center is None:
        q_center = resonance_table(p, n + 1).maximizers[n]
    v = p.k * (np.asarray(q, dtype=float) - q_center)
    value = (2.0 / (math.pi * xi**2)) / (v * v + xi**-4)
    valid = np.abs(v) < 0.5
    if np.ndim(q) == 0:
        return float(value), bool(valid)
    return value, valid
