"""Radiation-pressure force and potential in nondimensional units.

Positions are measured in units of 1/k (so one potential well has length pi)
and the force is the cycle-averaged (RWA) radiation force on the mirror.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

__all__ = [
    "ExtremaTable",
    "denominator",
    "f_rwa",
    "v_rwa",
    "force_maximizer",
    "force_minimizer",
    "force_zero",
    "extrema_table",
    "sawtooth_slope",
    "v_sawtooth",
    "f_piecewise",
    "f_lorentzian",
]

_XTOL = 1e-15


def _check_xi(xi: float) -> float:
    xi = float(xi)
    if not math.isfinite(xi) or xi < 0:
        raise ValueError(f"xi must be finite and >= 0, got {xi!r}")
    return xi


def _out(values, scalar_input):
    return float(values) if scalar_input else values


def denominator(x, xi):
    """``1 + xi^2 sin^2 x - xi sin 2x``, strictly positive for every x."""
    s = np.sin(x)
    return 1.0 + xi * xi * s * s - xi * np.sin(2.0 * x)


def f_rwa(x, xi):
    """Cycle-averaged radiation force ``-1/2 [1 - 1/D(x)]``.

    Periodic with period pi. Accepts scalars or arrays.
    """
    xi = _check_xi(xi)
    scalar = np.ndim(x) == 0
    x = np.asarray(x, dtype=float)
    d = denominator(x, xi)
    # (1/D - 1) written as (1 - D)/D keeps precision when D is close to 1
    return _out(0.5 * (1.0 - d) / d, scalar)


def v_rwa(x, xi):
    """Potential whose negative gradient is :func:`f_rwa`, with ``V(n pi) = 0``.

    The branch ``m = round(x/pi)`` selects the interval
    ``((2m-1) pi/2, (2m+1) pi/2]``; the closed form is evaluated on the reduced
    coordinate ``y = x - m pi`` so that large x keeps full precision.
    """
    xi = _check_xi(xi)
    scalar = np.ndim(x) == 0
    x = np.asarray(x, dtype=float)
    if np.any(x < 0) or not np.all(np.isfinite(x)):
        raise ValueError("v_rwa is defined for finite x >= 0 only")
    m = np.floor(x / math.pi + 0.5)
    y = x - m * math.pi
    v = 0.5 * y - 0.5 * np.arctan((1.0 + xi * xi) * np.tan(y) - xi) - 0.5 * math.atan(xi)
    return _out(v, scalar)


def _g_extremum(x, xi):
    # zero exactly where tan(2x) = 2/xi
    return xi * math.sin(2.0 * x) - 2.0 * math.cos(2.0 * x)


def force_maximizer(xi: float, n: int) -> float:
    """Polished maximizer ``x_{2n}`` of the force in well n (near ``n pi + 1/xi``)."""
    xi = _check_xi(xi)
    if xi == 0:
        raise ValueError("the force vanishes identically for xi = 0")
    a = n * math.pi
    return brentq(_g_extremum, a, a + math.pi / 4, args=(xi,), xtol=_XTOL, rtol=4 * np.finfo(float).eps)


def force_minimizer(xi: float, n: int) -> float:
    """Polished minimizer ``x_{2n+1}`` of the force (near ``(n + 1/2) pi + 1/xi``)."""
    xi = _check_xi(xi)
    if xi == 0:
        raise ValueError("the force vanishes identically for xi = 0")
    a = n * math.pi + math.pi / 2
    return brentq(_g_extremum, a, a + math.pi / 4, args=(xi,), xtol=_XTOL, rtol=4 * np.finfo(float).eps)


def force_zero(xi: float, n: int) -> float:
    """Potential minimizer ``x_n**`` (force zero near ``n pi + 2/xi``)."""
    lo = force_maximizer(xi, n)
    hi = force_minimizer(xi, n)
    return brentq(lambda x: f_rwa(x, xi), lo, hi, xtol=_XTOL, rtol=4 * np.finfo(float).eps)


@dataclass(frozen=True)
class ExtremaTable:
    """Critical points of the force and potential for wells ``0..n_max-1``.

    ``numeric_only`` is set when xi < 5, where the analytic seeds
    (``n pi + 1/xi`` and friends) are not trustworthy and only the bracketed
    root-finding results should be used.
    """

    xi: float
    v_max_at: np.ndarray
    v_min_at: np.ndarray
    v_min_values: np.ndarray
    f_max_at: np.ndarray
    f_max_values: np.ndarray
    f_min_at: np.ndarray
    f_min_values: np.ndarray
    seeds: dict
    numeric_only: bool


def extrema_table(xi: float, n_max: int) -> ExtremaTable:
    xi = _check_xi(xi)
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    if xi == 0:
        raise ValueError("no isolated extrema for xi = 0")
    n = np.arange(n_max)
    fmax = np.array([force_maximizer(xi, k) for k in n])
    fmin = np.array([force_minimizer(xi, k) for k in n])
    zeros = np.array([force_zero(xi, k) for k in n])
    seeds = {
        "f_max_at": n * math.pi + 1.0 / xi,
        "f_min_at": (n + 0.5) * math.pi + 1.0 / xi,
        "v_min_at": n * math.pi + 2.0 / xi,
    }
    return ExtremaTable(
        xi=xi,
        v_max_at=n * math.pi,
        v_min_at=zeros,
        v_min_values=v_rwa(zeros, xi),
        f_max_at=fmax,
        f_max_values=f_rwa(fmax, xi),
        f_min_at=fmin,
        f_min_values=f_rwa(fmin, xi),
        seeds=seeds,
        numeric_only=xi < 5,
    )


def sawtooth_slope(xi: float) -> float:
    """Slope ``m+ = -V(2/xi) / (pi - 2/xi)`` of the rising sawtooth segment."""
    xi = _check_xi(xi)
    if xi <= 2 / math.pi:
        raise ValueError("sawtooth needs 2/xi < pi")
    return -v_rwa(2.0 / xi, xi) / (math.pi - 2.0 / xi)


def _well_coordinate(x):
    n = np.floor(x / math.pi)
    return n, x - n * math.pi


def v_sawtooth(x, xi):
    """Three-piece linear interpolant of the potential (meant for xi >= 50).

    0 on ``[n pi, n pi + 1/xi)``, the floor ``V(2/xi)`` on
    ``[n pi + 1/xi, n pi + 2/xi)`` and a line of slope m+ back up to zero at
    ``(n+1) pi``. Exactly at a joint the right-hand piece is used.
    """
    xi = _check_xi(xi)
    scalar = np.ndim(x) == 0
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("v_sawtooth is defined for x >= 0 only")
    floor = v_rwa(2.0 / xi, xi)
    m_plus = sawtooth_slope(xi)
    _, y = _well_coordinate(x)
    out = np.where(
        y < 1.0 / xi,
        0.0,
        np.where(y < 2.0 / xi, floor, floor + m_plus * (y - 2.0 / xi)),
    )
    return _out(out, scalar)


def f_piecewise(x, xi):
    """Piecewise-constant force of the sawtooth: 0 left of ``n pi + 2/xi``, ``-m+`` right of it.

    The delta-like kick at ``n pi + 1/xi`` is not represented; joints take the
    right-limit value.
    """
    xi = _check_xi(xi)
    scalar = np.ndim(x) == 0
    x = np.asarray(x, dtype=float)
    m_plus = sawtooth_slope(xi)
    _, y = _well_coordinate(x)
    out = np.where(y < 2.0 / xi, 0.0, -m_plus)
    return _out(out, scalar)


def f_lorentzian(x, xi):
    """Displaced-Lorentzian force near a force maximizer.

    Returns ``(value, valid)`` where ``valid`` marks ``-1/xi < u < 1/xi`` with
    ``u = x - (m pi + 1/xi)`` and ``m = round(x/pi)``.
    """
    xi = _check_xi(xi)
    if xi == 0:
        raise ValueError("Lorentzian form needs xi > 0")
    scalar = np.ndim(x) == 0
    x = np.asarray(x, dtype=float)
    m = np.floor(x / math.pi + 0.5)
    u = x - (m * math.pi + 1.0 / xi)
    value = -0.5 + (0.5 / xi**2) / (u * u + xi**-4)
    valid = (u > -1.0 / xi) & (u < 1.0 / xi)
    if scalar:
        return float(value), bool(valid)
    return value, valid
