"""Connected two-point function of plaquette Wilson loops on Z^d.

For the translation-invariant infinite-lattice measure, Wilson loops are
characters whose dual norms are given by the projector Π onto closed
2-cochains, so

    O(p, q) = exp(-4π²β(Π_pp + Π_qq)) (exp(-8π²β Π_pq) - 1).

Π entries come from the frequency-grid quadrature in ``multiplier``.
"""

from dataclasses import dataclass

import numpy as np

from .complex import Cell
from .errors import DomainError, IntegrityError, PrecisionError
from .multiplier import pi_entries_along, pi_entry

FOUR_PI2 = 4.0 * np.pi**2


@dataclass(frozen=True)
class CorrelationPoint:
    n: int
    value: float
    grid_n: int
    beta: float
    cross_term: float = float("nan")
    floor: float = float("nan")


@dataclass(frozen=True)
class DecayFit:
    exponent: float
    log_prefactor: float
    max_log_residual: float
    n_range: tuple


def connected(beta, diag_p, diag_q, cross):
    return np.exp(-FOUR_PI2 * beta * (diag_p + diag_q)) * np.expm1(-2.0 * FOUR_PI2 * beta * cross)


def certified_floor(beta, diag_p, diag_q, cross):
    """Lower bound from |exp(-t) - 1| >= |t| / (1 + |t|) with t = 8π²β Π_pq."""
    t = np.abs(2.0 * FOUR_PI2 * beta * np.asarray(cross))
    return np.exp(-FOUR_PI2 * beta * (diag_p + diag_q)) * t / (1.0 + t)


def two_point(d, beta, p, q, grid_n, workers=1):
    if not beta > 0:
        raise DomainError("beta must be positive")
    # diagonal entries depend only on the plane, so evaluate them at the origin
    origin = (0,) * d
    pp = pi_entry(d, Cell(origin, p.directions), Cell(origin, p.directions), grid_n, workers=workers)
    qq = pp if q.directions == p.directions else pi_entry(
        d, Cell(origin, q.directions), Cell(origin, q.directions), grid_n, workers=workers)
    pq = pi_entry(d, p, q, grid_n, workers=workers)
    return float(connected(beta, pp, qq, pq))


def decay_series(d, beta, direction, n_list, grid_n, plane=(0, 1)):
    """O(p, p + n e) for a plaquette p in ``plane`` translated along axis ``direction``."""
    if not beta > 0:
        raise DomainError("beta must be positive")
    plane = tuple(sorted(plane))
    if len(plane) != 2 or plane[0] == plane[1] or not 0 <= plane[0] < plane[1] < d:
        raise DomainError(f"invalid plane {plane} for d={d}")
    if not 0 <= direction < d:
        raise DomainError(f"direction {direction} out of range for d={d}")
    ns = [int(n) for n in n_list]
    too_far = [n for n in ns if 8 * abs(n) > grid_n]
    if too_far:
        raise PrecisionError(f"grid_n={grid_n} is too small for separations {too_far}; need 8n <= grid_n",
                             bound=max(too_far))
    entries = pi_entries_along(d, plane, direction, [0] + ns, grid_n)
    return points_from_entries(beta, ns, grid_n, entries[0], entries[1:])


def points_from_entries(beta, ns, grid_n, diag, cross):
    """Series points from a diagonal entry and the cross terms at each separation."""
    cross = np.asarray(cross, dtype=float)
    values = connected(beta, diag, diag, cross)
    floors = certified_floor(beta, diag, diag, cross)
    return [CorrelationPoint(int(n), float(v), grid_n, beta, float(c), float(f))
            for n, v, c, f in zip(ns, values, cross, floors)]


def check_floor(points):
    """Raise if any computed |O| falls below its certified lower bound."""
    for pt in points:
        if np.isfinite(pt.floor) and abs(pt.value) < pt.floor:
            raise IntegrityError(f"|O| = {abs(pt.value):.6g} below certified floor {pt.floor:.6g} at n={pt.n}")


def fit_power_law(points):
    """Least-squares line through (log n, log |O|)."""
    pts = [pt for pt in points if pt.n > 0 and abs(pt.value) > 1e-300]
    if len(pts) < 4:
        raise DomainError(f"need at least 4 usable points for a power-law fit, got {len(pts)}")
    check_floor(pts)
    x = np.log([pt.n for pt in pts])
    y = np.log([abs(pt.value) for pt in pts])
    a = np.column_stack([x, np.ones_like(x)])
    (slope, icpt), *_ = np.linalg.lstsq(a, y, rcond=None)
    resid = y - (slope * x + icpt)
    return DecayFit(float(slope), float(icpt), float(np.abs(resid).max()),
                    (min(pt.n for pt in pts), max(pt.n for pt in pts)))


def marginal_mc_two_point(d, beta, p, q, grid_n, num_samples, rng):
    """Monte Carlo O(p, q) from the joint wrapped-Gaussian law of the two plaquette angles.

    The pair (x_p, x_q) has covariance 2β [[Π_pp, Π_pq], [Π_pq, Π_qq]].
    Returns the complex estimate and its delta-method standard error.
    """
    origin = (0,) * d
    pp = pi_entry(d, Cell(origin, p.directions), Cell(origin, p.directions), grid_n)
    qq = pi_entry(d, Cell(origin, q.directions), Cell(origin, q.directions), grid_n)
    pq = pi_entry(d, p, q, grid_n)
    cov = 2.0 * beta * np.array([[pp, pq], [pq, qq]])
    w, v = np.linalg.eigh(cov)
    scale = max(1.0, np.abs(cov).max())
    if w[0] < -1e-10 * scale:
        raise IntegrityError(f"marginal covariance is not positive semidefinite (eigenvalue {w[0]:.3g})")
    if w[0] < 0:
        w, v = np.linalg.eigh(cov + 1e-12 * np.eye(2))
    z = rng.standard_normal((num_samples, 2))
    x = (z * np.sqrt(np.clip(w, 0.0, None))) @ v.T
    wp = np.exp(-2j * np.pi * x[:, 0])
    wq = np.exp(-2j * np.pi * x[:, 1])
    mp, mq = wp.mean(), wq.mean()
    est = np.mean(wp * wq) - mp * mq
    infl = wp * wq - mp * wq - mq * wp
    stderr = float(np.sqrt(np.mean(np.abs(infl - infl.mean()) ** 2) / (num_samples - 1)))
    return complex(est), stderr
