"""Fourier multipliers of lattice exterior calculus on Z^d.

A k-cochain on Z^d is identified with a Λ^k(C^d)-valued function on vertices
(a cell contributes e_α at its base vertex). Translation-invariant operators
then act on Fourier transforms ĉ(ξ) = Σ_v c(v) exp(-i v·ξ) by matrix symbols:
the coboundary is exterior multiplication by m(ξ) = Σ_j (exp(iξ_j) - 1) e_j,
its adjoint is interior multiplication by conj(m(ξ)), and the Laplacian is
|m(ξ)|² Id. The projector onto closed 2-cochains has symbol
Id - d₂*d₂/|m|².

Matrix entries of an operator between Dirac cochains are recovered by the
inverse transform

    <δ_p, A δ_q> = (2π)^-d ∫ exp(-i (v_q - v_p)·ξ) M_{α_p α_q}(ξ) dξ,

evaluated here as the uniform grid average over ξ = 2πk/N, which is exactly
the corresponding matrix entry on the periodic lattice (Z/N)^d.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations, product
from math import comb

import numpy as np
import scipy.linalg

from .errors import DomainError, IntegrityError


@dataclass(frozen=True)
class ExteriorBasis:
    d: int
    k: int

    @property
    def indices(self):
        return _basis(self.d, self.k)

    def __len__(self):
        return comb(self.d, self.k)

    def index(self, alpha):
        return _basis_index(self.d, self.k)[tuple(alpha)]


@lru_cache(maxsize=None)
def _basis(d, k):
    return tuple(combinations(range(d), k))


@lru_cache(maxsize=None)
def _basis_index(d, k):
    return {a: i for i, a in enumerate(_basis(d, k))}


@dataclass(frozen=True)
class SymbolMatrix:
    xi: np.ndarray
    entries: np.ndarray
    degenerate: bool = False


def m_vector(xi):
    """Components exp(iξ_j) - 1; vectorised over leading axes."""
    return np.expm1(1j * np.asarray(xi, dtype=float))


@lru_cache(maxsize=None)
def _wedge_table(d, k):
    """(row, col, axis, sign) with e_axis ∧ e_col = sign e_row."""
    rows = _basis_index(d, k + 1)
    table = []
    for c, alpha in enumerate(_basis(d, k)):
        for j in range(d):
            if j in alpha:
                continue
            sign = -1 if sum(a < j for a in alpha) % 2 else 1
            table.append((rows[tuple(sorted(alpha + (j,)))], c, j, sign))
    return tuple(table)


@lru_cache(maxsize=None)
def _symbol_columns(d, a, b):
    """Pairs of wedge-table terms of d₂'s symbol sharing a row, for columns a and b."""
    ia, ib = _basis_index(d, 2)[a], _basis_index(d, 2)[b]
    table = _wedge_table(d, 2)
    col_a = {r: (j, s) for r, c, j, s in table if c == ia}
    col_b = {r: (j, s) for r, c, j, s in table if c == ib}
    return tuple(col_a[r] + col_b[r] for r in col_a if r in col_b)


def _symbol_d_batch(m, k):
    d = m.shape[-1]
    out = np.zeros(m.shape[:-1] + (comb(d, k + 1), comb(d, k)), dtype=complex)
    for r, c, j, s in _wedge_table(d, k):
        out[..., r, c] = s * m[..., j]
    return out


def symbol_d(xi, k):
    """Symbol of d_k : Λ^k -> Λ^{k+1}, exterior multiplication by m(ξ)."""
    xi = np.asarray(xi, dtype=float)
    d = xi.shape[-1]
    if not 0 <= k <= d - 1:
        raise DomainError(f"symbol_d needs 0 <= k <= {d - 1}, got {k}")
    return _symbol_d_batch(m_vector(xi), k)


def symbol_dstar(xi, k):
    """Symbol of d_{k-1}* : Λ^k -> Λ^{k-1}, interior multiplication by conj m(ξ)."""
    xi = np.asarray(xi, dtype=float)
    d = xi.shape[-1]
    if not 1 <= k <= d:
        raise DomainError(f"symbol_dstar needs 1 <= k <= {d}, got {k}")
    return np.conj(np.swapaxes(symbol_d(xi, k - 1), -1, -2))


def symbol_laplacian(xi, k):
    """d*d + dd* on Λ^k, assembled from the d and d* symbols."""
    xi = np.asarray(xi, dtype=float)
    d = xi.shape[-1]
    n = comb(d, k)
    out = np.zeros(xi.shape[:-1] + (n, n), dtype=complex)
    if k < d:
        out += symbol_dstar(xi, k + 1) @ symbol_d(xi, k)
    if k > 0:
        out += symbol_d(xi, k - 1) @ symbol_dstar(xi, k)
    return out


def _projection_batch(xi):
    xi = np.asarray(xi, dtype=float)
    d = xi.shape[-1]
    n = comb(d, 2)
    eye = np.eye(n, dtype=complex)
    if d == 2:
        return np.broadcast_to(eye, xi.shape[:-1] + (n, n)).copy()
    m = m_vector(xi)
    norm2 = np.sum(np.abs(m) ** 2, axis=-1)
    zero = norm2 == 0.0
    dd = _symbol_d_batch(m, 2)
    num = np.conj(np.swapaxes(dd, -1, -2)) @ dd
    safe = np.where(zero, 1.0, norm2)
    out = eye - num / safe[..., None, None]
    out[zero] = eye
    return out


def symbol_projection(xi):
    """Symbol of the projector onto closed 2-cochains at a single frequency.

    At ξ = 0 (mod 2π) the symbol is discontinuous; the identity is returned
    and ``degenerate`` is set.
    """
    xi = np.asarray(xi, dtype=float)
    if xi.ndim != 1 or xi.shape[0] < 2:
        raise DomainError("symbol_projection expects one frequency of dimension >= 2")
    degenerate = bool(np.all(np.isclose(np.mod(xi + np.pi, 2 * np.pi) - np.pi, 0.0, atol=0.0)))
    return SymbolMatrix(xi, _projection_batch(xi), degenerate)


def f0(xi, plane):
    """Σ_{r ∉ plane} sin²(ξ_r/2) / Σ_r sin²(ξ_r/2), the (plane, plane) entry of Id - Π."""
    s = np.sin(0.5 * np.asarray(xi, dtype=float)) ** 2
    mask = np.ones(s.shape[-1], dtype=bool)
    mask[list(plane)] = False
    return s[..., mask].sum(axis=-1) / s.sum(axis=-1)


# --- grid quadrature -------------------------------------------------------


def _check_grid(grid_n):
    if grid_n < 4 or grid_n % 2:
        raise DomainError(f"grid_n must be an even integer >= 4, got {grid_n}")


def _cell_data(p, q):
    if p.dim != 2 or q.dim != 2:
        raise DomainError("pi_entry is defined for 2-cells")
    if p.d != q.d:
        raise DomainError("cells live in different dimensions")
    offset = np.subtract(q.base, p.base)
    return offset, p.directions, q.directions, p.orientation * q.orientation


def _slab_sums(d, grid_n, slab_fn, workers):
    ks = range(grid_n)
    if workers and workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            parts = list(ex.map(slab_fn, ks))
    else:
        parts = [slab_fn(k) for k in ks]
    return np.asarray(parts)


def pi_entry(d, p, q, grid_n, method="auto", workers=1):
    """<δ_p, Π δ_q> from the grid average of the projection symbol.

    ``method="fast"`` (diagonal planes only) sums the scalar 1 - F0;
    ``method="full"`` contracts the complex symbol matrices. ``"auto"`` picks
    the fast path whenever the planes agree. The ξ = 0 point carries the
    identity value. Slabs along the first axis are reduced in a fixed order,
    so the result does not depend on ``workers``.
    """
    _check_grid(grid_n)
    offset, ap, aq, sign = _cell_data(p, q)
    if len(offset) != d:
        raise DomainError(f"cells are not in dimension {d}")
    if method == "auto":
        method = "fast" if ap == aq else "full"
    if method == "fast" and ap != aq:
        raise DomainError("the scalar fast path only covers diagonal plane pairs")
    if d == 2:
        return float(sign * (ap == aq and not np.any(offset)))
    theta = 2.0 * np.pi * np.arange(grid_n) / grid_n
    s1 = np.sin(0.5 * theta) ** 2
    shape_rest = (grid_n,) * (d - 1)
    rest = np.indices(shape_rest).reshape(d - 1, -1).T if method == "full" else None
    phase_rest = np.ones(shape_rest, dtype=complex)
    for i in range(1, d):
        ph = np.exp(-1j * offset[i] * theta).reshape((grid_n,) + (1,) * (d - 1 - i))
        phase_rest = phase_rest * ph
    mask = np.ones(d, dtype=bool)
    mask[list(ap)] = False

    if method == "fast":
        s_rest_all = np.zeros(shape_rest)
        s_rest_out = np.zeros(shape_rest)
        for i in range(1, d):
            si = s1.reshape((grid_n,) + (1,) * (d - 1 - i))
            s_rest_all = s_rest_all + si
            if mask[i]:
                s_rest_out = s_rest_out + si

        def slab(k0):
            tot = s_rest_all + s1[k0]
            out = s_rest_out + (s1[k0] if mask[0] else 0.0)
            with np.errstate(invalid="ignore", divide="ignore"):
                val = 1.0 - out / tot
            if k0 == 0:
                val.flat[0] = 1.0
            return np.sum(np.exp(-1j * offset[0] * theta[k0]) * phase_rest * val)
    else:
        cols = _symbol_columns(d, ap, aq)
        rest_m = np.expm1(1j * theta)[rest]
        rest_norm = np.sum(np.abs(rest_m) ** 2, axis=1).reshape(shape_rest)
        same = float(ap == aq)

        def slab(k0):
            m0 = np.expm1(1j * theta[k0])
            m = np.concatenate([np.full((len(rest_m), 1), m0), rest_m], axis=1)
            num = np.zeros(len(m), dtype=complex)
            for j_a, s_a, j_b, s_b in cols:
                num += s_a * s_b * np.conj(m[:, j_a]) * m[:, j_b]
            norm2 = rest_norm + abs(m0) ** 2
            with np.errstate(invalid="ignore", divide="ignore"):
                val = same - num.reshape(shape_rest) / norm2
            if k0 == 0:
                val.flat[0] = same
            return np.sum(np.exp(-1j * offset[0] * theta[k0]) * phase_rest * val)

    total = np.sum(_slab_sums(d, grid_n, slab, workers))
    return float(sign * total.real / grid_n**d)


def axis_profile(d, plane, axis, grid_n):
    """g(k) = Σ of 1 - F0 over the grid hyperplane with ξ_axis = 2πk/N.

    Entries along a lattice axis follow from one inverse DFT of this profile:
    <δ_p, Π δ_{p + n e_axis}> = N^-d Σ_k cos(2πnk/N) g(k).
    """
    _check_grid(grid_n)
    theta = 2.0 * np.pi * np.arange(grid_n) / grid_n
    s1 = np.sin(0.5 * theta) ** 2
    others = [i for i in range(d) if i != axis]
    shape_rest = (grid_n,) * (d - 1)
    s_all = np.zeros(shape_rest)
    s_out = np.zeros(shape_rest)
    for pos, i in enumerate(others):
        si = s1.reshape((grid_n,) + (1,) * (d - 2 - pos))
        s_all = s_all + si
        if i not in plane:
            s_out = s_out + si
    axis_out = axis not in plane
    g = np.empty(grid_n)
    for k in range(grid_n):
        tot = s_all + s1[k]
        out = s_out + (s1[k] if axis_out else 0.0)
        with np.errstate(invalid="ignore", divide="ignore"):
            val = 1.0 - out / tot
        if k == 0:
            val.flat[0] = 1.0
        g[k] = np.sum(val)
    return g


def pi_entries_along(d, plane, axis, ns, grid_n):
    """Diagonal-plane entries <δ_p, Π δ_{p + n e_axis}> for every n in ``ns``."""
    if d == 2:
        return np.array([1.0 if n == 0 else 0.0 for n in ns])
    g = axis_profile(d, plane, axis, grid_n)
    k = np.arange(grid_n)
    ns = np.asarray(ns)
    phase = np.cos(2.0 * np.pi * np.outer(ns, k) / grid_n)
    return phase @ g / grid_n**d


# --- dense periodic-lattice oracle ----------------------------------------


def _periodic_cells(d, n, k):
    verts = list(product(range(n), repeat=d))
    cells = [(v, a) for a in _basis(d, k) for v in verts]
    return cells, {c: i for i, c in enumerate(cells)}


def periodic_coboundary(d, n, k):
    """Dense d_k on the periodic lattice (Z/n)^d, same sign rule as on boxes."""
    rows, _ = _periodic_cells(d, n, k + 1)
    _, cols = _periodic_cells(d, n, k)
    m = np.zeros((len(rows), len(cols)))
    for r, (v, a) in enumerate(rows):
        for t, axis in enumerate(a):
            face = a[:t] + a[t + 1:]
            sign = -1.0 if t % 2 else 1.0
            w = list(v)
            w[axis] = (w[axis] + 1) % n
            m[r, cols[(tuple(w), face)]] += sign
            m[r, cols[(v, face)]] -= sign
    return m


def pi_entry_oracle(d, p, q, period_n):
    """<δ_p, Π δ_q> on (Z/N)^d by a dense solve, Π = Id - d₂ᵀ Δ⁺ d₂.

    Δ = d₂d₂ᵀ + d₃ᵀd₃ acts on 3-cochains; its kernel (the constant 3-cochains)
    is orthogonal to the range of d₂ and is lifted by adding the projector
    onto it before the solve.
    """
    if comb(d, 3) * period_n**d > 4000:
        raise DomainError("oracle lattice too large for a dense solve")
    _, ap, aq, sign = _cell_data(p, q)
    _, idx2 = _periodic_cells(d, period_n, 2)
    ip = idx2[(tuple(np.mod(p.base, period_n)), ap)]
    iq = idx2[(tuple(np.mod(q.base, period_n)), aq)]
    delta = float(ip == iq)
    if d == 2:
        return sign * delta
    d2 = periodic_coboundary(d, period_n, 2)
    lap = d2 @ d2.T
    if d > 3:
        d3 = periodic_coboundary(d, period_n, 3)
        lap += d3.T @ d3
    vol = period_n**d
    harm = np.zeros_like(lap)
    for j in range(comb(d, 3)):
        sl = slice(j * vol, (j + 1) * vol)
        harm[sl, sl] = 1.0 / vol
    a = lap + harm
    if np.linalg.cond(a) > 1e12:
        raise IntegrityError("periodic Laplacian is singular beyond its harmonic part")
    x = scipy.linalg.solve(a, d2[:, iq], assume_a="pos")
    return float(sign * (delta - d2[:, ip] @ x))
