"""Renormalised inner products along chains of boxes.

A chain is a sequence of boxes K_0, K_1, ... with surjective linear maps
P_i : Im d₁(K_i) -> Im d₁(K_{i-1}) induced by restriction (nested boxes) or by
factor-2 subdivision. Each stage carries a base inner product on its image
space. Renormalisation replaces it, stage by stage, by the inner product that
agrees with the pullback of the previous renormalised product on the
orthocomplement of ker P_i and with the base product on ker P_i, the two
pieces declared orthogonal. The maps then become co-isometries and the
induced heat-kernel measures are consistent under pushforward.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .complex import check_spd, real_rank, restriction_matrix, subdivision_matrix
from .errors import DomainError, IntegrityError
from .gauge import build
from .intlattice import solve_integer
from .torus import TorusGroup, heat_fourier

COISOMETRY_TOL = 1e-10


@dataclass
class ComplexChain:
    complexes: list
    maps: list
    base_grams: list
    kind: str = "restriction"
    data: list = field(default_factory=list, repr=False)

    def __len__(self):
        return len(self.complexes)


@dataclass
class RenormalizedGrams:
    grams_r: list
    coisometry_residuals: list


def _image_map(coarse_data, fine_data, ambient_map):
    """Integer matrix of an ambient 2-cochain map restricted to the image lattices."""
    target = ambient_map @ fine_data.image_basis
    return solve_integer(coarse_data.image_basis, target)


def restriction_chain(boxes, inner_product="euclidean"):
    """Chain of nested boxes (smallest first) with restriction maps."""
    data = [build(b, inner_product) for b in boxes]
    maps = []
    for prev, cur in zip(data, data[1:]):
        if not cur.box.contains_box(prev.box):
            raise DomainError(f"{prev.box} is not contained in {cur.box}")
        maps.append(_image_map(prev, cur, restriction_matrix(prev.box, cur.box, 2)))
    return ComplexChain([x.box for x in data], maps, [x.gram_image for x in data],
                        "restriction", data)


def subdivision_chain(coarse, levels, h0=1.0):
    """Chain of iterated factor-2 subdivisions of ``coarse``.

    Stage i has spacing h0 / 2**i and base inner product h**(d-4) times the
    Euclidean product on 2-cochains.
    """
    d = coarse.d
    boxes = [coarse]
    for _ in range(levels):
        boxes.append(boxes[-1].subdivided())
    data = [build(b, ("scaled", h0 / 2**i, d - 4)) for i, b in enumerate(boxes)]
    maps = [_image_map(prev, cur, subdivision_matrix(prev.box, 2))
            for prev, cur in zip(data, data[1:])]
    return ComplexChain(boxes, maps, [x.gram_image for x in data], "subdivision", data)


def renormalize_step(gram_prev_r, gram_i, p):
    """Renormalised Gram on the source of the surjection ``p``.

    On the gram_i-orthocomplement of ker p (the image of the adjoint of p) it
    is the pullback pᵀ gram_prev_r p; on ker p it is gram_i; the two summands
    are orthogonal. In closed form

        R = pᵀ gram_prev_r p + gram_i K (Kᵀ gram_i K)⁻¹ Kᵀ gram_i,

    with K a basis of ker p.
    """
    p = np.asarray(p, dtype=float)
    gp = check_spd(gram_prev_r, "previous renormalised gram")
    gi = check_spd(gram_i, "stage gram")
    m, n = p.shape
    if gp.shape != (m, m) or gi.shape != (n, n):
        raise DomainError("gram shapes do not match the map")
    if real_rank(p) != m:
        raise DomainError("linking map is not surjective")
    k = scipy.linalg.null_space(p, rcond=1e-10)
    r = p.T @ gp @ p
    if k.shape[1]:
        gk = gi @ k
        r = r + gk @ np.linalg.solve(k.T @ gk, gk.T)
    r = 0.5 * (r + r.T)
    lo = np.linalg.eigvalsh(r)[0] if n else 1.0
    if lo <= 1e-12 * max(1.0, np.abs(r).max(initial=0.0)):
        raise IntegrityError(f"renormalised gram lost positive definiteness (min eigenvalue {lo:.3g})")
    return r


def coisometry_residual(p, gram_r, gram_prev_r):
    """max |p R⁻¹ pᵀ - R_prev⁻¹|: zero exactly when the dual map is an isometry."""
    p = np.asarray(p, dtype=float)
    lhs = p @ TorusGroup(gram_r).dual_gram @ p.T
    return float(np.abs(lhs - TorusGroup(gram_prev_r).dual_gram).max(initial=0.0))


def renormalize_chain(chain):
    grams = [np.array(chain.base_grams[0], dtype=float)]
    residuals = []
    for p, g in zip(chain.maps, chain.base_grams[1:]):
        r = renormalize_step(grams[-1], g, p)
        residuals.append(coisometry_residual(p, r, grams[-1]))
        grams.append(r)
    return RenormalizedGrams(grams, residuals)


def random_characters(dim, count, rng, max_support=3):
    """Sparse integer characters: 1..max_support random coordinates set to ±1.

    Dense or large characters have heat Fourier coefficients that underflow to
    zero at any moderate beta, which would make consistency checks vacuous.
    """
    out = np.zeros((count, dim), dtype=np.int64)
    for row in out:
        s = rng.integers(1, min(max_support, dim) + 1)
        idx = rng.choice(dim, size=s, replace=False)
        row[idx] = rng.choice([-1, 1], size=s)
    return out


def ft_residuals(chain, grams, beta, num_characters, rng):
    """Per-step max |FT_{i-1}(ξ) - FT_i(pᵀξ)| over random characters ξ of stage i-1."""
    if isinstance(grams, RenormalizedGrams):
        grams = grams.grams_r
    out = []
    for i, p in enumerate(chain.maps, start=1):
        t_prev, t_cur = TorusGroup(grams[i - 1]), TorusGroup(grams[i])
        xi = random_characters(p.shape[0], num_characters, rng)
        lhs = heat_fourier(t_prev, beta, xi)
        rhs = heat_fourier(t_cur, beta, xi @ p)
        out.append(float(np.abs(lhs - rhs).max(initial=0.0)))
    return out


def verify_projective_measures(chain, grams, beta, num_characters, rng):
    """Largest heat-measure Fourier mismatch along the chain."""
    return max(ft_residuals(chain, grams, beta, num_characters, rng), default=0.0)


def operator_norm(p, gram_src, gram_dst):
    """Norm of p : (R^n, gram_src) -> (R^m, gram_dst)."""
    p = np.asarray(p, dtype=float)
    if p.size == 0 or not np.any(p):
        return 0.0
    w = scipy.linalg.eigh(p.T @ gram_dst @ p, gram_src, eigvals_only=True)
    return float(np.sqrt(max(w[-1], 0.0)))


def subdivision_contraction_check(coarse, h_coarse=1.0):
    """Operator norm of the subdivision map on Im d₁ with h**(d-4)-scaled products."""
    if coarse.d < 2:
        return 0.0
    chain = subdivision_chain(coarse, 1, h_coarse)
    return operator_norm(chain.maps[0], chain.base_grams[1], chain.base_grams[0])
