"""Modified Villain measure on a contractible box and its Wilson loops.

The measure on 1-cochains c (mod 1) has density H_β(d₁c) against Haar
measure, where H_β is the heat kernel of the image torus Im d₁ with its own
inner product. On gauge classes it is the pullback of the image-torus heat
measure through d₁, which is how it is sampled.
"""

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .complex import (Box, cell_index, check_spd, coboundary_matrix, enumerate_cells,
                      image_lattice)
from .errors import DomainError, IntegrityError
from .torus import TorusGroup, heat_fourier, heat_kernel_eval, sample_heat

LIFT_TOL = 1e-9


def ambient_gram(n, product="euclidean"):
    """Gram matrix on the n 2-cochains from an inner-product description.

    ``product`` is ``"euclidean"``, ``("scaled", h, power)`` for h**power times the
    Euclidean product, or an explicit n×n matrix.
    """
    if isinstance(product, str):
        if product != "euclidean":
            raise DomainError(f"unknown inner product {product!r}")
        return np.eye(n)
    if isinstance(product, tuple) and product and product[0] == "scaled":
        _, h, power = product
        if not h > 0:
            raise DomainError("lattice spacing must be positive")
        return float(h) ** power * np.eye(n)
    g = np.asarray(product, dtype=float)
    if g.shape != (n, n):
        raise DomainError(f"explicit inner product must be {n}x{n}, got {g.shape}")
    return check_spd(g, "ambient inner product")


@dataclass(frozen=True, eq=False)
class GaugeComplexData:
    box: Box
    d0: np.ndarray
    d1: np.ndarray
    d2: np.ndarray
    image_basis: np.ndarray
    ambient: np.ndarray
    gram_image: np.ndarray

    @cached_property
    def image_torus(self):
        return TorusGroup(self.gram_image)

    @property
    def rank(self):
        return self.image_basis.shape[1]

    @cached_property
    def _d1_pinv(self):
        return np.linalg.pinv(self.d1.astype(float))

    @cached_property
    def _basis_pinv(self):
        return np.linalg.pinv(self.image_basis.astype(float))

    def plaquettes(self):
        return enumerate_cells(self.box, 2)

    def image_coordinates(self, y):
        """Coordinates (mod 1) in the image basis of 2-cochains y lying in Im d₁."""
        y = np.asarray(y, dtype=float)
        x = y @ self._basis_pinv.T
        return np.mod(x, 1.0)

    def lift(self, y):
        """Minimum-norm real 1-cochain c with d₁c = y; raises if y is off the image."""
        y = np.asarray(y, dtype=float)
        c = y @ self._d1_pinv.T
        resid = np.abs(c @ self.d1.T - y).max(initial=0.0)
        if resid > LIFT_TOL:
            raise IntegrityError(f"2-cochain is not in Im d1 (lift residual {resid:.3g})")
        return c

    def same_class(self, a, b, tol=1e-9):
        """Gauge equivalence mod 1: d₁(a - b) must be an integer cochain."""
        r = (np.asarray(a, dtype=float) - np.asarray(b, dtype=float)) @ self.d1.T
        return bool(np.abs(r - np.rint(r)).max(initial=0.0) <= tol)

    def with_image_gram(self, gram):
        """Same complex with a different inner product on Im d₁ (image-basis coordinates)."""
        g = check_spd(np.asarray(gram, dtype=float), "image inner product")
        if g.shape != self.gram_image.shape:
            raise DomainError("image inner product has the wrong shape")
        return GaugeComplexData(self.box, self.d0, self.d1, self.d2, self.image_basis,
                                self.ambient, g)


@dataclass(frozen=True)
class GaugeClass:
    rep: np.ndarray


def build(box, inner_product="euclidean"):
    """Assemble coboundaries, the saturated image lattice of d₁ and its Gram matrix."""
    d0 = coboundary_matrix(box, 0)
    d1 = coboundary_matrix(box, 1)
    n2 = d1.shape[0]
    d2 = coboundary_matrix(box, 2) if box.d > 2 else np.zeros((0, n2), dtype=np.int64)
    if np.any(d1 @ d0) or np.any(d2 @ d1):
        raise IntegrityError("coboundaries do not compose to zero")
    basis = image_lattice(d1)
    g = ambient_gram(n2, inner_product)
    gram_image = basis.T.astype(float) @ g @ basis.astype(float)
    check_spd(gram_image, "image inner product")
    return GaugeComplexData(box, d0, d1, d2, basis, g, gram_image)


def wilson_character(g, p):
    """Image-torus character of evaluation at the plaquette ``p`` and its dual norm²."""
    if p.dim != 2:
        raise DomainError("Wilson characters are defined on 2-cells")
    if not g.box.contains_cell(p):
        raise DomainError(f"{p} is not a plaquette of {g.box}")
    v = p.orientation * g.image_basis[cell_index(g.box, p)]
    return v, float(g.image_torus.dual_norm2(v))


def exact_wilson_expectation(g, beta, p):
    """E[conj W_p] = exp(-4π²β ‖χ_p‖²_*) under the modified Villain measure."""
    v, _ = wilson_character(g, p)
    return float(heat_fourier(g.image_torus, beta, v))


def sample_gauge_class(g, beta, rng, size=None):
    """Draw gauge classes by lifting image-torus heat samples through d₁.

    With ``size`` given, returns a single GaugeClass whose ``rep`` is a
    ``(size, n_edges)`` array of representatives.
    """
    x = sample_heat(g.image_torus, beta, rng, size)
    y = x @ g.image_basis.T.astype(float)
    c = g.lift(y)
    return GaugeClass(np.mod(c, 1.0))


def plaquette_phase(g, rep, p):
    """(d₁ rep)(p) for oriented p, vectorised over representatives."""
    row = g.d1[cell_index(g.box, p)].astype(float)
    return p.orientation * (np.asarray(rep) @ row)


def mc_wilson(g, beta, p, num_samples, rng, batch=4096):
    """Monte Carlo mean of conj(W_p) with its standard error."""
    if num_samples < 100:
        raise DomainError("mc_wilson needs at least 100 samples")
    cell_index(g.box, p)
    vals = []
    left = num_samples
    while left > 0:
        m = min(batch, left)
        cls = sample_gauge_class(g, beta, rng, m)
        vals.append(np.exp(-2j * np.pi * plaquette_phase(g, cls.rep, p)))
        left -= m
    w = np.concatenate(vals)
    mean = w.mean()
    stderr = float(np.sqrt(np.mean(np.abs(w - mean) ** 2) / (len(w) - 1)))
    return complex(mean), stderr


def density_unnormalized(g, beta, c, cutoff=None):
    """H_β(d₁c) on the image torus; gauge invariant, normalised against Haar measure."""
    y = np.asarray(c, dtype=float) @ g.d1.T.astype(float)
    x = g.image_coordinates(y)
    return heat_kernel_eval(g.image_torus, beta, x, cutoff)
