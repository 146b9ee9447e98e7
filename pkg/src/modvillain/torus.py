"""Tori g/Λ with an inner product: characters, heat kernels and their measures.

Points are coordinate vectors modulo 1 in a basis of the kernel lattice Λ, so
characters are integer vectors ξ acting by x -> exp(2πi ξ·x). The inner
product on g is given by its Gram matrix in the same basis, and the dual
norm of a character is ξᵀ gram⁻¹ ξ. The Fourier transform of a measure is
μ̂(ξ) = ∫ exp(-2πi ξ·x) dμ(x).
"""

from functools import cached_property

import numpy as np
import scipy.linalg
import scipy.special

from .complex import check_spd
from .errors import DomainError, PrecisionError

TAIL_TOL = 1e-12
FOUR_PI2 = 4.0 * np.pi**2


def _check_beta(beta):
    if not beta > 0:
        raise DomainError(f"beta must be positive, got {beta}")


class TorusGroup:
    """Torus R^n/Z^n with the inner product ``gram`` on its Lie algebra."""

    def __init__(self, gram):
        g = np.array(gram, dtype=float)
        g = np.zeros((0, 0)) if g.size == 0 else check_spd(np.atleast_2d(g))
        self._gram = g
        self._gram.setflags(write=False)

    @property
    def n(self):
        return self._gram.shape[0]

    @property
    def gram(self):
        return self._gram

    @cached_property
    def dual_gram(self):
        if self.n == 0:
            return np.zeros((0, 0))
        c = scipy.linalg.cho_factor(self._gram)
        inv = scipy.linalg.cho_solve(c, np.eye(self.n))
        inv = 0.5 * (inv + inv.T)
        inv.setflags(write=False)
        return inv

    def dual_norm2(self, xi):
        """ξᵀ gram⁻¹ ξ, vectorised over leading axes of ``xi``."""
        xi = np.asarray(xi, dtype=float)
        return np.einsum("...i,ij,...j->...", xi, self.dual_gram, xi)

    @classmethod
    def product(cls, *tori):
        return cls(scipy.linalg.block_diag(*[t.gram for t in tori]))

    def __repr__(self):
        return f"TorusGroup(n={self.n})"


def heat_fourier(t, beta, xi):
    """Fourier coefficient exp(-4π² β ‖ξ‖²_*) of the heat kernel."""
    _check_beta(beta)
    return np.exp(-FOUR_PI2 * beta * t.dual_norm2(xi))


def tail_bound(t, beta, radius):
    """Upper bound on sum of exp(-4π²β‖ξ‖²_*) over integer ξ with |ξ| > radius.

    Each lattice point outside the ball owns a unit cube lying outside the
    ball of radius ``radius - sqrt(n)``, so the sum is dominated by the
    Gaussian integral over that exterior region, which is an incomplete gamma
    function.
    """
    n = t.n
    lam = np.linalg.eigvalsh(t.dual_gram)[0]
    a = FOUR_PI2 * beta * lam
    r0 = max(radius - np.sqrt(n), 0.0)
    half = n / 2.0
    # surface area of S^{n-1} times int_{r0}^inf r^{n-1} e^{-a r^2} dr
    # = pi^{n/2} a^{-n/2} Γ(n/2, a r0^2) / Γ(n/2)
    return float(np.pi**half * a**-half * scipy.special.gammaincc(half, a * r0 * r0))


def series_cutoff(t, beta, tol=TAIL_TOL):
    """Smallest integer radius whose tail bound is below ``tol``."""
    _check_beta(beta)
    r = 1
    while tail_bound(t, beta, r) >= tol:
        r += 1
    return r


def _half_ball(n, radius):
    """Nonzero integer vectors with |ξ| <= radius, one from each ±ξ pair."""
    if n == 0:
        return np.zeros((0, 0), dtype=np.int64)
    axis = np.arange(-radius, radius + 1, dtype=np.int64)
    pts = np.stack(np.meshgrid(*([axis] * n), indexing="ij"), axis=-1).reshape(-1, n)
    pts = pts[np.einsum("ij,ij->i", pts, pts) <= radius * radius]
    nz = pts != 0
    lead = pts[np.arange(len(pts)), nz.argmax(axis=1)]
    return pts[lead > 0]


def heat_kernel_eval(t, beta, x, cutoff=None):
    """Heat kernel H_β at the point(s) ``x`` (mod 1) by its truncated character series.

    Terms are paired as ξ and -ξ so the result is real. ``cutoff`` is a radius
    in character space; when omitted the smallest radius meeting the 1e-12
    tail bound is used. Too small a cutoff raises PrecisionError.
    """
    _check_beta(beta)
    if cutoff is None:
        cutoff = series_cutoff(t, beta)
    bound = tail_bound(t, beta, cutoff)
    if bound >= TAIL_TOL:
        raise PrecisionError(
            f"cutoff {cutoff} leaves a series tail of up to {bound:.3g}", bound=bound)
    xs = np.atleast_2d(np.asarray(x, dtype=float))
    xis = _half_ball(t.n, int(cutoff))
    weights = np.exp(-FOUR_PI2 * beta * t.dual_norm2(xis))
    keep = weights > 0.0
    xis, weights = xis[keep], weights[keep]
    out = np.empty(len(xs))
    for i in range(0, len(xs), 256):
        phase = 2.0 * np.pi * (xs[i:i + 256] @ xis.T.astype(float))
        out[i:i + 256] = 1.0 + 2.0 * (np.cos(phase) @ weights)
    return out if np.ndim(x) > 1 else float(out[0])


def sample_heat(t, beta, rng, size=None):
    """Draw from the heat-kernel measure as a wrapped Gaussian.

    The Gaussian has covariance 2β gram⁻¹ in lattice coordinates; reducing mod
    1 gives characteristic function exp(-4π²β ξᵀ gram⁻¹ ξ).
    """
    _check_beta(beta)
    shape = () if size is None else (size,) if np.isscalar(size) else tuple(size)
    z = rng.standard_normal(shape + (t.n,))
    if t.n == 0:
        return z
    chol = np.linalg.cholesky(t.dual_gram)
    y = np.sqrt(2.0 * beta) * z @ chol.T
    return np.mod(y, 1.0)


def empirical_fourier(samples, xi):
    """Monte Carlo estimate of E[exp(-2πi ξ·x)] and its standard error."""
    samples = np.atleast_2d(samples)
    vals = np.exp(-2j * np.pi * (samples @ np.asarray(xi, dtype=float)))
    n = len(vals)
    mean = vals.mean()
    stderr = np.sqrt(np.mean(np.abs(vals - mean) ** 2) / (n - 1))
    return mean, stderr


class MeasureFT:
    """Fourier transform of a probability measure on a torus, as a callable on characters."""

    def __init__(self, n, func):
        self.n = n
        self._func = func

    def __call__(self, xi):
        xi = np.asarray(xi, dtype=np.int64)
        if xi.shape[-1:] != (self.n,):
            raise DomainError(f"character of length {self.n} expected, got shape {xi.shape}")
        return self._func(xi)

    @classmethod
    def heat(cls, t, beta):
        _check_beta(beta)
        return cls(t.n, lambda xi: heat_fourier(t, beta, xi))

    @classmethod
    def point_mass(cls, n):
        return cls(n, lambda xi: np.ones(xi.shape[:-1]))


def pushforward_ft(f, mu_ft):
    """Fourier transform of the pushforward of ``mu_ft`` through the torus map ``f``.

    ``f`` is the integer matrix of the homomorphism in lattice coordinates, so
    the dual map on characters is the transpose.
    """
    f = np.asarray(f, dtype=np.int64)
    if f.ndim != 2 or f.shape[1] != mu_ft.n:
        raise DomainError(f"map of shape {f.shape} cannot act on a torus of dimension {mu_ft.n}")
    return MeasureFT(f.shape[0], lambda xi: mu_ft(xi @ f))


def dual_isometry_check(f, gram1, gram2):
    """Max residual of ξᵀ gram2⁻¹ ξ = (fᵀξ)ᵀ gram1⁻¹ (fᵀξ) as a matrix identity.

    Returns ``(is_isometry, residual)``; the identity is f gram1⁻¹ fᵀ = gram2⁻¹.
    """
    f = np.asarray(f, dtype=float)
    g1inv = TorusGroup(gram1).dual_gram
    g2inv = TorusGroup(gram2).dual_gram
    if f.shape != (g2inv.shape[0], g1inv.shape[0]):
        raise DomainError("map shape inconsistent with the Gram matrices")
    res = float(np.abs(f @ g1inv @ f.T - g2inv).max(initial=0.0))
    return res <= 1e-10, res


def fourier_table_csv(ft, xis):
    """CSV rows ``xi_1,...,xi_n,re,im`` for the given characters."""
    xis = np.atleast_2d(np.asarray(xis, dtype=np.int64))
    vals = np.asarray(ft(xis), dtype=complex)
    head = ",".join(f"xi{i + 1}" for i in range(xis.shape[1])) + ",re,im\n"
    body = "".join(",".join(map(str, x)) + f",{float(v.real)!r},{float(v.imag)!r}\n" for x, v in zip(xis, vals))
    return head + body
