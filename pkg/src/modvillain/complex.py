"""Cubical boxes in Z^d, their oriented cells and integer cochain maps.

Axes are 0-based throughout the library (the CLI accepts 1-based plane
labels). A k-cell is stored as its base vertex (the vertex closest to the
origin) and the sorted tuple of axes it spans; stored cells are positively
oriented. The coboundary uses the cubical incidence rule

    (d c)(v, a) = sum_t (-1)^t [c(v + e_{a_t}, a without a_t) - c(v, a without a_t)],

which agrees with exterior multiplication by sum_j e_j wedge (forward difference in j).
"""

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations, product

import numpy as np
import scipy.linalg

from .errors import DomainError, IntegrityError
from .intlattice import hermite_basis, lattice_index


@dataclass(frozen=True)
class Cell:
    base: tuple
    directions: tuple
    orientation: int = field(default=1, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "base", tuple(int(b) for b in self.base))
        object.__setattr__(self, "directions", tuple(int(a) for a in self.directions))
        dirs = self.directions
        if any(b <= a for a, b in zip(dirs, dirs[1:])):
            raise DomainError(f"cell directions must be strictly increasing, got {dirs}")
        if dirs and (dirs[0] < 0 or dirs[-1] >= len(self.base)):
            raise DomainError(f"cell directions {dirs} out of range for d={len(self.base)}")
        if self.orientation not in (1, -1):
            raise DomainError("orientation must be +1 or -1")

    @property
    def dim(self):
        return len(self.directions)

    @property
    def d(self):
        return len(self.base)

    def __neg__(self):
        return Cell(self.base, self.directions, -self.orientation)

    def translate(self, offset):
        return Cell(tuple(b + int(t) for b, t in zip(self.base, offset)),
                    self.directions, self.orientation)


def plaquette(base, plane, orientation=1):
    """2-cell with base vertex ``base`` spanning the two axes in ``plane``."""
    return Cell(tuple(base), tuple(sorted(plane)), orientation)


@dataclass(frozen=True)
class Box:
    """Product of integer intervals ``[lower_i, lower_i + sides_i]``."""

    lower: tuple
    sides: tuple

    def __post_init__(self):
        object.__setattr__(self, "lower", tuple(int(x) for x in self.lower))
        object.__setattr__(self, "sides", tuple(int(x) for x in self.sides))
        if len(self.lower) != len(self.sides) or not self.sides:
            raise DomainError("lower and sides must be nonempty and of equal length")
        if min(self.sides) < 1:
            raise DomainError(f"box sides must be >= 1, got {self.sides}")

    @classmethod
    def cube(cls, d, side=1, lower=None):
        return cls(tuple(lower) if lower is not None else (0,) * d, (side,) * d)

    @classmethod
    def from_config(cls, cfg):
        return cls(tuple(cfg["lower"]), tuple(cfg["sides"]))

    def to_config(self):
        return {"lower": list(self.lower), "sides": list(self.sides)}

    @property
    def d(self):
        return len(self.sides)

    @property
    def upper(self):
        return tuple(l + s for l, s in zip(self.lower, self.sides))

    def contains_box(self, other):
        return other.d == self.d and all(
            a >= b and a2 <= b2
            for a, b, a2, b2 in zip(other.lower, self.lower, other.upper, self.upper))

    def contains_cell(self, cell):
        if cell.d != self.d:
            return False
        for i, v in enumerate(cell.base):
            top = self.upper[i] - (1 if i in cell.directions else 0)
            if v < self.lower[i] or v > top:
                return False
        return True

    def subdivided(self):
        """The factor-2 refinement, expressed in fine lattice units."""
        return Box(tuple(2 * x for x in self.lower), tuple(2 * s for s in self.sides))


def cell_count(box, k):
    """Closed-form number of k-cells of ``box``."""
    total = 0
    for dirs in combinations(range(box.d), k):
        n = 1
        for i, s in enumerate(box.sides):
            n *= s if i in dirs else s + 1
        total += n
    return total


@lru_cache(maxsize=256)
def _cells(box, k):
    if not 0 <= k <= box.d:
        raise DomainError(f"cell degree k={k} out of range 0..{box.d}")
    cells = []
    for dirs in combinations(range(box.d), k):
        ranges = [range(l, l + s if i in dirs else l + s + 1)
                  for i, (l, s) in enumerate(zip(box.lower, box.sides))]
        cells.extend(Cell(v, dirs) for v in product(*ranges))
    cells.sort(key=lambda c: (c.base, c.directions))
    return tuple(cells)


def enumerate_cells(box, k):
    """Positively oriented k-cells of ``box`` ordered by (base vertex, directions)."""
    return list(_cells(box, k))


@lru_cache(maxsize=256)
def _index(box, k):
    return {(c.base, c.directions): i for i, c in enumerate(_cells(box, k))}


def cell_index(box, cell):
    """Position of ``cell`` in ``enumerate_cells(box, cell.dim)``."""
    try:
        return _index(box, cell.dim)[(cell.base, cell.directions)]
    except KeyError:
        raise DomainError(f"{cell} is not a cell of {box}") from None


@lru_cache(maxsize=128)
def _coboundary(box, k):
    rows = _index(box, k + 1)
    cols = _index(box, k)
    m = np.zeros((len(rows), len(cols)), dtype=np.int64)
    for (base, dirs), r in rows.items():
        for t, axis in enumerate(dirs):
            face = dirs[:t] + dirs[t + 1:]
            sign = -1 if t % 2 else 1
            shifted = list(base)
            shifted[axis] += 1
            m[r, cols[(tuple(shifted), face)]] += sign
            m[r, cols[(base, face)]] -= sign
    m.setflags(write=False)
    return m


def coboundary_matrix(box, k):
    """Integer matrix of d_k : C^k -> C^{k+1} in the enumerate_cells bases."""
    if not 0 <= k <= box.d - 1:
        raise DomainError(f"coboundary degree k={k} out of range 0..{box.d - 1}")
    return _coboundary(box, k)


def restriction_matrix(sub, sup, k):
    """0/1 matrix restricting k-cochains on ``sup`` to the sub-box ``sub``."""
    if not sup.contains_box(sub):
        raise DomainError(f"{sub} is not contained in {sup}")
    sup_index = _index(sup, k)
    cells = _cells(sub, k)
    m = np.zeros((len(cells), len(sup_index)), dtype=np.int64)
    for r, c in enumerate(cells):
        m[r, sup_index[(c.base, c.directions)]] = 1
    return m


def subdivision_matrix(coarse, k):
    """Map k-cochains on the factor-2 refinement of ``coarse`` to ``coarse``.

    A coarse k-cell receives the sum of the values on its 2^k fine sub-cells
    (for k = 0 this is restriction to the even vertices).
    """
    if not 0 <= k <= 2 or k > coarse.d:
        raise DomainError(f"subdivision maps are provided for k in 0..2, got k={k}")
    fine_index = _index(coarse.subdivided(), k)
    cells = _cells(coarse, k)
    m = np.zeros((len(cells), len(fine_index)), dtype=np.int64)
    for r, c in enumerate(cells):
        base = [2 * v for v in c.base]
        for eps in product((0, 1), repeat=k):
            v = list(base)
            for axis, e in zip(c.directions, eps):
                v[axis] += e
            m[r, fine_index[(tuple(v), c.directions)]] = 1
    return m


def real_rank(m, rtol=1e-10):
    """Rank from column-pivoted QR, counting |R_ii| > rtol * |R_00|."""
    a = np.asarray(m, dtype=float)
    if a.size == 0:
        return 0
    r = scipy.linalg.qr(a, mode="r", pivoting=True)[0]
    diag = np.abs(np.diag(r))
    if diag.size == 0 or diag[0] == 0.0:
        return 0
    return int(np.sum(diag > rtol * diag[0]))


def image_lattice(m):
    """Integer basis of the lattice m(Z^cols), asserted saturated in Z^rows."""
    basis = hermite_basis(m)
    if basis.shape[1] != real_rank(m):
        raise IntegrityError("Hermite basis rank disagrees with real rank")
    index = lattice_index(basis)
    if index != 1:
        raise IntegrityError(f"integer image is not saturated (index {index})")
    return basis


def check_spd(gram, name="gram"):
    g = np.asarray(gram, dtype=float)
    if g.ndim != 2 or g.shape[0] != g.shape[1]:
        raise DomainError(f"{name} must be a square matrix")
    scale = max(1.0, np.abs(g).max(initial=0.0))
    if np.abs(g - g.T).max(initial=0.0) > 1e-12 * scale:
        raise DomainError(f"{name} is not symmetric")
    try:
        np.linalg.cholesky(g)
    except np.linalg.LinAlgError:
        raise DomainError(f"{name} is not positive definite") from None
    return g


def real_image_projector(m, gram=None):
    """Gram-orthogonal projector onto the real column span of ``m``."""
    a = np.asarray(m, dtype=float)
    n = a.shape[0]
    g = np.eye(n) if gram is None else check_spd(gram)
    if g.shape != (n, n):
        raise DomainError("gram shape does not match the codomain of m")
    u, s, _ = np.linalg.svd(a, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return np.zeros((n, n))
    q = u[:, s > 1e-10 * s[0]]
    return q @ np.linalg.solve(q.T @ g @ q, q.T @ g)


def to_coo_text(m):
    """Coordinate-list text, one ``row col value`` line per nonzero."""
    a = np.asarray(m)
    rows, cols = np.nonzero(a)
    return "".join(f"{r} {c} {a[r, c]}\n" for r, c in zip(rows, cols))


def from_coo_text(text, shape):
    m = np.zeros(shape, dtype=np.int64)
    for line in text.splitlines():
        if line.strip():
            r, c, v = line.split()
            m[int(r), int(c)] = int(v)
    return m
