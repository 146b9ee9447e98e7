"""Exact integer column reduction: Hermite bases and saturation tests.

Matrices are kept as ``int64`` arrays; the coboundary inputs have entries in
{-1, 0, 1} and reduced entries stay small, but every step is checked against
an overflow guard so a pathological input fails loudly instead of wrapping.
"""

import numpy as np

from .errors import IntegrityError

_GUARD = 2**52


def hermite_basis(m):
    """Column Hermite normal form basis of the lattice spanned by the columns of ``m``.

    Returns an ``(rows, r)`` integer matrix whose columns form a basis of the
    column lattice, in lower echelon form with positive pivots and entries left
    of each pivot reduced into ``[0, pivot)``.
    """
    a = np.array(m, dtype=np.int64, copy=True)
    if a.ndim != 2:
        raise ValueError("expected a 2-d integer matrix")
    n, c = a.shape
    remaining = np.ones(c, dtype=bool)
    pivots = []  # (row, column index)
    for i in range(n):
        active = np.flatnonzero(remaining & (a[i] != 0))
        while active.size > 1:
            vals = np.abs(a[i, active])
            piv = active[np.argmin(vals)]
            others = active[active != piv]
            q = a[i, others] // a[i, piv]
            a[:, others] -= np.outer(a[:, piv], q)
            if np.abs(a).max(initial=0) > _GUARD:
                raise IntegrityError("entry growth in Hermite reduction exceeds int64 guard")
            active = np.flatnonzero(remaining & (a[i] != 0))
        if active.size == 0:
            continue
        piv = active[0]
        if a[i, piv] < 0:
            a[:, piv] = -a[:, piv]
        remaining[piv] = False
        for _, prev in pivots:
            q = a[i, prev] // a[i, piv]
            if q:
                a[:, prev] -= q * a[:, piv]
        pivots.append((i, piv))
    if not pivots:
        return np.zeros((n, 0), dtype=np.int64)
    return a[:, [col for _, col in pivots]]


def lattice_index(basis):
    """Index of the lattice spanned by ``basis`` inside its saturation.

    Equals the gcd of the maximal minors of ``basis``; it is 1 exactly when the
    lattice equals (real span) ∩ Z^n.
    """
    basis = np.asarray(basis, dtype=np.int64)
    r = basis.shape[1]
    if r == 0:
        return 1
    h = hermite_basis(basis.T)
    if h.shape[1] != r:
        raise IntegrityError("basis columns are linearly dependent")
    return int(np.prod(np.diag(h[:r, :r]).astype(object)))


def solve_integer(basis, target, tol=1e-9):
    """Integer coordinates ``x`` with ``basis @ x == target`` exactly.

    Solves over the reals, rounds, and verifies the product in integer
    arithmetic. Raises IntegrityError when no integer solution exists.
    """
    basis = np.asarray(basis, dtype=np.int64)
    target = np.asarray(target, dtype=np.int64)
    if basis.shape[1] == 0:
        if np.any(target):
            raise IntegrityError("nonzero target outside an empty lattice")
        return np.zeros((0,) + target.shape[1:], dtype=np.int64)
    x, *_ = np.linalg.lstsq(basis.astype(float), target.astype(float), rcond=None)
    xi = np.rint(x).astype(np.int64)
    if np.max(np.abs(x - xi), initial=0.0) > tol or np.any(basis @ xi != target):
        raise IntegrityError("target is not in the integer span of the basis")
    return xi
