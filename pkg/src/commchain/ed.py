"""Brute-force dense diagonalization of the periodic chain.

This is the independent oracle used to cross-check every combinatorial
claim (degeneracy, energy census, ground-space identities).  It builds the
full d^N-dimensional Hamiltonian as a dense matrix and diagonalizes it,
with a hard size cap; no structure of the local term is exploited beyond
dispatching to the real symmetric solver when the matrix has no imaginary
part.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _linalg as la
from .errors import NonIntegerSpectrum, TooLarge
from .operators import LocalTerm

DEFAULT_CAP = 4096
KERNEL_TOL = 1e-8
INTEGER_TOL = 1e-6

__all__ = [
    "ChainHamiltonian",
    "build_chain",
    "kernel_dim",
    "integer_spectrum",
    "same_subspace",
    "apply_sitewise",
]


@dataclass
class ChainHamiltonian:
    N: int
    d: int
    matrix: np.ndarray


def _site_digits(d: int, n: int) -> np.ndarray:
    """digits[k, x] = base-d digit of x at site k (site 0 most significant)."""
    size = d**n
    idx = np.arange(size)
    digits = np.empty((n, size), dtype=np.int64)
    for k in range(n):
        digits[k] = (idx // d ** (n - 1 - k)) % d
    return digits


def _reorder_index(digits: np.ndarray, order: list[int], d: int) -> np.ndarray:
    n = len(order)
    out = np.zeros(digits.shape[1], dtype=np.int64)
    for pos, site in enumerate(order):
        out += digits[site] * d ** (n - 1 - pos)
    return out


def build_chain(p: LocalTerm, n: int, cap: int = DEFAULT_CAP, check: bool = True) -> ChainHamiltonian:
    """H_N = sum_j P_{j,j+1} with periodic wraparound, as a dense matrix."""
    d = p.d
    if n < 2:
        raise ValueError("chain length must be at least 2")
    size = d**n
    if size > cap:
        raise TooLarge(f"d^N = {size} exceeds cap {cap}")
    digits = _site_digits(d, n)
    base = np.kron(p.op, np.eye(d ** (n - 2))) if n > 2 else p.op.copy()
    h = np.zeros((size, size), dtype=complex)
    for j in range(n):
        jp = (j + 1) % n
        order = [j, jp] + [k for k in range(n) if k not in (j, jp)]
        m = _reorder_index(digits, order, d)
        h += base[np.ix_(m, m)]
    if check:
        rot = _reorder_index(digits, [(k - 1) % n for k in range(n)], d)
        shift_defect = float(np.max(np.abs(h[np.ix_(rot, rot)] - h)))
        herm_defect = float(np.max(np.abs(h - h.conj().T)))
        if shift_defect > 1e-10 or herm_defect > 1e-10:
            raise AssertionError(
                f"chain build inconsistent (shift {shift_defect:.3e}, herm {herm_defect:.3e})"
            )
    return ChainHamiltonian(N=n, d=d, matrix=h)


def _eigvalsh(matrix: np.ndarray) -> np.ndarray:
    if np.max(np.abs(matrix.imag)) == 0.0:
        return np.linalg.eigvalsh(matrix.real)
    return np.linalg.eigvalsh(matrix)


def kernel_dim(chain: ChainHamiltonian, tol: float = KERNEL_TOL) -> tuple[int, np.ndarray]:
    """Kernel dimension and an orthonormal kernel basis (columns).

    The spectra here are sums of projectors, so an absolute tolerance on
    the eigenvalues is appropriate.
    """
    w, v = np.linalg.eigh(chain.matrix)
    mask = w < tol
    return int(np.sum(mask)), v[:, mask]


def integer_spectrum(chain: ChainHamiltonian, tol: float = INTEGER_TOL) -> dict[int, int]:
    """Eigenvalue multiplicities, requiring every eigenvalue to be integral.

    A non-integral eigenvalue signals a non-commuting local term.
    """
    w = _eigvalsh(chain.matrix)
    rounded = np.rint(w)
    worst = float(np.max(np.abs(w - rounded)))
    if worst > tol:
        raise NonIntegerSpectrum(f"eigenvalue off integer by {worst:.3e}")
    out: dict[int, int] = {}
    for v in rounded.astype(int):
        out[int(v)] = out.get(int(v), 0) + 1
    return out


def same_subspace(a: np.ndarray, b: np.ndarray, tol: float = KERNEL_TOL) -> bool:
    """Equal dimension and largest principal angle below ``tol`` (as a sine)."""
    if a.shape[1] != b.shape[1]:
        return False
    return la.subspace_angle_sin(a, b) < tol


def apply_sitewise(x: np.ndarray, n: int, vec_or_cols: np.ndarray) -> np.ndarray:
    """Apply x^(tensor N) to a chain vector or to each column of a basis."""
    d = x.shape[0]
    cols = vec_or_cols if vec_or_cols.ndim == 2 else vec_or_cols[:, None]
    out = cols.astype(complex)
    for k in range(n):
        left = d**k
        right = d ** (n - 1 - k)
        t = out.reshape(left, d, right, -1)
        out = np.einsum("sd,adrc->asrc", x, t).reshape(d**n, -1)
    return out if vec_or_cols.ndim == 2 else out[:, 0]
