"""Two-site operator types and the operations that normalize them.

A translation-invariant chain is defined by a single hermitian operator on
two adjacent sites of local dimension d.  This module turns such a term
into a projector, tests whether the resulting chain is commuting, computes
the operator Schmidt decomposition across the two-site cut (with hermitian
factors), and synthesizes random commuting projectors with a prescribed
block/graph structure for testing.

Conventions: the two-site basis is |i> x |j| with flat index i*d + j, the
left site first.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _linalg as la
from .errors import InvalidSpec, NotHermitian, NotPSD

DEFAULT_TOL = 1e-9

# Relative cutoff for treating singular values / eigenvalues as zero.
RANK_RTOL = 1e-9


def _rank_cut(s: np.ndarray) -> float:
    top = float(s[0]) if s.size else 0.0
    return RANK_RTOL * max(top, 1.0)


@dataclass
class LocalTerm:
    """Hermitian operator on two adjacent d-dimensional sites."""

    d: int
    op: np.ndarray

    def __post_init__(self):
        self.op = np.asarray(self.op, dtype=complex)
        n = self.d * self.d
        if self.d < 1 or self.op.shape != (n, n):
            raise ValueError(f"operator must be {n}x{n} for site dimension {self.d}")
        if not np.all(np.isfinite(self.op)):
            raise ValueError("operator entries must be finite")

    @classmethod
    def symmetrized(cls, d: int, op: np.ndarray, tol: float = DEFAULT_TOL) -> "LocalTerm":
        """Build a term, absorbing hermiticity defects up to ``tol``."""
        op = np.asarray(op, dtype=complex)
        defect = la.hermiticity_defect(op)
        if defect > tol:
            raise NotHermitian(f"hermiticity defect {defect:.3e} exceeds tol {tol:.3e}")
        return cls(d, (op + la.dag(op)) / 2.0)

    def to_dict(self) -> dict:
        return {
            "d": self.d,
            "matrix": [[[float(z.real), float(z.imag)] for z in row] for row in self.op],
        }

    @classmethod
    def from_dict(cls, data: dict, tol: float = DEFAULT_TOL) -> "LocalTerm":
        d = int(data["d"])
        mat = np.array(
            [[complex(re, im) for re, im in row] for row in data["matrix"]], dtype=complex
        )
        return cls.symmetrized(d, mat, tol)


@dataclass
class ProjectorTerm(LocalTerm):
    """Local term that is an orthogonal projector."""

    def __post_init__(self):
        super().__post_init__()

    def validate(self, tol: float = 1e-8) -> None:
        herm = la.hermiticity_defect(self.op)
        idem = la.op_norm(self.op @ self.op - self.op)
        if herm > tol or idem > tol:
            raise ValueError(
                f"not a projector: hermiticity defect {herm:.3e}, idempotency defect {idem:.3e}"
            )


@dataclass
class SchmidtPair:
    """Hermitian factor lists with P = sum_i left[i] (x) right[i]."""

    left_factors: list[np.ndarray]
    right_factors: list[np.ndarray]

    @property
    def rank(self) -> int:
        return len(self.left_factors)

    def reconstruct(self, d: int) -> np.ndarray:
        out = np.zeros((d * d, d * d), dtype=complex)
        for a, b in zip(self.left_factors, self.right_factors):
            out += np.kron(a, b)
        return out


@dataclass
class CommutingCheck:
    commuting: bool
    residual: float


def projectorize(h: LocalTerm, tol: float = DEFAULT_TOL) -> ProjectorTerm:
    """Orthogonal projector with the same kernel as ``h``.

    Eigenvalues below ``tol`` are treated as zero; an eigenvalue below
    ``-sqrt(tol)`` means the term is frustrated and the caller must shift
    the energy first.
    """
    defect = la.hermiticity_defect(h.op)
    if defect > tol:
        raise NotHermitian(f"hermiticity defect {defect:.3e} exceeds tol {tol:.3e}")
    sym = (h.op + la.dag(h.op)) / 2.0
    w, v = np.linalg.eigh(sym)
    if w[0] < -np.sqrt(tol):
        raise NotPSD(f"eigenvalue {w[0]:.3e} below -sqrt(tol); shift the energy first")
    keep = w > tol
    p = (v[:, keep] * 1.0) @ la.dag(v[:, keep])
    return ProjectorTerm(h.d, (p + la.dag(p)) / 2.0)


def commutator_residual(term: LocalTerm) -> float:
    """Norm of [h x 1, 1 x h] on three sites."""
    d = term.d
    left = np.kron(term.op, np.eye(d))
    right = np.kron(np.eye(d), term.op)
    return la.op_norm(left @ right - right @ left)


def check_commuting(p: ProjectorTerm, tol: float = DEFAULT_TOL) -> CommutingCheck:
    """Decide whether the chain built from ``p`` is commuting."""
    residual = commutator_residual(p)
    return CommutingCheck(commuting=residual <= tol, residual=residual)


def operator_schmidt(p: LocalTerm, tol: float = DEFAULT_TOL) -> SchmidtPair:
    """Schmidt decomposition of ``p`` across the two-site cut.

    The decomposition is carried out in the real vector space of hermitian
    matrices, so both factor lists come out hermitian and the coefficient
    matrix is a real SVD problem.  Schmidt coefficients are folded into the
    factors symmetrically.
    """
    d = p.d
    basis = la.hermitian_basis(d)
    u = basis.reshape(d * d, d * d).T  # column m = vec(G_m), unitary
    # reshuffle: R[(i,i'),(j,j')] = P[(i,j),(i',j')]
    r = p.op.reshape(d, d, d, d).transpose(0, 2, 1, 3).reshape(d * d, d * d)
    c = la.dag(u) @ r @ u.conj()
    imag = float(np.max(np.abs(c.imag))) if c.size else 0.0
    if imag > max(np.sqrt(tol), 1e-7):
        raise NotHermitian(f"coefficient matrix not real (defect {imag:.3e})")
    o, s, qt = np.linalg.svd(c.real)
    cut = _rank_cut(s)
    left, right = [], []
    for k in range(len(s)):
        if s[k] <= cut:
            break
        root = np.sqrt(s[k])
        left.append(np.tensordot(o[:, k] * root, basis, axes=(0, 0)))
        right.append(np.tensordot(qt[k] * root, basis, axes=(0, 0)))
    return SchmidtPair(left_factors=left, right_factors=right)


def _block_offsets(block_spec: list[tuple[int, int]]) -> list[int]:
    offs = [0]
    for l, r in block_spec:
        offs.append(offs[-1] + l * r)
    return offs


def assemble_two_site(
    d: int,
    block_spec: list[tuple[int, int]],
    isometries: list[np.ndarray],
    q_blocks,
) -> np.ndarray:
    """Assemble sum_{a,b} (W_a x W_b)(1_l x O_ab x 1_r)(W_a x W_b)^dag.

    ``q_blocks(a, b)`` supplies the middle operator on H_{a_r} (x) H_{b_l};
    the same plumbing builds projectors and block-diagonal unitaries.
    """
    n = d * d
    out = np.zeros((n, n), dtype=complex)
    for a, (la_, ra) in enumerate(block_spec):
        for b, (lb, rb) in enumerate(block_spec):
            q = q_blocks(a, b)
            mid = la.kron_all(np.eye(la_), q, np.eye(rb))
            w = np.kron(isometries[a], isometries[b])
            out += w @ mid @ la.dag(w)
    return out


def synthesize_local_term(
    block_spec: list[tuple[int, int]],
    edge_kernel_dims,
    seed: int = 0,
) -> ProjectorTerm:
    """Random commuting projector with prescribed blocks and kernel dims.

    ``block_spec`` lists (l, r) dimensions per block with sum(l*r) = d;
    ``edge_kernel_dims[a][b]`` is the kernel dimension of the bond
    projector from block a to block b.  All randomness (basis rotation and
    kernel subspaces) flows from ``seed``.
    """
    block_spec = [(int(l), int(r)) for l, r in block_spec]
    kdims = np.asarray(edge_kernel_dims, dtype=int)
    nb = len(block_spec)
    if kdims.shape != (nb, nb):
        raise InvalidSpec(f"kernel dim matrix must be {nb}x{nb}")
    if any(l < 1 or r < 1 for l, r in block_spec):
        raise InvalidSpec("block dimensions must be positive")
    d = sum(l * r for l, r in block_spec)
    for a, (_, ra) in enumerate(block_spec):
        for b, (lb, _) in enumerate(block_spec):
            if not (0 <= kdims[a, b] <= ra * lb):
                raise InvalidSpec(
                    f"kernel dim {kdims[a, b]} out of range for bond ({a},{b})"
                )
    rng = np.random.default_rng(seed)
    big = la.haar_unitary(d, rng)
    offs = _block_offsets(block_spec)
    isos = [big[:, offs[i] : offs[i + 1]] for i in range(nb)]

    qs = {}
    for a, (_, ra) in enumerate(block_spec):
        for b, (lb, _) in enumerate(block_spec):
            m = ra * lb
            k = int(kdims[a, b])
            u = la.haar_unitary(m, rng)
            kern = u[:, :k]
            qs[a, b] = np.eye(m) - kern @ la.dag(kern)

    op = assemble_two_site(d, block_spec, isos, lambda a, b: qs[a, b])
    term = ProjectorTerm(d, (op + la.dag(op)) / 2.0)
    term.validate()
    return term
