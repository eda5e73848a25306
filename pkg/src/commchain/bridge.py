"""Bridging non-commuting frustration-free terms to commuting ones.

A positive-definite single-site operator X with

    (h (x) 1) (1 (x) X (x) 1) (1 (x) h) = (1 (x) h) (1 (x) X (x) 1) (h (x) 1)

on three sites certifies that conjugating the local term by
X^(1/2) (x) X^(1/2) yields a commuting term whose chain kernel maps
one-to-one onto the original one through sitewise X^(1/2).  The condition
is linear in X, so the solution space is a null space computation; the
positive-definite search inside it is a bounded randomized scan and its
failure does not certify nonexistence.

The converse direction builds the commuting parent of an injective
translation-invariant MPS on doubled spins: each site carries two
chi-dimensional spins (l, r) and the local projector penalizes everything
but the maximally entangled state on (r_j, l_{j+1}).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _linalg as la
from .errors import CommutificationFailed, SingularS
from .operators import (
    DEFAULT_TOL,
    LocalTerm,
    ProjectorTerm,
    commutator_residual,
    projectorize,
)

PD_SEARCH_TRIES = 200

__all__ = [
    "XCandidate",
    "VerifyX",
    "CommutifyResult",
    "InjectiveMpsMap",
    "MpsParentResult",
    "eqx_defect",
    "verify_x",
    "solve_x",
    "commutify",
    "polar_normalize",
    "random_injective_map",
    "mps_parent",
]


@dataclass
class XCandidate:
    x: np.ndarray
    min_eigenvalue: float
    residual: float

    def to_dict(self) -> dict:
        return {
            "X": [[[float(z.real), float(z.imag)] for z in row] for row in self.x],
            "residual": self.residual,
            "min_eig": self.min_eigenvalue,
            "status": "found",
        }


@dataclass
class VerifyX:
    residual: float
    pd: bool
    min_eigenvalue: float


def eqx_defect(h: LocalTerm, x: np.ndarray) -> np.ndarray:
    """Defect operator of the intertwining condition on three sites (linear in x)."""
    d = h.d
    eye = np.eye(d)
    h12 = np.kron(h.op, eye)
    h23 = np.kron(eye, h.op)
    x2 = la.kron_all(eye, x, eye)
    return h12 @ x2 @ h23 - h23 @ x2 @ h12


def verify_x(h: LocalTerm, x: np.ndarray, tol: float = DEFAULT_TOL) -> VerifyX:
    residual = la.op_norm(eqx_defect(h, x))
    w = np.linalg.eigvalsh((x + la.dag(x)) / 2.0)
    return VerifyX(residual=residual, pd=bool(w[0] > tol), min_eigenvalue=float(w[0]))


def solve_x(
    h: LocalTerm, tol: float = DEFAULT_TOL, seed: int = 0, tries: int = PD_SEARCH_TRIES
) -> XCandidate | None:
    """Search the solution space of the intertwining condition for a PD element.

    The hermitian solution space is computed exactly (null space of the
    vectorized defect map over a hermitian basis).  Candidates tried: the
    projection of the identity first, then ``tries`` seeded random
    mixtures, keeping the best minimal eigenvalue.  Returns None when
    nothing positive definite is found; absence does not prove that no PD
    solution exists.
    """
    d = h.d
    basis = la.hermitian_basis(d)
    cols = []
    for g in basis:
        cols.append(eqx_defect(h, g).reshape(-1))
    a = np.array(cols).T
    stacked = np.vstack([a.real, a.imag])
    null = la.nullspace(stacked, rtol=1e-10)
    if null.shape[1] == 0:
        return None
    null = null.real

    def make_x(coeffs: np.ndarray) -> np.ndarray:
        x = np.tensordot(null @ coeffs, basis, axes=(0, 0))
        nrm = np.linalg.norm(x)
        if nrm < 1e-14:
            return x
        return x * (np.sqrt(d) / nrm)

    candidates = []
    id_coeffs = np.zeros(d * d)
    id_coeffs[0] = np.sqrt(d)  # identity in the hermitian basis
    proj = null.T @ id_coeffs
    if np.linalg.norm(proj) > 1e-12:
        candidates.append(proj)
    rng = np.random.default_rng(seed)
    for _ in range(tries):
        candidates.append(rng.standard_normal(null.shape[1]))

    best: tuple[float, np.ndarray] | None = None
    for c in candidates:
        x = make_x(c)
        if np.linalg.norm(x) < 1e-14:
            continue
        w = np.linalg.eigvalsh(x)
        lo = float(w[0])
        if -float(w[-1]) > lo:
            x = -x
            lo = -float(w[-1])
        if best is None or lo > best[0]:
            best = (lo, x)
    if best is None or best[0] <= tol:
        return None
    lo, x = best
    residual = la.op_norm(eqx_defect(h, x))
    if residual > max(tol, 1e-10 * la.op_norm(h.op) ** 3):
        return None
    return XCandidate(x=x, min_eigenvalue=lo, residual=residual)


@dataclass
class CommutifyResult:
    h_prime: LocalTerm
    certificate: dict


def commutify(h: LocalTerm, x: np.ndarray, tol: float = DEFAULT_TOL) -> CommutifyResult:
    """Conjugate ``h`` by X^(1/2) (x) X^(1/2) and certify the result.

    The certificate records the commutator residual of the projectorized
    result (must pass), the intertwining residual of X, and a dense check
    at one small chain length that the kernel of the new chain maps onto
    the kernel of the old one under sitewise X^(1/2).
    """
    from .ed import apply_sitewise, build_chain, kernel_dim, same_subspace

    check = verify_x(h, x, tol)
    if not check.pd:
        raise CommutificationFailed(
            f"X is not positive definite (min eigenvalue {check.min_eigenvalue:.3e})"
        )
    w, v = np.linalg.eigh((x + la.dag(x)) / 2.0)
    root = (v * np.sqrt(np.clip(w, tol, None))) @ la.dag(v)
    conj = np.kron(root, root)
    h_prime = LocalTerm(h.d, (conj @ h.op @ conj + la.dag(conj @ h.op @ conj)) / 2.0)
    p_prime = projectorize(h_prime, max(tol, 1e-9))
    resid = commutator_residual(p_prime)
    if resid > np.sqrt(tol):
        raise CommutificationFailed(
            f"conjugated term is not commuting (residual {resid:.3e}); X is invalid"
        )
    d = h.d
    n = 3 if d**3 <= 512 else 2
    cert: dict = {
        "commutator_residual": float(resid),
        "x_residual": float(check.residual),
        "min_eigenvalue": float(check.min_eigenvalue),
        "kernel_n": None,
        "kernel_match": None,
    }
    if d**n <= 512:
        kp = kernel_dim(build_chain(h_prime, n))[1]
        kh = kernel_dim(build_chain(h, n))[1]
        mapped = apply_sitewise(root, n, kp)
        mapped = la.orthonormalize_rows(mapped.T).T
        cert["kernel_n"] = n
        cert["kernel_match"] = bool(same_subspace(mapped, kh))
    return CommutifyResult(h_prime=h_prime, certificate=cert)


@dataclass
class InjectiveMpsMap:
    """Hermitian positive-definite sitewise map of an injective MPS."""

    chi: int
    s: np.ndarray  # on C^(chi^2)
    phi_max: np.ndarray  # maximally entangled vector, local dimension chi

    def to_dict(self) -> dict:
        return {
            "chi": self.chi,
            "S": [[[float(z.real), float(z.imag)] for z in row] for row in self.s],
        }


def _phi_max(chi: int) -> np.ndarray:
    phi = np.zeros(chi * chi, dtype=complex)
    for i in range(chi):
        phi[i * chi + i] = 1.0
    return phi / np.sqrt(chi)


def polar_normalize(s_raw: np.ndarray, tol: float = DEFAULT_TOL) -> InjectiveMpsMap:
    """Positive polar factor of an injective map (the unitary is dropped).

    Removing the unitary changes the MPS only by a sitewise unitary, which
    preserves the phase.
    """
    s_raw = np.asarray(s_raw, dtype=complex)
    dim = s_raw.shape[0]
    chi = round(np.sqrt(dim))
    if chi * chi != dim or s_raw.shape != (dim, dim):
        raise ValueError("map must be square on a chi^2-dimensional space")
    u, sv, vh = np.linalg.svd(s_raw)
    if sv[-1] <= tol * max(sv[0], 1.0):
        raise SingularS(f"smallest singular value {sv[-1]:.3e} is numerically zero")
    pos = (la.dag(vh) * sv) @ vh
    return InjectiveMpsMap(chi=chi, s=(pos + la.dag(pos)) / 2.0, phi_max=_phi_max(chi))


def random_injective_map(chi: int, seed: int = 0) -> InjectiveMpsMap:
    """Seeded random hermitian PD map with controlled conditioning."""
    rng = np.random.default_rng(seed)
    v = la.haar_unitary(chi * chi, rng)
    w = rng.uniform(0.6, 1.8, size=chi * chi)
    s = (v * w) @ la.dag(v)
    return InjectiveMpsMap(chi=chi, s=(s + la.dag(s)) / 2.0, phi_max=_phi_max(chi))


@dataclass
class MpsParentResult:
    p: ProjectorTerm  # commuting parent of the entangled-pair chain
    h: LocalTerm  # parent of the S-deformed MPS, generally non-commuting
    s_map: InjectiveMpsMap
    layout: str


def mps_parent(m: InjectiveMpsMap) -> MpsParentResult:
    """Commuting parent projector on doubled spins and its S-deformed term.

    Each site is C^chi (x) C^chi with parts (l, r); the projector removes
    the maximally entangled state on the inner pair (r_j, l_{j+1}).  The
    deformed term h = (S^-1 (x) S^-1) P (S^-1 (x) S^-1) has the sitewise-S
    image of the entangled chain as its unique ground state.
    """
    chi = m.chi
    d = chi * chi
    phi = m.phi_max
    mid = np.eye(d, dtype=complex) - np.outer(phi, phi.conj())
    op = la.kron_all(np.eye(chi), mid, np.eye(chi))
    p = ProjectorTerm(d, op)
    p.validate()
    w, v = np.linalg.eigh(m.s)
    if w[0] <= 0:
        raise SingularS(f"map not positive definite (min eigenvalue {w[0]:.3e})")
    sinv = (v / w) @ la.dag(v)
    conj = np.kron(sinv, sinv)
    h_op = conj @ p.op @ conj
    h = LocalTerm(d, (h_op + la.dag(h_op)) / 2.0)
    return MpsParentResult(
        p=p,
        h=h,
        s_map=m,
        layout="site = (l, r) of dimension chi each; pair state on (r_j, l_j+1)",
    )
