"""Canonical form pipeline for scale-invariant commuting chains.

Three ground-space-preserving moves bring a scale-invariant term to a
normal form determined only by its degeneracy k:

1. prune: replace every bond projector that is not a weight-1 self-loop
   by the identity, leaving a graph of bare loops;
2. disentangle: conjugate by a block-diagonal two-site unitary that turns
   each loop kernel vector into a product of reference vectors;
3. normal form: the projector 1 - sum_a |aa><aa| over k basis states.

The phase report bundles the full pipeline verdicts; two scale-invariant
commuting terms are in the same phase exactly when their degeneracies
agree.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _linalg as la
from .decomposition import SiteDecomposition, decompose_site
from .errors import (
    CommchainError,
    DegenerateLoopKernel,
    InvalidK,
    NotScaleInvariant,
)
from .graph import BondFactor, InteractionGraph, build_graph, extract_bond_projectors
from .groundspace import (
    GroundLoopState,
    ScaleInvarianceVerdict,
    check_scale_invariance,
    loop_states,
)
from .operators import (
    DEFAULT_TOL,
    LocalTerm,
    ProjectorTerm,
    assemble_two_site,
    check_commuting,
    projectorize,
)

__all__ = [
    "DisentanglerSpec",
    "PhaseReport",
    "prune_to_loops",
    "disentangling_unitary",
    "conjugate_term",
    "canonical_hamiltonian",
    "classify_phase",
    "CanonicalChain",
    "canonical_chain",
]


def prune_to_loops(
    p: ProjectorTerm,
    dec: SiteDecomposition,
    bonds: list[list[BondFactor]],
    tol: float = DEFAULT_TOL,
    verify: bool = True,
) -> ProjectorTerm:
    """Replace every non-loop bond projector by the identity.

    Requires a scale-invariant graph.  The result is a commuting projector
    whose graph consists of the original self-loops and nothing else, with
    the same chain kernel; when ``verify`` is set the kernel equality is
    checked by dense diagonalization at one small chain length.
    """
    g = build_graph(bonds)
    verdict = check_scale_invariance(g)
    if not verdict.scale_invariant:
        raise NotScaleInvariant(f"witness: {verdict.witness.to_dict()}")

    def q_blocks(a: int, b: int) -> np.ndarray:
        bf = bonds[a][b]
        if a == b and bf.kernel_dim >= 1:
            return bf.q
        return np.eye(bf.q.shape[0], dtype=complex)

    op = assemble_two_site(dec.d, dec.block_dims, [b.isometry for b in dec.blocks], q_blocks)
    pruned = ProjectorTerm(dec.d, (op + la.dag(op)) / 2.0)
    pruned.validate()
    chk = check_commuting(pruned, max(tol, 1e-10))
    if not chk.commuting:
        raise CommchainError(f"pruned term not commuting (residual {chk.residual:.3e})")
    if verify:
        _check_same_chain_kernel(p, pruned)
    return pruned


def _check_same_chain_kernel(a: LocalTerm, b: LocalTerm, limit: int = 512) -> None:
    from .ed import build_chain, kernel_dim, same_subspace

    d = a.d
    n = 3 if d**3 <= limit else 2
    if d**n > limit:
        return
    ka = kernel_dim(build_chain(a, n))[1]
    kb = kernel_dim(build_chain(b, n))[1]
    if not same_subspace(ka, kb):
        raise CommchainError(f"chain kernels differ at N={n} after pruning")


@dataclass
class DisentanglerSpec:
    """Block-diagonal two-site unitary sending loop states to products."""

    refs: dict[int, tuple[np.ndarray, np.ndarray]]  # block -> (xi_r, xi_l)
    loop_blocks: list[int]
    u: np.ndarray  # unitary on C^{d^2}


def disentangling_unitary(
    dec: SiteDecomposition,
    loops: list[GroundLoopState],
    refs: dict[int, tuple[np.ndarray, np.ndarray]] | None = None,
    tol: float = DEFAULT_TOL,
) -> DisentanglerSpec:
    """Unitary acting as U_a on each loop bond block, identity elsewhere.

    U_a maps the loop kernel vector to xi_r (x) xi_l; the references
    default to the first standard basis vector of each factor.  The
    assembled operator is block-diagonal for the four-index two-site
    decomposition, hence conjugation preserves commutativity.
    """
    chosen: dict[int, tuple[np.ndarray, np.ndarray]] = {}
    small_us: dict[int, np.ndarray] = {}
    for st in loops:
        blk = dec.blocks[st.block]
        if refs is not None and st.block in refs:
            xi_r, xi_l = refs[st.block]
            xi_r = np.asarray(xi_r, dtype=complex)
            xi_l = np.asarray(xi_l, dtype=complex)
        else:
            xi_r = np.zeros(blk.r, dtype=complex)
            xi_r[0] = 1.0
            xi_l = np.zeros(blk.l, dtype=complex)
            xi_l[0] = 1.0
        if abs(np.linalg.norm(xi_r) - 1) > 1e-10 or abs(np.linalg.norm(xi_l) - 1) > 1e-10:
            raise ValueError("reference vectors must be unit vectors")
        target = np.kron(xi_r, xi_l)
        b1 = la.complete_orthonormal(st.phi)
        b2 = la.complete_orthonormal(target)
        u_a = b2 @ la.dag(b1)
        defect = la.op_norm(u_a @ st.phi[:, None] - target[:, None])
        if defect > np.sqrt(tol):
            raise CommchainError(f"loop unitary misses its target by {defect:.3e}")
        chosen[st.block] = (xi_r, xi_l)
        small_us[st.block] = u_a

    def q_blocks(a: int, b: int) -> np.ndarray:
        ra = dec.blocks[a].r
        lb = dec.blocks[b].l
        if a == b and a in small_us:
            return small_us[a]
        return np.eye(ra * lb, dtype=complex)

    u = assemble_two_site(dec.d, dec.block_dims, [b.isometry for b in dec.blocks], q_blocks)
    unit_defect = la.op_norm(u @ la.dag(u) - np.eye(dec.d**2))
    if unit_defect > np.sqrt(tol):
        raise CommchainError(f"disentangler not unitary (defect {unit_defect:.3e})")
    return DisentanglerSpec(refs=chosen, loop_blocks=[s.block for s in loops], u=u)


def conjugate_term(p: ProjectorTerm, u: np.ndarray) -> ProjectorTerm:
    op = u @ p.op @ la.dag(u)
    out = ProjectorTerm(p.d, (op + la.dag(op)) / 2.0)
    out.validate()
    return out


def canonical_hamiltonian(k: int, d: int) -> ProjectorTerm:
    """Normal form 1 (x) 1 - sum_{a<k} |aa><aa| for degeneracy k."""
    if not (1 <= k <= d):
        raise InvalidK(f"need 1 <= k <= d, got k={k}, d={d}")
    op = np.eye(d * d, dtype=complex)
    for a in range(k):
        idx = a * d + a
        op[idx, idx] = 0.0
    return ProjectorTerm(d, op)


@dataclass
class PhaseReport:
    """Verdict bundle of the full classification pipeline."""

    tol: float
    seed: int
    commuting: bool | None = None
    commutator_residual: float | None = None
    block_dims: list[tuple[int, int]] | None = None
    graph: InteractionGraph | None = None
    verdict: ScaleInvarianceVerdict | None = None
    degeneracy: int | None = None
    canonical_rep: ProjectorTerm | None = None
    notes: list[str] = field(default_factory=list)
    error: str | None = None
    stage: str | None = None

    @property
    def scale_invariant(self) -> bool | None:
        return self.verdict.scale_invariant if self.verdict else None

    def exit_code(self) -> int:
        if self.error is not None:
            return 1
        if self.commuting is False:
            return 2
        if self.verdict is not None and not self.verdict.scale_invariant:
            return 3
        return 0

    def to_dict(self) -> dict:
        return {
            "commuting": self.commuting,
            "commutator_residual": self.commutator_residual,
            "blocks": self.block_dims,
            "graph": self.graph.to_dict() if self.graph else None,
            "scale_invariant": self.scale_invariant,
            "witness": (
                self.verdict.witness.to_dict()
                if self.verdict and self.verdict.witness
                else None
            ),
            "degeneracy": self.degeneracy,
            "canonical_rep": self.canonical_rep.to_dict() if self.canonical_rep else None,
            "conventions": self.notes,
            "error": self.error,
            "stage": self.stage,
            "seed": self.seed,
            "tol": self.tol,
        }


_CONVENTION_NOTES = [
    "blocks with trivial action keep the algebra side as the left factor",
    "reference vectors default to the first standard basis vector per factor",
    "phase equality of scale-invariant commuting terms is decided by equal degeneracy",
]


def classify_phase(term: LocalTerm, tol: float = DEFAULT_TOL, seed: int = 0) -> PhaseReport:
    """Run the full pipeline and report the phase of the input term."""
    report = PhaseReport(tol=tol, seed=seed, notes=list(_CONVENTION_NOTES))
    try:
        p = term if isinstance(term, ProjectorTerm) else projectorize(term, tol)
    except CommchainError as exc:
        report.error = str(exc)
        report.stage = "projectorize"
        return report
    chk = check_commuting(p, tol)
    report.commuting = chk.commuting
    report.commutator_residual = chk.residual
    if not chk.commuting:
        report.stage = "check_commuting"
        return report
    try:
        dec = decompose_site(p, tol, seed)
        report.block_dims = dec.block_dims
        bonds = extract_bond_projectors(p, dec, tol)
        report.graph = build_graph(bonds)
    except CommchainError as exc:
        report.error = str(exc)
        report.stage = "decomposition"
        return report
    report.verdict = check_scale_invariance(report.graph)
    if not report.verdict.scale_invariant:
        report.stage = "scale_invariance"
        return report
    k = len(report.verdict.loops)
    report.degeneracy = k
    if k >= 1:
        report.canonical_rep = canonical_hamiltonian(k, p.d)
    else:
        report.notes.append("no loops: frustrated at every length, no canonical form")
    report.stage = "classified"
    return report


@dataclass
class CanonicalChain:
    """All stages of the canonicalization pipeline for one input."""

    dec: SiteDecomposition
    bonds: list[list[BondFactor]]
    pruned: ProjectorTerm
    disentangler: DisentanglerSpec
    conjugated: ProjectorTerm
    k: int
    canonical: ProjectorTerm | None
    site_states: list[np.ndarray]  # per-loop one-site reference state in C^d


def canonical_chain(
    p: ProjectorTerm,
    tol: float = DEFAULT_TOL,
    seed: int = 0,
    refs: dict[int, tuple[np.ndarray, np.ndarray]] | None = None,
    verify: bool = True,
) -> CanonicalChain:
    """prune -> disentangle -> normal form, with the loop site states.

    After conjugation the chain ground space is spanned by the product
    states s_a^(x N) with s_a = W_a (xi_l (x) xi_r); these site states are
    returned so callers can verify the kernel identity.
    """
    dec = decompose_site(p, tol, seed)
    bonds = extract_bond_projectors(p, dec, tol)
    g = build_graph(bonds)
    verdict = check_scale_invariance(g)
    if not verdict.scale_invariant:
        raise NotScaleInvariant(f"witness: {verdict.witness.to_dict()}")
    for a in verdict.loops:
        if bonds[a][a].kernel_dim != 1:
            raise DegenerateLoopKernel(
                f"loop {a} has kernel dimension {bonds[a][a].kernel_dim}"
            )
    pruned = prune_to_loops(p, dec, bonds, tol, verify=verify)
    loops = loop_states(bonds)
    disent = disentangling_unitary(dec, loops, refs, tol)
    conjugated = conjugate_term(pruned, disent.u)
    k = len(verdict.loops)
    canonical = canonical_hamiltonian(k, p.d) if k >= 1 else None
    site_states = []
    for a in disent.loop_blocks:
        xi_r, xi_l = disent.refs[a]
        site_states.append(dec.blocks[a].isometry @ np.kron(xi_l, xi_r))
    return CanonicalChain(
        dec=dec,
        bonds=bonds,
        pruned=pruned,
        disentangler=disent,
        conjugated=conjugated,
        k=k,
        canonical=canonical,
        site_states=site_states,
    )
