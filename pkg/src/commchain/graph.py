"""Bond projector extraction and the directed interaction graph.

For every ordered pair of blocks (a, b) the two-site projector compresses
to 1_{l_a} (x) Q (x) 1_{r_b} with Q a projector on H_{a_r} (x) H_{b_l}.
The graph has one vertex per block and an edge a -> b whenever Q has a
nontrivial kernel; kernel dimensions and ranks are collected in the
integer transfer matrices M and R.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _linalg as la
from .decomposition import SiteDecomposition
from .errors import FactorizationFailed
from .operators import DEFAULT_TOL, ProjectorTerm, assemble_two_site

__all__ = [
    "BondFactor",
    "InteractionGraph",
    "extract_bond_projectors",
    "build_graph",
    "reconstruct_term",
    "export_dot",
]


@dataclass
class BondFactor:
    """Projector Q acting on H_{a_r} (x) H_{b_l} for blocks a -> b."""

    from_block: int
    to_block: int
    r_from: int  # dim H_{a_r}
    l_to: int  # dim H_{b_l}
    q: np.ndarray
    kernel_dim: int
    kernel_basis: np.ndarray  # orthonormal columns spanning ker q


@dataclass
class InteractionGraph:
    num_vertices: int
    M: np.ndarray  # kernel dimensions, dtype int
    R: np.ndarray  # ranks, dtype int
    block_dims: list[tuple[int, int]]

    def edges(self) -> list[tuple[int, int]]:
        return [
            (a, b)
            for a in range(self.num_vertices)
            for b in range(self.num_vertices)
            if self.M[a, b] > 0
        ]

    def to_dict(self) -> dict:
        return {
            "M": self.M.tolist(),
            "R": self.R.tolist(),
            "blocks": [[l, r] for l, r in self.block_dims],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "InteractionGraph":
        m = np.array(data["M"], dtype=int)
        return cls(
            num_vertices=m.shape[0],
            M=m,
            R=np.array(data["R"], dtype=int),
            block_dims=[(int(l), int(r)) for l, r in data["blocks"]],
        )


def extract_bond_projectors(
    p: ProjectorTerm, dec: SiteDecomposition, tol: float = DEFAULT_TOL
) -> list[list[BondFactor]]:
    """Compress ``p`` onto every ordered block pair and strip identity slots.

    Raises FactorizationFailed when a compression does not factor as
    1 (x) Q (x) 1, which signals a decomposition that does not belong to
    this term.
    """
    thresh = np.sqrt(tol)
    bonds: list[list[BondFactor]] = []
    for a, ba in enumerate(dec.blocks):
        row = []
        for b, bb in enumerate(dec.blocks):
            w = np.kron(ba.isometry, bb.isometry)
            comp = la.dag(w) @ p.op @ w
            t = comp.reshape(ba.l, ba.r, bb.l, bb.r, ba.l, ba.r, bb.l, bb.r)
            q = np.einsum("xabyxcdy->abcd", t).reshape(
                ba.r * bb.l, ba.r * bb.l
            ) / (ba.l * bb.r)
            rebuilt = la.kron_all(np.eye(ba.l), q, np.eye(bb.r))
            resid = la.op_norm(comp - rebuilt)
            if resid > thresh:
                raise FactorizationFailed(
                    f"bond ({a},{b}) does not factor with identity outer slots "
                    f"(residual {resid:.3e})"
                )
            q = (q + la.dag(q)) / 2.0
            idem = la.op_norm(q @ q - q)
            if idem > thresh:
                raise FactorizationFailed(
                    f"bond ({a},{b}) compression is not a projector (defect {idem:.3e})"
                )
            # Projector spectrum is {0,1}; threshold at 1/2 is robust.
            w_eig, v_eig = np.linalg.eigh(q)
            kernel = v_eig[:, w_eig < 0.5]
            row.append(
                BondFactor(
                    from_block=a,
                    to_block=b,
                    r_from=ba.r,
                    l_to=bb.l,
                    q=q,
                    kernel_dim=kernel.shape[1],
                    kernel_basis=kernel,
                )
            )
        bonds.append(row)
    recon = reconstruct_term(dec, bonds)
    resid = la.op_norm(recon - p.op)
    if resid > thresh:
        raise FactorizationFailed(f"reconstruction residual {resid:.3e}")
    return bonds


def reconstruct_term(dec: SiteDecomposition, bonds: list[list[BondFactor]]) -> np.ndarray:
    """Rebuild the two-site operator from the block data (inverse of extraction)."""
    return assemble_two_site(
        dec.d,
        dec.block_dims,
        [b.isometry for b in dec.blocks],
        lambda a, b: bonds[a][b].q,
    )


def build_graph(bonds: list[list[BondFactor]]) -> InteractionGraph:
    nv = len(bonds)
    m = np.zeros((nv, nv), dtype=int)
    r = np.zeros((nv, nv), dtype=int)
    for a in range(nv):
        for b in range(nv):
            bf = bonds[a][b]
            m[a, b] = bf.kernel_dim
            r[a, b] = bf.q.shape[0] - bf.kernel_dim
    block_dims = [(bonds[0][a].l_to, bonds[a][0].r_from) for a in range(nv)]
    return InteractionGraph(num_vertices=nv, M=m, R=r, block_dims=block_dims)


def export_dot(g: InteractionGraph) -> str:
    """Graphviz DOT rendering with kernel dimensions as edge labels."""
    lines = ["digraph interaction {"]
    for v in range(g.num_vertices):
        l, r = g.block_dims[v]
        lines.append(f'  a{v} [label="a{v} (l={l}, r={r})"];')
    for a in range(g.num_vertices):
        for b in range(g.num_vertices):
            if g.M[a, b] > 0:
                lines.append(f'  a{a} -> a{b} [label="k={int(g.M[a, b])}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
