"""Shared fixtures: builtin terms and the seeded synthesized corpus.

The corpus sampler only plants block/kernel specifications that are
*identifiable*: the synthesized projector's own canonical decomposition
equals the planted one (generically in the random draws).  A bond
projector and its complement generate the same unital slice algebra, so
the algebra a partial bond induces on one factor is carried by the
components of its *smaller* eigenspace: with kernel dimension k on a
bond of full dimension f, that is opposite_dim * min(k, f - k) random
component vectors.  The sufficient conditions enforced a priori are, for
every block side of dimension s >= 2 (s = r with out-edges, s = l with
in-edges):

- sum over partial edges of opposite_dim * min(k, f - k) >= s, and
- at least two partial edges, or one whose opposite factor dim is >= 2
  (a single edge with a one-dimensional opposite factor yields a single
  hermitian slice, whose algebra is commutative and splits the side);

and for every pair of blocks with dims (1, 1): some in- or out-entry of
the kernel-dimension matrix differs, or a shared entry is partial
(random subspaces then distinguish the blocks almost surely).

"partial" means a kernel dimension strictly between 0 and full, which
makes the drawn subspace genuinely random.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import pytest

import commchain as cc
from commchain import models
from commchain.decomposition import decompose_site
from commchain.graph import build_graph, extract_bond_projectors
from commchain.operators import ProjectorTerm, projectorize


def full_pipeline(term, tol=1e-9, seed=0):
    """projectorize -> decompose -> bonds -> graph for tests."""
    p = term if isinstance(term, ProjectorTerm) else projectorize(term, tol)
    dec = decompose_site(p, tol, seed)
    bonds = extract_bond_projectors(p, dec, tol)
    return p, dec, bonds, build_graph(bonds)


@pytest.fixture(scope="session")
def ising():
    return models.ising()


@pytest.fixture(scope="session")
def fig2():
    return models.fig2()


# --- corpus ---------------------------------------------------------------

# Structures are ordered so that scale-invariant draws are feasible:
# blocks needing partial out-edges come early, blocks needing partial
# in-edges late (off-diagonal edges are drawn upper-triangular only).
SI_STRUCTURES = {
    2: [[(1, 1), (1, 1)]],
    3: [
        [(1, 1), (1, 1), (1, 1)],
        [(1, 2), (1, 1)],
        [(1, 1), (2, 1)],
    ],
    4: [
        [(1, 1)] * 4,
        [(2, 2)],
        [(1, 2), (2, 1)],
        [(1, 2), (1, 1), (1, 1)],
        [(1, 1), (1, 1), (2, 1)],
    ],
    5: [
        [(1, 1), (2, 2)],
        [(1, 2), (1, 1), (2, 1)],
        [(1, 2), (1, 1), (1, 1), (1, 1)],
        [(1, 1), (1, 2), (1, 1), (1, 1)],
    ],
    6: [
        [(2, 3)],
        [(1, 1), (1, 1), (2, 2)],
        [(1, 2), (2, 1), (1, 1), (1, 1)],
        [(1, 2), (2, 2)],
        [(2, 2), (2, 1)],
        [(1, 2), (1, 1), (3, 1)],
        [(1, 2), (1, 2), (1, 1), (1, 1)],
        [(1, 3), (1, 1), (2, 1)],
        [(1, 1), (1, 1), (1, 2), (2, 1)],
    ],
}

GENERIC_STRUCTURES = SI_STRUCTURES  # same pools; the kernel draw differs


def _full_dim(blocks, a, b):
    return blocks[a][1] * blocks[b][0]


def _is_partial(blocks, kd, a, b):
    return 0 < kd[a][b] < _full_dim(blocks, a, b)


def _side_generates_full_algebra(s: int, contributions: list[tuple[int, int]]) -> bool:
    """contributions: (opposite factor dim, kernel dim) per partial edge."""
    if s < 2:
        return True
    if sum(o * k for o, k in contributions) < s:
        return False
    return len(contributions) >= 2 or any(o >= 2 for o, _ in contributions)


def identifiable(blocks, kd) -> bool:
    nb = len(blocks)
    for a, (l, r) in enumerate(blocks):
        out = [
            (blocks[b][0], kd[a][b])
            for b in range(nb)
            if _is_partial(blocks, kd, a, b)
        ]
        if not _side_generates_full_algebra(r, out):
            return False
        inc = [
            (blocks[b][1], kd[b][a])
            for b in range(nb)
            if _is_partial(blocks, kd, b, a)
        ]
        if not _side_generates_full_algebra(l, inc):
            return False
    for i in range(nb):
        for j in range(i + 1, nb):
            if blocks[i] != (1, 1) or blocks[j] != (1, 1):
                continue
            col_sep = any(
                kd[a][i] != kd[a][j] or _is_partial(blocks, kd, a, i)
                for a in range(nb)
            )
            row_sep = any(
                kd[i][b] != kd[j][b] or _is_partial(blocks, kd, i, b)
                for b in range(nb)
            )
            if not (col_sep or row_sep):
                return False
    return True


def _offdiag_acyclic(kd) -> bool:
    nb = len(kd)
    adj = [[b for b in range(nb) if b != a and kd[a][b] > 0] for a in range(nb)]
    color = [0] * nb

    def dfs(v):
        color[v] = 1
        for w in adj[v]:
            if color[w] == 1:
                return False
            if color[w] == 0 and not dfs(w):
                return False
        color[v] = 2
        return True

    return all(color[v] or dfs(v) for v in range(nb))


def planted_scale_invariant(kd) -> bool:
    nb = len(kd)
    if any(kd[a][a] > 1 for a in range(nb)):
        return False
    return _offdiag_acyclic(kd)


def draw_kdims(blocks, rng, scale_invariant: bool, max_tries: int = 2000):
    """Kernel-dimension matrix of the requested kind, identifiable by design.

    Returns None when the structure cannot support the requested kind
    (e.g. a single block whose only possible partial bond is a weight-1
    self-loop that is too small to fix the factor split).
    """
    nb = len(blocks)
    for _ in range(max_tries):
        kd = [[0] * nb for _ in range(nb)]
        if scale_invariant:
            for a in range(nb):
                if rng.random() < 0.75:
                    kd[a][a] = 1
            for a in range(nb):
                for b in range(a + 1, nb):
                    if rng.random() < 0.6:
                        kd[a][b] = int(rng.integers(1, _full_dim(blocks, a, b) + 1))
        else:
            for a in range(nb):
                for b in range(nb):
                    kd[a][b] = int(rng.integers(0, _full_dim(blocks, a, b) + 1))
        if identifiable(blocks, kd) and planted_scale_invariant(kd) == scale_invariant:
            return kd
    return None


@dataclass
class CorpusModel:
    name: str
    d: int
    blocks: list[tuple[int, int]]
    kdims: list[list[int]]
    seed: int
    scale_invariant_planted: bool
    term: ProjectorTerm


def _build_corpus(mix: list[tuple[int, int]], master_seed: int) -> list[CorpusModel]:
    """``mix`` is a list of (d, count) pairs; draws are fully seeded."""
    rng = np.random.default_rng(master_seed)
    out = []
    idx = 0
    for d, count in mix:
        pool = SI_STRUCTURES[d]
        for _ in range(count):
            kd = None
            while kd is None:
                blocks = pool[int(rng.integers(0, len(pool)))]
                si = bool(rng.random() < 0.45)
                kd = draw_kdims(blocks, rng, si)
            seed = int(rng.integers(0, 2**31))
            term = cc.synthesize_local_term(blocks, kd, seed)
            out.append(
                CorpusModel(
                    name=f"model{idx:02d}_d{d}",
                    d=d,
                    blocks=[tuple(b) for b in blocks],
                    kdims=kd,
                    seed=seed,
                    scale_invariant_planted=si,
                    term=term,
                )
            )
            idx += 1
    return out


@pytest.fixture(scope="session")
def small_corpus():
    """A dozen models for module-level property tests."""
    return _build_corpus([(2, 2), (3, 3), (4, 3), (5, 2), (6, 2)], master_seed=2024)


@pytest.fixture(scope="session")
def acceptance_corpus():
    """50 seeded commuting terms, d <= 6, blocks <= 4, ED-budget-weighted."""
    return _build_corpus(
        [(2, 1), (3, 5), (4, 1), (5, 4), (6, 39)], master_seed=777
    )
