"""Tests for degeneracy counting, cycles, scale invariance, ground states."""

import numpy as np

import commchain as cc
from commchain import models
from commchain.ed import build_chain, integer_spectrum, kernel_dim
from commchain.groundspace import (
    TransferMatrices,
    assemble_state,
    check_scale_invariance,
    degeneracy,
    enumerate_cycles,
    ground_states,
    mps_reconstruct,
    spectral_census,
)

from conftest import full_pipeline
from test_graph import fig2_block_permutation


def test_degeneracy_ising_constant(ising):
    _, _, _, g = full_pipeline(ising)
    t = TransferMatrices.from_graph(g)
    assert [degeneracy(t, n) for n in range(1, 11)] == [2] * 10


def test_degeneracy_fig2(fig2):
    _, _, _, g = full_pipeline(fig2)
    t = TransferMatrices.from_graph(g)
    assert degeneracy(t, 3) == 8
    dim, _ = kernel_dim(build_chain(fig2, 3))
    assert dim == 8


def test_degeneracy_zero_chain():
    _, _, _, g = full_pipeline(models.zero(2))
    t = TransferMatrices.from_graph(g)
    assert degeneracy(t, 3) == 8


def test_degeneracy_big_integers():
    t = TransferMatrices(M=[[2]], R=[[0]])
    assert degeneracy(t, 100) == 2**100


def test_enumerate_cycles_ising(ising):
    _, _, _, g = full_pipeline(ising)
    cycles, truncated = enumerate_cycles(g, 2)
    assert not truncated
    assert sorted(cycles) == [(0, 0), (1, 1)]


def test_enumerate_cycles_fig2(fig2):
    _, dec, _, g = full_pipeline(fig2)
    cycles, truncated = enumerate_cycles(g, 3)
    assert not truncated
    assert len(cycles) == 8
    perm = fig2_block_permutation(dec)  # perm[paper_label] = block index
    a, _, gm, th = perm
    assert (a, gm, th) in cycles
    assert (gm, th, a) in cycles  # rotations are distinct ordered cycles


def test_enumerate_cycles_empty_graph():
    p = cc.ProjectorTerm(2, np.eye(4, dtype=complex))
    _, _, _, g = full_pipeline(p)
    cycles, truncated = enumerate_cycles(g, 4)
    assert cycles == [] and not truncated


def test_enumerate_cycles_cap():
    _, _, _, g = full_pipeline(models.zero(2))
    # self-loop of weight 2 still has exactly one vertex sequence per N
    cycles, truncated = enumerate_cycles(g, 5, cap=10)
    assert cycles == [(0, 0, 0, 0, 0)] and not truncated


def test_cycle_trace_agreement(small_corpus):
    for m in small_corpus:
        _, _, _, g = full_pipeline(m.term)
        t = TransferMatrices.from_graph(g)
        for n in range(1, 7):
            cycles, truncated = enumerate_cycles(g, n, cap=100_000)
            assert not truncated
            weighted = 0
            for cyc in cycles:
                w = 1
                for j in range(n):
                    w *= int(g.M[cyc[j], cyc[(j + 1) % n]])
                weighted += w
            assert weighted == degeneracy(t, n), (m.name, n)


def test_scale_invariance_ising(ising):
    _, _, _, g = full_pipeline(ising)
    v = check_scale_invariance(g)
    assert v.scale_invariant and sorted(v.loops) == [0, 1] and v.witness is None


def test_scale_invariance_fig2(fig2):
    _, _, _, g = full_pipeline(fig2)
    v = check_scale_invariance(g)
    assert not v.scale_invariant
    assert v.witness.kind == "cycle" and len(v.witness.vertices) >= 2


def test_scale_invariance_zero():
    _, _, _, g = full_pipeline(models.zero(2))
    v = check_scale_invariance(g)
    assert not v.scale_invariant
    assert v.witness.kind == "heavy_loop" and v.witness.weight == 2


def test_ground_states_ising(ising):
    _, dec, bonds, _ = full_pipeline(ising)
    gs = ground_states(dec, bonds, 4)
    assert len(gs.states) == 2 and not gs.truncated
    dense = [assemble_state(dec, s.cycle, s.bond_vectors) for s in gs.states]
    targets = [np.zeros(16), np.zeros(16)]
    targets[0][0] = 1.0  # |0000>
    targets[1][15] = 1.0  # |1111>
    got = {int(np.argmax(np.abs(v))) for v in dense}
    assert got == {0, 15}
    for v in dense:
        assert abs(np.max(np.abs(v)) - 1) < 1e-10


def test_ground_states_fig2_paper_state(fig2):
    _, dec, bonds, _ = full_pipeline(fig2)
    gs = ground_states(dec, bonds, 3)
    assert len(gs.states) == 8
    perm = fig2_block_permutation(dec)
    a, _, gm, th = perm
    match = [s for s in gs.states if s.cycle == (a, gm, th)]
    assert len(match) == 1
    dense = assemble_state(dec, match[0].cycle, match[0].bond_vectors)
    # (|00> + |11>) (x) (|00> - |11>) (x) (|01> + |10>), normalized
    b_plus = np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2)
    b_minus = np.array([1, 0, 0, -1], dtype=complex) / np.sqrt(2)
    b_psi = np.array([0, 1, 1, 0], dtype=complex) / np.sqrt(2)
    target = np.kron(np.kron(b_plus, b_minus), b_psi)
    assert abs(abs(np.vdot(target, dense)) - 1.0) < 1e-9


def test_ground_states_frustrated_graph():
    # two loops pruned away: acyclic graph with no loops has no cycles at all
    term = cc.synthesize_local_term([(1, 1), (1, 1)], [[0, 1], [0, 0]], seed=2)
    _, dec, bonds, _ = full_pipeline(term)
    gs = ground_states(dec, bonds, 3)
    assert gs.states == []


def test_ground_states_annihilated(small_corpus):
    for m in small_corpus:
        if m.d**3 > 512:
            continue
        _, dec, bonds, _ = full_pipeline(m.term)
        gs = ground_states(dec, bonds, 3, cap=64)
        ch = build_chain(m.term, 3)
        for s in gs.states:
            v = assemble_state(dec, s.cycle, s.bond_vectors)
            assert np.linalg.norm(ch.matrix @ v) < 1e-8, m.name


def test_ground_state_count_matches_degeneracy(small_corpus):
    for m in small_corpus:
        _, dec, bonds, g = full_pipeline(m.term)
        t = TransferMatrices.from_graph(g)
        gs = ground_states(dec, bonds, 3, cap=100_000)
        assert not gs.truncated
        assert len(gs.states) == degeneracy(t, 3), m.name


def test_loop_mps_reconstructs(ising, small_corpus):
    for term in [ising] + [m.term for m in small_corpus if m.scale_invariant_planted][:3]:
        _, dec, bonds, g = full_pipeline(term)
        v = check_scale_invariance(g)
        if not v.scale_invariant:
            continue
        gs = ground_states(dec, bonds, 4)
        for s in gs.states:
            assert s.mps_tensor is not None
            dense = assemble_state(dec, s.cycle, s.bond_vectors)
            from_mps = mps_reconstruct(s.mps_tensor, 4)
            assert np.linalg.norm(dense - from_mps) < 1e-9


def test_census_ising(ising):
    _, _, _, g = full_pipeline(ising)
    t = TransferMatrices.from_graph(g)
    c = spectral_census(t, 3)
    assert c.dims == {0: 2, 1: 0, 2: 6, 3: 0}


def test_census_zero():
    _, _, _, g = full_pipeline(models.zero(2))
    t = TransferMatrices.from_graph(g)
    assert spectral_census(t, 3).dims == {0: 8, 1: 0, 2: 0, 3: 0}


def test_census_fig2(fig2):
    _, _, _, g = full_pipeline(fig2)
    t = TransferMatrices.from_graph(g)
    c = spectral_census(t, 3)
    assert c.dims[0] == 8 and c.total() == 64


def test_census_completeness(small_corpus):
    for m in small_corpus:
        _, _, _, g = full_pipeline(m.term)
        t = TransferMatrices.from_graph(g)
        for n in range(1, 13):
            assert spectral_census(t, n).total() == m.d**n, (m.name, n)


def test_census_matches_ed(small_corpus):
    for m in small_corpus[:5]:
        if m.d**3 > 512:
            continue
        _, _, _, g = full_pipeline(m.term)
        t = TransferMatrices.from_graph(g)
        spec = integer_spectrum(build_chain(m.term, 3))
        census = {k: v for k, v in spectral_census(t, 3).dims.items() if v}
        assert census == spec, m.name


def test_scale_invariant_constant_degeneracy(small_corpus):
    for m in small_corpus:
        _, _, _, g = full_pipeline(m.term)
        v = check_scale_invariance(g)
        if v.scale_invariant:
            t = TransferMatrices.from_graph(g)
            assert all(degeneracy(t, n) == len(v.loops) for n in range(1, 13))
