"""Builtin two-site models used by the CLI and the test corpus."""

from __future__ import annotations

import re

import numpy as np

from .operators import ProjectorTerm

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)


def ising() -> ProjectorTerm:
    """Projector penalizing unequal neighbors: 1 - |00><00| - |11><11|."""
    op = np.eye(4, dtype=complex)
    op[0, 0] = 0.0
    op[3, 3] = 0.0
    return ProjectorTerm(2, op)


def fig2() -> ProjectorTerm:
    """d=4 model (1 - (XX) (x) (ZZ)) / 2 on pairs of qubits per site.

    Commuting and translation invariant but not scale invariant: its graph
    has a directed three-cycle through the Bell-type blocks.
    """
    xx = np.kron(SIGMA_X, SIGMA_X)
    zz = np.kron(SIGMA_Z, SIGMA_Z)
    op = (np.eye(16, dtype=complex) - np.kron(xx, zz)) / 2.0
    return ProjectorTerm(4, op)


def zero(d: int = 2) -> ProjectorTerm:
    """The zero Hamiltonian on local dimension d."""
    return ProjectorTerm(d, np.zeros((d * d, d * d), dtype=complex))


def builtin(name: str) -> ProjectorTerm:
    """Look up a builtin model by name; ``zero`` takes an optional ``(d)``."""
    name = name.strip().lower()
    if name == "ising":
        return ising()
    if name == "fig2":
        return fig2()
    m = re.fullmatch(r"zero(?:\((\d+)\))?", name)
    if m:
        return zero(int(m.group(1)) if m.group(1) else 2)
    raise KeyError(f"unknown builtin model {name!r} (try ising, fig2, zero(d))")
