"""Command-line front end.

Subcommands wrap the analysis stages over a builtin model or a JSON local
term.  Every report embeds the seed and tolerance, all integers are exact,
and outputs are byte-deterministic for a fixed (input, seed, tol).

Exit codes: 0 success / classified, 2 non-commuting input, 3 commuting but
not scale invariant, 1 I/O or numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import bridge as bridge_mod
from . import models
from .canonical import canonical_chain, canonical_hamiltonian, classify_phase
from .decomposition import decompose_site
from .ed import build_chain, integer_spectrum
from .errors import CommchainError, NotScaleInvariant
from .graph import build_graph, export_dot, extract_bond_projectors
from .groundspace import TransferMatrices, degeneracy, ground_states, spectral_census
from .operators import DEFAULT_TOL, LocalTerm, check_commuting, projectorize

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_NOT_COMMUTING = 2
EXIT_NOT_SCALE_INVARIANT = 3


def _emit(doc: dict, path: str | None) -> None:
    text = json.dumps(doc, indent=2) + "\n"
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _fail(message: str, args, code: int = EXIT_FAILURE) -> int:
    _emit({"error": message, "seed": args.seed, "tol": args.tol}, getattr(args, "json", None))
    return code


def _read_doc(path: str | None) -> dict:
    if path in (None, "-"):
        return json.load(sys.stdin)
    with open(path) as fh:
        return json.load(fh)


def _load_term(args) -> LocalTerm:
    if args.model and args.input:
        raise CommchainError("give either --model or --input, not both")
    if args.model:
        return models.builtin(args.model)
    if args.input:
        doc = _read_doc(args.input)
        if "h" in doc:
            doc = doc["h"]
        return LocalTerm.from_dict(doc, args.tol)
    raise CommchainError("an input is required: --model NAME or --input PATH")


def _parse_n_list(spec: str) -> list[int]:
    out: list[int] = []
    for part in spec.split(","):
        part = part.strip()
        if ".." in part:
            lo, hi = part.split("..")
            out.extend(range(int(lo), int(hi) + 1))
        else:
            out.append(int(part))
    if not out or any(n < 1 for n in out):
        raise ValueError(f"bad chain length list {spec!r}")
    return out


def _pipeline(term: LocalTerm, tol: float, seed: int):
    """projectorize -> commutativity gate -> decomposition -> graph."""
    p = projectorize(term, tol)
    chk = check_commuting(p, tol)
    if not chk.commuting:
        raise _NotCommutingExit(chk.residual)
    dec = decompose_site(p, tol, seed)
    bonds = extract_bond_projectors(p, dec, tol)
    return p, dec, bonds, build_graph(bonds)


class _NotCommutingExit(Exception):
    def __init__(self, residual: float):
        self.residual = residual
        super().__init__(f"term is not commuting (residual {residual:.6e})")


def _add_common(sub, needs_input=True):
    if needs_input:
        sub.add_argument("--model", help="builtin model: ising, fig2, zero(d)")
        sub.add_argument("--input", help="local term JSON file ('-' for stdin)")
    sub.add_argument("--tol", type=float, default=DEFAULT_TOL)
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--json", help="output path (default stdout)")


def cmd_analyze(args) -> int:
    try:
        term = _load_term(args)
    except (CommchainError, OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        return _fail(str(exc), args)
    report = classify_phase(term, args.tol, args.seed)
    _emit(report.to_dict(), args.json)
    return report.exit_code()


def cmd_graph(args) -> int:
    try:
        term = _load_term(args)
        _, _, _, g = _pipeline(term, args.tol, args.seed)
    except _NotCommutingExit as exc:
        return _fail(str(exc), args, EXIT_NOT_COMMUTING)
    except (CommchainError, OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        return _fail(str(exc), args)
    doc = g.to_dict()
    doc.update({"seed": args.seed, "tol": args.tol})
    if args.dot:
        text = export_dot(g)
        if args.dot == "-":
            sys.stdout.write(text)
        else:
            with open(args.dot, "w") as fh:
                fh.write(text)
    if args.dot != "-" or args.json:
        _emit(doc, args.json)
    return EXIT_OK


def cmd_degeneracy(args) -> int:
    try:
        term = _load_term(args)
        n_list = _parse_n_list(args.N)
        _, _, _, g = _pipeline(term, args.tol, args.seed)
    except _NotCommutingExit as exc:
        return _fail(str(exc), args, EXIT_NOT_COMMUTING)
    except (CommchainError, OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        return _fail(str(exc), args)
    t = TransferMatrices.from_graph(g)
    doc = {
        "degeneracy": {str(n): degeneracy(t, n) for n in n_list},
        "seed": args.seed,
        "tol": args.tol,
    }
    _emit(doc, args.json)
    return EXIT_OK


def cmd_census(args) -> int:
    try:
        term = _load_term(args)
        n_list = _parse_n_list(args.N)
        _, _, _, g = _pipeline(term, args.tol, args.seed)
    except _NotCommutingExit as exc:
        return _fail(str(exc), args, EXIT_NOT_COMMUTING)
    except (CommchainError, OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        return _fail(str(exc), args)
    t = TransferMatrices.from_graph(g)
    doc = {
        "census": {str(n): spectral_census(t, n).to_dict() for n in n_list},
        "seed": args.seed,
        "tol": args.tol,
    }
    _emit(doc, args.json)
    return EXIT_OK


def cmd_ground(args) -> int:
    try:
        term = _load_term(args)
        n_list = _parse_n_list(args.N)
        _, dec, bonds, _ = _pipeline(term, args.tol, args.seed)
    except _NotCommutingExit as exc:
        return _fail(str(exc), args, EXIT_NOT_COMMUTING)
    except (CommchainError, OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        return _fail(str(exc), args)
    results = {}
    for n in n_list:
        gs = ground_states(dec, bonds, n, args.cap)
        results[str(n)] = {
            "N": n,
            "truncated": gs.truncated,
            "states": [s.to_dict() for s in gs.states],
        }
    _emit({"ground_states": results, "seed": args.seed, "tol": args.tol}, args.json)
    return EXIT_OK


def cmd_canonical(args) -> int:
    if args.k is not None or args.d is not None:
        if args.k is None or args.d is None:
            return _fail("--k and --d must be given together", args)
        try:
            rep = canonical_hamiltonian(args.k, args.d)
        except CommchainError as exc:
            return _fail(str(exc), args)
        _emit(
            {"canonical_rep": rep.to_dict(), "k": args.k, "seed": args.seed, "tol": args.tol},
            args.json,
        )
        return EXIT_OK
    try:
        term = _load_term(args)
        p = projectorize(term, args.tol)
        chk = check_commuting(p, args.tol)
        if not chk.commuting:
            raise _NotCommutingExit(chk.residual)
        chain = canonical_chain(p, args.tol, args.seed)
    except _NotCommutingExit as exc:
        return _fail(str(exc), args, EXIT_NOT_COMMUTING)
    except NotScaleInvariant as exc:
        return _fail(str(exc), args, EXIT_NOT_SCALE_INVARIANT)
    except (CommchainError, OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        return _fail(str(exc), args)
    doc = {
        "k": chain.k,
        "canonical_rep": chain.canonical.to_dict() if chain.canonical else None,
        "pruned": chain.pruned.to_dict(),
        "disentangler": [
            [[float(z.real), float(z.imag)] for z in row] for row in chain.disentangler.u
        ],
        "site_states": [
            [[float(z.real), float(z.imag)] for z in v] for v in chain.site_states
        ],
        "seed": args.seed,
        "tol": args.tol,
    }
    _emit(doc, args.json)
    return EXIT_OK


def cmd_verify(args) -> int:
    try:
        term = _load_term(args)
        n_list = _parse_n_list(args.N)
        p, dec, bonds, g = _pipeline(term, args.tol, args.seed)
    except _NotCommutingExit as exc:
        return _fail(str(exc), args, EXIT_NOT_COMMUTING)
    except (CommchainError, OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        return _fail(str(exc), args)
    t = TransferMatrices.from_graph(g)
    all_ok = True
    rows = []
    for n in n_list:
        if p.d**n > args.ed_cap:
            rows.append({"N": n, "skipped": f"d^N exceeds ed cap {args.ed_cap}"})
            continue
        spec = integer_spectrum(build_chain(p, n, cap=args.ed_cap))
        census = spectral_census(t, n)
        deg = degeneracy(t, n)
        ed_deg = spec.get(0, 0)
        census_ok = {k: v for k, v in census.dims.items() if v} == spec
        deg_ok = deg == ed_deg
        all_ok = all_ok and census_ok and deg_ok
        rows.append(
            {
                "N": n,
                "degeneracy": deg,
                "ed_kernel_dim": ed_deg,
                "degeneracy_match": deg_ok,
                "census_match": census_ok,
            }
        )
        status = "PASS" if (census_ok and deg_ok) else "FAIL"
        sys.stderr.write(
            f"N={n}: degeneracy {deg} vs ED {ed_deg}, census "
            f"{'ok' if census_ok else 'MISMATCH'} -> {status}\n"
        )
    _emit({"verify": rows, "all_pass": all_ok, "seed": args.seed, "tol": args.tol}, args.json)
    return EXIT_OK if all_ok else EXIT_FAILURE


def _matrix_from_json(rows) -> np.ndarray:
    return np.array([[complex(re, im) for re, im in row] for row in rows], dtype=complex)


def cmd_bridge(args) -> int:
    try:
        if args.action == "mps-parent":
            if args.s_matrix:
                doc = _read_doc(args.s_matrix)
                m = bridge_mod.polar_normalize(_matrix_from_json(doc["S"]), args.tol)
            else:
                m = bridge_mod.random_injective_map(args.chi, args.seed)
            res = bridge_mod.mps_parent(m)
            _emit(
                {
                    "h": res.h.to_dict(),
                    "P": res.p.to_dict(),
                    "S": res.s_map.to_dict(),
                    "layout": res.layout,
                    "seed": args.seed,
                    "tol": args.tol,
                },
                args.json,
            )
            return EXIT_OK
        if args.action == "polar-normalize":
            doc = _read_doc(args.input)
            m = bridge_mod.polar_normalize(_matrix_from_json(doc["S"]), args.tol)
            _emit({**m.to_dict(), "seed": args.seed, "tol": args.tol}, args.json)
            return EXIT_OK
        if args.action == "solve-x":
            doc = _read_doc(args.input)
            h = LocalTerm.from_dict(doc["h"] if "h" in doc else doc, args.tol)
            cand = bridge_mod.solve_x(h, args.tol, args.seed)
            out = {"h": h.to_dict()}
            out["x_candidate"] = cand.to_dict() if cand else {"status": "not_found"}
            out.update({"seed": args.seed, "tol": args.tol})
            _emit(out, args.json)
            return EXIT_OK
        if args.action == "commutify":
            doc = _read_doc(args.input)
            h = LocalTerm.from_dict(doc["h"], args.tol)
            xc = doc.get("x_candidate", doc)
            if "X" not in xc or xc.get("status") == "not_found":
                return _fail("no X candidate in input document", args)
            x = _matrix_from_json(xc["X"])
            res = bridge_mod.commutify(h, x, args.tol)
            _emit(
                {
                    "h_prime": res.h_prime.to_dict(),
                    "certificate": res.certificate,
                    "seed": args.seed,
                    "tol": args.tol,
                },
                args.json,
            )
            return EXIT_OK
        return _fail(f"unknown bridge action {args.action!r}", args)
    except (CommchainError, OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        return _fail(str(exc), args)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="commchain",
        description="Analyze translation-invariant commuting spin-chain terms.",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    sp = subs.add_parser("analyze", help="full phase classification report")
    _add_common(sp)
    sp.set_defaults(func=cmd_analyze)

    sp = subs.add_parser("graph", help="interaction graph (JSON and DOT)")
    _add_common(sp)
    sp.add_argument("--dot", help="write DOT here ('-' for stdout)")
    sp.set_defaults(func=cmd_graph)

    sp = subs.add_parser("degeneracy", help="exact ground degeneracy over N")
    _add_common(sp)
    sp.add_argument("--N", required=True, help="chain lengths, e.g. 3 or 2..8")
    sp.set_defaults(func=cmd_degeneracy)

    sp = subs.add_parser("census", help="exact energy census over N")
    _add_common(sp)
    sp.add_argument("--N", required=True, help="chain lengths, e.g. 3 or 2..8")
    sp.set_defaults(func=cmd_census)

    sp = subs.add_parser("ground", help="explicit ground states")
    _add_common(sp)
    sp.add_argument("--N", required=True, help="chain lengths, e.g. 4")
    sp.add_argument("--cap", type=int, default=10_000)
    sp.set_defaults(func=cmd_ground)

    sp = subs.add_parser("canonical", help="canonicalization pipeline / normal form")
    _add_common(sp)
    sp.add_argument("--k", type=int, help="emit the normal form for degeneracy k")
    sp.add_argument("--d", type=int, help="site dimension for --k")
    sp.set_defaults(func=cmd_canonical)

    sp = subs.add_parser("verify", help="cross-check against dense diagonalization")
    _add_common(sp)
    sp.add_argument("--N", required=True, help="chain lengths, e.g. 2..6")
    sp.add_argument("--ed-cap", type=int, default=4096, dest="ed_cap")
    sp.set_defaults(func=cmd_verify)

    sp = subs.add_parser("bridge", help="non-commuting to commuting bridge tools")
    sp.add_argument(
        "action", choices=["mps-parent", "solve-x", "commutify", "polar-normalize"]
    )
    sp.add_argument("--input", help="input JSON document ('-' for stdin)")
    sp.add_argument("--chi", type=int, default=2, help="bond dimension for mps-parent")
    sp.add_argument("--s-matrix", dest="s_matrix", help="JSON file with an S matrix")
    sp.add_argument("--tol", type=float, default=DEFAULT_TOL)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--json", help="output path (default stdout)")
    sp.set_defaults(func=cmd_bridge)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
