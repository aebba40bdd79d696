"""Command-line entry point.

Every subcommand reads JSON inputs, runs one library computation and prints a
JSON report (or writes it to ``--out``). Exit status is 0 on success, 2 when
an input violates a documented invariant and 1 on internal errors.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np

from . import __version__
from .entropy import araki_relative_entropy, entanglement_entropy, von_neumann_entropy
from .errors import ModulaireError, PreconditionError
from .factorlab import (
    TailRule,
    TensorChainState,
    chain_inner,
    classify_type,
    sector_overlap,
    trace_property_test,
)
from .io import (
    SchemaError,
    dumps_report,
    load_matrix,
    load_state,
    matrices_from_json,
    matrix_from_json,
    matrix_to_json,
    read_json,
)
from .linalg import Tolerances
from .modular import (
    conjugation_to_commutant,
    is_cyclic_separating,
    modular_data,
    modular_flow,
)
from .projlat import Projector, is_minimal, leq_positive, mvn_equivalent, preceq, spectral_pvm
from .staralg import analyze, commutant, full_matrix_algebra, generate_algebra
from .states import DensityMatrix, purity_class, schmidt

SIG = 12


def _r(x: float) -> float:
    x = float(x)
    if x == 0.0:
        return 0.0
    return float(f"{x:.{SIG}g}")


def _matrix(m) -> dict:
    doc = matrix_to_json(m)
    doc["data"] = [[_r(a), _r(b)] for a, b in doc["data"]]
    return doc


def _tol(args) -> Tolerances:
    overrides = {}
    if args.tol_eig is not None:
        overrides["eig"] = args.tol_eig
    if args.tol_rank is not None:
        overrides["rank"] = args.tol_rank
    if args.tol_cluster is not None:
        overrides["cluster"] = args.tol_cluster
    return Tolerances.from_env(**overrides)


def _generators(path) -> List[np.ndarray]:
    return matrices_from_json(read_json(path), str(path))


def _unit_state(path, tol: Tolerances):
    psi, dims = load_state(path)
    nrm = float(np.linalg.norm(psi))
    if abs(nrm - 1.0) > tol.eig * psi.size:
        raise PreconditionError(f"{path}: state norm = {nrm:.12g}, expected 1 ± {tol.eig * psi.size:g}", invariant="unit norm")
    return psi, dims


def cmd_commutant(args, tol):
    alg = generate_algebra(_generators(args.inp), tol)
    comm = commutant(alg, tol)
    return {"algebra_dim": alg.dim, "dim": comm.dim, "basis": [_matrix(b) for b in comm.basis]}


def cmd_analyze(args, tol):
    alg = generate_algebra(_generators(args.inp), tol)
    return analyze(alg, tol).summary()


def cmd_pvm(args, tol):
    pvm = spectral_pvm(load_matrix(args.inp), tol)
    return {
        "values": [_r(v) for v in pvm.values],
        "ranks": [p.rank for p in pvm.projectors],
        "projectors": [_matrix(p.matrix) for p in pvm.projectors],
    }


def cmd_equiv(args, tol):
    p = Projector.from_matrix(load_matrix(args.p), tol)
    q = Projector.from_matrix(load_matrix(args.q), tol)
    u = mvn_equivalent(p, q, tol)
    return {
        "rank_p": p.rank,
        "rank_q": q.rank,
        "equivalent": u is not None,
        "leq": leq_positive(p, q, tol),
        "preceq": preceq(p, q, tol),
        "partial_isometry": None if u is None else _matrix(u.matrix),
    }


def cmd_minimal(args, tol):
    p = Projector.from_matrix(load_matrix(args.p), tol)
    alg = generate_algebra(_generators(args.inp), tol) if args.inp else full_matrix_algebra(p.dim)
    return {"rank": p.rank, "algebra_dim": alg.dim, "minimal": is_minimal(p, alg, tol)}


def cmd_schmidt(args, tol):
    psi, dims = load_state(args.state)
    sd = schmidt(psi, dims, tol)
    return {
        "dims": list(dims),
        "coefficients": [_r(c) for c in sd.coefficients],
        "schmidt_rank": sd.schmidt_rank,
        "entangled": sd.schmidt_rank >= 2,
        "left": _matrix(sd.left_basis),
        "right": _matrix(sd.right_basis),
    }


def cmd_entropy(args, tol):
    if (args.state is None) == (args.density is None):
        raise SchemaError("entropy needs exactly one of --state or --density")
    if args.density is not None:
        rho = DensityMatrix.from_matrix(load_matrix(args.density), tol)
        rep = von_neumann_entropy(rho, tol)
        return {**rep.to_json(), "purity": purity_class(rho, tol).value}
    psi, dims = _unit_state(args.state, tol)
    rep = entanglement_entropy(psi, dims, tol)
    return rep.to_json()


def cmd_rel_entropy(args, tol):
    psi, dims = _unit_state(args.psi, tol)
    phi, dims_phi = _unit_state(args.phi, tol)
    if dims != dims_phi:
        raise SchemaError(f"states have different dims {dims} and {dims_phi}", invariant="dimension")
    return araki_relative_entropy(psi, phi, dims, tol, slot=args.slot).to_json()


def cmd_modular(args, tol):
    psi, dims = _unit_state(args.state, tol)
    cs = is_cyclic_separating(psi, dims, tol)
    if not cs:
        raise PreconditionError("state is not cyclic and separating", invariant="cyclic separating")
    md = modular_data(psi, dims, tol)
    n = md.n
    s_op, j_op, delta = md.tomita(), md.conjugation(), md.delta()
    eye = np.eye(n * n)
    return {
        "dims": list(dims),
        "schmidt_coefficients": [_r(c) for c in md.c],
        "delta_eigenvalues": [[i, j, _r(v)] for (i, j), v in sorted(md.delta_eigen.items())],
        "residuals": {
            "S_psi_minus_psi": _r(np.linalg.norm(s_op(psi) - psi)),
            "S_squared_minus_id": _r(np.linalg.norm(s_op.compose(s_op) - eye)),
            "delta_psi_minus_psi": _r(np.linalg.norm(delta @ psi - psi)),
            "J_squared_minus_id": _r(np.linalg.norm(j_op.compose(j_op) - eye)),
        },
        "rho1": _matrix(md.rho1.matrix),
        "rho2": _matrix(md.rho2.matrix),
    }


def cmd_flow(args, tol):
    psi, dims = _unit_state(args.state, tol)
    md = modular_data(psi, dims, tol)
    a = load_matrix(args.op)
    out = modular_flow(md, a, args.s)
    return {
        "s": args.s,
        "flowed": _matrix(out),
        "commutant_image": _matrix(conjugation_to_commutant(md, a, frame="computational")),
    }


def _config(path) -> Dict[str, Any]:
    doc = read_json(path)
    if not isinstance(doc, dict):
        raise SchemaError(f"{path}: config must be a JSON object")
    return doc


def cmd_factor_lab(args, tol):
    cfg = _config(args.config)
    tail = TailRule.from_json(cfg.get("tail", {}))
    truncation = int(args.truncation or cfg.get("truncation", 200))
    trials = int(cfg.get("trials", 200))
    seed = int(args.seed if args.seed is not None else cfg.get("seed", 0))
    window = int(cfg.get("window", 50))
    prefix = [matrix_from_json(m, f"prefix[{k}]") for k, m in enumerate(cfg.get("prefix", []))]
    state = TensorChainState(tuple(prefix), tail, truncation)
    trace = trace_property_test(state, trials, seed, tol)
    norm = chain_inner(state, state, window=window)
    report = {
        "truncation": truncation,
        "tail": tail.to_json(),
        **trace.to_json(),
        "norm": _r(norm.value.real),
        "norm_convergence": norm.convergence.value,
    }
    if tail.available() is None or tail.available() >= tail.first_regular_index - 1 + window:
        report["classification"] = classify_type(tail, window, tol).to_json()
    if "compare_tail" in cfg:
        other = TensorChainState(tuple(prefix), TailRule.from_json(cfg["compare_tail"]), truncation)
        ov = chain_inner(state, other, window=window)
        report["overlap"] = {
            "log_abs": _r(ov.log_abs) if math.isfinite(ov.log_abs) else "-inf",
            "convergence": ov.convergence.value,
        }
    return report


def _sector_sequence(doc: Dict[str, Any]):
    if "values" in doc:
        return [float(x) for x in doc["values"]]
    rule = doc.get("rule")
    if rule == "constant":
        v = float(doc["value"])
        return lambda k: np.full(k.shape, v)
    if rule == "cos":
        v = math.cos(math.radians(float(doc["theta_deg"])))
        return lambda k: np.full(k.shape, v)
    if rule == "one_minus_power":
        p = float(doc.get("power", 2.0))
        return lambda k: 1.0 - k ** (-p)
    raise SchemaError(f"unknown overlap rule {rule!r}")


def cmd_sector(args, tol):
    cfg = _config(args.config)
    truncation = int(args.truncation or cfg.get("truncation", 10_000))
    seq = _sector_sequence(cfg.get("c", {}))
    rep = sector_overlap(seq, truncation, tol, window=int(cfg.get("window", 50)))
    stride = int(cfg.get("stride", max(1, truncation // 100)))
    return {"truncation": truncation, **rep.to_json(stride=stride)}


COMMANDS = {
    "commutant": cmd_commutant,
    "analyze": cmd_analyze,
    "pvm": cmd_pvm,
    "equiv": cmd_equiv,
    "minimal": cmd_minimal,
    "schmidt": cmd_schmidt,
    "entropy": cmd_entropy,
    "rel-entropy": cmd_rel_entropy,
    "modular": cmd_modular,
    "flow": cmd_flow,
    "factor-lab": cmd_factor_lab,
    "sector": cmd_sector,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol-eig", type=float, default=None)
    common.add_argument("--tol-rank", type=float, default=None)
    common.add_argument("--tol-cluster", type=float, default=None)
    common.add_argument("--out", default=None, help="write the report here instead of stdout")

    parser = argparse.ArgumentParser(
        prog="modulaire",
        description="Finite-dimensional operator algebras, modular theory and tensor-chain experiments.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    for name, text in (
        ("commutant", "commutant of the algebra generated by the input matrices"),
        ("analyze", "dimension, commutant, center and double-commutant check"),
        ("pvm", "spectral projectors of a Hermitian matrix"),
    ):
        p = sub.add_parser(name, parents=[common], help=text)
        p.add_argument("--in", dest="inp", required=True)
    p = sub.add_parser("equiv", parents=[common], help="Murray-von Neumann equivalence and order of two projectors")
    p.add_argument("--p", required=True)
    p.add_argument("--q", required=True)
    p = sub.add_parser("minimal", parents=[common], help="test whether a projector is minimal in an algebra")
    p.add_argument("--p", required=True)
    p.add_argument("--in", dest="inp", default=None, help="algebra generators (default: full matrix algebra)")
    p = sub.add_parser("schmidt", parents=[common], help="Schmidt decomposition of a bipartite state")
    p.add_argument("--state", required=True)
    p = sub.add_parser("entropy", parents=[common], help="von Neumann or entanglement entropy")
    p.add_argument("--state", default=None)
    p.add_argument("--density", default=None)
    p = sub.add_parser("rel-entropy", parents=[common], help="Araki relative entropy through the relative modular operator")
    p.add_argument("--psi", required=True)
    p.add_argument("--phi", required=True)
    p.add_argument("--slot", type=int, default=1, choices=(1, 2))
    p = sub.add_parser("modular", parents=[common], help="Tomita operator, modular operator and conjugation of a state")
    p.add_argument("--state", required=True)
    p = sub.add_parser("flow", parents=[common], help="modular flow of a first-slot operator")
    p.add_argument("--state", required=True)
    p.add_argument("--op", required=True)
    p.add_argument("--s", type=float, required=True)
    for name, text in (
        ("factor-lab", "trace test, type heuristic and norms for a truncated tensor chain"),
        ("sector", "decide whether an infinite product of overlaps vanishes"),
    ):
        p = sub.add_parser(name, parents=[common], help=text)
        p.add_argument("--config", required=True)
        p.add_argument("--truncation", type=int, default=None)
        p.add_argument("--seed", type=int, default=None)
    return parser


def run(argv: Optional[List[str]] = None, stdout=None, stderr=None) -> int:
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    try:
        tol = _tol(args)
        body = COMMANDS[args.command](args, tol)
    except ModulaireError as exc:
        stderr.write(dumps_report({"error": str(exc), "invariant": exc.invariant, "exit": 2}))
        return 2
    except ValueError as exc:
        stderr.write(dumps_report({"error": str(exc), "invariant": "input value", "exit": 2}))
        return 2
    except Exception as exc:  # noqa: BLE001
        stderr.write(dumps_report({"error": f"{type(exc).__name__}: {exc}", "exit": 1}))
        return 1
    report = {**body, "command": args.command, "tolerances": tol.as_dict()}
    text = dumps_report(report)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        stdout.write(text)
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
