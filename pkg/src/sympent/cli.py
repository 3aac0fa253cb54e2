"""Command-line interface.

Exit codes: 0 success, 2 input error, 3 mathematical inconsistency.
"""
from __future__ import annotations

import argparse
import ast
import csv
import io
import json
import logging
import os
import re
import sys
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .entanglement import analyze
from .flows import ADMISSIBLE_TOL, null_perturbed_flow, spectra_drift
from .localalg import LocalHamiltonian
from .numkit import DEFAULT_RANK_TOL
from .orbitgeom import InconsistencyError
from .spectramap import DEFAULT_GROUP_TOL, polytope_rows, sample_polytope
from .statexpr import StateExprError, evaluate, parse
from .states import random_state

log = logging.getLogger("sympent")

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_INCONSISTENT = 3
SEED_ENV = "SYMPENT_SEED"


class InputError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    state: str | None = None
    rank_tol: float = DEFAULT_RANK_TOL
    group_tol: float = DEFAULT_GROUP_TOL
    adm_tol: float = ADMISSIBLE_TOL
    seed: int = 0
    out: str | None = None
    fmt: str = "json"
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        for name in ("rank_tol", "group_tol", "adm_tol"):
            if not getattr(self, name) > 0:
                raise InputError(f"{name.replace('_', '-')} must be positive")
        if not 0 <= self.seed < 2**64:
            raise InputError("seed must be a 64-bit unsigned integer")
        if self.fmt not in ("json", "csv"):
            raise InputError(f"unknown format {self.fmt!r}")


# -- Hamiltonian specs -------------------------------------------------------

_PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}
_PAULI_TERM = re.compile(r"\s*([+-])?\s*(\d+\.?\d*(?:[eE][+-]?\d+)?|\.\d+)?\s*\*?\s*([IXYZ])\s*")


def _split_top(text: str) -> list[str]:
    parts, depth, cur = [], 0, []
    for ch in text:
        if ch == "[":
            depth += 1
        elif ch == "]":
            depth -= 1
        if ch == "," and depth == 0:
            parts.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    parts.append("".join(cur))
    return [p.strip() for p in parts]


def _pauli_factor(text: str) -> np.ndarray:
    if re.fullmatch(r"0+(\.0*)?", text):
        return np.zeros((2, 2), dtype=complex)
    pos, out = 0, np.zeros((2, 2), dtype=complex)
    while pos < len(text):
        m = _PAULI_TERM.match(text, pos)
        if m is None or m.end() == pos:
            raise InputError(f"cannot read Pauli factor {text!r}")
        sign = -1.0 if m.group(1) == "-" else 1.0
        coef = float(m.group(2)) if m.group(2) else 1.0
        out += sign * coef * _PAULI[m.group(3)]
        pos = m.end()
    return out


def _matrix_factor(text: str) -> np.ndarray:
    py = re.sub(r"(?<=[\d.])i\b", "j", text)
    try:
        M = np.array(ast.literal_eval(py), dtype=complex)
    except (ValueError, SyntaxError, TypeError) as exc:
        raise InputError(f"cannot read matrix literal {text!r}: {exc}") from None
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise InputError(f"matrix literal {text!r} is not square")
    return M


def parse_hamiltonian(text: str, dims) -> LocalHamiltonian:
    """Read ``"Z,Z,Z"`` / ``"X+0.5*Z, 0, [[1,0],[0,-1]]"`` as a local Hamiltonian.

    One comma-separated entry per subsystem: a Pauli sum (qubits only), ``0``,
    or a nested-list matrix literal.  Trace parts are dropped.
    """
    parts = _split_top(text)
    if len(parts) != len(dims):
        raise InputError(f"Hamiltonian has {len(parts)} factors, state has {len(dims)}")
    factors = []
    for k, (p, d) in enumerate(zip(parts, dims)):
        M = _matrix_factor(p) if p.startswith("[") else _pauli_factor(p)
        if M.shape != (d, d):
            raise InputError(f"factor {k + 1} has shape {M.shape}, subsystem dimension is {d}")
        if np.max(np.abs(M - M.conj().T)) > 1e-12 * max(1.0, np.max(np.abs(M))):
            raise InputError(f"factor {k + 1} is not Hermitian")
        factors.append(M)
    return LocalHamiltonian.projected(factors)


# -- output helpers ----------------------------------------------------------

def _emit(text: str, out: str | None) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow(r)
    return buf.getvalue()


def _cell(v):
    if isinstance(v, (list, tuple)):
        return ";".join(str(x) for x in v)
    if isinstance(v, float):
        return repr(v)
    return v


# -- commands ----------------------------------------------------------------

def report_dict(text: str, state, report) -> dict:
    d = {
        "state": text,
        "dims": list(state.dims),
        "e_theorem": report.e_theorem,
        "e_gram": report.e_gram,
        "e_direct": report.e_direct,
    }
    if report.e_bipartite is not None:
        d["e_bipartite"] = report.e_bipartite
        d["schmidt"] = list(report.schmidt_coefficients)
        d["multiplicities"] = list(report.schmidt_multiplicities)
    d.update(
        dim_orbit=report.orbit_dims.dim_orbit,
        dim_adjoint_orbit=report.orbit_dims.dim_adjoint_orbit,
        gram_rank=report.gram_rank,
        separable=report.separable,
        rank_stable=report.rank_stable,
        warnings=list(report.warnings),
    )
    return d


def cmd_analyze(cfg: RunConfig) -> int:
    if not cfg.state:
        raise InputError("analyze needs --state")
    state = evaluate(parse(cfg.state))
    report = analyze(state, cfg.rank_tol, cfg.group_tol)
    d = report_dict(cfg.state, state, report)
    if cfg.fmt == "json":
        _emit(json.dumps(d, indent=2) + "\n", cfg.out)
    else:
        _emit(_csv_text(list(d), [[_cell(v) for v in d.values()]]), cfg.out)
    return EXIT_OK


def parse_cases(text: str) -> list[tuple[int, int, int]]:
    cases = []
    for item in text.split(","):
        m = re.fullmatch(r"\s*(\d+)x(\d+):(\d+)\s*", item)
        if m is None:
            raise InputError(f"bad case {item!r}; expected LxD:COUNT such as 3x2:100")
        L, d, n = (int(g) for g in m.groups())
        if L < 1 or d < 2 or n < 1:
            raise InputError(f"bad case {item!r}: need L >= 1, d >= 2, count >= 1")
        cases.append((L, d, n))
    return cases


def run_verify(cases, seed: int, rank_tol: float, group_tol: float) -> dict:
    rows = []
    for L, d, count in cases:
        rng = np.random.default_rng([seed, L, d])
        agree = bip_agree = unstable = stable_bad = 0
        e_counts: Counter = Counter()
        for _ in range(count):
            state = random_state((d,) * L, rng)
            try:
                rep = analyze(state, rank_tol, group_tol)
            except InconsistencyError:
                stable_bad += 1
                continue
            e_counts[rep.e_theorem] += 1
            if not rep.rank_stable:
                unstable += 1
            ok = rep.e_theorem == rep.e_gram == rep.e_direct
            agree += ok
            if rep.e_bipartite is not None:
                bip_agree += rep.e_bipartite == rep.e_theorem
            if not rep.routes_agree and rep.rank_stable:
                stable_bad += 1
        row = {"L": L, "d": d, "samples": count, "agreements": agree}
        if L == 2:
            row["bipartite_agreements"] = bip_agree
        row.update(rank_unstable=unstable, stable_disagreements=stable_bad,
                   e_counts={str(k): v for k, v in sorted(e_counts.items())})
        rows.append(row)
    return {"seed": seed, "cases": rows,
            "all_agree": all(r["stable_disagreements"] == 0 for r in rows)}


def cmd_verify(cfg: RunConfig) -> int:
    cases = parse_cases(cfg.extra["cases"])
    summary = run_verify(cases, cfg.seed, cfg.rank_tol, cfg.group_tol)
    if cfg.fmt == "json":
        _emit(json.dumps(summary, indent=2) + "\n", cfg.out)
    else:
        header = ["L", "d", "samples", "agreements", "bipartite_agreements",
                  "rank_unstable", "stable_disagreements", "e_counts"]
        rows = [[r.get(h, "") if h != "e_counts" else
                 ";".join(f"{k}:{v}" for k, v in r["e_counts"].items()) for h in header]
                for r in summary["cases"]]
        _emit(_csv_text(header, rows), cfg.out)
    return EXIT_OK if summary["all_agree"] else EXIT_INCONSISTENT


def cmd_flow(cfg: RunConfig) -> int:
    x = cfg.extra
    if not cfg.state or not x.get("ham"):
        raise InputError("flow needs --state and --ham")
    if cfg.fmt != "csv" and x.get("fmt_given"):
        raise InputError("flow writes CSV only")
    if x["eps"] < 0 or x["T"] <= 0 or x["n"] < 1:
        raise InputError("need eps >= 0, T > 0 and n >= 1")
    state = evaluate(parse(cfg.state))
    H = parse_hamiltonian(x["ham"], state.dims)
    perturbed, reference = null_perturbed_flow(state, H, x["eps"], x["T"], x["n"], cfg.rank_tol)
    prefix = cfg.out or "flow"
    ref_path, pert_path = f"{prefix}_reference.csv", f"{prefix}_perturbed.csv"
    Path(ref_path).write_text(reference.to_csv())
    Path(pert_path).write_text(perturbed.to_csv())
    ranks = perturbed.null_ranks
    summary = {
        "reference": ref_path,
        "perturbed": pert_path,
        "max_spectra_drift": spectra_drift(perturbed, reference),
        "final_fidelity": float(perturbed.fidelity[-1]),
        "min_fidelity": float(np.min(perturbed.fidelity)),
        "null_ranks": sorted(set(ranks)),
        "null_rank_changes": sum(a != b for a, b in zip(ranks, ranks[1:])),
    }
    sys.stdout.write(json.dumps(summary, indent=2) + "\n")
    return EXIT_OK


def cmd_polytope(cfg: RunConfig) -> int:
    x = cfg.extra
    if x["L"] < 1 or x["d"] < 2 or x["N"] < 1:
        raise InputError("need L >= 1, d >= 2 and N >= 1")
    points = sample_polytope(x["L"], x["d"], x["N"], cfg.seed)
    header, rows = polytope_rows(points)
    if cfg.fmt == "json" and x.get("fmt_given"):
        recs = [{"sample": r[0], "k": r[1], "lambda": r[2:]} for r in rows]
        _emit(json.dumps(recs) + "\n", cfg.out)
    else:
        _emit(_csv_text(header, [[_cell(v) for v in r] for r in rows]), cfg.out)
    return EXIT_OK


COMMANDS = {"analyze": cmd_analyze, "verify": cmd_verify, "flow": cmd_flow, "polytope": cmd_polytope}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None,
                        help=f"PRNG seed (falls back to ${SEED_ENV}, then 0)")
    common.add_argument("--rank-tol", type=float, default=DEFAULT_RANK_TOL,
                        help="relative singular-value cut for numerical ranks")
    common.add_argument("--group-tol", type=float, default=DEFAULT_GROUP_TOL,
                        help="relative gap for grouping equal eigenvalues")
    common.add_argument("--out", default=None, help="output path (flow: file prefix)")
    common.add_argument("--format", dest="fmt", choices=("json", "csv"), default=None)

    p = argparse.ArgumentParser(prog="sympent", description="Symplectic entanglement indicator E")
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", parents=[common], help="compute E by every route for one state")
    a.add_argument("--state", required=True, help="state expression, e.g. 'ghz(3,2)'")

    v = sub.add_parser("verify", parents=[common], help="check route agreement on random states")
    v.add_argument("--cases", default="2x2:100,2x3:100,3x2:100,4x2:100",
                   help="comma-separated LxD:COUNT entries")

    f = sub.add_parser("flow", parents=[common], help="reference vs null-perturbed trajectories")
    f.add_argument("--state", required=True)
    f.add_argument("--ham", required=True, help="local Hamiltonian, e.g. 'Z,Z,Z'")
    f.add_argument("--eps", type=float, default=0.1)
    f.add_argument("--T", type=float, default=10.0)
    f.add_argument("--n", type=int, default=1000)

    q = sub.add_parser("polytope", parents=[common], help="sample the Kirwan polytope")
    q.add_argument("--L", type=int, required=True)
    q.add_argument("--d", type=int, default=2)
    q.add_argument("--N", type=int, default=1000)
    return p


def _resolve_seed(seed: int | None) -> int:
    if seed is not None:
        return seed
    env = os.environ.get(SEED_ENV)
    if env:
        try:
            return int(env)
        except ValueError:
            raise InputError(f"${SEED_ENV} is not an integer: {env!r}") from None
    return 0


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    default_fmt = "csv" if ns.command in ("flow", "polytope") else "json"
    extra = {k: v for k, v in vars(ns).items()
             if k not in ("command", "state", "seed", "rank_tol", "group_tol", "out", "fmt")}
    extra["fmt_given"] = ns.fmt is not None
    return RunConfig(
        command=ns.command,
        state=getattr(ns, "state", None),
        rank_tol=ns.rank_tol,
        group_tol=ns.group_tol,
        seed=_resolve_seed(ns.seed),
        out=ns.out,
        fmt=ns.fmt or default_fmt,
        extra=extra,
    )


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    ns = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(ns)
        return COMMANDS[cfg.command](cfg)
    except (StateExprError, InputError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except InconsistencyError as exc:
        print(f"inconsistency: {exc}", file=sys.stderr)
        if exc.diagnostics:
            print(json.dumps(exc.diagnostics, default=str, indent=2), file=sys.stderr)
        return EXIT_INCONSISTENT


if __name__ == "__main__":
    sys.exit(main())
