"""Command-line front end.

Subcommands: dist, table2, husimi-export, stellar, lyapunov, localization,
topology, stats.  Exit codes: 0 success, 2 validation error, 3 solver failure.
Numbers are printed with 12 significant digits; CSV cells use full
round-trip float formatting.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from .errors import MongesphereError, PathRefusal, SolverError, ValidationError
from .husimi import HusimiField, coherent_amplitudes, husimi, wehrl_entropy
from .monge_analytic import (build_w_polynomial, coherent_pair_distance,
                             coherent_to_star, eigenstate_gap, monge_bloch,
                             pole_distance, zero_state_to_star)
from .ot_numeric import monge_numeric
from .paths import monge_auto
from .qstate import (DensityMatrix, PureState, bures_distance, fubini_study,
                     hs_distance, jx_matrix, jy_matrix, jz_matrix,
                     maximally_mixed, named_pure_state, named_state,
                     trace_distance, unitary_from_hermitian,
                     _parse_half_integer)
from .sphere import build_grid, default_grid
from .stellar import simplified_monge, stellar_roots, random_pair_scaling, \
    random_state_distance_stats
from .topology import partition_census, stratum_table
from . import paths as _paths


def fmt(x: float) -> str:
    return f"{x:.12g}"


def _parse_grid(text: str):
    try:
        t, p = text.lower().split("x")
        return int(t), int(p)
    except ValueError as exc:
        raise ValidationError(f"grid must look like 64x128, got {text!r}") from exc


def _grid_from_args(args):
    if getattr(args, "grid", None):
        q, p = _parse_grid(args.grid)
        return build_grid("gauss-product", q, p)
    return default_grid()


def _two_j_from_args(args) -> int:
    if args.j is None:
        raise ValidationError("--j is required for this command")
    return _parse_half_integer(args.j)


def _emit(args, text: str) -> None:
    if getattr(args, "out", None):
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _pure_from_descriptor(descriptor: str, two_j: int) -> PureState:
    pure = named_pure_state(descriptor, two_j)
    if pure is not None:
        return pure
    rho = named_state(descriptor, two_j)
    if rho.is_pure():
        return rho.to_pure()
    raise ValidationError(
        f"metric requires a pure state but {descriptor!r} is mixed")


# ---------------------------------------------------------------------------
# dist

def cmd_dist(args) -> int:
    two_j = _two_j_from_args(args)
    metric = args.metric
    if metric in ("fs", "smonge"):
        p1 = _pure_from_descriptor(args.state1, two_j)
        p2 = _pure_from_descriptor(args.state2, two_j)
        value = fubini_study(p1, p2) if metric == "fs" \
            else simplified_monge(p1, p2, two_j)
        payload = {"metric": metric, "value": value}
    else:
        r1 = named_state(args.state1, two_j)
        r2 = named_state(args.state2, two_j)
        if metric == "trace":
            payload = {"metric": metric, "value": trace_distance(r1, r2)}
        elif metric == "hs":
            payload = {"metric": metric, "value": hs_distance(r1, r2)}
        elif metric == "bures":
            payload = {"metric": metric, "value": bures_distance(r1, r2)}
        elif metric == "monge":
            res = monge_auto(r1, r2, two_j, resolution=_resolution(args))
            payload = {"metric": metric, "value": res.value, "path": res.path}
            if res.refusals:
                payload["refused"] = list(res.refusals)
            if res.bracket is not None:
                payload["bracket"] = res.bracket.to_json_dict()
        elif metric == "monge-numeric":
            bracket = monge_numeric(r1, r2, two_j, _resolution(args))
            payload = {"metric": metric, "value": bracket.estimate,
                       "bracket": bracket.to_json_dict()}
        else:
            raise ValidationError(f"unknown metric {metric!r}")
    if args.format == "json":
        _emit(args, json.dumps(payload) + "\n")
    else:
        line = fmt(payload["value"])
        if "path" in payload:
            line += f"  path={payload['path']}"
        if "bracket" in payload:
            b = payload["bracket"]
            line += f"  bracket=[{fmt(b['lower'])}, {fmt(b['upper'])}]"
        _emit(args, line + "\n")
    return 0


def _resolution(args):
    if getattr(args, "grid", None):
        return _parse_grid(args.grid)
    return None


# ---------------------------------------------------------------------------
# table2

def _table2_rows(two_j: int, a: float, xi: float):
    n = two_j + 1
    rows = []

    def std_triple(r1, r2):
        return (trace_distance(r1, r2), hs_distance(r1, r2),
                bures_distance(r1, r2))

    plus = named_state("plus", two_j)
    minus = named_state("minus", two_j)
    star = named_state("star", two_j)
    mix = named_state(f"mix:{a}", two_j)
    coh = named_state(f"coh:{xi},0", two_j)

    rows.append(("(plus,minus)", *std_triple(plus, minus), pole_distance(two_j),
                 "pi - 2 sqrt(pi/N)"))
    rows.append(("(plus,star)", *std_triple(plus, star), coherent_to_star(two_j),
                 "pi/2 - sqrt(pi/N)"))
    if two_j % 2 == 0:
        zero = named_state("jm:0", two_j)
        rows.append(("(jm:0,star)", *std_triple(zero, star),
                     zero_state_to_star(two_j // 2), "pi/2 - 1"))
    for two_m in range(two_j, -two_j + 1, -2):
        s1 = named_state(f"jm:{two_m}/2", two_j)
        s2 = named_state(f"jm:{two_m - 2}/2", two_j)
        rows.append((f"(jm:{two_m}/2,jm:{(two_m - 2)}/2)", *std_triple(s1, s2),
                     eigenstate_gap(two_j, two_m), "1/sqrt(n(N-n))"))
    rows.append((f"(plus,mix:{a})", *std_triple(plus, mix),
                 (1.0 - a) * pole_distance(two_j), "(1-a)(pi - 2 sqrt(pi/N))"))
    rows.append((f"(minus,mix:{a})", *std_triple(minus, mix),
                 a * pole_distance(two_j), "a (pi - 2 sqrt(pi/N))"))
    rows.append((f"(plus,coh:{xi})", *std_triple(plus, coh),
                 coherent_pair_distance(two_j, xi), "-> Xi"))
    rows.append((f"(minus,coh:{xi})", *std_triple(minus, coh),
                 coherent_pair_distance(two_j, math.pi - xi), "-> pi - Xi"))
    return rows


def cmd_table2(args) -> int:
    two_j = _two_j_from_args(args)
    rows = _table2_rows(two_j, args.a, args.xi)
    header = ("states", "trace", "hs", "bures", "monge", "asymptotic")
    if args.format == "json":
        payload = [dict(zip(header, (r[0], *map(float, r[1:5]), r[5])))
                   for r in rows]
        _emit(args, json.dumps(payload) + "\n")
    elif args.format == "csv":
        lines = [",".join(header)]
        for r in rows:
            lines.append(",".join([r[0], *(repr(float(x)) for x in r[1:5]),
                                   f'"{r[5]}"']))
        _emit(args, "\n".join(lines) + "\n")
    else:
        widths = [30, 16, 16, 16, 16]
        lines = ["".join(h.ljust(w) for h, w in zip(header[:5], widths)) + header[5]]
        for r in rows:
            cells = [r[0].ljust(widths[0])]
            cells += [fmt(float(x)).ljust(w) for x, w in zip(r[1:5], widths[1:])]
            lines.append("".join(cells) + r[5])
        _emit(args, "\n".join(lines) + "\n")
    return 0


# ---------------------------------------------------------------------------
# husimi-export / stellar

def cmd_husimi_export(args) -> int:
    two_j = _two_j_from_args(args)
    rho = named_state(args.state, two_j)
    grid = _grid_from_args(args)
    field = husimi(rho, two_j, validate=False)
    vals = field.on_grid(grid)
    lines = ["theta,phi,H"]
    for t, p, h in zip(grid.theta, grid.phi, vals):
        lines.append(f"{float(t)!r},{float(p)!r},{float(h)!r}")
    _emit(args, "\n".join(lines) + "\n")
    return 0


def cmd_stellar(args) -> int:
    two_j = _two_j_from_args(args)
    psi = _pure_from_descriptor(args.state, two_j)
    roots = stellar_roots(psi, two_j)
    payload = [{"theta": float(t), "phi": float(p)}
               for t, p in zip(roots.theta, roots.phi)]
    _emit(args, json.dumps(payload) + "\n")
    return 0


# ---------------------------------------------------------------------------
# lyapunov

def _kicked_map(two_j: int, kick: float, rotation: float) -> np.ndarray:
    """One period: torsion exp(-i k Jz^2 / 2j) after rotation exp(-i p Jy)."""
    jz2 = jz_matrix(two_j) @ jz_matrix(two_j)
    torsion = unitary_from_hermitian(-(kick / two_j) * jz2)
    rot = unitary_from_hermitian(-rotation * jy_matrix(two_j))
    return torsion @ rot


def cmd_lyapunov(args) -> int:
    two_j = _two_j_from_args(args)
    if args.steps < 1:
        raise ValidationError("steps must be >= 1")
    if args.xi0 < 0 or args.xi0 > math.pi:
        raise ValidationError("initial separation must lie in [0, pi]")
    u = _kicked_map(two_j, args.kick, args.rotation)
    theta0 = 0.5 * math.pi
    psi1 = coherent_amplitudes(two_j, theta0 - 0.5 * args.xi0, 0.0)
    psi2 = coherent_amplitudes(two_j, theta0 + 0.5 * args.xi0, 0.0)
    a1, a2 = psi1.amplitudes.copy(), psi2.amplitudes.copy()
    use_numeric = args.metric == "monge-numeric"
    lines = ["t,D,lambda"]
    for t in range(args.steps + 1):
        s1, s2 = PureState(a1), PureState(a2)
        if use_numeric:
            d = monge_numeric(s1.to_density(), s2.to_density(), two_j,
                              _resolution(args)).estimate
        else:
            d = simplified_monge(s1, s2, two_j)
        if t == 0:
            d0 = d
            lam = 0.0
        else:
            lam = (math.log(d / d0) / t) if d > 0 and d0 > 0 else float("-inf")
        lines.append(f"{t},{float(d)!r},{float(lam)!r}")
        a1 = u @ a1
        a2 = u @ a2
    _emit(args, "\n".join(lines) + "\n")
    return 0


# ---------------------------------------------------------------------------
# localization

def _operator_from_spec(spec: str, two_j: int) -> np.ndarray:
    if spec == "jz":
        return jz_matrix(two_j)
    if spec == "jx":
        return jx_matrix(two_j)
    if spec == "jy":
        return jy_matrix(two_j)
    if spec.startswith("floquet:"):
        try:
            k, p = (float(x) for x in spec[8:].split(","))
        except ValueError as exc:
            raise ValidationError(f"bad floquet parameters in {spec!r}") from exc
        return _kicked_map(two_j, k, p)
    if spec.startswith("json:"):
        try:
            with open(spec[5:], "r", encoding="utf-8") as fh:
                obj = json.load(fh)
            return np.asarray(obj["re"], dtype=float) + \
                1j * np.asarray(obj["im"], dtype=float)
        except (OSError, KeyError, ValueError) as exc:
            raise ValidationError(f"cannot load operator {spec!r}: {exc}") from exc
    raise ValidationError(f"unknown operator spec {spec!r}")


def cmd_localization(args) -> int:
    two_j = _two_j_from_args(args)
    n = two_j + 1
    op = _operator_from_spec(args.operator, two_j)
    if op.shape != (n, n):
        raise ValidationError(f"operator shape {op.shape} does not match N={n}")
    comm = np.linalg.norm(op @ op.conj().T - op.conj().T @ op)
    if comm > 1e-10 * max(1.0, np.linalg.norm(op) ** 2):
        raise ValidationError("operator is not normal; no orthogonal eigenbasis")
    hermitian = np.linalg.norm(op - op.conj().T) <= 1e-10 * max(1.0, np.linalg.norm(op))
    if hermitian:
        evals, vecs = np.linalg.eigh(op)
        gaps = np.diff(np.sort(evals.real))
        degenerate = bool(gaps.size and gaps.min() < 1e-10)
    else:
        evals, vecs = np.linalg.eig(op)
        order = np.argsort(np.angle(evals))
        evals, vecs = evals[order], vecs[:, order]
        gaps = np.abs(np.diff(np.sort(np.angle(evals))))
        degenerate = bool(gaps.size and gaps.min() < 1e-10)
    star = maximally_mixed(n)
    dists = []
    pths = []
    for i in range(n):
        v = vecs[:, i] / np.linalg.norm(vecs[:, i])
        res = monge_auto(PureState(v).to_density(), star, two_j,
                         resolution=_resolution(args))
        dists.append(res.value)
        pths.append(res.path)
    gamma = float(np.mean(dists))
    if args.format == "json":
        payload = {"gamma": gamma, "distances": dists, "paths": pths,
                   "degenerate_operator": degenerate}
        _emit(args, json.dumps(payload) + "\n")
    else:
        lines = []
        if degenerate:
            lines.append("# degenerate operator: eigenbasis not unique, "
                         "using the computed (canonical) basis")
        for i, (d, p) in enumerate(zip(dists, pths)):
            lines.append(f"eigenvector {i}: {fmt(d)}  path={p}")
        lines.append(f"gamma = {fmt(gamma)}")
        _emit(args, "\n".join(lines) + "\n")
    return 0


# ---------------------------------------------------------------------------
# topology / stats

def cmd_topology(args) -> int:
    n = args.n
    if n is None or n < 1:
        raise ValidationError("--n (dimension) must be a positive integer")
    census = partition_census(n)
    rows = stratum_table(n)
    if args.format == "json":
        payload = {"census": census,
                   "strata": [{"partition": list(r["partition"]),
                               "D": r["D"], "D1": r["D1"], "D2": r["D2"]}
                              for r in rows]}
        _emit(args, json.dumps(payload) + "\n")
    else:
        lines = [f"N = {n}: P(N) = {census['partitions']} spectral types, "
                 f"{census['total_parts']} ordered parts"]
        lines.append("partition".ljust(24) + "D".rjust(6) + "D1".rjust(6) + "D2".rjust(6))
        for r in rows:
            label = "(" + ",".join(map(str, r["partition"])) + ")"
            lines.append(label.ljust(24) + str(r["D"]).rjust(6)
                         + str(r["D1"]).rjust(6) + str(r["D2"]).rjust(6))
        _emit(args, "\n".join(lines) + "\n")
    return 0


def cmd_stats(args) -> int:
    two_j = _two_j_from_args(args)
    if args.mode == "reference":
        ref = _pure_from_descriptor(args.reference, two_j)
        mean, err = random_state_distance_stats(two_j, ref, args.samples, args.seed)
        lines = ["N,mean,stderr", f"{two_j + 1},{mean!r},{err!r}"]
        _emit(args, "\n".join(lines) + "\n")
        return 0
    if args.mode == "pairs":
        if not args.j_list:
            raise ValidationError("--j-list required for pairs mode")
        two_js = [_parse_half_integer(x) for x in args.j_list.split(",")]
        rows, slope = random_pair_scaling(two_js, args.samples, args.seed)
        lines = ["N,mean,stderr"]
        for n, mean, err in rows:
            lines.append(f"{n},{mean!r},{err!r}")
        lines.append(f"# slope = {slope!r}")
        _emit(args, "\n".join(lines) + "\n")
        return 0
    raise ValidationError(f"unknown stats mode {args.mode!r}")


# ---------------------------------------------------------------------------
# parser

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mongesphere",
        description="Distances between finite-dimensional quantum states: "
                    "standard metrics and sphere transport distances.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_j=True):
        p.add_argument("--j", help="spin quantum number (half-integers as p/2 or decimals)")
        p.add_argument("--grid", help="gauss-product grid as THETAxPHI, e.g. 64x128")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--format", choices=("text", "csv", "json"), default="text")
        p.add_argument("--out", help="write output to this path instead of stdout")
        p.add_argument("--threads", type=int, default=1,
                       help="cap on worker threads for numeric kernels")

    p = sub.add_parser("dist", help="distance between two states")
    common(p)
    p.add_argument("--metric", required=True,
                   choices=("trace", "hs", "bures", "fs", "monge",
                            "monge-numeric", "smonge"))
    p.add_argument("state1")
    p.add_argument("state2")
    p.set_defaults(func=cmd_dist)

    p = sub.add_parser("table2", help="distance table for the canonical state pairs")
    common(p)
    p.add_argument("--a", type=float, default=0.25, help="pole mixture weight")
    p.add_argument("--xi", type=float, default=0.5 * math.pi,
                   help="coherent-pair angle")
    p.set_defaults(func=cmd_table2)

    p = sub.add_parser("husimi-export", help="sample a Husimi density onto a grid (CSV)")
    common(p)
    p.add_argument("state")
    p.set_defaults(func=cmd_husimi_export)

    p = sub.add_parser("stellar", help="Husimi zeros of a pure state (JSON)")
    common(p)
    p.add_argument("state")
    p.set_defaults(func=cmd_stellar)

    p = sub.add_parser("lyapunov", help="divergence of two coherent states under a kicked map")
    common(p)
    p.add_argument("--kick", type=float, default=6.0, help="torsion strength k")
    p.add_argument("--rotation", type=float, default=1.7, help="rotation angle p")
    p.add_argument("--xi0", type=float, default=0.1, help="initial separation")
    p.add_argument("--steps", type=int, default=20)
    p.add_argument("--metric", choices=("smonge", "monge-numeric"), default="smonge")
    p.set_defaults(func=cmd_lyapunov)

    p = sub.add_parser("localization", help="mean distance of an eigenbasis from the maximally mixed state")
    common(p)
    p.add_argument("--operator", required=True,
                   help="jz | jx | jy | floquet:k,p | json:<path>")
    p.set_defaults(func=cmd_localization)

    p = sub.add_parser("topology", help="spectral degeneracy strata for dimension N")
    common(p, needs_j=False)
    p.add_argument("--n", type=int, help="Hilbert-space dimension")
    p.add_argument("--eps", type=float, default=1e-8)
    p.set_defaults(func=cmd_topology)

    p = sub.add_parser("stats", help="random-state distance statistics")
    common(p)
    p.add_argument("--mode", choices=("reference", "pairs"), default="reference")
    p.add_argument("--reference", default="coh:0,0")
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--j-list", dest="j_list",
                   help="comma-separated j values for pairs mode")
    p.set_defaults(func=cmd_stats)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "threads", 1) and args.threads > 1:
        try:
            import numba
            numba.set_num_threads(min(args.threads, numba.config.NUMBA_NUM_THREADS))
        except (ImportError, ValueError):
            pass
    try:
        return args.func(args)
    except (ValidationError, PathRefusal) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SolverError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
