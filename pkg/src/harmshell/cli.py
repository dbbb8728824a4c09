"""Command-line front end: basis checks, expansions, field evaluation, sweeps.

Subcommands
-----------
basis    orthonormality report for the harmonic basis
expand   project boundary data, write the coefficient table
eval     potential and gradient of either shell problem at given points
sweep    sup |grad u| across shrinking shell widths, with a power-law fit
verify   finite-difference oracle suite against the closed forms
taylor   first-order Taylor residuals of the radial gaps

Every numeric cell in a CSV is printed with %.17g, so identical inputs
produce byte-identical files.  Commands emit machine-parsable lines
``GATE <name> PASS|FAIL <value> <tol>`` for their internal tolerance
checks; the exit status is 0 when all gates pass, 1 on a module error and
2 on a usage error or a failed gate.

A config file (``key = value`` per line, ``#`` comments, keys matching the
long option names) supplies defaults; explicit flags override it.
"""

from __future__ import annotations

import argparse
import csv
import math
import os
import re
import sys
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import boundary_data as bd
from . import exact_solutions as ex
from . import experiments as xp
from . import oracle as oc
from . import sphere_basis as sb

FLOAT_FMT = "%.17g"

_RADIAL_NS = (40, 80, 160, 320)


class UsageError(Exception):
    """Bad flag value, config key, or boundary-data spec."""


# ---------------------------------------------------------------------------
# small helpers
# ---------------------------------------------------------------------------


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        if math.isnan(value):
            return ""
        return FLOAT_FMT % value
    return str(value)


def _write_csv(path: str, header: Sequence[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


@dataclass
class _Gate:
    name: str
    value: float
    tol: float
    ok: bool


def _emit_gates(gates: list[_Gate]) -> int:
    for g in gates:
        status = "PASS" if g.ok else "FAIL"
        print(f"GATE {g.name} {status} {g.value:.6g} {g.tol:.6g}")
    return 0 if all(g.ok for g in gates) else 2


_TERM_RE = re.compile(
    r"^([+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)\*x(\d+)\^(\d+)$"
)


def parse_phi(text: str, d: int) -> bd.BoundaryFunction:
    """Parse the boundary-data mini-grammar.

    constant:<c> | coord:<i> | poly:<c>*x<i>^<p>[+...] | expcoord:<i> |
    gauss:<i>,<w>
    """
    kind, sep, body = text.partition(":")
    if not sep or not body:
        raise UsageError(f"malformed boundary data spec {text!r}")
    try:
        if kind == "constant":
            return bd.constant(float(body))
        if kind == "coord":
            i = int(body)
            _check_coord(i, d, text)
            return bd.coordinate(i)
        if kind == "expcoord":
            i = int(body)
            _check_coord(i, d, text)
            return bd.exp_coordinate(i)
        if kind == "gauss":
            parts = body.split(",")
            if len(parts) != 2:
                raise UsageError(f"gauss spec needs <i>,<w>: {text!r}")
            i = int(parts[0])
            _check_coord(i, d, text)
            w = float(parts[1])
            if w <= 0.0:
                raise UsageError(f"gauss width must be > 0 in {text!r}")
            return bd.gaussian_bump(np.eye(d)[i - 1], w)
        if kind == "poly":
            terms = []
            for raw in re.split(r"(?<![eE])\+", body):
                m = _TERM_RE.match(raw)
                if m is None:
                    raise UsageError(f"malformed polynomial term {raw!r} in {text!r}")
                coeff = float(m.group(1))
                i = int(m.group(2))
                _check_coord(i, d, text)
                p = int(m.group(3))
                expo = [0] * i
                expo[i - 1] = p
                terms.append((coeff, tuple(expo)))
            return bd.polynomial(terms)
    except UsageError:
        raise
    except ValueError as exc:
        raise UsageError(f"malformed boundary data spec {text!r}: {exc}") from exc
    raise UsageError(f"unknown boundary data kind {kind!r} in {text!r}")


def _check_coord(i: int, d: int, text: str) -> None:
    if not 1 <= i <= d:
        raise UsageError(f"coordinate index {i} out of range 1..{d} in {text!r}")


def _eps_list(text: str) -> list[float]:
    try:
        values = [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError as exc:
        raise UsageError(f"malformed eps list {text!r}") from exc
    if not values:
        raise UsageError(f"empty eps list {text!r}")
    return values


def _int_list(text: str) -> list[int]:
    try:
        return [int(tok) for tok in text.split(",") if tok.strip()]
    except ValueError as exc:
        raise UsageError(f"malformed integer list {text!r}") from exc


# ---------------------------------------------------------------------------
# argument parsing and config files
# ---------------------------------------------------------------------------


def _positive_int(text: str) -> int:
    val = int(text)
    if val < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {text}")
    return val


def _positive_float(text: str) -> float:
    val = float(text)
    if not val > 0.0:
        raise argparse.ArgumentTypeError(f"must be > 0, got {text}")
    return val


def _existing_file(text: str) -> str:
    if not os.path.isfile(text):
        raise argparse.ArgumentTypeError(f"file not found: {text}")
    return text


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="harmshell",
        description="Shell potentials for insulated and superconducting inclusions.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", type=_existing_file, default=None,
                       help="key = value defaults; flags override")

    p = sub.add_parser("basis", help="orthonormality report")
    common(p)
    p.add_argument("--dim", type=_positive_int, required=True)
    p.add_argument("--m", type=int, default=8, help="max harmonic degree")
    p.add_argument("--out", required=True, help="per-degree residual CSV")

    p = sub.add_parser("expand", help="project boundary data onto harmonics")
    common(p)
    p.add_argument("--dim", type=_positive_int, required=True)
    p.add_argument("--m", type=int, default=12)
    p.add_argument("--phi", required=True, help="boundary data spec")
    p.add_argument("--out", required=True, help="coefficient CSV")

    p = sub.add_parser("eval", help="potential and gradient at given points")
    common(p)
    p.add_argument("--problem", choices=("insulated", "perfect"), required=True)
    p.add_argument("--dim", type=_positive_int, required=True)
    p.add_argument("--r0", type=_positive_float, default=1.0)
    p.add_argument("--eps", type=_positive_float, required=True)
    p.add_argument("--m", type=int, default=12)
    p.add_argument("--phi", default=None, help="boundary data spec")
    p.add_argument("--coeffs", type=_existing_file, default=None,
                   help="coefficient CSV instead of --phi")
    p.add_argument("--points", type=_existing_file, required=True,
                   help="CSV of ambient points, header x1..xd")
    p.add_argument("--out", required=True)

    p = sub.add_parser("sweep", help="sup |grad u| across shell widths")
    common(p)
    p.add_argument("--problem", choices=("insulated", "perfect"), required=True)
    p.add_argument("--dim", type=_positive_int, required=True)
    p.add_argument("--r0", type=_positive_float, default=1.0)
    p.add_argument("--eps", required=True, help="comma list, strictly decreasing")
    p.add_argument("--phi", required=True)
    p.add_argument("--m", type=int, default=12)
    p.add_argument("--radial-samples", type=_positive_int, default=33)
    p.add_argument("--threads", type=_positive_int, default=None,
                   help="worker pool width (default: HARMSHELL_THREADS or CPU count)")
    p.add_argument("--out", required=True, help="sweep CSV")
    p.add_argument("--fit-out", default=None,
                   help="fit summary CSV (default: <out> with _fit suffix)")

    p = sub.add_parser("verify", help="finite-difference oracle suite")
    common(p)
    p.add_argument("--dim", type=_positive_int, required=True)
    p.add_argument("--grid", type=_positive_int, default=256,
                   help="finest 2-D grid (d=2 only)")
    p.add_argument("--phi", default="coord:1")
    p.add_argument("--r0", type=_positive_float, default=1.0)
    p.add_argument("--eps", type=_positive_float, default=0.5)
    p.add_argument("--m", type=int, default=8)
    p.add_argument("--out-dir", default=".")

    p = sub.add_parser("taylor", help="Taylor residuals of the radial gaps")
    common(p)
    p.add_argument("--dim", type=_positive_int, required=True)
    p.add_argument("--r0", type=_positive_float, default=1.0)
    p.add_argument("--eps", default="0.2,0.1,0.05,0.025,0.0125",
                   help="comma list, strictly decreasing")
    p.add_argument("--k", default="1,2", help="comma list of degrees")
    p.add_argument("--out", required=True)

    return parser


def _load_config_flags(path: str) -> list[str]:
    flags: list[str] = []
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            key = key.strip()
            value = value.strip()
            if not sep or not key or not value:
                raise UsageError(f"{path}:{lineno}: expected 'key = value', got {raw.rstrip()!r}")
            flags.extend([f"--{key.replace('_', '-')}", value])
    return flags


def _inject_config(argv: list[str]) -> list[str]:
    """Splice config-file values in front of explicit flags (which then win)."""
    if not argv:
        return argv
    out = [argv[0]]
    rest: list[str] = []
    config_path: str | None = None
    i = 1
    while i < len(argv):
        tok = argv[i]
        if tok == "--config":
            if i + 1 >= len(argv):
                raise UsageError("--config needs a file path")
            if config_path is not None:
                raise UsageError("--config given more than once")
            config_path = argv[i + 1]
            i += 2
            continue
        if tok.startswith("--config="):
            if config_path is not None:
                raise UsageError("--config given more than once")
            config_path = tok.split("=", 1)[1]
            i += 1
            continue
        rest.append(tok)
        i += 1
    if config_path is not None:
        if not os.path.isfile(config_path):
            raise UsageError(f"config file not found: {config_path}")
        out.extend(_load_config_flags(config_path))
    out.extend(rest)
    return out


def parse_cli(argv: Sequence[str]) -> argparse.Namespace:
    """Parse argv (config already folded in by main)."""
    return build_parser().parse_args(list(argv))


# ---------------------------------------------------------------------------
# command runners
# ---------------------------------------------------------------------------


def _cmd_basis(args) -> int:
    _check_degree(args.m)
    spec = sb.BasisSpec(args.dim, args.m)
    rule = sb.build_quadrature(args.dim, 2 * args.m)
    basis = sb.enumerate_basis(spec)
    B = sb.basis_matrix(basis, rule.nodes)
    G = (B * rule.weights[None, :]) @ B.T
    G -= np.eye(len(basis))
    ks = np.array([b.k for b in basis])
    rows = []
    worst = 0.0
    for ki in range(args.m + 1):
        for kj in range(ki, args.m + 1):
            block = G[np.ix_(ks == ki, ks == kj)]
            res = float(np.max(np.abs(block)))
            worst = max(worst, res)
            rows.append((ki, kj, res))
    _write_csv(args.out, ["k_row", "k_col", "max_abs_residual"], rows)
    print(f"basis functions: {len(basis)}, quadrature nodes: {rule.n_nodes}")
    return _emit_gates([_Gate("basis_orthonormality", worst, 1e-10, worst < 1e-10)])


def _coeff_rows(coeffs: bd.ExpansionCoefficients):
    for idx, a in zip(coeffs.basis, coeffs.values):
        yield (idx.k, ";".join(str(c) for c in idx.chain), idx.flat_l, float(a))


def _cmd_expand(args) -> int:
    _check_degree(args.m)
    phi = parse_phi(args.phi, args.dim)
    spec = sb.BasisSpec(args.dim, args.m)
    rule = sb.build_quadrature(args.dim, bd.recommended_exactness(phi, args.m))
    coeffs = bd.expand(phi, spec, rule)
    _write_csv(args.out, ["k", "chain", "l", "a"], _coeff_rows(coeffs))
    energy = bd.coefficient_energy(coeffs)
    data_energy = float(np.sum(rule.weights * phi.values(rule.nodes) ** 2))
    slack = energy - data_energy
    print(f"coefficients: {len(coeffs.basis)}, energy: {energy:.12g}")
    return _emit_gates([_Gate("expand_parseval", slack, 1e-8, slack <= 1e-8)])


def read_coefficients(path: str) -> bd.ExpansionCoefficients:
    """Rebuild an expansion from a coefficient CSV written by ``expand``."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["k", "chain", "l", "a"]:
            raise ValueError(f"{path}: expected header k,chain,l,a, got {header}")
        entries = []
        for lineno, row in enumerate(reader, start=2):
            if len(row) != 4:
                raise ValueError(f"{path}:{lineno}: expected 4 cells")
            k = int(row[0])
            chain = tuple(int(tok) for tok in row[1].split(";"))
            entries.append((k, chain, int(row[2]), float(row[3])))
    if not entries:
        raise ValueError(f"{path}: no coefficient rows")
    d = len(entries[0][1]) + 1
    m = max(k for k, _, _, _ in entries)
    spec = sb.BasisSpec(d, m)
    basis = tuple(sb.enumerate_basis(spec))
    lookup = {(b.k, b.chain): pos for pos, b in enumerate(basis)}
    values = np.zeros(len(basis))
    for k, chain, l, a in entries:
        pos = lookup.get((k, chain))
        if pos is None:
            raise ValueError(f"{path}: no basis element with k={k}, chain={chain}")
        if basis[pos].flat_l != l:
            raise ValueError(
                f"{path}: flat index {l} does not match canonical order "
                f"({basis[pos].flat_l}) for k={k}, chain={chain}"
            )
        values[pos] = a
    rule = sb.build_quadrature(d, 2 * m + 8)
    return bd.ExpansionCoefficients(spec=spec, basis=basis, values=values, rule=rule)


def _read_points(path: str, d: int) -> np.ndarray:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        expected = [f"x{i}" for i in range(1, d + 1)]
        if header != expected:
            raise ValueError(f"{path}: expected header {','.join(expected)}, got {header}")
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if len(row) != d:
                raise ValueError(f"{path}:{lineno}: expected {d} cells")
            try:
                rows.append([float(tok) for tok in row])
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from exc
    if not rows:
        raise ValueError(f"{path}: no points")
    return np.asarray(rows)


def _solution(problem: str, geom: ex.Geometry, coeffs: bd.ExpansionCoefficients):
    if problem == "insulated":
        return ex.solve_insulated(geom, coeffs)
    return ex.solve_perfect(geom, coeffs)


def _cmd_eval(args) -> int:
    if (args.phi is None) == (args.coeffs is None):
        raise UsageError("eval needs exactly one of --phi or --coeffs")
    _check_degree(args.m)
    geom = ex.Geometry(args.dim, args.r0, args.eps)
    if args.phi is not None:
        phi = parse_phi(args.phi, args.dim)
        spec = sb.BasisSpec(args.dim, args.m)
        rule = sb.build_quadrature(args.dim, bd.recommended_exactness(phi, args.m))
        coeffs = bd.expand(phi, spec, rule)
    else:
        coeffs = read_coefficients(args.coeffs)
        if coeffs.d != args.dim:
            raise ValueError(
                f"coefficient file is {coeffs.d}-dimensional, --dim says {args.dim}"
            )
    sol = _solution(args.problem, geom, coeffs)
    X = _read_points(args.points, args.dim)
    u = sol.value(X)
    grad = sol.gradient(X)
    header = [f"x{i}" for i in range(1, args.dim + 1)] + ["u"] + [
        f"g{i}" for i in range(1, args.dim + 1)
    ]
    rows = [list(X[row]) + [float(u[row])] + list(grad[row]) for row in range(X.shape[0])]
    _write_csv(args.out, header, rows)
    print(f"evaluated {X.shape[0]} points")
    return 0


def _cmd_sweep(args) -> int:
    _check_degree(args.m)
    phi = parse_phi(args.phi, args.dim)
    eps_list = _eps_list(args.eps)
    rows = xp.epsilon_sweep(
        args.problem,
        args.dim,
        args.r0,
        phi,
        eps_list,
        m=args.m,
        radial_samples=args.radial_samples,
        threads=args.threads,
    )
    running = xp.running_exponents(rows)
    out_rows = [
        (
            args.problem,
            args.dim,
            float(args.r0),
            row.eps,
            row.m,
            row.sup_grad,
            row.C0,
            running[i],
        )
        for i, row in enumerate(rows)
    ]
    _write_csv(
        args.out,
        ["problem", "d", "r0", "eps", "m", "sup_grad", "C0", "exponent_running"],
        out_rows,
    )
    fit = xp.fit_power_law(rows)
    fit_path = args.fit_out or _default_fit_path(args.out)
    _write_csv(
        fit_path,
        ["exponent", "intercept", "max_log_residual"],
        [(fit.exponent, fit.intercept, fit.max_log_residual)],
    )
    print(f"fitted exponent: {fit.exponent:.4f}")
    return 0


def _default_fit_path(out: str) -> str:
    root, ext = os.path.splitext(out)
    return f"{root}_fit{ext or '.csv'}"


def _cmd_taylor(args) -> int:
    eps_list = _eps_list(args.eps)
    k_list = _int_list(args.k)
    if not k_list or any(k < 1 for k in k_list):
        raise UsageError(f"--k must list degrees >= 1, got {args.k!r}")
    rows = []
    gates = []
    for k in k_list:
        report = xp.taylor_gap_check(args.dim, args.r0, eps_list, k=k)
        for r in report.rows:
            rows.append(
                (args.dim, k, r.eps, r.delta1_residual, r.delta2_residual,
                 report.order1, report.order2)
            )
        gates.append(
            _Gate(f"taylor_order1_k{k}", report.order1, 1.9, report.order1 >= 1.9)
        )
        gates.append(
            _Gate(f"taylor_order2_k{k}", report.order2, 1.9, report.order2 >= 1.9)
        )
    _write_csv(
        args.out,
        ["d", "k", "eps", "delta1_residual", "delta2_residual", "order1", "order2"],
        rows,
    )
    return _emit_gates(gates)


def _cmd_verify(args) -> int:
    _check_degree(args.m)
    if args.grid < 32:
        raise UsageError("--grid must be >= 32")
    d = args.dim
    phi = parse_phi(args.phi, d)
    geom = ex.Geometry(d, args.r0, args.eps)
    os.makedirs(args.out_dir, exist_ok=True)
    gates: list[_Gate] = []

    # -- radial mode suite: FD three-point scheme against the closed forms
    cases = []
    for k in range(1, 5):
        c1, c2 = ex.insulated_coeffs(geom, k)
        cases.append(
            (
                oc.ModeBVPSpec(d, k, args.r0, args.eps, "neumann_zero"),
                lambda r, c1=c1, c2=c2, k=k: c1 * r ** (2.0 - d - k) + c2 * r ** float(k),
            )
        )
        cases.append(
            (
                oc.ModeBVPSpec(d, k, args.r0, args.eps, "dirichlet_zero"),
                lambda r, k=k: ex.perfect_profiles(geom, k, r)[1],
            )
        )
    cases.append(
        (
            oc.ModeBVPSpec(d, 0, args.r0, args.eps, "dirichlet_one", outer_value=0.0),
            lambda r: ex.perfect_profiles(geom, 1, r)[0],
        )
    )
    worst = {n: 0.0 for n in _RADIAL_NS}
    for spec, reference in cases:
        for n, _, err, _ in oc.radial_convergence_study(spec, reference, _RADIAL_NS):
            worst[n] = max(worst[n], err)
    radial_rows = []
    prev = None
    for n in _RADIAL_NS:
        h = args.eps / (n + 1)
        if prev is None:
            order = math.nan
        else:
            order = math.log(prev[1] / worst[n]) / math.log(prev[0] / h)
        radial_rows.append((n, h, worst[n], order))
        prev = (h, worst[n])
    _write_csv(
        os.path.join(args.out_dir, "radial_convergence.csv"),
        ["n", "h", "max_error", "observed_order"],
        radial_rows,
    )
    final_order = radial_rows[-1][3]
    gates.append(_Gate("radial_order", final_order, 1.9, final_order >= 1.9))
    finest = worst[_RADIAL_NS[-1]]
    gates.append(_Gate("radial_error_finest", finest, 1e-5, finest < 1e-5))

    # -- flux law for the assembled series solutions
    proj_rule = sb.build_quadrature(d, bd.recommended_exactness(phi, args.m))
    coeffs = bd.expand(phi, sb.BasisSpec(d, args.m), proj_rule)
    flux_rule = sb.build_quadrature(d, args.m + 2)
    phi_norm = math.sqrt(bd.coefficient_energy(coeffs))
    worst_flux = 0.0
    for problem in ("insulated", "perfect"):
        sol = _solution(problem, geom, coeffs)
        for r in (args.r0, args.r0 + args.eps / 2.0, args.r0 + args.eps):
            worst_flux = max(
                worst_flux, abs(oc.flux_integral(sol.gradient, r, flux_rule))
            )
    tol_flux = 1e-8 * phi_norm
    gates.append(_Gate("flux_conservation", worst_flux, tol_flux, worst_flux < tol_flux))

    # -- full-field comparison on the polar grid (d = 2 only)
    if d == 2:
        sizes = [args.grid // 4, args.grid // 2, args.grid]
        field_rows = []
        c0_gap = math.nan
        prev = None
        for size in sizes:
            theta = 2.0 * math.pi * np.arange(size) / size
            ring = np.stack([np.cos(theta), np.sin(theta)], axis=1)
            phi_vals = phi.values(ring)
            err = 0.0
            for problem in ("insulated", "perfect"):
                field = oc.polar_laplace_solve_2d(
                    args.r0, args.eps, phi_vals, problem, size, size
                )
                sol = _solution(problem, geom, coeffs)
                series = sol.value_grid(field.r_nodes, ring)
                err = max(err, float(np.max(np.abs(series - field.u))))
                if problem == "perfect" and size == args.grid:
                    c0_gap = abs(field.inner_constant - sol.C0)
            h = args.eps / size
            order = math.nan if prev is None else math.log(prev[1] / err) / math.log(prev[0] / h)
            field_rows.append((size, h, err, order))
            prev = (h, err)
        _write_csv(
            os.path.join(args.out_dir, "field_convergence.csv"),
            ["n", "h", "max_error", "observed_order"],
            field_rows,
        )
        field_err = field_rows[-1][2]
        gates.append(_Gate("field_error", field_err, 1e-4, field_err < 1e-4))
        gates.append(_Gate("field_order", field_rows[-1][3], 1.7, field_rows[-1][3] >= 1.7))
        gates.append(_Gate("c0_gap", c0_gap, 1e-4, c0_gap < 1e-4))

    return _emit_gates(gates)


def _check_degree(m: int) -> None:
    if not 0 <= m <= sb.MAX_DEGREE:
        raise UsageError(f"--m must lie in 0..{sb.MAX_DEGREE}, got {m}")


_RUNNERS = {
    "basis": _cmd_basis,
    "expand": _cmd_expand,
    "eval": _cmd_eval,
    "sweep": _cmd_sweep,
    "verify": _cmd_verify,
    "taylor": _cmd_taylor,
}


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        argv = _inject_config(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    try:
        args = parse_cli(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _RUNNERS[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, ArithmeticError, OSError, KeyError) as exc:
        print(f"error: {args.command}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
