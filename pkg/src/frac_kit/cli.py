"""Batch front-end over every operation in the toolkit.

One subcommand per operation, flat key=value config files with flag
overrides, and deterministic CSV/JSON artifacts: all floats are
written with 17 significant digits, so identical configurations
produce byte-identical outputs.  Exit codes separate validation
failures (2) from numerical-tolerance failures (3) so CI pipelines
can tell a bad invocation from a bad result.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import json
import math
import os
import sys
from itertools import product

import numpy as np

from . import __version__
from .errors import (
    EigenvalueCollisionError,
    FracKitError,
    IntegrabilityError,
    OrderError,
    ResidualError,
    SingularityError,
    SpectrumIntersectionError,
    TailError,
)
from .grid import Grid1D, GridFunction, norm, read_csv, write_csv
from . import halfline, identities, interval, symbols

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_TOLERANCE = 3

# contract revision of the artifact formats, printed next to the
# package version
INTERFACE_REVISION = 1

_VALIDATION_ERRORS = (
    ValueError,
    TypeError,
    KeyError,
    OSError,
    OrderError,
    SingularityError,
    TailError,
    SpectrumIntersectionError,
    EigenvalueCollisionError,
    IntegrabilityError,
)
# every remaining FracKitError (CalibrationError, FactorizationError,
# ResidualError, FitError, SingularMatrixError, AmbiguousClassError, ...)
# signals a numerical gate, not a bad invocation; the validation tuple
# is matched first so its FracKitError subclasses keep exit code 2


class _UsageError(Exception):
    pass


class _ToleranceFailure(Exception):
    """Numerical gate missed; carries the offending report."""

    def __init__(self, message: str, report: dict):
        super().__init__(message)
        self.report = report


# ---------------------------------------------------------------------------
# deterministic serialization


def _fmt(value: float) -> str:
    return format(float(value), ".17g")


def _jsonable(value):
    """Fold numpy scalars, complex numbers and tuples into JSON shapes."""
    if isinstance(value, (np.floating, np.integer)):
        value = value.item()
    if isinstance(value, complex):
        if value.imag == 0.0:
            return _jsonable(value.real)
        return [_jsonable(value.real), _jsonable(value.imag)]
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_jsonable(v) for v in value.tolist()]
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    return value


def _render_json(obj, indent: int = 0) -> str:
    """17-significant-digit JSON with NaN and infinities as null."""
    pad = "  " * indent
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        if math.isnan(obj) or math.isinf(obj):
            return "null"
        return _fmt(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        inner = ", ".join(_render_json(v, indent) for v in obj)
        return f"[{inner}]"
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        rows = ",\n".join(
            f"{pad}  {json.dumps(str(k))}: {_render_json(v, indent + 1)}"
            for k, v in obj.items()
        )
        return "{\n" + rows + "\n" + pad + "}"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _emit_json(obj, path=None) -> None:
    text = _render_json(_jsonable(obj)) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


# ---------------------------------------------------------------------------
# interval-mesh CSV (the grid CSV carries a periodic box; mesh files
# carry the open-interval nodes)


def _write_mesh_csv(path, mesh: interval.IntervalMesh, values: np.ndarray) -> None:
    values = np.asarray(values, dtype=np.complex128)
    with open(path, "w") as fh:
        fh.write(f"# mesh m={mesh.m}\n")
        fh.write("x,re,im\n")
        for x, v in zip(mesh.x, values):
            fh.write(f"{_fmt(x)},{_fmt(v.real)},{_fmt(v.imag)}\n")


def _read_mesh_csv(path) -> tuple:
    with open(path) as fh:
        header = fh.readline().strip()
        if not header.startswith("# mesh"):
            raise ValueError(f"missing mesh header in {path}: {header!r}")
        fields = dict(tok.split("=") for tok in header[len("# mesh") :].split())
        mesh = interval.IntervalMesh(int(fields["m"]))
        fh.readline()
        data = np.loadtxt(fh, delimiter=",", dtype=np.float64).reshape(-1, 3)
    if data.shape[0] != mesh.m:
        raise ValueError(f"row count {data.shape[0]} does not match header m={mesh.m}")
    return mesh, data[:, 1] + 1j * data[:, 2]


def _solution_sidecar(sol) -> dict:
    return {
        "a": sol.a if isinstance(sol.a, float) else float(getattr(sol.a, "a", sol.a)),
        "residual": sol.residual,
        "trace_a": sol.trace_a,
        "trace_a_minus_1": sol.trace_a_minus_1,
        "fitted_exponent": sol.fitted_exponent,
    }


# ---------------------------------------------------------------------------
# argument plumbing


def _ints(text: str) -> list:
    return [int(tok) for tok in text.split(",") if tok.strip()]


def _floats(text: str) -> list:
    return [float(tok) for tok in text.split(",") if tok.strip()]


def _parse_complex(text: str) -> complex:
    return complex(text.replace(" ", ""))


def _interval_rhs(token: str, mesh: interval.IntervalMesh) -> np.ndarray:
    """Node data from a named profile, const:<v>, or a mesh CSV path."""
    if token == "one":
        return np.ones(mesh.m)
    if token == "x":
        return mesh.x.copy()
    if token == "gauss":
        return np.exp(-4.0 * mesh.x**2)
    if token == "zero":
        return np.zeros(mesh.m)
    if token.startswith("const:"):
        return np.full(mesh.m, float(token[len("const:") :]))
    path = token[len("csv:") :] if token.startswith("csv:") else token
    other, values = _read_mesh_csv(path)
    if other.m != mesh.m:
        raise ValueError(f"rhs file has m={other.m}, expected {mesh.m}")
    return values


def _load_config(path) -> dict:
    config = {}
    with open(path) as fh:
        for line_no, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise _UsageError(f"{path}:{line_no}: expected key=value, got {line!r}")
            key, _, value = line.partition("=")
            config[key.strip().replace("-", "_")] = value.strip()
    return config


def _flag_given(argv, option_strings) -> bool:
    for token in argv:
        for opt in option_strings:
            if token == opt or token.startswith(opt + "="):
                return True
    return False


def _apply_config(args, parser: argparse.ArgumentParser, argv) -> None:
    """Fold config-file values under explicit flags; flags win."""
    if args.config is None:
        return
    config = _load_config(args.config)
    known = {}
    for action in parser._actions:
        if not action.option_strings or action.dest in ("help", "config"):
            continue
        known[action.dest] = action
    unknown = sorted(set(config) - set(known))
    if unknown:
        raise _UsageError(f"unknown config keys: {', '.join(unknown)}")
    for key, text in config.items():
        action = known[key]
        if _flag_given(argv, action.option_strings):
            continue
        if isinstance(action, (argparse._StoreTrueAction, argparse._StoreFalseAction)):
            value = text.lower() in ("1", "true", "yes", "on")
        else:
            value = (action.type or str)(text)
        setattr(args, key, value)


# ---------------------------------------------------------------------------
# subcommand implementations; each returns the exit code


def _symbol_from_args(args) -> symbols.SymbolSpec:
    kind = args.symbol
    if kind == "riesz":
        return symbols.riesz_power(args.a)
    if kind == "bessel":
        return symbols.bessel_power(args.a)
    if kind == "reduce-plus":
        return symbols.order_reduce_plus(args.t, args.sigma)
    if kind == "reduce-minus":
        return symbols.order_reduce_minus(args.t, args.sigma)
    raise _UsageError(f"unknown symbol kind {kind!r}")


def _cmd_apply_op(args) -> int:
    u = read_csv(args.input)
    out = symbols.apply_multiplier(_symbol_from_args(args), u)
    write_csv(out, args.output)
    return EXIT_OK


def _selftest_apply_op() -> None:
    g = Grid1D(256, 16.0)
    u = GridFunction.from_callable(g, lambda x: np.exp(-0.5 * x**2))
    out = symbols.apply_multiplier(symbols.order_reduce_plus(0.0), u)
    _expect(float(np.abs(out.values - u.values).max()) < 1e-12, "t=0 is the identity")


def _cmd_pv_apply(args) -> int:
    u = read_csv(args.input)
    kernel = symbols.PVKernelSpec.make(args.a, 1)
    idx = _ints(args.eval_indices) if args.eval_indices else None
    out = symbols.apply_pv_integral(kernel, u, eval_indices=idx)
    write_csv(out, args.output)
    return EXIT_OK


def _selftest_pv_apply() -> None:
    g = Grid1D(256, 16.0)
    u = GridFunction(g, np.full(g.n, 2.5))
    out = symbols.apply_pv_integral(symbols.PVKernelSpec.make(0.5), u)
    _expect(float(np.abs(out.values).max()) == 0.0, "constants map to zero")


def _cmd_calibrate_c(args) -> int:
    c = symbols.calibrate_constant(args.a, ndim=args.ndim)
    _emit_json({"a": args.a, "ndim": args.ndim, "c": c}, args.output)
    return EXIT_OK


def _selftest_calibrate_c() -> None:
    c = symbols.calibrate_constant(0.5, ndim=1)
    _expect(abs(c - 1.0 / math.pi) < 1e-12, "c(0.5, 1) is 1/pi")


def _cmd_kernel_check(args) -> int:
    grid = Grid1D(args.n, args.L)
    report = symbols.order_reduce_kernel_check(args.sigma, args.a, grid)
    payload = {
        "sigma": report.sigma,
        "a": report.a,
        "band_limit": report.band_limit,
        "max_rel_jump_kernel": report.max_rel_jump_kernel,
        "max_rel_power_kernel": report.max_rel_power_kernel,
    }
    _emit_json(payload, args.output)
    if report.max_rel > args.tol:
        raise _ToleranceFailure(
            f"kernel residual {report.max_rel:.3e} exceeds {args.tol:g}", payload
        )
    return EXIT_OK


def _selftest_kernel_check() -> None:
    report = symbols.order_reduce_kernel_check(1.0, 0.5, Grid1D(2048, 32.0))
    _expect(report.max_rel < 1e-3, "sigma=1 transforms check out")


def _cmd_compose_check(args) -> int:
    g = Grid1D(args.n, args.L)
    u = GridFunction.from_callable(g, lambda x: np.exp(-0.5 * x**2))
    residual = symbols.compose_check(
        symbols.order_reduce_minus(args.a),
        symbols.order_reduce_plus(args.a),
        symbols.bessel_power(args.a),
        u,
        tol=args.tol,
        raise_on_fail=False,
    )
    payload = {"a": args.a, "n": args.n, "residual": residual}
    _emit_json(payload, args.output)
    if residual > args.tol:
        raise _ToleranceFailure(
            f"factorization residual {residual:.3e} exceeds {args.tol:g}", payload
        )
    return EXIT_OK


def _selftest_compose_check() -> None:
    g = Grid1D(256, 16.0)
    u = GridFunction.from_callable(g, lambda x: np.exp(-0.5 * x**2))
    r = symbols.compose_check(
        symbols.order_reduce_plus(0.7),
        symbols.order_reduce_plus(-0.7),
        symbols.order_reduce_plus(0.0),
        u,
        raise_on_fail=False,
    )
    _expect(r <= 1e-10, "inverse pair composes to the identity")


def _plus_profile(g: Grid1D) -> GridFunction:
    """Plus-supported test profile x^3 e^{-x}, C^2 across the origin."""
    xp = np.clip(g.x, 0.0, None)
    return GridFunction(g, np.where(g.x >= 0, xp**3 * np.exp(-xp), 0.0))


def _cmd_support_check(args) -> int:
    g = Grid1D(args.n, args.L)
    residual = symbols.support_preservation_residual(args.t, _plus_profile(g))
    payload = {"t": args.t, "n": args.n, "residual": residual}
    _emit_json(payload, args.output)
    if residual > args.tol:
        raise _ToleranceFailure(
            f"support leak {residual:.3e} exceeds {args.tol:g}", payload
        )
    return EXIT_OK


def _selftest_support_check() -> None:
    r = symbols.support_preservation_residual(0.5, _plus_profile(Grid1D(4096, 32.0)))
    _expect(r < 1e-6, "plus operators keep plus support")


def _cmd_solve_halfline(args) -> int:
    f = read_csv(args.rhs)
    problem = halfline.ModelProblem(args.a, f)
    sol = halfline.solve_homogeneous(problem)
    write_csv(sol.u, args.output)
    _emit_json(_solution_sidecar(_HalflineView(args.a, sol)), args.json)
    return EXIT_OK


class _HalflineView:
    """Adapter giving half-line solutions the sidecar field names."""

    def __init__(self, a: float, sol):
        self.a = float(a)
        self.residual = sol.residual
        self.trace_a = sol.trace_a
        self.trace_a_minus_1 = sol.trace_a_minus_1
        self.fitted_exponent = sol.fitted_exponent


def _selftest_solve_halfline() -> None:
    g = Grid1D(512, 32.0)
    problem = halfline.ModelProblem(0.5, GridFunction(g, np.zeros(g.n)))
    sol = halfline.solve_homogeneous(problem)
    _expect(float(np.abs(sol.u.values).max()) == 0.0, "zero rhs gives zero solution")


def _cmd_solve_halfline_nonhom(args) -> int:
    f = read_csv(args.rhs)
    problem = halfline.ModelProblem(
        args.a, f, dirichlet_datum=args.phi, homogeneous=False
    )
    sol = halfline.solve_nonhomogeneous(problem)
    write_csv(sol.u, args.output)
    _emit_json(_solution_sidecar(_HalflineView(args.a, sol)), args.json)
    return EXIT_OK


def _selftest_solve_halfline_nonhom() -> None:
    g = Grid1D(512, 32.0)
    problem = halfline.ModelProblem(
        0.5, GridFunction(g, np.zeros(g.n)), dirichlet_datum=0.0, homogeneous=False
    )
    sol = halfline.solve_nonhomogeneous(problem)
    _expect(float(np.abs(sol.u.values).max()) == 0.0, "zero data gives zero solution")


def _cmd_make_sample(args) -> int:
    g = read_csv(args.profile)
    sample = halfline.make_transmission_sample(args.a, g)
    write_csv(sample.u, args.output)
    return EXIT_OK


def _selftest_make_sample() -> None:
    g = Grid1D(512, 32.0)
    zero = GridFunction(g, np.zeros(g.n))
    sample = halfline.make_transmission_sample(0.6, zero)
    _expect(float(np.abs(sample.u.values).max()) == 0.0, "zero profile gives zero sample")


def _cmd_decompose(args) -> int:
    g = read_csv(args.profile)
    sample = halfline.make_transmission_sample(args.a, g)
    v, psi = halfline.decompose_transmission_sample(sample)
    write_csv(v, args.output)
    _emit_json({"a": args.a, "psi": psi}, args.json)
    return EXIT_OK


def _selftest_decompose() -> None:
    g = Grid1D(2048, 32.0)
    zero = GridFunction(g, np.zeros(g.n))
    v, psi = halfline.decompose_transmission_sample(
        halfline.make_transmission_sample(0.75, zero)
    )
    _expect(abs(psi) < 1e-12, "zero sample decomposes to zero datum")


def _cmd_trace(args) -> int:
    u = read_csv(args.input)
    value = halfline.weighted_trace(u, args.mu, args.boundary, args.direction)
    _emit_json({"mu": args.mu, "trace": value}, args.output)
    return EXIT_OK


def _selftest_trace() -> None:
    g = Grid1D(1024, 32.0)
    xp = np.clip(g.x, 0.0, None)
    u = GridFunction(g, np.where(g.x >= 0, xp**0.5 * np.exp(-xp), 0.0))
    value = halfline.weighted_trace(u, 0.5)
    _expect(abs(value - 1.0) < 1e-2, "x^a e^{-x} has unit weighted trace")


def _cmd_poisson(args) -> int:
    if args.phi_csv is not None:
        phi = read_csv(args.phi_csv)
        fld = halfline.poisson_k0(phi)
        from .plane import interior_residual

        with open(args.output, "w") as fh:
            fh.write(
                f"# plane n={fld.grid.axis.n} L={_fmt(fld.grid.axis.L)} "
                f"levels={len(fld.grid.heights)} h_n={_fmt(fld.grid.h_n)}\n"
            )
            fh.write("level,x,re,im\n")
            for k, height in enumerate(fld.grid.heights):
                for x, v in zip(fld.grid.axis.x, fld.values[k]):
                    fh.write(f"{k},{_fmt(x)},{_fmt(v.real)},{_fmt(v.imag)}\n")
        _emit_json({"mode": 2, "interior_residual": interior_residual(fld)}, args.json)
        return EXIT_OK
    grid = Grid1D(args.n, args.L)
    u = halfline.poisson_k0(args.phi, grid)
    write_csv(u, args.output)
    gamma0_error = abs(u.values[grid.origin_index] - args.phi)
    _emit_json({"mode": 1, "gamma0_error": float(gamma0_error)}, args.json)
    return EXIT_OK


def _selftest_poisson() -> None:
    g = Grid1D(256, 16.0)
    u = halfline.poisson_k0(1.0, g)
    xp = np.clip(g.x, 0.0, None)
    want = np.where(g.x >= 0, np.exp(-xp), 0.0)
    _expect(float(np.abs(u.values - want).max()) < 1e-14, "unit datum gives H(x)e^{-x}")
    zero = halfline.poisson_k0(0.0, g)
    _expect(float(np.abs(zero.values).max()) == 0.0, "zero datum gives zero")


def _cmd_assemble_interval(args) -> int:
    op = interval.assemble(args.a, interval.IntervalMesh(args.m))
    interval.write_operator_matrix(args.output, op)
    payload = {"a": args.a, "m": args.m, "eig_min": float(op.eigenvalues[0])}
    _emit_json(payload, args.json)
    return EXIT_OK


def _selftest_assemble_interval() -> None:
    op = interval.assemble(0.5, interval.IntervalMesh(16))
    defect = float(np.abs(op.values - op.values.T).max())
    _expect(defect <= 1e-10, "assembled matrix is symmetric")


def _cmd_solve_interval(args) -> int:
    mesh = interval.IntervalMesh(args.m)
    op = interval.assemble(args.a, mesh)
    sol = interval.solve_dirichlet_interval(op, _interval_rhs(args.rhs, mesh))
    _write_mesh_csv(args.output, mesh, sol.values)
    _emit_json(_solution_sidecar(sol), args.json)
    return EXIT_OK


def _selftest_solve_interval() -> None:
    op = interval.assemble(0.5, interval.IntervalMesh(32))
    sol = interval.solve_dirichlet_interval(op, 0.0)
    _expect(float(np.abs(sol.values).max()) == 0.0, "zero rhs gives zero solution")


def _cmd_solve_interval_nonhom(args) -> int:
    mesh = interval.IntervalMesh(args.m)
    op = interval.assemble(args.a, mesh)
    sol = interval.solve_nonhomogeneous_interval(
        op,
        _interval_rhs(args.rhs, mesh),
        (args.phi_left, args.phi_right),
        shift=args.shift,
    )
    _write_mesh_csv(args.output, mesh, sol.values)
    _emit_json(_solution_sidecar(sol), args.json)
    return EXIT_OK


def _selftest_solve_interval_nonhom() -> None:
    op = interval.assemble(0.5, interval.IntervalMesh(32))
    sol = interval.solve_nonhomogeneous_interval(op, 0.0, (0.0, 0.0))
    _expect(float(np.abs(sol.values).max()) == 0.0, "zero data gives zero solution")


def _cmd_eigen(args) -> int:
    estimate = interval.principal_eigenvalue(args.a, tuple(_ints(args.sizes)))
    payload = {
        "a": args.a,
        "value": estimate.value,
        "order": estimate.order,
        "raw": list(estimate.raw),
        "sizes": list(estimate.sizes),
    }
    _emit_json(payload, args.output)
    return EXIT_OK


def _selftest_eigen() -> None:
    op = interval.assemble(0.5, interval.IntervalMesh(64))
    _expect(float(op.eigenvalues[0]) > 0.0, "operator is positive definite")


def _cmd_resolvent_scan(args) -> int:
    op = interval.assemble(args.a, interval.IntervalMesh(args.m))
    lambdas = interval.default_ray_points(args.count, args.lo, args.hi)
    scan = interval.resolvent_scan(op, lambdas)
    lam1 = float(op.eigenvalues[0])
    bound = max(1.0, 1.0 / lam1) * 1.05
    with open(args.output, "w") as fh:
        fh.write("lambda_re,lambda_im,norm,product\n")
        for lam, nrm, prod in zip(scan.lambdas, scan.norms, scan.products):
            fh.write(f"{_fmt(lam.real)},{_fmt(lam.imag)},{_fmt(nrm)},{_fmt(prod)}\n")
    payload = {"a": args.a, "m": args.m, "c3": scan.c3, "bound": bound}
    _emit_json(payload, args.json)
    if scan.c3 > bound:
        raise _ToleranceFailure(f"c3 {scan.c3:.6f} exceeds bound {bound:.6f}", payload)
    return EXIT_OK


def _selftest_resolvent_scan() -> None:
    op = interval.assemble(0.5, interval.IntervalMesh(32))
    scan = interval.resolvent_scan(op, np.array([-1.0 + 0.0j]))
    exact = 1.0 / float(op.eigenvalues[0] + 1.0)
    _expect(abs(scan.norms[0] - exact) < 1e-12, "resolvent norm matches spectral distance")


def _cmd_heat_evolve(args) -> int:
    mesh = interval.IntervalMesh(args.m)
    op = interval.assemble(args.a, mesh)
    forcing = None if args.forcing == "none" else _interval_rhs(args.forcing, mesh)
    initial = None if args.initial == "zero" else _interval_rhs(args.initial, mesh)
    scheme = {"be": "backward_euler", "cn": "crank_nicolson"}[args.scheme]
    traj = interval.heat_evolve(
        op, args.tau, args.steps, forcing=forcing, scheme=scheme, initial=initial
    )
    interval.write_trajectory_csv(args.output, traj, states_path=args.states)
    return EXIT_OK


def _selftest_heat_evolve() -> None:
    op = interval.assemble(0.5, interval.IntervalMesh(32))
    traj = interval.heat_evolve(op, 0.1, 5)
    _expect(float(np.abs(traj.states[-1]).max()) == 0.0, "no data, no heat")


def _identity_pair(args, op):
    if args.pair == "f1-fx":
        u = interval.solve_dirichlet_interval(op, 1.0)
        v = interval.solve_dirichlet_interval(op, lambda x: x)
    elif args.pair == "trivial":
        u = interval.solve_dirichlet_interval(op, 1.0)
        v = u
    elif args.pair == "nonhom-hom":
        u = interval.solve_nonhomogeneous_interval(op, 0.0, (0.0, 1.0))
        v = interval.solve_dirichlet_interval(op, 1.0)
    elif args.pair == "hom-hom":
        u = interval.solve_dirichlet_interval(op, 1.0)
        v = interval.solve_dirichlet_interval(op, lambda x: x)
    else:
        raise _UsageError(f"unknown pair {args.pair!r}")
    return u, v


def _run_identity(args, checker) -> int:
    op = interval.assemble(args.a, interval.IntervalMesh(args.m))
    u, v = _identity_pair(args, op)
    report = checker(u, v)
    payload = report.as_dict()
    _emit_json(payload, args.output)
    gap = payload["abs_gap"] if args.pair in ("trivial", "hom-hom") else payload["rel_gap"]
    if gap > args.tol:
        raise _ToleranceFailure(
            f"{report.identity} gap {gap:.3e} exceeds {args.tol:g}", payload
        )
    return EXIT_OK


def _cmd_check_pohozaev(args) -> int:
    return _run_identity(args, identities.check_pohozaev)


def _selftest_check_pohozaev() -> None:
    op = interval.assemble(0.5, interval.IntervalMesh(128))
    u = interval.solve_dirichlet_interval(op, 1.0)
    report = identities.check_pohozaev(u, u)
    _expect(report.abs_gap <= 1e-3, "even pair drives both sides to zero")


def _cmd_check_green(args) -> int:
    return _run_identity(args, identities.check_green)


def _selftest_check_green() -> None:
    op = interval.assemble(0.5, interval.IntervalMesh(128))
    u = interval.solve_dirichlet_interval(op, 1.0)
    report = identities.check_green(u, u)
    _expect(report.abs_gap == 0.0, "skew form vanishes on equal arguments")


def _cmd_classify_emu(args) -> int:
    if args.profile is not None:
        mesh = interval.IntervalMesh(args.m)
        if not args.profile.startswith("bump:"):
            raise _UsageError("profile must look like bump:<a>")
        power = float(args.profile[len("bump:") :])
        values = interval.power_bump(mesh.x, power)
    else:
        if args.input is None:
            raise _UsageError("need --input or --profile")
        mesh, values = _read_mesh_csv(args.input)
    report = identities.classify_e_mu(values, _floats(args.candidates), mesh=mesh)
    payload = {
        "best_mu": report.best_mu,
        "residuals": {_fmt(k): v for k, v in report.residuals.items()},
        "leading": {_fmt(k): list(v) for k, v in report.leading.items()},
        "coefficients": [list(c) for c in report.coefficients],
    }
    _emit_json(payload, args.output)
    return EXIT_OK


def _selftest_classify_emu() -> None:
    mesh = interval.IntervalMesh(256)
    report = identities.classify_e_mu(
        interval.power_bump(mesh.x, 0.5), [0.25, 0.5, 0.75], mesh=mesh
    )
    _expect(report.best_mu == 0.5, "bump profile classifies at its own power")


# ---------------------------------------------------------------------------
# sweep


_SWEEP_GRID_COMMANDS = ("calibrate-c", "compose-check", "support-check", "kernel-check")
_SWEEP_MESH_COMMANDS = (
    "eigen",
    "solve-interval",
    "check-pohozaev",
    "check-green",
)


def _sweep_cell(payload: tuple) -> tuple:
    command, a, m, n = payload
    if command == "calibrate-c":
        g = Grid1D(n, 32.0)
        u = GridFunction.from_callable(g, lambda x: np.exp(-0.5 * x**2))
        spec = symbols.PVKernelSpec.make(a, 1)
        via_pv = symbols.apply_pv_integral(spec, u, smoothness_check=False)
        via_mult = symbols.apply_multiplier(symbols.riesz_power(a), u, check_alias=False)
        value = norm(via_pv - via_mult, "l2") / norm(via_mult, "l2")
        metric = "pv_vs_multiplier_rel"
    elif command == "compose-check":
        g = Grid1D(n, 32.0)
        u = GridFunction.from_callable(g, lambda x: np.exp(-0.5 * x**2))
        value = symbols.compose_check(
            symbols.order_reduce_minus(a),
            symbols.order_reduce_plus(a),
            symbols.bessel_power(a),
            u,
            raise_on_fail=False,
        )
        metric = "factorization_residual"
    elif command == "support-check":
        value = symbols.support_preservation_residual(a, _plus_profile(Grid1D(n, 32.0)))
        metric = "support_leak"
    elif command == "kernel-check":
        value = symbols.order_reduce_kernel_check(1.0, a, Grid1D(n, 32.0)).max_rel
        metric = "kernel_residual"
    elif command == "eigen":
        op = interval.assemble(a, interval.IntervalMesh(m))
        value = float(op.eigenvalues()[0])
        metric = "eig_min"
    elif command == "solve-interval":
        op = interval.assemble(a, interval.IntervalMesh(m))
        value = interval.solve_dirichlet_interval(op, 1.0).residual
        metric = "residual"
    elif command == "check-pohozaev":
        op = interval.assemble(a, interval.IntervalMesh(m))
        u = interval.solve_dirichlet_interval(op, 1.0)
        v = interval.solve_dirichlet_interval(op, lambda x: x)
        value = identities.check_pohozaev(u, v).rel_gap
        metric = "rel_gap"
    elif command == "check-green":
        op = interval.assemble(a, interval.IntervalMesh(m))
        u = interval.solve_nonhomogeneous_interval(op, 0.0, (0.0, 1.0))
        v = interval.solve_dirichlet_interval(op, 1.0)
        value = identities.check_green(u, v).rel_gap
        metric = "rel_gap"
    else:
        raise ValueError(f"command {command!r} cannot be swept")
    return command, a, m, n, metric, float(value)


def _pool_size(args) -> int:
    env = os.environ.get("FRAC_KIT_THREADS")
    if env is not None:
        size = int(env)
    elif args.threads is not None:
        size = int(args.threads)
    else:
        size = os.cpu_count() or 1
    if size < 1:
        raise _UsageError(f"pool size must be positive, got {size}")
    return size


def _cmd_sweep(args) -> int:
    command = args.command
    if command in _SWEEP_GRID_COMMANDS:
        if not args.n_list:
            raise _UsageError(f"{command} sweeps need --n-list")
        cells = [(command, a, None, n) for a, n in product(_floats(args.a_list), _ints(args.n_list))]
    elif command in _SWEEP_MESH_COMMANDS:
        if not args.m_list:
            raise _UsageError(f"{command} sweeps need --m-list")
        cells = [(command, a, m, None) for a, m in product(_floats(args.a_list), _ints(args.m_list))]
    else:
        allowed = ", ".join(_SWEEP_GRID_COMMANDS + _SWEEP_MESH_COMMANDS)
        raise _UsageError(f"cannot sweep {command!r}; choose one of: {allowed}")
    size = _pool_size(args)
    if size == 1 or len(cells) == 1:
        rows = [_sweep_cell(cell) for cell in cells]
    else:
        with concurrent.futures.ProcessPoolExecutor(max_workers=size) as pool:
            rows = list(pool.map(_sweep_cell, cells))
    with open(args.output, "w") as fh:
        fh.write("command,a,m,n,metric,value\n")
        for command_, a, m, n, metric, value in rows:
            fh.write(
                f"{command_},{_fmt(a)},{'' if m is None else m},"
                f"{'' if n is None else n},{metric},{_fmt(value)}\n"
            )
    return EXIT_OK


def _selftest_sweep() -> None:
    row = _sweep_cell(("compose-check", 0.5, None, 256))
    _expect(row[5] <= 1e-10, "one-cell sweep composes exactly")


# ---------------------------------------------------------------------------
# wiring


def _expect(condition: bool, label: str) -> None:
    if not condition:
        raise ResidualError(f"self-test failed: {label}")
    print(f"ok: {label}")


_COMMANDS = {}

# options whose value must come from the user (no sensible default exists)
_REQUIRED = {
    "apply-op": ("input",),
    "pv-apply": ("input",),
    "solve-halfline": ("rhs",),
    "solve-halfline-nonhom": ("rhs",),
    "make-sample": ("profile",),
    "decompose": ("profile",),
    "trace": ("input",),
}


def _register(name, runner, selftest) -> None:
    _COMMANDS[name] = (runner, selftest)


def _common_io(sub, output_default, json_default=None, with_json=False):
    sub.add_argument("--output", "-o", default=output_default, help="artifact path")
    if with_json:
        sub.add_argument("--json", default=json_default, help="JSON sidecar path (default: stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="frac-kit",
        description="Fractional-Laplacian Dirichlet toolkit batch front-end.",
    )
    parser.add_argument(
        "--version",
        action="version",
        version=f"frac-kit {__version__} (interface revision {INTERFACE_REVISION})",
    )
    subs = parser.add_subparsers(dest="subcommand", metavar="SUBCOMMAND")

    def new(name, help_text):
        sub = subs.add_parser(name, help=help_text)
        sub.add_argument("--config", default=None, help="flat key=value config file; flags win")
        sub.add_argument("--self-test", action="store_true", help="run the built-in smoke examples")
        return sub

    sub = new("apply-op", "apply a Fourier multiplier to a grid CSV")
    sub.add_argument("--symbol", default="riesz", choices=["riesz", "bessel", "reduce-plus", "reduce-minus"])
    sub.add_argument("--a", type=float, default=0.5)
    sub.add_argument("--t", type=float, default=0.5, help="order for the one-sided families")
    sub.add_argument("--sigma", type=float, default=1.0)
    sub.add_argument("--input", default=None)
    _common_io(sub, "applied.csv")
    _register("apply-op", _cmd_apply_op, _selftest_apply_op)

    sub = new("pv-apply", "apply the singular-integral form to a grid CSV")
    sub.add_argument("--a", type=float, default=0.5)
    sub.add_argument("--input", default=None)
    sub.add_argument("--eval-indices", default=None, help="comma-separated sample indices")
    _common_io(sub, "pv.csv")
    _register("pv-apply", _cmd_pv_apply, _selftest_pv_apply)

    sub = new("calibrate-c", "closed-form kernel constant with cross-validation")
    sub.add_argument("--a", type=float, default=0.5)
    sub.add_argument("--ndim", type=int, default=1, choices=[1, 2])
    sub.add_argument("--output", "-o", default=None, help="JSON path (default: stdout)")
    _register("calibrate-c", _cmd_calibrate_c, _selftest_calibrate_c)

    sub = new("kernel-check", "one-sided kernel transform residuals")
    sub.add_argument("--a", type=float, default=0.5)
    sub.add_argument("--sigma", type=float, default=1.0)
    sub.add_argument("--n", type=int, default=4096)
    sub.add_argument("--L", type=float, default=32.0)
    sub.add_argument("--tol", type=float, default=1e-3)
    sub.add_argument("--output", "-o", default=None, help="JSON path (default: stdout)")
    _register("kernel-check", _cmd_kernel_check, _selftest_kernel_check)

    sub = new("compose-check", "factorization of the Bessel power through one-sided factors")
    sub.add_argument("--a", type=float, default=0.5)
    sub.add_argument("--n", type=int, default=4096)
    sub.add_argument("--L", type=float, default=32.0)
    sub.add_argument("--tol", type=float, default=1e-10)
    sub.add_argument("--output", "-o", default=None, help="JSON path (default: stdout)")
    _register("compose-check", _cmd_compose_check, _selftest_compose_check)

    sub = new("support-check", "plus-side support preservation of the one-sided family")
    sub.add_argument("--t", type=float, default=0.5)
    sub.add_argument("--n", type=int, default=4096)
    sub.add_argument("--L", type=float, default=32.0)
    sub.add_argument("--tol", type=float, default=1e-6)
    sub.add_argument("--output", "-o", default=None, help="JSON path (default: stdout)")
    _register("support-check", _cmd_support_check, _selftest_support_check)

    sub = new("solve-halfline", "homogeneous Dirichlet solve on the half-line")
    sub.add_argument("--a", type=float, default=0.5)
    sub.add_argument("--rhs", default=None, help="grid CSV with plus-supported data")
    _common_io(sub, "u.csv", with_json=True)
    _register("solve-halfline", _cmd_solve_halfline, _selftest_solve_halfline)

    sub = new("solve-halfline-nonhom", "nonhomogeneous Dirichlet solve on the half-line")
    sub.add_argument("--a", type=float, default=0.5)
    sub.add_argument("--rhs", default=None)
    sub.add_argument("--phi", type=_parse_complex, default=1.0, help="blow-up datum")
    _common_io(sub, "u.csv", with_json=True)
    _register(
        "solve-halfline-nonhom", _cmd_solve_halfline_nonhom, _selftest_solve_halfline_nonhom
    )

    sub = new("make-sample", "build a transmission-class sample from a profile")
    sub.add_argument("--a", type=float, default=0.5)
    sub.add_argument("--profile", default=None, help="grid CSV")
    _common_io(sub, "sample.csv")
    _register("make-sample", _cmd_make_sample, _selftest_make_sample)

    sub = new("decompose", "split a transmission sample into regular part and datum")
    sub.add_argument("--a", type=float, default=0.75)
    sub.add_argument("--profile", default=None, help="grid CSV")
    _common_io(sub, "v.csv", with_json=True)
    _register("decompose", _cmd_decompose, _selftest_decompose)

    sub = new("trace", "weighted boundary trace of a grid CSV")
    sub.add_argument("--input", default=None)
    sub.add_argument("--mu", type=float, default=0.5)
    sub.add_argument("--boundary", type=float, default=0.0)
    sub.add_argument("--direction", type=int, default=1, choices=[1, -1])
    sub.add_argument("--output", "-o", default=None, help="JSON path (default: stdout)")
    _register("trace", _cmd_trace, _selftest_trace)

    sub = new("poisson", "boundary-to-solution map of 1 - Laplacian")
    sub.add_argument("--phi", type=_parse_complex, default=1.0, help="scalar datum (n=1)")
    sub.add_argument("--phi-csv", default=None, help="grid CSV datum (n=2 half-plane)")
    sub.add_argument("--n", type=int, default=1024)
    sub.add_argument("--L", type=float, default=32.0)
    _common_io(sub, "poisson.csv", with_json=True)
    _register("poisson", _cmd_poisson, _selftest_poisson)

    sub = new("assemble-interval", "dense interval realization, exported binary")
    sub.add_argument("--a", type=float, default=0.5)
    sub.add_argument("--m", type=int, default=256)
    _common_io(sub, "matrix.bin", with_json=True)
    _register("assemble-interval", _cmd_assemble_interval, _selftest_assemble_interval)

    sub = new("solve-interval", "homogeneous interval Dirichlet solve")
    sub.add_argument("--a", type=float, default=0.5)
    sub.add_argument("--m", type=int, default=512)
    sub.add_argument("--rhs", default="one", help="one|x|gauss|zero|const:<v>|csv path")
    _common_io(sub, "u.csv", with_json=True)
    _register("solve-interval", _cmd_solve_interval, _selftest_solve_interval)

    sub = new("solve-interval-nonhom", "interval solve with blow-up boundary data")
    sub.add_argument("--a", type=float, default=0.5)
    sub.add_argument("--m", type=int, default=512)
    sub.add_argument("--rhs", default="zero")
    sub.add_argument("--phi-left", type=_parse_complex, default=0.0)
    sub.add_argument("--phi-right", type=_parse_complex, default=1.0)
    sub.add_argument("--shift", type=_parse_complex, default=0.0)
    _common_io(sub, "u.csv", with_json=True)
    _register(
        "solve-interval-nonhom", _cmd_solve_interval_nonhom, _selftest_solve_interval_nonhom
    )

    sub = new("eigen", "principal eigenvalue with Richardson extrapolation")
    sub.add_argument("--a", type=float, default=0.5)
    sub.add_argument("--sizes", default="256,512,1024")
    sub.add_argument("--output", "-o", default=None, help="JSON path (default: stdout)")
    _register("eigen", _cmd_eigen, _selftest_eigen)

    sub = new("resolvent-scan", "resolvent norms along the standard rays")
    sub.add_argument("--a", type=float, default=0.5)
    sub.add_argument("--m", type=int, default=256)
    sub.add_argument("--count", type=int, default=40)
    sub.add_argument("--lo", type=float, default=1.0)
    sub.add_argument("--hi", type=float, default=1.0e4)
    _common_io(sub, "resolvent.csv", with_json=True)
    _register("resolvent-scan", _cmd_resolvent_scan, _selftest_resolvent_scan)

    sub = new("heat-evolve", "implicit time march of the fractional heat problem")
    sub.add_argument("--a", type=float, default=0.5)
    sub.add_argument("--m", type=int, default=256)
    sub.add_argument("--tau", type=float, default=0.25)
    sub.add_argument("--steps", type=int, default=40)
    sub.add_argument("--scheme", default="be", choices=["be", "cn"])
    sub.add_argument("--forcing", default="one", help="one|x|gauss|zero|none|const:<v>|csv path")
    sub.add_argument("--initial", default="zero")
    sub.add_argument("--states", default=None, help="optional full-state CSV path")
    _common_io(sub, "trajectory.csv")
    _register("heat-evolve", _cmd_heat_evolve, _selftest_heat_evolve)

    sub = new("check-pohozaev", "interior-vs-boundary derivative identity report")
    sub.add_argument("--a", type=float, default=0.5)
    sub.add_argument("--m", type=int, default=1024)
    sub.add_argument("--pair", default="f1-fx", choices=["f1-fx", "trivial"])
    sub.add_argument("--tol", type=float, default=1e-2)
    sub.add_argument("--output", "-o", default=None, help="JSON path (default: stdout)")
    _register("check-pohozaev", _cmd_check_pohozaev, _selftest_check_pohozaev)

    sub = new("check-green", "antisymmetric boundary identity report")
    sub.add_argument("--a", type=float, default=0.5)
    sub.add_argument("--m", type=int, default=1024)
    sub.add_argument("--pair", default="nonhom-hom", choices=["nonhom-hom", "trivial", "hom-hom"])
    sub.add_argument("--tol", type=float, default=3e-2)
    sub.add_argument("--output", "-o", default=None, help="JSON path (default: stdout)")
    _register("check-green", _cmd_check_green, _selftest_check_green)

    sub = new("classify-emu", "best boundary-class exponent for node data")
    sub.add_argument("--input", default=None, help="mesh CSV")
    sub.add_argument("--profile", default=None, help="bump:<a> built-in instead of a file")
    sub.add_argument("--m", type=int, default=512)
    sub.add_argument("--candidates", default="0.25,0.5,0.75")
    sub.add_argument("--output", "-o", default=None, help="JSON path (default: stdout)")
    _register("classify-emu", _cmd_classify_emu, _selftest_classify_emu)

    sub = new("sweep", "cartesian parameter sweep emitting a long-format CSV")
    sub.add_argument("--command", default="compose-check")
    sub.add_argument("--a-list", default="0.25,0.5,0.75")
    sub.add_argument("--m-list", default="")
    sub.add_argument("--n-list", default="")
    sub.add_argument("--threads", type=int, default=None, help="pool size; FRAC_KIT_THREADS overrides")
    _common_io(sub, "sweep.csv")
    _register("sweep", _cmd_sweep, _selftest_sweep)

    return parser


def run(argv) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse handles --help/--version/bad flags itself; surface its code
        return int(exc.code or 0)
    if args.subcommand is None:
        parser.print_help()
        return EXIT_USAGE
    runner, selftest = _COMMANDS[args.subcommand]
    sub = next(
        action.choices[args.subcommand]
        for action in parser._actions
        if isinstance(action, argparse._SubParsersAction)
    )
    try:
        _apply_config(args, sub, argv)
        if args.self_test:
            selftest()
            return EXIT_OK
        for name in _REQUIRED.get(args.subcommand, ()):
            if getattr(args, name) is None:
                raise _UsageError(f"--{name} is required (or use --self-test)")
        return runner(args)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        sub.print_help(sys.stderr)
        return EXIT_USAGE
    except _ToleranceFailure as exc:
        print(f"tolerance failure: {exc}", file=sys.stderr)
        print(_render_json(_jsonable(exc.report)), file=sys.stderr)
        return EXIT_TOLERANCE
    except _VALIDATION_ERRORS as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        sub.print_help(sys.stderr)
        return EXIT_USAGE
    except FracKitError as exc:
        print(f"tolerance failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_TOLERANCE


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
