"""Command-line front end.

JSON in, JSON out. Matrices are {"n": int, "data": [[row], ...]}, vectors
{"n": int, "data": [...]}, parallelepipeds {"n": int, "edges": [[edge], ...]}.
Every result carries a run manifest (input hashes, seed, tolerances,
version) so a run can be reproduced byte for byte.

Exit codes: 0 success, 1 validation error, 2 not converged / unsupported
case, 3 bound violation found by a search.
"""

import argparse
import hashlib
import json
import os
import sys
import tempfile

import numpy as np

from . import __version__
from .config import ToleranceConfig
from .constructors import (
    construct_L_max,
    construct_S_max,
    construct_through_vertex,
)
from .equalizer import equalize_diagonal, equalize_diagonal_barycentric
from .errors import InscribedExtremaError, NotConverged, UnsupportedCase
from .functionals import bound_L_max, bound_S_max, facet_area_total_gram
from .geometry import Ellipsoid, Parallelepiped, is_inscribed, orthotope_to_parallelepiped
from .oracle import (
    explore_restricted_schur_horn,
    random_search_global,
    random_search_vertex,
)

SCHEMA = "inscribed-extrema/1"
SYMMETRY_REL_TOL = 1e-12
FUNCTIONAL_NAMES = {"edge": "edge_length", "facet": "facet_area"}


class CliError(Exception):
    pass


def _sha256(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(65536), b""):
            h.update(block)
    return h.hexdigest()


def _read_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc}")
    except json.JSONDecodeError as exc:
        raise CliError(f"cannot parse {path}: {exc}")


def _load_matrix(path):
    doc = _read_json(path)
    try:
        n = int(doc["n"])
        a = np.asarray(doc["data"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise CliError(f"{path}: expected {{'n': int, 'data': [[...]]}} ({exc})")
    if a.shape != (n, n):
        raise CliError(f"{path}: data shape {a.shape} does not match n={n}")
    scale = max(float(np.max(np.abs(a))), 1.0)
    if float(np.max(np.abs(a - a.T))) > SYMMETRY_REL_TOL * scale:
        raise CliError(f"{path}: not symmetric")
    return a


def _load_vector(path):
    doc = _read_json(path)
    try:
        n = int(doc["n"])
        v = np.asarray(doc["data"], dtype=float).ravel()
    except (KeyError, TypeError, ValueError) as exc:
        raise CliError(f"{path}: expected {{'n': int, 'data': [...]}} ({exc})")
    if v.size != n:
        raise CliError(f"{path}: vector length {v.size} does not match n={n}")
    return v


def _tolerances(args):
    return ToleranceConfig(
        ortho_tol=args.tol_ortho,
        inscribed_tol=args.tol_inscribed,
        equalizer_tol=args.tol_equalizer,
        bound_slack=args.tol_bound_slack,
    )


def _manifest(args, inputs):
    tols = _tolerances(args)
    return {
        "command": args.command,
        "inputs": {
            name: {"path": path, "sha256": _sha256(path)} for name, path in inputs.items()
        },
        "seed": getattr(args, "seed", None),
        "tolerances": {
            "ortho_tol": tols.ortho_tol,
            "inscribed_tol": tols.inscribed_tol,
            "equalizer_tol": tols.equalizer_tol,
            "bound_slack": tols.bound_slack,
        },
        "version": __version__,
    }


def _write_atomic(path, text):
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".inscribed-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(args, manifest, result, error=None):
    payload = {"schema": SCHEMA, "manifest": manifest}
    if error is not None:
        payload["error"] = error
    payload["result"] = result
    text = json.dumps(payload, indent=2)
    if args.output:
        _write_atomic(args.output, text)
    else:
        print(text)


def _check_ci_seed(args):
    if os.environ.get("INSCRIBED_EXTREMA_CI") == "1" and getattr(args, "seed", 0) is None:
        raise CliError("--seed is required in CI mode (INSCRIBED_EXTREMA_CI=1)")


def _effective_seed(args):
    return 0 if args.seed is None else args.seed


def _cmd_bounds(args):
    a = _load_matrix(args.matrix)
    e = Ellipsoid(a)
    manifest = _manifest(args, {"matrix": args.matrix})
    result = {
        "n": e.n,
        "L_max": bound_L_max(e),
        "S_max": bound_S_max(e),
        "tr_A": float(np.trace(e.A)),
        "tr_C": float(np.trace(e.C)),
        "det_A": float(np.prod(e.eigenvalues)),
    }
    _emit(args, manifest, result)
    return 0


def _cmd_construct(args):
    _check_ci_seed(args)
    a = _load_matrix(args.matrix)
    e = Ellipsoid(a)
    functional = FUNCTIONAL_NAMES[args.functional]
    seed = _effective_seed(args)
    inputs = {"matrix": args.matrix}
    if args.vertex:
        inputs["vertex"] = args.vertex
    manifest = _manifest(args, inputs)
    try:
        if args.vertex:
            x0 = _load_vector(args.vertex)
            q, cert = construct_through_vertex(
                e, x0, functional=functional, tol=args.tol_equalizer, seed=seed
            )
        elif functional == "edge_length":
            q, cert = construct_L_max(e, seed=seed)
        else:
            q, cert = construct_S_max(e)
    except NotConverged as exc:
        report = exc.report.to_dict() if exc.report is not None else None
        _emit(
            args, manifest, {"equalization": report},
            error={"type": "NotConverged", "message": str(exc)},
        )
        return 2
    except UnsupportedCase as exc:
        _emit(args, manifest, None, error={"type": "UnsupportedCase", "message": str(exc)})
        return 2
    p = orthotope_to_parallelepiped(e, q)
    result = {
        "orthotope": q.to_dict(),
        "parallelepiped": p.to_dict(),
        "certificate": cert.to_dict(),
    }
    _emit(args, manifest, result)
    return 0


def _cmd_verify(args):
    a = _load_matrix(args.matrix)
    e = Ellipsoid(a)
    p = Parallelepiped.from_dict(_read_json(args.parallelepiped))
    manifest = _manifest(args, {"matrix": args.matrix, "parallelepiped": args.parallelepiped})
    rep = is_inscribed(e, p, tol=args.tol_inscribed)
    edge_total = 2.0 ** (e.n - 1) * float(np.sum(np.linalg.norm(p.V, axis=0)))
    facet_total = facet_area_total_gram(p).value
    l_bound = bound_L_max(e)
    s_bound = bound_S_max(e)
    result = {
        "inscribed": rep.inscribed,
        "max_vertex_residual": rep.max_residual,
        "L": edge_total,
        "S": facet_total,
        "L_bound": l_bound,
        "S_bound": s_bound,
        "L_gap": (l_bound - edge_total) / l_bound,
        "S_gap": (s_bound - facet_total) / s_bound,
    }
    _emit(args, manifest, result)
    return 0


def _cmd_search(args):
    _check_ci_seed(args)
    if args.trials < 1:
        raise CliError("--trials must be at least 1")
    a = _load_matrix(args.matrix)
    e = Ellipsoid(a)
    functional = FUNCTIONAL_NAMES[args.functional]
    seed = _effective_seed(args)
    inputs = {"matrix": args.matrix}
    if args.vertex:
        inputs["vertex"] = args.vertex
    manifest = _manifest(args, inputs)
    keep_trace = args.csv_trace is not None
    if args.vertex:
        x0 = _load_vector(args.vertex)
        report = random_search_vertex(
            e, x0, functional, args.trials, seed,
            bound_slack=args.tol_bound_slack, keep_trace=keep_trace,
        )
    else:
        report = random_search_global(
            e, functional, args.trials, seed,
            bound_slack=args.tol_bound_slack, keep_trace=keep_trace,
        )
    if keep_trace:
        lines = ["trial,value"]
        lines += [f"{i},{v!r}" for i, v in enumerate(report.trace)]
        _write_atomic(args.csv_trace, "\n".join(lines) + "\n")
    _emit(args, manifest, report.to_dict())
    return 3 if report.violations > 0 else 0


def _cmd_equalize(args):
    _check_ci_seed(args)
    a = _load_matrix(args.matrix)
    manifest = _manifest(args, {"matrix": args.matrix})
    seed = _effective_seed(args)
    if args.barycentric:
        try:
            rep = equalize_diagonal_barycentric(
                a, tol=args.tol_equalizer, max_iter=args.max_iter, seed=seed
            )
        except NotConverged as exc:
            _emit(
                args, manifest, exc.report.to_dict() if exc.report else None,
                error={"type": "NotConverged", "message": str(exc)},
            )
            return 2
    else:
        rep = equalize_diagonal(a, tol=args.tol_equalizer)
    _emit(args, manifest, rep.to_dict())
    return 0


def _cmd_explore_rsh(args):
    _check_ci_seed(args)
    a = _load_matrix(args.matrix)
    y0 = _load_vector(args.vertex)
    manifest = _manifest(args, {"matrix": args.matrix, "vertex": args.vertex})
    seed = _effective_seed(args)
    report = explore_restricted_schur_horn(
        a, y0, FUNCTIONAL_NAMES[args.functional],
        restarts=args.restarts, iters=args.iters, seed=seed,
    )
    _emit(args, manifest, report.to_dict())
    return 0


def _add_tolerance_flags(sp):
    sp.add_argument("--tol-ortho", type=float, default=1e-10)
    sp.add_argument("--tol-inscribed", type=float, default=1e-9)
    sp.add_argument("--tol-equalizer", type=float, default=1e-10)
    sp.add_argument("--tol-bound-slack", type=float, default=1e-9)
    sp.add_argument("--output", default=None, help="write JSON here (atomically) instead of stdout")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="inscribed-extrema",
        description="Extremal parallelepipeds inscribed in ellipsoids: "
        "bounds, constructions, searches, diagonal equalization.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("bounds", help="closed-form L and S bounds for an ellipsoid")
    sp.add_argument("--matrix", required=True)
    _add_tolerance_flags(sp)
    sp.set_defaults(run=_cmd_bounds)

    sp = sub.add_parser("construct", help="build an extremal inscribed parallelepiped")
    sp.add_argument("--matrix", required=True)
    sp.add_argument("--functional", choices=("edge", "facet"), required=True)
    sp.add_argument("--vertex", default=None, help="boundary point the all-plus vertex must hit")
    sp.add_argument("--seed", type=int, default=None)
    _add_tolerance_flags(sp)
    sp.set_defaults(run=_cmd_construct)

    sp = sub.add_parser("verify", help="evaluate a parallelepiped file against an ellipsoid")
    sp.add_argument("--matrix", required=True)
    sp.add_argument("--parallelepiped", required=True)
    _add_tolerance_flags(sp)
    sp.set_defaults(run=_cmd_verify)

    sp = sub.add_parser("search", help="random-search certification of the bounds")
    sp.add_argument("--matrix", required=True)
    sp.add_argument("--functional", choices=("edge", "facet"), required=True)
    sp.add_argument("--trials", type=int, required=True)
    sp.add_argument("--seed", type=int, default=None)
    sp.add_argument("--vertex", default=None)
    sp.add_argument("--csv-trace", default=None, help="write per-trial values as CSV")
    _add_tolerance_flags(sp)
    sp.set_defaults(run=_cmd_search)

    sp = sub.add_parser("equalize", help="diagonal equalization report")
    sp.add_argument("--matrix", required=True)
    sp.add_argument("--barycentric", action="store_true")
    sp.add_argument("--max-iter", type=int, default=None)
    sp.add_argument("--seed", type=int, default=None)
    _add_tolerance_flags(sp)
    sp.set_defaults(run=_cmd_equalize)

    sp = sub.add_parser(
        "explore-rsh", help="numerical explorer for the restricted diagonal condition"
    )
    sp.add_argument("--matrix", required=True)
    sp.add_argument("--vertex", required=True, help="unit vector y0 (JSON vector file)")
    sp.add_argument("--functional", choices=("edge", "facet"), required=True)
    sp.add_argument("--restarts", type=int, default=8)
    sp.add_argument("--iters", type=int, default=2000)
    sp.add_argument("--seed", type=int, default=None)
    _add_tolerance_flags(sp)
    sp.set_defaults(run=_cmd_explore_rsh)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.run(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except InscribedExtremaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
