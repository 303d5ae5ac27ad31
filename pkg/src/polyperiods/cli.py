"""Command-line interface.

Subcommands::

    polyperiods validate  (--mesh PATH | --spec PATH | --generate NAME:ARGS)
    polyperiods compute   (--mesh PATH | --spec PATH | --generate NAME:ARGS)
                          [--scheme S] [--refine N] [--root IDX] [--out json|text] [--tol X]
    polyperiods compare   LEFT RIGHT
    polyperiods diagnose  (--mesh ... ) --function PATH

``LEFT``/``RIGHT`` of ``compare`` are reference names (``omega1``, ...) or
JSON files holding a ``compute`` result or a bare ``{"re": .., "im": ..}``
matrix.

Exit codes: 0 success, 1 usage or input error, 2 validation failure
(including non-Delaunay edges), 3 genus 0, 4 solver failure, 5 genus
mismatch.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from .conformal import build_structure, edge_weights, min_angle, DELAUNAY_TOL
from .dec import Cochain0, area, conformal_energy, dirichlet_energy
from .errors import (
    DelaunayViolation,
    MeshError,
    NormalizationError,
    SolverError,
    TopologyError,
)
from .mesh_io import load_mesh_file, topology_report
from .periods import compute_periods
from .siegel import compare as siegel_compare, siegel_reduce
from .surfaces import (
    build_square_tiled,
    builtin_spec,
    flat_torus,
    load_spec,
    reference,
    reference_matrices,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INVALID = 2
EXIT_GENUS0 = 3
EXIT_SOLVER = 4
EXIT_MISMATCH = 5

THIN_ANGLE_DEG = 10.0
GENERATORS = ("flat-torus", "omega1", "omega2", "omega3")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


class CliError(Exception):
    def __init__(self, message, code):
        super().__init__(message)
        self.code = code


# ---------------------------------------------------------------------------
# serialization


def _fmt(x):
    if x is None:
        return "null"
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if not math.isfinite(x):
            return "null"
        if x == 0.0:
            x = 0.0  # drop the sign of negative zero
        return format(x, ".17g")
    if isinstance(x, str):
        return json.dumps(x)
    if isinstance(x, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_fmt(v)}" for k, v in x.items()) + "}"
    if isinstance(x, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_fmt(v) for v in x) + "]"
    raise TypeError(f"cannot serialize {type(x).__name__}")


def dumps(obj):
    """Deterministic JSON with 17 significant digits for every float."""
    return _fmt(obj) + "\n"


def _cm(a):
    a = np.asarray(a, dtype=complex)
    return {"re": a.real.tolist(), "im": a.imag.tolist()}


def result_document(result, graph, scheme):
    info = graph.info
    return {
        "genus": result.genus,
        "scheme": scheme,
        "pi": _cm(result.pi),
        "pi_star": _cm(result.pi_star),
        "pi_dual": _cm(result.pi_dual),
        "pi_canonical": None if result.pi_canonical is None else _cm(result.pi_canonical),
        "positivity_margin": result.positivity_margin,
        "residuals": {
            "harmonic": result.residuals["harmonic"],
            "closedness": result.residuals["closedness"],
            "normalization": result.residuals["normalization"],
            "symmetry": result.residuals["symmetry"],
            "pi_pi_star": result.residuals["pi_pi_star"],
            "period_exactness": result.residuals["period_exactness"],
        },
        "mesh": {
            "vertices": graph.n_vertices,
            "edges": graph.n_edges,
            "faces": graph.n_faces,
            "min_angle_deg": info.get("min_angle_deg"),
            "min_rho": float(graph.rho.min()),
        },
        "source": info.get("source"),
        "flags": list(result.flags),
    }


def read_matrix(doc):
    """Complex matrix from ``{"re", "im"}`` or a compute result (its ``pi``)."""
    if "pi" in doc:
        doc = doc["pi"]
    re = np.atleast_2d(np.asarray(doc["re"], dtype=float))
    im = np.atleast_2d(np.asarray(doc["im"], dtype=float))
    if re.shape != im.shape or re.shape[0] != re.shape[1]:
        raise CliError("matrix must be square with matching re/im parts", EXIT_USAGE)
    return re + 1j * im


# ---------------------------------------------------------------------------
# inputs


def _parse_generator(text):
    name, _, args = text.partition(":")
    name = name.strip().lower()
    if name not in GENERATORS:
        raise CliError(f"unknown generator {name!r}; choose from {', '.join(GENERATORS)}", EXIT_USAGE)
    return name, args


def _generate(text, refine):
    name, args = _parse_generator(text)
    if name == "flat-torus":
        # flat-torus:NxM or flat-torus:NxM:TAU with TAU like 0.5+0.866j
        size, _, tau = args.partition(":")
        try:
            n, _, m = size.lower().partition("x")
            n = int(n)
            m = int(m) if m else n
            tau = complex(tau.replace("i", "j")) if tau else 1j
        except ValueError as exc:
            raise CliError(f"bad flat-torus arguments {args!r}: {exc}", EXIT_USAGE) from None
        return flat_torus(n * refine, m * refine, tau)
    if args:
        try:
            refine = int(args)
        except ValueError:
            raise CliError(f"bad refinement {args!r}", EXIT_USAGE) from None
    return build_square_tiled(builtin_spec(name), refine)


def _check_source(args):
    given = [x for x in (args.mesh, args.spec, args.generate) if x is not None]
    if len(given) != 1:
        raise CliError("give exactly one of --mesh, --spec, --generate", EXIT_USAGE)


def _scheme_for(args):
    if args.mesh is not None:
        return args.scheme or "intrinsic"
    if args.scheme not in (None, "unit"):
        raise CliError("abstract square-tiled inputs require --scheme unit", EXIT_USAGE)
    return "unit"


def load_structure(args):
    """Weighted graph for the configured input plus the embedded mesh, if any."""
    _check_source(args)
    scheme = _scheme_for(args)
    refine = getattr(args, "refine", 1)
    if refine < 1:
        raise CliError("--refine must be at least 1", EXIT_USAGE)
    if args.mesh is not None:
        mesh = load_mesh_file(args.mesh)
        return build_structure(mesh, scheme), mesh, scheme
    if args.spec is not None:
        return build_square_tiled(load_spec(args.spec), refine), None, scheme
    return _generate(args.generate, refine), None, scheme


# ---------------------------------------------------------------------------
# commands


def cmd_validate(args, out):
    _check_source(args)
    if args.mesh is None:
        graph, _, _ = load_structure(args)
        d = graph.diagnostics()
        print(f"vertices {d['vertices']}  edges {d['edges']}  faces {d['faces']}  genus {d['genus']}", file=out)
        print(f"min rho {d['min_rho']:.6g}", file=out)
        print("valid", file=out)
        return EXIT_OK
    mesh = load_mesh_file(args.mesh)
    rep = topology_report(mesh)
    print(
        f"vertices {rep.vertex_count}  edges {rep.edge_count}  faces {rep.face_count}"
        f"  euler {rep.euler_characteristic}  genus {rep.genus}",
        file=out,
    )
    angle = min_angle(mesh)
    print(f"min angle {angle:.4g} deg", file=out)
    if angle < THIN_ANGLE_DEG:
        print(f"warning: thin triangles (min angle below {THIN_ANGLE_DEG:g} deg)", file=out)
    schemes = [args.scheme] if args.scheme else ["intrinsic", "extrinsic"]
    failed = False
    for scheme in schemes:
        rho, edges = edge_weights(mesh, scheme)
        bad = np.flatnonzero(~(rho > DELAUNAY_TOL))
        print(f"{scheme}: min rho {rho.min():.6g}, {len(bad)} non-Delaunay edge(s)", file=out)
        for e in bad:
            print(f"  edge {e}: {edges[e, 0]}-{edges[e, 1]} rho={rho[e]:.6g}", file=out)
        failed |= len(bad) > 0
    if failed:
        print("invalid", file=out)
        return EXIT_INVALID
    print("valid", file=out)
    return EXIT_OK


def cmd_compute(args, out):
    graph, _, scheme = load_structure(args)
    if graph.genus < 1:
        raise CliError("genus 0 surface has no periods", EXIT_GENUS0)
    root = args.root if args.root is not None else 0
    if not 0 <= root < graph.n_vertices:
        raise CliError(f"root {root} out of range", EXIT_USAGE)
    result = compute_periods(graph, root=root)
    tol = args.tol
    for key in ("harmonic", "closedness", "normalization", "period_exactness"):
        if result.residuals[key] > tol:
            raise CliError(f"{key} residual {result.residuals[key]:.3g} above {tol:g}", EXIT_SOLVER)
    doc = result_document(result, graph, scheme)
    if args.out == "json":
        out.write(dumps(doc))
    else:
        _print_text(doc, result, out)
    return EXIT_OK


def _print_matrix(label, m, out):
    print(f"{label}:", file=out)
    for row in np.atleast_2d(m):
        print("  " + "  ".join(f"{z.real:+.12f}{z.imag:+.12f}i" for z in row), file=out)


def _print_text(doc, result, out):
    mesh = doc["mesh"]
    print(
        f"genus {doc['genus']}  scheme {doc['scheme']}  vertices {mesh['vertices']}"
        f"  edges {mesh['edges']}  faces {mesh['faces']}",
        file=out,
    )
    _print_matrix("period matrix", result.pi, out)
    _print_matrix("primal reading", result.pi_star, out)
    _print_matrix("dual reading", result.pi_dual, out)
    if result.pi_canonical is not None:
        _print_matrix("basis-independent variant", result.pi_canonical, out)
    for k, v in doc["residuals"].items():
        print(f"{k:>17s}: {v:.3e}", file=out)
    for f in doc["flags"]:
        print(f"warning: {f}", file=out)


def _resolve_matrix(text):
    names = {r.name for r in reference_matrices()}
    if text in names:
        return reference(text).matrix
    try:
        with open(text) as fh:
            return read_matrix(json.load(fh))
    except FileNotFoundError:
        raise CliError(f"{text!r} is neither a reference name ({', '.join(sorted(names))}) nor a file", EXIT_USAGE) from None
    except (KeyError, ValueError) as exc:
        raise CliError(f"cannot read a matrix from {text!r}: {exc}", EXIT_USAGE) from None


def cmd_compare(args, out):
    a, b = _resolve_matrix(args.left), _resolve_matrix(args.right)
    if a.shape != b.shape:
        raise CliError(f"genus mismatch: {a.shape[0]} vs {b.shape[0]}", EXIT_MISMATCH)
    try:
        ra, rb = siegel_reduce(a), siegel_reduce(b)
    except ValueError as exc:
        raise CliError(str(exc), EXIT_USAGE) from None
    dist = siegel_compare(a, b)
    if args.out == "json":
        out.write(dumps({"left": _cm(ra.omega), "right": _cm(rb.omega), "distance": dist}))
    else:
        _print_matrix("reduced left", ra.omega, out)
        _print_matrix("reduced right", rb.omega, out)
        print(f"distance {dist:.6e}", file=out)
    return EXIT_OK


def read_function(path):
    """Complex values, one per line: ``re im``, ``re``, or a Python complex literal."""
    vals = []
    with open(path) as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.replace(",", " ").split()
            try:
                if len(parts) == 2:
                    vals.append(complex(float(parts[0]), float(parts[1])))
                elif len(parts) == 1:
                    vals.append(complex(parts[0].replace("i", "j")))
                else:
                    raise ValueError(line)
            except ValueError:
                raise CliError(f"cannot parse value {line!r}", EXIT_USAGE) from None
    return np.array(vals, dtype=complex)


def extend_to_faces(graph, values):
    """Values on faces as the mean over each face's vertices."""
    fv = graph.face_vertices
    return np.array([values[list(f)].mean() for f in fv])


def cmd_diagnose(args, out):
    graph, _, _ = load_structure(args)
    vals = read_function(args.function)
    V, F = graph.n_vertices, graph.n_faces
    if len(vals) == V + F:
        f = Cochain0(graph, vals)
    elif len(vals) == V:
        f = Cochain0.from_parts(graph, vals, extend_to_faces(graph, vals))
    else:
        raise CliError(f"expected {V} or {V + F} values, got {len(vals)}", EXIT_USAGE)
    ed, ec, a = dirichlet_energy(f), conformal_energy(f), area(f)
    resid = abs(ec - (ed - 2 * a))
    doc = {
        "dirichlet_energy": ed,
        "conformal_energy": ec,
        "area": a,
        "identity_residual": resid,
    }
    if args.out == "json":
        out.write(dumps(doc))
    else:
        for k, v in doc.items():
            print(f"{k:>17s}: {v:.12g}", file=out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# entry point


def _add_source(p, refine=True):
    g = p.add_argument_group("input (exactly one)")
    g.add_argument("--mesh", metavar="PATH", help="triangle mesh (OBJ)")
    g.add_argument("--spec", metavar="PATH", help="square-tiled gluing (JSON)")
    g.add_argument(
        "--generate",
        metavar="NAME:ARGS",
        help="flat-torus:NxM[:TAU], omega1, omega2 or omega3[:REFINE]",
    )
    p.add_argument("--scheme", choices=("intrinsic", "extrinsic", "unit"))
    if refine:
        p.add_argument("--refine", type=int, default=1, metavar="N")


def build_parser():
    p = _Parser(prog="polyperiods", description="Discrete period matrices of polyhedral surfaces.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    v = sub.add_parser("validate", help="check topology and the Delaunay condition")
    _add_source(v)

    c = sub.add_parser("compute", help="compute the period matrix")
    _add_source(c)
    c.add_argument("--root", type=int, metavar="IDX")
    c.add_argument("--out", choices=("json", "text"), default="json")
    c.add_argument("--tol", type=float, default=1e-8, metavar="X", help="residual limit (default 1e-8)")

    m = sub.add_parser("compare", help="Siegel-reduced distance of two period matrices")
    m.add_argument("left")
    m.add_argument("right")
    m.add_argument("--out", choices=("json", "text"), default="text")

    d = sub.add_parser("diagnose", help="energies of a vertex function")
    _add_source(d)
    d.add_argument("--function", required=True, metavar="PATH")
    d.add_argument("--out", choices=("json", "text"), default="text")
    return p


COMMANDS = {
    "validate": cmd_validate,
    "compute": cmd_compute,
    "compare": cmd_compare,
    "diagnose": cmd_diagnose,
}


def main(argv=None, out=None):
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args, out)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except DelaunayViolation as exc:
        print(f"error: {exc}", file=sys.stderr)
        for e, t, h, r in exc.edges:
            print(f"  edge {e}: {t}-{h} rho={r:.6g}", file=sys.stderr)
        return EXIT_INVALID
    except MeshError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except TopologyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_GENUS0 if "genus 0" in str(exc) else EXIT_INVALID
    except (SolverError, NormalizationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, KeyError) as exc:
        # malformed gluing files and JSON input
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
