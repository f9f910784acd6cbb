"""Command-line front end.

Exit codes: 0 success, 1 input or validation error, 2 geometric
precondition failure (non-convex), 3 solver non-convergence.
"""

import argparse
import json
import os
import sys

import numpy as np

from . import conemetric as CM
from . import deformlab as D
from . import edgemap as EM
from . import fileio as IO
from . import groups as G
from . import polyhedra as P
from . import realize as R
from . import reporting
from .errors import (CombinatoricsChange, DivergedStep, FuchsianError,
                     HomotopyBlocked, NotConvex, SchemaError)

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_GEOMETRY = 2
EXIT_SOLVER = 3


def _out_path(args, name):
    os.makedirs(args.out, exist_ok=True)
    return os.path.join(args.out, name)


def _emit(args, name, obj):
    path = _out_path(args, name)
    IO.dump_json(obj, path)
    print(f"wrote {path}")


def cmd_build(args):
    params = IO.parse_polyhedron(IO.load_json(args.input))
    try:
        poly = P.build(params, L_max=args.max_word_length)
    except NotConvex as exc:
        print(f"not convex: {exc}", file=sys.stderr)
        if exc.witness is not None:
            print(f"witness: {exc.witness}", file=sys.stderr)
        return EXIT_GEOMETRY
    metric = CM.validate(P.induced_metric(poly))
    bundle = {
        "schema_version": IO.SCHEMA_VERSION,
        "convex": True,
        "word_length": poly.L_used,
        "cone_angles": [float(a) for a in poly.cone_angles],
        "edge_count": len(poly.edges),
        "face_count": len(poly.faces),
        "total_area": CM.total_area(metric),
        "gauss_bonnet_area": CM.gauss_bonnet_area(metric),
        "metric": IO.metric_to_json(metric),
        "faces": [[[int(s), w] for (s, w) in f.labels] for f in poly.faces],
        "edges": [{"seeds": [e.seed_a, e.seed_b], "word": e.word,
                   "length": float(e.length)} for e in poly.edges],
    }
    _emit(args, "bundle.json", bundle)
    IO.dump_json(IO.metric_to_json(metric), _out_path(args, "metric.json"))
    if args.obj:
        path = _out_path(args, "polyhedron.obj")
        with open(path, "w") as fh:
            fh.write(P.export_obj(poly, copies=args.copies))
        print(f"wrote {path}")
    print(f"convex build, {len(poly.edges)} fundamental edges, cone angles "
          + ", ".join(f"{a:.6f}" for a in poly.cone_angles))
    return EXIT_OK


def cmd_rigidity(args):
    params = IO.parse_polyhedron(IO.load_json(args.input))
    if params.preset is not None:
        print("rigidity needs a Z-V-C chart group (preset groups have no "
              "chart coordinates)", file=sys.stderr)
        return EXIT_INPUT
    try:
        poly = P.build(params, L_max=args.max_word_length)
    except NotConvex as exc:
        print(f"not convex: {exc}", file=sys.stderr)
        return EXIT_GEOMETRY
    report, ev = EM.rigidity_certificate(params, reference=poly,
                                         step=args.step)
    report["schema_version"] = IO.SCHEMA_VERSION
    _emit(args, "rigidity.json", report)
    reporting.write_csv(_out_path(args, "rigidity.csv"),
                        ["index", "singular_value"],
                        [(i + 1, f"{s:.17g}") for i, s in
                         enumerate(ev.singular_values)])
    reporting.rigidity_figure(ev.singular_values,
                              _out_path(args, "rigidity.png"))
    print(f"sigma_min = {report['sigma_min']:.6e}  sigma_max = "
          f"{report['sigma_max']:.6e}  verdict = {report['verdict']}")
    return EXIT_OK


def cmd_realize(args):
    metric = IO.parse_metric(IO.load_json(args.input))
    initial = None
    if args.initial:
        initial = IO.parse_polyhedron(IO.load_json(args.initial))
    problem = R.RealizationProblem(target=metric, initial=initial,
                                   tol=args.tol)
    try:
        result = R.solve(problem)
    except (HomotopyBlocked, DivergedStep) as exc:
        print(f"solver failed: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except CombinatoricsChange as exc:
        print(f"combinatorial alignment failed: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    out = {
        "schema_version": IO.SCHEMA_VERSION,
        "residual": result.residual,
        "iterations": result.iterations,
        "homotopy": result.homotopy,
        "params": IO.params_to_json(result.params),
    }
    _emit(args, "realization.json", out)
    reporting.write_csv(_out_path(args, "homotopy.csv"),
                        ["t", "iterations", "residual"],
                        [(r["t"], r["iterations"], f"{r['residual']:.17g}")
                         for r in result.homotopy])
    if result.homotopy:
        reporting.homotopy_figure(result.homotopy,
                                  _out_path(args, "homotopy.png"))
    print(f"converged with residual {result.residual:.3e} in "
          f"{result.iterations} iterations")
    return EXIT_OK


def cmd_checks(args):
    rng = np.random.default_rng(args.seed)
    suites = ("links", "caps", "pogorelov")
    if args.suite != "all":
        if args.suite not in suites:
            print(f"unknown suite {args.suite!r}; choose from "
                  f"{suites + ('all',)}", file=sys.stderr)
            return EXIT_INPUT
        suites = (args.suite,)
    reports = []
    if "links" in suites:
        params = P.PolyhedronParams(genus=2, preset="regular",
                                    base_points=[[0.0, 0.0]], heights=[1.0])
        poly = P.build(params)
        link = D.link_of_vertex(poly, 0)
        closure = abs(link.beta_sum() - 2 * np.pi)
        angle = abs(link.side_sum() - poly.cone_angles[0])
        reports.append({"check": "link_closure", "samples": 1,
                        "max_residual": closure, "pass": closure < 1e-8})
        reports.append({"check": "link_cone_angle", "samples": 1,
                        "max_residual": angle, "pass": angle < 1e-8})
        worst = -np.inf
        for _ in range(1000):
            cfg = D.sample_convex_link_config(rng)
            worst = max(worst, D.monotonicity_check(*cfg))
        reports.append({"check": "link_monotonicity", "samples": 1000,
                        "max_residual": worst, "pass": worst < 0.0})
    if "caps" in suites:
        worst_dim = True
        for k in range(50):
            nb = int(rng.integers(7, 32))
            if k % 2 == 0:
                V, faces, bnd = D.random_cap(rng, n_boundary=nb,
                                             n_interior=int(rng.integers(1, 9)))
            else:
                V, faces, bnd = D.pyramid_cap(rng, n_boundary=nb)
            sys_ = D.cap_system(V, faces, bnd)
            dim_p, _ = D.cap_rigidity_kernel(sys_, pin_boundary=True)
            dim_f, _ = D.cap_rigidity_kernel(sys_, pin_boundary=False)
            oracle = D.killing_fields_with_flat_boundary(V, bnd)
            if not (dim_p == oracle == 3 and dim_f == 6):
                worst_dim = False
        reports.append({"check": "cap_kernels", "samples": 50,
                        "max_residual": 0.0 if worst_dim else 1.0,
                        "pass": worst_dim})
    if "pogorelov" in suites:
        worst = 0.0
        for A in D.so31_basis():
            worst = max(worst, D.killing_transfer_check(A, n_points=500,
                                                        seed=args.seed))
        reports.append({"check": "pogorelov_killing", "samples": 6 * 500,
                        "max_residual": worst, "pass": worst < 1e-6})
        worst_n = 0.0
        cloud = D.sample_klein_cloud(500, 0.95, args.seed)
        rng2 = np.random.default_rng(args.seed + 1)
        for k in cloud[:200]:
            x = D._unklein(k)
            v = rng2.normal(size=4)
            from .hyperboloid import minkowski_dot
            v = v + minkowski_dot(v, x) * x
            (a, b), (c, dd) = D.pogorelov_norm_relations(x, v)
            worst_n = max(worst_n, abs(a - b), abs(c - dd))
        reports.append({"check": "pogorelov_norms", "samples": 200,
                        "max_residual": worst_n, "pass": worst_n < 1e-10})
        ctrl = D.control_field_residual(n_points=200, seed=args.seed)
        reports.append({"check": "pogorelov_control", "samples": 200,
                        "max_residual": ctrl, "pass": ctrl > 1e-2})
    out = {"schema_version": IO.SCHEMA_VERSION, "reports": reports}
    _emit(args, "checks.json", out)
    reporting.write_csv(_out_path(args, "checks.csv"),
                        ["check", "samples", "max_residual", "pass"],
                        [(r["check"], r["samples"], f"{r['max_residual']:.6e}",
                          r["pass"]) for r in reports])
    reporting.checks_figure(reports, _out_path(args, "checks.png"))
    for r in reports:
        print(f"{r['check']:>22}: {'PASS' if r['pass'] else 'FAIL'} "
              f"(max residual {r['max_residual']:.3e}, {r['samples']} samples)")
    return EXIT_OK if all(r["pass"] for r in reports) else EXIT_INPUT


def cmd_orbit(args):
    grp_data = IO.parse_group(IO.load_json(args.input))
    if grp_data["preset"] == "regular":
        group = G.regular_group(grp_data["genus"])
    else:
        group = G.group_from_polygon(
            G.build_polygon(grp_data["zvc"], genus=grp_data["genus"]))
    c2 = group.fundamental_center()
    seed = np.array([c2[0], c2[1], 0.0, c2[2]])
    orbit = G.enumerate_orbit(group, seed, args.max_word_length)
    K = orbit.points[:, :3] / orbit.points[:, 3:4]
    out = {
        "schema_version": IO.SCHEMA_VERSION,
        "genus": group.genus,
        "cutoff": orbit.cutoff,
        "count": len(orbit.points),
        "points": [{"word": orbit.words[ei], "klein": [float(v) for v in K[pid]]}
                   for pid, (si, ei) in enumerate(orbit.labels)],
    }
    _emit(args, "orbit.json", out)
    print(f"{len(orbit.points)} orbit points up to word length {orbit.cutoff}")
    return EXIT_OK


def make_parser():
    parser = argparse.ArgumentParser(
        prog="fuchsian",
        description="Convex Fuchsian polyhedra: construction, rigidity "
                    "certificates, and realization of hyperbolic cone metrics.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--tol", type=float, default=1e-8,
                       help="solver tolerance (default 1e-8)")
        p.add_argument("--seed", type=int, default=0, help="random seed")
        p.add_argument("--max-word-length", type=int, default=12,
                       help="orbit truncation cap (default 12)")

    p = sub.add_parser("build", help="build a polyhedron and its metric")
    p.add_argument("input", help="polyhedron.json")
    p.add_argument("--obj", action="store_true", help="also write an OBJ mesh")
    p.add_argument("--copies", type=int, default=0,
                   help="group translates to include in the OBJ")
    common(p)
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("rigidity", help="numerical rigidity certificate")
    p.add_argument("input", help="polyhedron.json")
    p.add_argument("--step", type=float, default=1e-6,
                   help="finite-difference relative step")
    common(p)
    p.set_defaults(func=cmd_rigidity)

    p = sub.add_parser("realize", help="recover the polyhedron from a metric")
    p.add_argument("input", help="metric.json")
    p.add_argument("--initial", help="polyhedron.json starting point")
    common(p)
    p.set_defaults(func=cmd_realize)

    p = sub.add_parser("checks", help="run deformation-lab check suites")
    p.add_argument("--suite", default="all",
                   help="links | caps | pogorelov | all")
    common(p)
    p.set_defaults(func=cmd_checks)

    p = sub.add_parser("orbit", help="dump a group orbit (debug)")
    p.add_argument("input", help="group.json")
    common(p)
    p.set_defaults(func=cmd_orbit)
    return parser


def main(argv=None):
    parser = make_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SchemaError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NotConvex as exc:
        print(f"not convex: {exc}", file=sys.stderr)
        return EXIT_GEOMETRY
    except (HomotopyBlocked, DivergedStep) as exc:
        print(f"solver failed: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except FuchsianError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
