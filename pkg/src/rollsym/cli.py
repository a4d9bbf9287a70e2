"""Command-line front end: reproducible simulation, rank analysis, symmetry
audits, algebra verification and report emission.

Every subcommand reads a JSON config describing the manifold pair, draws all
randomness from one recorded seed, honors a global tolerance override, and
writes deterministic reports: identical config and seed give byte-identical
output.  Exit codes partition the failure classes: 2 config or input
parsing, 3 integration left the coordinate domain, 4 ambiguous rank gap,
5 candidate/manifold mismatch, 1 residual or verdict failure.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .spaces import DomainError, GeodesicPath, GeometryError, SampledPath, from_spec
from .rolling import RollingPair, roll_along
from .curvature import rolling_curvature_operator, rolling_curvature_invertible
from .brackets import curvature_mismatch, flag_ranks
from .nilpotent import basis, flatness_obstruction, nil_bracket, verify_structure
from .symmetry import (
    KillingField,
    killing_catalog,
    killing_to_symmetry,
    perturb_candidate,
    sym0_dimension_probe,
    symmetry_residual,
    vertical_compatibility_residual,
)

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_CONFIG = 2
EXIT_DOMAIN = 3
EXIT_RANK_GAP = 4
EXIT_MISMATCH = 5

GAP_REQUIREMENT = 1e4


def _dump(obj, out_path):
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


class Run:
    """Config, seed and tolerances shared by the subcommands."""

    def __init__(self, args, need_pair=True):
        self.config = {}
        if args.config:
            with open(args.config) as fh:
                self.config = json.load(fh)
        self.seed = args.seed if args.seed is not None else int(self.config.get("seed", 0))
        tol_block = dict(self.config.get("tolerances", {}))
        if args.tol is not None:
            tol_block["residual"] = args.tol
        self.tolerances = {
            "residual": float(tol_block.get("residual", 1e-6)),
            "rank": float(tol_block.get("rank", 1e-8)),
            "step": float(tol_block.get("step", 1e-3)),
            "isometry": float(tol_block.get("isometry", 1e-7)),
        }
        self.out = args.out or self.config.get("output", {}).get("path")
        self.format = args.format or self.config.get("output", {}).get("format")
        self.pair = None
        if need_pair:
            pair_spec = self.config.get("manifold_pair")
            if not pair_spec or len(pair_spec) != 2:
                raise GeometryError("config must hold a two-element manifold_pair")
            m = from_spec(pair_spec[0])
            mh = from_spec(pair_spec[1])
            self.pair = RollingPair(m, mh)

    def rng(self):
        return np.random.default_rng(self.seed)

    def initial_state(self, rng):
        if self.config.get("initial_state"):
            return self.pair.state_from_json(self.config["initial_state"])
        return self.pair.random_state(rng)

    def report_header(self):
        return {"seed": self.seed, "tolerances": self.tolerances}


def _parse_path(pair, q0, spec):
    if spec.get("type") == "geodesic":
        direction = np.asarray(spec["direction"], float)
        direction = pair.space.project(q0.x, direction)
        length = float(spec.get("length", 1.0))
        nrm = np.sqrt(pair.space.inner_at(q0.x, direction, direction))
        if length == 0.0 or nrm == 0.0:
            return None
        return GeodesicPath(pair.space, q0.x, direction / nrm, length)
    if spec.get("type") == "samples":
        data = np.loadtxt(spec["file"], delimiter=",")
        return SampledPath(pair.space, data[:, 0], data[:, 1:])
    raise GeometryError(f"unknown path spec type {spec.get('type')!r}")


def cmd_simulate(args):
    run = Run(args)
    rng = run.rng()
    q0 = run.initial_state(rng)
    spec = json.loads(args.path_spec)
    step = args.step if args.step is not None else run.tolerances["step"]
    path = _parse_path(run.pair, q0, spec)
    if path is None:
        curve_times, states = np.array([0.0]), [q0]
        residual = q0.isometry_residual()
    else:
        curve = roll_along(q0, path, step=step)
        curve_times, states = curve.times, curve.states
        residual = float(curve.isometry_residuals().max())
    out_path = run.out or "trajectory.csv"
    if run.format != "json":  # the trajectory CSV schema is the default
        from .rolling import RollingCurve

        RollingCurve(run.pair, curve_times, states, None).write_csv(out_path)
    else:
        report = run.report_header()
        report["trajectory"] = [
            {"t": float(t), **s.to_json(), "isometry_residual": s.isometry_residual()}
            for t, s in zip(curve_times, states)
        ]
        report["max_isometry_residual"] = residual
        _dump(report, run.out)
    print(f"max isometry residual: {residual:.6e}")
    return EXIT_OK if residual < run.tolerances["isometry"] else EXIT_FAIL


def cmd_growth(args):
    run = Run(args)
    if not (1 <= args.depth <= 6):
        raise GeometryError("depth must lie in [1, 6]")
    rng = run.rng()
    q0 = run.initial_state(rng)
    report = flag_ranks(q0, depth=args.depth, tol=run.tolerances["rank"])
    n = run.pair.dim
    try:
        kappa = curvature_mismatch(run.pair)
    except GeometryError:
        kappa = None
    predicted = (n, n * (n + 1) // 2, 2 * n + n * (n - 1) // 2)[: args.depth]
    out = run.report_header()
    out["flag"] = report.to_json()
    out["kappa"] = kappa
    out["predicted_growth"] = list(predicted)
    if kappa == 0.0:
        out["note"] = "kappa=0"
    ambiguous = _rank_cut_ambiguous(report, run.tolerances["rank"])
    out["rank_cut_ambiguous"] = ambiguous
    _dump(out, run.out)
    if ambiguous:
        return EXIT_RANK_GAP
    if kappa is not None and kappa == 0.0:
        return EXIT_OK
    return EXIT_OK if tuple(report.ranks) == tuple(predicted[: len(report.ranks)]) else EXIT_FAIL


def _rank_cut_ambiguous(report, tol):
    """A rank decision is ambiguous when a singular value sits within the
    required factor of the accept/reject threshold."""
    for sv in report.singular_values:
        if sv[0] == 0.0:
            continue
        threshold = tol * sv[0]
        for s in sv:
            if s == 0.0:
                continue
            ratio = s / threshold if s > threshold else threshold / s
            if ratio < GAP_REQUIREMENT:
                return True
    return False


def _field_from_spec(manifold, gen_spec) -> KillingField:
    kind = gen_spec.get("type")
    catalog = killing_catalog(manifold)
    if kind == "translation":
        name = f"translation-{int(gen_spec['axis'])}"
    elif kind == "rotation":
        i, j = sorted(int(k) for k in gen_spec["plane"])
        name = f"rotation-{i}{j}"
    elif kind == "boost":
        name = f"boost-{int(gen_spec['axis'])}"
    else:
        raise GeometryError(f"unknown generator type {kind!r}")
    for field in catalog:
        if field.name == name:
            return field
    raise GeometryError(f"generator {name} does not exist on {manifold.kind}{manifold.dim}")


def cmd_audit(args):
    run = Run(args)
    rng = run.rng()
    cand_spec = json.loads(args.candidate)
    pair = run.pair
    tol = run.tolerances["residual"]
    if cand_spec.get("kind") == "catalog":
        fields = killing_catalog(pair.space_hat)
        cands = [killing_to_symmetry(pair, f) for f in fields]
    elif cand_spec.get("kind") == "killing":
        field = _field_from_spec(pair.space_hat, cand_spec.get("generator", {}))
        cands = [killing_to_symmetry(pair, field)]
    else:
        raise GeometryError(f"unknown candidate kind {cand_spec.get('kind')!r}")
    if cand_spec.get("perturb"):
        cands = [perturb_candidate(c, float(cand_spec["perturb"]), rng) for c in cands]

    samples = max(1, args.samples)
    stats = {"eq_drift": [], "eq_curvature": [], "vertical": []}
    for _ in range(samples):
        q = pair.random_state(rng)
        for cand in cands:
            cand.validate(q)
        X = pair.space.random_tangent(rng, q.x, unit=True)
        Y = pair.space.random_tangent(rng, q.x, unit=True)
        for cand in cands:
            r1, r2 = symmetry_residual(cand, q, X)
            r3 = vertical_compatibility_residual(cand, q, X, Y)
            stats["eq_drift"].append(r1)
            stats["eq_curvature"].append(r2)
            stats["vertical"].append(r3)
    out = run.report_header()
    out["samples"] = samples
    out["candidates"] = [c.name for c in cands]
    out["residuals"] = {
        key: {"max": float(np.max(vals)), "mean": float(np.mean(vals))}
        for key, vals in stats.items()
    }
    q0 = pair.random_state(run.rng())
    probe = sym0_dimension_probe(q0, [c for c in cands if c.is_base_fixing()])
    out["sym0_dimension"] = probe.to_json()
    _dump(out, run.out)
    failing = [k for k, v in out["residuals"].items() if v["max"] >= tol]
    if failing:
        print(f"residuals above tolerance {tol:g}: {', '.join(sorted(failing))}")
        return EXIT_FAIL
    return EXIT_OK


def cmd_killing(args):
    run = Run(args)
    mh = run.pair.space_hat
    fields = killing_catalog(mh)
    out = run.report_header()
    out["manifold"] = mh.to_spec()
    out["dimension"] = len(fields)
    out["fields"] = [f.name for f in fields]
    _dump(out, run.out)
    return EXIT_OK


def cmd_rol(args):
    run = Run(args)
    rng = run.rng()
    q0 = run.initial_state(rng)
    op = rolling_curvature_operator(q0)
    sv = np.linalg.svd(op, compute_uv=False)
    verdict, cond = rolling_curvature_invertible(q0, tol=run.tolerances["rank"])
    out = run.report_header()
    out["state"] = q0.to_json()
    out["operator"] = op.tolist()
    out["singular_values"] = sv.tolist()
    out["invertible"] = verdict
    out["condition_number"] = None if cond == float("inf") else cond
    _dump(out, run.out)
    return EXIT_OK


def cmd_nilpotent(args):
    run = Run(args, need_pair=False)
    n = args.n
    report = verify_structure(n)
    bas = basis(n)
    names = (
        [f"N{i}" for i in range(n)]
        + [f"B{i}{j}" for i in range(n) for j in range(i + 1, n)]
        + [f"Z{i}" for i in range(n)]
    )
    table = []
    for i, x in enumerate(bas):
        for j, y in enumerate(bas):
            if i >= j:
                continue
            br = nil_bracket(x, y)
            if not br.is_zero():
                coeffs = {}
                for k, z in enumerate(bas):
                    c = _coefficient(br, z)
                    if c != 0:
                        coeffs[names[k]] = float(c)
                table.append({"x": names[i], "y": names[j], "bracket": coeffs})
    out = run.report_header()
    out["verification"] = {k: (list(v) if isinstance(v, tuple) else v) for k, v in report.items()}
    out["structure_constants"] = table
    _dump(out, run.out)
    return EXIT_OK if report["ok"] else EXIT_FAIL


def _coefficient(vec, basis_elem):
    for part, bpart in ((vec.a, basis_elem.a), (vec.b, basis_elem.b), (vec.c, basis_elem.c)):
        for v, b in zip(part, bpart):
            if b != 0:
                return v / b if b != 1 else v
    return 0


def cmd_flatness(args):
    run = Run(args, need_pair=False)
    report = flatness_obstruction(_maybe_rational(args.K), _maybe_rational(args.K_hat),
                                  _maybe_rational(args.beta), n=args.n)
    out = run.report_header()
    out["obstruction"] = report.to_json()
    _dump(out, run.out)
    return EXIT_OK


def _maybe_rational(text):
    from fractions import Fraction

    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        return float(text)


def _add_global_flags(parser, suppress=False):
    kw = {"default": argparse.SUPPRESS} if suppress else {"default": None}
    parser.add_argument("--config", help="run config JSON path", **kw)
    parser.add_argument("--seed", type=int, help="seed override", **kw)
    parser.add_argument("--tol", type=float, help="residual tolerance override", **kw)
    parser.add_argument("--out", help="output path", **kw)
    parser.add_argument("--format", choices=("json", "csv"), **kw)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="rollsym",
        description="Rolling space forms: simulation, growth vectors, symmetry audits, "
        "nilpotent structure and flatness obstructions.",
    )
    _add_global_flags(parser)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="roll along a driving path, emit the trajectory")
    _add_global_flags(p, suppress=True)
    p.add_argument("--path-spec", required=True,
                   help='JSON, e.g. {"type":"geodesic","direction":[...],"length":3.14}')
    p.add_argument("--step", type=float, default=None)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("growth", help="flag ranks of the rolling distribution")
    _add_global_flags(p, suppress=True)
    p.add_argument("--depth", type=int, default=3)
    p.set_defaults(func=cmd_growth)

    p = sub.add_parser("symmetry-check", aliases=["audit"], help="residual sweep for a candidate")
    _add_global_flags(p, suppress=True)
    p.add_argument("--candidate", required=True,
                   help='JSON, e.g. {"kind":"killing","generator":{"type":"rotation","plane":[0,1]}}')
    p.add_argument("--samples", type=int, default=20)
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("killing", help="list the Killing catalog of the second factor")
    _add_global_flags(p, suppress=True)
    p.set_defaults(func=cmd_killing)

    p = sub.add_parser("rol", help="rolling-curvature operator at a state")
    _add_global_flags(p, suppress=True)
    p.set_defaults(func=cmd_rol)

    p = sub.add_parser("nilpotent", help="verify the graded algebra, emit structure constants")
    _add_global_flags(p, suppress=True)
    p.add_argument("--n", type=int, default=3)
    p.set_defaults(func=cmd_nilpotent)

    p = sub.add_parser("flatness", help="non-flatness obstruction arithmetic")
    _add_global_flags(p, suppress=True)
    p.add_argument("--K", required=True)
    p.add_argument("--K-hat", dest="K_hat", required=True)
    p.add_argument("--beta", default="1")
    p.add_argument("--n", type=int, default=3)
    p.set_defaults(func=cmd_flatness)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DomainError as exc:
        print(f"domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except (GeometryError, FileNotFoundError, json.JSONDecodeError, KeyError) as exc:
        message = str(exc)
        code = EXIT_MISMATCH if _is_mismatch(message) else EXIT_CONFIG
        print(f"error: {message}", file=sys.stderr)
        return code


def _is_mismatch(message):
    needles = ("does not exist on", "must live on the second factor", "generator",
               "covers constant-curvature manifolds only")
    return any(n in message for n in needles)


if __name__ == "__main__":
    sys.exit(main())
