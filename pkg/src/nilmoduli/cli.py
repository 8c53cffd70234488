"""Command-line front end.

Subcommands: describe, canonicalize, isometry, hermitian, tables, verify.
Structured output is JSON (sorted keys, schema "nilmoduli/1") on stdout;
--format text renders a short human summary instead.  Exit codes:
0 success, 1 verification failure, 2 input/parse error, 3 not SPD,
4 solver/canonicalization failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

import numpy as np

from . import algebra as al
from . import automorphisms as auts
from . import hermitian as hm
from . import moduli as mo
from .errors import (
    CanonicalizationFailed,
    InvalidForm,
    NilmoduliError,
    NotSPD,
    ParseError,
)

SCHEMA = "nilmoduli/1"

EXIT_OK = 0
EXIT_VERIFY_FAIL = 1
EXIT_INPUT = 2
EXIT_NOT_SPD = 3
EXIT_SOLVER = 4


def _report(command, inputs, outputs, passed=True, t0=None):
    return {
        "schema": SCHEMA,
        "command": command,
        "inputs": inputs,
        "outputs": outputs,
        "passed": bool(passed),
        "wall_time_s": None if t0 is None else round(time.time() - t0, 6),
    }


def _emit(report, fmt, text_lines=None):
    if (fmt or "json") == "text" and text_lines is not None:
        print("\n".join(text_lines))
    else:
        print(json.dumps(report, sort_keys=True))


def _seed(args):
    if getattr(args, "seed", None) is not None:
        return args.seed
    env = os.environ.get("NILMODULI_SEED")
    return int(env) if env else 0


def _load_form(args):
    data = json.loads(args.form)
    if "tag" not in data:
        data = dict(data)
        data["tag"] = args.algebra
    return mo.form_from_dict(data)


# ---------------------------------------------------------------------------
# describe


def cmd_describe(args):
    t0 = time.time()
    alg = al.get_algebra(args.algebra)
    brackets = []
    b = alg.bracket_tensor
    for i in range(alg.dim):
        for j in range(i + 1, alg.dim):
            v = b[:, i, j]
            if np.any(v != 0.0):
                terms = " + ".join(
                    f"{v[k]:+g} e{k + 1}" for k in range(alg.dim) if v[k] != 0.0
                )
                brackets.append(f"[e{i + 1}, e{j + 1}] = {terms}")
    step = al.nilpotency_step(alg)
    der_dim = auts.derivation_algebra(alg).dimension
    outputs = {
        "label": alg.label,
        "salamon": al.render_salamon(alg),
        "brackets": brackets,
        "nilpotency_step": step,
        "derivation_dimension": der_dim,
        "jacobi_residual": al.jacobi_residual(alg),
    }
    lines = [f"algebra {alg.label} = {outputs['salamon']}"]
    lines += [f"  {s}" for s in brackets]
    lines.append(f"  nilpotency step: {step}")
    lines.append(f"  dim Der = {der_dim}")
    if alg.label in al.BUILTIN_IDS:
        reps = auts.component_representatives(alg)
        outputs["component_count"] = len(reps)
        lines.append(f"  Aut components: {len(reps)}")
    _emit(_report("describe", {"algebra": args.algebra}, outputs, t0=t0), args.format, lines)
    return EXIT_OK


# ---------------------------------------------------------------------------
# canonicalize


def cmd_canonicalize(args):
    t0 = time.time()
    data = json.loads(open(args.input).read() if args.input else args.metric)
    matrix = np.asarray(data["matrix"], dtype=float)
    algebra = data.get("algebra", args.algebra)
    metric = mo.Metric(algebra, matrix)
    form, witness = mo.canonicalize(algebra, metric, tol=args.tol)
    outputs = {
        "form": form.to_json_dict(),
        "witness": witness.to_json_dict(),
        "certificate_bound": args.tol * max(1.0, float(np.max(np.abs(matrix)))),
    }
    lines = [
        f"canonical form: {form.to_json_dict()}",
        f"witness residual: {witness.residual:.3e}",
    ]
    _emit(_report("canonicalize", {"algebra": algebra}, outputs, t0=t0), args.format, lines)
    return EXIT_OK


# ---------------------------------------------------------------------------
# isometry


def cmd_isometry(args):
    t0 = time.time()
    form = _load_form(args)
    desc = mo.isometry_group(args.algebra, form)
    report = mo.verify_isometry_group(args.algebra, form, desc)
    outputs = {"descriptor": desc.to_json_dict(), "verification": report.to_json_dict()}
    lines = [
        f"isotropy group: {desc.name}",
        f"  continuous dim {desc.continuous_dim}, components {desc.component_count}, "
        f"order {'inf' if desc.finite_order == float('inf') else int(desc.finite_order)}",
        f"  verification: {'pass' if report.passed else 'FAIL'}",
    ]
    _emit(
        _report("isometry", {"algebra": args.algebra, "form": form.to_json_dict()},
                outputs, passed=report.passed, t0=t0),
        args.format, lines,
    )
    return EXIT_OK if report.passed else EXIT_VERIFY_FAIL


# ---------------------------------------------------------------------------
# hermitian


def cmd_hermitian(args):
    t0 = time.time()
    form = _load_form(args)
    label = al.get_algebra(args.algebra).label
    outputs = {}
    lines = []
    if label == "h5":
        sols = hm.h5_hermitian_solutions(form)
        outputs["solutions"] = {k: v.to_json_dict() for k, v in sols.items()}
    elif label == "h4":
        sols = hm.h4_hermitian_solutions(form)
        outputs["solutions"] = {k: v.to_json_dict() for k, v in sols.items()}
    elif label == "h6":
        sols = hm.h6_hermitian_solutions(form)
        outputs["solutions"] = {"all": [s.to_json_dict() for s in sols]}
    elif label == "h2":
        cands = hm.h2_hermitian_candidates(form)
        outputs["candidates"] = [c.to_json_dict() for c in cands]
    elif label in ("h9", "h9hat"):
        outputs["note"] = (
            "closed-form families: J0 conjugates (sigma/G'); use --search for the oracle"
        )
    for key, val in outputs.items():
        if key == "solutions":
            for branch, sset in val.items():
                kind = sset.get("kind", "finite") if isinstance(sset, dict) else "finite"
                if kind == "sphere":
                    lines.append(f"{branch}: sphere (every (a,b,c) on S^2)")
                else:
                    entries = sset["solutions"] if isinstance(sset, dict) else sset
                    for s in entries:
                        lines.append(
                            f"{s['branch']}: (a,b,c) = ({s['a']:+.6f}, {s['b']:+.6f}, {s['c']:+.6f})"
                        )
        elif key == "candidates":
            for c in val:
                lines.append(
                    f"candidate (a,b,c) = ({c['a']:+.6f}, {c['b']:+.6f}, {c['c']:+.6f})"
                    f" verified={c['verified']} abelian={c['abelian']}"
                )
    if args.search:
        res = hm.hermitian_search(args.algebra, mo.realize(form), budget=args.budget)
        outputs["search"] = res.to_json_dict()
        lines.append(
            f"search: {'found' if res.found else 'none found'} "
            f"(best residual {res.residual:.3e}, {res.starts_used} starts)"
        )
    _emit(
        _report("hermitian", {"algebra": args.algebra, "form": form.to_json_dict()},
                outputs, t0=t0),
        args.format, lines,
    )
    return EXIT_OK


# ---------------------------------------------------------------------------
# tables


def _grid_h5_forms():
    out = []
    for (r, s) in ((0.49, 0.25), (1.0, 0.25), (0.49, 0.49), (1.0, 1.0)):
        for F in (0.0, 0.25):
            for (E, G) in ((1.0, 1.0), (1.0, 2.25)):
                out.append(mo.H5Form(r, s, E, F, G))
    return out


def cmd_tables(args):
    t0 = time.time()
    tables = {}

    rows = []
    for form in _grid_h5_forms():
        sols = hm.h5_hermitian_solutions(form)
        rows.append({"form": form.to_json_dict(),
                     "J1": sols["J1"].to_json_dict(), "J2": sols["J2"].to_json_dict()})
    tables["h5_hermitian"] = rows

    rows = []
    for r in (0.25, 1.0):
        for F in (0.0, 0.25):
            for (E, G) in ((1.0, 1.0), (1.0, 2.25)):
                form = mo.H4Form(r, E, F, G)
                sols = hm.h4_hermitian_solutions(form)
                rows.append({"form": form.to_json_dict(),
                             "J1": sols["J1"].to_json_dict(), "J2": sols["J2"].to_json_dict()})
    tables["h4_hermitian"] = rows

    rows = []
    for (E, G) in ((1.0, 1.0), (1.0, 4.0), (2.0, 3.0)):
        form = mo.H6Form(E, G)
        rows.append({"form": form.to_json_dict(),
                     "solutions": [s.to_json_dict() for s in hm.h6_hermitian_solutions(form)]})
    tables["h6_hermitian"] = rows

    iso = {}
    iso["h5"] = [
        {"case": c, "descriptor": mo.isometry_group("h5", f).to_json_dict()}
        for c, f in (
            ("0<s<r<1, F!=0", mo.H5Form(0.5, 0.3, 1.0, 0.1, 2.0)),
            ("0<s<r<1, F=0", mo.H5Form(0.5, 0.3, 1.0, 0.0, 2.0)),
            ("0<s<r=1, F!=0", mo.H5Form(1.0, 0.3, 1.0, 0.1, 2.0)),
            ("0<s<r=1, F=0, G!=E", mo.H5Form(1.0, 0.3, 1.0, 0.0, 2.0)),
            ("0<s<r=1, F=0, G=E", mo.H5Form(1.0, 0.3, 1.5, 0.0, 1.5)),
            ("0<s=r<1, F!=0", mo.H5Form(0.6, 0.6, 1.0, 0.1, 2.0)),
            ("0<s=r<1, F=0", mo.H5Form(0.6, 0.6, 1.0, 0.0, 2.0)),
            ("s=r=1, F!=0", mo.H5Form(1.0, 1.0, 1.0, 0.1, 2.0)),
            ("s=r=1, F=0, G!=E", mo.H5Form(1.0, 1.0, 1.0, 0.0, 2.0)),
            ("s=r=1, F=0, G=E", mo.H5Form(1.0, 1.0, 1.5, 0.0, 1.5)),
        )
    ]
    iso["h6"] = [
        {"case": "a=b", "descriptor": mo.isometry_group("h6", mo.H6Form(2.0, 2.0)).to_json_dict()},
        {"case": "a!=b", "descriptor": mo.isometry_group("h6", mo.H6Form(2.0, 3.0)).to_json_dict()},
    ]
    iso["h4"] = [
        {"case": c, "descriptor": mo.isometry_group("h4", f).to_json_dict()}
        for c, f in (
            ("r=1, b=0", mo.H4Form(1.0, 1.2, 0.0, 0.7)),
            ("r=1, b!=0", mo.H4Form(1.0, 1.2, 0.3, 0.7)),
            ("r!=1, b=0", mo.H4Form(0.5, 1.2, 0.0, 0.7)),
            ("r!=1, b!=0", mo.H4Form(0.5, 1.2, 0.3, 0.7)),
        )
    ]
    iso["h2"] = [
        {"case": c, "descriptor": mo.isometry_group("h2", f).to_json_dict()}
        for c, f in (
            ("a=b=0, F=0, E=G", mo.H2Form(0.0, 0.0, 1.5, 0.0, 1.5)),
            ("a=b=0, F=0, E!=G", mo.H2Form(0.0, 0.0, 1.0, 0.0, 2.0)),
            ("a=b=0, F!=0, E=G", mo.H2Form(0.0, 0.0, 1.5, 0.4, 1.5)),
            ("a=b=0, F!=0, E!=G", mo.H2Form(0.0, 0.0, 1.0, 0.4, 2.0)),
            ("a=b!=0, E=G", mo.H2Form(0.4, 0.4, 1.5, 0.2, 1.5)),
            ("a=b!=0, E!=G", mo.H2Form(0.4, 0.4, 1.0, 0.2, 2.0)),
            ("0<=a<b, E=G", mo.H2Form(0.2, 0.6, 1.5, 0.3, 1.5)),
            ("0<=a<b, E!=G", mo.H2Form(0.2, 0.6, 1.0, 0.3, 2.0)),
        )
    ]
    iso["h9"] = [
        {"case": f"k={k}", "descriptor": mo.isometry_group("h9hat", f).to_json_dict()}
        for k, f in (
            (0, mo.H9Form(1.2, 0.8, 1.5, 0.3, 0.7, 0.4)),
            (1, mo.H9Form(1.2, 0.8, 1.5, 0.0, 0.7, 0.4)),
            (2, mo.H9Form(1.2, 0.8, 1.5, 0.0, 0.0, 0.4)),
            (3, mo.H9Form(1.2, 0.8, 1.5, 0.0, 0.0, 0.0)),
        )
    ]
    tables["isometry"] = iso

    lines = [f"{k}: {len(v)} rows" for k, v in tables.items() if k != "isometry"]
    lines += [f"isometry[{k}]: {len(v)} cases" for k, v in iso.items()]
    del t0  # byte-identical output across runs: no wall time in this report
    _emit(_report("tables", {}, tables, t0=None), args.format, lines)
    return EXIT_OK


# ---------------------------------------------------------------------------
# verify


def _shrink_failure(check, base, perturbed, rounds=12):
    """Halve the perturbation toward ``base`` while the check still fails."""
    lo, hi = np.asarray(base, dtype=float), np.asarray(perturbed, dtype=float)
    for _ in range(rounds):
        mid = 0.5 * (lo + hi)
        if check(mid):
            lo = mid
        else:
            hi = mid
    return hi


def verify_suite_algebra(seed, algebras=None):
    failures = []
    checked = 0
    algs = algebras or [al.builtin(n) for n in al.BUILTIN_IDS]
    rng = np.random.default_rng(seed)
    for alg in algs:
        checked += 1
        if al.jacobi_residual(alg) > 1e-14:
            failures.append((f"jacobi[{alg.label}]", al.jacobi_residual(alg)))
        for _ in range(100):
            x, y = rng.normal(size=6), rng.normal(size=6)
            j0 = al.standard_pairing_j()
            n_xy = al.nijenhuis(alg, j0, x, y)
            n_yx = al.nijenhuis(alg, j0, y, x)
            checked += 1
            if np.max(np.abs(n_xy + n_yx)) > 1e-12 * max(1.0, np.max(np.abs(n_xy))):
                failures.append((f"nijenhuis_antisymmetry[{alg.label}]", float(np.max(np.abs(n_xy + n_yx)))))
                break
        for _ in range(20):
            p = rng.normal(size=(6, 6)) + 3.0 * np.eye(6)
            if abs(np.linalg.det(p)) < 0.5:
                continue
            back = al.change_of_basis(al.change_of_basis(alg, p), np.linalg.inv(p))
            checked += 1
            if np.max(np.abs(back.c - alg.c)) > 1e-10:
                failures.append((f"change_of_basis_roundtrip[{alg.label}]", float(np.max(np.abs(back.c - alg.c)))))
                break
    return checked, failures


def verify_suite_moduli(seed, count=100):
    from .testsupport import random_canonical_form

    failures = []
    checked = 0
    rng = np.random.default_rng(seed)
    for name in ("h6", "h4", "h5", "h2", "h9hat"):
        for i in range(count):
            form = random_canonical_form(name, rng)
            g0 = mo.realize(form)
            phi = auts.random_automorphism(
                name if name != "h9hat" else "h9hat", int(rng.integers(0, 2 ** 31))
            )
            g1 = mo.pullback_metric(g0, phi)
            try:
                f2, wit = mo.canonicalize(name, g1)
            except NilmoduliError as exc:
                failures.append((f"canonicalize[{name}#{i}]", repr(exc)))
                continue
            checked += 1
            err = float(np.max(np.abs(f2.param_vector() - form.param_vector())))
            if err > 1e-7:
                failures.append(
                    (f"orbit_invariance[{name}#{i}]", _minimized_case(name, form, g1))
                )
            if wit.residual > 1e-8 * max(1.0, float(np.max(np.abs(g1.matrix)))):
                failures.append((f"witness[{name}#{i}]", wit.residual))
    return checked, failures


def _minimized_case(name, form, g_bad):
    """Shrink a failing metric toward its canonical representative by
    halving the perturbation, keeping the smallest still-failing case."""
    g_c = mo.realize(form).matrix

    def passes(g_mid):
        try:
            f_mid, _w = mo.canonicalize(name, mo.Metric(g_bad.algebra, g_mid))
        except NilmoduliError:
            return False
        return float(np.max(np.abs(f_mid.param_vector() - form.param_vector()))) <= 1e-7

    g_min = _shrink_failure(passes, g_c, g_bad.matrix)
    return {"form": form.to_json_dict(), "minimized_metric": np.round(g_min, 12).tolist()}


def verify_suite_hermitian(seed, count=200):
    from .testsupport import random_canonical_form

    failures = []
    checked = 0
    rng = np.random.default_rng(seed)
    for i in range(count):
        form = random_canonical_form("h5", rng)
        for sset in hm.h5_hermitian_solutions(form).values():
            for sol in sset.solutions:
                checked += 1
                if sol.residuals["nijenhuis"] > 1e-9:
                    failures.append((f"h5_nijenhuis[#{i}]", sol.residuals["nijenhuis"]))
        form4 = random_canonical_form("h4", rng)
        for sset in hm.h4_hermitian_solutions(form4).values():
            for sol in sset.solutions:
                checked += 1
                if sol.residuals["nijenhuis"] > 1e-9:
                    failures.append((f"h4_nijenhuis[#{i}]", sol.residuals["nijenhuis"]))
        form6 = random_canonical_form("h6", rng)
        for sol in hm.h6_hermitian_solutions(form6):
            checked += 1
            if sol.residuals["nijenhuis"] > 1e-12:
                failures.append((f"h6_nijenhuis[#{i}]", sol.residuals["nijenhuis"]))
        form2 = random_canonical_form("h2", rng)
        cands = hm.h2_hermitian_candidates(form2)
        checked += 1
        if len(cands) > 2:
            failures.append((f"h2_candidate_count[#{i}]", len(cands)))
    return checked, failures


def cmd_verify(args):
    t0 = time.time()
    seed = _seed(args)
    suites = {
        "algebra": lambda: verify_suite_algebra(seed),
        "moduli": lambda: verify_suite_moduli(seed),
        "hermitian": lambda: verify_suite_hermitian(seed),
    }
    names = list(suites) if args.suite == "all" else [args.suite]
    outputs = {}
    all_ok = True
    lines = []
    for name in names:
        checked, failures = suites[name]()
        ok = not failures
        all_ok &= ok
        outputs[name] = {
            "checked": checked,
            "failures": [[f, repr(v)] for f, v in failures[:10]],
            "passed": ok,
        }
        lines.append(f"suite {name}: {checked} checks, "
                     f"{'pass' if ok else f'{len(failures)} FAILURES'}")
    _emit(_report("verify", {"suite": args.suite, "seed": seed}, outputs,
                  passed=all_ok, t0=t0), args.format, lines)
    return EXIT_OK if all_ok else EXIT_VERIFY_FAIL


# ---------------------------------------------------------------------------


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "text"), default=argparse.SUPPRESS)
    parser = argparse.ArgumentParser(
        prog="nilmoduli",
        parents=[common],
        description="Moduli of left-invariant metrics and Hermitian structures "
        "on the 6-d nilpotent Lie algebras with first Betti number 4.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_parser(name, **kw):
        return sub.add_parser(name, parents=[common], **kw)

    p = add_parser("describe", help="brackets, step, Der dimension, components")
    p.add_argument("algebra", help="builtin id (h2,h4,h5,h6,h9,h9hat) or Salamon string")
    p.set_defaults(func=cmd_describe)

    p = add_parser("canonicalize", help="canonical form + witness for a metric")
    p.add_argument("--algebra", required=False)
    p.add_argument("--input", help="path to a metric JSON file")
    p.add_argument("--metric", help="inline metric JSON")
    p.add_argument("--tol", type=float, default=1e-8)
    p.set_defaults(func=cmd_canonicalize)

    p = add_parser("isometry", help="isotropy group of a canonical form")
    p.add_argument("--algebra", required=True)
    p.add_argument("--form", required=True, help="form JSON")
    p.set_defaults(func=cmd_isometry)

    p = add_parser("hermitian", help="Hermitian structures at a canonical form")
    p.add_argument("--algebra", required=True)
    p.add_argument("--form", required=True)
    p.add_argument("--search", action="store_true")
    p.add_argument("--budget", type=int, default=64)
    p.set_defaults(func=cmd_hermitian)

    p = add_parser("tables", help="regenerate the classification tables")
    p.set_defaults(func=cmd_tables)

    p = add_parser("verify", help="run the invariant suites")
    p.add_argument("--suite", choices=("all", "algebra", "moduli", "hermitian"), default="all")
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_verify)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if not hasattr(args, "format"):
        args.format = "json"
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (InvalidForm, json.JSONDecodeError, KeyError, ValueError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NotSPD as exc:
        print(f"not positive definite: {exc}", file=sys.stderr)
        return EXIT_NOT_SPD
    except CanonicalizationFailed as exc:
        print(f"canonicalization failed: {exc} (best residual {exc.residual})",
              file=sys.stderr)
        return EXIT_SOLVER
    except NilmoduliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
