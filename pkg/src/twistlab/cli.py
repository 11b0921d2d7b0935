"""Command-line workbench.

Exit codes: 0 success (all mandatory checks pass), 1 axiom/check failure,
2 file, parse or schema error.  All sampled checks are seeded, so repeated
runs produce identical output.
"""
from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import __version__
from .files import (
    load_idempotent,
    load_pert,
    load_triple,
    load_unitary,
    matrix_to_json,
    pert_to_json,
    triple_to_json,
)
from .gauge import gauge_dirac, selfadjointness_report
from .linalg import Tolerance, dagger, rel_defect
from .models import build_u1u2, verify_fluctuation_formula
from .morita import (
    build_left_triple,
    build_real_triple,
    build_right_triple,
    check_idempotent,
    check_morita_triple,
    check_real_triple,
    conjugate_connection,
    grassmann,
)
from .pert import act_mu, eta, fluctuate, normalize, pert_mul
from .triple import check_axioms


def _fail(msg: str) -> int:
    print(f"error: {msg}", file=sys.stderr)
    return 2


def _emit(report: dict, as_json: bool) -> None:
    if as_json:
        print(json.dumps(report, indent=2, sort_keys=True))
        return
    for key, value in report.items():
        if isinstance(value, float):
            print(f"{key}: {value:.3e}")
        elif isinstance(value, (str, int, bool)) or value is None:
            print(f"{key}: {value}")
        else:
            print(f"{key}: {json.dumps(value)}")


def _status(defect: float | None, eps: float) -> str:
    if defect is None:
        return "n/a"
    return f"{defect:.3e} {'PASS' if defect <= eps else 'FAIL'}"


def cmd_check(args) -> int:
    try:
        t = load_triple(args.triple)
    except (OSError, ValueError, json.JSONDecodeError) as exc:
        return _fail(str(exc))
    tol = Tolerance(args.tol)
    report = check_axioms(t, samples=args.samples, seed=args.seed, tol=tol)
    eps = tol.abs_eps
    if args.json:
        doc = {
            "dirac_selfadjoint": report.dirac_selfadjoint,
            "regularity": report.regularity,
            "rep_homomorphism": report.rep_homomorphism,
            "rep_involution": report.rep_involution,
            "rep_unital": report.rep_unital,
            "faithful": report.faithful,
            "grading": {
                "hermitian": report.grading_hermitian,
                "squares_to_identity": report.grading_squares,
                "commutes_with_algebra": report.grading_commutes_algebra,
                "anticommutes_with_dirac": report.grading_anticommutes_dirac,
            },
            "real": {
                "isometry": report.j_isometry,
                "epsilon": report.epsilon,
                "epsilon_prime": report.epsilon_prime,
                "epsilon_double_prime": report.epsilon_double_prime,
                "ko_dimension": report.ko_dimension,
            },
            "order_zero": report.order_zero,
            "first_order": report.first_order,
            "first_order_witness": list(report.first_order_witness) if report.first_order_witness else None,
            "bounded": report.bounded,
            "compact_resolvent": report.compact_resolvent,
            "warnings": list(report.warnings),
            "failures": report.failures(args.require_first_order),
        }
        print(json.dumps(doc, indent=2, sort_keys=True))
    else:
        print(f"dirac_selfadjoint: {_status(report.dirac_selfadjoint, eps)}")
        print(f"regularity: {_status(report.regularity, eps)}")
        print(f"rep_homomorphism: {_status(report.rep_homomorphism, eps)}")
        print(f"rep_involution: {_status(report.rep_involution, eps)}")
        print(f"rep_unital: {_status(report.rep_unital, eps)}"
              + (" (projection)" if report.rep_unit_is_projection and report.rep_unital > eps else ""))
        print(f"faithful: {report.faithful}" + ("" if report.faithful else " (warning only)"))
        if report.grading_hermitian is not None:
            print(f"grading_hermitian: {_status(report.grading_hermitian, eps)}")
            print(f"grading_squares: {_status(report.grading_squares, eps)}")
            print(f"grading_commutes_algebra: {_status(report.grading_commutes_algebra, eps)}")
            print(f"grading_anticommutes_dirac: {_status(report.grading_anticommutes_dirac, eps)}")
        if report.j_isometry is not None:
            print(f"j_isometry: {_status(report.j_isometry, eps)}")
            print(f"ko_signs: ({report.epsilon}, {report.epsilon_prime}, {report.epsilon_double_prime})"
                  f" ko_dimension: {report.ko_dimension}")
            print(f"order_zero: {_status(report.order_zero, eps)}")
            fo_ok = report.first_order is not None and report.first_order <= eps
            label = "PASS" if fo_ok else "VIOLATED"
            print(f"first_order: {report.first_order:.3e} {label}"
                  f" (witness {report.first_order_witness})")
        print("bounded: trivially satisfied (finite dimension)")
        print("compact_resolvent: trivially satisfied (finite dimension)")
        for w in report.warnings:
            print(f"warning: {w}")
    return 1 if report.failures(args.require_first_order) else 0


def cmd_fluctuate(args) -> int:
    try:
        t = load_triple(args.triple)
        p = load_pert(args.pert, t.shape)
    except (OSError, ValueError, json.JSONDecodeError) as exc:
        return _fail(str(exc))
    tol = Tolerance(args.tol)
    try:
        report = fluctuate(t, p, tol)
    except ValueError as exc:
        return _fail(str(exc))
    doc = {
        "normalization_defect": report.pert.normalization_defect(t.sigma),
        "selfadjoint_omega1": report.selfadjoint_omega1,
        "selfadjoint_d_omega": report.selfadjoint_d_omega,
        "j_compat_defect": report.j_compat_defect,
        "omega2_gate_defect": report.omega2_gate_defect,
        "first_order_defect": report.first_order_defect,
        "omega1": matrix_to_json(report.omega1),
        "omega1_hat": matrix_to_json(report.omega1_hat),
        "omega2": matrix_to_json(report.omega2),
        "d_omega": matrix_to_json(report.d_omega),
    }
    if args.check_mu:
        doc["mu_action_defect"] = rel_defect(act_mu(t, report.pert, t.dirac, tol), report.d_omega)
    if args.json:
        print(json.dumps(doc, indent=2, sort_keys=True))
    else:
        for key in ("normalization_defect", "selfadjoint_omega1", "selfadjoint_d_omega",
                    "j_compat_defect", "omega2_gate_defect", "first_order_defect"):
            print(f"{key}: {doc[key]}")
        if args.check_mu:
            print(f"mu_action_defect: {doc['mu_action_defect']:.3e}")
        for name in ("omega1", "omega1_hat", "omega2", "d_omega"):
            print(f"{name}:")
            print(np.array2string(np.array(matrixify(doc[name])), precision=6, suppress_small=True))
    return 0


def matrixify(nested) -> np.ndarray:
    return np.array([[complex(re, im) for re, im in row] for row in nested])


def cmd_gauge(args) -> int:
    try:
        t = load_triple(args.triple)
        p = load_pert(args.pert, t.shape)
        u = load_unitary(args.unitary, t.shape)
    except (OSError, ValueError, json.JSONDecodeError) as exc:
        return _fail(str(exc))
    tol = Tolerance(args.tol)
    try:
        p = normalize(t, p)
        report = gauge_dirac(t, p, u, tol)
        sa = selfadjointness_report(t, p, u, tol) if report.fluctuation.selfadjoint_d_omega else None
    except ValueError as exc:
        return _fail(str(exc))
    doc = {
        "covariance_defect": report.defect,
        "bare_four_term_defect": report.bare_defect,
        "gauged_selfadjoint": report.gauged_fluctuation.selfadjoint_d_omega,
    }
    if sa is not None:
        doc["criterion_defect"] = sa.criterion_defect
        doc["gauge_sa_defect"] = sa.gauge_sa_defect
        doc["decomposition_defect"] = sa.decomposition_defect
    if args.json:
        doc["gauged_d_omega"] = matrix_to_json(report.rhs)
        print(json.dumps(doc, indent=2, sort_keys=True))
    else:
        _emit(doc, False)
    return 0


def cmd_pert_mul(args) -> int:
    try:
        t = load_triple(args.triple)
        p = load_pert(args.left, t.shape)
        q = load_pert(args.right, t.shape)
    except (OSError, ValueError, json.JSONDecodeError) as exc:
        return _fail(str(exc))
    prod = pert_mul(p, q)
    doc = {
        "pairs": len(prod.pairs),
        "normalization_defect": prod.normalization_defect(t.sigma),
        "eta_norm": float(np.linalg.norm(eta(t, prod).op)),
        "product": pert_to_json(prod),
    }
    if args.json:
        print(json.dumps(doc, indent=2, sort_keys=True))
    else:
        for key in ("pairs", "normalization_defect", "eta_norm"):
            print(f"{key}: {doc[key]}")
        print(json.dumps(doc["product"]))
    return 0


def _parse_complex(text: str) -> complex:
    re_s, im_s = text.split(",")
    return complex(float(re_s), float(im_s))


def cmd_model(args) -> int:
    from .pert import Perturbation

    if args.which != "u1u2":
        return _fail(f"unknown model '{args.which}'")
    try:
        kx = _parse_complex(args.kx)
        ky = _parse_complex(args.ky)
    except ValueError:
        return _fail("--kx/--ky must be RE,IM pairs")
    tol = Tolerance(args.tol)
    model = build_u1u2(kx, ky, seed=args.seed)
    rng = np.random.default_rng(args.seed)
    max_defect = 0.0
    for _ in range(args.verify):
        pairs = tuple(
            (model.triple.shape.random_element(rng, 0.6), model.triple.shape.random_element(rng, 0.6))
            for _ in range(int(rng.integers(1, 4)))
        )
        rep = verify_fluctuation_formula(model, Perturbation(model.triple.shape, pairs))
        max_defect = max(max_defect, rep.max_defect)
    doc = triple_to_json(model.triple)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True)
    report = {
        "ko_dimension": model.axioms.ko_dimension,
        "order_zero": model.axioms.order_zero,
        "first_order": model.axioms.first_order,
        "formula_max_defect": max_defect,
        "written": args.out or None,
    }
    if args.json:
        if not args.out:
            report["triple"] = doc
        print(json.dumps(report, indent=2, sort_keys=True))
    else:
        _emit(report, False)
        if not args.out:
            print(json.dumps(doc, sort_keys=True))
    return 0 if max_defect <= tol.abs_eps and model.axioms.passes() else 1


def cmd_morita(args) -> int:
    from .morita import IdempotentData, amat_unit, connection_with
    from .pert import Perturbation, eta_adjoint_pairs

    try:
        t = load_triple(args.triple)
    except (OSError, ValueError, json.JSONDecodeError) as exc:
        return _fail(str(exc))
    tol = Tolerance(args.tol)

    if args.self_morita:
        if not args.omega:
            return _fail("--self requires --omega PERT_FILE")
        try:
            p = load_pert(args.omega, t.shape)
        except (OSError, ValueError, json.JSONDecodeError) as exc:
            return _fail(str(exc))
        p = normalize(t, p)
        # selfadjoint one-form via pair-level symmetrization (stays normalised)
        padj = eta_adjoint_pairs(t, p, tol)
        p_sym = Perturbation(t.shape, tuple((0.5 * a, b) for a, b in p.pairs)
                             + tuple((0.5 * a, b) for a, b in padj.pairs))
        w = eta(t, p_sym).op
        idem = IdempotentData(amat_unit(t.shape, 1))
        try:
            ep = t.epsilon_prime()
            rt = build_right_triple(t, idem, connection_with(t, idem, [[w]], "right"), tol)
            wbar = ep * t.real.j.conjugate(w)
            lt = build_left_triple(t, idem, connection_with(t, idem, [[wbar]], "left"), tol)
        except ValueError as exc:
            return _fail(str(exc))
        doc = {
            "d_r_equals_d_plus_omega": rel_defect(rt.d_r, t.dirac + w),
            "d_l_equals_d_plus_conj_omega": rel_defect(lt.d_l, t.dirac + wbar),
            "omega_selfadjoint": rel_defect(w, dagger(w)),
        }
        _emit(doc, args.json)
        return 0 if max(doc.values()) <= tol.abs_eps else 1

    if not args.idempotent:
        return _fail("choose --self --omega PERT or --idempotent FILE")
    try:
        e = load_idempotent(args.idempotent, t.shape)
    except (OSError, ValueError, json.JSONDecodeError) as exc:
        return _fail(str(exc))
    idem_report = check_idempotent(t, e, tol)
    doc = {
        "idempotent_defect": idem_report.idempotent_defect,
        "selfadjoint_defect": idem_report.selfadjoint_defect,
        "lift_defect": idem_report.lift_defect,
        "lift_inverse_defect": idem_report.lift_inverse_defect,
        "twist_invariant": idem_report.twist_invariant,
        "twist_commuting": idem_report.twist_commuting,
    }
    ok = idem_report.passes
    try:
        if args.connection:
            from .files import connection_from_json, load_json

            conn = connection_from_json(t, e, load_json(args.connection), "right")
        else:
            conn = grassmann(t, e, "right")
        rt = build_right_triple(t, e, conn, tol)
        right_report = check_morita_triple(rt, seed=args.seed, tol=tol)
        doc["right_triple_passes"] = right_report.passes
        doc["right_selfadjoint_defect"] = right_report.selfadjoint_defect
        doc["right_bracket_defect"] = right_report.bracket_identity_defect
        ok = ok and right_report.passes
        if t.real is not None:
            try:
                lconn = conjugate_connection(t, conn, tol)
                lt = build_left_triple(t, e, lconn, tol)
                left_report = check_morita_triple(lt, seed=args.seed, tol=tol)
                doc["left_triple_passes"] = left_report.passes
                ok = ok and left_report.passes
            except ValueError as exc:
                doc["left_triple_error"] = str(exc)
        if t.real is not None and t.grading is not None:
            try:
                real = build_real_triple(t, e, conn, tol)
                real_report = check_real_triple(real, seed=args.seed, tol=tol)
                doc["real_triple_passes"] = real_report.passes
                doc["real_d_second_defect"] = real_report.d_second_defect
                doc["real_ko_dimension"] = real_report.ko_dimension
                ok = ok and real_report.passes
            except ValueError as exc:
                doc["real_triple_error"] = str(exc)
    except ValueError as exc:
        doc["construction_error"] = str(exc)
        ok = False
    _emit(doc, args.json)
    return 0 if ok else 1


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="twistlab", description=__doc__)
    parser.add_argument("--version", action="version", version=f"twistlab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--json", action="store_true", help="machine-readable output")
        p.add_argument("--seed", type=int, default=0, help="seed for sampled checks")
        p.add_argument("--tol", type=float, default=1e-10, help="comparison tolerance")

    p = sub.add_parser("check", help="verify the axioms of a triple file")
    p.add_argument("triple")
    p.add_argument("--samples", type=int, default=10)
    p.add_argument("--require-first-order", action="store_true")
    common(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("fluctuate", help="twisted inner fluctuation of a triple by a perturbation")
    p.add_argument("triple")
    p.add_argument("pert")
    p.add_argument("--check-mu", action="store_true", help="also verify the semi-group action")
    common(p)
    p.set_defaults(func=cmd_fluctuate)

    p = sub.add_parser("gauge", help="gauge-transform a fluctuated Dirac operator")
    p.add_argument("triple")
    p.add_argument("pert")
    p.add_argument("unitary")
    common(p)
    p.set_defaults(func=cmd_gauge)

    p = sub.add_parser("pert-mul", help="semi-group product of two perturbation files")
    p.add_argument("triple")
    p.add_argument("left")
    p.add_argument("right")
    common(p)
    p.set_defaults(func=cmd_pert_mul)

    p = sub.add_parser("model", help="emit a built-in model and its verification report")
    p.add_argument("which", choices=["u1u2"])
    p.add_argument("--kx", required=True, help="RE,IM")
    p.add_argument("--ky", required=True, help="RE,IM")
    p.add_argument("--verify", type=int, default=20, help="number of random formula checks")
    p.add_argument("--out", help="write the triple file here")
    common(p)
    p.set_defaults(func=cmd_model)

    p = sub.add_parser("morita", help="Morita constructions over a triple")
    p.add_argument("triple")
    p.add_argument("--self", dest="self_morita", action="store_true",
                   help="self-Morita fluctuation comparison")
    p.add_argument("--omega", help="perturbation file for --self")
    p.add_argument("--idempotent", help="idempotent file for the module construction")
    p.add_argument("--connection", help="connection file (n x n array of pair lists); Grassmann if absent")
    common(p)
    p.set_defaults(func=cmd_morita)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
