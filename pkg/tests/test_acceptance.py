"""Acceptance criteria 1-8.

Each criterion runs one verification suite and re-judges every measurement
against the tolerances pinned below, independently of the limits the suite
itself carries.  One pass/fail line per criterion is printed in the terminal
summary (see conftest.py) and when the file is run as a script.
"""

import pytest

from hyperwkb.suites import judge, run_suite

# criterion -> (suite, title, budget seconds, {check: (op, pinned limit)})
CRITERIA = {
    1: ("closedform", "closed forms", 5.0, {
        "delta2_routes": ("<=", 1e-9),
        "delta2_half_is_2_over_pi": ("<=", 1e-14),
        "delta3_series_vs_gamma": ("<=", 1e-9),
        "product_identity_complex": ("<=", 1e-10),
    }),
    2: ("integralrep", "integral representations", 60.0, {
        "residue_q1_grid": ("<=", 1e-7),
        "confluent_p0_q1_grid": ("<=", 1e-7),
        "confluent_p1_q1_grid": ("<=", 1e-7),
        "residue_q2_torus": ("<=", 1e-4),
        "j0_contour": ("<=", 1e-8),
        "euler_gauss": ("<=", 1e-8),
        "kummer_integral": ("<=", 1e-8),
        "bessel_j_integral": ("<=", 1e-8),
        "v1_v2_residue_reps": ("<=", 1e-8),
        "verdict_confluent_gamma_constant_rejected": (">=", 1e-2),
        "verdict_bessel_exponent_nu_rejected": (">=", 1e-2),
    }),
    3: ("frobenius", "Frobenius residuals", 10.0, {
        "cubic_at_one_lam1": ("<=", 1e-10),
        "triple_confluent_exact": ("==", 0),
        "cubic_at_zero_log_basis": ("<=", 1e-10),
        "airy_exact": ("==", 0),
        "v3_z2_coefficient": ("==", 0),
    }),
    4: ("lemma21", "restricted determinant", 2.0, {
        "closed_form_vs_lu": ("<=", 1e-10),
        "symmetric_identities": ("==", 0),
    }),
    5: ("wkb", "WKB asymptotics", 30.0, {
        "infinity_constant_0f1": ("<=", 1e-15),
        "infinity_0f1_t400": ("<=", 0.02),
        "infinity_0f1_rate": ("in", (0.35, 0.65)),
        "infinity_0f2_t1000": ("<=", 0.02),
        "large_param_error_ratio": ("in", (0.3, 0.7)),
        "phi_vs_action": ("<=", 1e-9),
        "kummer_stokes_invariant": ("<=", 1e-12),
        "kummer_upper_line_s30": ("<=", 0.05),
    }),
    6: ("variations", "variations", 10.0, {
        "first_order_closed_form": ("<=", 1e-10),
        "airy_u11_coefficients": ("==", 0),
        "full_residual": ("==", 0),
        "full_residual_remainder": (">=", 1),
        "verdict_multisum_vs_recurrence": ("==", 0),
    }),
    7: ("wasow", "Wasow transform", 20.0, {
        "det_is_one": ("==", 0),
        "grading_mod3": ("==", 0),
        "langer_identity": ("==", 0),
    }),
    8: ("connection", "connection and MZV", 60.0, {
        "c_vs_delta3": ("<=", 1e-6),
        "cubic_chain_polylog_k1": ("<=", 1e-8),
        "u1_routes": ("<=", 1e-9),
        "stuffle_z2_z3": ("<=", 1e-8),
        "phi2_upper_lam12": ("<=", 0.01),
        "phi2_upper_decreasing": ("<", 1.0),
        "phi2_lower_lam12": ("<=", 0.01),
        "phi2_lower_decreasing": ("<", 1.0),
    }),
}

SUMMARY: list[str] = []


def evaluate(number: int):
    suite, title, budget, pinned = CRITERIA[number]
    report = run_suite(suite)
    measured = {c.name: c.measured for c in report.checks}
    failures = []
    missing = set(pinned) - set(measured)
    extra = set(measured) - set(pinned) - {"budget_seconds"}
    if missing or extra:
        failures.append(f"check set mismatch: missing {sorted(missing)}, unexpected {sorted(extra)}")
    for name, (op, limit) in pinned.items():
        if name in measured and not judge(measured[name], op, limit):
            failures.append(f"{name}: {measured[name]:.3e} not {op} {limit}")
    if report.elapsed > budget:
        failures.append(f"took {report.elapsed:.2f} s > {budget} s")
    status = "PASS" if not failures else "FAIL"
    worst = "; ".join(failures) if failures else f"{len(pinned)} checks, {report.elapsed:.2f} s"
    return status == "PASS", f"criterion {number} ({title}): {status} [{worst}]"


@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number):
    ok, line = evaluate(number)
    SUMMARY.append(line)
    print(line)
    assert ok, line


if __name__ == "__main__":
    for n in sorted(CRITERIA):
        print(evaluate(n)[1])
