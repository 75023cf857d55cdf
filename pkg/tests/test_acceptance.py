"""Acceptance criteria 1-10 at the default grid (64 x 64, fd_step 1e-3).

Each test prints one PASS/FAIL line.  Run standalone with
``python3 tests/test_acceptance.py`` or through pytest.
"""
import sys
import time

import pytest
import sympy as sp

from lorentz_twistor import suites
from lorentz_twistor.twistor import integrability_og, integrability_oplus


def symbolic_space_form_residual():
    """Both condition sets evaluated on S (eta wedge eta) with S symbolic."""
    S = sp.symbols("S")
    eta = sp.diag(-1, 1, 1, 1)
    R = [[[[S * (eta[a, c] * eta[b, d] - eta[a, d] * eta[b, c]) for d in range(4)] for c in range(4)]
          for b in range(4)] for a in range(4)]

    class Lowered:
        def __getitem__(self, idx):
            a, b, c, d = idx
            return R[a][b][c][d]
    conds = (*integrability_oplus(Lowered()), *integrability_og(Lowered()))
    return sum(1 for c in conds if sp.simplify(c) != 0)


def criterion_5():
    res = suites.suite_integrability()
    res.equal("symbolic substitution: nonzero conditions", symbolic_space_form_residual(), 0)
    return res


CRITERIA = {
    1: ("isotropy of i-families", suites.suite_isotropy),
    2: ("semi-umbilic j-families that are not isotropic", suites.suite_j_families),
    3: ("classification and holomorphy equivalences", suites.suite_equivalences),
    4: ("null deformation of umbilic bases", suites.suite_deformation),
    5: ("curvature integrability audits", criterion_5),
    6: ("CR structure comparison on hypersurfaces", suites.suite_cr_compare),
    7: ("invariance under conformal rescaling", suites.suite_conformal),
    8: ("tension of the Grassmann lift", suites.suite_tension),
    9: ("stereographic transport", suites.suite_stereographic),
    10: ("second-order convergence", suites.suite_convergence),
}


def evaluate(number):
    title, run = CRITERIA[number]
    start = time.perf_counter()
    res = run()
    elapsed = time.perf_counter() - start
    failed = [c for c in res.checks if not c.passed]
    status = "PASS" if res.passed and res.checks else "FAIL"
    line = f"criterion {number:2d} {status}  {title}  ({len(res.checks)} checks, {elapsed:.1f} s)"
    for c in failed[:5]:
        line += f"\n    failed: {c.name}: {c.value!r} {c.relation} {c.bound!r}"
    return res, line


@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number, capsys):
    res, line = evaluate(number)
    with capsys.disabled():
        print("\n" + line)
    assert res.checks, "suite produced no checks"
    assert res.passed, line


if __name__ == "__main__":
    ok = True
    for n in sorted(CRITERIA):
        res, line = evaluate(n)
        print(line, flush=True)
        ok &= res.passed
    sys.exit(0 if ok else 1)
