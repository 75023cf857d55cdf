import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from lorentz_twistor.families import FamilySpec, build_family, scalar_field
from lorentz_twistor.immersion import surface_data
from lorentz_twistor.lorentz import random_lorentz
from lorentz_twistor.space_forms import (
    MINKOWSKI, PSEUDO_SPHERE, conformal_flat_chart, constant_curvature_tensor, flat_chart, product_chart,
    riemann_numeric, umbilic_catalog,
)
from lorentz_twistor.twistor import (
    STRUCTURES, audit_chart, audit_frames, cr_compare, frame_components, gauss_lift, gauss_tension,
    graph_hypersurface, grass_lift, holomorphy_check, integrability_og, integrability_oplus, equivalence_crosscheck,
    vertical_consistency,
)

ETA = np.diag([-1.0, 1, 1, 1])


def member(space, tag, lam, n=16, **kw):
    return build_family(FamilySpec(space, tag, scalar_field(lam), **kw), resolution=n)


def symbolic_riemann(metric, coords):
    """Lowered curvature, same index convention as the numeric routine."""
    n = len(coords)
    ginv = metric.inv()
    gamma = [[[sum(ginv[a, d] * (sp.diff(metric[d, b], coords[c]) + sp.diff(metric[d, c], coords[b])
                                 - sp.diff(metric[b, c], coords[d])) for d in range(n)) / 2
               for c in range(n)] for b in range(n)] for a in range(n)]
    up = sp.MutableDenseNDimArray.zeros(n, n, n, n)
    for a in range(n):
        for b in range(n):
            for c in range(n):
                for d in range(n):
                    val = sp.diff(gamma[a][d][b], coords[c]) - sp.diff(gamma[a][c][b], coords[d])
                    val += sum(gamma[a][c][e] * gamma[e][d][b] - gamma[a][d][e] * gamma[e][c][b] for e in range(n))
                    up[a, b, c, d] = val
    return lambda x: np.array([[[[float(sum(metric[a, e] * up[e, b, c, d] for e in range(n)).subs(dict(zip(coords, x))))
                                  for d in range(n)] for c in range(n)] for b in range(n)] for a in range(n)])


def test_numeric_curvature_matches_symbolic_oracle():
    xs = sp.symbols("x1:5")
    rho = sp.Rational(1, 10) * xs[2] ** 2
    g = sp.exp(2 * rho) * sp.diag(-1, 1, 1, 1)
    R_sym = symbolic_riemann(g, xs)
    chart = conformal_flat_chart()
    x = np.array([0.1, -0.2, 0.5, 0.3])
    assert np.max(np.abs(R_sym(x) - riemann_numeric(chart.metric, x))) < 1e-6


def test_symbolic_space_form_conditions_vanish():
    # both condition sets are linear in R; check them on the model tensor with symbolic S
    S = sp.symbols("S")
    eta = sp.diag(-1, 1, 1, 1)
    R = lambda a, b, c, d: S * (eta[a, c] * eta[b, d] - eta[a, d] * eta[b, c])
    Rn = np.array([[[[R(a, b, c, d) for d in range(4)] for c in range(4)] for b in range(4)] for a in range(4)],
                  dtype=object)
    for cond in (*integrability_oplus(Rn), *integrability_og(Rn)):
        assert sp.simplify(cond) == 0


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000), st.sampled_from([-1.0, 0.0, 1.0]))
def test_constant_curvature_conditions_in_any_frame(seed, S):
    L = random_lorentz(np.random.default_rng(seed))
    Rf = frame_components(constant_curvature_tensor(S, ETA), L)
    assert max(integrability_oplus(Rf)) < 1e-9
    assert max(integrability_og(Rf)) < 1e-9


def test_audit_charts():
    assert audit_chart(flat_chart(), 2, 5)["og"] == 0.0
    conf = audit_chart(conformal_flat_chart(), 2, 10)
    assert conf["oplus"] < 1e-4 and conf["og"] > 1e-3
    assert audit_chart(product_chart(), 2, 10)["oplus"] > 1e-3


def test_audit_frames_are_deterministic():
    assert np.array_equal(audit_frames(3, 4, seed=7), audit_frames(3, 4, seed=7))
    assert not np.array_equal(audit_frames(3, 4, seed=7), audit_frames(4, 4, seed=7))


def test_plane_lifts_are_horizontal_and_holomorphic():
    f = member("r41", "i_lambda", "zero")
    for structure in STRUCTURES:
        lift = grass_lift(f) if structure.startswith("OG") else gauss_lift(f, 1 if structure[1] == "+" else -1)
        assert holomorphy_check(lift, structure).verdict
    assert np.abs(gauss_lift(f, 1).d_vertical).max() < 1e-12


def test_holomorphy_argument_checks():
    f = member("r41", "i_lambda", "zero", n=8)
    with pytest.raises(ValueError):
        holomorphy_check(gauss_lift(f, -1), "O++")
    with pytest.raises(TypeError):
        holomorphy_check(gauss_lift(f, 1), "OG+")
    with pytest.raises(ValueError):
        holomorphy_check(gauss_lift(f, 1), "O+*")
    with pytest.raises(ValueError):
        gauss_lift(f, 2)


def test_semi_stationary_member_is_holomorphic_only_for_its_structure():
    f = member("r41", "i_lambda", "poly:z1^2")
    sd = surface_data(f)
    assert holomorphy_check(gauss_lift(f, 1, sd), "O+-").verdict
    rep = holomorphy_check(gauss_lift(f, -1, sd), "O--")
    assert not rep.verdict and rep.residual_J > 1e-3


@pytest.mark.parametrize("lam", ["random:11", "harmonic:z1^3-3z1z2^2"])
def test_equivalence_rows_agree(lam):
    f = member("s41", "i_c_lambda", lam, c=0.3)
    for row in equivalence_crosscheck(f) + equivalence_crosscheck(f, source="direct"):
        assert row["agree"], row


def test_direct_and_formula_vertical_parts_agree():
    f = member("h41", "j_c_lambda", "linear:0.1,0.2,0", c=2.0)
    assert vertical_consistency(f) < 1e-4


def test_lift_directions_are_orthogonal_to_the_surface():
    lift = gauss_lift(member("r41", "j_lambda", "random:2", theta=0.7), -1)
    assert lift.orthogonality_residual() < 1e-10


def test_cr_compare():
    rng = np.random.default_rng(0)
    for N in umbilic_catalog(PSEUDO_SPHERE):
        for y in N.sample(3, rng):
            assert cr_compare(PSEUDO_SPHERE, N.chart, y, rng=rng) < 1e-8
    assert cr_compare(MINKOWSKI, graph_hypersurface(), np.array([0.2, 0.1, 0.0]), l=[0, 0, 1]) > 1e-2


def test_tension_threshold():
    f = member("s41", "i_c_lambda", "zero", c=0.5)
    assert gauss_tension(f, 12.0)["harmonic"]
    assert not gauss_tension(f, 3.0)["harmonic"]
    flat = member("r41", "i_lambda", "harmonic:z1^2-z2^2")
    assert gauss_tension(flat, 1.0)["harmonic"]
