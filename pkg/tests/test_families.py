import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lorentz_twistor.families import (
    MESH_COLUMNS, MODELS, FamilySpec, build_family, catalog_bases, deform_null, isotropy_coefficient,
    lattice_field, mesh_table, positive_null_normal, scalar_field, stationary_check,
)
from lorentz_twistor.immersion import classify, decompose, surface_data
from lorentz_twistor.lorentz import DomainError
from lorentz_twistor.space_forms import ConfigurationError, stereographic_inverse


def test_scalar_field_registry():
    z = np.array([[0.5, -1.0]])
    plane = MODELS["plane"]
    assert scalar_field("const:2.5").on(plane)(z)[0] == 2.5
    assert scalar_field("linear:1,2,3").on(plane)(z)[0] == pytest.approx(1 + 1 - 3)
    assert scalar_field("harmonic:z1^2-z2^2").on(plane)(z)[0] == pytest.approx(-0.75)
    with pytest.raises(ConfigurationError):
        scalar_field("cos:z1")


def test_lattice_field_interpolates_polynomials():
    x = np.linspace(-1, 1, 9)
    vals = np.add.outer(x ** 2, 0.5 * x)
    lam = lattice_field(x, x, vals).on(MODELS["plane"])
    assert lam(np.array([[0.33, -0.41]]))[0] == pytest.approx(0.33 ** 2 - 0.205, abs=1e-12)
    with pytest.raises(ConfigurationError):
        lattice_field(x, x, vals[:-1])


@pytest.mark.parametrize("kw", [
    dict(space="r41", tag="i_c_lambda"), dict(space="s41", tag="j_lambda"), dict(space="r42", tag="i_lambda"),
    dict(space="r41", tag="j_lambda", theta=0.0), dict(space="s41", tag="i_c_lambda", c=1.5),
    dict(space="h41", tag="j_c_lambda", c=0.5),
])
def test_family_spec_validation(kw):
    with pytest.raises(ConfigurationError):
        FamilySpec(lam=scalar_field("zero"), **kw)


@pytest.mark.parametrize("space,tag,kw", [
    ("r41", "i_lambda", {}), ("r41", "j_lambda", {"theta": 0.5}), ("s41", "i_lambda", {}),
    ("s41", "i_c_lambda", {"c": -0.4}), ("h41", "i_lambda", {}), ("h41", "j_c_lambda", {"c": 1.5}),
])
def test_members_lie_on_the_quadric(space, tag, kw):
    lam = "linear:0.2,0,0" if (space, tag) == ("h41", "i_lambda") else "random:1"
    f = build_family(FamilySpec(space, tag, scalar_field(lam), **kw), resolution=8)
    x = f(f.points())
    M = f.space_form
    assert np.max(np.abs(M.quadric_residual(x))) < 1e-12


def test_isotropy_of_i_and_j_types():
    i_rep = classify(build_family(FamilySpec("h41", "i_lambda", scalar_field("linear:0.2,0,0")), resolution=16))
    assert i_rep.flags["plus_isotropic"]
    j_rep = classify(build_family(FamilySpec("r41", "j_lambda", scalar_field("linear:0.1,0,0")), resolution=16))
    assert j_rep.flags["pos_semi_umbilic"] and not j_rep.flags["plus_isotropic"]


def test_h_plus_equals_half_the_coefficient():
    spec = FamilySpec("s41", "i_c_lambda", scalar_field("random:8"), c=0.0)
    f = build_family(spec, resolution=12)
    sd = surface_data(f, neighbours=False)
    coeff = isotropy_coefficient(spec, sd.points)
    assert np.max(np.abs(decompose(sd.h).H_plus - coeff / 2)) < 1e-5


def test_isotropy_coefficient_domain():
    with pytest.raises(DomainError):
        isotropy_coefficient(FamilySpec("r41", "j_lambda", scalar_field("zero")), [0.0, 0.0])
    with pytest.raises(DomainError):
        isotropy_coefficient(FamilySpec("s41", "i_c_lambda", scalar_field("zero"), c=0.5), [0.0, 0.0])


@pytest.mark.parametrize("space,lam,expected", [
    ("r41", "harmonic:z1^2-z2^2", True), ("r41", "poly:z1^2+z2^2", False),
    ("s41", "linear:0,0,1", True), ("h41", "linear:0.2,0,0", True), ("s41", "const:0.3", False),
])
def test_stationary_examples(space, lam, expected):
    tag = "i_c_lambda" if space == "s41" else "i_lambda"
    out = stationary_check(FamilySpec(space, tag, scalar_field(lam)), resolution=16)
    assert out["stationary"] is expected and out["agree"]


def test_deform_matches_closed_form():
    base = build_family(FamilySpec("r41", "j_lambda", scalar_field("zero"), theta=1.0), resolution=12)
    lam = scalar_field("random:9")
    g = deform_null(base, lam, "theta_sphere")
    f = build_family(FamilySpec("r41", "j_lambda", lam, theta=1.0), resolution=12)
    z = f.points()
    assert np.max(np.abs(g(z) - f(z))) < 1e-6


def test_deform_rejects_non_umbilic_base():
    base = build_family(FamilySpec("r41", "i_lambda", scalar_field("poly:z1^2")), resolution=8)
    with pytest.raises(ConfigurationError):
        deform_null(base, scalar_field("zero"), "plane")


def test_positive_null_normal_is_null():
    base, _ = catalog_bases(resolution=8)[3]
    k = positive_null_normal(base, base.points())
    eta = base.space_form.ambient.eta
    assert np.max(np.abs(np.einsum("ni,ij,nj->n", k, eta, k))) < 1e-10


@settings(max_examples=5, deadline=None)
@given(st.integers(0, 500))
def test_deformed_catalog_stays_semi_umbilic(seed):
    base, model = catalog_bases(resolution=12)[seed % 6]
    rep = classify(deform_null(base, scalar_field(f"random:{seed}"), model, check_base=False))
    assert rep.flags["pos_semi_umbilic"]


def test_stereographic_transport_of_plane_family():
    lam = scalar_field("random:4")
    spec = FamilySpec("s41", "i_c_lambda", lam, c=0.0)
    f = build_family(spec, resolution=8)
    z = f.points()
    t = (1 + (z ** 2).sum(1)) / 2 * lam.on(spec.model)(z)
    assert np.max(np.abs(stereographic_inverse(np.stack([t, t, z[:, 0], z[:, 1]], -1)) - f(z))) < 1e-10


def test_mesh_table_columns():
    f = build_family(FamilySpec("r41", "i_lambda", scalar_field("sin:z1")), resolution=6)
    cols, rows = mesh_table(f)
    assert cols == list(MESH_COLUMNS)
    assert len(rows) == 36 and all(r[4] is None for r in rows)


def test_lattice_field_is_smooth_at_the_lattice_edge():
    # stencils at edge samples reach past the last node
    x = np.linspace(-1, 1, 5)
    lam = lattice_field(x, x, np.subtract.outer(x ** 2, x ** 2))
    rep = classify(build_family(FamilySpec("r41", "i_lambda", lam), resolution=16))
    assert rep.flags["stationary"] and rep.residuals["stationary"] < 1e-8
