import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lorentz_twistor.families import FamilySpec, build_family, scalar_field
from lorentz_twistor.immersion import (
    Decomposition, Immersion, LatticeImmersion, MetricError, RankError, bochner_laplace, classify,
    conformal_change_check, darboux, decompose, reconstruct, rotate_tangent, second_fundamental, surface_data,
)
from lorentz_twistor.space_forms import MINKOWSKI, PSEUDO_SPHERE, ConfigurationError

comp = st.floats(-5, 5, allow_nan=False)


def plane(lam="zero", n=16):
    return build_family(FamilySpec("r41", "i_lambda", scalar_field(lam)), resolution=n)


def test_plane_is_totally_geodesic():
    sd = darboux(plane(), [0.1, 0.2])
    assert np.max(np.abs(sd.h)) < 1e-12
    assert sd.frame_gram_residual() < 1e-12
    # positive null normal is u1 + u2 with <k, u1> = -1
    assert np.allclose(sd.frame[0, 0] + sd.frame[0, 1], [1, 1, 0, 0])


def test_second_fundamental_of_graph():
    # i_lambda with lambda = z1^2: h_33 = 2 along e1 + e2 in each normal component
    h = second_fundamental(plane("poly:z1^2"), [0.0, 0.0])
    dec = decompose(h[None])
    assert dec.H_plus[0] == pytest.approx(1.0, abs=1e-6)
    assert abs(dec.H_minus[0]) < 1e-12


@given(st.lists(comp, min_size=6, max_size=6))
def test_reconstruct_inverts_decompose(vals):
    a1, b1, c1, a2, b2, c2 = vals
    h = np.array([[[a1, c1], [c1, b1]], [[a2, c2], [c2, b2]]])
    assert np.allclose(reconstruct(decompose(h)), h, atol=1e-12)


@given(st.lists(comp, min_size=6, max_size=6), st.floats(0, 2 * np.pi))
def test_decomposition_rotation_invariants(vals, phi):
    a1, b1, c1, a2, b2, c2 = vals
    h = np.array([[[a1, c1], [c1, b1]], [[a2, c2], [c2, b2]]])
    d0, d1 = decompose(h), decompose(rotate_tangent(h, phi))
    assert d1.H_plus == pytest.approx(d0.H_plus, abs=1e-9)
    assert d1.H_minus == pytest.approx(d0.H_minus, abs=1e-9)
    assert abs(d1.L_plus) == pytest.approx(abs(d0.L_plus), abs=1e-9)
    assert abs(d1.L_minus) == pytest.approx(abs(d0.L_minus), abs=1e-9)


def test_decomposition_fields():
    d = Decomposition(1.0, 2.0, 3.0, 4.0, 5.0, 6.0)
    assert d.L_plus == 3 + 4j and d.L_minus == 5 + 6j


def test_classify_examples():
    rep = classify(plane())
    assert all(rep.flags.values())
    rep = classify(plane("harmonic:z1^2-z2^2"))
    assert rep.flags["stationary"] and rep.flags["plus_isotropic"] and not rep.flags["totally_umbilic"]
    rep = classify(plane("poly:z1^2"))
    assert rep.flags["pos_semi_stationary"] and not rep.flags["neg_semi_stationary"]


def test_round_sphere_in_euclidean_slice_is_umbilic():
    f = build_family(FamilySpec("r41", "j_lambda", scalar_field("zero"), theta=1.0), resolution=16)
    rep = classify(f)
    assert rep.flags["totally_umbilic"] and not rep.flags["stationary"]


def test_frame_orientation_and_time_orientation():
    f = build_family(FamilySpec("s41", "i_c_lambda", scalar_field("random:3"), c=0.3), resolution=8)
    sd = surface_data(f, neighbours=False)
    assert np.all(PSEUDO_SPHERE.orientation(sd.position, sd.frame) > 0)
    assert np.all(PSEUDO_SPHERE.ambient.inner(sd.frame[:, 0], f.axis()) < 0)


def test_immersion_validation():
    with pytest.raises(ConfigurationError):
        Immersion(MINKOWSKI, lambda z: z, resolution=3)
    with pytest.raises(ConfigurationError):
        Immersion(MINKOWSKI, lambda z: z, fd_step=1.0)


def test_degenerate_samples_are_reported():
    def chart(z):
        # both coordinates move along the same direction: rank one everywhere
        s = z[..., 0] + z[..., 1]
        return np.stack([0 * s, 0 * s, s, s], -1)
    f = Immersion(MINKOWSKI, chart, ((-1, 1), (-1, 1)), resolution=5)
    with pytest.raises(RankError):
        darboux(f, [0.0, 0.3])
    sd = surface_data(f, neighbours=False)
    assert not sd.ok.any() and np.all(sd.reason == 1)


def test_timelike_surface_rejected():
    def chart(z):
        return np.stack([z[..., 0], 0 * z[..., 0], 0 * z[..., 0], z[..., 1]], -1)
    f = Immersion(MINKOWSKI, chart, resolution=4)
    with pytest.raises(RankError):
        classify(f)


def test_lattice_immersion_matches_chart():
    f = plane("sin:z1", n=16)
    u, v = f.grid_axes()
    pts = np.stack(np.meshgrid(u, v, indexing="ij"), -1)
    g = LatticeImmersion(MINKOWSKI, u, v, f(pts.reshape(-1, 2)).reshape(16, 16, 4))
    rep = classify(g)
    assert rep.n_samples == 12 * 12
    assert rep.flags["plus_isotropic"]
    assert rep.residuals["neg_semi_stationary"] > 1e-3


def test_lattice_immersion_validation():
    with pytest.raises(ConfigurationError):
        LatticeImmersion(MINKOWSKI, [0, 1, 2, 3, 4], [0, 1, 2, 3, 5], np.zeros((5, 5, 4)))


def test_bochner_laplace_examples():
    lam = lambda p: p[..., 0] ** 2 + p[..., 1] ** 2
    assert bochner_laplace(lam, 1.0, np.array([0.2, 0.3])) == pytest.approx(4.0, abs=1e-6)
    harmonic = lambda p: p[..., 0] ** 2 - p[..., 1] ** 2
    assert abs(bochner_laplace(harmonic, 1.0, np.array([0.2, 0.3]))) < 1e-6
    with pytest.raises(MetricError):
        bochner_laplace(lam, 0.0, np.array([0.0, 0.0]))


def test_conformal_change_identity():
    out = conformal_change_check(plane("random:4", n=8), lambda x: 0.1 * x[..., 0] * x[..., 3])
    assert out["identity_residual"] < 1e-5
    assert out["flags_agree"]
    # positive semi-stationarity is not conformally invariant
    assert out["H_minus_sup"] < 1e-10 and out["H_minus_sup_rescaled"] > 1e-3


def test_conformal_change_needs_minkowski():
    f = build_family(FamilySpec("s41", "i_c_lambda", scalar_field("zero")), resolution=8)
    with pytest.raises(ConfigurationError):
        conformal_change_check(f, lambda x: 0 * x[..., 0])


def test_results_independent_of_thread_count(monkeypatch):
    f = plane("random:5", n=48)
    monkeypatch.setenv("LSL_THREADS", "1")
    a = surface_data(f)
    monkeypatch.setenv("LSL_THREADS", "4")
    b = surface_data(f)
    assert np.array_equal(a.h, b.h) and np.array_equal(a.frame, b.frame)


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 1000))
def test_i_family_is_plus_isotropic_for_random_fields(seed):
    rep = classify(plane(f"random:{seed}"))
    assert rep.flags["plus_isotropic"]
