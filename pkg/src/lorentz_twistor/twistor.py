"""Gauss lifts into the twistor and Grassmann bundles and their optical structures.

Lifts are represented only along a surface, in Darboux frame components:
the horizontal part of the differential is df itself, and the vertical part
is a pair (twistor bundle) or quadruple (Grassmann bundle) of coefficients
in the E_ij basis of the fibre tangent model.

Connection forms follow w_kl(X) = eps_l <nabla_X e_k, e_l>.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .immersion import (
    NORMAL_SIGNS, Immersion, SurfaceData, decompose, flag_residual_fields, surface_data, sup,
)
from .lorentz import NullDir, SignatureError, random_lorentz
from .space_forms import (
    ConfigurationError, MetricChart, SpaceForm, hypersurface_geometry, orthonormal_basis, riemann_numeric,
)

STRUCTURES = ("O++", "O+-", "O-+", "O--", "OG+", "OG-")


# -- connection forms -------------------------------------------------------------

def connection_from_h(h: np.ndarray) -> np.ndarray:
    """w[n, i, alpha, j] = w_{alpha, 3+j}(e_{3+i}) = -eps_alpha h^alpha_ij."""
    return -NORMAL_SIGNS[None, None, :, None] * np.transpose(h, (0, 2, 1, 3))


def connection_from_frames(sd: SurfaceData) -> np.ndarray:
    """Same normal-tangent connection forms, from differencing the frame field."""
    nb = sd.extras["nb_frames"]
    h1, h2 = sd.extras["steps"]
    eps = np.asarray(sd.extras["epsilons"], float)
    d1 = (nb[:, 0] - nb[:, 1]) / (2 * h1)
    d2 = (nb[:, 2] - nb[:, 3]) / (2 * h2)
    dchart = np.stack([d1, d2], 1)  # (N, a, 4, dim)
    de = np.einsum("nia,nakd->nikd", sd.P, dchart)  # derivative along e_{3+i}
    return np.einsum("nikd,d,njd->nikj", de[:, :, :2, :], eps, sd.frame[:, 2:, :])


# -- lifts ----------------------------------------------------------------------------

@dataclass
class TwistorLift:
    """Gauss lift to the positive (sign +1) or negative (sign -1) twistor bundle.

    ``d_vertical[n, i]`` holds the coefficients (a, b) of the vertical
    differential along e_{3+i}, in the basis (E13 -+ E23, E14 -+ E24).
    """

    sign: int
    surface: SurfaceData
    directions: np.ndarray  # representatives e1 +- e2, (N, dim)
    d_horizontal: np.ndarray  # (N, 2, dim) images of e3, e4
    d_vertical: np.ndarray  # (N, 2, 2)
    source: str = "formula"

    def direction(self, n: int, reference=None) -> NullDir:
        sig = self.surface_signature()
        return NullDir(self.directions[n], sig, reference=reference)

    def surface_signature(self):
        from .lorentz import Signature

        return Signature(tuple(int(e) for e in self.surface.extras["epsilons"]))

    def orthogonality_residual(self) -> float:
        eps = np.asarray(self.surface.extras["epsilons"], float)
        r = np.einsum("nd,d,nid->ni", self.directions, eps, self.d_horizontal)
        return sup(np.abs(r).max(axis=1), self.surface.ok)

    def vertical_in_chart(self) -> np.ndarray:
        """Vertical coefficients along the chart directions d/dx1, d/dx2."""
        Q = np.linalg.inv(self.surface.P)  # d_a = sum_i Q[a, i] e_{3+i}
        return np.einsum("nai,nic->nac", Q, self.d_vertical)


@dataclass
class GrassLift:
    """Lift n -> df(T_n N); ``d_vertical[n, i]`` = (c13, c23, c14, c24) along e_{3+i}."""

    surface: SurfaceData
    planes: np.ndarray  # (N, 2, dim)
    d_vertical: np.ndarray  # (N, 2, 4)


def _surface(f, sd):
    if sd is not None:
        return sd
    return surface_data(f, neighbours=True)


def gauss_lift(f: Immersion, sign: int = 1, sd: SurfaceData | None = None, source: str = "formula") -> TwistorLift:
    """Gauss lift gamma_{f+} (sign=1) or gamma_{f-} (sign=-1) over the sample grid.

    ``source="formula"`` takes connection forms from the second fundamental
    form; ``source="direct"`` differences the normalised null normal field
    along the surface instead.
    """
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    sd = _surface(f, sd)
    k = sd.frame[:, 0] + sign * sd.frame[:, 1]
    if source == "formula":
        w = connection_from_h(sd.h)
        a = (-w[:, :, 0, 0] - sign * w[:, :, 1, 0]) / 2
        b = (-w[:, :, 0, 1] - sign * w[:, :, 1, 1]) / 2
        V = np.stack([a, b], -1)
    elif source == "direct":
        V = _vertical_direct(f, sd, sign)
    else:
        raise ValueError(f"unknown source {source!r}")
    return TwistorLift(sign, sd, k, sd.frame[:, 2:, :], V, source)


def _vertical_direct(f: Immersion, sd: SurfaceData, sign: int) -> np.ndarray:
    if "nb_frames" not in sd.extras:
        raise ConfigurationError("surface data was computed without neighbour frames")
    T = f.axis()
    eps = np.asarray(sd.extras["epsilons"], float)
    nb = sd.extras["nb_frames"]
    h1, h2 = sd.extras["steps"]
    kc = sd.frame[:, 0] + sign * sd.frame[:, 1]
    scale_c = np.einsum("nd,d,d->n", kc, eps, T)
    knb = nb[:, :, 0] + sign * nb[:, :, 1]
    scale_nb = np.einsum("nmd,d,d->nm", knb, eps, T)
    # rescale neighbour directions to the centre normalisation
    with np.errstate(divide="ignore", invalid="ignore"):
        knb = knb * (scale_c[:, None] / scale_nb)[..., None]
    dk = np.stack([(knb[:, 0] - knb[:, 1]) / (2 * h1), (knb[:, 2] - knb[:, 3]) / (2 * h2)], 1)
    dk_e = np.einsum("nia,nad->nid", sd.P, dk)
    pair = np.einsum("nid,d,njd->nij", dk_e, eps, sd.frame[:, 2:, :])
    return -pair / 2


def grass_lift(f: Immersion, sd: SurfaceData | None = None) -> GrassLift:
    sd = _surface(f, sd)
    w = connection_from_h(sd.h)
    C = np.stack([-w[:, :, 0, 0], w[:, :, 1, 0], -w[:, :, 0, 1], w[:, :, 1, 1]], -1)
    return GrassLift(sd, sd.frame[:, 2:, :], C)


def plane_null_directions(M: SpaceForm, x: np.ndarray, plane: np.ndarray, axis) -> tuple[np.ndarray, np.ndarray]:
    """alpha_+ and alpha_- of oriented spacelike planes: the normal null directions.

    Depends only on the oriented plane, not on the basis chosen in it.
    """
    from .immersion import darboux_frames

    fr, _, _, ok, _ = darboux_frames(M, x, plane[:, 0], plane[:, 1], axis)
    if not np.all(ok):
        raise SignatureError("plane is not spacelike")
    return fr[:, 0] + fr[:, 1], fr[:, 0] - fr[:, 1]


# -- holomorphy ------------------------------------------------------------------------

@dataclass
class HolomorphyReport:
    structure: str
    residual_L: float
    residual_K: float
    residual_J: float
    tol: float
    verdict: bool = field(init=False)
    residual_J_horizontal: float = 0.0
    residual_J_vertical: float = 0.0

    def __post_init__(self):
        self.verdict = bool(self.residual_L < self.tol and self.residual_K > self.tol and self.residual_J < self.tol)

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in (
            "structure", "residual_L", "residual_K", "residual_J", "residual_J_horizontal",
            "residual_J_vertical", "tol", "verdict")}


def _fibre_j(V: np.ndarray) -> np.ndarray:
    # complex structure on fibre coordinates (a, b) -> (b, -a)
    return np.stack([V[..., 1], -V[..., 0]], -1)


def _grass_j(C: np.ndarray) -> np.ndarray:
    # (c13, c23, c14, c24) -> (-c14, -c24, c13, c23)
    return np.stack([-C[..., 2], -C[..., 3], C[..., 0], C[..., 1]], -1)


def _horizontal_parts(sd: SurfaceData, k: np.ndarray):
    """Residuals of the horizontal conditions for a null normal k.

    L: components of df(e_i) along k (must vanish; df(e_i) is in k-perp).
    K: smallest singular value of the screen projection of df (must stay away from 0).
    J: screen J (e3 -> e4) compared with J^N applied to df.
    """
    eps = np.asarray(sd.extras["epsilons"], float)
    dfe = sd.frame[:, 2:, :]
    L = np.abs(np.einsum("nid,d,nd->ni", dfe, eps, k)).max(axis=1)
    screen = np.einsum("nid,d,njd->nij", dfe, eps, sd.frame[:, 2:, :])
    K = np.linalg.svd(np.where(np.isfinite(screen), screen, 0.0), compute_uv=False)[:, -1]
    # df(e4) screen components must equal J(df(e3)) = rotate (x, y) -> (-y, x)
    Jres = np.hypot(screen[:, 1, 0] + screen[:, 0, 1], screen[:, 1, 1] - screen[:, 0, 0])
    return L, K, Jres


def holomorphy_check(lift, structure: str, tol: float = 1e-5) -> HolomorphyReport:
    """Evaluate one of the optical structures on a lift.

    ``O+s`` needs the positive twistor lift and ``O-s`` the negative one;
    the second symbol fixes the fibre sign (``+`` uses the opposite of the
    fibre complex structure).  ``OG+``/``OG-`` act on a Grassmann lift.
    """
    if structure not in STRUCTURES:
        raise ValueError(f"unknown structure {structure!r}")
    sd = lift.surface
    ok = sd.ok
    if structure.startswith("OG"):
        if not isinstance(lift, GrassLift):
            raise TypeError("Grassmann structures act on grass_lift output")
        k = sd.frame[:, 0] + sd.frame[:, 1]
        L, K, Jh = _horizontal_parts(sd, k)
        s = 1 if structure == "OG+" else -1
        C = lift.d_vertical
        Jv = np.linalg.norm(C[:, 1] - s * _grass_j(C[:, 0]), axis=-1)
        L = np.zeros_like(L)  # the Grassmann structure has no null distribution
    else:
        if not isinstance(lift, TwistorLift):
            raise TypeError("twistor structures act on gauss_lift output")
        want = 1 if structure[1] == "+" else -1
        if lift.sign != want:
            raise ValueError(f"{structure} needs the {'positive' if want > 0 else 'negative'} lift")
        L, K, Jh = _horizontal_parts(sd, lift.directions)
        sigma = -1 if structure[2] == "+" else 1
        V = lift.d_vertical
        Jv = np.linalg.norm(V[:, 1] - sigma * _fibre_j(V[:, 0]), axis=-1)
    Jh_s, Jv_s = sup(Jh, ok), sup(Jv, ok)
    kmin = float(np.min(K[ok])) if np.any(ok) else 0.0
    return HolomorphyReport(structure, sup(L, ok), kmin, max(Jh_s, Jv_s), tol,
                            residual_J_horizontal=Jh_s, residual_J_vertical=Jv_s)


def horizontality_residual(lift: TwistorLift) -> float:
    return sup(np.linalg.norm(lift.d_vertical, axis=(1, 2)), lift.surface.ok)


EQUIVALENCE_ROWS = (
    ("O+-", "pos_semi_stationary"),
    ("O--", "neg_semi_stationary"),
    ("O++", "pos_semi_umbilic"),
    ("O-+", "neg_semi_umbilic"),
    ("OG+", "totally_umbilic"),
    ("OG-", "stationary"),
)
HORIZONTAL_ROWS = (("+horizontal", "plus_isotropic"), ("-horizontal", "minus_isotropic"))


def equivalence_crosscheck(f: Immersion, tol: float = 1e-5, source: str = "formula",
                      sd: SurfaceData | None = None) -> list[dict]:
    """Classification flags against holomorphy and horizontality verdicts."""
    sd = _surface(f, sd)
    fields = flag_residual_fields(decompose(sd.h))
    lifts = {1: gauss_lift(f, 1, sd, source), -1: gauss_lift(f, -1, sd, source)}
    glift = grass_lift(f, sd)
    rows = []
    for structure, flag in EQUIVALENCE_ROWS:
        lift = glift if structure.startswith("OG") else lifts[1 if structure[1] == "+" else -1]
        rep = holomorphy_check(lift, structure, tol)
        cres = sup(fields[flag], sd.ok)
        rows.append({
            "immersion": f.name, "structure": structure, "classification": flag,
            "classified": bool(cres < tol), "classification_residual": cres,
            "holomorphic": rep.verdict, "holomorphy_residual": rep.residual_J,
            "agree": bool((cres < tol) == rep.verdict),
        })
    for name, flag in HORIZONTAL_ROWS:
        res = horizontality_residual(lifts[1 if name[0] == "+" else -1])
        cres = sup(fields[flag], sd.ok)
        rows.append({
            "immersion": f.name, "structure": name, "classification": flag,
            "classified": bool(cres < tol), "classification_residual": cres,
            "holomorphic": bool(res < tol), "holomorphy_residual": res,
            "agree": bool((cres < tol) == (res < tol)),
        })
    return rows


def vertical_consistency(f: Immersion, sd: SurfaceData | None = None) -> float:
    """Largest difference between formula and direct vertical derivatives (both lifts)."""
    sd = _surface(f, sd)
    out = 0.0
    for sign in (1, -1):
        a = gauss_lift(f, sign, sd, "formula").d_vertical
        b = gauss_lift(f, sign, sd, "direct").d_vertical
        out = max(out, sup(np.abs(a - b).max(axis=(1, 2)), sd.ok))
    return out


# -- curvature conditions ------------------------------------------------------------------

def integrability_oplus(R: np.ndarray) -> tuple[float, float]:
    """Conditions for the positive optical structure at R(s1 + s2).

    ``R`` holds lowered curvature components in an oriented orthonormal
    frame (s1 timelike), zero-based.
    """
    r = lambda a, b, c, d: R[a - 1, b - 1, c - 1, d - 1]
    c1 = r(1, 4, 1, 3) + r(2, 4, 1, 3) + r(1, 4, 2, 3) + r(2, 4, 2, 3)
    c2 = (r(1, 4, 1, 4) + r(2, 4, 1, 4) + r(1, 4, 2, 4) + r(2, 4, 2, 4)
          - r(1, 3, 1, 3) - r(2, 3, 1, 3) - r(1, 3, 2, 3) - r(2, 3, 2, 3))
    return abs(c1), abs(c2)


def integrability_og(R: np.ndarray) -> tuple[float, float, float, float]:
    """Four conditions for the Grassmann optical structure at a frame."""
    r = lambda a, b, c, d: R[a - 1, b - 1, c - 1, d - 1]
    return (
        abs(r(1, 4, 1, 4) + r(2, 4, 1, 4) - r(1, 3, 1, 3) - r(2, 3, 1, 3)),
        abs(r(1, 4, 2, 4) + r(2, 4, 2, 4) - r(1, 3, 2, 3) - r(2, 3, 2, 3)),
        abs(2 * r(1, 3, 1, 4) + r(2, 3, 1, 4) + r(2, 4, 1, 3)),
        abs(2 * r(2, 3, 2, 4) + r(1, 4, 2, 3) + r(1, 3, 2, 4)),
    )


def frame_components(R: np.ndarray, basis: np.ndarray) -> np.ndarray:
    """Lowered components in the frame whose vectors are the columns of ``basis``."""
    return np.einsum("abcd,ai,bj,ck,dl->ijkl", R, basis, basis, basis, basis)


def audit_frames(point_index: int, n_frames: int = 50, seed: int = 0) -> np.ndarray:
    """Pseudo-random proper Lorentz transformations for one sample point.

    Seeded from (seed, point index), so the audit does not depend on how
    points are distributed over threads.
    """
    rng = np.random.default_rng([seed, point_index])
    return np.stack([random_lorentz(rng) for _ in range(n_frames)])


def audit_chart(chart: MetricChart, n_points: int = 5, n_frames: int = 50, seed: int = 0,
                h: float = 1e-3) -> dict:
    """Sup of the curvature conditions over sampled points and adapted frames."""
    rng = np.random.default_rng(seed)
    pts = chart.sample_points(n_points, rng)
    oplus, og = [], []
    per_point = []
    for idx, x in enumerate(pts):
        R = riemann_numeric(chart.metric, x, h)
        base = orthonormal_basis(chart.metric(x))
        po, pg = 0.0, 0.0
        for L in audit_frames(idx, n_frames, seed):
            Rf = frame_components(R, base @ L)
            po = max(po, *integrability_oplus(Rf))
            pg = max(pg, *integrability_og(Rf))
        oplus.append(po)
        og.append(pg)
        per_point.append({"point": x.tolist(), "oplus": po, "og": pg})
    return {"chart": chart.name, "oplus": max(oplus), "og": max(og), "points": per_point,
            "n_frames": n_frames, "seed": seed}


# -- CR structures on hypersurfaces ---------------------------------------------------------

def cr_compare(M: SpaceForm, chart, y, l=None, h: float = 1e-3, rng: np.random.Generator | None = None) -> float:
    """Defect between the induced CR structure and the sphere bundle structure.

    ``l`` is a unit tangent given by coefficients in the orthonormalised
    chart basis of the hypersurface (random when omitted).  The adapted
    frame is (s1 normal, s2 = l, s3, s4) and the returned magnitude combines
    W33 - W44 and W34 with W_ij = <nabla_{s_i} s1, s_j>.
    """
    geo = hypersurface_geometry(M, chart, y, h)
    Lc = np.linalg.cholesky(geo["gram"])
    C = np.linalg.inv(Lc).T
    W = C.T @ geo["weingarten"] @ C  # shape operator in an orthonormal tangent frame
    if l is None:
        rng = rng or np.random.default_rng(0)
        l = rng.normal(size=3)
    l = np.asarray(l, float)
    l = l / np.linalg.norm(l)
    # complete l to an oriented orthonormal basis of R^3
    helper = np.eye(3)[np.argmin(np.abs(l))]
    s3 = np.cross(l, helper)
    s3 /= np.linalg.norm(s3)
    s4 = np.cross(l, s3)
    d1 = s3 @ W @ s3 - s4 @ W @ s4
    d2 = s3 @ W @ s4
    return float(np.hypot(d1, 2 * d2))


def graph_hypersurface(amplitude: float = 0.1):
    """Spacelike graph x1 = amplitude (y1^2 - y2^2) in R41 (not umbilic)."""
    def chart(y):
        y = np.asarray(y, float)
        return np.array([amplitude * (y[0] ** 2 - y[1] ** 2), y[0], y[1], y[2]])
    return chart


# -- tension of the Grassmann lift -------------------------------------------------------------

def gauss_tension(f: Immersion, lambda_g: float, tol: float = 1e-5, sd: SurfaceData | None = None) -> dict:
    """Horizontal and vertical parts of the tension field of the Grassmann lift.

    For a space form of curvature S the horizontal part is (1 - lambda_g S / 12)
    times the mean curvature and the vertical part consists of the
    derivatives e_i(h^alpha_33 + h^alpha_44).
    """
    sd = _surface(f, sd)
    S = f.space_form.S
    ok = sd.ok
    traces = sd.h[:, :, 0, 0] + sd.h[:, :, 1, 1]
    H = 0.5 * traces
    factor = 1.0 - lambda_g * S / 12.0
    horizontal = abs(factor) * np.linalg.norm(H, axis=1)
    nb_tr = sd.extras["nb_h"][:, :, :, 0, 0] + sd.extras["nb_h"][:, :, :, 1, 1]  # (N, nb, alpha)
    h1, h2 = sd.extras["steps"]
    dtr = np.stack([(nb_tr[:, 0] - nb_tr[:, 1]) / (2 * h1), (nb_tr[:, 2] - nb_tr[:, 3]) / (2 * h2)], 1)
    de = np.einsum("nia,nak->nik", sd.P, dtr)  # e_{3+i}(tr h^alpha)
    terms = {
        "horizontal": sup(horizontal, ok),
        "e3_tr_h1": sup(np.abs(de[:, 0, 0]), ok),
        "e3_tr_h2": sup(np.abs(de[:, 0, 1]), ok),
        "e4_tr_h1": sup(np.abs(de[:, 1, 0]), ok),
        "e4_tr_h2": sup(np.abs(de[:, 1, 1]), ok),
    }
    harmonic = all(v < tol for v in terms.values())
    mean_sup = sup(np.linalg.norm(H, axis=1), ok)
    grad_sup = max(terms[k] for k in terms if k != "horizontal")
    critical = abs(lambda_g * S - 12.0) < 1e-12
    expected = (grad_sup < tol) if critical else (mean_sup < tol)
    return {
        "lambda_g": lambda_g, "S": S, "factor": factor, "terms": terms, "harmonic": bool(harmonic),
        "mean_curvature_sup": mean_sup, "grad_mean_sup": grad_sup, "critical": critical,
        "expected_harmonic": bool(expected), "consistent": bool(expected == harmonic),
        "conformality": sup(sd.conformality, ok), "tol": tol,
    }
