"""Explicit surface families, the null-geodesic deformation and their coefficients.

Model surfaces and their conformal charts:

* ``plane``: (z1, z2) in [-1, 1]^2, conformal factor 1.
* ``sphere``: stereographic chart y = (|z|^2 - 1, 2 z1, 2 z2) / (1 + |z|^2)
  with factor 4 / (1 + |z|^2)^2, sampled on [-1.5, 1.5]^2.
* ``theta_sphere``: the same chart with the first component negated, used for
  round spheres in R41 so that the outer normal points along the
  positive null direction.
* ``disk``: Poincare disk chart of the upper hyperboloid sheet,
  (1 + |w|^2, 2 w1, 2 w2) / (1 - |w|^2) with factor 4 / (1 - |w|^2)^2,
  sampled on [-0.5, 0.5]^2.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .immersion import (
    Immersion, RankError, bochner_laplace, classify, darboux_frames, decompose, surface_data, sup,
)
from .lorentz import DomainError
from .space_forms import (
    MINKOWSKI, PSEUDO_HYPERBOLIC, PSEUDO_SPHERE, ConfigurationError, ConstraintError, SpaceForm,
    space_form,
)


class ConstructionError(ValueError):
    pass


# -- model surfaces ------------------------------------------------------------

@dataclass(frozen=True)
class ModelSurface:
    name: str
    embed: Callable[[np.ndarray], np.ndarray]
    factor: Callable[[np.ndarray], np.ndarray]
    domain: tuple[tuple[float, float], tuple[float, float]]
    curvature: float


def _sq(z):
    return z[..., 0] ** 2 + z[..., 1] ** 2


def _plane(z):
    return np.asarray(z, float)


def _sphere(z):
    r2 = _sq(z)
    return np.stack([r2 - 1, 2 * z[..., 0], 2 * z[..., 1]], -1) / (1 + r2)[..., None]


def _theta_sphere(z):
    r2 = _sq(z)
    return np.stack([1 - r2, 2 * z[..., 0], 2 * z[..., 1]], -1) / (1 + r2)[..., None]


def _disk(w):
    r2 = _sq(w)
    if np.any(r2 >= 1):
        raise ConfigurationError("disk chart is only defined for |w| < 1")
    return np.stack([1 + r2, 2 * w[..., 0], 2 * w[..., 1]], -1) / (1 - r2)[..., None]


MODELS = {
    "plane": ModelSurface("plane", _plane, lambda z: np.ones(np.shape(z)[:-1]), ((-1.0, 1.0), (-1.0, 1.0)), 0.0),
    "sphere": ModelSurface("sphere", _sphere, lambda z: 4 / (1 + _sq(z)) ** 2, ((-1.5, 1.5), (-1.5, 1.5)), 1.0),
    "theta_sphere": ModelSurface("theta_sphere", _theta_sphere, lambda z: 4 / (1 + _sq(z)) ** 2,
                                 ((-1.5, 1.5), (-1.5, 1.5)), 1.0),
    "disk": ModelSurface("disk", _disk, lambda w: 4 / (1 - _sq(w)) ** 2, ((-0.5, 0.5), (-0.5, 0.5)), -1.0),
}


# -- scalar fields -------------------------------------------------------------

@dataclass
class ScalarField:
    """Real function on a model surface, evaluated through its chart.

    ``fn`` receives chart points z (..., 2) and the embedded model points
    y (..., 2 or 3) and returns values of shape (...).
    """

    name: str
    fn: Callable[[np.ndarray, np.ndarray], np.ndarray]
    params: tuple = ()
    lattice: dict | None = field(default=None, repr=False)

    def on(self, model: ModelSurface) -> Callable[[np.ndarray], np.ndarray]:
        def lam(z):
            z = np.asarray(z, float)
            out = np.asarray(self.fn(z, model.embed(z)), float)
            return np.broadcast_to(out, z.shape[:-1]).copy()
        return lam

    def check_finite(self, model: ModelSurface, pts: np.ndarray) -> None:
        if not np.all(np.isfinite(self.on(model)(pts))):
            raise ConfigurationError(f"scalar field {self.name!r} is not finite on the grid")

    def to_json(self) -> dict:
        if self.lattice is not None:
            return {"lattice": self.lattice}
        return {"name": self.name}


def _linear(y, a, b, c):
    if y.shape[-1] == 2:
        return a + b * y[..., 0] + c * y[..., 1]
    return a * y[..., 0] + b * y[..., 1] + c * y[..., 2]


def _random_field(seed: int):
    rng = np.random.default_rng(seed)
    freq = rng.uniform(-1.5, 1.5, size=(3, 2))
    phase = rng.uniform(0, 2 * np.pi, size=3)
    amp = rng.uniform(0.02, 0.08, size=3)
    quad = rng.uniform(-0.05, 0.05, size=3)

    def fn(z, y):
        val = quad[0] * z[..., 0] ** 2 + quad[1] * z[..., 0] * z[..., 1] + quad[2] * z[..., 1] ** 2
        for k in range(3):
            val = val + amp[k] * np.sin(z @ freq[k] + phase[k])
        return val
    return fn


_FIXED = {
    "zero": lambda z, y: np.zeros(z.shape[:-1]),
    "poly:z1^2": lambda z, y: z[..., 0] ** 2,
    "poly:z1^2+z2^2": lambda z, y: z[..., 0] ** 2 + z[..., 1] ** 2,
    "harmonic:z1^2-z2^2": lambda z, y: z[..., 0] ** 2 - z[..., 1] ** 2,
    "harmonic:z1^3-3z1z2^2": lambda z, y: z[..., 0] ** 3 - 3 * z[..., 0] * z[..., 1] ** 2,
    "sin:z1": lambda z, y: np.sin(z[..., 0]),
}


def scalar_field(name: str) -> ScalarField:
    """Look up a built-in field by name.

    Names: zero, const:a, poly:z1^2, poly:z1^2+z2^2, harmonic:z1^2-z2^2,
    harmonic:z1^3-3z1z2^2, sin:z1, linear:a,b,c (a linear function of the
    embedded model point, or a + b z1 + c z2 on the plane), random:seed.
    """
    name = name.strip()
    if name in _FIXED:
        return ScalarField(name, _FIXED[name])
    m = re.fullmatch(r"const:([-+0-9.eE]+)", name)
    if m:
        a = float(m.group(1))
        return ScalarField(name, lambda z, y: np.full(z.shape[:-1], a), (a,))
    m = re.fullmatch(r"linear:([-+0-9.eE]+),([-+0-9.eE]+),([-+0-9.eE]+)", name)
    if m:
        a, b, c = map(float, m.groups())
        return ScalarField(name, lambda z, y: _linear(y, a, b, c), (a, b, c))
    m = re.fullmatch(r"random:(\d+)", name)
    if m:
        seed = int(m.group(1))
        return ScalarField(name, _random_field(seed), (seed,))
    raise ConfigurationError(f"unknown scalar field {name!r}")


def lattice_field(x1, x2, values) -> ScalarField:
    """Scalar field given by values on a lattice, interpolated with cubic splines."""
    from scipy.interpolate import RectBivariateSpline

    x1, x2, values = np.asarray(x1, float), np.asarray(x2, float), np.asarray(values, float)
    if values.shape != (len(x1), len(x2)) or not np.all(np.isfinite(values)):
        raise ConfigurationError("lattice field must be finite with shape (len(x1), len(x2))")
    # widen the box so edge stencils see the end polynomials instead of a clamped value
    pad1, pad2 = 0.1 * np.ptp(x1), 0.1 * np.ptp(x2)
    bbox = [x1[0] - pad1, x1[-1] + pad1, x2[0] - pad2, x2[-1] + pad2]
    spline = RectBivariateSpline(x1, x2, values, bbox=bbox, kx=3, ky=3)

    def fn(z, y):
        return spline.ev(z[..., 0], z[..., 1])
    payload = {"x1": x1.tolist(), "x2": x2.tolist(), "values": values.tolist()}
    return ScalarField("lattice", fn, lattice=payload)


# -- family specifications ------------------------------------------------------

FAMILY_TAGS = {
    "r41": ("i_lambda", "j_lambda"),
    "s41": ("i_lambda", "i_c_lambda"),
    "h41": ("i_lambda", "j_c_lambda"),
}


@dataclass
class FamilySpec:
    space: str
    tag: str
    lam: ScalarField
    theta: float | None = None
    c: float | None = None

    def __post_init__(self):
        if self.space not in FAMILY_TAGS:
            raise ConfigurationError(f"unknown space form {self.space!r}")
        if self.tag not in FAMILY_TAGS[self.space]:
            raise ConfigurationError(f"family {self.tag!r} is not defined for {self.space}")
        if self.tag == "j_lambda":
            self.theta = 1.0 if self.theta is None else float(self.theta)
            if not self.theta > 0:
                raise ConfigurationError("theta must be positive")
        if self.tag == "i_c_lambda":
            self.c = 0.0 if self.c is None else float(self.c)
            if not abs(self.c) <= 1:
                raise ConfigurationError("c must satisfy |c| <= 1")
        if self.tag == "j_c_lambda":
            self.c = 1.0 if self.c is None else float(self.c)
            if not self.c >= 1:
                raise ConfigurationError("c must satisfy c >= 1")

    @property
    def model(self) -> ModelSurface:
        if self.space == "r41":
            return MODELS["plane" if self.tag == "i_lambda" else "theta_sphere"]
        if self.space == "h41" and self.tag == "i_lambda":
            return MODELS["disk"]
        return MODELS["sphere"]

    @property
    def is_i_type(self) -> bool:
        return self.tag in ("i_lambda", "i_c_lambda")

    def to_json(self) -> dict:
        out = {"space": self.space, "tag": self.tag, "lambda": self.lam.to_json()}
        if self.theta is not None:
            out["theta"] = self.theta
        if self.c is not None:
            out["c"] = self.c
        return out


def _family_map(spec: FamilySpec) -> Callable[[np.ndarray], np.ndarray]:
    model, lam = spec.model, spec.lam.on(spec.model)

    if spec.space == "r41" and spec.tag == "i_lambda":
        def chart(z):
            L = lam(z)
            return np.stack([L, L, z[..., 0], z[..., 1]], -1)
    elif spec.space == "r41":
        theta = spec.theta

        def chart(z):
            L, y = lam(z), model.embed(z)
            return np.concatenate([L[..., None], (L + theta)[..., None] * y], -1)
    elif spec.space == "s41":
        c = 0.0 if spec.c is None else spec.c
        s = np.sqrt(1 - c * c)

        def chart(z):
            L, y = lam(z), model.embed(z)
            return np.concatenate([L[..., None], (L * s + c)[..., None], (s - L * c)[..., None] * y], -1)
    elif spec.tag == "i_lambda":
        def chart(w):
            L, y = lam(w), model.embed(w)
            return np.stack([y[..., 0], L, L, y[..., 1], y[..., 2]], -1)
    else:
        c = spec.c
        s = np.sqrt(c * c - 1)

        def chart(z):
            L, y = lam(z), model.embed(z)
            return np.concatenate([L[..., None], (L * s + c)[..., None], (s + L * c)[..., None] * y], -1)
    return chart


def family_time_axis(spec: FamilySpec) -> np.ndarray | None:
    # the round-sphere family in H41 sits near u2 = c >= 1, where u2 is not
    # timelike along M; u1 is used as reference there instead
    if spec.space == "h41" and spec.tag == "j_c_lambda":
        return np.array([1.0, 0, 0, 0, 0])
    return None


def build_family(spec: FamilySpec, resolution: int = 64, fd_step: float = 1e-3,
                 domain=None) -> Immersion:
    M = space_form(spec.space)
    model = spec.model
    domain = model.domain if domain is None else domain
    chart = _family_map(spec)
    f = Immersion(M, chart, domain, resolution, fd_step, family_time_axis(spec),
                  name=f"{spec.space}:{spec.tag}:{spec.lam.name}")
    pts = f.points()
    spec.lam.check_finite(model, pts)
    try:
        M.check_point(f(pts), tol=1e-10)
    except ConstraintError as exc:
        raise ConstructionError(str(exc)) from None
    return f


# -- deformation along normal null geodesics -------------------------------------

def positive_null_normal(f: Immersion, pts: np.ndarray) -> np.ndarray:
    """k+ at chart points, scaled so that <k+, T> = -1 for the reference axis T."""
    h = f.fd_step
    e1, e2 = np.array([h, 0.0]), np.array([0.0, h])
    x = f(pts)
    f1 = (f(pts + e1) - f(pts - e1)) / (2 * h)
    f2 = (f(pts + e2) - f(pts - e2)) / (2 * h)
    frames, _, _, ok, _ = darboux_frames(f.space_form, x, f1, f2, f.axis())
    if not np.all(ok):
        raise RankError("base immersion is degenerate at some sample")
    return frames[:, 0] + frames[:, 1]


def null_geodesic_points(M: SpaceForm, x: np.ndarray, k: np.ndarray, t: np.ndarray) -> np.ndarray:
    """Vectorised null geodesics t -> x + t k (null lines stay on the quadric)."""
    return x + np.asarray(t)[..., None] * k


def deform_null(base: Immersion, lam: ScalarField, model: ModelSurface | str,
                check_base: bool = True, tol: float = 1e-5) -> Immersion:
    """Move each point of ``base`` along its positive normal null geodesic.

    The parameter at a chart point p is lam(p).  The null normal is computed
    numerically from the base immersion, so the result does not rely on the
    closed-form family expressions.
    """
    model = MODELS[model] if isinstance(model, str) else model
    if check_base:
        rep = classify(base.with_options(resolution=16), tol=tol)
        if not rep.flags["totally_umbilic"]:
            raise ConfigurationError("deformation base must be totally umbilic")
    field_fn = lam.on(model)
    M = base.space_form

    def chart(z):
        z = np.asarray(z, float)
        flat = z.reshape(-1, 2)
        out = null_geodesic_points(M, base(flat), positive_null_normal(base, flat), field_fn(flat))
        return out.reshape(z.shape[:-1] + (M.dim,))

    return Immersion(M, chart, base.domain, base.resolution, base.fd_step, base.time_axis,
                     name=f"deform({base.name},{lam.name})")


def catalog_bases(resolution: int = 64, fd_step: float = 1e-3) -> list[tuple[Immersion, ModelSurface]]:
    """Totally umbilic bases used for the deformation battery.

    The plane and a round sphere in R41, the totally geodesic sphere and a
    small sphere in S41, the totally geodesic hyperbolic plane and a round
    sphere in H41.
    """
    zero = scalar_field("zero")
    specs = [
        FamilySpec("r41", "i_lambda", zero),
        FamilySpec("r41", "j_lambda", zero, theta=1.0),
        FamilySpec("s41", "i_c_lambda", zero, c=0.0),
        FamilySpec("s41", "i_c_lambda", zero, c=0.5),
        FamilySpec("h41", "i_lambda", zero),
        FamilySpec("h41", "j_c_lambda", zero, c=2.0),
    ]
    out = []
    for s in specs:
        f = build_family(s, resolution, fd_step)
        f.name = f"base:{s.space}:{s.tag}" + (f":c={s.c}" if s.c is not None else "") + (
            f":theta={s.theta}" if s.theta is not None else "")
        out.append((f, s.model))
    return out


# -- analytic coefficients ---------------------------------------------------------

def isotropy_coefficient(spec: FamilySpec, p, h: float = 1e-3) -> np.ndarray:
    """Coefficient whose half is the H+ component of an i-type family member.

    Flat Laplacian of lam in R41, (Laplacian + 2) lam on the round sphere of
    S41 and (Laplacian - 2) lam on the hyperbolic plane of H41, each
    Laplacian taken with the model conformal factor.
    """
    if not spec.is_i_type:
        raise DomainError("no analytic coefficient is available for j-type families")
    if spec.tag == "i_c_lambda" and abs(spec.c or 0.0) > 1e-14:
        raise DomainError("the analytic coefficient is stated for the totally geodesic member c = 0")
    model = spec.model
    lam = spec.lam.on(model)
    p = np.asarray(p, float)
    lap = bochner_laplace(lam, model.factor, p, h)
    if spec.space == "r41":
        return lap
    if spec.space == "s41":
        return lap + 2 * lam(p)
    return lap - 2 * lam(p)


def stationary_check(spec: FamilySpec, tol: float = 1e-5, resolution: int = 64, fd_step: float = 1e-3) -> dict:
    f = build_family(spec, resolution, fd_step)
    pts = f.points()
    coeff = isotropy_coefficient(spec, pts, h=max(fd_step, 1e-3))
    rep = classify(f, tol=tol)
    verdict = bool(sup(np.abs(coeff)) < tol)
    return {
        "coefficient_sup": sup(np.abs(coeff)),
        "stationary": verdict,
        "classify_stationary": rep.flags["stationary"],
        "agree": verdict == rep.flags["stationary"],
        "residual": rep.residuals["stationary"],
    }


# -- mesh export -------------------------------------------------------------------

MESH_COLUMNS = ("x1", "x2", "x3", "x4", "x5", "F", "H_plus", "H_minus", "abs_L_plus", "abs_L_minus")


def mesh_table(f: Immersion) -> tuple[list[str], list[list]]:
    sd = surface_data(f, neighbours=False)
    dec = decompose(sd.h)
    rows = []
    for n in range(len(sd)):
        x = list(sd.position[n])
        coords = x + [None] * (5 - len(x))
        if sd.ok[n]:
            vals = [sd.F[n], dec.H_plus[n], dec.H_minus[n], abs(dec.L_plus[n]), abs(dec.L_minus[n])]
        else:
            vals = [None] * 5
        rows.append(coords + [None if v is None else float(v) for v in vals])
    return list(MESH_COLUMNS), rows
