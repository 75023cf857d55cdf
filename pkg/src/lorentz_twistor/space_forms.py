"""Lorentzian space forms realised as quadrics in flat ambient spaces.

Three models are provided: Minkowski space R41, the pseudosphere
{<x,x> = 1} in R51 (curvature +1) and the pseudohyperbolic space
{<x,x> = -1} in R52 (curvature -1).  Curvature components follow
R(X,Y,Z,W) = S(<X,Z><Y,W> - <X,W><Y,Z>), so spacelike planes of the
pseudosphere have sectional curvature +1.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .lorentz import R41, R51, R52, NullDir, Signature, SignatureError

QUADRIC_TOL = 1e-10


class ConstraintError(ValueError):
    """Point is off the quadric or a vector violates a tangency requirement."""


class ConfigurationError(ValueError):
    pass


class PoleError(ValueError):
    pass


@dataclass(frozen=True)
class SpaceForm:
    key: str
    kind: str
    S: float
    ambient: Signature
    quadric_sign: float
    # constant ambient vector fixing the time orientation and the scale of null normals
    time_axis: tuple[float, ...]
    # frames (e1..e4) at x are positive iff orientation_sign * det[x, e1..e4] > 0
    orientation_sign: int = 1

    @property
    def dim(self) -> int:
        return self.ambient.dims

    @property
    def is_flat(self) -> bool:
        return self.quadric_sign == 0

    def axis(self) -> np.ndarray:
        return np.asarray(self.time_axis, dtype=float)

    def quadric_residual(self, x) -> np.ndarray:
        x = np.asarray(x, float)
        if self.is_flat:
            return np.zeros(x.shape[:-1])
        return self.ambient.inner(x, x) - self.quadric_sign

    def check_point(self, x, tol: float = QUADRIC_TOL) -> None:
        r = np.max(np.abs(self.quadric_residual(x)), initial=0.0)
        if r > tol * max(1.0, float(np.max(np.abs(x)))) ** 2:
            raise ConstraintError(f"point off the {self.kind} quadric (residual {r:.2e})")

    def orientation(self, x, frame_rows) -> np.ndarray:
        """Signed volume used to decide positive orientation of frames at x."""
        F = np.asarray(frame_rows, float)
        if self.is_flat:
            return np.linalg.det(F)
        M = np.concatenate([np.asarray(x, float)[..., None, :], F], axis=-2)
        return self.orientation_sign * np.linalg.det(M)


MINKOWSKI = SpaceForm("r41", "Minkowski", 0.0, R41, 0.0, (1.0, 0.0, 0.0, 0.0))
PSEUDO_SPHERE = SpaceForm("s41", "PseudoSphere", 1.0, R51, 1.0, (1.0, 0.0, 0.0, 0.0, 0.0), -1)
PSEUDO_HYPERBOLIC = SpaceForm("h41", "PseudoHyperbolic", -1.0, R52, -1.0, (0.0, 1.0, 0.0, 0.0, 0.0), 1)

SPACE_FORMS = {m.key: m for m in (MINKOWSKI, PSEUDO_SPHERE, PSEUDO_HYPERBOLIC)}


def space_form(key: str) -> SpaceForm:
    try:
        return SPACE_FORMS[key]
    except KeyError:
        raise ConfigurationError(f"unknown space form {key!r}; use one of {sorted(SPACE_FORMS)}") from None


def project_tangent(M: SpaceForm, x, v, tol: float = QUADRIC_TOL) -> np.ndarray:
    """Tangential part v - (<v,x>/<x,x>) x of an ambient vector at x."""
    v = np.asarray(v, float)
    if M.is_flat:
        return v.copy()
    x = np.asarray(x, float)
    M.check_point(x, tol)
    c = M.ambient.inner(v, x) / M.ambient.inner(x, x)
    return v - np.asarray(c)[..., None] * x


def covariant_derivative(
    M: SpaceForm,
    curve: Callable[[float], np.ndarray],
    fieldfn: Callable[[float], np.ndarray],
    t: float,
    h: float = 1e-3,
) -> np.ndarray:
    """Levi-Civita derivative of a tangent field along a curve at parameter t.

    Flat ambient derivative by central differences, then tangential projection.
    """
    if h < 1e-12:
        raise ConfigurationError("finite-difference step underflow")
    flat = (np.asarray(fieldfn(t + h)) - np.asarray(fieldfn(t - h))) / (2 * h)
    return project_tangent(M, curve(t), flat, tol=1e-8)


def geodesic_residual(M: SpaceForm, curve: Callable[[float], np.ndarray], t: float, h: float = 1e-3) -> float:
    """Euclidean size of the tangential acceleration of a curve."""
    acc = (np.asarray(curve(t + h)) - 2 * np.asarray(curve(t)) + np.asarray(curve(t - h))) / h**2
    return float(np.linalg.norm(project_tangent(M, curve(t), acc, tol=1e-8)))


def null_geodesic(M: SpaceForm, p, k, t, tol: float = 1e-10) -> np.ndarray:
    """Point p + t k on the null line through p with tangent k.

    On the quadrics the line stays on the quadric because <p,k> = <k,k> = 0.
    """
    p = np.asarray(p, float)
    k = np.asarray(k.representative if isinstance(k, NullDir) else k, float)
    M.check_point(p)
    scale = max(1.0, float(np.max(np.abs(k))))
    if abs(M.ambient.inner(k, k)) > tol * scale**2:
        raise ConstraintError("direction is not null")
    if not M.is_flat and abs(M.ambient.inner(k, p)) > tol * scale * max(1.0, float(np.max(np.abs(p)))):
        raise ConstraintError("direction is not tangent at p")
    t = np.asarray(t, float)
    return p + t[..., None] * k if t.ndim else p + float(t) * k


# -- curvature ---------------------------------------------------------------

def constant_curvature_tensor(S: float, gram: np.ndarray) -> np.ndarray:
    """R_ijkl = S (G_ik G_jl - G_il G_jk) for a Gram matrix G."""
    G = np.asarray(gram, float)
    return S * (np.einsum("ik,jl->ijkl", G, G) - np.einsum("il,jk->ijkl", G, G))


def riemann(M: SpaceForm, frame=None) -> np.ndarray:
    """Curvature components of a space form in a frame (rows are ambient vectors).

    Without a frame the components refer to an abstract orthonormal frame
    with signs (-1, 1, 1, 1).
    """
    if frame is None:
        G = np.diag([-1.0, 1.0, 1.0, 1.0])
    else:
        F = np.asarray(frame, float)
        G = F @ M.ambient.eta @ F.T
    return constant_curvature_tensor(M.S, G)


MetricFn = Callable[[np.ndarray], np.ndarray]


def christoffel(metric: MetricFn, x, h: float = 1e-3) -> np.ndarray:
    """Gamma^a_bc of a metric chart, derivatives by central differences."""
    x = np.asarray(x, float)
    n = x.size
    dg = np.empty((n, n, n))
    for c in range(n):
        e = np.zeros(n)
        e[c] = h
        dg[c] = (metric(x + e) - metric(x - e)) / (2 * h)
    low = 0.5 * (np.einsum("bdc->dbc", dg) + np.einsum("cdb->dbc", dg) - dg)
    return np.einsum("ad,dbc->abc", np.linalg.inv(metric(x)), low)


def _riemann_from_gamma(g, gamma, dgamma) -> np.ndarray:
    # dgamma[c, a, b, d] = d_c Gamma^a_bd
    up = (
        np.einsum("cadb->abcd", dgamma)
        - np.einsum("dacb->abcd", dgamma)
        + np.einsum("ace,edb->abcd", gamma, gamma)
        - np.einsum("ade,ecb->abcd", gamma, gamma)
    )
    return np.einsum("ae,ebcd->abcd", g, up)


def riemann_numeric(metric: MetricFn, x, h: float = 1e-3) -> np.ndarray:
    """Lowered curvature R_abcd of a metric chart at x (second-order accurate)."""
    x = np.asarray(x, float)
    g = metric(x)
    if abs(np.linalg.det(g)) < 1e-14:
        raise np.linalg.LinAlgError("degenerate metric")
    n = x.size
    dgamma = np.empty((n, n, n, n))
    for c in range(n):
        e = np.zeros(n)
        e[c] = h
        dgamma[c] = (christoffel(metric, x + e, h) - christoffel(metric, x - e, h)) / (2 * h)
    return _riemann_from_gamma(g, christoffel(metric, x, h), dgamma)


def ricci(R: np.ndarray, g: np.ndarray) -> np.ndarray:
    return np.einsum("ac,abcd->bd", np.linalg.inv(g), R)


def kulkarni_nomizu(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    return (
        np.einsum("ac,bd->abcd", A, B)
        + np.einsum("bd,ac->abcd", A, B)
        - np.einsum("ad,bc->abcd", A, B)
        - np.einsum("bc,ad->abcd", A, B)
    )


def weyl(R: np.ndarray, g: np.ndarray) -> np.ndarray:
    """Weyl part of a 4-dimensional curvature tensor (Ricci terms subtracted)."""
    n = g.shape[0]
    Ric = ricci(R, g)
    scal = float(np.einsum("bd,bd->", np.linalg.inv(g), Ric))
    schouten = (Ric - scal / (2 * (n - 1)) * g) / (n - 2)
    return R - kulkarni_nomizu(schouten, g)


def orthonormal_basis(g: np.ndarray) -> np.ndarray:
    """Columns e_i with e_i^T g e_j = diag(-1, 1, 1, 1); timelike first.

    Gram-Schmidt on the coordinate basis, started from the most timelike axis.
    """
    n = g.shape[0]
    order = list(np.argsort(np.diag(g)))
    basis = []
    for idx in order:
        v = np.zeros(n)
        v[idx] = 1.0
        for b in basis:
            s = b @ g @ b
            v = v - (v @ g @ b) / s * b
        nv = v @ g @ v
        basis.append(v / np.sqrt(abs(nv)))
    B = np.stack(basis, axis=1)
    signs = np.einsum("ai,ab,bi->i", B, g, B)
    if np.sum(signs < 0) != 1:
        raise SignatureError("metric is not Lorentzian")
    t = int(np.argmin(signs))
    cols = [t] + [i for i in range(n) if i != t]
    return B[:, cols]


@dataclass
class MetricChart:
    """Named metric on an open subset of R^4 with a sample centre and radius."""

    name: str
    metric: MetricFn
    center: np.ndarray = field(default_factory=lambda: np.zeros(4))
    radius: float = 0.3
    S: float | None = None  # constant curvature, when the chart models a space form

    def sample_points(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return self.center + rng.uniform(-self.radius, self.radius, size=(n, 4))


ETA4 = np.diag([-1.0, 1.0, 1.0, 1.0])


def flat_chart() -> MetricChart:
    return MetricChart("flat", lambda x: ETA4.copy(), S=0.0)


def pseudo_sphere_graph_chart() -> MetricChart:
    """Chart (x1, x2, x4, x5) of the pseudosphere solving for x3 > 0."""

    def metric(q):
        x3 = np.sqrt(1.0 - (-q[0] ** 2 + q[1] ** 2 + q[2] ** 2 + q[3] ** 2))
        dq = ETA4 @ q
        return ETA4 + np.outer(dq, dq) / x3**2

    return MetricChart("pseudo_sphere_graph", metric, S=1.0)


def pseudo_hyperbolic_graph_chart() -> MetricChart:
    """Chart (x1, x3, x4, x5) of the pseudohyperbolic space solving for x2 > 0."""

    def metric(q):
        x2 = np.sqrt(1.0 + (-q[0] ** 2 + q[1] ** 2 + q[2] ** 2 + q[3] ** 2))
        dq = ETA4 @ q
        return ETA4 - np.outer(dq, dq) / x2**2

    return MetricChart("pseudo_hyperbolic_graph", metric, S=-1.0)


def conformal_flat_chart(rho: Callable[[np.ndarray], float] | None = None, name: str = "conformal_x3sq") -> MetricChart:
    """exp(2 rho) times the Minkowski metric; default rho = 0.1 x3^2."""
    if rho is None:
        rho = lambda x: 0.1 * x[2] ** 2
    return MetricChart(name, lambda x: np.exp(2 * rho(x)) * ETA4, center=np.array([0.0, 0.0, 0.5, 0.0]))


def product_chart() -> MetricChart:
    """Flat 2d Minkowski times a unit round sphere (stereographic chart).

    Its Weyl tensor does not vanish, so it is not conformally flat.
    """

    def metric(x):
        F = 4.0 / (1.0 + x[2] ** 2 + x[3] ** 2) ** 2
        return np.diag([-1.0, 1.0, F, F])

    return MetricChart("product_r11_s2", metric, center=np.array([0.0, 0.0, 0.2, 0.1]))


BUILTIN_CHARTS: dict[str, Callable[[], MetricChart]] = {
    "flat": flat_chart,
    "pseudo_sphere_graph": pseudo_sphere_graph_chart,
    "pseudo_hyperbolic_graph": pseudo_hyperbolic_graph_chart,
    "conformal_x3sq": conformal_flat_chart,
    "product_r11_s2": product_chart,
}


def space_form_chart(M: SpaceForm) -> MetricChart:
    return {"r41": flat_chart, "s41": pseudo_sphere_graph_chart, "h41": pseudo_hyperbolic_graph_chart}[M.key]()


@dataclass
class LatticeMetric:
    """Metric components sampled on a rectilinear 4d lattice."""

    axes: list[np.ndarray]
    values: np.ndarray  # shape (n1, n2, n3, n4, 4, 4)

    def __post_init__(self):
        self.axes = [np.asarray(a, float) for a in self.axes]
        self.values = np.asarray(self.values, float)
        shape = tuple(len(a) for a in self.axes)
        if self.values.shape != shape + (4, 4):
            raise ConfigurationError(f"metric lattice shape {self.values.shape} does not match axes {shape}")
        if min(shape) < 5:
            raise ConfigurationError("each lattice axis needs at least 5 nodes")

    def _grad(self, arr: np.ndarray) -> np.ndarray:
        # derivative index placed first
        return np.stack(np.gradient(arr, *self.axes, axis=(0, 1, 2, 3), edge_order=2), axis=0)

    def riemann(self) -> np.ndarray:
        """R_abcd at every node; values within two nodes of the boundary are less accurate."""
        g = self.values
        ginv = np.linalg.inv(g)
        dg = np.moveaxis(self._grad(g), 0, -3)  # (..., c, a, b)
        low = 0.5 * (np.einsum("...bdc->...dbc", dg) + np.einsum("...cdb->...dbc", dg) - dg)
        gamma = np.einsum("...ad,...dbc->...abc", ginv, low)
        dgamma = np.moveaxis(self._grad(gamma), 0, -4)
        up = (
            np.einsum("...cadb->...abcd", dgamma)
            - np.einsum("...dacb->...abcd", dgamma)
            + np.einsum("...ace,...edb->...abcd", gamma, gamma)
            - np.einsum("...ade,...ecb->...abcd", gamma, gamma)
        )
        return np.einsum("...ae,...ebcd->...abcd", g, up)

    @classmethod
    def from_chart(cls, chart: MetricChart, half_width: float = 0.05, nodes: int = 9) -> "LatticeMetric":
        axes = [chart.center[i] + np.linspace(-half_width, half_width, nodes) for i in range(4)]
        grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
        flat = grid.reshape(-1, 4)
        vals = np.stack([chart.metric(p) for p in flat]).reshape(grid.shape[:-1] + (4, 4))
        return cls(axes, vals)


# -- stereographic projection of the pseudosphere ------------------------------

def stereographic(x, tol: float = 1e-12) -> np.ndarray:
    """Project a pseudosphere point from the pole (0,0,1,0,0) to R41.

    (t, a, b, c, d) -> (t, a, c, d) / (1 - b); the third slot is dropped.
    """
    x = np.asarray(x, float)
    PSEUDO_SPHERE.check_point(x, 1e-8)
    denom = 1.0 - x[..., 2]
    if np.any(np.abs(denom) < tol):
        raise PoleError("point lies on the projection pole set x3 = 1")
    return np.stack([x[..., 0], x[..., 1], x[..., 3], x[..., 4]], axis=-1) / denom[..., None]


def minkowski_norm2(q) -> np.ndarray:
    q = np.asarray(q, float)
    return -q[..., 0] ** 2 + q[..., 1] ** 2 + q[..., 2] ** 2 + q[..., 3] ** 2


def stereographic_inverse(q, tol: float = 1e-12) -> np.ndarray:
    """R41 -> pseudosphere: 2/(1+|q|^2) (q1, q2, (|q|^2-1)/2, q3, q4)."""
    q = np.asarray(q, float)
    n = minkowski_norm2(q)
    if np.any(np.abs(1.0 + n) < tol):
        raise PoleError("inverse projection undefined where |q|^2 = -1")
    s = 2.0 / (1.0 + n)
    return s[..., None] * np.stack([q[..., 0], q[..., 1], (n - 1.0) / 2.0, q[..., 2], q[..., 3]], axis=-1)


def stereographic_log_factor(q) -> np.ndarray:
    """rho with pullback metric exp(2 rho) <,>_41, rho = ln(2/(1+|q|^2))."""
    return np.log(2.0 / (1.0 + minkowski_norm2(q)))


def stereographic_pullback(q, h: float = 1e-4) -> np.ndarray:
    """Pullback of the ambient R51 metric under the inverse projection (FD Jacobian)."""
    q = np.asarray(q, float)
    J = np.empty((5, 4))
    for a in range(4):
        e = np.zeros(4)
        e[a] = h
        J[:, a] = (stereographic_inverse(q + e) - stereographic_inverse(q - e)) / (2 * h)
    return J.T @ R51.eta @ J


# -- totally umbilic hypersurfaces -------------------------------------------

@dataclass
class UmbilicHypersurface:
    space_form: SpaceForm
    chart: Callable[[np.ndarray], np.ndarray]
    name: str
    center: np.ndarray = field(default_factory=lambda: np.zeros(3))
    radius: float = 1.0

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return self.center + rng.uniform(-self.radius, self.radius, size=(n, 3))


def _s3_chart(y):
    y = np.asarray(y, float)
    r2 = y @ y
    return np.concatenate([[0.0], np.append(2 * y, r2 - 1.0) / (1.0 + r2)])


def _h3_chart(y):
    y = np.asarray(y, float)
    return np.array([np.sqrt(1.0 + y @ y), 0.0, y[0], y[1], y[2]])


def umbilic_catalog(M: SpaceForm) -> list[UmbilicHypersurface]:
    """Complete totally geodesic spacelike hypersurfaces used as deformation bases."""
    if M.key == "r41":
        return [UmbilicHypersurface(M, lambda y: np.concatenate([[0.0], np.asarray(y, float)]), "EuclideanR3")]
    if M.key == "s41":
        return [UmbilicHypersurface(M, _s3_chart, "Sphere_S3")]
    return [UmbilicHypersurface(M, _h3_chart, "Hyperbolic_H3")]


def _jacobian(chart, y, h):
    y = np.asarray(y, float)
    cols = []
    for a in range(y.size):
        e = np.zeros(y.size)
        e[a] = h
        cols.append((np.asarray(chart(y + e)) - np.asarray(chart(y - e))) / (2 * h))
    return np.stack(cols, axis=0)  # rows are partial derivatives


def _normal_space(M: SpaceForm, x, tangents) -> np.ndarray:
    """Rows spanning the orthogonal complement of the tangents inside T_x M."""
    rows = [M.ambient.lower(t) for t in tangents]
    if not M.is_flat:
        rows.append(M.ambient.lower(x))
    A = np.stack(rows)
    _, s, vt = np.linalg.svd(A)
    rank = int(np.sum(s > 1e-12 * max(1.0, s[0])))
    return vt[rank:]


def hypersurface_normal(M: SpaceForm, chart, y, h: float = 1e-3) -> np.ndarray:
    """Future-pointing unit timelike normal of a spacelike hypersurface chart."""
    x = np.asarray(chart(y), float)
    P = _jacobian(chart, y, h)
    G = P @ M.ambient.eta @ P.T
    if np.min(np.linalg.eigvalsh(G)) <= 0:
        raise SignatureError("hypersurface is not spacelike")
    n = _normal_space(M, x, P)
    if n.shape[0] != 1:
        raise SignatureError("hypersurface tangent space is degenerate")
    n = n[0]
    nn = M.ambient.inner(n, n)
    if nn >= 0:
        raise SignatureError("hypersurface normal is not timelike")
    n = n / np.sqrt(-nn)
    if M.ambient.inner(n, M.axis()) > 0:
        n = -n
    return n


def hypersurface_geometry(M: SpaceForm, chart, y, h: float = 1e-3) -> dict:
    """Point, unit normal, tangent basis and Weingarten matrix <D_a s1, P_b>."""
    y = np.asarray(y, float)
    x = np.asarray(chart(y), float)
    P = _jacobian(chart, y, h)
    s1 = hypersurface_normal(M, chart, y, h)
    dN = _jacobian(lambda z: hypersurface_normal(M, chart, z, h), y, h)
    A = dN @ M.ambient.eta @ P.T
    G = P @ M.ambient.eta @ P.T
    return {"x": x, "normal": s1, "tangents": P, "weingarten": 0.5 * (A + A.T), "gram": G}


def shape_operator(M: SpaceForm, chart, y, h: float = 1e-3) -> np.ndarray:
    """Matrix <nabla_{s_i} s1, s_j> in an orthonormal tangent frame."""
    geo = hypersurface_geometry(M, chart, y, h)
    L = np.linalg.cholesky(geo["gram"])
    C = np.linalg.inv(L).T  # columns orthonormal w.r.t. the induced metric
    return C.T @ geo["weingarten"] @ C


def umbilicity_residual(M: SpaceForm, chart, y, h: float = 1e-3) -> float:
    W = shape_operator(M, chart, y, h)
    return float(np.max(np.abs(W - np.trace(W) / 3.0 * np.eye(3))))
