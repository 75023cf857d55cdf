"""Numerical geometry of spacelike surfaces in the Lorentzian space forms.

Every quantity is computed from a 5 x 5 stencil of chart values around each
sample, spaced by the finite-difference step.  That is enough for frames,
second fundamental forms and their first derivatives, all to second order.

Index conventions: frame rows are (e1, e2, e3, e4) with e1 the future
timelike normal, e2 the spacelike normal and (e3, e4) the oriented tangent
frame.  Arrays of second fundamental form components have shape
(N, 2, 2, 2) indexed [alpha, i, j] with alpha = 0, 1 for e1, e2 and
i, j = 0, 1 for e3, e4.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .lorentz import SignatureError
from .parallel import map_chunks
from .space_forms import ConfigurationError, SpaceForm

NORMAL_SIGNS = np.array([-1.0, 1.0])
FRAME_SIGNS = np.array([-1.0, 1.0, 1.0, 1.0])


class RankError(ValueError):
    pass


class MetricError(ValueError):
    pass


# -- immersions --------------------------------------------------------------

@dataclass
class Immersion:
    """Chart map from a rectangle in (x1, x2) into ambient coordinates."""

    space_form: SpaceForm
    chart: Callable[[np.ndarray], np.ndarray]
    domain: tuple[tuple[float, float], tuple[float, float]] = ((-1.0, 1.0), (-1.0, 1.0))
    resolution: int = 64
    fd_step: float = 1e-3
    time_axis: np.ndarray | None = None
    name: str = "chart"

    def __post_init__(self):
        if self.resolution < 4:
            raise ConfigurationError("grid resolution must be at least 4 per axis")
        if not (1e-8 < self.fd_step < 1e-1):
            raise ConfigurationError("fd_step must lie in (1e-8, 1e-1)")

    def axis(self) -> np.ndarray:
        return self.space_form.axis() if self.time_axis is None else np.asarray(self.time_axis, float)

    def with_options(self, **kw) -> "Immersion":
        return replace(self, **kw)

    def grid_axes(self) -> tuple[np.ndarray, np.ndarray]:
        (a, b), (c, d) = self.domain
        return np.linspace(a, b, self.resolution), np.linspace(c, d, self.resolution)

    def points(self) -> np.ndarray:
        u, v = self.grid_axes()
        U, V = np.meshgrid(u, v, indexing="ij")
        return np.stack([U.ravel(), V.ravel()], axis=-1)

    def __call__(self, pts) -> np.ndarray:
        return np.asarray(self.chart(np.asarray(pts, float)), float)

    def stencils(self, pts: np.ndarray | None = None):
        """(points, stencil values of shape (N, 5, 5, dim), steps)."""
        pts = self.points() if pts is None else np.atleast_2d(np.asarray(pts, float))
        h = self.fd_step
        off = np.arange(-2, 3) * h
        O1, O2 = np.meshgrid(off, off, indexing="ij")
        shifted = pts[:, None, None, :] + np.stack([O1, O2], axis=-1)[None]
        vals = self(shifted.reshape(-1, 2)).reshape(len(pts), 5, 5, -1)
        return pts, vals, (h, h)


@dataclass
class LatticeImmersion:
    """Immersion given only by ambient coordinates on a uniform lattice.

    Derivatives are taken on the lattice itself, so samples are the nodes at
    least two steps away from the boundary.
    """

    space_form: SpaceForm
    x1: np.ndarray
    x2: np.ndarray
    values: np.ndarray  # (n1, n2, dim)
    time_axis: np.ndarray | None = None
    name: str = "lattice"

    def __post_init__(self):
        self.x1 = np.asarray(self.x1, float)
        self.x2 = np.asarray(self.x2, float)
        self.values = np.asarray(self.values, float)
        if self.values.shape[:2] != (len(self.x1), len(self.x2)):
            raise ConfigurationError("lattice values do not match the axes")
        if self.values.shape[-1] != self.space_form.dim:
            raise ConfigurationError("lattice points have the wrong ambient dimension")
        if min(len(self.x1), len(self.x2)) < 5:
            raise ConfigurationError("lattice needs at least 5 nodes per axis")
        for ax in (self.x1, self.x2):
            d = np.diff(ax)
            if np.max(np.abs(d - d[0])) > 1e-9 * max(1.0, abs(d[0])):
                raise ConfigurationError("lattice axes must be uniformly spaced")

    @property
    def fd_step(self) -> float:
        return float(self.x1[1] - self.x1[0])

    def axis(self) -> np.ndarray:
        return self.space_form.axis() if self.time_axis is None else np.asarray(self.time_axis, float)

    def points(self) -> np.ndarray:
        U, V = np.meshgrid(self.x1[2:-2], self.x2[2:-2], indexing="ij")
        return np.stack([U.ravel(), V.ravel()], axis=-1)

    def stencils(self, pts=None):
        if pts is not None:
            raise ConfigurationError("lattice immersions are sampled at their own interior nodes")
        n1, n2 = len(self.x1), len(self.x2)
        idx_i, idx_j = np.meshgrid(np.arange(2, n1 - 2), np.arange(2, n2 - 2), indexing="ij")
        idx_i, idx_j = idx_i.ravel(), idx_j.ravel()
        off = np.arange(-2, 3)
        I = idx_i[:, None, None] + off[None, :, None]
        J = idx_j[:, None, None] + off[None, None, :]
        return self.points(), self.values[I, J], (float(self.x1[1] - self.x1[0]), float(self.x2[1] - self.x2[0]))


# -- stencil calculus ----------------------------------------------------------

def _first(S, hs, di=0, dj=0):
    h1, h2 = hs
    x = S[:, 2 + di, 2 + dj]
    f1 = (S[:, 3 + di, 2 + dj] - S[:, 1 + di, 2 + dj]) / (2 * h1)
    f2 = (S[:, 2 + di, 3 + dj] - S[:, 2 + di, 1 + dj]) / (2 * h2)
    return x, f1, f2


def _second(S, hs, di=0, dj=0):
    h1, h2 = hs
    c = S[:, 2 + di, 2 + dj]
    f11 = (S[:, 3 + di, 2 + dj] - 2 * c + S[:, 1 + di, 2 + dj]) / h1**2
    f22 = (S[:, 2 + di, 3 + dj] - 2 * c + S[:, 2 + di, 1 + dj]) / h2**2
    f12 = (S[:, 3 + di, 3 + dj] - S[:, 3 + di, 1 + dj] - S[:, 1 + di, 3 + dj] + S[:, 1 + di, 1 + dj]) / (4 * h1 * h2)
    return f11, f12, f22


def _ip(M: SpaceForm, u, v):
    return M.ambient.inner(u, v)


def darboux_frames(M: SpaceForm, x, f1, f2, axis):
    """Darboux frames for arrays of points and chart tangents.

    The normal pair is fixed by three requirements: (e1, e2, e3, e4) is
    positively oriented, e1 is future pointing, and e1 + e2 (the positive
    normal null vector) satisfies <e1 + e2, axis> = -1.

    Returns ``(frames, P, F, ok, reason)`` where ``P`` expresses e3, e4 in
    the chart basis: e_{3+i} = sum_a P[i, a] f_a.
    """
    N = len(x)
    g11, g12, g22 = _ip(M, f1, f1), _ip(M, f1, f2), _ip(M, f2, f2)
    det = g11 * g22 - g12**2
    reason = np.zeros(N, dtype=int)  # 0 ok, 1 degenerate rank, 2 not spacelike, 3 normal null basis failure
    spacelike = (g11 > 0) & (det > 0)
    scale = np.maximum(np.abs(g11) + np.abs(g22), 1e-300)
    rank_ok = np.abs(det) > 1e-14 * scale**2
    reason[~rank_ok] = 1
    reason[rank_ok & ~spacelike] = 2
    ok = rank_ok & spacelike
    with np.errstate(invalid="ignore", divide="ignore"):
        s11 = np.sqrt(np.where(ok, g11, 1.0))
        n4 = np.sqrt(np.where(ok, det / np.where(ok, g11, 1.0), 1.0))
        P = np.zeros((N, 2, 2))
        P[:, 0, 0] = 1.0 / s11
        P[:, 1, 0] = -g12 / (s11 * s11 * n4)
        P[:, 1, 1] = 1.0 / n4
        e3 = P[:, 0, 0, None] * f1
        e4 = P[:, 1, 0, None] * f1 + P[:, 1, 1, None] * f2

        # orthogonal complement of the tangent plane inside T_x M
        rows = [M.ambient.lower(f1), M.ambient.lower(f2)]
        if not M.is_flat:
            rows.append(M.ambient.lower(x))
        A = np.stack(rows, axis=1)
        A = np.where(ok[:, None, None], A, np.eye(A.shape[1], A.shape[2])[None])
        # last columns of a complete QR of A^T span the kernel of A
        q, _ = np.linalg.qr(np.swapaxes(A, 1, 2), mode="complete")
        B = np.swapaxes(q[:, :, -2:], 1, 2)
        G = np.einsum("nad,d,nbd->nab", B, np.asarray(M.ambient.epsilons, float), B)
        w, V = np.linalg.eigh(G)
        lor = (w[:, 0] < 0) & (w[:, 1] > 0)
        reason[ok & ~lor] = 3
        ok = ok & lor
        tau = np.einsum("na,nad->nd", V[:, :, 0], B) / np.sqrt(np.abs(w[:, 0]))[:, None]
        sig = np.einsum("na,nad->nd", V[:, :, 1], B) / np.sqrt(np.abs(w[:, 1]))[:, None]
        T = np.asarray(axis, float)

        def candidate(k, m):
            kt = -k / _ip(M, k, T)[:, None]
            mt = -2.0 * m / _ip(M, kt, m)[:, None]
            e1 = 0.5 * (kt + mt)
            e2 = 0.5 * (kt - mt)
            fr = np.stack([e1, e2, e3, e4], axis=1)
            return fr, M.orientation(x, fr) if not M.is_flat else np.linalg.det(fr)

        fa, oa = candidate(tau + sig, tau - sig)
        fb, ob = candidate(tau - sig, tau + sig)
        frames = np.where((oa > 0)[:, None, None], fa, fb)
        good = np.isfinite(frames).all(axis=(1, 2))
        # near-degenerate normalisations (reference axis almost null along M) show up here
        G4 = np.einsum("nid,d,njd->nij", np.where(good[:, None, None], frames, 0.0),
                       np.asarray(M.ambient.epsilons, float), np.where(good[:, None, None], frames, 0.0))
        good &= np.abs(G4 - np.diag(FRAME_SIGNS)).max(axis=(1, 2)) < 1e-8
        reason[ok & ~good] = 3
        ok = ok & good
    frames = np.where(ok[:, None, None], frames, np.nan)
    return frames, P, np.where(ok, g11, np.nan), ok, reason


def _second_fundamental(M, frames, P, f11, f12, f22):
    """h[alpha, i, j] = eps_alpha <nabla_{e_i} e_j, e_alpha>."""
    fab = np.stack([np.stack([f11, f12], 1), np.stack([f12, f22], 1)], 1)  # (N, a, b, dim)
    normals = frames[:, :2, :]
    pair = np.einsum("nabd,d,nkd->nkab", fab, np.asarray(M.ambient.epsilons, float), normals)
    return NORMAL_SIGNS[None, :, None, None] * np.einsum("nia,njb,nkab->nkij", P, P, pair)


@dataclass
class SurfaceData:
    """Per-sample geometry of an immersion, stored as stacked arrays."""

    points: np.ndarray  # chart coordinates (N, 2)
    position: np.ndarray  # ambient (N, dim)
    frame: np.ndarray  # (N, 4, dim)
    P: np.ndarray  # (N, 2, 2) tangent frame in the chart basis
    F: np.ndarray  # (N,) <f_x1, f_x1>
    h: np.ndarray  # (N, 2, 2, 2)
    ok: np.ndarray  # (N,) bool
    reason: np.ndarray  # (N,) int code for rejected samples
    conformality: np.ndarray  # (N,)
    symmetry: np.ndarray  # (N,)
    tangents: np.ndarray  # (N, 2, dim) chart derivatives
    extras: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.points)

    def sample(self, i: int) -> dict:
        return {
            "point": self.position[i], "frame": self.frame[i], "F": float(self.F[i]),
            "h": self.h[i], "ok": bool(self.ok[i]),
        }

    def frame_gram_residual(self) -> float:
        fr = self.frame[self.ok]
        if len(fr) == 0:
            return 0.0
        eps = np.asarray(self._signature_eps(), float)
        G = np.einsum("nid,d,njd->nij", fr, eps, fr)
        return float(np.max(np.abs(G - np.diag(FRAME_SIGNS))))

    def _signature_eps(self):
        return self.extras["epsilons"]


def _surface_chunk(M: SpaceForm, axis, S, hs, pts, neighbours: bool) -> dict:
    x, f1, f2 = _first(S, hs)
    frames, P, F, ok, reason = darboux_frames(M, x, f1, f2, axis)
    f11, f12, f22 = _second(S, hs)
    h = _second_fundamental(M, frames, P, f11, f12, f22)
    g11, g12, g22 = _ip(M, f1, f1), _ip(M, f1, f2), _ip(M, f2, f2)
    conf = np.abs(g11 - g22) + np.abs(g12)
    sym = np.abs(h[:, :, 0, 1] - h[:, :, 1, 0]).max(axis=1)
    out = dict(points=pts, position=x, frame=frames, P=P, F=F, h=h, ok=ok, reason=reason,
               conformality=conf, symmetry=sym, tangents=np.stack([f1, f2], 1))
    if neighbours:
        # frames and second fundamental forms at the four axis neighbours
        nb_frames, nb_h = [], []
        for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            xn, f1n, f2n = _first(S, hs, di, dj)
            frn, Pn, _, okn, _ = darboux_frames(M, xn, f1n, f2n, axis)
            a, b, c = _second(S, hs, di, dj)
            nb_frames.append(frn)
            nb_h.append(_second_fundamental(M, frn, Pn, a, b, c))
            out["ok"] = out["ok"] & okn
        out["nb_frames"] = np.stack(nb_frames, 1)  # (N, 4 neighbours, 4, dim)
        out["nb_h"] = np.stack(nb_h, 1)
    return out


def surface_data(f, pts=None, neighbours: bool = True) -> SurfaceData:
    """Darboux frames and second fundamental forms at the samples of ``f``.

    With ``neighbours`` the frames and forms at the axis neighbours of each
    sample are kept as well, for connection forms and derivatives.
    """
    M = f.space_form
    axis = f.axis()
    pts, S, hs = f.stencils(pts)
    if len(pts) == 0:
        raise ConfigurationError("empty sample grid")
    idx = np.arange(len(pts))

    def work(rows):
        return _surface_chunk(M, axis, S[rows], hs, pts[rows], neighbours)

    out = map_chunks(work, idx)
    extras = {"epsilons": M.ambient.epsilons, "steps": hs}
    for key in ("nb_frames", "nb_h"):
        if key in out:
            extras[key] = out.pop(key)
    return SurfaceData(extras=extras, **out)


def darboux(f, p) -> SurfaceData:
    """Surface data at a single chart point ``p``."""
    sd = surface_data(f, np.atleast_2d(p), neighbours=False)
    if not sd.ok[0]:
        code = int(sd.reason[0])
        if code == 1:
            raise RankError("degenerate tangent plane")
        raise SignatureError("tangent plane is not spacelike")
    return sd


def second_fundamental(f, p) -> np.ndarray:
    """h[alpha, i, j] at a single chart point."""
    return darboux(f, p).h[0]


# -- null decomposition --------------------------------------------------------

@dataclass
class Decomposition:
    H_plus: np.ndarray
    H_minus: np.ndarray
    L_plus_a: np.ndarray
    L_plus_b: np.ndarray
    L_minus_a: np.ndarray
    L_minus_b: np.ndarray

    @property
    def L_plus(self) -> np.ndarray:
        return self.L_plus_a + 1j * self.L_plus_b

    @property
    def L_minus(self) -> np.ndarray:
        return self.L_minus_a + 1j * self.L_minus_b


def decompose(h) -> Decomposition:
    """Split second fundamental form components along the two null normals."""
    h = h.h if isinstance(h, SurfaceData) else np.asarray(h, float)
    a1, b1, c1 = h[..., 0, 0, 0], h[..., 0, 1, 1], h[..., 0, 0, 1]
    a2, b2, c2 = h[..., 1, 0, 0], h[..., 1, 1, 1], h[..., 1, 0, 1]
    return Decomposition(
        H_plus=(a1 + b1 + a2 + b2) / 4,
        H_minus=(-a1 - b1 + a2 + b2) / 4,
        L_plus_a=0.5 * (-a1 + b1 - a2 + b2),
        L_plus_b=c1 + c2,
        L_minus_a=0.5 * (a1 - b1 - a2 + b2),
        L_minus_b=-c1 + c2,
    )


def reconstruct(dec: Decomposition) -> np.ndarray:
    """Rebuild h[alpha, i, j] from mean curvature and trace-free null parts.

    Uses t = (-i e3* + e4*)/sqrt(2) and II = h (x) H + Re[L+ t.t](e1+e2)
    + Re[L- t.t](e2-e1).
    """
    t = np.array([-1j, 1.0]) / np.sqrt(2)
    tt = np.outer(t, t)
    Lp = np.real(np.asarray(dec.L_plus)[..., None, None] * tt)
    Lm = np.real(np.asarray(dec.L_minus)[..., None, None] * tt)
    eye = np.eye(2)
    plus = np.asarray(dec.H_plus)[..., None, None] * eye + Lp  # coefficient of e1 + e2
    minus = np.asarray(dec.H_minus)[..., None, None] * eye + Lm  # coefficient of e2 - e1
    return np.stack([plus - minus, plus + minus], axis=-3)


def rotate_tangent(h, phi: float) -> np.ndarray:
    """Components in the tangent frame rotated by phi (e3 -> cos e3 + sin e4)."""
    c, s = np.cos(phi), np.sin(phi)
    R = np.array([[c, s], [-s, c]])
    return np.einsum("ia,...kab,jb->...kij", R, np.asarray(h, float), R)


# -- classification -------------------------------------------------------------

FLAG_NAMES = (
    "pos_semi_stationary", "neg_semi_stationary", "pos_semi_umbilic", "neg_semi_umbilic",
    "plus_isotropic", "minus_isotropic", "stationary", "totally_umbilic",
)


def flag_residual_fields(dec: Decomposition) -> dict[str, np.ndarray]:
    Hp, Hm = np.abs(dec.H_plus), np.abs(dec.H_minus)
    Lp, Lm = np.abs(dec.L_plus), np.abs(dec.L_minus)
    return {
        "pos_semi_stationary": Hm,
        "neg_semi_stationary": Hp,
        "pos_semi_umbilic": Lm,
        "neg_semi_umbilic": Lp,
        "plus_isotropic": np.maximum(Hm, Lm),
        "minus_isotropic": np.maximum(Hp, Lp),
        "stationary": np.maximum(Hp, Hm),
        "totally_umbilic": np.maximum(Lp, Lm),
    }


@dataclass
class ClassificationReport:
    flags: dict[str, bool]
    residuals: dict[str, float]
    tol: float
    n_samples: int
    n_rejected: int
    rejected: list[int]
    conformality: float
    name: str = ""

    def __post_init__(self):
        f = self.flags
        if f["plus_isotropic"] != (f["pos_semi_stationary"] and f["pos_semi_umbilic"]):
            raise AssertionError("inconsistent +isotropic flag")
        if f["minus_isotropic"] != (f["neg_semi_stationary"] and f["neg_semi_umbilic"]):
            raise AssertionError("inconsistent -isotropic flag")
        if f["totally_umbilic"] and not (f["pos_semi_umbilic"] and f["neg_semi_umbilic"]):
            raise AssertionError("inconsistent umbilic flag")

    def to_dict(self) -> dict:
        return {
            "name": self.name, "tol": self.tol, "flags": dict(self.flags),
            "residuals": {k: float(v) for k, v in self.residuals.items()},
            "n_samples": self.n_samples, "n_rejected": self.n_rejected,
            "rejected_samples": self.rejected, "conformality_residual": float(self.conformality),
        }


def sup(values: np.ndarray, mask: np.ndarray | None = None) -> float:
    v = np.asarray(values, float)
    if mask is not None:
        v = v[mask]
    return float(np.max(v)) if v.size else float("nan")


def classify(f, tol: float = 1e-5, sd: SurfaceData | None = None) -> ClassificationReport:
    sd = surface_data(f, neighbours=False) if sd is None else sd
    if len(sd) == 0:
        raise ConfigurationError("empty grid")
    mask = sd.ok
    if not np.any(mask):
        raise RankError("every sample of the grid was rejected")
    fields = flag_residual_fields(decompose(sd.h))
    residuals = {k: sup(v, mask) for k, v in fields.items()}
    flags = {k: bool(residuals[k] < tol) for k in FLAG_NAMES}
    rejected = np.flatnonzero(~mask)
    return ClassificationReport(
        flags=flags, residuals=residuals, tol=tol, n_samples=int(len(sd)),
        n_rejected=int(len(rejected)), rejected=[int(i) for i in rejected[:20]],
        conformality=sup(sd.conformality, mask), name=getattr(f, "name", ""),
    )


# -- Laplacian on a conformal chart ------------------------------------------

def bochner_laplace(lam: Callable[[np.ndarray], np.ndarray], F, p, h: float = 1e-3) -> np.ndarray:
    """(lam_x1x1 + lam_x2x2) / F by central differences.

    ``F`` is a number, an array matching ``p`` or a callable on chart points.
    """
    p = np.asarray(p, float)
    Fv = F(p) if callable(F) else np.asarray(F, float)
    if np.any(Fv <= 0):
        raise MetricError("conformal factor must be positive")
    e1 = np.array([h, 0.0])
    e2 = np.array([0.0, h])
    lap = (lam(p + e1) + lam(p - e1) + lam(p + e2) + lam(p - e2) - 4 * lam(p)) / h**2
    return lap / Fv


# -- conformal change of the ambient metric -------------------------------------

def _gradient(fn, x, h):
    out = np.empty_like(x)
    for c in range(x.shape[-1]):
        e = np.zeros(x.shape[-1])
        e[c] = h
        out[..., c] = (fn(x + e) - fn(x - e)) / (2 * h)
    return out


def conformal_change_check(f: Immersion, rho: Callable[[np.ndarray], np.ndarray], tol: float = 1e-5,
                           pts: np.ndarray | None = None) -> dict:
    """Compare second fundamental forms of g and exp(2 rho) g on a Minkowski surface.

    The rescaled form is computed independently, from Christoffel symbols of
    the rescaled metric obtained by differencing its components, and then
    tested against the identity II~ = II - g (x) N grad rho.  Vanishing flags
    of the trace-free parts are compared between both metrics, and so is the
    O++ verdict of the positive Gauss lift, computed directly from the moving
    null normal with the rescaled connection.
    """
    from .space_forms import christoffel

    M = f.space_form
    if not M.is_flat:
        raise ConfigurationError("conformal rescaling is checked on the Minkowski chart")
    sd = surface_data(f, pts, neighbours=True)
    h = f.fd_step
    eta = M.ambient.eta
    metric = lambda x: np.exp(2 * rho(x)) * eta
    N = len(sd)
    ok = sd.ok
    _, S, hs = f.stencils(sd.points)
    f11, f12, f22 = _second(S, hs)
    fab = np.stack([np.stack([f11, f12], 1), np.stack([f12, f22], 1)], 1)
    tang = sd.tangents
    gam = np.stack([christoffel(metric, sd.position[n], h) if ok[n] else np.zeros((4, 4, 4)) for n in range(N)])
    nabla_t = fab + np.einsum("ncde,nad,nbe->nabc", gam, tang, tang)

    normals = sd.frame[:, :2, :]
    eps = np.asarray(M.ambient.epsilons, float)

    def normal_part(v):  # v (N, ..., dim)
        coeff = np.einsum("n...d,d,nkd->n...k", v, eps, normals) * NORMAL_SIGNS
        return np.einsum("n...k,nkd->n...d", coeff, normals)

    II = normal_part(fab)
    II_t = normal_part(nabla_t)
    drho = _gradient(rho, sd.position, h)
    grad = drho * eps  # eta^{-1} d rho
    g_ind = np.einsum("nad,d,nbd->nab", tang, eps, tang)
    Ngrad = normal_part(grad)
    resid = II_t - II + g_ind[..., None] * Ngrad[:, None, None, :]
    # express in the orthonormal tangent frame
    resid_e = np.einsum("nia,njb,nabd->nijd", sd.P, sd.P, resid)
    identity_residual = sup(np.abs(resid_e).max(axis=(1, 2, 3)), ok)

    # rescaled Darboux frame is exp(-rho) e; components of II~ in it
    rho_x = rho(sd.position)
    comp = np.einsum("nia,njb,nabd,d,nkd->nkij", sd.P, sd.P, II_t, eps, normals)
    h_t = np.exp(-rho_x)[:, None, None, None] * NORMAL_SIGNS[None, :, None, None] * comp
    dec, dec_t = decompose(sd.h), decompose(h_t)

    # vertical part of the positive lift under the rescaled connection
    k_nb = sd.extras["nb_frames"][:, :, 0, :] + sd.extras["nb_frames"][:, :, 1, :]
    nb_pos = np.stack([sd.position], 1)
    del nb_pos
    rho_nb = np.stack([rho(f(sd.points + d)) for d in ([h, 0], [-h, 0], [0, h], [0, -h])], 1)
    kt_nb = np.exp(-rho_nb)[..., None] * k_nb
    dk = np.stack([(kt_nb[:, 0] - kt_nb[:, 1]) / (2 * h), (kt_nb[:, 2] - kt_nb[:, 3]) / (2 * h)], 1)
    k_c = np.exp(-rho_x)[:, None] * (sd.frame[:, 0] + sd.frame[:, 1])
    nabla_k = dk + np.einsum("ncde,nad,ne->nac", gam, tang, k_c)
    nabla_k_e = np.einsum("nia,nad->nid", sd.P, nabla_k)  # along e_i (chart-normalised for eta)
    tan_e = sd.frame[:, 2:, :]
    # g~(nabla~_{e~_i} k~, e~_j) = exp(-rho) exp(2 rho) exp(-rho) <nabla~_{e_i} k~, e_j>... scaled below
    pair = np.einsum("nid,d,njd->nij", nabla_k_e, eps, tan_e) * np.exp(rho_x)[:, None, None]
    a, b = -pair[..., 0] / 2, -pair[..., 1] / 2  # coefficients along (E13-E23, E14-E24)
    # holomorphy: V(e4) = sigma * J V(e3) with J(a, b) = (b, -a); sigma = -1 for O++
    res_pp = np.hypot(a[:, 1] + b[:, 0], b[:, 1] - a[:, 0])
    res_pm = np.hypot(a[:, 1] - b[:, 0], b[:, 1] + a[:, 0])

    Lm, Lm_t = sup(np.abs(dec.L_minus), ok), sup(np.abs(dec_t.L_minus), ok)
    Lp, Lp_t = sup(np.abs(dec.L_plus), ok), sup(np.abs(dec_t.L_plus), ok)
    return {
        "identity_residual": identity_residual,
        "L_minus_sup": Lm, "L_minus_sup_rescaled": Lm_t,
        "L_plus_sup": Lp, "L_plus_sup_rescaled": Lp_t,
        "pos_semi_umbilic": bool(Lm < tol), "pos_semi_umbilic_rescaled": bool(Lm_t < tol),
        "neg_semi_umbilic": bool(Lp < tol), "neg_semi_umbilic_rescaled": bool(Lp_t < tol),
        "flags_agree": bool((Lm < tol) == (Lm_t < tol) and (Lp < tol) == (Lp_t < tol)),
        "O++_residual_rescaled": sup(res_pp, ok), "O+-_residual_rescaled": sup(res_pm, ok),
        "H_minus_sup": sup(np.abs(dec.H_minus), ok), "H_minus_sup_rescaled": sup(np.abs(dec_t.H_minus), ok),
        "tol": tol,
    }
