"""Verification batteries shared by the command line and the acceptance tests.

Every suite returns a :class:`SuiteResult` made of named checks, each a
measured value compared against a bound.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .families import (
    FamilySpec, build_family, catalog_bases, deform_null, isotropy_coefficient, scalar_field, stationary_check,
)
from .immersion import classify, conformal_change_check, decompose, surface_data, sup
from .space_forms import (
    MINKOWSKI, SPACE_FORMS, LatticeMetric, conformal_flat_chart, constant_curvature_tensor, product_chart,
    space_form_chart, stereographic, stereographic_inverse, umbilic_catalog,
)
from .twistor import (
    audit_chart, audit_frames, cr_compare, frame_components, gauss_lift, gauss_tension, graph_hypersurface,
    holomorphy_check, integrability_og, integrability_oplus, equivalence_crosscheck, vertical_consistency,
)


@dataclass
class Check:
    name: str
    value: float | bool
    bound: float | bool | None
    relation: str  # "<", ">", "==", "in"
    passed: bool

    def to_dict(self) -> dict:
        return {"name": self.name, "value": self.value, "bound": self.bound, "relation": self.relation,
                "passed": self.passed}


@dataclass
class SuiteResult:
    suite: str
    checks: list[Check] = field(default_factory=list)
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def below(self, name, value, bound):
        self.checks.append(Check(name, float(value), bound, "<", bool(value < bound)))

    def above(self, name, value, bound):
        self.checks.append(Check(name, float(value), bound, ">", bool(value > bound)))

    def equal(self, name, value, expected):
        self.checks.append(Check(name, value, expected, "==", bool(value == expected)))

    def within(self, name, value, lo, hi):
        self.checks.append(Check(name, float(value), [lo, hi], "in", bool(lo <= value <= hi)))

    def to_dict(self) -> dict:
        return {"suite": self.suite, "passed": self.passed, "n_checks": len(self.checks),
                "n_failed": sum(not c.passed for c in self.checks),
                "checks": [c.to_dict() for c in self.checks], "details": self.details}


def _spaces(space):
    return list(SPACE_FORMS) if space is None else [space]


def _lam(name):
    return scalar_field(name)


# -- classification and holomorphy ----------------------------------------------------

def equivalence_immersions(seed: int = 0) -> list[FamilySpec]:
    r = lambda k: _lam(f"random:{seed * 100 + k}")
    return [
        FamilySpec("r41", "i_lambda", r(1)),
        FamilySpec("r41", "i_lambda", _lam("harmonic:z1^2-z2^2")),
        FamilySpec("r41", "i_lambda", _lam("poly:z1^2")),
        FamilySpec("r41", "j_lambda", _lam("zero"), theta=1.0),
        FamilySpec("r41", "j_lambda", _lam("linear:0.1,0,0"), theta=1.0),
        FamilySpec("r41", "j_lambda", r(2), theta=1.0),
        FamilySpec("s41", "i_c_lambda", r(3), c=0.0),
        FamilySpec("s41", "i_c_lambda", _lam("linear:0,0,0.5"), c=0.0),
        FamilySpec("s41", "i_c_lambda", _lam("poly:z1^2"), c=0.0),
        FamilySpec("s41", "i_c_lambda", r(4), c=0.5),
        FamilySpec("h41", "i_lambda", r(5)),
        FamilySpec("h41", "i_lambda", _lam("linear:0.2,0,0")),
        FamilySpec("h41", "i_lambda", _lam("poly:z1^2+z2^2")),
        FamilySpec("h41", "j_c_lambda", _lam("zero"), c=2.0),
        FamilySpec("h41", "j_c_lambda", _lam("linear:0.1,0,0"), c=2.0),
        FamilySpec("h41", "j_c_lambda", r(6), c=2.0),
    ]


def suite_equivalences(space=None, resolution=64, fd_step=1e-3, tol=1e-5, seed=0, **_) -> SuiteResult:
    res = SuiteResult("prop31")
    table = []
    for spec in equivalence_immersions(seed):
        if space is not None and spec.space != space:
            continue
        f = build_family(spec, resolution, fd_step)
        sd = surface_data(f)
        rows = equivalence_crosscheck(f, tol, "formula", sd)
        direct = equivalence_crosscheck(f, tol, "direct", sd)
        table.extend(rows)
        res.equal(f"{f.name}: mismatches", sum(not r["agree"] for r in rows), 0)
        res.equal(f"{f.name}: mismatches (direct differencing)", sum(not r["agree"] for r in direct), 0)
        res.below(f"{f.name}: vertical formula vs direct", vertical_consistency(f, sd), 1e-4)
        res.below(f"{f.name}: frame orthonormality", sd.frame_gram_residual(), 1e-10)
        res.below(f"{f.name}: lift direction orthogonal to plane", gauss_lift(f, 1, sd).orthogonality_residual(), 1e-10)
    res.details["table"] = table
    res.details["n_immersions"] = len(table) // 8
    return res


I_FAMILIES = {
    "r41": lambda lam: FamilySpec("r41", "i_lambda", lam),
    "s41": lambda lam: FamilySpec("s41", "i_c_lambda", lam, c=0.0),
    "h41": lambda lam: FamilySpec("h41", "i_lambda", lam),
}

J_MEMBERS = {
    "r41": lambda: FamilySpec("r41", "j_lambda", _lam("linear:0.1,0,0"), theta=1.0),
    "s41": lambda: FamilySpec("s41", "i_c_lambda", _lam("linear:0.1,0,0"), c=0.5),
    "h41": lambda: FamilySpec("h41", "j_c_lambda", _lam("linear:0.1,0,0"), c=2.0),
}

STATIONARY_CASES = (
    (("r41", "i_lambda", "harmonic:z1^3-3z1z2^2", None), True),
    (("r41", "i_lambda", "harmonic:z1^2-z2^2", None), True),
    (("r41", "i_lambda", "poly:z1^2", None), False),
    (("s41", "i_c_lambda", "linear:0,0,1", 0.0), True),
    (("s41", "i_c_lambda", "poly:z1^2", 0.0), False),
    (("h41", "i_lambda", "linear:0.2,0,0", None), True),
    (("h41", "i_lambda", "poly:z1^2+z2^2", None), False),
)


def suite_isotropy(space=None, resolution=64, fd_step=1e-3, tol=1e-5, seed=0, **_) -> SuiteResult:
    """i-families are +isotropic and H+ is half the analytic coefficient."""
    res = SuiteResult("isotropy")
    for key in _spaces(space):
        for k in range(5):
            spec = I_FAMILIES[key](_lam(f"random:{seed * 100 + 10 + k}"))
            f = build_family(spec, resolution, fd_step)
            sd = surface_data(f, neighbours=False)
            dec = decompose(sd.h)
            coeff = isotropy_coefficient(spec, sd.points, h=fd_step)
            res.below(f"{f.name}: sup|H-|", sup(np.abs(dec.H_minus), sd.ok), tol)
            res.below(f"{f.name}: sup|L-|", sup(np.abs(dec.L_minus), sd.ok), tol)
            res.below(f"{f.name}: sup|H+ - coefficient/2|", sup(np.abs(dec.H_plus - coeff / 2), sd.ok), 1e-4)
    return res


def suite_j_families(space=None, resolution=64, fd_step=1e-3, tol=1e-5, **_) -> SuiteResult:
    """Positive semi-umbilic members that are not +isotropic."""
    res = SuiteResult("j-families")
    for key in _spaces(space):
        f = build_family(J_MEMBERS[key](), resolution, fd_step)
        rep = classify(f, tol)
        res.below(f"{f.name}: sup|L-|", rep.residuals["pos_semi_umbilic"], tol)
        res.above(f"{f.name}: max|H-|", rep.residuals["pos_semi_stationary"], 1e-3)
    return res


def suite_stationary(space=None, resolution=64, fd_step=1e-3, tol=1e-5, **_) -> SuiteResult:
    res = SuiteResult("stationary")
    for (key, tag, lam, c), expected in STATIONARY_CASES:
        if space is not None and key != space:
            continue
        spec = FamilySpec(key, tag, _lam(lam), c=c)
        out = stationary_check(spec, tol, resolution, fd_step)
        name = f"{key}:{tag}:{lam}"
        res.equal(f"{name}: stationary verdict", out["stationary"], expected)
        res.equal(f"{name}: agrees with classification", out["agree"], True)
    return res


def suite_coefficients(**kw) -> SuiteResult:
    """Isotropy, j-family and stationary batteries combined."""
    res = SuiteResult("coefficients")
    for part in (suite_isotropy, suite_j_families, suite_stationary):
        res.checks.extend(part(**kw).checks)
    return res


# -- deformation ------------------------------------------------------------------------

def suite_deformation(space=None, resolution=64, fd_step=1e-3, tol=1e-5, seed=0, **_) -> SuiteResult:
    res = SuiteResult("deformation")
    for base, model in catalog_bases(resolution, fd_step):
        if space is not None and base.space_form.key != space:
            continue
        pts = base.points()
        ident = deform_null(base, _lam("zero"), model)
        res.below(f"{base.name}: zero deformation is the identity", np.max(np.abs(ident(pts) - base(pts))), 1e-12)
        for k in range(5):
            lam = _lam(f"random:{seed * 100 + 20 + k}")
            g = deform_null(base, lam, model, check_base=(k == 0))
            rep = classify(g, tol)
            res.below(f"{g.name}: sup|L-|", rep.residuals["pos_semi_umbilic"], tol)
            res.equal(f"{g.name}: rejected samples", rep.n_rejected, 0)
    # the deformation reproduces the closed-form families
    lam = _lam(f"random:{seed * 100 + 30}")
    for spec in (FamilySpec("r41", "i_lambda", lam), FamilySpec("r41", "j_lambda", lam, theta=1.0),
                 FamilySpec("s41", "i_c_lambda", lam, c=0.5), FamilySpec("h41", "i_lambda", lam),
                 FamilySpec("h41", "j_c_lambda", lam, c=2.0)):
        if space is not None and spec.space != space:
            continue
        zero = FamilySpec(spec.space, spec.tag, _lam("zero"), spec.theta, spec.c)
        base = build_family(zero, resolution, fd_step)
        g, f = deform_null(base, lam, spec.model, check_base=False), build_family(spec, resolution, fd_step)
        pts = f.points()
        res.below(f"{spec.space}:{spec.tag}: deformation vs closed form", np.max(np.abs(g(pts) - f(pts))), 1e-6)
    return res


# -- curvature audits ---------------------------------------------------------------------

def suite_integrability(space=None, seed=0, n_frames=50, **_) -> SuiteResult:
    res = SuiteResult("integrability")
    eta = np.diag([-1.0, 1.0, 1.0, 1.0])
    for key in _spaces(space):
        M = SPACE_FORMS[key]
        R = constant_curvature_tensor(M.S, eta)
        worst_o, worst_g = 0.0, 0.0
        for L in audit_frames(0, n_frames, seed):
            Rf = frame_components(R, L)
            worst_o = max(worst_o, *integrability_oplus(Rf))
            worst_g = max(worst_g, *integrability_og(Rf))
        res.below(f"{key}: constant-curvature tensor, O++ conditions", worst_o, 1e-8)
        res.below(f"{key}: constant-curvature tensor, OG+ conditions", worst_g, 1e-8)
        audit = audit_chart(space_form_chart(M), n_points=3, n_frames=n_frames, seed=seed)
        res.below(f"{key}: chart {audit['chart']}, O++ conditions", audit["oplus"], 1e-4)
        res.below(f"{key}: chart {audit['chart']}, OG+ conditions", audit["og"], 1e-4)
    if space is None:
        conf = audit_chart(conformal_flat_chart(), n_points=3, n_frames=n_frames, seed=seed)
        res.below("conformally flat chart: O++ conditions", conf["oplus"], 1e-4)
        res.above("conformally flat chart: OG+ conditions", conf["og"], 1e-3)
        prod = audit_chart(product_chart(), n_points=3, n_frames=n_frames, seed=seed)
        res.above("product chart: O++ conditions", prod["oplus"], 1e-3)
        res.details["charts"] = {"conformal_x3sq": conf, "product_r11_s2": prod}
    return res


def audit_lattice(lm: LatticeMetric, n_frames: int = 50, seed: int = 0, margin: int = 2) -> dict:
    """Curvature conditions at interior lattice nodes (finite differences on the lattice)."""
    from .space_forms import orthonormal_basis

    R = lm.riemann()
    shape = lm.values.shape[:4]
    idx = [np.arange(margin, n - margin) for n in shape]
    points = []
    for n, node in enumerate(np.stack(np.meshgrid(*idx, indexing="ij"), -1).reshape(-1, 4)):
        node = tuple(node)
        base = orthonormal_basis(lm.values[node])
        po = pg = 0.0
        for L in audit_frames(n, n_frames, seed):
            Rf = frame_components(R[node], base @ L)
            po = max(po, *integrability_oplus(Rf))
            pg = max(pg, *integrability_og(Rf))
        points.append({"point": [float(lm.axes[a][node[a]]) for a in range(4)], "oplus": po, "og": pg})
    return {"oplus": max(p["oplus"] for p in points), "og": max(p["og"] for p in points), "points": points,
            "n_frames": n_frames, "seed": seed}


def suite_cr_compare(seed=0, **_) -> SuiteResult:
    res = SuiteResult("cr-compare")
    rng = np.random.default_rng(seed)
    for key, M in SPACE_FORMS.items():
        for N in umbilic_catalog(M):
            worst = max(cr_compare(M, N.chart, y, rng=rng) for y in N.sample(50, rng))
            res.below(f"{key}: {N.name}", worst, 1e-6)
    ys = rng.uniform(-1, 1, size=(50, 3))
    res.above("r41: graph x1 = 0.1 (y1^2 - y2^2)",
              max(cr_compare(MINKOWSKI, graph_hypersurface(0.1), y, rng=rng) for y in ys), 1e-3)
    return res


# -- conformal rescaling ------------------------------------------------------------------

def default_rho(x):
    return 0.1 * x[..., 2] ** 2 + 0.05 * x[..., 0] * x[..., 3]


def suite_conformal(resolution=64, fd_step=1e-3, tol=1e-5, seed=0, **_) -> SuiteResult:
    res = SuiteResult("conformal")
    specs = [
        FamilySpec("r41", "i_lambda", _lam(f"random:{seed * 100 + 40}")),
        FamilySpec("r41", "j_lambda", _lam("linear:0.1,0,0"), theta=1.0),
        FamilySpec("r41", "i_lambda", _lam("poly:z1^2")),
    ]
    for spec in specs:
        f = build_family(spec, resolution, fd_step)
        out = conformal_change_check(f, default_rho, tol)
        before = holomorphy_check(gauss_lift(f, 1), "O++", tol).verdict
        after = out["O++_residual_rescaled"] < tol
        res.below(f"{f.name}: rescaling identity", out["identity_residual"], 1e-5)
        res.equal(f"{f.name}: L- and L+ vanishing flags unchanged", out["flags_agree"], True)
        res.equal(f"{f.name}: O++ verdict unchanged", bool(before == after), True)
        res.details[f.name] = out
    return res


# -- tension ------------------------------------------------------------------------------

TENSION_CASES = (
    # spec, mean curvature vanishes, gradient of mean curvature vanishes
    (("r41", "i_lambda", "harmonic:z1^2-z2^2", None), True, True),
    (("s41", "i_c_lambda", "linear:0,0,1", 0.0), True, True),
    (("h41", "i_lambda", "linear:0.2,0,0", None), True, True),
    (("r41", "i_lambda", "poly:z1^2", None), False, True),
    (("s41", "i_c_lambda", "zero", 0.5), False, True),
    (("s41", "i_c_lambda", "random:5", 0.0), False, False),
)


def suite_tension(space=None, lambda_g=None, resolution=64, fd_step=1e-3, tol=1e-5, **_) -> SuiteResult:
    res = SuiteResult("tension")
    values = [1.0, 12.0] if lambda_g is None else [float(lambda_g)]
    for (key, tag, lam, c), mean_zero, grad_zero in TENSION_CASES:
        if space is not None and key != space:
            continue
        f = build_family(FamilySpec(key, tag, _lam(lam), c=c), resolution, fd_step)
        sd = surface_data(f)
        for lg in values:
            out = gauss_tension(f, lg, tol, sd)
            critical = out["critical"]
            expected = grad_zero if critical else mean_zero
            name = f"{f.name} lambdaG={lg:g}"
            res.equal(f"{name}: harmonic verdict", out["harmonic"], expected)
            if expected:
                res.below(f"{name}: largest tension term", max(out["terms"].values()), tol)
            elif not critical:
                res.above(f"{name}: horizontal term", out["terms"]["horizontal"], 1e-3)
            res.details[name] = out
    return res


# -- stereographic transport --------------------------------------------------------------

def suite_stereographic(resolution=64, seed=0, **_) -> SuiteResult:
    res = SuiteResult("stereographic")
    for k in range(3):
        lam = _lam(f"random:{seed * 100 + 50 + k}")
        spec = FamilySpec("s41", "i_c_lambda", lam, c=0.0)
        f = build_family(spec, resolution)
        z = f.points()
        lam_z = lam.on(spec.model)(z)
        tilde = (1 + z[:, 0] ** 2 + z[:, 1] ** 2) / 2 * lam_z
        plane = np.stack([tilde, tilde, z[:, 0], z[:, 1]], -1)
        res.below(f"transport of the plane family, {lam.name}", np.max(np.abs(stereographic_inverse(plane) - f(z))), 1e-10)
    rng = np.random.default_rng(seed)
    q = rng.uniform(-1, 1, size=(200, 4))
    res.below("round trip R41 -> pseudosphere -> R41", np.max(np.abs(stereographic(stereographic_inverse(q)) - q)), 1e-12)
    return res


# -- convergence --------------------------------------------------------------------------

def convergence_quantities(fd_step: float, resolution: int = 64) -> dict[str, float]:
    """Residuals that vanish analytically but carry O(h^2) truncation error."""
    out = {}
    for spec in (FamilySpec("r41", "j_lambda", _lam("linear:0.1,0,0"), theta=1.0),
                 FamilySpec("h41", "j_c_lambda", _lam("linear:0.1,0,0"), c=2.0)):
        rep = classify(build_family(spec, resolution, fd_step))
        out[f"{spec.space}:{spec.tag} sup|L-|"] = rep.residuals["pos_semi_umbilic"]
    rep = classify(build_family(FamilySpec("r41", "j_lambda", _lam("zero"), theta=1.0), resolution, fd_step))
    out["round sphere umbilicity"] = rep.residuals["totally_umbilic"]
    out["round sphere conformality"] = rep.conformality
    spec = FamilySpec("s41", "i_c_lambda", _lam("linear:0,0,1"), c=0.0)
    pts = build_family(spec, 16).points()
    out["sphere Laplacian of y3 plus 2 y3"] = float(np.max(np.abs(isotropy_coefficient(spec, pts, h=fd_step))))
    return out


def suite_convergence(fd_step=1e-3, resolution=64, **_) -> SuiteResult:
    res = SuiteResult("convergence")
    coarse, fine = convergence_quantities(fd_step, resolution), convergence_quantities(fd_step / 2, resolution)
    for k in coarse:
        res.within(f"{k}: ratio for halved step", coarse[k] / fine[k], 3.0, 5.0)
    res.details = {"coarse": coarse, "fine": fine, "fd_step": fd_step}
    return res


SUITES: dict[str, Callable[..., SuiteResult]] = {
    "prop31": suite_equivalences,
    "deformation": suite_deformation,
    "coefficients": suite_coefficients,
    "integrability": suite_integrability,
    "cr-compare": suite_cr_compare,
    "conformal": suite_conformal,
    "tension": suite_tension,
    "stereographic": suite_stereographic,
    "convergence": suite_convergence,
}
