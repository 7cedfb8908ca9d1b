"""Acceptance checks for one configured model.

`CHECKS` is the single source of truth for both the computation and the
methodology block written into the report. Each check measures one or more cases,
compares `measured` with `expected` under its mode and tolerance, and records
`passed`. A check that raises is recorded under `errors` and fails the run.
"""

from __future__ import annotations

import itertools
import logging
import time
from contextlib import contextmanager
from dataclasses import asdict, dataclass, field
from typing import Any, Callable, Iterator

import numpy as np
from mpmath import mp

from equiszego.algebra.jets import Jet
from equiszego.asymptotics.fit import STABILITY_THRESHOLD, ExpansionSamples, FitResult, fit_coefficients, richardson_sequence
from equiszego.asymptotics.quadrature import quadrature_oracle
from equiszego.asymptotics.stationary_phase import build_phase, sp_expand
from equiszego.coefficients import ModelGeometry, model_geometry, predicted_coefficients
from equiszego.config import RunConfig
from equiszego.errors import EquiszegoError
from equiszego.geometry.group import TorusGroup, laplace_character
from equiszego.models.sphere import (
    SphereModel,
    SpherePoint,
    find_zero_point,
    group_integral_km,
    kernel_table,
    moment_map,
    orbit_expansion,
    slice_nonempty,
    szego_km_diag,
    szego_m_diag,
)
from equiszego.tables import sample_parity

log = logging.getLogger("equiszego.verify")

SLOPE_DEGREES = (50, 100, 200, 400, 800)
SP_JMAX = 2

# Fixed stationary-phase test problems: (name, num_vars, phase terms, amplitude terms).
# Every phase has a positive definite imaginary Hessian at the origin.
TEST_PHASES: list[dict[str, Any]] = [
    {"name": "quartic", "num_vars": 1,
     "F": [((2,), 1j), ((4,), 1j)], "u": [((0,), 1)]},
    {"name": "cubic", "num_vars": 1,
     "F": [((2,), 1j), ((3,), 1)], "u": [((0,), 1), ((1,), 1)]},
    {"name": "complex_hessian", "num_vars": 1,
     "F": [((2,), 1 + 1j), ((4,), 0.5j)], "u": [((0,), 1)]},
    {"name": "planar_quartic", "num_vars": 2,
     "F": [((2, 0), 1j), ((0, 2), 1j), ((4, 0), 0.1j), ((0, 4), 0.1j)],
     "u": [((0, 0), 1), ((2, 0), 1)]},
    {"name": "planar_mixed", "num_vars": 2,
     "F": [((2, 0), 1j), ((1, 1), 1j), ((0, 2), 1j), ((2, 1), 0.2)], "u": [((0, 0), 1)]},
]

# Gaussian phases with a closed-form integral c m^{-N/2}.
GAUSSIANS: list[dict[str, Any]] = [
    {"name": "gaussian_1d", "num_vars": 1, "F": [((2,), 1j)], "value": lambda m: mp.sqrt(mp.pi / m)},
    {"name": "gaussian_2d", "num_vars": 2, "F": [((2, 0), 1j), ((0, 2), 1j)], "value": lambda m: mp.pi / m},
]


@dataclass(eq=False)
class VerifyContext:
    """Model, base point and lazily computed per-weight geometry and fits."""

    cfg: RunConfig
    model: SphereModel
    point: SpherePoint
    _geometry: dict[tuple[int, ...], ModelGeometry] = field(default_factory=dict)
    _predicted: dict[tuple[int, ...], dict[str, mp.mpf]] = field(default_factory=dict)
    _fits: dict[tuple[int, ...], FitResult] = field(default_factory=dict)

    @classmethod
    def build(cls, cfg: RunConfig) -> VerifyContext:
        model = SphereModel.from_config(cfg.n, cfg.weights)
        point = SpherePoint.from_moduli(cfg.point) if cfg.point else find_zero_point(model)
        return cls(cfg=cfg, model=model, point=point)

    def geometry(self, k: tuple[int, ...]) -> ModelGeometry:
        if k not in self._geometry:
            self._geometry[k] = model_geometry(self.model, k, self.point)
        return self._geometry[k]

    def predicted(self, k: tuple[int, ...]) -> dict[str, mp.mpf]:
        if k not in self._predicted:
            self._predicted[k] = predicted_coefficients(self.model, k, self.point, self.geometry(k))
        return self._predicted[k]

    def fit(self, k: tuple[int, ...]) -> FitResult:
        if k not in self._fits:
            cfg = self.cfg
            rows = kernel_table(self.model, k, range(cfg.m_min, cfg.m_max + 1), self.point, cfg.workers)
            samples = ExpansionSamples.build(rows, self.model.exponent_base, sample_parity([m for m, _ in rows]))
            result = fit_coefficients(samples, cfg.fit_terms)
            result.richardson.extend(richardson_sequence(samples))
            self._fits[k] = result
        return self._fits[k]


Case = dict[str, Any]


def _case(label: str, measured: Any, expected: Any, **extra: Any) -> Case:
    return {"case": label, "measured": measured, "expected": expected, **extra}


def _nonempty_near(model: SphereModel, k: tuple[int, ...], m: int) -> int:
    for candidate in (m, m + 1, m + 2, m + 3):
        if slice_nonempty(model, k, candidate):
            return candidate
    raise EquiszegoError(f"no nonempty weight-{k} slice near m={m}")


def log_log_slope(ms: list[int], errors: list[float]) -> float:
    """Least-squares slope of -log(error) against log(m)."""
    slope, _ = np.polyfit(np.log(np.asarray(ms, dtype=float)), np.log(np.asarray(errors, dtype=float)), 1)
    return float(-slope)


# --- measurements ---

def _measure_a0(ctx: VerifyContext, which: int) -> Iterator[Case]:
    model, p = ctx.model, ctx.point
    samples = ExpansionSamples.build([(m, szego_m_diag(model, m, p)) for m in range(1, 61)], model.n)
    fit = fit_coefficients(samples, 3)
    geometry = ctx.geometry(ctx.cfg.k)
    expected = geometry.a0 if which == 0 else geometry.a1
    yield _case(f"n={model.n}", fit.coeffs[which], expected)


def measure_a0_fit(ctx: VerifyContext) -> Iterator[Case]:
    return _measure_a0(ctx, 0)


def measure_a1_fit(ctx: VerifyContext) -> Iterator[Case]:
    return _measure_a0(ctx, 1)


def measure_b0_fit(ctx: VerifyContext) -> Iterator[Case]:
    for k in ctx.cfg.k_values:
        yield _case(f"k={k}", ctx.fit(k).coeffs[0], ctx.predicted(k)["b0"])


def measure_b1_closed_form(ctx: VerifyContext) -> Iterator[Case]:
    """(fitted b1 - b1_global) against the expected closed-form defect, relative to b1_global."""
    defect = mp.mpf(ctx.cfg.expected_defect.numerator) / ctx.cfg.expected_defect.denominator
    for k in ctx.cfg.k_values:
        predicted = ctx.predicted(k)
        yield _case(f"k={k}", ctx.fit(k).coeffs[1] - predicted["b1_global"], defect * predicted["b0"],
                    scale=abs(predicted["b1_global"]))


def measure_b1_orbit_fit(ctx: VerifyContext) -> Iterator[Case]:
    for k in ctx.cfg.k_values:
        yield _case(f"k={k}", ctx.fit(k).coeffs[1], ctx.predicted(k)["b1_orbit"])


def measure_b1_local_global(ctx: VerifyContext) -> Iterator[Case]:
    for k in ctx.cfg.k_values:
        predicted = ctx.predicted(k)
        yield _case(f"k={k}", predicted["b1_local"], predicted["b1_global"])


def measure_b1_local_measured(ctx: VerifyContext) -> Iterator[Case]:
    for k in ctx.cfg.k_values:
        predicted = ctx.predicted(k)
        yield _case(f"k={k}", predicted["b1_local_measured"], predicted["b1_orbit"])


def measure_fit_stability(ctx: VerifyContext) -> Iterator[Case]:
    for k in ctx.cfg.k_values:
        fit = ctx.fit(k)
        yield _case(f"k={k}", fit.stability if fit.stability is not None else mp.mpf(0), mp.mpf(0))


def measure_group_integral(ctx: VerifyContext) -> Iterator[Case]:
    """Largest |S_km - d_k int S_m chibar_k dmu| over m <= 30 and |k_j| <= 3."""
    model, p = ctx.model, ctx.point
    worst, where = mp.mpf(0), None
    for k in itertools.product(range(-3, 4), repeat=model.d):
        for m in range(0, 31):
            exact = szego_km_diag(model, k, m, p)
            error = abs(group_integral_km(model, k, m, p) - exact) / max(1, abs(exact))
            if error > worst:
                worst, where = error, (k, m)
    yield _case(f"worst at (k, m)={where}", worst, mp.mpf(0))


def measure_haar_identity(ctx: VerifyContext) -> Iterator[Case]:
    haar = ctx.geometry(ctx.cfg.k).haar
    yield _case("Delta V(0)", haar.deltaV0, haar.rhs)


def _fd_character_laplacian(g: TorusGroup, k: tuple[int, ...]) -> mp.mpf:
    """Central differences of chibar_k at e_0 contracted with the unit-volume inverse metric."""
    d = g.d
    h = mp.mpf(2) ** -(mp.prec // 4)

    def chibar(theta):
        return mp.expj(-mp.fsum(kj * t for kj, t in zip(k, theta)))

    def shifted(signs):
        return chibar([s * h for s in signs])

    hessian = mp.matrix(d, d)
    for a in range(d):
        for b in range(a, d):
            if a == b:
                unit = [1 if c == a else 0 for c in range(d)]
                value = (shifted(unit) - 2 * chibar([0] * d) + shifted([-u for u in unit])) / h ** 2
            else:
                def corner(sa, sb):
                    return shifted([sa if c == a else sb if c == b else 0 for c in range(d)])
                value = (corner(1, 1) - corner(1, -1) - corner(-1, 1) + corner(-1, -1)) / (4 * h ** 2)
            hessian[a, b] = hessian[b, a] = mp.re(value)
    inv = mp.inverse(g.metric)
    volume = g.fundamental_volume * mp.sqrt(mp.det(g.metric))
    contracted = mp.fsum(inv[a, b] * hessian[a, b] for a in range(d) for b in range(d))
    return volume ** (mp.mpf(2) / d) * contracted


def measure_character_laplacian(ctx: VerifyContext) -> Iterator[Case]:
    """Second differences of chibar_k at e_0 on the standard torus and on the effective torus at p."""
    tori = {"standard": ctx.model.torus(), "effective": ctx.model.torus(ctx.point)}
    for (label, g), k in itertools.product(tori.items(), ctx.cfg.k_values):
        oracle = _fd_character_laplacian(g, k)
        yield _case(f"{label} k={k}", laplace_character(g, k), oracle, scale=max(1, abs(oracle)))


def _phase_jet(spec: dict[str, Any], order: int) -> tuple[Jet, Jet]:
    N = spec["num_vars"]
    F = Jet.from_terms(N, order, spec["F"])
    u = Jet.from_terms(N, order, spec.get("u", [((0,) * N, 1)]))
    return F, u


def measure_sp_gaussian(ctx: VerifyContext) -> Iterator[Case]:
    for spec in GAUSSIANS:
        F, u = _phase_jet(spec, 2 * SP_JMAX + 2)
        expansion = sp_expand(build_phase(F), u, SP_JMAX)
        for m in (50, 800):
            exact = spec["value"](mp.mpf(m))
            yield _case(f"{spec['name']} m={m}", expansion.evaluate(m), exact, scale=abs(exact))


def measure_sp_slope(ctx: VerifyContext) -> Iterator[Case]:
    """Relative error of the jmax = 2 expansion against the quadrature oracle, over m in [50, 800]."""
    for spec in TEST_PHASES:
        F, u = _phase_jet(spec, 2 * SP_JMAX + 2)
        expansion = sp_expand(build_phase(F), u, SP_JMAX)
        domain = [(-2.0, 2.0)] * spec["num_vars"]
        errors = []
        for m in SLOPE_DEGREES:
            oracle = quadrature_oracle(F.to_callable(), u.to_callable(), m, domain)
            approx = complex(expansion.evaluate(m))
            errors.append(abs(approx - oracle) / abs(oracle))
        yield _case(spec["name"], log_log_slope(list(SLOPE_DEGREES), errors), SP_JMAX + 0.7,
                    errors=[float(e) for e in errors])


def measure_orbit_slope(ctx: VerifyContext) -> Iterator[Case]:
    model, p = ctx.model, ctx.point
    base = mp.mpf(model.exponent_base.numerator) / model.exponent_base.denominator
    for k in ctx.cfg.k_values:
        b = orbit_expansion(model, k, p, SP_JMAX)
        ms, errors = [], []
        for target in SLOPE_DEGREES:
            m = _nonempty_near(model, k, target)
            exact = szego_km_diag(model, k, m, p)
            approx = mp.fsum(bj * mp.mpf(m) ** (base - j) for j, bj in enumerate(b))
            ms.append(m)
            errors.append(float(abs(approx - exact) / abs(exact)))
        yield _case(f"k={k}", log_log_slope(ms, errors), SP_JMAX + 0.7, errors=errors)


def measure_orbit_coefficients(ctx: VerifyContext) -> Iterator[Case]:
    defect = mp.mpf(ctx.cfg.expected_defect.numerator) / ctx.cfg.expected_defect.denominator
    for k in ctx.cfg.k_values:
        predicted = ctx.predicted(k)
        yield _case(f"b0 k={k}", predicted["b0_orbit"], predicted["b0"])
        yield _case(f"b1 k={k}", predicted["b1_orbit"], predicted["b1_global"] + defect * predicted["b0"],
                    scale=abs(predicted["b1_global"]))


def off_zero_point(model: SphereModel, p: SpherePoint) -> SpherePoint:
    """Halfway from p toward the first coordinate vertex whose weight column is nonzero."""
    x = p.moduli_squared
    vertex = next(l for l in range(model.n + 1) if any(row[l] for row in model.W))
    return SpherePoint.from_moduli([(xl + (1 if l == vertex else 0)) / 2 for l, xl in enumerate(x)])


def measure_off_zero_decay(ctx: VerifyContext) -> Iterator[Case]:
    model, p = ctx.model, ctx.point
    q = off_zero_point(model, p)
    k = ctx.cfg.k
    m = _nonempty_near(model, k, 200)
    ratio = szego_km_diag(model, k, m, q) / szego_km_diag(model, k, m, p)
    mu = max(abs(v) for v in moment_map(model, q))
    yield _case(f"k={k} m={m} |mu|={mp.nstr(mu, 5)}", ratio, mp.mpf(0))


# Modes: "relative" divides by `scale` (default |expected|), "absolute" does not,
# "at_least" passes when measured >= expected and ignores the tolerance.
CHECKS: list[dict[str, Any]] = [
    {"name": "a0_fit", "label": "Leading coefficient of S_m(x,x) = 1/(2 pi^{n+1})",
     "mode": "relative", "tolerance": 1e-6, "measure": measure_a0_fit},
    {"name": "a1_fit", "label": "Second coefficient of S_m(x,x) = R/(4 pi^{n+1}), R from the BRT potential",
     "mode": "relative", "tolerance": 1e-6, "measure": measure_a1_fit},
    {"name": "b0_fit", "label": "Fitted leading coefficient of S_km(p,p) = b0",
     "mode": "relative", "tolerance": 1e-5, "measure": measure_b0_fit},
    {"name": "b1_closed_form", "label": "Fitted b1 - b1_global = expected_defect * b0 (relative to b1_global)",
     "mode": "relative", "tolerance": 1e-3, "measure": measure_b1_closed_form},
    {"name": "b1_orbit_fit", "label": "Fitted b1 = b1 from stationary phase on the orbit",
     "mode": "relative", "tolerance": 1e-3, "measure": measure_b1_orbit_fit},
    {"name": "b1_local_global", "label": "Local assembly of b1 = closed form b1_global",
     "mode": "relative", "tolerance": 1e-10, "measure": measure_b1_local_global},
    {"name": "b1_local_measured", "label": "Local assembly with the measured Delta^2 h(0) = orbit b1",
     "mode": "relative", "tolerance": 1e-10, "measure": measure_b1_local_measured},
    {"name": "fit_stability", "label": "Leading coefficient unchanged when m_min doubles",
     "mode": "absolute", "tolerance": STABILITY_THRESHOLD, "measure": measure_fit_stability},
    {"name": "group_integral", "label": "S_km(p,p) = d_k int_G S_m(g p, p) chibar_k dmu, m <= 30, |k| <= 3",
     "mode": "absolute", "tolerance": 1e-8, "measure": measure_group_integral},
    {"name": "haar_identity", "label": "Delta V(0) = 2^{d/2-2} V_eff^{-1} sum d^2 G_jj(0)",
     "mode": "absolute", "tolerance": 1e-12, "measure": measure_haar_identity},
    {"name": "character_laplacian", "label": "(Delta chibar_k)(e_0) on the standard and effective tori against finite differences",
     "mode": "relative", "tolerance": 1e-8, "measure": measure_character_laplacian},
    {"name": "sp_gaussian", "label": "Stationary phase exact on Gaussian phases",
     "mode": "relative", "tolerance": 1e-25, "measure": measure_sp_gaussian},
    {"name": "sp_slope", "label": "Error slope of the jmax=2 expansion against quadrature over m in [50, 800]",
     "mode": "at_least", "tolerance": None, "measure": measure_sp_slope},
    {"name": "orbit_slope", "label": "Error slope of the orbit expansion against the exact kernel",
     "mode": "at_least", "tolerance": None, "measure": measure_orbit_slope},
    {"name": "orbit_coefficients", "label": "Orbit b0, b1 = closed forms (b1 up to expected_defect * b0)",
     "mode": "relative", "tolerance": 1e-3, "measure": measure_orbit_coefficients},
    {"name": "off_zero_decay", "label": "S_km(q,q)/S_km(p,p) at m ~ 200 for q off the zero locus",
     "mode": "absolute", "tolerance": 1e-8, "measure": measure_off_zero_decay},
]


def methodology() -> dict[str, Any]:
    """Definition of every check (rendered in the report)."""
    return {
        "summary": (
            "Each check compares a measured quantity with its expected value. Relative checks "
            "divide the difference by the stated scale (|expected| unless given). Slope checks "
            "pass when the measured log-log error slope is at least the expected value."
        ),
        "checks": [
            {"name": c["name"], "label": c["label"], "mode": c["mode"], "tolerance": c["tolerance"]}
            for c in CHECKS
        ],
    }


def _evaluate(case: Case, mode: str, tol: float | None) -> Case:
    measured, expected = case["measured"], case["expected"]
    if mode == "at_least":
        case.update(tolerance=None, error=None, passed=bool(measured >= expected))
        return case
    diff = abs(mp.mpmathify(measured) - mp.mpmathify(expected))
    if mode == "relative":
        scale = case.pop("scale", None)
        scale = abs(mp.mpmathify(expected)) if scale is None else mp.mpf(scale)
        diff = diff / scale if scale else diff
    case.update(tolerance=tol, error=diff, passed=bool(diff <= tol))
    return case


def run_checks(cfg: RunConfig, only: Callable[[str], bool] | None = None) -> dict[str, Any]:
    """Run every check in CHECKS (or those accepted by `only`) and collect results and errors."""
    ctx = VerifyContext.build(cfg)
    results: list[dict[str, Any]] = []
    errors: list[dict[str, str]] = []
    for check in CHECKS:
        name = check["name"]
        if only is not None and not only(name):
            continue
        tol = check["tolerance"]
        if tol is not None:
            tol = cfg.tolerances.get(name, tol) * cfg.tolerance_scale
        try:
            for case in check["measure"](ctx):
                results.append({"check": name, **_evaluate(case, check["mode"], tol)})
        except (EquiszegoError, ValueError, ZeroDivisionError) as e:
            log.warning("check %s raised: %s", name, e)
            errors.append({"check": name, "error": f"{type(e).__name__}: {e}"})
            continue
        failed = [r["case"] for r in results if r["check"] == name and not r["passed"]]
        log.info("check %s: %s", name, "FAILED " + ", ".join(failed) if failed else "passed")

    failed = sorted({r["check"] for r in results if not r["passed"]} | {e["check"] for e in errors})
    return {
        "model": {"n": cfg.n, "weights": cfg.weights, "point_moduli": ctx.point.moduli_squared},
        "k_values": [list(k) for k in cfg.k_values],
        "precision_bits": mp.prec,
        "checks": results,
        "errors": errors,
        "failed": failed,
        "passed": not failed,
        "methodology": methodology(),
    }


# --- expansion report ---

@contextmanager
def _timed(timings: dict[str, float], stage: str) -> Iterator[None]:
    start = time.perf_counter()
    try:
        yield
    finally:
        timings[stage] = timings.get(stage, 0.0) + time.perf_counter() - start


def _relative_error(measured: mp.mpf, expected: mp.mpf) -> mp.mpf:
    return abs(measured - expected) / abs(expected) if expected else abs(measured)


def expansion_report(cfg: RunConfig) -> dict[str, Any]:
    """Fitted against predicted coefficients for every configured k, with the geometry behind them.

    Each entry carries the fit (coefficients, uncertainties, diagnostics), the predicted
    b0 and b1 from every route, relative errors of the fit against each prediction and
    the geometry dump. Stage timings are summed over k.
    """
    timings: dict[str, float] = {}
    with _timed(timings, "setup"):
        ctx = VerifyContext.build(cfg)
    entries: list[dict[str, Any]] = []
    errors: list[dict[str, str]] = []
    for k in cfg.k_values:
        try:
            with _timed(timings, "geometry"):
                geometry = ctx.geometry(k)
            with _timed(timings, "predicted"):
                predicted = ctx.predicted(k)
            with _timed(timings, "fit"):
                fit = ctx.fit(k)
        except (EquiszegoError, ValueError, ZeroDivisionError) as e:
            log.warning("expansion for k=%s raised: %s", k, e)
            errors.append({"k": str(list(k)), "error": f"{type(e).__name__}: {e}"})
            continue
        c0 = fit.coeffs[0]
        c1 = fit.coeffs[1] if len(fit.coeffs) > 1 else mp.mpf(0)
        relative = {"b0": _relative_error(c0, predicted["b0"])}
        for key in ("b1_global", "b1_local", "b1_orbit"):
            relative[key] = _relative_error(c1, predicted[key])
        entries.append({
            "k": list(k),
            "fit": {
                "coeffs": fit.coeffs,
                "uncertainties": fit.uncertainties,
                "residual": fit.residual,
                "condition": fit.condition,
                "stability": fit.stability,
                "richardson": fit.richardson,
            },
            "predicted": predicted,
            "relative_errors": relative,
            "geometry": geometry.dump(),
        })
        log.info("k=%s: c0/b0 - 1 = %s, c1 against b1_orbit = %s", k,
                 mp.nstr(relative["b0"], 5), mp.nstr(relative["b1_orbit"], 5))
    return {
        "model": {"n": cfg.n, "weights": cfg.weights, "point_moduli": ctx.point.moduli_squared},
        "exponent_base": ctx.model.exponent_base,
        "precision_bits": mp.prec,
        "expansions": entries,
        "errors": errors,
        "timings": timings,
        "config": asdict(cfg),
    }
