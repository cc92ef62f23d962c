"""
Monotone solvers for the approximating problems

    (-Delta)^s u + f(u) = 0 in Omega,  E u = k        (k-problem)
    (-Delta)^s u + f(u) = 0 in Omega,  u = min(k, g)  outside (g-problem)

in Green form u = base - G f(u), plus the supersolution builder and the
k-sweep with regime detection.
"""
import logging
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from fracblowup.config import settings
from fracblowup.errors import (
    ConfigError,
    DataInadmissibleError,
    DiscretizationError,
    FracBlowupError,
    HypothesisViolationError,
    IntegrabilityError,
    InversionRangeError,
    IterationError,
    SupersolutionError,
)
from fracblowup.models.ball_kernels import (
    KernelSet,
    get_green_operator,
    green_weight_exponent,
    h1_mass,
    h1_profile,
    poisson_apply,
    torsion_profile,
)
from fracblowup.models.fraclap_op import (
    FracLapOperator,
    ko_grid_function,
    residual,
    supersolution_inequality_check,
)
from fracblowup.models.ko_conditions import KOProfile, check_condition, check_L1, predict_regime
from fracblowup.models.mesh_domain import (
    Domain,
    ExteriorData,
    GradedMesh,
    GridFunction,
    build_graded_mesh,
    exterior_l1_norm,
    parse_exterior_spec,
    strip_indices,
)
from fracblowup.models.nonlinearity import (
    NonlinearityModel,
    estimate_growth_envelope,
    eval_f,
    eval_f_prime,
    growth_ratio,
)
from fracblowup.schemas.conditions import Condition, Regime, Verdict
from fracblowup.schemas.solve import (
    DomainKind,
    ResidualSummary,
    SolveConfig,
    SolveSummary,
    SupersolutionSummary,
    SweepObservation,
    SweepSummary,
)

logger = logging.getLogger(__name__)

SHIFT_SAMPLES = 8
LOWER_FLOOR = 1e-6
INTERIOR_DELTA = 0.1
STRIP_DELTA = 0.2
SUPERSOLUTION_TOL = 1e-3
G2_SAMPLES = np.geomspace(1e-6, 1e-2, 32)

_AGREEMENT = {
    Regime.LARGE_SOLUTION: SweepObservation.STABILIZING,
    Regime.NONEXISTENCE: SweepObservation.REFUSAL,
    Regime.L1_ESCAPE: SweepObservation.L1_ESCAPE,
    Regime.UNIFORM_BLOWUP: SweepObservation.UNIFORM_BLOWUP,
}


@dataclass
class SolveResult:
    solution: GridFunction
    summary: SolveSummary


@dataclass
class SupersolutionSpec:
    summary: SupersolutionSummary
    ubar: GridFunction
    U: GridFunction


@dataclass
class SweepResult:
    summary: SweepSummary
    results: Dict[float, SolveResult] = field(default_factory=dict)
    supersolution: Optional[SupersolutionSpec] = None


def build_model(config: SolveConfig) -> NonlinearityModel:
    return NonlinearityModel.from_spec(config.model)


def build_mesh(config: SolveConfig) -> GradedMesh:
    spec = config.mesh
    domain = Domain.interval() if spec.domain == DomainKind.INTERVAL else Domain.ball(spec.N)
    return build_graded_mesh(domain, spec.n, config.mesh_q())


_FRACLAP_CACHE: Dict[Tuple, FracLapOperator] = {}
_FRACLAP_LOCK = threading.Lock()


def get_fraclap_operator(mesh: GradedMesh, s: float) -> FracLapOperator:
    key = mesh.key + (round(s, 12),)
    with _FRACLAP_LOCK:
        operator = _FRACLAP_CACHE.get(key)
        if operator is None:
            operator = FracLapOperator(mesh, s)
            _FRACLAP_CACHE[key] = operator
    return operator


def _shift(model: NonlinearityModel, lower: np.ndarray, upper: np.ndarray) -> np.ndarray:
    """Nodal max of f' over [lower, upper], sampled at log-spaced points."""
    c = np.zeros_like(upper)
    pos = upper > 0
    if not np.any(pos):
        return c
    hi = upper[pos]
    lo = np.minimum(np.maximum(lower[pos], LOWER_FLOOR * hi), hi)
    samples = np.geomspace(lo, hi, SHIFT_SAMPLES)
    c[pos] = np.max(eval_f_prime(model, samples), axis=0)
    return c


@dataclass
class _IterationOutcome:
    u: np.ndarray
    iterations: int
    history: List[float]
    clamped: int
    violations: int
    fixed_point_gap: float


def _fixed_point_gap(model: NonlinearityModel, weights: np.ndarray, base: np.ndarray, u: np.ndarray) -> float:
    """Relative sup-norm of u - max(0, base - W f(u)), the map the iterates are clamped to."""
    picard = np.maximum(base - weights @ eval_f(model, u), 0.0)
    return float(np.max(np.abs(u - picard)) / max(1.0, np.max(np.abs(u - base))))


def monotone_iteration(
    model: NonlinearityModel,
    weights: np.ndarray,
    base: np.ndarray,
    max_iters: int,
    tol: float,
    damping: float = 1.0,
) -> _IterationOutcome:
    """
    Decreasing iteration for u = base - W f(u) starting from u = base.

    Each step solves (I + W C) d = (base - W f(u)) - u with a nodal shift
    C >= sup f' on [max(0, base - W f(u)), u], then clamps at 0 and keeps the
    sequence nonincreasing.

    Raises:
        IterationError: If the relative gap does not reach tol within max_iters
    """
    size = len(base)
    identity = np.eye(size)
    u = np.array(base, dtype=float)
    history: List[float] = []
    clamped = violations = 0
    for iteration in range(1, max_iters + 1):
        picard = base - weights @ eval_f(model, u)
        shift = _shift(model, np.maximum(picard, 0.0), u)
        step = np.linalg.solve(identity + weights * shift[None, :], picard - u)
        candidate = u + damping * step

        negative = candidate < 0.0
        clamped += int(np.count_nonzero(negative))
        candidate[negative] = 0.0
        rising = candidate > u + 1e-12 * np.maximum(1.0, np.abs(u))
        violations += int(np.count_nonzero(rising))
        candidate = np.minimum(candidate, u)

        gap = float(np.max(np.abs(candidate - u)) / max(1.0, np.max(np.abs(candidate - base))))
        history.append(gap)
        u = candidate
        logger.debug(f"iteration {iteration}: gap {gap:.3e}")
        if gap > tol:
            continue
        # a clipped or stalled step is not a fixed point
        fp_gap = _fixed_point_gap(model, weights, base, u)
        if fp_gap > tol:
            logger.debug(f"iteration {iteration}: step gap met tol, fixed-point gap {fp_gap:.3e}")
            continue
        if clamped:
            logger.warning(f"Clamped {clamped} negative undershoots at 0")
        if violations:
            logger.warning(f"Clipped {violations} nodal increases of the iterates")
        return _IterationOutcome(u, iteration, history, clamped, violations, fp_gap)
    raise IterationError(
        f"Monotone iteration did not converge in {max_iters} iterations",
        last_gap=history[-1],
        fixed_point_gap=_fixed_point_gap(model, weights, base, u),
        clipped=violations,
        history=history[-10:],
    )


def residual_summary(mesh: GradedMesh, s: float, solution: GridFunction, model: NonlinearityModel) -> Optional[ResidualSummary]:
    if mesh.domain.kind != DomainKind.INTERVAL:
        return None
    op = get_fraclap_operator(mesh, s)
    nodes = op.admissible
    res = residual(op, solution, model, nodes)
    f = np.asarray(eval_f(model, np.maximum(solution.total()[nodes], 0.0)))
    scaled = np.abs(res) / np.maximum(1.0, f)
    interior = mesh.delta[nodes] > INTERIOR_DELTA
    return ResidualSummary(
        region="admissible",
        n_nodes=len(nodes),
        max_residual=float(np.max(np.abs(res))),
        max_scaled_residual=float(scaled.max()),
        max_scaled_interior=float(scaled[interior].max()) if np.any(interior) else 0.0,
    )


def _tech_ok(model: NonlinearityModel) -> bool:
    try:
        estimate_growth_envelope(model)
        return True
    except HypothesisViolationError as e:
        logger.warning(f"Growth hypothesis fails for {model.label}: {str(e)}")
        return False


def solve_k_problem(
    config: SolveConfig,
    model: Optional[NonlinearityModel] = None,
    mesh: Optional[GradedMesh] = None,
    with_residual: bool = True,
) -> SolveResult:
    """
    Solve the problem with singular trace k by monotone iteration from k h1.

    Args:
        config: Solve configuration with k set
        model: Prebuilt nonlinearity (built from config when None)
        mesh: Prebuilt mesh (built from config when None)
        with_residual: Evaluate the operator residual on the interval

    Returns:
        SolveResult with the solution stored as k h1 plus a regular remainder

    Raises:
        IntegrabilityError: If (E) fails or f(k h1) delta^s is not integrable
        IterationError: If the iteration does not converge
    """
    if config.k is None:
        raise ConfigError("solve_k_problem needs k")
    model = model or build_model(config)
    mesh = mesh or build_mesh(config)
    s, k = config.s, float(config.k)
    kernels = KernelSet(mesh.domain.N, s)

    e_report = check_condition(model, s, Condition.E)
    if e_report.verdict != Verdict.CONVERGES:
        raise IntegrabilityError(
            f"Condition (E) is {e_report.verdict.value}: f(k h1) is not integrable against delta^s",
            tail_exponent=e_report.tail_exponent_of_integrand,
        )
    tech_ok = _tech_ok(model)

    base = k * h1_profile(s, mesh.delta)
    beta_src, beta = green_weight_exponent(kernels, mesh, np.asarray(eval_f(model, base)))
    operator = get_green_operator(kernels, mesh, beta)
    outcome = monotone_iteration(model, operator.weights, base, config.max_iters, config.tol, config.damping)

    solution = GridFunction(mesh, s, outcome.u - base, trace_coeff=k if k else None)
    summary = SolveSummary(
        k=k,
        iterations=outcome.iterations,
        converged=outcome.fixed_point_gap <= config.tol,
        sup_norm_history=outcome.history,
        L1_norm=solution.l1_norm(),
        clamped_count=outcome.clamped,
        monotonicity_violations=outcome.violations,
        fixed_point_gap=outcome.fixed_point_gap,
        source_exponent=beta_src,
        tech_ok=tech_ok,
    )
    if with_residual:
        summary.residual = residual_summary(mesh, s, solution, model)
    logger.info(
        f"Solved k-problem k={k} for {model.label}, s={s}: {outcome.iterations} iterations, "
        f"L1 {summary.L1_norm:.6g}"
    )
    return SolveResult(solution, summary)


def _optional_profile(model: NonlinearityModel, s: float) -> Optional[KOProfile]:
    try:
        return KOProfile.build(model, s)
    except FracBlowupError as e:
        logger.info(f"No Keller-Osserman profile for {model.label}: {str(e)}")
        return None


def check_g2(exterior: ExteriorData, profile: Optional[KOProfile]) -> Optional[bool]:
    """g <= psi(delta^s) near the boundary, i.e. phi(g) >= delta^s, on sample distances."""
    if exterior.is_zero:
        return True
    if profile is None:
        return None
    g = exterior(G2_SAMPLES)
    bound = profile.psi(G2_SAMPLES ** profile.s)
    return bool(np.all(g <= bound * (1.0 + 1e-9)))


def solve_g_problem(
    config: SolveConfig,
    model: Optional[NonlinearityModel] = None,
    mesh: Optional[GradedMesh] = None,
    with_residual: bool = True,
) -> SolveResult:
    """
    Solve with exterior data min(k, g) for k along the truncation ladder,
    stopping once the L1 norm changes by less than ladder_tol.

    Raises:
        DataInadmissibleError: If g is not integrable outside the domain
        IterationError: If an iteration does not converge
    """
    if config.g_spec is None:
        raise ConfigError("solve_g_problem needs g_spec")
    model = model or build_model(config)
    mesh = mesh or build_mesh(config)
    s = config.s
    kernels = KernelSet(mesh.domain.N, s)
    profile = _optional_profile(model, s)
    exterior = parse_exterior_spec(config.g_spec, s, profile.psi if profile else None)

    g_norm = exterior_l1_norm(exterior, mesh.domain.N)
    g2_ok = check_g2(exterior, profile)
    if g2_ok is False:
        logger.warning(f"Exterior data {exterior.label} violates phi(g) >= delta^s near the boundary")
    tech_ok = _tech_ok(model)

    ladder = [config.g_ladder[0]] if exterior.is_zero else list(config.g_ladder)
    history: List[Dict[str, float]] = []
    previous = None
    solution, outcome, beta_src, level = None, None, 0.0, ladder[0]
    for level in ladder:
        data = exterior.truncated(level)
        base = poisson_apply(kernels, mesh, data)
        beta_src, beta = green_weight_exponent(kernels, mesh, np.asarray(eval_f(model, np.maximum(base, 0.0))))
        operator = get_green_operator(kernels, mesh, beta)
        outcome = monotone_iteration(model, operator.weights, base, config.max_iters, config.tol, config.damping)
        solution = GridFunction(mesh, s, outcome.u, data)
        l1 = solution.l1_norm() if np.any(outcome.u) else 0.0
        history.append({"k": float(level), "L1": l1, "iterations": float(outcome.iterations)})
        logger.info(f"Truncation level {level}: L1 {l1:.6g} after {outcome.iterations} iterations")
        if previous is not None:
            change = abs(l1 - previous) / abs(l1) if l1 else 0.0
            if change < config.ladder_tol:
                break
        previous = l1

    summary = SolveSummary(
        truncation=float(level),
        iterations=outcome.iterations,
        converged=outcome.fixed_point_gap <= config.tol,
        sup_norm_history=outcome.history,
        L1_norm=history[-1]["L1"],
        clamped_count=outcome.clamped,
        monotonicity_violations=outcome.violations,
        fixed_point_gap=outcome.fixed_point_gap,
        source_exponent=beta_src,
        tech_ok=tech_ok,
        g2_ok=g2_ok,
        ladder=history,
    )
    if with_residual:
        summary.residual = residual_summary(mesh, s, solution, model)
    logger.info(f"Solved g-problem with {exterior.label} (|g|_L1 = {g_norm:.6g}) for {model.label}, s={s}")
    return SolveResult(solution, summary)


def build_supersolution(
    config: SolveConfig,
    model: Optional[NonlinearityModel] = None,
    mesh: Optional[GradedMesh] = None,
) -> SupersolutionSpec:
    """
    Build ubar = mu psi(delta^s) + lam xi on the interval and verify
    (-Delta)^s ubar + f(ubar) >= -1e-3 max(1, f(ubar)) at every admissible node.

    Raises:
        HypothesisViolationError: If the growth hypothesis or (L1) fails
        SupersolutionError: If the re-verification fails for both mu rules
    """
    model = model or build_model(config)
    mesh = mesh or build_mesh(config)
    s, delta0 = config.s, config.delta0
    if mesh.domain.kind != DomainKind.INTERVAL:
        raise ConfigError("The supersolution check needs the interval operator")
    envelope = estimate_growth_envelope(model)
    profile = KOProfile.build(model, s, envelope)
    l1 = check_L1(profile)
    if l1.verdict != Verdict.CONVERGES:
        raise HypothesisViolationError(
            f"(L1) is {l1.verdict.value}: psi(delta^s) is not integrable",
            tail_exponent=l1.tail_exponent_of_integrand,
        )
    if check_condition(model, s, Condition.E).verdict != Verdict.CONVERGES:
        logger.warning(f"(E) fails for {model.label}: the trace of the supersolution is not guaranteed")

    op = get_fraclap_operator(mesh, s)
    U = ko_grid_function(mesh, profile)
    C = supersolution_inequality_check(op, U, model, delta0).C_strip
    interior = op.admissible[mesh.delta[op.admissible] >= delta0]
    interior_sup = float(max(0.0, np.max(-op.apply_nodes(U, interior)))) if len(interior) else 0.0
    xi = torsion_profile(s, 1, mesh.delta)

    rules = [("M", envelope.M)]
    if envelope.m < envelope.M:
        rules.append(("m", envelope.m))
    report = None
    for rule, exponent in rules:
        mu = max(1.0, C ** (1.0 / exponent))
        lam = mu * interior_sup
        scaled = ko_grid_function(mesh, profile, scale=mu)
        ubar = GridFunction(mesh, s, scaled.values + lam * xi, scaled.exterior)
        report = supersolution_inequality_check(op, ubar, model, delta0, SUPERSOLUTION_TOL)
        if not report.violating_nodes:
            summary = SupersolutionSummary(
                mu=mu,
                lam=lam,
                C_measured=C,
                delta0=delta0,
                interior_sup=interior_sup,
                m=envelope.m,
                M=envelope.M,
                mu_rule=rule,
                min_residual=report.min_residual,
                min_scaled_residual=report.min_scaled_residual,
                n_checked=report.n_checked,
            )
            logger.info(f"Supersolution for {model.label}, s={s}: C={C:.6g}, mu={mu:.6g}, lambda={lam:.6g}")
            return SupersolutionSpec(summary, ubar, U)
        logger.warning(f"Supersolution check failed with mu from {rule} at {len(report.violating_nodes)} nodes")
    raise SupersolutionError(
        "Supersolution fails the global inequality check",
        violating_nodes=report.violating_nodes[:20],
        min_scaled_residual=report.min_scaled_residual,
    )


def _scaling_direction(model: NonlinearityModel) -> Optional[int]:
    """+1 if f(t)/t is nondecreasing, -1 if nonincreasing, None otherwise."""
    try:
        ratios = np.asarray(growth_ratio(model, np.geomspace(1e-3, 1e6, 64)))
    except FracBlowupError:
        return None
    if np.all(ratios >= 1.0):
        return 1
    if np.all(ratios <= 1.0):
        return -1
    return None


def _aitken(values: Sequence[float]) -> Optional[float]:
    if len(values) < 3:
        return None
    a, b, c = values[-3:]
    denom = c - 2.0 * b + a
    if denom == 0.0:
        return None
    return float(c - (c - b) ** 2 / denom)


def classify_sweep(
    k_list: Sequence[float],
    interior_means: Sequence[float],
    strip_mins: Sequence[float],
    l1_norms: Sequence[float],
) -> Tuple[SweepObservation, Optional[float]]:
    """Observed behaviour of u_k as k grows, and the last-step growth exponent."""
    if len(k_list) < 2:
        return SweepObservation.UNCLASSIFIED, None
    m_prev, m_last = interior_means[-2], interior_means[-1]
    growth = None
    if m_prev > 0 and m_last > 0:
        growth = float(np.log(m_last / m_prev) / np.log(k_list[-1] / k_list[-2]))
    increments = [
        (interior_means[j + 1] - interior_means[j]) / interior_means[j + 1]
        for j in range(len(k_list) - 1)
        if interior_means[j + 1] > 0
    ]
    shrinking = len(increments) < 2 or increments[-1] <= increments[-2]
    if growth is not None and growth < 0.5 and shrinking:
        return SweepObservation.STABILIZING, growth
    if growth is not None and growth >= 0.98 and strip_mins[0] > 0 and strip_mins[-1] >= 4.0 * strip_mins[0]:
        return SweepObservation.UNIFORM_BLOWUP, growth
    ratios = [l1_norms[j + 1] / l1_norms[j] for j in range(len(l1_norms) - 1) if l1_norms[j] > 0]
    if ratios and len(ratios) == len(l1_norms) - 1 and all(r >= 1.5 for r in ratios):
        return SweepObservation.L1_ESCAPE, growth
    return SweepObservation.UNCLASSIFIED, growth


def _optional_supersolution(config: SolveConfig, model: NonlinearityModel, mesh: GradedMesh) -> Optional[SupersolutionSpec]:
    if mesh.domain.kind != DomainKind.INTERVAL:
        return None
    try:
        return build_supersolution(config, model, mesh)
    except (HypothesisViolationError, SupersolutionError, InversionRangeError, DataInadmissibleError) as e:
        logger.info(f"No supersolution comparison: {str(e)}")
        return None


def sweep_k(
    config: SolveConfig,
    k_list: Sequence[float],
    model: Optional[NonlinearityModel] = None,
    mesh: Optional[GradedMesh] = None,
    with_supersolution: bool = True,
) -> SweepResult:
    """
    Solve the k-problem for each k, then check monotonicity in k, the
    sandwich 0 <= u_k <= k h1, the scaling in k and the supersolution bound,
    and classify the observed behaviour.

    Raises:
        ConfigError: If k_list is not ascending and positive
        DiscretizationError: If u_k decreases in k beyond 1e-3 relative
    """
    k_list = [float(k) for k in k_list]
    if not k_list or any(k <= 0 for k in k_list) or any(b <= a for a, b in zip(k_list, k_list[1:])):
        raise ConfigError("k_list must be ascending and positive", k_list=k_list)
    model = model or build_model(config)
    mesh = mesh or build_mesh(config)
    s = config.s
    predicted = predict_regime(model, s)
    logger.info(f"Sweeping k over {k_list} for {model.label}, s={s} (predicted {predicted.value})")

    def run(k: float) -> SolveResult:
        return solve_k_problem(config.model_copy(update={"k": k}), model, mesh, with_residual=False)

    results: Dict[float, SolveResult] = {}
    refusal = None
    with ThreadPoolExecutor(max_workers=settings.threads) as pool:
        futures = {k: pool.submit(run, k) for k in k_list}
        for k, future in futures.items():
            try:
                results[k] = future.result()
            except IntegrabilityError as e:
                refusal = str(e)

    if refusal is not None:
        summary = SweepSummary(
            s=s,
            model=model.label,
            k_list=k_list,
            regime_observed=SweepObservation.REFUSAL.value,
            regime_predicted=predicted.value,
            agree=_AGREEMENT.get(predicted) == SweepObservation.REFUSAL,
            refusal_reason=refusal,
        )
        logger.info(f"Sweep refused: {refusal}")
        return SweepResult(summary, results)

    totals = [results[k].solution.total() for k in k_list]
    h1 = h1_profile(s, mesh.delta)

    k_monotone = True
    for previous, current in zip(totals, totals[1:]):
        tolerance = 1e-8 + 1e-6 * np.maximum(1.0, np.abs(previous))
        drop = previous - current
        if np.any(drop > tolerance):
            k_monotone = False
            worst = float(np.max(drop / np.maximum(1.0, np.abs(previous))))
            logger.warning(f"u_k decreased in k at {int(np.count_nonzero(drop > tolerance))} nodes (worst {worst:.3e})")
            if worst > 1e-3:
                raise DiscretizationError("Comparison principle broken across k", worst_relative_drop=worst)

    sandwich_ok = all(
        bool(np.all(u >= -1e-8) and np.all(u <= k * h1 * (1.0 + 1e-8) + 1e-8)) for k, u in zip(k_list, totals)
    )

    direction = _scaling_direction(model)
    scaling_ok = None
    if direction is not None:
        scaling_ok = True
        for (k1, u1), (k2, u2) in zip(zip(k_list, totals), zip(k_list[1:], totals[1:])):
            bound = (k2 / k1) * u1
            slack = 1e-8 + 1e-6 * np.abs(bound)
            ok = np.all(u2 <= bound + slack) if direction > 0 else np.all(u2 >= bound - slack)
            scaling_ok = scaling_ok and bool(ok)

    supersolution = _optional_supersolution(config, model, mesh) if with_supersolution else None
    below = None
    if supersolution is not None:
        ubar = supersolution.ubar.total()
        below = all(bool(np.all(u <= ubar + 1e-8 + 1e-6 * np.abs(ubar))) for u in totals)

    interior = mesh.delta > INTERIOR_DELTA
    strip = strip_indices(mesh, STRIP_DELTA)
    interior_means = [float(np.mean(u[interior])) for u in totals]
    strip_mins = [float(np.min(u[strip])) for u in totals]
    l1_norms = [results[k].summary.L1_norm for k in k_list]
    l1_ratios = [b / a for a, b in zip(l1_norms, l1_norms[1:]) if a > 0]
    mass = h1_mass(s, mesh.domain.N)

    observed, growth = classify_sweep(k_list, interior_means, strip_mins, l1_norms)
    limit = _aitken(interior_means) if observed == SweepObservation.STABILIZING else None
    summary = SweepSummary(
        s=s,
        model=model.label,
        k_list=k_list,
        regime_observed=observed.value,
        regime_predicted=predicted.value,
        agree=_AGREEMENT.get(predicted) == observed,
        k_monotone=k_monotone,
        sandwich_ok=sandwich_ok,
        scaling_ok=scaling_ok,
        below_supersolution=below,
        l1_norms=l1_norms,
        l1_ratios=l1_ratios,
        l1_lower_bound_ratios=[l1 / (k * mass) for k, l1 in zip(k_list, l1_norms)],
        interior_means=interior_means,
        strip_mins=strip_mins,
        growth_exponent=growth,
        limit_estimate=limit,
        limit_is_extrapolated=limit is not None,
    )
    logger.info(f"Sweep observed {observed.value} (predicted {predicted.value}, growth {growth})")
    return SweepResult(summary, results, supersolution)
