"""Solvers for the main problem and for the localized absorption problem.

The main problem is driven down from the supersolution u = a by a shifted
monotone (Picard) iteration; each step minimizes a convex energy.  The
absorption problem is solved by minimizing the discrete J over the box
0 <= w <= delta.
"""
import logging
import math
import time

import numpy as np
from scipy.sparse import diags
from scipy.sparse.linalg import spsolve

from ..errors import ConvergenceFailure, InvalidArgument, InvalidConfiguration, NoSolutionRegime
from ..models.mesh import ScalarField
from ..models.problem import AuxiliarySpec
from ..models.reports import CertificateReport, ComparisonReport, SandwichReport
from ..models.solve import SolveConfig, SolveReport
from .mesh import (contains_point, edge_midpoint_values, interior_shrink, point_distance,
                   submesh_ball)
from .plap_core import (LUMPED, MIDPOINT, energy_terms, flux_action, hessian_J, lambda1_lower_rhs,
                        midpoint_load, phi_p_regularized, power_flux, raw_grad_J, reaction,
                        residual_main, residual_per_mass, tangent_matrix, weak_residual)
from .spectral import eps_threshold, weighted_first_eigenvalue

logger = logging.getLogger(__name__)

# eps_a warnings start at this fraction of the threshold
NEAR_THRESHOLD = 0.8
# shift raises per monotone step before giving up
SHIFT_RETRIES = 20


def _sup_per_mass(residual, mass):
    if len(residual) == 0:
        return 0.0
    return float(np.abs(residual / mass).max())


def acceptance_sigma(exponents, f, a_max, residual_tol):
    """Smoothing small enough that f - f_sigma stays a tenth below the residual tolerance"""
    if exponents.theta >= 1:
        return None
    return (residual_tol / (10.0 * f.C * a_max ** (exponents.q - 1))) ** (1.0 / exponents.theta)


def picard_shift(u, a, q, f, sigma):
    """Local slope max(-g'(u), 0) of g(u) = u^(q-1) f_sigma(a - u)"""
    u = np.maximum(np.asarray(u, dtype=float), 0.0)
    s = np.maximum(np.asarray(a, dtype=float) - u, 0.0)
    with np.errstate(divide='ignore', invalid='ignore'):
        decreasing = np.where(u > 0, u ** (q - 1) * f.smoothed_derivative(s, sigma), 0.0)
        growth = np.where(u > 0, (q - 1) * u ** (q - 2), 0.0) * f.smoothed(s, sigma)
    if not np.all(np.isfinite(decreasing)):
        raise InvalidConfiguration("sigma = 0 with theta < 1 has no finite shift; set an explicit shift")
    return np.maximum(decreasing - growth, 0.0)


class MonotonePicard:
    """Shifted monotone iteration on the free unknowns of a discrete problem

    With g the smoothed reaction every step solves

        eps A(w) + shift M (w - u_k) = M g(u_k)

    through problem.step(x, shift, growth, mu, tol), a convex minimization
    accurate to tol per unit mass.  From a supersolution u_k the step gives
    w <= u_k, and w is again a supersolution when the shift dominates the
    secant slope of -g between w and u_k.  The shift starts at the local
    slope and is raised where that fails.  An increase beyond the inner
    accuracy is an error.
    """

    def __init__(self, problem, cfg, report):
        self.problem = problem
        self.cfg = cfg
        self.report = report
        self.mass = problem.mass
        self.scale = max(float(problem.a_max), 1.0)

    def shift(self, x, sigma):
        if self.cfg.shift is not None:
            return np.full(len(x), float(self.cfg.shift))
        problem = self.problem
        return picard_shift(x, problem.a_free, problem.exponents.q, problem.f, sigma)

    def _step(self, x, sigma, mu, tol):
        problem = self.problem
        shift = self.shift(x, sigma)
        growth = problem.growth(x, sigma)
        for attempt in range(SHIFT_RETRIES + 1):
            x_new = problem.step(x, shift, growth, mu, tol)
            if self.cfg.shift is not None:
                return x_new, shift
            drop = x - x_new
            gain = problem.growth(x_new, sigma) - growth
            short = (gain - shift * drop > 10.0 * tol) & (drop > 0)
            if not short.any():
                return x_new, shift
            with np.errstate(divide='ignore', invalid='ignore'):
                secant = np.where(drop > 0, gain / drop, 0.0)
            shift = np.where(short, np.maximum(2.0 * shift, 1.5 * secant), shift)
            logger.debug(f"Raised the shift at {int(short.sum())} vertices (attempt {attempt + 1})")
        raise ConvergenceFailure(f"Shift stays below the secant slope at {int(short.sum())} vertices "
                                 f"after {SHIFT_RETRIES} raises", last_iterate=x)

    def run(self, x, sigma, mu, tol):
        """Iterate until the residual per unit mass is below tol; returns (x, iterations)"""
        problem, cfg, report = self.problem, self.cfg, self.report
        inner_tol = 0.01 * tol
        r_inf = math.inf
        for it in range(cfg.max_iter + 1):
            r_inf = _sup_per_mass(problem.residual(x, sigma, mu), self.mass)
            report.residual_history.append(r_inf)
            if r_inf <= tol:
                return x, it
            if it == cfg.max_iter:
                break
            x_new, shift = self._step(x, sigma, mu, inner_tol)
            increase = x_new - x
            allowance = 1e-12 * self.scale + 10.0 * inner_tol / (shift + problem.eps)
            rising = increase > allowance
            if rising.any():
                report.monotonicity_violations += int(rising.sum())
                raise ConvergenceFailure(f"Iterate increased by {float(increase.max()):.3e} at "
                                         f"{int(rising.sum())} vertices (sigma={sigma:.1e})", last_iterate=x)
            x = np.minimum(x_new, x)
            report.shift = float(shift.max())
            report.iterations += 1
            logger.debug(f"Picard iteration {it + 1}: residual {r_inf:.3e}, "
                         f"largest decrease {float(-increase.min()):.3e}")
        raise ConvergenceFailure(f"No convergence within {cfg.max_iter} iterations at sigma={sigma:.1e} "
                                 f"(residual {r_inf:.3e})", last_iterate=x)


def run_monotone(driver, x, stages):
    """Run the monotone iteration at the last (sigma, mu) of a continuation schedule

    A converged stage at larger sigma is a subsolution for smaller sigma when
    theta < 1, so the iteration restarts nowhere and runs once from x.  The
    stage converges to a tenth of the residual tolerance so the unsmoothed
    acceptance test has room.
    """
    sigma, mu = stages[-1]
    if len(stages) > 1:
        logger.debug(f"Monotone iteration skips {len(stages) - 1} coarser smoothing stages")
    x, iterations = driver.run(x, sigma, mu, 0.1 * driver.cfg.residual_tol)
    residual = driver.report.residual_history[-1]
    driver.report.stages.append({'sigma': sigma, 'mu': mu, 'iterations': iterations, 'residual': residual})
    logger.info(f"Stage sigma={sigma:.1e} mu={mu:.1e}: {iterations} iterations, residual {residual:.2e}")
    return x


class _MainProblem:
    """Weak residual of -eps Delta_p u = u^(q-1) f(a-u) on interior vertices, u = 0 on the boundary"""

    def __init__(self, spec, cfg):
        self.spec = spec
        self.cfg = cfg
        self.mesh = spec.mesh
        self.exponents = spec.exponents
        self.f = spec.f
        self.eps = spec.eps
        self.free = self.mesh.interior
        self.mass = self.mesh.lumped_mass[self.free]
        self.a_free = spec.a.values[self.free]
        self.a_max = spec.a.max()

    def field(self, x):
        values = np.zeros(self.mesh.n_vertices)
        values[self.free] = x
        return ScalarField(self.mesh, values)

    def residual(self, x, sigma, mu):
        spec = self.spec
        return weak_residual(self.field(x), spec.a, self.exponents, self.f, self.eps, mu, sigma)[self.free]

    def growth(self, x, sigma):
        return reaction(x, self.a_free, self.exponents.q, self.f, sigma)

    def step(self, x, shift, growth, mu, tol):
        u = self.field(x)
        problem = PicardStep(u, self.eps, self.exponents.p, mu, shift, growth)
        inner = SolveConfig(residual_tol=10.0 * tol, max_iter=self.cfg.max_iter, mu=mu)
        w, _ = minimize_energy(problem, u.values, inner, SolveReport(kind='picard-step'))
        return w.values[self.free]


def check_threshold(spec, cfg=None):
    """eps_a of the problem; refuses eps inside the guard band below it when p = q"""
    cfg = cfg or SolveConfig()
    exponents = spec.exponents
    if not exponents.homogeneous:
        return math.inf
    if spec.eps_a is None:
        lambda_fa = weighted_first_eigenvalue(spec.mesh, exponents.p, spec.f(spec.a.values))
        spec.eps_a = eps_threshold(exponents.p, exponents.p, lambda_fa)
    eps_a = spec.eps_a
    if spec.eps >= cfg.eps_guard * eps_a:
        logger.error(f"Refusing eps={spec.eps:.4g}: threshold eps_a={eps_a:.6g}")
        raise NoSolutionRegime(spec.eps, eps_a, cfg.eps_guard)
    if spec.eps >= NEAR_THRESHOLD * eps_a:
        logger.warning(f"eps={spec.eps:.4g} is within {100 * (1 - spec.eps / eps_a):.1f}% of eps_a={eps_a:.6g}")
    return eps_a


def solve_main(spec, cfg=None):
    """Maximal solution of the main problem, iterated down from u = a"""
    cfg = cfg or SolveConfig()
    started = time.perf_counter()
    check_threshold(spec, cfg)

    problem = _MainProblem(spec, cfg)
    exponents = spec.exponents
    report = SolveReport(kind='main')
    report.tau_c = cfg.coincidence_tolerance(problem.a_max)
    floor = acceptance_sigma(exponents, spec.f, problem.a_max, cfg.residual_tol)
    stages = cfg.stages(exponents.theta, exponents.p, floor=floor)
    upper = problem.a_free
    driver = MonotonePicard(problem, cfg, report)

    try:
        x = run_monotone(driver, upper.copy(), stages)
    except ConvergenceFailure as e:
        report.message = str(e)
        report.wall_time = time.perf_counter() - started
        logger.error(f"Main solve failed at eps={spec.eps:.4g}: {e}")
        last = upper if e.last_iterate is None else e.last_iterate
        if isinstance(last, ScalarField):
            last = last.values[problem.free]
        raise ConvergenceFailure(str(e), last_iterate=problem.field(last), report=report)

    u = problem.field(x)
    residual = residual_per_mass(residual_main(u, spec.a, exponents, spec.f, spec.eps))
    report.residual = float(np.abs(residual[problem.free]).max()) if len(problem.free) else 0.0
    report.wall_time = time.perf_counter() - started
    if report.residual > cfg.residual_tol:
        report.message = f"unsmoothed residual {report.residual:.3e} above {cfg.residual_tol:.1e}"
        logger.error(f"Main solve at eps={spec.eps:.4g} rejected: {report.message}")
        raise ConvergenceFailure(report.message, last_iterate=u, report=report)
    report.converged = True
    logger.info(f"Solved eps={spec.eps:.4g} theta={exponents.theta:g} p={exponents.p:g}: "
                f"{report.iterations} iterations, residual {report.residual:.2e}, "
                f"{report.wall_time:.2f}s")
    return u, report




class EnergyProblem:
    """Discrete J on a mesh with Dirichlet data, box constraints and an optional lumped source"""

    def __init__(self, a, spec, eps=1.0, boundary=0.0, lower=-np.inf, upper=np.inf,
                 source=None, quadrature=MIDPOINT):
        mesh = a.mesh
        n = mesh.n_vertices
        self.mesh = mesh
        self.a = a
        self.spec = spec
        self.eps = eps
        self.source = None if source is None else np.broadcast_to(np.asarray(source, dtype=float), (n,))
        self.quadrature = quadrature
        self.free = mesh.interior
        self.mass = mesh.lumped_mass[self.free]
        self.base = np.array(np.broadcast_to(np.asarray(boundary, dtype=float), (n,)))
        self.lower = np.broadcast_to(np.asarray(lower, dtype=float), (n,))[self.free]
        self.upper = np.broadcast_to(np.asarray(upper, dtype=float), (n,))[self.free]
        if np.any(self.lower > self.upper):
            raise InvalidArgument("Lower bound exceeds upper bound")

    def field(self, x):
        values = self.base.copy()
        values[self.free] = x
        return ScalarField(self.mesh, values)

    def energy(self, x, spec):
        return float(sum(energy_terms(self.field(x), self.a, spec, self.eps, self.source, self.quadrature)))

    def gradient(self, x, spec):
        return raw_grad_J(self.field(x), self.a, spec, self.eps, self.source, self.quadrature)[self.free]

    def hessian(self, x, spec):
        hess = hessian_J(self.field(x), self.a, spec, self.eps, self.quadrature)
        return hess.tocsr()[self.free][:, self.free]

    def stages(self, cfg):
        spec = self.spec
        return cfg.stages(spec.theta, spec.p, floor=spec.sigma or None)

    def stage_spec(self, sigma, mu):
        return self.spec.model_copy(update={'sigma': sigma, 'mu': mu})

    def measure(self, x, g):
        """Projected gradient per unit mass"""
        if len(x) == 0:
            return 0.0
        return float(np.abs(x - np.clip(x - g / self.mass, self.lower, self.upper)).max())


def _newton_direction(problem, x, g, spec):
    at_lower = (x <= problem.lower + 1e-15 * (1.0 + np.abs(problem.lower))) & (g > 0)
    at_upper = (x >= problem.upper - 1e-15 * (1.0 + np.abs(problem.upper))) & (g < 0)
    inactive = ~(at_lower | at_upper)
    d = np.zeros_like(x)
    if inactive.any():
        keep = np.flatnonzero(inactive)
        hess = problem.hessian(x, spec)[keep][:, keep]
        hess = hess + diags(1e-12 * problem.mass[inactive])
        d[inactive] = spsolve(hess.tocsc(), -g[inactive])
    if not np.all(np.isfinite(d)) or float(g @ d) >= 0:
        d = -g / problem.mass
        d[~inactive] = 0.0
    return d


def minimize_energy(problem, x0=None, cfg=None, report=None):
    """Projected Newton minimization of J over the box with smoothing continuation"""
    cfg = cfg or SolveConfig()
    report = report or SolveReport(kind='energy')
    started = time.perf_counter()
    x = np.zeros(len(problem.free)) if x0 is None else np.asarray(x0, dtype=float)[problem.free]
    x = np.clip(x, problem.lower, problem.upper)
    stages = problem.stages(cfg)

    for k, (sigma, mu) in enumerate(stages):
        stage_spec = problem.stage_spec(sigma, mu)
        tol = 0.1 * cfg.residual_tol if k == len(stages) - 1 else cfg.residual_tol
        energies = [problem.energy(x, stage_spec)]
        measure = math.inf
        for it in range(cfg.max_iter + 1):
            g = problem.gradient(x, stage_spec)
            measure = problem.measure(x, g)
            report.residual_history.append(measure)
            if measure <= tol:
                break
            if it == cfg.max_iter:
                report.message = f"optimality {measure:.3e} after {cfg.max_iter} iterations"
                logger.error(f"Energy minimization failed: {report.message}")
                raise ConvergenceFailure(report.message, last_iterate=problem.field(x), report=report)
            d = _newton_direction(problem, x, g, stage_spec)
            t = 1.0
            while t >= 2.0 ** -30:
                trial = np.clip(x + t * d, problem.lower, problem.upper)
                value = problem.energy(trial, stage_spec)
                if value <= energies[-1] + 1e-4 * min(float(g @ (trial - x)), 0.0):
                    break
                t *= 0.5
            else:
                if measure <= cfg.residual_tol:
                    # energy differences below roundoff
                    break
                report.message = f"line search failed at optimality {measure:.3e}, sigma={sigma:.1e}"
                logger.error(f"Energy minimization failed: {report.message}")
                raise ConvergenceFailure(report.message, last_iterate=problem.field(x), report=report)
            x = trial
            energies.append(value)
            report.iterations += 1
            logger.debug(f"Energy iteration {it + 1}: J={value:.10e}, optimality {measure:.3e}, t={t:g}")
        report.energy_history = energies
        report.stages.append({'sigma': sigma, 'mu': mu, 'iterations': len(energies) - 1,
                              'residual': measure, 'energy': energies[-1]})
        logger.debug(f"Stage sigma={sigma:.1e} mu={mu:.1e}: J={energies[-1]:.8e}, optimality {measure:.2e}")

    report.residual = report.residual_history[-1] if report.residual_history else 0.0
    report.converged = True
    report.wall_time = time.perf_counter() - started
    return problem.field(x), report


class PicardStep(EnergyProblem):
    """Convex energy of one shifted monotone step from u

        (eps/p) int (|grad w|^2 + mu^2)^(p/2) + sum_i m_i (shift_i (w_i - u_i)^2 / 2 - g_i w_i)

    over w >= 0 with w = 0 on the boundary.  Its minimizer solves
    eps A_mu(w) + shift M (w - u) = M g.
    """

    def __init__(self, u, eps, p, mu, shift, growth):
        super().__init__(ScalarField.constant(u.mesh, 0.0), None, eps=eps, lower=0.0)
        self.p = p
        self.mu = mu
        self.previous = u.values[self.free]
        self.shift = np.asarray(shift, dtype=float)
        self.growth = np.asarray(growth, dtype=float)

    def stages(self, cfg):
        return [(0.0, self.mu)]

    def stage_spec(self, sigma, mu):
        return mu

    def energy(self, x, mu):
        g = self.field(x).gradients()
        base = np.sum(g * g, axis=1) + mu * mu
        diffusion = self.eps / self.p * float((self.mesh.areas * (base ** (self.p / 2) - mu ** self.p)).sum())
        d = x - self.previous
        return diffusion + float(np.dot(self.mass, 0.5 * self.shift * d * d - self.growth * d))

    def gradient(self, x, mu):
        w = self.field(x)
        flux = self.eps * flux_action(self.mesh, power_flux(w.gradients(), self.p, mu))[self.free]
        return flux + self.mass * (self.shift * (x - self.previous) - self.growth)

    def hessian(self, x, mu):
        stiffness = tangent_matrix(self.mesh, self.field(x).gradients(), self.p, mu, scale=self.eps)
        return stiffness.tocsr()[self.free][:, self.free] + diags(self.mass * self.shift)


def solve_auxiliary(spec, a_tilde, cfg=None, eps=1.0, quadrature=MIDPOINT):
    """Minimizer of J with w = delta on the boundary and 0 <= w <= delta"""
    if not isinstance(spec, AuxiliarySpec):
        raise InvalidArgument("solve_auxiliary expects an AuxiliarySpec")
    cfg = cfg or SolveConfig()
    problem = EnergyProblem(a_tilde, spec, eps=eps, boundary=spec.delta, lower=0.0,
                            upper=spec.delta, quadrature=quadrature)
    report = SolveReport(kind='auxiliary')
    report.tau_c = cfg.coincidence_tolerance(spec.delta)
    w, report = minimize_energy(problem, np.full(a_tilde.mesh.n_vertices, spec.delta), cfg, report)
    logger.info(f"Auxiliary solve delta={spec.delta:.3g} theta={spec.theta:g}: "
                f"{report.iterations} iterations, min w {w.min():.3e}")
    return w, report


def local_coefficient(mesh, params, x0, eps=None):
    """a~(y) = a(x0 + eps^(1/p) y) sampled on the scaled mesh"""
    eps = params.eps if eps is None else eps
    scale = eps ** (1.0 / params.p)
    x0 = np.asarray(x0, dtype=float)
    return ScalarField.from_function(
        mesh, lambda y1, y2: params.coefficient(x0[0] + scale * y1, x0[1] + scale * y2))


def radial_profile(z):
    """Ring averages of a field on a centered disk mesh as (radii in [0, 1], values)"""
    mesh = z.mesh
    r = np.round(np.hypot(mesh.vertices[:, 0], mesh.vertices[:, 1]), 12)
    levels, inverse = np.unique(r, return_inverse=True)
    values = np.bincount(inverse, weights=z.values) / np.bincount(inverse)
    if values[0] <= 0:
        raise InvalidArgument("Eigenfunction profile must be positive at the center")
    return levels / levels[-1], np.minimum.accumulate(values / values[0])


def build_eigen_subsolution(spec, x0, K, delta, eigenpair):
    """(a(x0) - delta) z((x - x0) / (K eps^(1/p))) inside the ball, 0 outside"""
    p, q = spec.exponents.p, spec.exponents.q
    x0 = np.asarray(x0, dtype=float)
    radius = K * spec.eps ** (1.0 / p)
    a0 = spec.a_at(x0)
    if not 0 < delta < a0:
        raise InvalidArgument(f"delta must lie in (0, a(x0)) = (0, {a0:.4g}), got {delta}")
    if not contains_point(spec.mesh, x0) or point_distance(spec.mesh, x0) < radius * (1 - 1e-12):
        raise InvalidArgument(f"Ball of radius {radius:.4g} around {tuple(x0)} is not contained in the domain")
    needed = eigenpair.lambda1 * spec.a.max() ** (p - q) / float(spec.f(delta / 2.0))
    if K ** p <= needed:
        raise InvalidArgument(f"K^p = {K ** p:.4g} must exceed lambda1 |a|^(p-q) / f(delta/2) = {needed:.4g}")

    levels, profile = radial_profile(eigenpair.z)
    rho = np.sqrt(((spec.mesh.vertices - x0) ** 2).sum(axis=1)) / radius
    values = np.where(rho <= 1.0, (a0 - delta) * np.interp(rho, levels, profile), 0.0)
    return ScalarField(spec.mesh, values)


def _certificate(kind, u, spec, tol, interior_ok_fn, boundary_ok):
    residual = residual_per_mass(residual_main(u, spec.a, spec.exponents, spec.f, spec.eps))
    inner = residual[spec.mesh.interior]
    ok = interior_ok_fn(inner)
    report = CertificateReport(
        kind=kind,
        passed=bool(ok.all() and boundary_ok),
        interior_ok=bool(ok.all()),
        boundary_ok=bool(boundary_ok),
        max_residual=float(inner.max()) if len(inner) else 0.0,
        min_residual=float(inner.min()) if len(inner) else 0.0,
        n_violations=int((~ok).sum()),
        tol=tol,
    )
    if not report.passed:
        logger.info(f"{kind} certificate failed at {report.n_violations} vertices "
                    f"(residual range [{report.min_residual:.3e}, {report.max_residual:.3e}])")
    return report


def check_supersolution(u, spec, tol=1e-8):
    """Weak residual per unit mass >= -tol at every interior vertex, u >= 0 on the boundary"""
    boundary_ok = bool((u.values[spec.mesh.boundary] >= -tol).all())
    return _certificate('supersolution', u, spec, tol, lambda r: r >= -tol, boundary_ok)


def check_subsolution(u, spec, tol=1e-8):
    """Weak residual per unit mass <= tol at every interior vertex, u <= 0 on the boundary"""
    boundary_ok = bool((u.values[spec.mesh.boundary] <= tol).all())
    return _certificate('subsolution', u, spec, tol, lambda r: r <= tol, boundary_ok)


def comparison_operator(w, g, a, eps, p=2.0, mu=0.0, quadrature=MIDPOINT):
    """Vertex loads of -eps div Phi_p(grad w, grad a) + g(w)"""
    mesh = w.mesh
    loads = eps * flux_action(mesh, phi_p_regularized(w.gradients(), a.gradients(), p, mu))
    if quadrature == LUMPED:
        return loads + mesh.lumped_mass * g(w.values)
    return loads + midpoint_load(mesh, g(edge_midpoint_values(w)))


def comparison_check(u, v, g, a, eps, p=2.0, mu=0.0, quadrature=MIDPOINT, residual_tol=1e-8):
    """u <= v from u <= v on the boundary and R(u) <= R(v) at interior vertices

    R is the operator of comparison_operator with monotone g.  When either
    hypothesis fails the result is inconclusive (holds is None).
    """
    if not (u.same_mesh(v) and u.same_mesh(a)):
        raise InvalidArgument("Fields live on different meshes")
    mesh = u.mesh
    boundary = mesh.boundary
    boundary_ok = bool((u.values[boundary] <= v.values[boundary] + 1e-8).all())
    r_u = comparison_operator(u, g, a, eps, p, mu, quadrature)
    r_v = comparison_operator(v, g, a, eps, p, mu, quadrature)
    interior = mesh.interior
    excess = (r_u - r_v)[interior] / mesh.lumped_mass[interior]
    residual_ok = bool((excess <= residual_tol).all())
    max_excess = float((u.values - v.values).max())
    if not (boundary_ok and residual_ok):
        reason = 'boundary ordering fails' if not boundary_ok else \
            f'residual ordering fails by {float(excess.max()):.3e} per unit mass'
        return ComparisonReport(holds=None, certified=False, boundary_ok=boundary_ok,
                                residual_ok=residual_ok, max_excess=max_excess, reason=reason)
    return ComparisonReport(holds=max_excess <= 1e-8, certified=True, boundary_ok=True,
                            residual_ok=True, max_excess=max_excess)


def local_comparison(u, spec, x0, delta, cfg=None):
    """Compare v = a - u with the absorption solution w on B(x0, eps^(1/p))

    w minimizes J with vertex quadrature and weight Lambda_1 / (1 + theta), so it
    solves -eps div Phi_p(grad w, grad a) + Lambda_1 w^theta = 0, the equation
    v is a subsolution of wherever v <= delta.
    """
    cfg = cfg or SolveConfig()
    exponents = spec.exponents
    p, theta = exponents.p, exponents.theta
    d = 0.5 * spec.a.min()
    if not 0 < delta < d:
        raise InvalidArgument(f"delta must lie in (0, min a / 2) = (0, {d:.4g}), got {delta}")
    sub, parent = submesh_ball(spec.mesh, x0, spec.eps ** (1.0 / p))
    if len(sub.interior) == 0:
        raise InvalidArgument("Ball contains no interior vertex; refine the mesh")
    v = ScalarField(sub, (spec.a.values - u.values)[parent])
    a_sub = ScalarField(sub, spec.a.values[parent])

    lambda1 = lambda1_lower_rhs(d, spec.f.C, exponents.q)
    aux = AuxiliarySpec(delta=delta, Lambda=lambda1 / (1.0 + theta), exponents=exponents,
                        sigma=cfg.sigma_min, mu=cfg.resolved_mu(p))
    w, _ = solve_auxiliary(aux, a_sub, cfg, eps=spec.eps, quadrature=LUMPED)

    def g(s):
        return lambda1 * np.maximum(s, 0.0) ** theta

    report = comparison_check(v, w, g, a_sub, spec.eps, p, mu=0.0, quadrature=LUMPED,
                              residual_tol=2.0 * cfg.residual_tol)
    logger.info(f"Local comparison at {tuple(np.round(x0, 6))}: holds={report.holds} "
                f"(max v - w {report.max_excess:.3e})")
    return report


def check_sandwich(u, a, delta, K, eps, p):
    """a - delta <= u <= a + 1e-8 on the interior region at distance K eps^(1/p)"""
    kappa = K * eps ** (1.0 / p)
    mask = interior_shrink(u.mesh, kappa).mask
    gap = a.values - u.values
    lower = float((gap - delta)[mask].max()) if mask.any() else 0.0
    upper = float((-gap - 1e-8)[mask].max()) if mask.any() else 0.0
    return SandwichReport(passed=bool(lower <= 0 and upper <= 0), kappa=kappa, n_checked=int(mask.sum()),
                          max_lower_violation=max(lower, 0.0), max_upper_violation=max(upper, 0.0))


def fit_sandwich_K(u, a, delta, eps, p):
    """Smallest K with a - delta <= u on the region at distance K eps^(1/p)"""
    far = (a.values - u.values) > delta
    if not far.any():
        return 0.0
    return float(u.mesh.distances()[far].max() / eps ** (1.0 / p))


def translated_residual(v, a, exponents, f, eps):
    """Weak residual of -eps div Phi_p(grad v, grad a) + (a-v)^(q-1) f(v), i.e. minus that of u = a - v"""
    u = a.with_values(a.values - v.values)
    return ScalarField(v.mesh, -weak_residual(u, a, exponents, f, eps))
