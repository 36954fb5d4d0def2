"""Fine-grid interval solver used as a reference for the planar pipeline.

The scheme is the one-dimensional restriction of the planar one: fluxes at
half points, lumped reaction at the nodes, the same smoothing level and the
same shifted monotone iteration, with tridiagonal linear algebra for the
convex steps.
"""
import logging
import time

import numpy as np
from scipy.linalg import solve_banded

from ..errors import ConvergenceFailure, InvalidArgument
from ..models.problem import Oracle1DSpec, ProblemParams, ProblemSpec
from ..models.reports import CrossCheckReport, Oracle1DResult
from ..models.solve import SolveConfig, SolveReport
from .deadcore import fit_scaling
from .mesh import build_rect_mesh
from .plap_core import power_flux, reaction
from .solver import MonotonePicard, acceptance_sigma, run_monotone, solve_main

logger = logging.getLogger(__name__)


def _flux_slope(g, p, mu):
    """d/dg of (g^2 + mu^2)^((p-2)/2) g"""
    if p == 2:
        return np.ones_like(g)
    base = g * g + mu * mu
    with np.errstate(divide='ignore', invalid='ignore'):
        return np.where(base > 0, base ** ((p - 4) / 2) * ((p - 1) * g * g + mu * mu), 0.0)


class _IntervalProblem:

    def __init__(self, spec, cfg):
        self.spec = spec
        self.cfg = cfg
        self.exponents = spec.exponents
        self.f = spec.nonlinearity
        self.eps = spec.eps
        self.x = np.linspace(0.0, spec.length, spec.n + 1)
        self.h = spec.length / spec.n
        self.a = spec.coefficient(self.x)
        self.a_free = self.a[1:-1]
        self.mass = np.full(spec.n - 1, self.h)
        self.a_max = float(self.a.max())

    def full(self, x):
        u = np.zeros(len(self.x))
        u[1:-1] = x
        return u

    def _diffusion(self, x, mu):
        flux = power_flux((np.diff(self.full(x)) / self.h)[:, None], self.exponents.p, mu)[:, 0]
        return self.eps * (flux[:-1] - flux[1:])

    def residual(self, x, sigma, mu):
        return self._diffusion(x, mu) - self.h * self.growth(x, sigma)

    def growth(self, x, sigma):
        return reaction(x, self.a_free, self.exponents.q, self.f, sigma)

    def _step_energy(self, w, previous, shift, growth, mu):
        p = self.exponents.p
        g = np.diff(self.full(w)) / self.h
        diffusion = self.eps * self.h / p * float(((g * g + mu * mu) ** (p / 2) - mu ** p).sum())
        d = w - previous
        return diffusion + self.h * float(np.sum(0.5 * shift * d * d - growth * d))

    def _step_bands(self, w, shift, mu):
        s = self.eps / self.h * _flux_slope(np.diff(self.full(w)) / self.h, self.exponents.p, mu)
        bands = np.zeros((3, len(w)))
        bands[0, 1:] = -s[1:-1]
        bands[1] = s[:-1] + s[1:] + self.h * shift
        bands[2, :-1] = -s[1:-1]
        return bands

    def step(self, x, shift, growth, mu, tol):
        """Newton minimization of the convex shifted step energy started at x"""
        w = x.copy()
        value = self._step_energy(w, x, shift, growth, mu)
        for _ in range(self.cfg.max_iter):
            grad = self._diffusion(w, mu) + self.h * (shift * (w - x) - growth)
            optimality = float(np.abs(grad).max()) / self.h
            if optimality <= tol:
                return w
            d = solve_banded((1, 1), self._step_bands(w, shift, mu), -grad)
            slope = float(grad @ d)
            t = 1.0
            while t >= 2.0 ** -30:
                trial = w + t * d
                trial_value = self._step_energy(trial, x, shift, growth, mu)
                if trial_value <= value + 1e-4 * t * min(slope, 0.0):
                    break
                t *= 0.5
            else:
                if optimality <= 10.0 * tol:
                    # energy differences below roundoff
                    return w
                raise ConvergenceFailure(f"Interval step line search failed at optimality {optimality:.3e}",
                                         last_iterate=x)
            w, value = trial, trial_value
        raise ConvergenceFailure(f"Interval step did not converge within {self.cfg.max_iter} iterations",
                                 last_iterate=x)


def _flat_core(x, gap, tau_c):
    mask = gap <= tau_c
    padded = np.concatenate([[0], mask.astype(np.int8), [0]])
    edges = np.flatnonzero(np.diff(padded))
    starts, ends = edges[::2], edges[1::2]
    if len(starts) == 0:
        return None, 0
    k = int(np.argmax(ends - starts))
    return (float(x[starts[k]]), float(x[ends[k] - 1])), len(starts)


def solve_1d(spec, cfg=None):
    """Solution on [0, length] with u = 0 at both ends and its flat core"""
    if not isinstance(spec, Oracle1DSpec):
        raise InvalidArgument("solve_1d expects an Oracle1DSpec")
    cfg = cfg or SolveConfig()
    started = time.perf_counter()
    problem = _IntervalProblem(spec, cfg)
    exponents = spec.exponents
    report = SolveReport(kind='oracle-1d')
    report.tau_c = cfg.coincidence_tolerance(problem.a_max)
    stages = cfg.stages(exponents.theta, exponents.p,
                        floor=acceptance_sigma(exponents, problem.f, problem.a_max, cfg.residual_tol))
    driver = MonotonePicard(problem, cfg, report)

    try:
        x = run_monotone(driver, problem.a_free.copy(), stages)
    except ConvergenceFailure as e:
        report.message = str(e)
        logger.error(f"Interval solve failed at eps={spec.eps:.4g}: {e}")
        raise ConvergenceFailure(str(e), last_iterate=e.last_iterate, report=report)

    report.residual = float(np.abs(problem.residual(x, 0.0, 0.0) / problem.mass).max())
    report.wall_time = time.perf_counter() - started
    if report.residual > cfg.residual_tol:
        report.message = f"unsmoothed residual {report.residual:.3e} above {cfg.residual_tol:.1e}"
        logger.error(f"Interval solve at eps={spec.eps:.4g} rejected: {report.message}")
        raise ConvergenceFailure(report.message, last_iterate=x, report=report)
    report.converged = True

    u = problem.full(x)
    flat_core, n_components = _flat_core(problem.x, problem.a - u, report.tau_c)
    if n_components > 1:
        logger.warning(f"Flat core splits into {n_components} intervals at eps={spec.eps:.4g}")
    logger.info(f"Interval solve n={spec.n} eps={spec.eps:.4g} theta={spec.theta:g}: flat core {flat_core}")
    return Oracle1DResult(x=problem.x, u=u, a=problem.a, flat_core=flat_core,
                          n_components=n_components, tau_c=report.tau_c, report=report)


def richardson_gap(spec, cfg=None):
    """max |u_n - u_2n| on the nodes of the coarser grid"""
    coarse = solve_1d(spec, cfg)
    fine = solve_1d(spec.updated(n=2 * spec.n), cfg)
    return float(np.abs(coarse.u - fine.u[::2]).max())


def layer_width_1d(u, a, x, tau_c):
    """Largest distance to an endpoint at which a - u still exceeds tau_c"""
    x = np.asarray(x, dtype=float)
    outside = (np.asarray(a) - np.asarray(u)) > tau_c
    if not outside.any():
        return 0.0
    distance = np.minimum(x - x[0], x[-1] - x)
    return float(distance[outside].max())


def layer_sweep_1d(spec, eps_list, cfg=None):
    """Layer widths over eps and their log-log fit"""
    samples = []
    for eps in eps_list:
        result = solve_1d(spec.updated(eps=eps), cfg)
        samples.append((eps, layer_width_1d(result.u, result.a, result.x, result.tau_c)))
    return samples, fit_scaling(samples, spec.length / spec.n)


def cross_check_2d(aspect, params=None, nx=32, cfg=None, n_1d=10000):
    """Mid-line trace of a solve on [0, 1] x [0, aspect] against the interval solution"""
    if aspect < 1:
        raise InvalidArgument(f"aspect must be at least 1, got {aspect}")
    params = params or ProblemParams()
    oracle_spec = Oracle1DSpec.from_params(params, length=1.0, n=n_1d)
    ny = int(round(aspect * nx))
    mesh = build_rect_mesh(1.0, aspect, nx, ny)
    spec = ProblemSpec(mesh, params)
    u, report = solve_main(spec, cfg)
    oracle = solve_1d(oracle_spec, cfg)

    y_mid = (ny // 2) * aspect / ny
    row = np.flatnonzero(np.abs(mesh.vertices[:, 1] - y_mid) <= 1e-12 * aspect)
    row = row[np.argsort(mesh.vertices[row, 0])]
    xs = mesh.vertices[row, 0]
    deviation = np.abs(u.values[row] - np.interp(xs, oracle.x, oracle.u))
    central = (xs >= 0.25) & (xs <= 0.75)
    core_2d = (spec.a.values[row] - u.values[row]) <= report.tau_c
    core_1d = np.interp(xs, oracle.x, oracle.gap) <= oracle.tau_c
    result = CrossCheckReport(
        aspect=float(aspect),
        max_deviation=float(deviation[central].max()),
        max_deviation_full=float(deviation.max()),
        core_agreement=float(np.mean(core_1d[central] == core_2d[central])),
        core_1d=bool(core_1d[central].any()),
        core_2d=bool(core_2d[central].any()),
    )
    logger.info(f"Cross-check aspect {aspect:g}: deviation {result.max_deviation:.3e}, "
                f"core agreement {result.core_agreement:.3f}")
    return result
