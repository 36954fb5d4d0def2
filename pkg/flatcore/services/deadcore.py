import logging
import math
from functools import singledispatch

import numpy as np
from scipy.stats import linregress

from ..errors import FlatcoreError, InsufficientData, InvalidArgument, OutOfRegime
from ..models.mesh import ScalarField
from ..models.reports import (CoincidenceReport, EnergyProfile, ExponentPack, HarnackReport,
                              ScalingFit)
from ..models.solve import SolveConfig
from .mesh import diameter, edge_midpoint_values, interior_shrink
from .plap_core import check_same_mesh, phi_p
from .solver import solve_main

logger = logging.getLogger(__name__)

NONEMPTY = 'nonempty'
EMPTY = 'empty'
FAILED = 'failed'

ROW_FIELDS = ('theta', 'p', 'q', 'eps', 'measure', 'W', 'min_interior_gap', 'classification')


def detect_coincidence(u, a, tau_c):
    """Vertices with a - u <= tau_c, their lumped measure and the layer width"""
    mesh = check_same_mesh(u, a)
    if tau_c < 0:
        raise InvalidArgument("tau_c must be non-negative")
    gap = a.values - u.values
    mask = gap <= tau_c
    outside = ~mask
    width = float(mesh.distances()[outside].max()) if outside.any() else 0.0
    interior = mesh.interior
    return CoincidenceReport(
        tau_c=float(tau_c),
        gap=gap,
        mask=mask,
        measure=float(mesh.lumped_mass[mask].sum()),
        width=width,
        min_interior_gap=float(gap[interior].min()) if len(interior) else math.inf,
        domain_area=mesh.area,
        mesh=mesh,
    )


def dead_core_report(w, tau_c):
    """Coincidence report of the zero set {w <= tau_c} of an absorption solution"""
    return detect_coincidence(ScalarField.constant(w.mesh, 0.0), w, tau_c)


def classify(report):
    """'empty' when no vertex coincides and a - u > tau_c on the region at distance diam/10"""
    if report.measure > 0:
        return NONEMPTY
    mask = interior_shrink(report.mesh, 0.1 * diameter(report.mesh)).mask
    inner = report.gap[mask]
    if len(inner) and inner.min() <= report.tau_c:
        return NONEMPTY
    return EMPTY


def _pack(theta, N, p=None):
    if int(N) != N or N < 2:
        raise InvalidArgument(f"N must be an integer >= 2, got {N}")
    if theta <= 0:
        raise InvalidArgument(f"theta must be positive, got {theta}")
    p_star = None if p is None else p / (p - 1.0)
    ps = 2.0 if p_star is None else p_star
    k = 1.0 / (1.0 + theta) - 1.0 / (2.0 if p is None else p)
    nk = N * k
    return ExponentPack(
        theta=float(theta),
        N=int(N),
        gamma=k / (nk + 1.0),
        tau=ps * nk + ps,
        alpha=nk + 1.0,
        beta=(nk + 1.0 - 1.0 / ps) / (nk + 1.0),
        p=None if p is None else float(p),
        p_star=p_star,
    )


def exponents_nondegenerate(theta, N):
    """gamma, tau, alpha, beta of the energy method for variable a (0 < theta < 1)"""
    if theta >= 1:
        raise OutOfRegime(f"theta={theta} >= 1: no dead core for variable a")
    return _pack(theta, N)


def exponents_degenerate(theta, N, p):
    """Exponents for constant a, valid for 0 < theta < p - 1"""
    if p <= 1:
        raise InvalidArgument(f"p must exceed 1, got {p}")
    if theta >= p - 1:
        raise OutOfRegime(f"theta={theta} >= p-1={p - 1:g}: no dead core for constant a")
    return _pack(theta, N, p)


def energy_profile(w, a_tilde, spec, n_rho=50):
    """E_D, E_A and E_T over balls B_rho centred at the origin, rho in (0, 1]

    Triangles enter B_rho when their barycenter does; rho is measured
    relative to the outermost vertex of the mesh.
    """
    mesh = check_same_mesh(w, a_tilde)
    if n_rho < 1:
        raise InvalidArgument("n_rho must be positive")
    gw = w.gradients()
    density = np.sum(phi_p(gw, a_tilde.gradients(), spec.p) * gw, axis=1)
    diffusion = mesh.areas * np.maximum(density, 0.0)
    absorption = mesh.areas / 3.0 * (np.abs(edge_midpoint_values(w)) ** (1 + spec.theta)).sum(axis=1)

    outer = float(np.sqrt((mesh.vertices ** 2).sum(axis=1)).max())
    radius = np.sqrt((mesh.barycenters ** 2).sum(axis=1)) / outer
    order = np.argsort(radius, kind='stable')
    rho = np.linspace(1.0 / n_rho, 1.0, n_rho)
    counts = np.searchsorted(radius[order], rho * (1 + 1e-12), side='right')
    e_d = np.concatenate([[0.0], np.cumsum(diffusion[order])])[counts]
    e_a = np.concatenate([[0.0], np.cumsum(absorption[order])])[counts]
    return EnergyProfile(rho=rho, diffusion=e_d, absorption=e_a, total=e_d + spec.Lambda * e_a,
                         n_triangles=counts, Lambda=spec.Lambda)


def total_energy_bound(profile, spec, area, rel_tol=1e-3):
    """(E_T(1), Lambda delta^(1+theta) |B_1|, whether the first stays below the second)"""
    value = float(profile.total[-1])
    bound = spec.total_energy_bound(area)
    return value, bound, value <= bound * (1.0 + rel_tol)


@singledispatch
def deadcore_radius(source, tol=None):
    """Empirical dead-core radius in scaled coordinates"""
    raise InvalidArgument(f"Cannot measure a dead core from {type(source).__name__}")


@deadcore_radius.register
def _(profile: EnergyProfile, tol=None):
    tol = 0.0 if tol is None else tol
    valid = (profile.n_triangles > 0) & (profile.total <= tol)
    if not valid.any():
        return 0.0
    return float(profile.rho[valid].max())


@deadcore_radius.register
def _(report: CoincidenceReport, tol=None):
    tol = report.tau_c if tol is None else tol
    outside = report.gap > tol
    if not outside.any():
        return 1.0
    vertices = report.mesh.vertices
    radius = np.sqrt((vertices ** 2).sum(axis=1))
    return float(np.clip(radius[outside].min() / radius.max(), 0.0, 1.0))


def predicted_radius(delta, M, theta, gamma, tau):
    """(1 - M delta^((1+theta) gamma))^(1/tau)"""
    x = M * delta ** ((1 + theta) * gamma)
    if not 0 <= x < 1:
        raise OutOfRegime(f"M delta^((1+theta) gamma) = {x:.4g} is not below 1: no predicted core")
    return (1.0 - x) ** (1.0 / tau)


def fit_M(samples, theta, gamma, tau, envelope=False):
    """Least-squares M of 1 - r^tau = M delta^((1+theta) gamma) over (delta, r) samples

    With envelope=True the smallest M for which every sample radius is at
    least the predicted radius.
    """
    pairs = [(d, r) for d, r in samples if d > 0]
    if not pairs:
        raise InsufficientData("fit_M needs at least one sample with delta > 0")
    x = np.array([d ** ((1 + theta) * gamma) for d, _ in pairs])
    y = np.array([1.0 - min(max(r, 0.0), 1.0) ** tau for _, r in pairs])
    if envelope:
        return float((y / x).max())
    return float(np.dot(x, y) / np.dot(x, x))


def layer_constant(W, eps, p):
    """L with W = L eps^(1/p)"""
    return W / eps ** (1.0 / p)


def fit_scaling(samples, spacing=0.0):
    """Log-log fit of layer width against eps over samples resolved by the mesh"""
    samples = [(float(e), float(w)) for e, w in samples]
    used = [(e, w) for e, w in samples if e > 0 and w > 2.0 * spacing]
    if len(used) < 4:
        raise InsufficientData(f"{len(used)} resolved samples (need 4 with W > {2 * spacing:.3g})")
    log_eps = np.log([e for e, _ in used])
    span = (log_eps.max() - log_eps.min()) / math.log(10.0)
    if span < 1.5:
        raise InsufficientData(f"samples span {span:.2f} decades of eps (need 1.5)")
    fit = linregress(log_eps, np.log([w for _, w in used]))
    result = ScalingFit(samples=samples, used=used, slope=float(fit.slope),
                        intercept=float(fit.intercept), r_squared=float(fit.rvalue ** 2))
    logger.info(f"Scaling fit over {len(used)} samples: slope {result.slope:.4f}, R^2 {result.r_squared:.4f}")
    return result


def coincidence_row(spec, u, report):
    """Experiment row of a solved cell"""
    coincidence = detect_coincidence(u, spec.a, report.tau_c)
    exponents = spec.exponents
    return {
        'theta': exponents.theta, 'p': exponents.p, 'q': exponents.q, 'eps': spec.eps,
        'measure': coincidence.measure, 'W': coincidence.width,
        'min_interior_gap': coincidence.min_interior_gap,
        'classification': classify(coincidence),
    }


def solve_cell(spec, cfg=None):
    """Solve one (eps, theta) cell; failures become rows marked failed"""
    try:
        u, report = solve_main(spec, cfg)
    except FlatcoreError as e:
        logger.error(f"Cell theta={spec.exponents.theta:g} eps={spec.eps:.4g} failed: {e}")
        exponents = spec.exponents
        return {'theta': exponents.theta, 'p': exponents.p, 'q': exponents.q, 'eps': spec.eps,
                'measure': math.nan, 'W': math.nan, 'min_interior_gap': math.nan,
                'classification': FAILED, 'error': str(e)}
    return coincidence_row(spec, u, report)


def dichotomy_experiment(template, theta_list, eps, cfg=None, map_fn=map):
    """One classification row per theta at fixed eps"""
    cfg = cfg or SolveConfig()
    specs = [template.updated(theta=theta, eps=eps) for theta in theta_list]
    rows = list(map_fn(lambda spec: solve_cell(spec, cfg), specs))
    for row in rows:
        logger.info(f"theta={row['theta']:g}: {row['classification']} (measure {row['measure']:.4g})")
    return rows


def scaling_experiment(template, eps_list, cfg=None, map_fn=map):
    """Solve over eps_list and fit the layer width; returns (rows, ScalingFit)"""
    cfg = cfg or SolveConfig()
    specs = [template.updated(eps=eps) for eps in eps_list]
    rows = list(map_fn(lambda spec: solve_cell(spec, cfg), specs))
    samples = [(row['eps'], row['W']) for row in rows if row['classification'] == NONEMPTY]
    return rows, fit_scaling(samples, template.mesh.spacing)


def onset_eps(rows):
    """Largest eps up to which every cell of the sweep has a nonempty coincidence set"""
    onset = None
    for row in sorted(rows, key=lambda r: r['eps']):
        if row['classification'] != NONEMPTY:
            break
        onset = row['eps']
    return onset


def harnack_positivity_check(v, kappa, tau_c=1e-6):
    """min of v over the region at distance kappa from the boundary, compared with tau_c"""
    if v.values.min() < -tau_c:
        raise InvalidArgument(f"v must be at least -tau_c = {-tau_c:.3g}, got min {v.values.min():.3e}")
    mask = interior_shrink(v.mesh, kappa).mask
    min_value = float(v.values[mask].min()) if mask.any() else math.inf
    return HarnackReport(kappa=float(kappa), min_value=min_value, tau_c=float(tau_c),
                         n_vertices=int(mask.sum()), passed=bool(min_value > tau_c))


def ordering_stability(solutions, tol=1e-6):
    """Largest u_eps2 - u_eps1 over pairs eps1 < eps2 of (eps, field) solutions

    Smaller eps is expected to give the larger solution; excesses above tol
    are logged, not raised.
    """
    ordered = sorted(solutions, key=lambda pair: pair[0])
    excess = -math.inf
    for (eps1, u1), (eps2, u2) in zip(ordered, ordered[1:]):
        check_same_mesh(u1, u2)
        gap = float((u2.values - u1.values).max())
        if gap > tol:
            logger.warning(f"Ordering fails between eps={eps1:.4g} and eps={eps2:.4g}: excess {gap:.3e}")
        excess = max(excess, gap)
    return excess, bool(excess <= tol)
