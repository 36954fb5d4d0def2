import logging
import math

import numpy as np
from scipy.linalg import eigh
from scipy.optimize import minimize
from scipy.sparse import diags
from scipy.sparse.linalg import ArpackNoConvergence, eigsh

from ..errors import ConvergenceFailure, InvalidArgument
from ..models.mesh import ScalarField
from ..models.reports import EigenResult
from .plap_core import flux_action, power_flux, tangent_matrix

logger = logging.getLogger(__name__)

# relative Euler-Lagrange residual accepted for a computed eigenpair
RESIDUAL_TOL = 1e-4
RESTARTS = 5


def stiffness_matrix(mesh):
    return tangent_matrix(mesh, np.zeros((mesh.n_triangles, 2)), 2.0, 0.0)


def rayleigh_quotient(z, p, mass=None):
    """int |grad z|^p / sum_i m_i |z_i|^p"""
    mesh = z.mesh
    mass = mesh.lumped_mass if mass is None else mass
    g = z.gradients()
    numerator = float((mesh.areas * np.sum(g * g, axis=1) ** (p / 2)).sum())
    denominator = float((mass * np.abs(z.values) ** p).sum())
    return numerator / denominator


def _linear_eigenvector(mesh, mass, free):
    k = stiffness_matrix(mesh)[free][:, free]
    m = mass[free]
    if len(free) < 16:
        _, vectors = eigh(k.toarray(), np.diag(m), subset_by_index=[0, 0])
        return vectors[:, 0]
    try:
        _, vectors = eigsh(k, k=1, M=diags(m), sigma=0.0, which='LM', v0=np.ones(len(free)))
    except ArpackNoConvergence as e:
        raise ConvergenceFailure(f"Linear eigen solve did not converge: {e}")
    return vectors[:, 0]


def _minimize_rayleigh(mesh, p, mass, free, z0, tol, max_iter):
    history = []

    def objective(x):
        z = np.zeros(mesh.n_vertices)
        z[free] = x
        g = np.einsum('ti,tid->td', z[mesh.triangles], mesh.grad_lambda)
        numerator = float((mesh.areas * np.sum(g * g, axis=1) ** (p / 2)).sum())
        denominator = float((mass[free] * x ** p).sum())
        quotient = numerator / denominator
        d_num = p * flux_action(mesh, power_flux(g, p))[free]
        d_den = p * mass[free] * x ** (p - 1)
        return quotient, (d_num - quotient * d_den) / denominator

    x = z0[free].copy()
    converged = False
    for _ in range(RESTARTS):
        x /= x.max()
        result = minimize(objective, x, jac=True, method='L-BFGS-B',
                          bounds=[(0.0, None)] * len(x),
                          callback=lambda xk: history.append(objective(xk)[0]),
                          options={'maxiter': max_iter, 'ftol': 1e-15, 'gtol': tol})
        converged = bool(result.success) or abs(result.fun - objective(x)[0]) <= tol * result.fun
        x = result.x
        if converged:
            break
    if not np.isfinite(result.fun):
        raise ConvergenceFailure(f"Rayleigh minimization diverged at p={p}")
    z = np.zeros(mesh.n_vertices)
    z[free] = x
    return z, history, converged


def _first_eigenpair(mesh, p, mass, tol=1e-10, max_iter=5000, residual_tol=RESIDUAL_TOL):
    if p <= 1:
        raise InvalidArgument(f"p must exceed 1, got {p}")
    free = mesh.interior
    vector = _linear_eigenvector(mesh, mass, free)
    if vector.sum() < 0:
        vector = -vector
    z = np.zeros(mesh.n_vertices)
    z[free] = np.maximum(vector, 0.0)
    history = []
    converged = True
    if p != 2:
        z, history, converged = _minimize_rayleigh(mesh, p, mass, free, z, tol, max_iter)
    z = np.maximum(z, 0.0)
    z /= z.max()
    field = ScalarField(mesh, z)
    lam = rayleigh_quotient(field, p, mass)
    history.append(lam)

    g = field.gradients()
    euler = p * flux_action(mesh, power_flux(g, p))[free] - lam * p * mass[free] * z[free] ** (p - 1)
    residual = float(np.abs(euler).max() / (lam * p * (mass[free] * z[free] ** (p - 1)).max()))
    result = EigenResult(lambda1=lam, z=field, rayleigh_history=history, residual=residual, p=p)
    if not converged or residual > residual_tol:
        reason = "restarts exhausted" if not converged else f"residual {residual:.3e} above {residual_tol:.1e}"
        logger.error(f"First eigenpair p={p} did not converge: {reason} (lambda1={lam:.8g})")
        raise ConvergenceFailure(f"Eigen solve at p={p} did not converge: {reason}", last_iterate=field,
                                 report=result)
    logger.info(f"First eigenpair p={p}: lambda1={lam:.8g} (residual {residual:.2e})")
    return result


def first_eigenpair(mesh, p, tol=1e-10, max_iter=5000, residual_tol=RESIDUAL_TOL):
    """Minimizer of int |grad z|^p / int |z|^p, normalized to max z = 1"""
    return _first_eigenpair(mesh, p, mesh.lumped_mass, tol, max_iter, residual_tol)


def weighted_first_eigenvalue(mesh, p, weight, tol=1e-10, max_iter=5000, residual_tol=RESIDUAL_TOL):
    """inf int |grad u|^p / int weight |u|^p over the discrete space"""
    values = weight.values if isinstance(weight, ScalarField) else np.asarray(weight, dtype=float)
    if np.any(values <= 0):
        raise InvalidArgument("Weight must be positive on the domain")
    return _first_eigenpair(mesh, p, mesh.lumped_mass * values, tol, max_iter, residual_tol).lambda1


def eps_threshold(p, q, lambda_fa):
    """eps_a = inf when p > q and 1 / lambda_f(a) when p = q"""
    if p < q:
        raise InvalidArgument(f"eps_a is defined for p >= q (got p={p}, q={q})")
    if p > q:
        return math.inf
    if math.isinf(lambda_fa):
        return 0.0
    return 1.0 / lambda_fa
