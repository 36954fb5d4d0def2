"""Algebraic kernel of the p-Laplacian problems.

Vector fields act on the last axis, so every function accepts a single
vector of shape (N,) as well as stacks of shape (..., N).  Discrete
operators use P1 elements with one constant gradient per triangle; vertex
reaction terms use the lumped mass, the absorption integral of J uses the
edge-midpoint rule of the mesh module.
"""
import logging
from collections import namedtuple
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import coo_matrix, diags

from ..errors import GuardViolation, InvalidArgument, InvalidConfiguration
from ..models.mesh import ScalarField
from .mesh import edge_midpoint_values, midpoint_quadrature

logger = logging.getLogger(__name__)

EnergyTerms = namedtuple('EnergyTerms', ['diffusion', 'linear', 'absorption'])

MIDPOINT = 'midpoint'
LUMPED = 'lumped'


def power_flux(v, p, mu=0.0):
    """(|v|^2 + mu^2)^((p-2)/2) v, with the zero-base term defined as 0"""
    v = np.asarray(v, dtype=float)
    base = np.sum(v * v, axis=-1, keepdims=True) + mu * mu
    with np.errstate(divide='ignore', invalid='ignore'):
        coef = np.where(base > 0, base ** ((p - 2) / 2), 0.0)
    return coef * v


def phi_p_regularized(eta, xi, p, mu):
    if mu < 0:
        raise InvalidArgument("mu must be non-negative")
    eta = np.asarray(eta, dtype=float)
    xi = np.asarray(xi, dtype=float)
    return power_flux(eta - xi, p, mu) + power_flux(xi, p, mu)


def phi_p(eta, xi, p):
    """Phi_p(eta, xi) = |eta - xi|^(p-2) (eta - xi) + |xi|^(p-2) xi"""
    return phi_p_regularized(eta, xi, p, 0.0)


def lemma_constants(p):
    c = 2.0 ** (2.0 - p)
    return min(p - 1.0, c), max(p - 1.0, c)


@dataclass
class LemmaReport:
    p: float
    n_samples: int
    lhs: dict = field(default_factory=dict)
    rhs: dict = field(default_factory=dict)
    failures: dict = field(default_factory=dict)
    guard_violations: dict = field(default_factory=dict)
    passed: bool = True

    def guard_errors(self):
        return [GuardViolation(name, count) for name, count in self.guard_violations.items() if count]

    def to_dict(self):
        return {
            'p': self.p,
            'n_samples': self.n_samples,
            'failures': dict(self.failures),
            'guard_violations': dict(self.guard_violations),
            'passed': self.passed,
        }


def _norm(v):
    return np.sqrt(np.sum(v * v, axis=-1))


def check_lemma_order(eta, eta_prime, xi, p, slack=1e-10, lower_scale=1.0):
    """Evaluate the four order inequalities for Phi_p on (stacks of) vectors

    ge:   Phi(eta, xi).eta >= c_min (|eta-xi| + |xi|)^(p-2) |eta|^2
    le:   |Phi(eta, xi)| <= c_max (|eta-xi| + |xi|)^(p-2) |eta|
    sage: (Phi(eta, xi) - Phi(eta', xi)).(eta - eta') >= c_min (|eta-xi| + |eta'-xi|)^(p-2) |eta-eta'|^2
    sale: |Phi(eta, xi) - Phi(eta', xi)| <= c_max (|eta-xi| + |eta'-xi|)^(p-2) |eta-eta'|

    Samples violating a guard are skipped for that inequality and counted.
    `lower_scale` multiplies c_min; it exists to self-test the harness.
    """
    eta = np.atleast_2d(np.asarray(eta, dtype=float))
    eta_prime = np.atleast_2d(np.asarray(eta_prime, dtype=float))
    xi = np.atleast_2d(np.asarray(xi, dtype=float))
    c_min, c_max = lemma_constants(p)
    c_min *= lower_scale

    phi = phi_p(eta, xi, p)
    phi_prime = phi_p(eta_prime, xi, p)
    diff = eta - eta_prime

    s1 = _norm(eta - xi) + _norm(xi)
    s2 = _norm(eta - xi) + _norm(eta_prime - xi)
    guard1 = s1 > 0
    guard2 = s2 > 0
    with np.errstate(divide='ignore', invalid='ignore'):
        w1 = np.where(guard1, s1, 1.0) ** (p - 2)
        w2 = np.where(guard2, s2, 1.0) ** (p - 2)

    sides = {
        'ge': (np.sum(phi * eta, axis=-1), c_min * w1 * _norm(eta) ** 2, guard1, 1),
        'le': (_norm(phi), c_max * w1 * _norm(eta), guard1, -1),
        'sage': (np.sum((phi - phi_prime) * diff, axis=-1), c_min * w2 * _norm(diff) ** 2, guard2, 1),
        'sale': (_norm(phi - phi_prime), c_max * w2 * _norm(diff), guard2, -1),
    }
    report = LemmaReport(p=float(p), n_samples=len(eta))
    for name, (lhs, rhs, guard, direction) in sides.items():
        tol = slack * np.maximum(np.abs(lhs), np.abs(rhs))
        if direction > 0:
            holds = lhs >= rhs - tol
        else:
            holds = lhs <= rhs + tol
        report.lhs[name] = lhs
        report.rhs[name] = rhs
        report.failures[name] = int((~holds & guard).sum())
        report.guard_violations[name] = int((~guard).sum())
    report.passed = not any(report.failures.values())
    if not report.passed:
        logger.warning(f"Order inequalities fail at p={p}: {report.failures}")
    return report


def lambda1_lower_rhs(d, C, q):
    """Lambda_1 = d^(q-1) C, lower bound of (a-s)^(q-1) f(s) / s^theta on [0, delta]"""
    if d <= 0 or C <= 0 or q <= 1:
        raise InvalidArgument(f"need d > 0, C > 0, q > 1 (got d={d}, C={C}, q={q})")
    return d ** (q - 1) * C


def check_same_mesh(*fields):
    mesh = fields[0].mesh
    for other in fields[1:]:
        if other.mesh is not mesh:
            raise InvalidArgument("Fields live on different meshes")
    return mesh


def flux_action(mesh, flux):
    """Vector sum_T |T| flux_T . grad(phi_i) for every vertex i"""
    local = mesh.areas[:, None] * np.einsum('td,tid->ti', flux, mesh.grad_lambda)
    return np.bincount(mesh.triangles.ravel(), weights=local.ravel(), minlength=mesh.n_vertices)


def tangent_matrix(mesh, e, p, mu, scale=1.0):
    """Sparse matrix of sum_T |T| grad(phi_i)^T D(e_T) grad(phi_j), D the derivative of power_flux"""
    base = np.sum(e * e, axis=1) + mu * mu
    if p == 2:
        coef, ratio = np.ones_like(base), np.zeros_like(base)
    else:
        with np.errstate(divide='ignore', invalid='ignore'):
            coef = np.where(base > 0, base ** ((p - 2) / 2), 0.0)
            ratio = np.where(base > 0, (p - 2) / base, 0.0)
    d = coef[:, None, None] * (np.eye(2)[None] + ratio[:, None, None] * np.einsum('ta,tb->tab', e, e))
    g = mesh.grad_lambda
    local = scale * mesh.areas[:, None, None] * np.einsum('tia,tab,tjb->tij', g, d, g)
    rows = np.repeat(mesh.triangles, 3, axis=1).ravel()
    cols = np.tile(mesh.triangles, (1, 3)).ravel()
    n = mesh.n_vertices
    return coo_matrix((local.ravel(), (rows, cols)), shape=(n, n)).tocsr()


def absorption_terms(s, theta, sigma, order=0):
    """A(s) = (sqrt(s^2 + sigma^2) - sigma)^(1+theta) and its first two derivatives"""
    s = np.asarray(s, dtype=float)
    r = np.sqrt(s * s + sigma * sigma)
    b = np.maximum(r - sigma, 0.0)
    if order == 0:
        return b ** (1 + theta)
    with np.errstate(divide='ignore', invalid='ignore'):
        db = np.where(r > 0, s / r, 0.0)
        if order == 1:
            return (1 + theta) * b ** theta * db
        ddb = np.where(r > 0, sigma * sigma / r ** 3, 0.0)
        first = np.where(b > 0, theta * b ** (theta - 1) * db * db, 0.0)
        if theta == 1:
            first = np.where(r > 0, db * db, 1.0 if sigma == 0 else 0.0)
        return (1 + theta) * (first + b ** theta * ddb)


def energy_terms(w, a, spec, eps, source=None, quadrature=MIDPOINT):
    """Diffusion, linear and absorption parts of J (source enters the linear part)"""
    mesh = check_same_mesh(w, a)
    p, theta, mu = spec.p, spec.theta, spec.resolved_mu()
    gw, ga = w.gradients(), a.gradients()
    e = gw - ga
    base = np.sum(e * e, axis=1) + mu * mu
    diffusion = eps / p * float((mesh.areas * (base ** (p / 2) - mu ** p)).sum())
    linear = eps * float((mesh.areas * np.sum(power_flux(ga, p, mu) * gw, axis=1)).sum())
    if source is not None:
        linear -= float(np.dot(mesh.lumped_mass * source, w.values))
    absorption = spec.Lambda * absorption_energy(w, theta, spec.sigma, quadrature)
    return EnergyTerms(diffusion, linear, absorption)


def energy_J(w, a, spec, eps):
    """J(w) = (eps/p) int |grad w - grad a|^p + eps int grad_p a . grad w + Lambda int A_sigma(w)"""
    return float(sum(energy_terms(w, a, spec, eps)))


def diffusion_gradient(w, a, p, eps, mu=0.0):
    """eps <Phi_p^mu(grad w, grad a), grad phi_i> at every vertex"""
    mesh = check_same_mesh(w, a)
    return eps * flux_action(mesh, phi_p_regularized(w.gradients(), a.gradients(), p, mu))


def absorption_energy(w, theta, sigma, quadrature=MIDPOINT):
    """Discrete int A_sigma(w) by the edge-midpoint rule or by vertex masses"""
    if quadrature == LUMPED:
        return float(np.dot(w.mesh.lumped_mass, absorption_terms(w.values, theta, sigma)))
    return midpoint_quadrature(w.mesh, absorption_terms(edge_midpoint_values(w), theta, sigma))


def midpoint_load(mesh, slopes):
    """Vertex loads sum_T |T|/3 sum_e g(m_e) phi_i(m_e) from per-midpoint values g(m_e)"""
    local = (mesh.areas / 3.0)[:, None] * 0.5 * (slopes + np.roll(slopes, 1, axis=1))
    return np.bincount(mesh.triangles.ravel(), weights=local.ravel(), minlength=mesh.n_vertices)


def absorption_gradient(w, theta, sigma, quadrature=MIDPOINT):
    mesh = w.mesh
    if quadrature == LUMPED:
        return mesh.lumped_mass * absorption_terms(w.values, theta, sigma, order=1)
    slopes = absorption_terms(edge_midpoint_values(w), theta, sigma, order=1)
    return midpoint_load(mesh, slopes)


def absorption_hessian(w, theta, sigma, quadrature=MIDPOINT):
    mesh = w.mesh
    if quadrature == LUMPED:
        return diags(mesh.lumped_mass * absorption_terms(w.values, theta, sigma, order=2)).tocsr()
    curv = absorption_terms(edge_midpoint_values(w), theta, sigma, order=2)
    weight = (mesh.areas / 3.0)[:, None] * 0.25 * curv
    tri = mesh.triangles
    ends = (tri, np.roll(tri, -1, axis=1))
    rows = np.concatenate([ends[0], ends[1], ends[0], ends[1]], axis=1).ravel()
    cols = np.concatenate([ends[0], ends[1], ends[1], ends[0]], axis=1).ravel()
    values = np.concatenate([weight] * 4, axis=1).ravel()
    n = mesh.n_vertices
    return coo_matrix((values, (rows, cols)), shape=(n, n)).tocsr()


def raw_grad_J(w, a, spec, eps, source=None, quadrature=MIDPOINT):
    """Gradient of the discrete J including fixed vertices"""
    if spec.theta < 1 and spec.sigma == 0:
        raise InvalidConfiguration("sigma = 0 with theta < 1 leaves J non-differentiable at w = 0")
    grad = diffusion_gradient(w, a, spec.p, eps, spec.resolved_mu())
    grad += spec.Lambda * absorption_gradient(w, spec.theta, spec.sigma, quadrature)
    if source is not None:
        grad -= w.mesh.lumped_mass * source
    return grad


def grad_J(w, a, spec, eps):
    """Per-vertex gradient of the smoothed discrete J, zero on Dirichlet vertices"""
    grad = raw_grad_J(w, a, spec, eps)
    grad[w.mesh.boundary_vertex_flags] = 0.0
    return ScalarField(w.mesh, grad)


def hessian_J(w, a, spec, eps, quadrature=MIDPOINT):
    mesh = check_same_mesh(w, a)
    e = w.gradients() - a.gradients()
    hess = tangent_matrix(mesh, e, spec.p, spec.resolved_mu(), scale=eps)
    return hess + spec.Lambda * absorption_hessian(w, spec.theta, spec.sigma, quadrature)


def reaction(u, a, q, f, sigma=0.0):
    """u^(q-1) f_sigma(a - u) with u clipped at 0"""
    u_pos = np.maximum(u, 0.0)
    return u_pos ** (q - 1) * f.smoothed(a - u, sigma)


def weak_residual(u, a, exponents, f, eps, mu=0.0, sigma=0.0):
    """eps <grad_p u, grad phi_i> - <u^(q-1) f(a-u), phi_i> (lumped), zero on the boundary"""
    mesh = check_same_mesh(u, a)
    res = eps * flux_action(mesh, power_flux(u.gradients(), exponents.p, mu))
    res -= mesh.lumped_mass * reaction(u.values, a.values, exponents.q, f, sigma)
    res[mesh.boundary_vertex_flags] = 0.0
    return res


def residual_main(u, a, exponents, f, eps):
    """Weak residual of the main problem at interior vertices"""
    return ScalarField(u.mesh, weak_residual(u, a, exponents, f, eps))


def residual_per_mass(residual):
    """Pointwise residual r_i / m_i of a vertex residual field"""
    return residual.values / residual.mesh.lumped_mass
