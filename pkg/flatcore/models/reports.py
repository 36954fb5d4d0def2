from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np


@dataclass
class EigenResult:
    lambda1: float
    z: object
    rayleigh_history: List[float] = field(default_factory=list)
    residual: float = 0.0
    p: float = 2.0

    def to_dict(self):
        return {
            'p': self.p,
            'lambda1': self.lambda1,
            'residual': self.residual,
            'iterations': len(self.rayleigh_history),
        }


@dataclass
class CoincidenceReport:
    tau_c: float
    gap: np.ndarray
    mask: np.ndarray
    measure: float
    width: float
    min_interior_gap: float
    domain_area: float
    mesh: object = None

    @property
    def empty(self):
        return self.measure == 0.0

    def to_dict(self):
        return {
            'tau_c': self.tau_c,
            'n_coincident': int(self.mask.sum()),
            'measure': self.measure,
            'relative_measure': self.measure / self.domain_area,
            'width': self.width,
            'min_interior_gap': self.min_interior_gap,
        }


@dataclass(frozen=True)
class ExponentPack:
    theta: float
    N: int
    gamma: float
    tau: float
    alpha: float
    beta: float
    p: Optional[float] = None
    p_star: Optional[float] = None

    @property
    def degenerate(self):
        return self.p is not None

    def identity_errors(self):
        """Residuals of tau = 1 + p* alpha beta and gamma = p* (1-beta) k, p* = 2 off the degenerate mode"""
        p = 2.0 if self.p is None else self.p
        p_star = 2.0 if self.p_star is None else self.p_star
        k = 1.0 / (1.0 + self.theta) - 1.0 / p
        return (abs(self.tau - (1.0 + p_star * self.alpha * self.beta)),
                abs(self.gamma - p_star * (1.0 - self.beta) * k))

    def to_dict(self):
        return {
            'theta': self.theta, 'N': self.N, 'p': self.p, 'p_star': self.p_star,
            'gamma': self.gamma, 'tau': self.tau, 'alpha': self.alpha, 'beta': self.beta,
        }


@dataclass
class EnergyProfile:
    rho: np.ndarray
    diffusion: np.ndarray
    absorption: np.ndarray
    total: np.ndarray
    n_triangles: np.ndarray
    Lambda: float

    def to_rows(self):
        return [(float(r), float(d), float(a), float(t))
                for r, d, a, t in zip(self.rho, self.diffusion, self.absorption, self.total)]


@dataclass
class ScalingFit:
    samples: list
    used: list
    slope: float
    intercept: float
    r_squared: float

    @property
    def prefactor(self):
        return float(np.exp(self.intercept))

    def to_dict(self):
        return {
            'n_samples': len(self.samples),
            'n_used': len(self.used),
            'slope': self.slope,
            'intercept': self.intercept,
            'r_squared': self.r_squared,
        }


@dataclass
class CertificateReport:
    kind: str
    passed: bool
    interior_ok: bool
    boundary_ok: bool
    max_residual: float
    min_residual: float
    n_violations: int
    tol: float

    def to_dict(self):
        return dict(self.__dict__)


@dataclass
class ComparisonReport:
    holds: Optional[bool]
    certified: bool
    boundary_ok: bool
    residual_ok: bool
    max_excess: float
    reason: str = ''

    @property
    def inconclusive(self):
        return self.holds is None

    def to_dict(self):
        return dict(self.__dict__)


@dataclass
class SandwichReport:
    passed: bool
    kappa: float
    n_checked: int
    max_lower_violation: float
    max_upper_violation: float

    def to_dict(self):
        return dict(self.__dict__)


@dataclass
class HarnackReport:
    kappa: float
    min_value: float
    tau_c: float
    n_vertices: int
    passed: bool

    def to_dict(self):
        return dict(self.__dict__)


@dataclass
class Oracle1DResult:
    x: np.ndarray
    u: np.ndarray
    a: np.ndarray
    flat_core: Optional[tuple]
    n_components: int
    tau_c: float
    report: object = None

    @property
    def gap(self):
        return self.a - self.u

    def to_dict(self):
        left, right = self.flat_core if self.flat_core else (None, None)
        return {
            'n': len(self.x) - 1,
            'flat_core_left': left,
            'flat_core_right': right,
            'n_components': self.n_components,
            'tau_c': self.tau_c,
        }


@dataclass
class CrossCheckReport:
    aspect: float
    max_deviation: float
    max_deviation_full: float
    core_agreement: float
    core_1d: bool
    core_2d: bool

    def to_dict(self):
        return dict(self.__dict__)


@dataclass
class SuiteResult:
    name: str
    passed: bool
    checks: int
    failures: int
    details: dict = field(default_factory=dict)

    def to_dict(self):
        return {'suite': self.name, 'passed': self.passed,
                'checks': self.checks, 'failures': self.failures}
