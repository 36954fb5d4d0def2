import math
from typing import Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from ..errors import InvalidArgument
from .mesh import ScalarField


def default_mu(p):
    """Gradient regularization used when none is configured"""
    return 1e-8 if p >= 2 else 1e-6


class Exponents(BaseModel):
    model_config = ConfigDict(frozen=True)

    p: float = Field(2.0, gt=1)
    q: float = Field(2.0, gt=1)
    theta: float = Field(0.5, gt=0)

    @model_validator(mode='after')
    def check_order(self):
        if self.q > self.p:
            raise ValueError(f"q={self.q} must not exceed p={self.p}")
        return self

    @property
    def p_star(self):
        return self.p / (self.p - 1.0)

    @property
    def homogeneous(self):
        """p = q, the case with a finite existence threshold"""
        return math.isclose(self.p, self.q, rel_tol=0.0, abs_tol=1e-12)


class Nonlinearity(BaseModel):
    """Power law f(s) = C |s|^(theta-1) s"""
    model_config = ConfigDict(frozen=True)

    theta: float = Field(0.5, gt=0)
    C: float = Field(1.0, gt=0)

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        return self.C * np.sign(s) * np.abs(s) ** self.theta

    def smoothed(self, s, sigma):
        """C (s^2 + sigma^2)^((theta-1)/2) s; equal to f when theta >= 1 or sigma = 0"""
        s = np.asarray(s, dtype=float)
        if self.theta >= 1 or sigma == 0:
            return self(s)
        return self.C * (s * s + sigma * sigma) ** ((self.theta - 1) / 2) * s

    def smoothed_derivative(self, s, sigma):
        s = np.asarray(s, dtype=float)
        if self.theta >= 1:
            return self.C * self.theta * np.abs(s) ** (self.theta - 1)
        if sigma == 0:
            with np.errstate(divide='ignore'):
                return self.C * self.theta * np.abs(s) ** (self.theta - 1)
        r2 = s * s + sigma * sigma
        return self.C * r2 ** ((self.theta - 3) / 2) * (sigma * sigma + self.theta * s * s)

    def derivative_bound(self, s_max, sigma):
        """Bound of |f_sigma'| on [0, s_max]"""
        if self.theta >= 1:
            return self.C * self.theta * s_max ** (self.theta - 1)
        if sigma == 0:
            return math.inf
        return self.C * sigma ** (self.theta - 1)


class AuxiliarySpec(BaseModel):
    """Data of the localized absorption problem with boundary value delta"""
    model_config = ConfigDict(frozen=True)

    delta: float = Field(1e-3, gt=0, lt=1)
    Lambda: float = Field(1.0, gt=0)
    exponents: Exponents = Exponents()
    sigma: float = Field(1e-6, ge=0)
    mu: Optional[float] = Field(None, ge=0)

    @property
    def theta(self):
        return self.exponents.theta

    @property
    def p(self):
        return self.exponents.p

    def resolved_mu(self):
        return default_mu(self.p) if self.mu is None else self.mu

    def total_energy_bound(self, area):
        """Lambda delta^(1+theta) |B|"""
        return self.Lambda * self.delta ** (1 + self.theta) * area


class ProblemParams(BaseModel):
    """Scalar parameters of the main problem; a(x) = a0 + slope . x"""
    model_config = ConfigDict(frozen=True, extra='forbid')

    a0: float = Field(1.0, gt=0)
    slope: Tuple[float, float] = (0.1, 0.0)
    p: float = Field(2.0, gt=1)
    q: float = Field(2.0, gt=1)
    theta: float = Field(0.5, gt=0)
    C: float = Field(1.0, gt=0)
    eps: float = Field(1e-3, gt=0)
    degenerate: bool = False

    @model_validator(mode='before')
    @classmethod
    def constant_coefficient(cls, data):
        if isinstance(data, dict) and data.get('degenerate') in (True, 'true', 'True', '1', 'yes'):
            data = dict(data, slope=(0.0, 0.0))
        return data

    @model_validator(mode='after')
    def check_regime(self):
        if self.q > self.p:
            raise ValueError(f"q={self.q} must not exceed p={self.p}")
        if not self.degenerate and math.hypot(*self.slope) == 0:
            raise ValueError("slope must be nonzero unless degenerate mode is selected")
        return self

    @property
    def exponents(self):
        return Exponents(p=self.p, q=self.q, theta=self.theta)

    @property
    def nonlinearity(self):
        return Nonlinearity(theta=self.theta, C=self.C)

    def coefficient(self, x, y):
        return self.a0 + self.slope[0] * np.asarray(x) + self.slope[1] * np.asarray(y)

    def updated(self, **changes):
        return ProblemParams(**{**self.model_dump(), **changes})


class ProblemSpec:
    """Main problem on a concrete mesh: coefficient field, exponents and eps"""

    def __init__(self, mesh, params, eps_a=None):
        self.mesh = mesh
        self.params = params
        self.a = ScalarField.from_function(mesh, params.coefficient)
        if self.a.min() <= 0:
            raise InvalidArgument(f"Coefficient a must be positive on the domain (min {self.a.min():.3g})")
        # threshold eps_a when already known, avoids a second eigen solve
        self.eps_a = eps_a

    @property
    def exponents(self):
        return self.params.exponents

    @property
    def f(self):
        return self.params.nonlinearity

    @property
    def eps(self):
        return self.params.eps

    @property
    def degenerate(self):
        return self.params.degenerate

    @property
    def slope(self):
        return np.asarray(self.params.slope, dtype=float)

    def a_at(self, point):
        x, y = point
        return float(self.params.coefficient(x, y))

    def updated(self, **changes):
        eps_a = self.eps_a
        if set(changes) & {'a0', 'slope', 'p', 'q', 'theta', 'C', 'degenerate'}:
            eps_a = None
        return ProblemSpec(self.mesh, self.params.updated(**changes), eps_a=eps_a)

    def to_dict(self):
        return {**self.params.model_dump(), 'mesh': self.mesh.to_dict(), 'eps_a': self.eps_a}


class Oracle1DSpec(BaseModel):
    """Interval problem -eps (|u'|^(p-2) u')' = u^(q-1) f(a - u) on [0, length]"""
    model_config = ConfigDict(frozen=True, extra='forbid')

    length: float = Field(1.0, gt=0)
    a0: float = Field(1.0, gt=0)
    slope: float = 0.1
    p: float = Field(2.0, gt=1)
    q: float = Field(2.0, gt=1)
    theta: float = Field(0.5, gt=0)
    C: float = Field(1.0, gt=0)
    eps: float = Field(1e-3, gt=0)
    n: int = Field(10000, ge=10000)

    @model_validator(mode='after')
    def check_coefficient(self):
        if self.q > self.p:
            raise ValueError(f"q={self.q} must not exceed p={self.p}")
        if self.a0 + self.slope * self.length <= 0:
            raise ValueError("a must stay positive on the interval")
        return self

    @classmethod
    def from_params(cls, params, length=1.0, n=10000):
        """Interval counterpart of a problem whose coefficient varies along x only"""
        if params.slope[1] != 0:
            raise InvalidArgument("a must depend on x only to compare with the interval problem")
        return cls(length=length, a0=params.a0, slope=params.slope[0], p=params.p, q=params.q,
                   theta=params.theta, C=params.C, eps=params.eps, n=n)

    @property
    def exponents(self):
        return Exponents(p=self.p, q=self.q, theta=self.theta)

    @property
    def nonlinearity(self):
        return Nonlinearity(theta=self.theta, C=self.C)

    def coefficient(self, x):
        return self.a0 + self.slope * np.asarray(x)

    def updated(self, **changes):
        return Oracle1DSpec(**{**self.model_dump(), **changes})
