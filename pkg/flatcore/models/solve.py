from dataclasses import dataclass, field
from typing import List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator

from .problem import default_mu


class SolveConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra='forbid')

    newton_tol: float = Field(1e-10, gt=0)
    residual_tol: float = Field(1e-5, gt=0)
    max_iter: int = Field(500, gt=0)
    # None: per-vertex slope bound of the smoothed reaction
    shift: Optional[float] = Field(None, ge=0)
    sigma: float = Field(1e-6, ge=0)
    sigma_min: float = Field(1e-12, gt=0)
    mu: Optional[float] = Field(None, ge=0)
    continuation: bool = True
    schedule: List[Tuple[float, float]] = Field(default_factory=list)
    eps_guard: float = Field(0.95, gt=0, le=1)
    coincidence_rel: float = Field(1e-6, gt=0)

    @field_validator('schedule')
    @classmethod
    def check_schedule(cls, schedule):
        for sigma, mu in schedule:
            if sigma < 0 or mu < 0:
                raise ValueError("schedule entries must be non-negative")
        for (s0, m0), (s1, m1) in zip(schedule, schedule[1:]):
            if s1 > s0 or m1 > m0:
                raise ValueError("continuation schedule must be decreasing")
        return schedule

    def resolved_mu(self, p):
        return default_mu(p) if self.mu is None else self.mu

    def stages(self, theta, p, floor=None):
        """(sigma, mu) pairs visited by a continuation solve"""
        if self.schedule:
            return list(self.schedule)
        mu = self.resolved_mu(p)
        if theta >= 1:
            return [(0.0, mu)]
        if not self.continuation:
            return [(self.sigma, mu)]
        target = self.sigma_min if floor is None else min(self.sigma_min, floor)
        sigmas = []
        sigma = max(1e-2, self.sigma)
        while sigma > target * 1.000001:
            sigmas.append(sigma)
            sigma /= 100.0
        sigmas.append(target)
        return [(s, mu) for s in sigmas]

    def coincidence_tolerance(self, a_max):
        """tau_c = max(rel * |a|_inf, 10 * newton tolerance)"""
        return max(self.coincidence_rel * a_max, 10.0 * self.newton_tol)


@dataclass
class SolveReport:
    kind: str
    converged: bool = False
    iterations: int = 0
    residual: float = float('nan')
    residual_history: List[float] = field(default_factory=list)
    energy_history: List[float] = field(default_factory=list)
    stages: List[dict] = field(default_factory=list)
    monotonicity_violations: int = 0
    tau_c: float = float('nan')
    shift: float = float('nan')
    wall_time: float = 0.0
    message: str = ''

    def to_dict(self):
        return {
            'kind': self.kind,
            'converged': self.converged,
            'iterations': self.iterations,
            'residual': self.residual,
            'n_stages': len(self.stages),
            'final_sigma': self.stages[-1]['sigma'] if self.stages else None,
            'monotonicity_violations': self.monotonicity_violations,
            'tau_c': self.tau_c,
            'shift': self.shift,
            'energy': self.energy_history[-1] if self.energy_history else None,
            'wall_time': self.wall_time,
            'message': self.message,
        }
