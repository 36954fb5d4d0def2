import configparser
import logging
from typing import List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from ..errors import InvalidConfiguration
from .mesh import RECTANGLE, UNIT_DISK
from .problem import ProblemParams
from .solve import SolveConfig

logger = logging.getLogger(__name__)

SECTIONS = ('problem', 'mesh', 'solver', 'sweep', 'aux', 'run')
LIST_KEYS = {('problem', 'slope'), ('sweep', 'eps'), ('sweep', 'theta'), ('sweep', 'p'),
             ('aux', 'delta'), ('aux', 'x0')}


class MeshConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra='forbid')

    domain: Literal['rectangle', 'unit-disk'] = RECTANGLE
    lx: float = Field(1.0, gt=0)
    ly: float = Field(1.0, gt=0)
    nx: int = Field(64, ge=1)
    ny: Optional[int] = Field(None, ge=1)
    n_rings: int = Field(32, ge=1)
    n_sectors: int = Field(6, ge=3)

    def build(self):
        from ..services.mesh import build_disk_mesh, build_rect_mesh
        if self.domain == UNIT_DISK:
            return build_disk_mesh(self.n_rings, self.n_sectors)
        return build_rect_mesh(self.lx, self.ly, self.nx, self.nx if self.ny is None else self.ny)


class SweepConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra='forbid')

    eps: List[float] = Field(default_factory=list)
    theta: List[float] = Field(default_factory=list)
    p: List[float] = Field(default_factory=list)

    @field_validator('eps', 'theta', 'p')
    @classmethod
    def positive(cls, values):
        if any(v <= 0 for v in values):
            raise ValueError("sweep values must be positive")
        return values


class AuxConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra='forbid')

    delta: List[float] = Field(default_factory=lambda: [1e-3])
    Lambda: float = Field(1.0, gt=0)
    n_rings: int = Field(32, ge=1)
    n_sectors: int = Field(6, ge=3)
    n_rho: int = Field(50, ge=1)
    eig_rings: int = Field(24, ge=1)
    # centre of the localized problem in domain coordinates
    x0: Tuple[float, float] = (0.5, 0.5)

    @field_validator('delta')
    @classmethod
    def in_unit_interval(cls, values):
        if not values or any(not 0 < v < 1 for v in values):
            raise ValueError("delta values must lie in (0, 1)")
        return values


class RunSection(BaseModel):
    model_config = ConfigDict(frozen=True, extra='forbid')

    name: str = 'run'
    out: str = 'out'
    seed: int = 0
    jobs: int = Field(1, ge=1)


class RunConfig(BaseModel):
    """One experiment: problem, mesh, solver options, sweep lists and output settings"""
    model_config = ConfigDict(frozen=True, extra='forbid')

    problem: ProblemParams = ProblemParams()
    mesh: MeshConfig = MeshConfig()
    solver: SolveConfig = SolveConfig()
    sweep: SweepConfig = SweepConfig()
    aux: AuxConfig = AuxConfig()
    run: RunSection = RunSection()

    @model_validator(mode='after')
    def check_sweep_exponents(self):
        for p in self.sweep.p:
            if p <= 1:
                raise ValueError(f"sweep p={p} must exceed 1")
        return self

    def eps_list(self):
        return list(self.sweep.eps) or [self.problem.eps]

    def theta_list(self):
        return list(self.sweep.theta) or [self.problem.theta]

    def p_list(self):
        return list(self.sweep.p) or [self.problem.p]

    def params_for(self, p=None, theta=None, eps=None):
        """Problem parameters of one sweep cell; q follows p down when q would exceed it"""
        p = self.problem.p if p is None else p
        changes = {'p': p, 'q': min(self.problem.q, p)}
        if theta is not None:
            changes['theta'] = theta
        if eps is not None:
            changes['eps'] = eps
        return self.problem.updated(**changes)


def _split(section, key, value):
    if (section, key) in LIST_KEYS:
        return [v.strip() for v in value.split(',') if v.strip()]
    return value


def read_sections(path):
    """Raw {section: {key: value}} of a key = value file with [sections]"""
    parser = configparser.ConfigParser(inline_comment_prefixes=('#', ';'), interpolation=None)
    parser.optionxform = str
    try:
        with open(path) as handle:
            parser.read_file(handle)
    except OSError as e:
        raise InvalidConfiguration(f"{path}: {e.strerror}")
    except configparser.ParsingError as e:
        lineno, line = e.errors[0]
        raise InvalidConfiguration(f"{path}:{lineno}: cannot parse {line.strip()!r}")
    except configparser.Error as e:
        lineno = getattr(e, 'lineno', None)
        where = f'{path}:{lineno}' if lineno else path
        raise InvalidConfiguration(f"{where}: {e.message.splitlines()[0]}")

    sections = {}
    for section in parser.sections():
        if section not in SECTIONS:
            raise InvalidConfiguration(f"{path}: unknown section [{section}] (expected one of {', '.join(SECTIONS)})")
        sections[section] = {key: _split(section, key, value) for key, value in parser.items(section)}
    return sections


def load_run_config(path=None, overrides=None, defaults=None):
    """RunConfig from configured defaults, an optional file and command-line overrides, in rising precedence"""
    source = path or '<defaults>'
    sections = read_sections(path) if path else {}
    for section, values in (overrides or {}).items():
        sections.setdefault(section, {}).update({k: v for k, v in values.items() if v is not None})
    problem = sections.get('problem', {})
    if 'p' in problem and 'q' not in problem:
        try:
            problem['q'] = min(2.0, float(problem['p']))
        except ValueError:
            pass
    for section, values in (defaults or {}).items():
        sections[section] = {**values, **sections.get(section, {})}

    data = {}
    for section in SECTIONS:
        if section not in sections:
            continue
        model = RunConfig.model_fields[section].annotation
        try:
            data[section] = model(**sections[section])
        except ValidationError as e:
            error = e.errors()[0]
            location = '.'.join([section] + [str(part) for part in error['loc']])
            raise InvalidConfiguration(f"{source}: {location}: {error['msg']}")
    try:
        config = RunConfig(**data)
    except ValidationError as e:
        raise InvalidConfiguration(f"{source}: {e.errors()[0]['msg']}")
    logger.debug(f"Loaded run configuration from {source}")
    return config
