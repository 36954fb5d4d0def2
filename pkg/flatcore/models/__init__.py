from .mesh import DOMAIN_KINDS, POLYGON, RECTANGLE, UNIT_DISK, InteriorShrink, Mesh, ScalarField
from .problem import AuxiliarySpec, Exponents, Nonlinearity, Oracle1DSpec, ProblemParams, ProblemSpec
from .reports import (CertificateReport, CoincidenceReport, ComparisonReport, CrossCheckReport,
                      EigenResult, EnergyProfile, ExponentPack, HarnackReport, Oracle1DResult,
                      SandwichReport, ScalingFit, SuiteResult)
from .run import RunConfig, load_run_config
from .solve import SolveConfig, SolveReport

__all__ = [
    'DOMAIN_KINDS', 'POLYGON', 'RECTANGLE', 'UNIT_DISK', 'Mesh', 'ScalarField', 'InteriorShrink',
    'Exponents', 'Nonlinearity', 'AuxiliarySpec', 'ProblemParams', 'ProblemSpec', 'Oracle1DSpec',
    'SolveConfig', 'SolveReport', 'RunConfig', 'load_run_config',
    'EigenResult', 'CoincidenceReport', 'ExponentPack', 'EnergyProfile', 'ScalingFit',
    'CertificateReport', 'ComparisonReport', 'SandwichReport', 'HarnackReport',
    'Oracle1DResult', 'CrossCheckReport', 'SuiteResult',
]
