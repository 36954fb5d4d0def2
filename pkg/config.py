import os


def _optional_float(name):
    value = os.environ.get(name)
    return None if value in (None, '') else float(value)


class Config:
    """Base configuration."""
    # Solver defaults
    SIGMA = float(os.environ.get('FLATCORE_SIGMA', 1e-6))
    # None: 1e-8 for p >= 2, 1e-6 below
    MU = _optional_float('FLATCORE_MU')
    NEWTON_TOL = float(os.environ.get('FLATCORE_NEWTON_TOL', 1e-10))
    RESIDUAL_TOL = float(os.environ.get('FLATCORE_RESIDUAL_TOL', 1e-5))
    MAX_ITER = int(os.environ.get('FLATCORE_MAX_ITER', 500))
    EPS_GUARD = float(os.environ.get('FLATCORE_EPS_GUARD', 0.95))
    COINCIDENCE_REL = float(os.environ.get('FLATCORE_COINCIDENCE_REL', 1e-6))

    # Verification
    LEMMA_SLACK = float(os.environ.get('FLATCORE_LEMMA_SLACK', 1e-10))
    SEED = int(os.environ.get('FLATCORE_SEED', 0))

    # Sweep scheduler
    JOBS = int(os.environ.get('FLATCORE_JOBS', 1))

    # Logging
    LOG_DIR = os.environ.get('FLATCORE_LOG_DIR', 'logs')
    LOG_LEVEL = os.environ.get('FLATCORE_LOG_LEVEL', 'INFO')


class DevelopmentConfig(Config):
    """Development configuration."""
    DEBUG = True


class TestingConfig(Config):
    """Testing configuration."""
    TESTING = True
    LOG_LEVEL = 'WARNING'
    JOBS = 1


class ProductionConfig(Config):
    """Production configuration."""
    DEBUG = False


config = {
    'development': DevelopmentConfig,
    'testing': TestingConfig,
    'production': ProductionConfig,
    'default': DevelopmentConfig
}
