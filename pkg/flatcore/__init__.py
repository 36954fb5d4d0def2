import logging
import os
from logging.handlers import RotatingFileHandler

from dotenv import load_dotenv

# Load environment variables
load_dotenv()

from config import config  # noqa: E402

LOG_FORMAT = '%(asctime)s %(levelname)s: %(message)s [in %(pathname)s:%(lineno)d]'


class Lab:
    """Configured lab instance shared by the commands"""

    def __init__(self, config_class):
        self.config = {key: getattr(config_class, key) for key in dir(config_class) if key.isupper()}
        self.debug = bool(self.config.get('DEBUG', False))
        self.testing = bool(self.config.get('TESTING', False))
        self.logger = logging.getLogger('flatcore')
        self.scheduler = None

    def solver_defaults(self):
        """SolveConfig keyword defaults taken from the configuration"""
        c = self.config
        defaults = {
            'newton_tol': c['NEWTON_TOL'],
            'residual_tol': c['RESIDUAL_TOL'],
            'max_iter': c['MAX_ITER'],
            'sigma': c['SIGMA'],
            'eps_guard': c['EPS_GUARD'],
            'coincidence_rel': c['COINCIDENCE_REL'],
        }
        if c.get('MU') is not None:
            defaults['mu'] = c['MU']
        return defaults


def _configure_logging(lab):
    logger = lab.logger
    level = getattr(logging, str(lab.config['LOG_LEVEL']).upper(), logging.INFO)
    logger.setLevel(level)
    for handler in list(logger.handlers):
        if getattr(handler, '_flatcore', False):
            logger.removeHandler(handler)
            handler.close()

    console = logging.StreamHandler()
    console.setFormatter(logging.Formatter('%(levelname)s %(name)s: %(message)s'))
    console.setLevel(level)
    console._flatcore = True
    logger.addHandler(console)

    if not lab.debug and not lab.testing:
        log_dir = lab.config['LOG_DIR']
        if not os.path.exists(log_dir):
            os.makedirs(log_dir)
        file_handler = RotatingFileHandler(os.path.join(log_dir, 'flatcore.log'), maxBytes=10240, backupCount=10)
        file_handler.setFormatter(logging.Formatter(LOG_FORMAT))
        file_handler.setLevel(logging.INFO)
        file_handler._flatcore = True
        logger.addHandler(file_handler)
        logger.info("Lab startup")


def create_app(config_name='default'):
    """Create and configure the lab"""
    if config_name not in config:
        from .errors import InvalidConfiguration
        raise InvalidConfiguration(f"Unknown configuration {config_name!r} (expected one of {', '.join(config)})")
    lab = Lab(config[config_name])
    _configure_logging(lab)

    # Initialize sweep scheduler
    from .services.scheduler import SweepScheduler
    scheduler = SweepScheduler()
    scheduler.init_app(lab)
    lab.scheduler = scheduler
    return lab
