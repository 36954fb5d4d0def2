import logging
import os
import threading
from concurrent.futures import ThreadPoolExecutor

from .artifacts import write_csv
from .deadcore import ROW_FIELDS, solve_cell

logger = logging.getLogger(__name__)


class SweepScheduler:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __init__(self):
        if not hasattr(self, 'initialized'):
            self.initialized = True
            self.app = None
            self.jobs = 1
            self.executor = None
            self.scheduling_lock = threading.Lock()
            logger.debug("Sweep scheduler initialized")

    def init_app(self, app):
        """Initialize the scheduler with the lab configuration"""
        self.app = app
        self.jobs = int(app.config.get('JOBS', 1))
        logger.debug("Scheduler initialized with app")

    def start(self, jobs=None):
        """Start the worker pool; one job runs cells inline"""
        with self.scheduling_lock:
            jobs = self.jobs if jobs is None else int(jobs)
            if jobs < 1:
                raise ValueError(f"jobs must be at least 1, got {jobs}")
            if self.executor is not None:
                self.executor.shutdown(wait=True)
                self.executor = None
            self.jobs = jobs
            if jobs > 1:
                self.executor = ThreadPoolExecutor(max_workers=jobs, thread_name_prefix='sweep')
        logger.info(f"Sweep scheduler started with {jobs} worker(s)")

    def stop(self):
        """Stop the scheduler after the running cells finish"""
        with self.scheduling_lock:
            if self.executor is not None:
                self.executor.shutdown(wait=True)
                self.executor = None
        logger.debug("Sweep scheduler stopped")

    def map(self, fn, items):
        """Results of fn over items in input order"""
        items = list(items)
        executor = self.executor
        if executor is None:
            return [fn(item) for item in items]
        return list(executor.map(fn, items))

    def run_cells(self, specs, cfg, cell_dir=None):
        """Solve every cell; each finished cell is written to its own CSV before the barrier"""
        if cell_dir is not None:
            os.makedirs(cell_dir, exist_ok=True)

        def run(indexed):
            index, spec = indexed
            row = solve_cell(spec, cfg)
            if cell_dir is not None:
                write_csv(os.path.join(cell_dir, f'cell-{index:03d}.csv'), 'sweep-cell', ROW_FIELDS, [row])
            logger.info(f"Cell {index}: theta={row['theta']:g} eps={row['eps']:.4g} -> {row['classification']}")
            return row

        rows = self.map(run, enumerate(specs))
        logger.info(f"Sweep barrier reached: {len(rows)} cells")
        return rows
