import os
import threading

import pytest

from flatcore.services.artifacts import read_csv
from flatcore.services.deadcore import ROW_FIELDS
from flatcore.services.mesh import build_rect_mesh
from flatcore.services.scheduler import SweepScheduler

from .conftest import make_spec


def test_scheduler_is_a_singleton(lab):
    assert SweepScheduler() is lab.scheduler
    assert SweepScheduler().jobs == 1


def test_map_keeps_input_order(lab):
    scheduler = lab.scheduler
    scheduler.start(3)
    try:
        seen = set()

        def record(k):
            seen.add(threading.current_thread().name)
            return k * k

        assert scheduler.map(record, range(20)) == [k * k for k in range(20)]
        assert all(name.startswith('sweep') for name in seen)
    finally:
        scheduler.stop()
    assert scheduler.executor is None


def test_single_job_runs_inline(lab):
    lab.scheduler.start(1)
    assert lab.scheduler.executor is None
    assert lab.scheduler.map(lambda k: threading.current_thread().name, [0]) == [threading.current_thread().name]


def test_rejects_zero_jobs(lab):
    with pytest.raises(ValueError):
        lab.scheduler.start(0)


def test_run_cells_writes_one_file_per_cell(lab, tmp_path):
    template = make_spec(build_rect_mesh(1.0, 1.0, 8, 8), theta=1.5, eps=1e-2)
    specs = [template.updated(eps=eps) for eps in (1e-2, 5e-3)] + [template.updated(eps=1.0)]
    lab.scheduler.start(2)
    try:
        rows = lab.scheduler.run_cells(specs, None, cell_dir=str(tmp_path / 'cells'))
    finally:
        lab.scheduler.stop()
    assert [row['eps'] for row in rows] == [1e-2, 5e-3, 1.0]
    assert rows[2]['classification'] == 'failed'
    assert sorted(os.listdir(tmp_path / 'cells')) == ['cell-000.csv', 'cell-001.csv', 'cell-002.csv']
    kind, header, cell_rows = read_csv(str(tmp_path / 'cells' / 'cell-001.csv'))
    assert kind == 'sweep-cell'
    assert tuple(header) == ROW_FIELDS
    assert float(cell_rows[0]['eps']) == 5e-3
