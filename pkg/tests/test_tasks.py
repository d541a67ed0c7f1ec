import math

import pytest
from pydantic import ValidationError

from fpcount.errors import DomainError
from fpcount.models.reports import SweepConfig
from fpcount.tasks import SweepRunner, sweep_pairs, sweep_tasks


def test_all_coprime_pairs():
    config = SweepConfig(c_range=(2, 4), d_range=(3, 6))
    assert sweep_pairs(config) == [(2, 3), (2, 5), (3, 4), (3, 5), (4, 5)]


def test_tasks_are_lexicographic():
    config = SweepConfig(c_range=(3, 3), d_range=(4, 5), k_list=[2, 1])
    assert sweep_tasks(config) == [(3, 4, 1), (3, 4, 2), (3, 5, 1), (3, 5, 2)]


def test_random_pairs_are_seeded():
    config = SweepConfig(c_range=(10, 50), d_range=(60, 200), pair_mode="random:12", seed=7)
    first = sweep_pairs(config)
    assert first == sweep_pairs(config)
    assert len(first) == 12 and first == sorted(first)
    assert all(math.gcd(c, d) == 1 and c < d for c, d in first)
    other = sweep_pairs(config.model_copy(update={"seed": 8}))
    assert other != first


def test_no_pairs_is_an_error():
    with pytest.raises(DomainError):
        sweep_pairs(SweepConfig(c_range=(4, 4), d_range=(6, 6)))
    with pytest.raises(DomainError):
        sweep_pairs(SweepConfig(c_range=(5, 9), d_range=(2, 4)))


@pytest.mark.parametrize("kwargs", [
    {"c_range": (5, 4), "d_range": (6, 7)},
    {"c_range": (2, 4), "d_range": (6, 7), "k_list": [0]},
    {"c_range": (2, 4), "d_range": (6, 7), "pair_mode": "random:0"},
    {"c_range": (2, 4), "d_range": (6, 7), "pair_mode": "some"},
    {"c_range": (2, 4), "d_range": (6, 7), "threads": 0},
    {"c_range": (2, 4), "d_range": (6, 7), "seed": -1},
])
def test_config_validation(kwargs):
    with pytest.raises(ValidationError):
        SweepConfig(**kwargs)


def test_runner_rows_and_progress():
    config = SweepConfig(c_range=(3, 5), d_range=(7, 9), k_list=[1, 2], threads=3)
    runner = SweepRunner(config)
    seen = []
    runner.register_progress_callback(lambda current, total, status: seen.append((current, total)))
    reports = runner.run()
    assert [(r.c, r.d, r.k) for r in reports] == sweep_tasks(config)
    assert seen[-1] == (len(reports), len(reports))


def test_thread_count_does_not_change_rows():
    base = dict(c_range=(5, 12), d_range=(13, 40), k_list=[1, 2, 3])
    one = SweepRunner(SweepConfig(**base, threads=1)).run()
    many = SweepRunner(SweepConfig(**base, threads=4)).run()
    assert [r.csv_row() for r in one] == [r.csv_row() for r in many]


def test_failing_callback_does_not_stop_sweep():
    runner = SweepRunner(SweepConfig(c_range=(3, 3), d_range=(5, 5)))

    def explode(current, total, status):
        raise RuntimeError("callback broke")

    runner.register_progress_callback(explode)
    assert len(runner.run()) == 1
