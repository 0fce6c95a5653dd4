import numpy as np
import pytest

from qthesis.rng import SEED_ENV, chunk_bounds, chunked_ensemble, make_rng, parallel_map, resolve_seed


def _draw(n, rng, scale):
    return scale * rng.standard_normal(n)


def _square(x):
    return x * x


def test_make_rng_is_reproducible_and_keyed():
    a = make_rng(5, 1, 2).random(4)
    assert np.array_equal(a, make_rng(5, 1, 2).random(4))
    assert not np.array_equal(a, make_rng(5, 1, 3).random(4))
    assert not np.array_equal(a, make_rng(6, 1, 2).random(4))


def test_chunk_bounds_cover_range():
    assert chunk_bounds(10, 4) == [(0, 4), (4, 8), (8, 10)]
    assert chunk_bounds(0, 4) == []
    with pytest.raises(ValueError):
        chunk_bounds(-1)


def test_parallel_map_preserves_order():
    assert parallel_map(_square, [(k,) for k in range(7)], jobs=3) == [k * k for k in range(7)]


@pytest.mark.parametrize("jobs", [1, 2, 8])
def test_ensemble_does_not_depend_on_worker_count(jobs):
    ref = np.concatenate(chunked_ensemble(_draw, 23_456, 11, 0, 1, 5000, args=(2.0,)))
    out = np.concatenate(chunked_ensemble(_draw, 23_456, 11, 0, jobs, 5000, args=(2.0,)))
    assert np.array_equal(ref, out)


def test_chunks_are_independent_of_evaluation_order():
    parts = chunked_ensemble(_draw, 20_000, 3, 7, 1, 5000, args=(1.0,))
    for k in reversed(range(4)):
        assert np.array_equal(parts[k], _draw(5000, make_rng(3, 7, k), 1.0))


def test_seed_environment_override(monkeypatch):
    monkeypatch.delenv(SEED_ENV, raising=False)
    assert resolve_seed(None) == 0
    assert resolve_seed(9) == 9
    monkeypatch.setenv(SEED_ENV, "42")
    assert resolve_seed(9) == 42
