"""Deterministic random streams and a worker-count-independent chunked map.

Every random draw in the package comes from a ``numpy.random.Generator``
built from ``SeedSequence(seed, spawn_key=key)``. Ensembles are cut into
fixed-size chunks and chunk ``k`` always uses key ``(stream, k)``, so the
merged result does not depend on how many processes computed it.
"""
from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor

import numpy as np

SEED_ENV = "QTHESIS_SEED"
DEFAULT_CHUNK = 50_000


def make_rng(seed: int = 0, *key: int) -> np.random.Generator:
    """Generator for ``seed`` and an optional integer spawn key."""
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.PCG64(ss))


def resolve_seed(seed: int | None) -> int:
    """Seed from the environment override if set, else ``seed`` (default 0)."""
    env = os.environ.get(SEED_ENV)
    if env is not None and env.strip() != "":
        return int(env)
    return 0 if seed is None else int(seed)


def default_jobs() -> int:
    return os.cpu_count() or 1


def chunk_bounds(n: int, chunk: int = DEFAULT_CHUNK) -> list:
    """``[(start, stop), ...]`` covering ``range(n)`` in fixed-size pieces."""
    if n < 0:
        raise ValueError("n must be non-negative")
    return [(a, min(a + chunk, n)) for a in range(0, n, chunk)]


def _call(payload):
    func, args, kwargs = payload
    return func(*args, **kwargs)


def parallel_map(func, arg_list, jobs: int = 1) -> list:
    """``[func(*args) for args in arg_list]`` evaluated on ``jobs`` processes, order preserved."""
    arg_list = list(arg_list)
    if jobs is None:
        jobs = default_jobs()
    if jobs <= 1 or len(arg_list) <= 1:
        return [func(*a) for a in arg_list]
    with ProcessPoolExecutor(max_workers=min(jobs, len(arg_list))) as pool:
        return list(pool.map(_call, [(func, a, {}) for a in arg_list]))


def chunked_ensemble(func, n: int, seed: int, stream: int = 0, jobs: int = 1,
                     chunk: int = DEFAULT_CHUNK, args: tuple = ()) -> list:
    """Run ``func(n_chunk, rng, *args)`` over chunks of an ``n``-shot ensemble.

    Chunk ``k`` gets ``make_rng(seed, stream, k)``. Results come back in chunk
    order; callers concatenate or reduce them.
    """
    tasks = [(_chunk_task, (func, b - a, seed, stream, k, args))
             for k, (a, b) in enumerate(chunk_bounds(n, chunk))]
    return parallel_map(_run_task, tasks, jobs)


def _chunk_task(func, size, seed, stream, k, args):
    return func(size, make_rng(seed, stream, k), *args)


def _run_task(f, a):
    return f(*a)
