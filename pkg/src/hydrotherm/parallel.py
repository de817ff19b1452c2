"""Worker-count control shared by assembly and the iterative solvers.

Workers are numba threads. Every reduction is computed over fixed-size
blocks whose partial sums are combined in block order, so results never
depend on how many workers took part.
"""

import os
from contextlib import contextmanager

import numba

from .errors import ConfigurationError

# Reduction block length; fixed so sums are bitwise independent of worker count.
BLOCK = 4096


def max_workers():
    return numba.config.NUMBA_NUM_THREADS


def default_workers():
    env = os.environ.get("HYDROTHERM_WORKERS")
    if env:
        try:
            return int(env)
        except ValueError:
            raise ConfigurationError(f"HYDROTHERM_WORKERS must be an integer, got {env!r}")
    return 1


def set_workers(n):
    n = int(n)
    if n < 1:
        raise ConfigurationError(f"workers must be >= 1, got {n}")
    if n > max_workers():
        raise ConfigurationError(
            f"workers={n} exceeds the thread pool size {max_workers()} "
            "(raise NUMBA_NUM_THREADS before importing hydrotherm)"
        )
    numba.set_num_threads(n)


def get_workers():
    return numba.get_num_threads()


@contextmanager
def workers(n):
    previous = get_workers()
    set_workers(n)
    try:
        yield n
    finally:
        numba.set_num_threads(previous)
