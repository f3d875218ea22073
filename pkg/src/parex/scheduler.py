"""Static load-balanced execution of the independent T-table row computations.

Rows are the only parallel region: each row computes its own T_{j,1}
(including, for implicit methods, its own single-threaded LU factorization)
against shared immutable inputs.  Row j costs roughly ``n_j`` work units,
so for arithmetic (harmonic-type) sequences pairing row j with row
``k + 1 - j`` gives slots of identical total work; slots are then folded
onto workers so every worker carries the same number of equal-work slots.

The worker pool is created once per solve and reused every step: workers
are long-lived threads signalled through a generation counter, so per-step
scheduling costs O(k) with no thread creation.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass

__all__ = ["StaticSchedule", "build_schedule", "WorkerPool", "run_rows"]


@dataclass(frozen=True)
class StaticSchedule:
    """Partition of row indices 1..k into per-worker ordered lists."""

    num_workers: int
    assignment: tuple  # tuple of tuples of 1-based row indices
    work_units: tuple  # per-worker sum of n_j

    @property
    def rows(self) -> int:
        return sum(len(a) for a in self.assignment)


def _is_arithmetic(values) -> bool:
    if len(values) < 2:
        return True
    step = values[1] - values[0]
    return all(values[i + 1] - values[i] == step for i in range(len(values) - 1))


def _largest_divisor_at_most(n: int, cap: int) -> int:
    for w in range(min(n, cap), 0, -1):
        if n % w == 0:
            return w
    return 1


def build_schedule(seq_values, k: int, num_workers: int) -> StaticSchedule:
    """Assign rows 1..k to workers with statically balanced work.

    Arithmetic sequences (harmonic and its multiples) use extreme pairing:
    slot i holds rows (i, k+1-i), all slots summing to the same work.  The
    worker count is capped at the largest divisor of the pair count so the
    equal-work slots distribute evenly; for odd k the orphan middle row
    (work <= n_max) rides on the first worker.  Non-arithmetic sequences
    (Romberg, Bulirsch) fall back to round-robin.
    """
    if k < 1 or num_workers < 1:
        raise ValueError(f"need k >= 1 and num_workers >= 1, got k={k}, workers={num_workers}")
    values = list(seq_values[:k])
    if len(values) < k:
        raise ValueError(f"sequence provides {len(values)} values, need {k}")

    if _is_arithmetic(values):
        n_pairs = k // 2
        slots = [[j, k + 1 - j] for j in range(1, n_pairs + 1)]
        middle = [(k + 1) // 2] if k % 2 else []
        if n_pairs == 0:
            workers = [[middle[0]]]
        else:
            w = _largest_divisor_at_most(n_pairs, num_workers)
            workers = [[] for _ in range(w)]
            for i, slot in enumerate(slots):
                workers[i % w].extend(slot)
            if middle:
                workers[0].extend(middle)
    else:
        w = min(num_workers, k)
        workers = [[] for _ in range(w)]
        for j in range(1, k + 1):
            workers[(j - 1) % w].append(j)

    work_units = tuple(sum(values[j - 1] for j in rows) for rows in workers)
    return StaticSchedule(
        num_workers=len(workers),
        assignment=tuple(tuple(rows) for rows in workers),
        work_units=work_units,
    )


class WorkerPool:
    """Persistent worker threads for the per-step row dispatch.

    Workers block on a condition variable between steps and are woken all at
    once by a generation bump; results land in row-indexed slots so the
    output is bitwise independent of the worker count.  The first error in
    row-index order wins when several rows fail.
    """

    def __init__(self, num_workers: int):
        if num_workers < 1:
            raise ValueError(f"num_workers must be >= 1, got {num_workers}")
        self.num_workers = num_workers
        self.dispatch_count = 0
        self.worker_idents: dict[int, int] = {}
        self._cond = threading.Condition()
        self._generation = 0
        self._pending = 0
        self._job = None
        self._shutdown = False
        self._threads = [
            threading.Thread(target=self._worker_loop, args=(i,), daemon=True)
            for i in range(num_workers)
        ]
        for th in self._threads:
            th.start()

    def _worker_loop(self, worker_id: int) -> None:
        self.worker_idents[worker_id] = threading.get_ident()
        seen = 0
        while True:
            with self._cond:
                while self._generation == seen and not self._shutdown:
                    self._cond.wait()
                if self._shutdown:
                    return
                seen = self._generation
                assignment, task, results, errors = self._job
            rows = assignment[worker_id] if worker_id < len(assignment) else ()
            for j in rows:
                try:
                    results[j] = task(j)
                except Exception as exc:  # propagated after the barrier
                    errors[j] = exc
            with self._cond:
                self._pending -= 1
                if self._pending == 0:
                    self._cond.notify_all()

    def run(self, schedule: StaticSchedule, row_task):
        """Run one step's rows; returns results ordered by row index."""
        results: dict = {}
        errors: dict = {}
        with self._cond:
            self._job = (schedule.assignment, row_task, results, errors)
            self._pending = self.num_workers
            self._generation += 1
            self._cond.notify_all()
            while self._pending:
                self._cond.wait()
        self.dispatch_count += 1
        if errors:
            raise errors[min(errors)]
        total = schedule.rows
        return [results[j] for j in range(1, total + 1)]

    def close(self) -> None:
        with self._cond:
            self._shutdown = True
            self._cond.notify_all()
        for th in self._threads:
            th.join()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def run_rows(schedule: StaticSchedule, row_task, pool: WorkerPool | None = None):
    """Execute all scheduled rows, serially or on ``pool``.

    Results are indexed by row and identical regardless of worker count;
    with several failing rows, the lowest row index's error is raised.
    """
    if pool is None or pool.num_workers == 1:
        results: dict = {}
        errors: dict = {}
        for rows in schedule.assignment:
            for j in rows:
                try:
                    results[j] = row_task(j)
                except Exception as exc:
                    errors[j] = exc
        if errors:
            raise errors[min(errors)]
        return [results[j] for j in range(1, schedule.rows + 1)]
    return pool.run(schedule, row_task)
