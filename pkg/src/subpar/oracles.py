"""Batched set-function oracle with adaptive-round and query accounting.

The central object is SetOracle: a gateway that evaluates batches of
subsets against an instance.  Every eval_batch call costs exactly one
adaptive round no matter how large the batch is; the query counter grows
by the batch size.  Algorithms that want to look cheap on the round
meter therefore have to gather every independently-computable query of a
phase into a single batch -- issuing them one by one inflates the meter,
which is the point of the instrument.

Subsets are represented as boolean membership matrices of shape
(batch, n).  Helpers accept iterables of element ids or python ints used
as bitmasks and normalize them.
"""

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np


class InvalidElement(ValueError):
    """A subset references an element id outside 0..n-1."""


class OracleAccounting:
    """Mutable round/query counters attached to an oracle gateway.

    rounds   -- number of eval_batch calls issued so far
    queries  -- total number of subset evaluations across all batches
    """

    __slots__ = ("rounds", "queries")

    def __init__(self):
        self.rounds = 0
        self.queries = 0

    def reset(self):
        self.rounds = 0
        self.queries = 0

    def charge(self, batch_size):
        assert batch_size > 0
        self.rounds += 1
        self.queries += int(batch_size)

    def snapshot(self):
        return (self.rounds, self.queries)

    def __repr__(self):
        return f"OracleAccounting(rounds={self.rounds}, queries={self.queries})"


def members_matrix(subsets, n):
    """Normalize a batch of subsets to a boolean matrix of shape (B, n).

    Accepts a boolean array of shape (B, n) or (n,), or a sequence of
    subsets where each subset is a set/iterable of element ids or a
    boolean membership vector.  A bare flat list of ints is read as ONE
    subset given by its element ids.
    """
    if isinstance(subsets, np.ndarray) and subsets.dtype == bool:
        m = np.atleast_2d(subsets)
        if m.shape[1] != n:
            raise InvalidElement(f"membership row length {m.shape[1]} != n={n}")
        return m
    subsets = list(subsets) if not isinstance(subsets, (set, frozenset)) else [subsets]
    if all(isinstance(s, (int, np.integer)) for s in subsets):
        subsets = [subsets]  # flat ids -> a single subset
    rows = np.zeros((len(subsets), n), dtype=bool)
    for i, s in enumerate(subsets):
        rows[i] = single_members(s, n)
    return rows


def single_members(subset, n):
    """One subset (iterable of ids, or boolean vector) -> membership vector."""
    if isinstance(subset, np.ndarray) and subset.dtype == bool:
        if subset.shape != (n,):
            raise InvalidElement(f"membership length {subset.shape} != n={n}")
        return subset
    row = np.zeros(n, dtype=bool)
    for u in subset:
        u = int(u)
        if u < 0 or u >= n:
            raise InvalidElement(f"element id {u} out of range for n={n}")
        row[u] = True
    return row


def mask_of(members):
    """Boolean membership vector -> python int bitmask."""
    return int(sum(1 << u for u in np.flatnonzero(members)))


def ids_of(members):
    """Boolean membership vector -> sorted list of element ids."""
    return [int(u) for u in np.flatnonzero(members)]


def all_subsets_matrix(n):
    """Membership matrix of the full power set, row i = subset with mask i."""
    assert n <= 26, "power set too large"
    masks = np.arange(1 << n, dtype=np.uint32)
    return (masks[:, None] >> np.arange(n, dtype=np.uint32)[None, :]) & 1 == 1


_EVAL_CHUNK = 1 << 21  # rows per evaluation slice, keeps memory bounded


def default_threads():
    env = os.environ.get("SUBPAR_THREADS")
    if env is not None:
        return max(1, int(env))
    return os.cpu_count() or 1


class SetOracle:
    """Round-counting batched gateway in front of a set-function instance.

    The instance must expose `n` and a pure, vectorized
    `evaluate_batch(members)` taking a boolean (B, n) matrix.  All
    mutability lives in the accounting record, updated once per batch,
    so in-batch evaluation may run concurrently.
    """

    def __init__(self, instance, threads=None):
        self.instance = instance
        self.accounting = OracleAccounting()
        self.threads = default_threads() if threads is None else max(1, int(threads))

    @property
    def n(self):
        return self.instance.n

    def eval_batch(self, subsets):
        """Evaluate every subset in the batch; one adaptive round total."""
        m = members_matrix(subsets, self.n)
        if m.shape[0] == 0:
            raise ValueError("empty batch")
        self.accounting.charge(m.shape[0])
        return self._evaluate(m)

    def eval_single(self, subset):
        """Evaluate one subset.  Costs a full round, like any batch."""
        return float(self.eval_batch(members_matrix([subset], self.n))[0])

    def reset_accounting(self):
        self.accounting.reset()

    # -- internal ------------------------------------------------------

    def _evaluate(self, m):
        rows = m.shape[0]
        n = m.shape[1]
        # small ground set, big batch: rows repeat heavily (pigeonhole),
        # so evaluate each distinct subset once and scatter the values
        # back.  Pure caching -- accounting was already charged per row.
        if n <= 16 and rows >= 4 * (1 << n):
            keys = m @ (1 << np.arange(n, dtype=np.int64))
            seen = np.zeros(1 << n, dtype=bool)
            seen[keys] = True
            uniq = np.flatnonzero(seen)
            table = (uniq[:, None] >> np.arange(n, dtype=np.int64)) & 1 == 1
            vals = self.instance.evaluate_batch(table)
            pos = np.empty(1 << n, dtype=np.int64)
            pos[uniq] = np.arange(uniq.size)
            return vals[pos[keys]].astype(np.float64, copy=False)
        if rows <= _EVAL_CHUNK or self.threads == 1:
            out = np.empty(rows, dtype=np.float64)
            for lo in range(0, rows, _EVAL_CHUNK):
                hi = min(lo + _EVAL_CHUNK, rows)
                out[lo:hi] = self.instance.evaluate_batch(m[lo:hi])
            return out
        # larger batches: deterministic order, chunks dispatched to threads
        bounds = list(range(0, rows, _EVAL_CHUNK)) + [rows]
        slices = [(bounds[i], bounds[i + 1]) for i in range(len(bounds) - 1)]
        out = np.empty(rows, dtype=np.float64)
        with ThreadPoolExecutor(max_workers=self.threads) as pool:
            futures = [pool.submit(self.instance.evaluate_batch, m[lo:hi]) for lo, hi in slices]
            for (lo, hi), fut in zip(slices, futures):
                out[lo:hi] = fut.result()
        return out
