"""Consecutive primes and the prime-log series S, s, t, E, e.

S(N) = sum of log q_j over the first N primes.
s(N) = log 2 + sum_{j=2}^N [log(j/2) + log log(q_j/2)]  (lower-bound surrogate)
t(N) = sum_{j=2}^N log j = log N!
E = S - t, e = s - t.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

DEFAULT_PRIME_CAP = 10_000_000


class CapExceeded(ValueError):
    """A configured resource cap would be exceeded."""


@dataclass(frozen=True)
class PrimeTable:
    primes: tuple[int, ...]

    @property
    def count(self) -> int:
        return len(self.primes)

    def __getitem__(self, j: int) -> int:
        # 1-indexed: table[1] == 2
        if j < 1:
            raise IndexError(j)
        return self.primes[j - 1]


@dataclass(frozen=True)
class SeriesRow:
    N: int
    S: float
    s: float
    t: float
    E: float = field(init=False)
    e: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "E", self.S - self.t)
        object.__setattr__(self, "e", self.s - self.t)


def _small_primes(limit: int) -> np.ndarray:
    flags = np.ones(limit + 1, dtype=bool)
    flags[:2] = False
    for q in range(2, math.isqrt(limit) + 1):
        if flags[q]:
            flags[q * q :: q] = False
    return np.flatnonzero(flags)


def primes_up_to(limit: int, segment: int = 1 << 20) -> np.ndarray:
    """All primes <= limit by a segmented sieve of Eratosthenes."""
    if limit < 2:
        return np.zeros(0, dtype=np.int64)
    base = _small_primes(math.isqrt(limit))
    chunks = []
    low = 0
    while low <= limit:
        high = min(low + segment, limit + 1)
        flags = np.ones(high - low, dtype=bool)
        if low < 2:
            flags[: 2 - low] = False
        for q in base:
            q = int(q)
            if q * q >= high:
                break
            start = max(q * q, -(-low // q) * q)
            flags[start - low :: q] = False
        chunks.append(np.flatnonzero(flags).astype(np.int64) + low)
        low = high
    return np.concatenate(chunks)


def _nth_prime_upper(n: int) -> int:
    if n < 6:
        return 15
    ln = math.log(n)
    return int(n * (ln + math.log(ln))) + 3


def first_primes(n: int, cap: int = DEFAULT_PRIME_CAP) -> PrimeTable:
    if n < 0:
        raise ValueError(f"prime count must be >= 0, got {n}")
    if n > cap:
        raise CapExceeded(f"requested {n} primes exceeds cap {cap}")
    if n == 0:
        return PrimeTable(())
    ps = primes_up_to(_nth_prime_upper(n))
    return PrimeTable(tuple(int(q) for q in ps[:n]))


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin, exact for n < 3.3e24."""
    if n < 2:
        return False
    small = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)
    for q in small:
        if n % q == 0:
            return n == q
    d, r = n - 1, 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in small:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


class CompensatedSum:
    """Running Neumaier (improved Kahan-Babuska) sum."""

    __slots__ = ("total", "comp")

    def __init__(self, value: float = 0.0):
        self.total = float(value)
        self.comp = 0.0

    def add(self, x: float) -> None:
        t = self.total + x
        if abs(self.total) >= abs(x):
            self.comp += (self.total - t) + x
        else:
            self.comp += (x - t) + self.total
        self.total = t

    @property
    def value(self) -> float:
        return self.total + self.comp


def mv_log_term(j: int, q: float) -> float:
    """log q'_j for the Montgomery-Vaughan lower bound q'_j = (j/2) log(q_j/2)."""
    if j < 2:
        raise ValueError("mv_log_term needs j >= 2")
    if q <= 2:
        raise ValueError(f"log log(q/2) undefined for q={q}")
    return math.log(j / 2) + math.log(math.log(q / 2))


def series_rows(n_max: int, table: PrimeTable | None = None) -> list[SeriesRow]:
    """Rows 1..n_max, accumulated with compensated summation."""
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    if table is None:
        table = first_primes(n_max)
    if table.count < n_max:
        raise IndexError(f"table holds {table.count} primes, need {n_max}")
    log2 = math.log(2.0)
    S, s, t = CompensatedSum(log2), CompensatedSum(log2), CompensatedSum()
    rows = [SeriesRow(1, S.value, s.value, t.value)]
    for j in range(2, n_max + 1):
        q = table[j]
        S.add(math.log(q))
        s.add(mv_log_term(j, q))
        t.add(math.log(j))
        rows.append(SeriesRow(j, S.value, s.value, t.value))
    return rows


def series_row(N: int, table: PrimeTable | None = None) -> SeriesRow:
    if N < 1:
        raise ValueError("N must be >= 1")
    if table is None:
        table = first_primes(N)
    if N > table.count:
        raise IndexError(f"N={N} exceeds table size {table.count}")
    qs = table.primes[:N]
    S = math.fsum(math.log(q) for q in qs)
    s = math.fsum([math.log(2.0)] + [mv_log_term(j, qs[j - 1]) for j in range(2, N + 1)])
    t = math.fsum(math.log(j) for j in range(2, N + 1))
    return SeriesRow(N, S, s, t)


@dataclass
class SignReport:
    nonpositive_E: list[int]
    negative_e: list[int]


def series_scan(n_max: int, cap: int = DEFAULT_PRIME_CAP) -> tuple[list[SeriesRow], SignReport]:
    rows = series_rows(n_max, first_primes(n_max, cap=cap))
    report = SignReport(
        nonpositive_E=[r.N for r in rows if r.E <= 0],
        negative_e=[r.N for r in rows if r.e < 0],
    )
    return rows, report


COLUMNS = ("N", "S", "s", "t", "E", "e")


def rows_to_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for r in rows:
        # repr gives the shortest round-trip decimal
        w.writerow([r.N] + [repr(getattr(r, k)) for k in COLUMNS[1:]])
    return buf.getvalue()


def rows_to_records(rows) -> list[dict]:
    return [{k: asdict(r)[k] for k in COLUMNS} for r in rows]


def rows_to_json(rows) -> str:
    return json.dumps(rows_to_records(rows))


def rows_from_csv(text: str) -> list[dict]:
    out = []
    for rec in csv.DictReader(io.StringIO(text)):
        out.append({k: (int(v) if k == "N" else float(v)) for k, v in rec.items()})
    return out
