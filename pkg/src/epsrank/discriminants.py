"""Minimal tame relative discriminants and tower composition, in log space."""
from __future__ import annotations

import math
from dataclasses import dataclass

from .primes import CompensatedSum, first_primes, is_prime

EXACT_MAX_N = 2000


@dataclass(frozen=True)
class DiscriminantBound:
    log_value: float
    exact_value: int | None = None

    def to_record(self, p: int, N: int) -> dict:
        rec = {"p": p, "N": N, "log_value": self.log_value}
        if self.exact_value is not None:
            rec["exact_value"] = self.exact_value
        return rec


@dataclass(frozen=True)
class RamificationDatum:
    ell: int
    residue_degrees: tuple[int, ...]

    def __post_init__(self):
        if not is_prime(self.ell):
            raise ValueError(f"ell={self.ell} is not prime")
        if not self.residue_degrees or any(f < 1 for f in self.residue_degrees):
            raise ValueError("residue degrees must be a nonempty list of positive integers")


def _check_prime(p: int) -> None:
    if not is_prime(p):
        raise ValueError(f"p={p} is not prime")


def _bound(p: int, qs, exact: bool) -> DiscriminantBound:
    acc = CompensatedSum()
    for q in qs:
        acc.add(math.log(q))
    log_value = (p - 1) * acc.value
    value = None
    if exact:
        if len(qs) > EXACT_MAX_N:
            raise ValueError(f"exact value only offered for N <= {EXACT_MAX_N}")
        value = math.prod(qs) ** (p - 1)
    return DiscriminantBound(log_value, value)


def minimal_tame_log_disc(p: int, N: int, exact: bool = False) -> DiscriminantBound:
    """(p-1) * sum of log q over the first N primes q != p."""
    _check_prime(p)
    if N < 0:
        raise ValueError("N must be >= 0")
    qs = [q for q in first_primes(N + 1).primes if q != p][:N]
    return _bound(p, qs, exact)


def minimal_log_disc(p: int, N: int, exact: bool = False) -> DiscriminantBound:
    """(p-1) * sum of log q over the first N primes, p allowed among them."""
    _check_prime(p)
    if N < 0:
        raise ValueError("N must be >= 0")
    return _bound(p, first_primes(N).primes, exact)


def relative_tame_log_disc(p: int, data: list[RamificationDatum]) -> DiscriminantBound:
    _check_prime(p)
    ells = [d.ell for d in data]
    if len(set(ells)) != len(ells):
        raise ValueError("ramified primes must be distinct")
    acc = CompensatedSum()
    for d in data:
        if d.ell == p:
            raise ValueError("ell = p is wild ramification, excluded from the tame part")
        acc.add(sum(d.residue_degrees) * math.log(d.ell))
    return DiscriminantBound((p - 1) * acc.value)


def tower_log_disc(log_Dk: float, p: int, log_Drel: float) -> float:
    """log D_K = p log D_k + log D_{K/k}."""
    if log_Dk < 0 or log_Drel < 0:
        raise ValueError("log discriminants must be >= 0")
    return p * log_Dk + log_Drel
