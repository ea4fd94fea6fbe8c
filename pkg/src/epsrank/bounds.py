"""p-rank recursions along a p-cyclic tower and epsilon-certificate checks.

One cyclic step K/k of degree p with N tame ramified primes and d_k = [k:Q]:

    rk Cl_K  <= p rk Cl_k + (p-1)(N+2) d_k
    rk A_K   <= p rk A_k  + (p-1) N d_k        (Leopoldt assumed)
    rk T_K   <= p rk T_k  + (p-1)(N+1) d_k     (Leopoldt assumed)
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

from .primes import is_prime


@dataclass(frozen=True)
class TowerSpec:
    p: int
    e: int
    d_kappa: int
    rho: int
    tame: tuple[int, ...] = ()
    leopoldt_assumed: bool = True

    def __post_init__(self):
        if not is_prime(self.p):
            raise ValueError(f"p={self.p} is not prime")
        if self.e < 0 or self.d_kappa < 1 or self.rho < 0:
            raise ValueError("need e >= 0, d_kappa >= 1, rho >= 0")
        tame = tuple(self.tame) if self.tame else (0,) * self.e
        if len(tame) != self.e:
            raise ValueError(f"expected {self.e} tame counts, got {len(tame)}")
        if any(n < 0 for n in tame):
            raise ValueError("tame counts must be >= 0")
        object.__setattr__(self, "tame", tame)

    def base_degree(self, i: int) -> int:
        """Degree over Q of the base field of step i (1-indexed)."""
        return self.p ** (i - 1) * self.d_kappa


def _nonneg(*xs):
    if any(x < 0 for x in xs):
        raise ValueError("arguments must be nonnegative")


def class_rank_step(p: int, rk_k: int, N: int, d_k: int) -> int:
    _nonneg(rk_k, N, d_k)
    return p * rk_k + (p - 1) * (N + 2) * d_k


def class_star_rank_step(p: int, rk_k: int, N: int, d_k: int) -> int:
    """Bound on the p-rank of the kernel of the algebraic norm."""
    _nonneg(rk_k, N, d_k)
    return (p - 1) * (rk_k + (N + 2) * d_k)


def ambiguous_rank_bound(rk_k: int, t_k: int, unit_rank_bound: int) -> int:
    _nonneg(rk_k, t_k, unit_rank_bound)
    return rk_k + t_k + unit_rank_bound


def aram_rank_step(p: int, rkA_k: int, N: int, d_k: int) -> int:
    _nonneg(rkA_k, N, d_k)
    return p * rkA_k + (p - 1) * N * d_k


def torsion_rank_step(p: int, rkT_k: int, N: int, d_k: int) -> int:
    _nonneg(rkT_k, N, d_k)
    return p * rkT_k + (p - 1) * (N + 1) * d_k


def pr_order_exponent(p: int, r: int, rk_k: int, N: int, d_k: int) -> int:
    """Base-p log of the bound on #(Cl_K tensor Z/p^r)."""
    if r < 1:
        raise ValueError("r must be >= 1")
    _nonneg(rk_k, N, d_k)
    return r * p * rk_k + r * (p - 1) * (N + 2) * d_k


@dataclass
class LevelBounds:
    i: int
    d_k: int
    N: int
    rk_Cl_bound: int
    rk_A_bound: int
    rk_T_bound: int
    order_exponent_pr: dict[int, int]


@dataclass
class RankBoundReport:
    spec: TowerSpec
    r_values: list[int]
    seeds: dict[str, int]
    levels: list[LevelBounds]
    flags: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        s = self.spec
        return {
            "inputs": {
                "p": s.p,
                "e": s.e,
                "d_kappa": s.d_kappa,
                "rho": s.rho,
                "tame": list(s.tame),
                "r": self.r_values,
                "leopoldt_assumed": s.leopoldt_assumed,
            },
            "seeds": self.seeds,
            "levels": [
                {
                    "i": lv.i,
                    "d_k": lv.d_k,
                    "N": lv.N,
                    "rk_Cl_bound": lv.rk_Cl_bound,
                    "rk_A_bound": lv.rk_A_bound,
                    "rk_T_bound": lv.rk_T_bound,
                    "order_exponent_pr": {str(r): v for r, v in lv.order_exponent_pr.items()},
                }
                for lv in self.levels
            ],
            "flags": self.flags,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def tower_report(spec: TowerSpec, r_values=(1,), seed_A: int | None = None,
                 seed_T: int | None = None) -> RankBoundReport:
    flags = []
    if seed_A is None:
        seed_A = spec.rho + spec.d_kappa + 1
        flags.append("default_seed_A")
    if seed_T is None:
        seed_T = spec.rho
        flags.append("default_seed_T")
    if spec.leopoldt_assumed:
        flags.append("leopoldt_assumed")
    r_values = sorted(set(r_values))
    rk_cl, rk_a, rk_t = spec.rho, seed_A, seed_T
    levels = []
    for i, N in enumerate(spec.tame, start=1):
        d = spec.base_degree(i)
        pr = {r: pr_order_exponent(spec.p, r, rk_cl, N, d) for r in r_values}
        rk_cl = class_rank_step(spec.p, rk_cl, N, d)
        rk_a = aram_rank_step(spec.p, rk_a, N, d)
        rk_t = torsion_rank_step(spec.p, rk_t, N, d)
        levels.append(LevelBounds(i, d, N, rk_cl, rk_a, rk_t, pr))
    seeds = {"Cl": spec.rho, "A": seed_A, "T": seed_T}
    return RankBoundReport(spec, r_values, seeds, levels, flags)


@dataclass(frozen=True)
class CertificateCheck:
    holds: bool
    margin: float


def check_epsilon_certificate(log_group_order: float, log_D: float, log_C: float,
                              epsilon: float) -> CertificateCheck:
    """Does #G <= C * sqrt(D)^eps hold?  Works in logs."""
    if log_D < 0:
        raise ValueError("log_D must be >= 0")
    margin = log_C + epsilon / 2 * log_D - log_group_order
    return CertificateCheck(margin >= 0, margin)


def hilbert_tower_log_disc(log_Dkappa: float, p: int, e: int) -> float:
    """Unramified p-tower: D_F = D_kappa^{p^e}."""
    return p**e * log_Dkappa
