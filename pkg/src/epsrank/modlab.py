"""Finite Z_p[zeta]-modules as integer-lattice quotients, and their (1 - sigma)-filtration.

A block Z[zeta] is Z^{p-1} with basis 1, zeta, ..., zeta^{p-2}; sigma is
multiplication by zeta (companion matrix of the p-th cyclotomic polynomial).
The summand Z_p[zeta]/P^n, P = (p, zeta - 1), is Z^{p-1} / P^n.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from . import intmat
from .primes import CapExceeded, is_prime

ENUM_CAP = 10**7
MAX_RANK = 256


@dataclass(frozen=True)
class CyclotomicModule:
    p: int
    lengths: tuple[int, ...]

    def __post_init__(self):
        if not is_prime(self.p):
            raise ValueError(f"p={self.p} is not prime")
        if any(n < 1 for n in self.lengths):
            raise ValueError("lengths must be positive")
        object.__setattr__(self, "lengths", tuple(sorted(self.lengths)))

    @property
    def log_p_order(self) -> int:
        return sum(self.lengths)


@dataclass
class ConcreteModule:
    p: int
    rank: int
    relations: list[list[int]]  # HNF rows of the relation lattice L
    sigma: list[list[int]]  # acts on column vectors
    lengths: tuple[int, ...] = ()

    @property
    def order(self) -> int:
        return intmat.index(self.relations, self.rank)

    def power_of_one_minus_sigma(self, h: int):
        n = self.rank
        ims = [[int(i == j) - self.sigma[i][j] for j in range(n)] for i in range(n)]
        return intmat.matpow(ims, h)

    def norm_element(self):
        """nu = 1 + sigma + ... + sigma^{p-1}."""
        n = self.rank
        acc = [[0] * n for _ in range(n)]
        P = intmat.identity(n)
        for _ in range(self.p):
            acc = [[a + b for a, b in zip(r, s)] for r, s in zip(acc, P)]
            P = intmat.matmul(self.sigma, P)
        return acc


def cyclotomic_block(p: int):
    """Matrix of multiplication by zeta on Z^{p-1}."""
    n = p - 1
    S = [[0] * n for _ in range(n)]
    for i in range(n - 1):
        S[i + 1][i] = 1
    for i in range(n):
        S[i][n - 1] = -1
    return S


def _mult_matrix(p, a):
    """Matrix of multiplication by sum a_i zeta^i."""
    S = cyclotomic_block(p)
    n = p - 1
    acc = [[0] * n for _ in range(n)]
    P = intmat.identity(n)
    for c in a:
        if c:
            acc = [[x + c * y for x, y in zip(r, s)] for r, s in zip(acc, P)]
        P = intmat.matmul(S, P)
    return acc


def prime_ideal_gens(p: int):
    """Z-generators of P = (p, zeta - 1): p e_i and (zeta - 1) e_i."""
    n = p - 1
    S = cyclotomic_block(p)
    gens = []
    for i in range(n):
        gens.append([p * int(j == i) for j in range(n)])
        gens.append([S[j][i] - int(j == i) for j in range(n)])
    return gens


def ideal_power(p: int, k: int):
    """HNF rows of P^k, built by iterated lattice products."""
    n = p - 1
    basis = intmat.identity(n)
    P = intmat.hnf(prime_ideal_gens(p), n)
    for _ in range(k):
        prods = []
        for a in basis:
            Ma = _mult_matrix(p, a)
            prods.extend(intmat.matvec(Ma, b) for b in P)
        basis = intmat.hnf(prods, n)
    return basis


def build(cm: CyclotomicModule, max_rank: int = MAX_RANK) -> ConcreteModule:
    p, s = cm.p, len(cm.lengths)
    b = p - 1
    n = b * s
    if n > max_rank:
        raise CapExceeded(f"lattice rank {n} exceeds cap {max_rank}")
    S = cyclotomic_block(p)
    sigma = [[0] * n for _ in range(n)]
    rels = []
    powers = {}
    for j, length in enumerate(cm.lengths):
        off = j * b
        for u in range(b):
            for v in range(b):
                sigma[off + u][off + v] = S[u][v]
        if length not in powers:
            powers[length] = ideal_power(p, length)
        for row in powers[length]:
            rels.append([0] * off + row + [0] * (n - off - b))
    return ConcreteModule(p, n, intmat.hnf(rels, n), sigma, cm.lengths)


def _log_p(x: int, p: int) -> int:
    k = 0
    while x % p == 0 and x > 1:
        x //= p
        k += 1
    if x != 1:
        raise ArithmeticError(f"{x} * p^{k} is not a power of {p}")
    return k


@dataclass
class FiltrationStep:
    h: int
    order: int
    p_rank: int
    quotient_order: int | None  # #(M*_{h+1} / M*_h); None on the last row


@dataclass
class Filtration:
    mode: str
    steps: list[FiltrationStep]

    def orders(self):
        return [st.order for st in self.steps]

    def to_dict(self):
        return {"mode": self.mode,
                "steps": [{"h": st.h, "order": st.order, "p_rank": st.p_rank,
                           "quotient_order": st.quotient_order} for st in self.steps]}


class Structural:
    """Kernel lattices K_h = {x : (1 - sigma)^h x in L} and friends."""

    def __init__(self, m: ConcreteModule):
        self.m = m
        self._ker = {}

    def kernel(self, h: int):
        if h not in self._ker:
            if h == 0:
                self._ker[h] = self.m.relations
            else:
                phi = self.m.power_of_one_minus_sigma(h)
                self._ker[h] = intmat.preimage(phi, self.m.relations, self.m.rank)
        return self._ker[h]

    def sub_order(self, K) -> int:
        return self.m.order // intmat.index(K, self.m.rank)

    def p_rank(self, K) -> int:
        n, p = self.m.rank, self.m.p
        pK_plus_L = intmat.hnf([[p * a for a in row] for row in K] + self.m.relations, n)
        return _log_p(intmat.index(pK_plus_L, n) // intmat.index(K, n), p)

    def torsion(self, k: int):
        """{x : k x in L}."""
        n = self.m.rank
        phi = [[k * int(i == j) for j in range(n)] for i in range(n)]
        return intmat.preimage(phi, self.m.relations, n)


class Enumerated:
    """All elements of Z^n / L as canonical HNF representatives (numpy rows)."""

    def __init__(self, m: ConcreteModule, cap: int = ENUM_CAP):
        if m.order > cap:
            raise CapExceeded(f"module order {m.order} exceeds enumeration cap {cap}")
        self.m = m
        self.H = np.array(m.relations, dtype=np.int64)
        diag = [int(self.H[i, i]) for i in range(m.rank)]
        grids = np.meshgrid(*[np.arange(d, dtype=np.int64) for d in diag], indexing="ij")
        self.elements = np.stack([g.ravel() for g in grids], axis=1)

    def reduce(self, X, H=None):
        H = self.H if H is None else H
        X = X.copy()
        for i in range(H.shape[0]):
            q = np.floor_divide(X[:, i], H[i, i])
            X -= q[:, None] * H[i][None, :]
        return X

    def apply(self, A, X=None):
        X = self.elements if X is None else X
        return self.reduce(X @ np.array(A, dtype=np.int64).T)

    def one_minus_sigma(self):
        n = self.m.rank
        return [[int(i == j) - self.m.sigma[i][j] for j in range(n)] for i in range(n)]

    def kernel_masks(self, h_max: int):
        """masks[h][x] is True iff (1 - sigma)^h x = 0."""
        T = self.one_minus_sigma()
        Y = self.elements
        masks = [np.all(Y == 0, axis=1)]
        for _ in range(h_max):
            Y = self.apply(T, Y)
            masks.append(np.all(Y == 0, axis=1))
        return masks

    def count_killed_by(self, k: int, X=None) -> int:
        X = self.elements if X is None else X
        return int(np.count_nonzero(np.all(self.reduce(k * X) == 0, axis=1)))


def _h_range(m: ConcreteModule) -> int:
    return max(m.lengths, default=0) + 1


def filtration(m: ConcreteModule, mode: str = "structural", h_max: int | None = None,
               cap: int = ENUM_CAP) -> Filtration:
    if h_max is None:
        h_max = _h_range(m)
    if mode == "structural":
        st = Structural(m)
        orders = [st.sub_order(st.kernel(h)) for h in range(h_max + 1)]
        ranks = [st.p_rank(st.kernel(h)) for h in range(h_max + 1)]
    elif mode == "bruteforce":
        en = Enumerated(m, cap)
        masks = en.kernel_masks(h_max)
        orders = [int(np.count_nonzero(mk)) for mk in masks]
        ranks = [_log_p(en.count_killed_by(m.p, en.elements[mk]), m.p) for mk in masks]
    else:
        raise ValueError(f"unknown mode {mode!r}")
    steps = [
        FiltrationStep(h, orders[h], ranks[h], orders[h + 1] // orders[h] if h < h_max else None)
        for h in range(h_max + 1)
    ]
    return Filtration(mode, steps)


def predicted_orders(p: int, lengths, h_max: int):
    return [p ** sum(min(h, n) for n in lengths) for h in range(h_max + 1)]


@dataclass
class CheckResult:
    ok: bool
    data: dict = field(default_factory=dict)
    witness: int | None = None


def verify_order_decrease(m: ConcreteModule, filt: Filtration | None = None) -> CheckResult:
    filt = filt or filtration(m)
    q = [st.quotient_order for st in filt.steps if st.quotient_order is not None]
    first = filt.steps[1].order if len(filt.steps) > 1 else 1
    for h, qh in enumerate(q):
        if qh > first or (h and qh > q[h - 1]):
            return CheckResult(False, {"quotient_orders": q, "order_M1": first}, witness=h)
    return CheckResult(True, {"quotient_orders": q, "order_M1": first})


def verify_rank_bound(m: ConcreteModule) -> CheckResult:
    st = Structural(m)
    p = m.p
    rk_M = _log_p(intmat.index(intmat.hnf(m.relations + [[p * int(i == j) for j in range(m.rank)]
                                                          for i in range(m.rank)], m.rank), m.rank), p)
    rk_M1 = st.p_rank(st.kernel(1))
    p_torsion_is_Mp1 = intmat.hnf(st.torsion(p), m.rank) == st.kernel(p - 1)
    predicted = sum(min(n, p - 1) for n in m.lengths)
    ok = rk_M <= (p - 1) * rk_M1 and p_torsion_is_Mp1 and rk_M == predicted
    return CheckResult(ok, {"rk_M": rk_M, "rk_M1": rk_M1, "bound": (p - 1) * rk_M1,
                            "predicted_rk": predicted, "M[p]=M*_{p-1}": p_torsion_is_Mp1})


def verify_pr_torsion(m: ConcreteModule, r: int) -> CheckResult:
    st = Structural(m)
    p = m.p
    h = r * (p - 1)
    n_tors = st.sub_order(st.torsion(p**r))
    n_h = st.sub_order(st.kernel(h))
    n_1 = st.sub_order(st.kernel(1))
    bound = n_1**h
    ok = n_tors == n_h and n_tors <= bound
    return CheckResult(ok, {"r": r, "order_M[p^r]": n_tors, "order_M*_h": n_h, "bound": bound})


def verify_norm_annihilation(m: ConcreteModule) -> CheckResult:
    """nu kills the quotient and sigma^p is the identity on it."""
    nu = m.norm_element()
    sp = intmat.matpow(m.sigma, m.p)
    n = m.rank
    cols_nu = intmat.transpose(nu)
    cols_sp = [[sp[i][j] - int(i == j) for i in range(n)] for j in range(n)]
    ok = all(intmat.contains(m.relations, c) for c in cols_nu + cols_sp)
    return CheckResult(ok)


def verify_injectivity(m: ConcreteModule, h_max: int | None = None) -> CheckResult:
    """(1 - sigma): M*_{h+1}/M*_h -> M*_h/M*_{h-1} has trivial kernel, for h >= 1.

    The kernel is computed as the lattice {x : (1 - sigma) x in K_{h-1}}
    from K_{h-1} alone, then compared with K_h.
    """
    st = Structural(m)
    h_max = h_max or _h_range(m)
    T = m.power_of_one_minus_sigma(1)
    for h in range(1, h_max):
        pre = intmat.preimage(T, st.kernel(h - 1), m.rank)
        # kernel of the induced map is pre / K_h; HNF bases are canonical
        if pre != st.kernel(h):
            return CheckResult(False, witness=h)
    return CheckResult(True)


def verify_injectivity_enumerated(m: ConcreteModule, cap: int = ENUM_CAP) -> CheckResult:
    """Element-level check: distinct cosets of M*_h in M*_{h+1} have distinct images mod M*_{h-1}."""
    en = Enumerated(m, cap)
    st = Structural(m)
    h_max = _h_range(m)
    masks = en.kernel_masks(h_max)
    T = en.one_minus_sigma()
    for h in range(1, h_max):
        X = en.elements[masks[h + 1]]
        Kh = np.array(st.kernel(h), dtype=np.int64)
        Kh_1 = np.array(st.kernel(h - 1), dtype=np.int64)
        cosets, idx = np.unique(en.reduce(X, Kh), axis=0, return_index=True)
        reps = X[idx]
        images = en.reduce(reps @ np.array(T, dtype=np.int64).T, Kh_1)
        if len(np.unique(images, axis=0)) != len(cosets):
            return CheckResult(False, witness=h)
    return CheckResult(True)


def length_multisets(max_len: int, max_s: int):
    for s in range(1, max_s + 1):
        yield from itertools.combinations_with_replacement(range(1, max_len + 1), s)


def check_module(cm: CyclotomicModule, r_max: int, cap: int = ENUM_CAP) -> list[str]:
    """Run every verifier on one module; returns a list of failure labels."""
    m = build(cm)
    fails = []
    if m.order != cm.p ** cm.log_p_order:
        fails.append("order")
    if not verify_norm_annihilation(m).ok:
        fails.append("norm")
    filt = filtration(m, "structural")
    if filt.orders() != predicted_orders(cm.p, cm.lengths, len(filt.steps) - 1):
        fails.append("structural_prediction")
    if not verify_order_decrease(m, filt).ok:
        fails.append("order_decrease")
    if not verify_rank_bound(m).ok:
        fails.append("rank_bound")
    for r in range(1, r_max + 1):
        if not verify_pr_torsion(m, r).ok:
            fails.append(f"pr_torsion_r{r}")
    if not verify_injectivity(m).ok:
        fails.append("injectivity")
    if m.order <= cap:
        brute = filtration(m, "bruteforce", cap=cap)
        if [(s.order, s.p_rank) for s in brute.steps] != [(s.order, s.p_rank) for s in filt.steps]:
            fails.append("mode_agreement")
        if not verify_injectivity_enumerated(m, cap).ok:
            fails.append("injectivity_enumerated")
    return fails


def exhaustive_check(p: int, max_len: int, max_s: int, r_max: int = 1, cap: int = ENUM_CAP) -> dict:
    modules = 0
    violations = []
    brute = 0
    for lengths in length_multisets(max_len, max_s):
        cm = CyclotomicModule(p, lengths)
        modules += 1
        if cm.p ** cm.log_p_order <= cap:
            brute += 1
        for f in check_module(cm, r_max, cap):
            violations.append({"lengths": list(lengths), "check": f})
    return {"p": p, "max_len": max_len, "max_s": max_s, "r_max": r_max, "modules": modules,
            "bruteforce_compared": brute, "violations": violations}


def modlab_report(p: int, lengths, mode: str = "both", r: int = 1, cap: int = ENUM_CAP) -> dict:
    m = build(CyclotomicModule(p, tuple(lengths)))
    out = {"p": p, "lengths": sorted(lengths), "order": m.order}
    if mode in ("structural", "both"):
        out["structural"] = filtration(m, "structural").to_dict()
    if mode in ("bruteforce", "both"):
        out["bruteforce"] = filtration(m, "bruteforce", cap=cap).to_dict()
    if mode == "both":
        out["modes_agree"] = out["structural"]["steps"] == out["bruteforce"]["steps"]
    out["order_decrease"] = verify_order_decrease(m).ok
    rb = verify_rank_bound(m)
    out["rank_bound"] = {"holds": rb.ok, **{k: v for k, v in rb.data.items()}}
    pr = verify_pr_torsion(m, r)
    out["pr_torsion"] = {"holds": pr.ok, **pr.data}
    return out

