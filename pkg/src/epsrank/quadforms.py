"""Positive definite binary quadratic forms: the ground-truth oracle for p = 2 over Q.

Class groups of imaginary quadratic fields are computed from reduced forms and
Gauss composition; genus theory predicts rk_2 Cl(D) = t - 1 with t the number of
primes dividing D.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

import numpy as np

from . import intmat
from .primes import CapExceeded, primes_up_to

DISC_CAP = 10**7


class QuadForm(NamedTuple):
    a: int
    b: int
    c: int

    @property
    def disc(self) -> int:
        return self.b * self.b - 4 * self.a * self.c

    def is_reduced(self) -> bool:
        a, b, c = self
        return abs(b) <= a <= c and (b >= 0 or (abs(b) != a and a != c))


class NonFundamental(ValueError):
    pass


def _xgcd(a, b):
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    return a, x0, y0


def _reduce(a, b, c):
    # normalize b into (-a, a]
    if not -a < b <= a:
        r = (a - b) // (2 * a)
        b, c = b + 2 * r * a, a * r * r + b * r + c
    while a > c:
        a, b, c = c, -b, a
        if not -a < b <= a:
            r = (a - b) // (2 * a)
            b, c = b + 2 * r * a, a * r * r + b * r + c
    if a == c and b < 0:
        b = -b
    return a, b, c


def reduce(f) -> QuadForm:
    a, b, c = f
    if b * b - 4 * a * c >= 0:
        raise ValueError("only negative discriminants are supported")
    if a <= 0:
        raise ValueError("form must be positive definite (a > 0)")
    return QuadForm(*_reduce(a, b, c))


def _compose(f, g):
    """Gauss composition of primitive forms of equal discriminant, reduced."""
    a1, b1, c1 = f
    a2, b2, c2 = g
    if a1 > a2:
        a1, b1, c1, a2, b2, c2 = a2, b2, c2, a1, b1, c1
    s = (b1 + b2) // 2
    n = b2 - s
    if a2 % a1 == 0:
        y1, d = 0, a1
    else:
        d, u, _ = _xgcd(a2, a1)
        y1 = u
    if s % d == 0:
        y2, x2, d1 = -1, 0, d
    else:
        d1, u, v = _xgcd(s, d)
        x2, y2 = u, -v
    v1, v2 = a1 // d1, a2 // d1
    r = (y1 * y2 * n - x2 * c2) % v1
    b3 = b2 + 2 * v2 * r
    a3 = v1 * v2
    c3 = (c2 * d1 + r * (b2 + v2 * r)) // v1
    return _reduce(a3, b3, c3)


def compose(f, g) -> QuadForm:
    if QuadForm(*f).disc != QuadForm(*g).disc:
        raise ValueError("forms have different discriminants")
    return QuadForm(*_compose(f, g))


def principal_form(D: int) -> QuadForm:
    k = D % 2
    return QuadForm(1, k, (k - D) // 4)


def inverse(f) -> QuadForm:
    a, b, c = f
    return QuadForm(*_reduce(a, -b, c))


def power(f, k: int) -> QuadForm:
    a, b, c = f
    D = b * b - 4 * a * c
    acc = tuple(principal_form(D))
    base = tuple(f)
    while k:
        if k & 1:
            acc = _compose(acc, base)
        base = _compose(base, base)
        k >>= 1
    return QuadForm(*acc)


def _squarefree(n: int) -> bool:
    q = 2
    while q * q <= n:
        if n % (q * q) == 0:
            return False
        q += 1
    return True


def fundamental_reason(D: int) -> str | None:
    """None if D < 0 is a fundamental discriminant, else the reason it is not."""
    if D >= 0:
        return f"{D} is not negative"
    if D % 4 == 1:
        return None if _squarefree(-D) else f"{D} is not squarefree"
    if D % 4 == 0:
        m = D // 4
        if m % 4 not in (2, 3):
            return f"{D}/4 = {m} is not 2 or 3 mod 4"
        return None if _squarefree(-m) else f"{D}/4 = {m} is not squarefree"
    return f"{D} is {D % 4} mod 4, not a discriminant"


def is_fundamental(D: int) -> bool:
    return fundamental_reason(D) is None


def _check_disc(D: int, cap: int) -> None:
    reason = fundamental_reason(D)
    if reason is not None:
        raise NonFundamental(f"non-fundamental discriminant: {reason}")
    if -D > cap:
        raise CapExceeded(f"|D| = {-D} exceeds cap {cap}")


def reduced_forms(D: int) -> list[QuadForm]:
    """All reduced primitive forms of discriminant D < 0, sorted."""
    out = []
    par = D % 2
    for a in range(1, math.isqrt(-D // 3) + 1):
        four_a = 4 * a
        for b in range(-a + 1, a + 1):
            if b % 2 != par:
                continue
            num = b * b - D
            if num % four_a:
                continue
            c = num // four_a
            if c < a or (a == c and b < 0):
                continue
            if math.gcd(math.gcd(a, b), c) == 1:
                out.append(QuadForm(a, b, c))
    return sorted(out)


def group_structure(forms, D: int):
    """Invariant factors of the group on `forms` (reduced, closed under composition).

    Grows a subgroup one generator at a time, records the relation
    g^m = (word in earlier generators), and reads the invariants off the
    Smith form of the relation matrix.
    """
    ident = tuple(principal_form(D))
    elems = {ident: ()}
    gens, relations = [], []
    for f in forms:
        f = tuple(f)
        if f in elems:
            continue
        k = len(gens)
        x, m = f, 1
        while x not in elems:
            x = _compose(x, f)
            m += 1
        word = elems[x]
        rel = [-e for e in word] + [0] * (k - len(word)) + [m]
        relations.append(rel)
        gens.append(f)
        new = dict(elems)
        g_i = ident
        for i in range(1, m):
            g_i = _compose(g_i, f)
            for y, vec in elems.items():
                new[_compose(g_i, y)] = vec + (0,) * (k - len(vec)) + (i,)
        elems = new
    if len(elems) != len(forms):
        raise ArithmeticError(f"generated {len(elems)} classes, expected {len(forms)}")
    k = len(gens)
    rows = [r + [0] * (k - len(r)) for r in relations]
    return intmat.abelian_invariants(rows, k) if k else [], gens


@dataclass
class FormClassGroup:
    D: int
    forms: list[QuadForm]
    h: int
    elementary_divisors: list[int]
    two_rank: int

    def ambiguous_forms(self) -> list[QuadForm]:
        return [f for f in self.forms if f.b == 0 or f.b == f.a or f.a == f.c]

    def to_dict(self) -> dict:
        return {"D": self.D, "h": self.h, "elementary_divisors": self.elementary_divisors,
                "two_rank": self.two_rank, "forms": [list(f) for f in self.forms]}


def _make_group(D: int, forms) -> FormClassGroup:
    divisors, _ = group_structure(forms, D)
    two_rank = sum(1 for d in divisors if d % 2 == 0)
    return FormClassGroup(D, list(forms), len(forms), divisors, two_rank)


def class_group(D: int, cap: int = DISC_CAP) -> FormClassGroup:
    _check_disc(D, cap)
    return _make_group(D, reduced_forms(D))


def prime_divisors(n: int) -> list[int]:
    n = abs(n)
    out = []
    q = 2
    while q * q <= n:
        if n % q == 0:
            out.append(q)
            while n % q == 0:
                n //= q
        q += 1 if q == 2 else 2
    if n > 1:
        out.append(n)
    return out


def ramified_count(D: int) -> int:
    return len(prime_divisors(D))


@dataclass(frozen=True)
class GenusCheck:
    D: int
    predicted: int
    observed: int
    ambiguous: int

    @property
    def passed(self) -> bool:
        return self.predicted == self.observed and self.ambiguous == 2**self.predicted


def genus_check(D: int, group: FormClassGroup | None = None) -> GenusCheck:
    group = group or class_group(D)
    t = ramified_count(D)
    return GenusCheck(D, t - 1, group.two_rank, len(group.ambiguous_forms()))


def chevalley_ambiguous(h_k: int, p: int, t: int, unit_norm_index: int) -> Fraction:
    """h_k p^{t-1} / (E_k : E_k cap N K^x); raises if the result is not an integer."""
    if h_k < 1 or t < 1 or unit_norm_index < 1:
        raise ValueError("need h_k >= 1, t >= 1, index >= 1")
    val = Fraction(h_k * p ** (t - 1), unit_norm_index)
    if val.denominator != 1:
        raise ArithmeticError(f"non-integral ambiguous class number {val}: inconsistent inputs")
    return val


# ---------------------------------------------------------------- range scans


def squarefree_mask(X: int) -> np.ndarray:
    sf = np.ones(X + 1, dtype=bool)
    sf[0] = False
    for q in primes_up_to(math.isqrt(X)):
        sf[int(q) ** 2 :: int(q) ** 2] = False
    return sf


def fundamental_mask(X: int) -> np.ndarray:
    """mask[n] is True iff -n is a fundamental discriminant (0 < n <= X)."""
    sf = squarefree_mask(X)
    n = np.arange(X + 1)
    odd = (n % 4 == 3) & sf
    quarter = n // 4
    even = (n % 4 == 0) & np.isin(quarter % 4, (1, 2)) & sf[quarter]
    mask = odd | even
    mask[0] = False
    return mask


def omega_table(X: int) -> np.ndarray:
    """Number of distinct prime divisors of each n <= X."""
    om = np.zeros(X + 1, dtype=np.int64)
    for q in primes_up_to(X):
        om[int(q) :: int(q)] += 1
    return om


def ambiguous_count_table(X: int) -> np.ndarray:
    """amb[n] = number of reduced forms of discriminant -n with b = 0, b = a or a = c."""
    amb = np.zeros(X + 1, dtype=np.int64)
    parts = []
    for a in range(1, math.isqrt(X // 4) + 1):  # b = 0, c >= a
        c = np.arange(a, X // (4 * a) + 1, dtype=np.int64)
        parts.append(4 * a * c)
    for a in range(1, math.isqrt(X // 3) + 1):  # b = a, c >= a
        c = np.arange(a, (X + a * a) // (4 * a) + 1, dtype=np.int64)
        parts.append(4 * a * c - a * a)
    for a in range(2, math.isqrt(X // 3) + 2):  # a = c, 0 < b < a
        b = np.arange(1, a, dtype=np.int64)
        n = 4 * a * a - b * b
        parts.append(n[n <= X])
    allv = np.concatenate(parts)
    amb += np.bincount(allv, minlength=X + 1)[: X + 1]
    return amb


def two_rank_table(X: int):
    """(mask, two_rank) for all n <= X, from ambiguous-class counts of fundamental -n."""
    mask = fundamental_mask(X)
    amb = ambiguous_count_table(X)
    sel = amb[mask]
    if np.any(sel & (sel - 1)):
        bad = np.flatnonzero(mask)[np.flatnonzero(sel & (sel - 1))[0]]
        raise ArithmeticError(f"ambiguous count {amb[bad]} for D=-{bad} is not a power of 2")
    rank = np.zeros(X + 1, dtype=np.int64)
    rank[mask] = np.round(np.log2(sel)).astype(np.int64)
    return mask, rank


def all_reduced_forms(X: int, mask: np.ndarray | None = None):
    """Reduced forms of every discriminant -n with n <= X (restricted to mask), grouped by n."""
    A, B, C = [], [], []
    for a in range(1, math.isqrt(X // 3) + 1):
        for b in range(-a + 1, a + 1):
            lo = a + 1 if b < 0 else a
            hi = (X + b * b) // (4 * a)
            if hi < lo:
                continue
            c = np.arange(lo, hi + 1, dtype=np.int64)
            A.append(np.full(c.size, a, dtype=np.int64))
            B.append(np.full(c.size, b, dtype=np.int64))
            C.append(c)
    a, b, c = (np.concatenate(v) for v in (A, B, C))
    n = 4 * a * c - b * b
    keep = n > 0
    if mask is not None:
        keep &= mask[np.minimum(n, X)] & (n <= X)
    a, b, c, n = a[keep], b[keep], c[keep], n[keep]
    order = np.lexsort((c, b, a, n))
    a, b, c, n = a[order], b[order], c[order], n[order]
    starts = np.flatnonzero(np.r_[True, n[1:] != n[:-1]])
    ends = np.r_[starts[1:], n.size]
    for s, e in zip(starts, ends):
        yield -int(n[s]), [QuadForm(int(x), int(y), int(z)) for x, y, z in zip(a[s:e], b[s:e], c[s:e])]


def class_groups_in_range(X: int):
    """FormClassGroup for every fundamental -X <= D < 0, in order of increasing |D|."""
    mask = fundamental_mask(X)
    for D, forms in all_reduced_forms(X, mask):
        yield _make_group(D, forms)


@dataclass
class GenusScan:
    rows: list[tuple[int, int, int, int, bool]]  # D, h, two_rank, t, pass

    @property
    def failures(self):
        return [r for r in self.rows if not r[4]]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["D", "h", "two_rank", "t", "pass"])
        for D, h, rk, t, ok in self.rows:
            w.writerow([D, h, rk, t, int(ok)])
        return buf.getvalue()


def genus_scan(X: int) -> GenusScan:
    om = omega_table(X)
    rows = []
    for G in class_groups_in_range(X):
        t = int(om[-G.D])
        amb = len(G.ambiguous_forms())
        ok = G.two_rank == t - 1 and amb == 2 ** (t - 1)
        rows.append((G.D, G.h, G.two_rank, t, ok))
    return GenusScan(rows)


@dataclass
class EpsilonScan:
    epsilon: float
    log_C: float
    count: int
    empirical_sup: float
    arg_sup: int
    violations: list[int]

    def to_dict(self) -> dict:
        return {"epsilon": self.epsilon, "log_C": self.log_C, "count": self.count,
                "empirical_sup": self.empirical_sup, "arg_sup": self.arg_sup,
                "margin": self.log_C - self.empirical_sup, "violations": self.violations}


def epsilon_scan(D_min: int, D_max: int, epsilon: float, log_C: float,
                 cap: int = DISC_CAP) -> EpsilonScan:
    """sup of two_rank log 2 - (eps/2) log|D| over fundamental D in [D_min, D_max]."""
    if not D_min <= D_max < 0:
        raise ValueError("need D_min <= D_max < 0")
    X = -D_min
    if X > cap:
        raise CapExceeded(f"|D| = {X} exceeds cap {cap}")
    mask, rank = two_rank_table(X)
    n = np.flatnonzero(mask)
    n = n[n >= -D_max]
    if n.size == 0:
        raise ValueError("no fundamental discriminants in range")
    vals = rank[n] * math.log(2) - epsilon / 2 * np.log(n.astype(float))
    i = int(np.argmax(vals))
    viol = sorted((-n[vals > log_C]).tolist(), reverse=True)
    return EpsilonScan(epsilon, log_C, int(n.size), float(vals[i]), -int(n[i]), viol)
