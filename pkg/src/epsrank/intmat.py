"""Exact integer linear algebra on lists of Python ints.

Lattices are given by generating vectors (rows).  `hnf` returns the row-style
Hermite normal form: upper echelon, positive pivots, entries above each pivot
reduced into [0, pivot).
"""
from __future__ import annotations

from math import prod


def identity(n):
    return [[int(i == j) for j in range(n)] for i in range(n)]


def matmul(A, B):
    Bt = list(zip(*B))
    return [[sum(a * b for a, b in zip(row, col)) for col in Bt] for row in A]


def matvec(A, x):
    return [sum(a * b for a, b in zip(row, x)) for row in A]


def matpow(A, k):
    R = identity(len(A))
    while k:
        if k & 1:
            R = matmul(R, A)
        A = matmul(A, A)
        k >>= 1
    return R


def transpose(A):
    return [list(c) for c in zip(*A)]


def _echelon(rows, ncols, track=0):
    """Row echelon over Z on the first `ncols` columns.

    Extra trailing columns (the last `track` entries) ride along unreduced.
    Returns (pivot_rows, pivot_cols, zero_rows).
    """
    pool = [list(r) for r in rows]
    pivots, pcols = [], []
    for c in range(ncols):
        active = [r for r in pool if r[c] != 0]
        if not active:
            continue
        rest = [r for r in pool if r[c] == 0]
        while len(active) > 1:
            active.sort(key=lambda r: abs(r[c]))
            piv = active[0]
            nxt = [piv]
            for r in active[1:]:
                q = r[c] // piv[c]
                r = [a - q * b for a, b in zip(r, piv)]
                (nxt if r[c] != 0 else rest).append(r)
            active = nxt
        piv = active[0]
        if piv[c] < 0:
            piv = [-a for a in piv]
        pivots.append(piv)
        pcols.append(c)
        pool = rest
    zero_rows = [r for r in pool if not any(r[:ncols])]
    return pivots, pcols, zero_rows


def hnf(gens, n):
    """Row HNF basis of the lattice spanned by `gens` in Z^n."""
    rows = [list(map(int, g)) for g in gens if any(g)]
    if not rows:
        return []
    H, pcols, _ = _echelon(rows, n)
    for i in range(len(H)):
        c = pcols[i]
        for k in range(i):
            q = H[k][c] // H[i][c]
            if q:
                H[k] = [a - q * b for a, b in zip(H[k], H[i])]
    return H


def is_full_rank(H, n):
    return len(H) == n


def index(H, n):
    """[Z^n : L] for an HNF basis; 0 signals infinite index."""
    if len(H) < n:
        return 0
    return prod(H[i][i] for i in range(n))


def reduce_mod(x, H):
    """Canonical representative of x modulo a full-rank HNF lattice."""
    x = list(x)
    for i, row in enumerate(H):
        q = x[i] // row[i]
        if q:
            x = [a - q * b for a, b in zip(x, row)]
    return x


def contains(H, x):
    x = list(x)
    for row in H:
        c = next(j for j, a in enumerate(row) if a)
        if x[c] % row[c]:
            return False
        q = x[c] // row[c]
        x = [a - q * b for a, b in zip(x, row)]
    return not any(x)


def integer_kernel(A, m):
    """Basis of {x in Z^m : A x = 0} for an integer matrix A with m columns."""
    nr = len(A)
    rows = [[A[i][j] for i in range(nr)] + [int(j == k) for k in range(m)] for j in range(m)]
    _, _, zero_rows = _echelon(rows, nr, track=m)
    return hnf([r[nr:] for r in zero_rows], m)


def preimage(phi, H, n):
    """HNF of {x in Z^n : phi x in L}, L given by HNF rows H (full rank)."""
    # columns of [phi | -B^T]; kernel vectors (x, y) have phi x = B^T y
    k = len(H)
    A = [list(phi[i]) + [-H[j][i] for j in range(k)] for i in range(n)]
    ker = integer_kernel(A, n + k)
    return hnf([v[:n] for v in ker], n)


def image_plus(phi, H, n):
    """HNF of phi(Z^n) + L."""
    return hnf(transpose(phi) + [list(r) for r in H], n)


def smith_invariants(A):
    """Nonzero Smith invariants d_1 | d_2 | ... of an integer matrix."""
    M = [list(map(int, r)) for r in A]
    if not M or not M[0]:
        return []
    nr, nc = len(M), len(M[0])
    out = []
    t = 0
    while t < min(nr, nc):
        entries = [(abs(M[i][j]), i, j) for i in range(t, nr) for j in range(t, nc) if M[i][j]]
        if not entries:
            break
        _, i, j = min(entries)
        M[t], M[i] = M[i], M[t]
        for row in M:
            row[t], row[j] = row[j], row[t]
        while True:
            piv = M[t][t]
            dirty = False
            for i in range(t + 1, nr):
                q = M[i][t] // piv
                if q:
                    M[i] = [a - q * b for a, b in zip(M[i], M[t])]
                if M[i][t]:
                    dirty = True
            for j in range(t + 1, nc):
                q = M[t][j] // piv
                if q:
                    for row in M:
                        row[j] -= q * row[t]
                if M[t][j]:
                    dirty = True
            if not dirty:
                bad = next(((i, j) for i in range(t + 1, nr) for j in range(t + 1, nc)
                            if M[i][j] % piv), None)
                if bad is None:
                    break
                M[t] = [a + b for a, b in zip(M[t], M[bad[0]])]
                continue
            # move the smallest nonzero entry of row/column t to the pivot
            cands = [(abs(M[i][t]), i, t) for i in range(t, nr) if M[i][t]]
            cands += [(abs(M[t][j]), t, j) for j in range(t, nc) if M[t][j]]
            _, i, j = min(cands)
            M[t], M[i] = M[i], M[t]
            for row in M:
                row[t], row[j] = row[j], row[t]
        out.append(abs(M[t][t]))
        t += 1
    return out


def abelian_invariants(relations, n):
    """Invariant factors (> 1) of Z^n / <relations>."""
    inv = smith_invariants(relations) if relations else []
    if len(inv) < n:
        raise ValueError("relations do not present a finite group")
    return [d for d in inv if d != 1]
