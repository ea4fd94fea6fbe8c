"""Explicit epsilon-constants: X(N), Y(N), N0, log c (closed and sharp), tower composition.

With t(N) = log N!, the step function is

    X(N) = r (p-1) (N+2) d_k log p - eps (p-1)/2 t(N)

and the constant c with p^{r(p-1)(N+2)d_k} <= c * (N!)^{eps(p-1)/2} for all N >= 0
is log c = sup_N X(N).  Consecutive differences

    X(N+1) - X(N) = (p-1) [r d_k log p - (eps/2) log(N+1)]

are strictly decreasing, so X is unimodal and its integer maximum sits where the
difference changes sign, i.e. next to N0 = p^{2 r d_k / eps}.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

from .primes import CompensatedSum, first_primes, is_prime

EXP_LIMIT = 700.0
SEARCH_CAP = 10**8
# log N! is summed term by term up to here, lgamma beyond
FSUM_LOGFACT_MAX = 2_000_000
# largest exponent bit-size tried for exact tie decisions
EXACT_BITS_MAX = 1 << 22


@dataclass(frozen=True)
class EpsilonParams:
    p: int
    d_k: int
    epsilon: float
    r: int = 1

    def __post_init__(self):
        if not is_prime(self.p):
            raise ValueError(f"p={self.p} is not prime")
        if self.d_k < 1:
            raise ValueError("d_k must be >= 1")
        if not (self.epsilon > 0 and math.isfinite(self.epsilon)):
            raise ValueError("epsilon must be a positive finite real")
        if self.r < 1:
            raise ValueError("r must be >= 1")

    @property
    def log_n0(self) -> float:
        return 2 * self.r * self.d_k * math.log(self.p) / self.epsilon


@dataclass(frozen=True)
class Astronomical:
    """Stand-in for a quantity too large for a double; carries its natural log."""

    log_value: float

    def __float__(self):
        return math.inf


def log_factorial(N: int) -> float:
    if N < 0:
        raise ValueError("N must be >= 0")
    if N <= FSUM_LOGFACT_MAX:
        return math.fsum(map(math.log, range(2, N + 1)))
    return math.lgamma(N + 1)


def x_of_n(params: EpsilonParams, N: int, t_N: float) -> float:
    if t_N < 0:
        raise ValueError("t_N = log N! must be >= 0")
    p = params.p
    return params.r * (p - 1) * (N + 2) * params.d_k * math.log(p) - params.epsilon * (p - 1) / 2 * t_N


def y_of_n(params: EpsilonParams, N: float) -> float:
    if N < 1:
        raise ValueError("Y(N) is defined for N >= 1")
    p, eps = params.p, params.epsilon
    half = eps * (p - 1) / 2
    return -half * N * math.log(N) + N * (params.r * (p - 1) * params.d_k * math.log(p) + half)


def n0(params: EpsilonParams, exp_limit: float = EXP_LIMIT) -> float | Astronomical:
    """Stationary point of Y: N0 = p^{2 r d_k / eps}."""
    if params.log_n0 > exp_limit:
        return Astronomical(params.log_n0)
    return float(params.p) ** (2 * params.r * params.d_k / params.epsilon)


def log_c_closed(params: EpsilonParams, exp_limit: float = EXP_LIMIT) -> float | Astronomical:
    """(p-1)/2 * eps * N0, the continuous maximum of Y."""
    scale = (params.p - 1) / 2 * params.epsilon
    N = n0(params, exp_limit)
    if isinstance(N, Astronomical):
        return Astronomical(math.log(scale) + N.log_value)
    return scale * N


def closed_correction(params: EpsilonParams) -> float:
    """Additive gap 2 r (p-1) d_k log p between sup X and sup Y.

    Uses log N! >= N log N - N + 1 for N >= 1, so X(N) <= Y(N) + 2 r (p-1) d_k log p.
    """
    return 2 * params.r * (params.p - 1) * params.d_k * math.log(params.p)


def _rational(x: float) -> Fraction | None:
    f = Fraction(repr(x))
    return f if f.denominator <= 10**6 else None


def increment_sign(params: EpsilonParams, N: int) -> int:
    """Sign of X(N+1) - X(N), decided exactly when possible.

    X(N+1) - X(N) has the sign of p^{2 r d_k} - (N+1)^eps; with eps = a/b this
    compares p^{2 r d_k b} against (N+1)^a in integers.
    """
    lhs = 2 * params.r * params.d_k * math.log(params.p)
    rhs = params.epsilon * math.log(N + 1)
    if abs(lhs - rhs) > 1e-9 * max(lhs, rhs, 1.0):
        return 1 if lhs > rhs else -1
    eps = _rational(params.epsilon)
    if eps is not None:
        a, b = eps.numerator, eps.denominator
        bits = max(2 * params.r * params.d_k * b * params.p.bit_length(), a * (N + 1).bit_length())
        if bits <= EXACT_BITS_MAX:
            u = params.p ** (2 * params.r * params.d_k * b)
            v = (N + 1) ** a
            return (u > v) - (u < v)
    return 0 if abs(lhs - rhs) <= 1e-13 * max(lhs, rhs, 1.0) else (1 if lhs > rhs else -1)


@dataclass
class SharpConstant:
    value: float
    argmax: list[int]
    search_range: tuple[int, int]
    bound_only: bool = False


def _search_hi(params: EpsilonParams) -> float:
    N = n0(params)
    return math.inf if isinstance(N, Astronomical) else math.ceil(N) + 1


def log_c_sharp(params: EpsilonParams, cap: int = SEARCH_CAP) -> SharpConstant:
    """Integer maximum of X over [0, ceil(N0)+1] with exact log-factorials."""
    hi = _search_hi(params)
    if hi > cap:
        closed = log_c_closed(params)
        value = math.inf if isinstance(closed, Astronomical) else closed
        return SharpConstant(value, [], (0, cap), bound_only=True)
    hi = int(hi)
    # first N with a non-positive increment is the (smallest) argmax
    guess = max(0, int(math.ceil(n0(params))) - 3)
    while guess > 0 and increment_sign(params, guess - 1) <= 0:
        guess -= 1
    while increment_sign(params, guess) > 0:
        guess += 1
    argmax = [guess]
    if increment_sign(params, guess) == 0:
        argmax.append(guess + 1)
    value = max(x_of_n(params, N, log_factorial(N)) for N in argmax)
    return SharpConstant(value, argmax, (0, hi))


def log_c_raw_primes(params: EpsilonParams, n_max: int) -> tuple[float, int]:
    """Diagnostic: max of X with prime-log sums S(N) over N <= n_max."""
    p = params.p
    table = first_primes(n_max)
    S = CompensatedSum()
    head = params.r * (p - 1) * params.d_k * math.log(p)
    half = params.epsilon * (p - 1) / 2
    best, arg = 2 * head, 0
    for N in range(1, n_max + 1):
        S.add(math.log(table[N]))
        v = (N + 2) * head - half * S.value
        if v > best:
            best, arg = v, N
    return best, arg


def compose_constant(log_C_k: float, p: int, log_c: float) -> float:
    """log C_K = p log C_k + log c_k."""
    return p * log_C_k + log_c


@dataclass
class LevelRecord:
    i: int
    d_k: int
    N0_log: float
    log_c_closed: float | None
    log_c_sharp: float | None
    argmax: list[int]
    log_c_used: float | None
    flags: list[str] = field(default_factory=list)


@dataclass
class ConstantCertificate:
    p: int
    epsilon: float
    r: int
    d_kappa: int
    rho: int
    log_C0: float
    levels: list[LevelRecord]
    log_C_total: float | None
    flags: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "epsilon": self.epsilon,
            "r": self.r,
            "base": {"d_kappa": self.d_kappa, "rho": self.rho, "logC0": self.log_C0},
            "levels": [
                {
                    "i": lv.i,
                    "d_k": lv.d_k,
                    "N0_log": lv.N0_log,
                    "log_c_closed": lv.log_c_closed,
                    "log_c_sharp": lv.log_c_sharp,
                    "argmax": lv.argmax,
                    "log_c_used": lv.log_c_used,
                    "flags": lv.flags,
                }
                for lv in self.levels
            ],
            "log_C_total": self.log_C_total,
            "flags": self.flags,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    def refold(self) -> float | None:
        acc = self.log_C0
        for lv in self.levels:
            if lv.log_c_used is None:
                return None
            acc = compose_constant(acc, self.p, lv.log_c_used)
        return acc


def level_constant(params: EpsilonParams, i: int, cap: int = SEARCH_CAP) -> LevelRecord:
    flags = []
    closed = log_c_closed(params)
    closed_val = None if isinstance(closed, Astronomical) else closed
    if closed_val is None:
        flags.append("astronomical")
        return LevelRecord(i, params.d_k, params.log_n0, None, None, [], None, flags)
    sharp = log_c_sharp(params, cap=cap)
    if sharp.bound_only:
        flags += ["bound_only", "closed_corrected"]
        used = closed_val + closed_correction(params)
        return LevelRecord(i, params.d_k, params.log_n0, closed_val, None, [], used, flags)
    if sharp.value > closed_val:
        flags.append("sharp_exceeds_closed")
    used = max(sharp.value, closed_val)
    return LevelRecord(i, params.d_k, params.log_n0, closed_val, sharp.value, sharp.argmax, used, flags)


def tower_constant(spec, epsilon: float, r: int = 1, cap: int = SEARCH_CAP) -> ConstantCertificate:
    """Fold the per-step constants up the tower, starting from C_kappa = p^rho."""
    p = spec.p
    log_C = spec.rho * math.log(p)
    levels = []
    for i in range(1, spec.e + 1):
        params = EpsilonParams(p, p ** (i - 1) * spec.d_kappa, epsilon, r)
        levels.append(level_constant(params, i, cap=cap))
    cert = ConstantCertificate(p, epsilon, r, spec.d_kappa, spec.rho, log_C, levels, None)
    cert.log_C_total = cert.refold()
    if cert.log_C_total is None:
        cert.flags.append("astronomical")
    if spec.leopoldt_assumed:
        cert.flags.append("leopoldt_assumed")
    return cert
