"""Order-one Bessel functions J1, K1, their zeros and the ratio functions.

Evaluation strategy
-------------------
J0/J1 use the ascending power series for ``x <= SERIES_CUTOFF_J`` (8.0) and
Miller's backward recurrence, normalised with ``J0 + 2*sum(J_2k) = 1``, above
it.  K0/K1 use the ascending series (with the logarithmic terms) for
``x <= SERIES_CUTOFF_K`` (2.0) and, above it, trapezoidal quadrature of the
exponentially scaled integral ``exp(x) K_nu(x) = int_0^inf exp(-x(cosh t - 1))
cosh(nu t) dt``, whose integrand is entire, so the rule converges
geometrically.  Both routes are accurate to about 1e-14 on [1e-8, 50].

The ratios

    alpha(x) = J1(x) / (x J1'(x)),      beta(x) = K1(x) / (x K1'(x))

are evaluated from the same primitives; beta uses the scaled K values so it
stays finite where K1 itself underflows.
"""

from __future__ import annotations

import bisect
import math
import threading
from dataclasses import dataclass
from functools import lru_cache

from scipy.optimize import brentq

EULER_GAMMA = 0.57721566490153286061

SERIES_CUTOFF_J = 8.0
SERIES_CUTOFF_K = 2.0
MAX_ARG_J = 1.0e4
# exp(-x) underflows (relative to K1's prefactor) a little above 700
MAX_ARG_K = 700.0

_TRAPEZOID_STEP = 0.05


class PoleError(ZeroDivisionError):
    """Raised when a ratio function is evaluated at one of its poles."""


def _check_j_arg(x: float) -> float:
    x = float(x)
    if not math.isfinite(x) or x < 0.0:
        raise ValueError(f"J1 needs a finite argument x >= 0, got {x!r}")
    if x > MAX_ARG_J:
        raise OverflowError(f"argument {x} beyond implemented range (<= {MAX_ARG_J})")
    return x


def _check_k_arg(x: float) -> float:
    x = float(x)
    if not math.isfinite(x) or x <= 0.0:
        raise ValueError(f"K1 needs a finite argument x > 0, got {x!r}")
    return x


# -- J0, J1 -----------------------------------------------------------------

def _j01_series(x: float) -> tuple[float, float]:
    q = -0.25 * x * x
    t0 = 1.0
    t1 = 1.0
    s0 = 1.0
    s1 = 1.0
    k = 0
    while True:
        k += 1
        t0 *= q / (k * k)
        t1 *= q / (k * (k + 1))
        s0 += t0
        s1 += t1
        if abs(t0) < 1e-17 * max(abs(s0), 1e-300) and abs(t1) < 1e-17 * max(abs(s1), 1e-300):
            break
        if k > 200:
            break
    return s0, 0.5 * x * s1


def _j01_miller(x: float) -> tuple[float, float]:
    n_start = int(x + 10.0 * x ** (1.0 / 3.0) + 30.0)
    n_start += n_start % 2
    j_next = 0.0  # J_{n+1}
    j_cur = 1e-300  # J_n, arbitrary small seed
    norm = 0.0
    j0 = j1 = 0.0
    for n in range(n_start, 0, -1):
        j_prev = (2.0 * n / x) * j_cur - j_next  # J_{n-1}
        j_next, j_cur = j_cur, j_prev
        # j_cur now holds J_{n-1}
        if (n - 1) % 2 == 0 and n - 1 > 0:
            norm += 2.0 * j_cur
        if n - 1 == 1:
            j1 = j_cur
        if abs(j_cur) > 1e250:
            scale = 1e-250
            j_cur *= scale
            j_next *= scale
            norm *= scale
            j1 *= scale
    j0 = j_cur
    norm += j0
    return j0 / norm, j1 / norm


def _j01(x: float) -> tuple[float, float]:
    if x <= SERIES_CUTOFF_J:
        return _j01_series(x)
    return _j01_miller(x)


def j0(x: float) -> float:
    return _j01(_check_j_arg(x))[0]


def j1(x: float) -> float:
    """Bessel function of the first kind of order one."""
    return _j01(_check_j_arg(x))[1]


def j1_prime(x: float) -> float:
    """Derivative J1'(x) = J0(x) - J1(x)/x, with J1'(0) = 1/2."""
    x = _check_j_arg(x)
    if x == 0.0:
        return 0.5
    a0, a1 = _j01(x)
    return a0 - a1 / x


# -- K0, K1 -----------------------------------------------------------------

def _k01_series(x: float) -> tuple[float, float]:
    """Unscaled K0, K1 from the ascending series (x small)."""
    q = 0.25 * x * x
    log_half = math.log(0.5 * x)
    # I0, I1 and the digamma-weighted sums
    t0 = 1.0  # q^k / (k!)^2
    t1 = 1.0  # q^k / (k! (k+1)!)
    i0 = 1.0
    i1 = 1.0
    harmonic = 0.0  # H_k
    psi_k1 = -EULER_GAMMA  # psi(k+1)
    psi_k2 = 1.0 - EULER_GAMMA  # psi(k+2)
    sum_k0 = 0.0
    sum_k1 = psi_k1 + psi_k2
    k = 0
    while True:
        k += 1
        t0 *= q / (k * k)
        t1 *= q / (k * (k + 1))
        harmonic += 1.0 / k
        psi_k1 += 1.0 / k
        psi_k2 += 1.0 / (k + 1)
        i0 += t0
        i1 += t1
        sum_k0 += harmonic * t0
        sum_k1 += (psi_k1 + psi_k2) * t1
        if t0 < 1e-18 * i0 and t1 < 1e-18 * i1:
            break
    i1 *= 0.5 * x
    k0 = -(log_half + EULER_GAMMA) * i0 + sum_k0
    k1 = 1.0 / x + log_half * i1 - 0.25 * x * sum_k1
    return k0, k1


def _k01_scaled_quadrature(x: float) -> tuple[float, float]:
    """exp(x) K0(x), exp(x) K1(x) by the trapezoidal rule."""
    h = _TRAPEZOID_STEP
    s0 = 0.5
    s1 = 0.5
    t = 0.0
    while True:
        t += h
        ch = math.cosh(t)
        e = math.exp(-x * (ch - 1.0))
        s0 += e
        s1 += e * ch
        if e * ch < 1e-18 * s1:
            break
    return h * s0, h * s1


def _k01_scaled(x: float) -> tuple[float, float]:
    if x <= SERIES_CUTOFF_K:
        k0, k1 = _k01_series(x)
        ex = math.exp(x)
        return k0 * ex, k1 * ex
    return _k01_scaled_quadrature(x)


def k1(x: float) -> float:
    """Modified Bessel function of the second kind of order one."""
    x = _check_k_arg(x)
    if x > MAX_ARG_K:
        raise OverflowError(f"K1({x}) underflows; implemented range is x <= {MAX_ARG_K}")
    if x <= SERIES_CUTOFF_K:
        return _k01_series(x)[1]
    return _k01_scaled_quadrature(x)[1] * math.exp(-x)


def k0(x: float) -> float:
    x = _check_k_arg(x)
    if x > MAX_ARG_K:
        raise OverflowError(f"K0({x}) underflows; implemented range is x <= {MAX_ARG_K}")
    if x <= SERIES_CUTOFF_K:
        return _k01_series(x)[0]
    return _k01_scaled_quadrature(x)[0] * math.exp(-x)


def k1_prime(x: float) -> float:
    """Derivative K1'(x) = -K0(x) - K1(x)/x."""
    x = _check_k_arg(x)
    if x > MAX_ARG_K:
        raise OverflowError(f"K1'({x}) underflows; implemented range is x <= {MAX_ARG_K}")
    if x <= SERIES_CUTOFF_K:
        a0, a1 = _k01_series(x)
    else:
        a0, a1 = _k01_scaled_quadrature(x)
        ex = math.exp(-x)
        a0 *= ex
        a1 *= ex
    return -a0 - a1 / x


# -- zeros ------------------------------------------------------------------

def _scan_roots(f, n: int, start: float, step: float) -> list[float]:
    roots: list[float] = []
    a = start
    fa = f(a)
    while len(roots) < n:
        b = a + step
        fb = f(b)
        if fa == 0.0:
            roots.append(a)
        elif fa * fb < 0.0:
            roots.append(brentq(f, a, b, xtol=1e-15, rtol=1e-15, maxiter=200))
        a, fa = b, fb
    return roots


@lru_cache(maxsize=32)
def _j1_zeros(n: int) -> tuple[float, ...]:
    return tuple(_scan_roots(j1, n, 0.5, 0.25))


@lru_cache(maxsize=32)
def _j1_prime_zeros(n: int) -> tuple[float, ...]:
    return tuple(_scan_roots(j1_prime, n, 0.1, 0.25))


def j1_zeros(n: int) -> list[float]:
    """First ``n`` positive zeros of J1, ascending."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return list(_j1_zeros(int(n)))


def j1_prime_zeros(n: int) -> list[float]:
    """First ``n`` positive zeros of J1', ascending."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return list(_j1_prime_zeros(int(n)))


@dataclass(frozen=True)
class BesselZeroTable:
    j: tuple[float, ...]
    jp: tuple[float, ...]

    @property
    def count(self) -> int:
        return len(self.j)

    def __post_init__(self):
        if len(self.j) != len(self.jp) or not self.j:
            raise ValueError("zero lists must be non-empty and of equal length")
        for seq in (self.j, self.jp):
            if any(b <= a for a, b in zip(seq, seq[1:])):
                raise ValueError("zero lists must be strictly increasing")
        for k in range(self.count):
            if not self.jp[k] < self.j[k]:
                raise ValueError("zeros of J1' and J1 do not interlace")
            if k + 1 < self.count and not self.j[k] < self.jp[k + 1]:
                raise ValueError("zeros of J1' and J1 do not interlace")

    def admissible(self) -> bool:
        """The window inequality 2 j_1^2 < j'_1^2 + j'_2^2."""
        return 2.0 * self.j[0] ** 2 < self.jp[0] ** 2 + self.jp[1] ** 2


def zero_table(count: int = 5) -> BesselZeroTable:
    if count < 2:
        raise ValueError("count must be >= 2")
    return BesselZeroTable(tuple(j1_zeros(count)), tuple(j1_prime_zeros(count)))


_jp_cache: list[float] = []
_jp_lock = threading.Lock()


def _jp_zeros_upto(x: float) -> list[float]:
    with _jp_lock:
        while not _jp_cache or _jp_cache[-1] <= x + 4.0:
            _jp_cache[:] = j1_prime_zeros(len(_jp_cache) + 8)
        return list(_jp_cache)


# -- ratio functions --------------------------------------------------------

def alpha(x: float) -> float:
    """J1(x) / (x J1'(x)); equals 1 in the limit x -> 0+."""
    x = _check_j_arg(x)
    if x == 0.0:
        return 1.0
    zeros = _jp_zeros_upto(x)
    i = bisect.bisect_left(zeros, x)
    for k in (i - 1, i):
        if 0 <= k < len(zeros) and abs(zeros[k] - x) <= 1e-12:
            raise PoleError(f"alpha has a pole at the zero {zeros[k]!r} of J1'")
    a0, a1 = _j01(x)
    return a1 / (x * a0 - a1)


def beta(x: float) -> float:
    """K1(x) / (x K1'(x)); negative, increasing from -1 towards 0."""
    x = _check_k_arg(x)
    if x > MAX_ARG_K:
        raise OverflowError(f"beta({x}) beyond implemented range")
    s0, s1 = _k01_scaled(x)
    return -s1 / (x * s0 + s1)


def k1_scaled(x: float) -> float:
    """exp(x) * K1(x); finite for all x > 0."""
    return _k01_scaled(_check_k_arg(x))[1]
