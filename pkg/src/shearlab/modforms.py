"""The discriminant cusp form and the sheared second moment.

Exact integer q-expansion of Delta through the cube-of-eta identity,
weight-aware evaluation anywhere in the upper half plane by reduction,
the Petersson norm, the symmetric-square L-function at and right of the
edge, the archimedean weight for the shear transform, the geometric
second-moment integral along the ray y(T + i), and the Kronecker-limit
consistency check that ties the log-eta pairing to the completed
logarithmic derivative.

L-values are computed from plain Dirichlet coefficients under a Gaussian
cutoff exp(-(n/X)^2).  At the edge s = 1 every shifted pole of the
Mellin kernel lands on a trivial zero of the symmetric square, so the
smoothed sum converges superpolynomially in X; away from the edge the
leading X^-2 term is removed by a two-cutoff Richardson step, and the
discarded difference doubles as the error estimate.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np

from .algebra import UTBPoint
from .groups import reduce_to_fundamental_domain, reduce_points
from .measures import TestFunction
from .quadrature import adaptive, gl_nodes
from .specfun import (EULER_GAMMA, digamma, gamma_fn, log_abs_eta_arr,
                      zeta, zeta_prime)

__all__ = [
    "QExpansion", "LSeriesValue", "InsufficientConvergenceError",
    "delta_qexp", "eval_form", "eval_psi_f", "form_observable",
    "petersson_norm", "hecke_L", "sym2_L", "weight_W",
    "second_moment_lhs", "second_moment_prediction", "kronecker_check",
]


class InsufficientConvergenceError(RuntimeError):
    """Two smoothing cutoffs disagree beyond the allowed tolerance."""


@dataclass(frozen=True)
class QExpansion:
    """Normalized cusp form data: weight and a(1..N), with a(1) = 1."""
    weight: int
    coeffs: tuple

    def __post_init__(self):
        if self.weight % 2 or self.weight < 4:
            raise ValueError("weight must be an even integer >= 4")
        if not self.coeffs or self.coeffs[0] != 1:
            raise ValueError("normalization requires a(1) = 1")
        object.__setattr__(self, "coeffs", tuple(self.coeffs))

    def a(self, n: int):
        return self.coeffs[n - 1]

    def __len__(self):
        return len(self.coeffs)


def _square_series(arr, n_terms):
    # plain truncated Cauchy square on exact integers; the zero skip
    # matters because the eta-cube factor is pentagonal-sparse
    out = [0] * n_terms
    for i, ai in enumerate(arr):
        if ai:
            lim = n_terms - i
            if lim <= 0:
                break
            for j in range(min(lim, len(arr))):
                aj = arr[j]
                if aj:
                    out[i + j] += ai * aj
    return out


@lru_cache(maxsize=8)
def _tau_tuple(n_max: int) -> tuple:
    # Delta / q = (eta-cube)^8 with eta-cube given by Jacobi's identity,
    # so three squarings finish the job
    j3 = [0] * n_max
    k = 0
    while k * (k + 1) // 2 < n_max:
        j3[k * (k + 1) // 2] = (2 * k + 1) * (-1 if k % 2 else 1)
        k += 1
    j6 = _square_series(j3, n_max)
    j12 = _square_series(j6, n_max)
    return tuple(_square_series(j12, n_max))


def delta_qexp(n: int) -> QExpansion:
    """tau(1..n) of q prod (1-q^m)^24, exact integers."""
    if n < 1:
        raise ValueError("need at least one coefficient")
    return QExpansion(12, _tau_tuple(n))


def _xy(z):
    if isinstance(z, UTBPoint):
        return z.x, z.y
    zz = complex(z)
    if not zz.imag > 0:
        raise ValueError("evaluation point needs positive imaginary part")
    return zz.real, zz.imag


def _qexp_eval(f: QExpansion, x, y):
    """sum a(n) e(n z) on arrays of points, truncated by the tail bound."""
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    q = np.exp(2j * math.pi * (x + 1j * y))
    qmax = math.exp(-2.0 * math.pi * float(np.min(y)))
    total = np.zeros_like(q)
    power = np.ones_like(q)
    bound = 1.0
    for n in range(1, len(f.coeffs) + 1):
        power = power * q
        bound *= qmax
        total += float(f.coeffs[n - 1]) * power
        # a(m) <= m^(weight/2 + 1) comfortably covers the Deligne range
        if (n + 1.0) ** (0.5 * f.weight + 1.0) * bound * qmax < 1e-18:
            break
    return total


def eval_form(f: QExpansion, z) -> complex:
    """f(z) anywhere: reduce to the fundamental domain, evaluate the
    expansion there, and unwind the weight-k cocycle."""
    x, y = _xy(z)
    p, word = reduce_to_fundamental_domain(UTBPoint(x, y, 0.0))
    val = complex(_qexp_eval(f, p.x, p.y))
    den = complex(word.c * x + word.d, word.c * y)
    return val * den ** (-f.weight)


def eval_psi_f(f: QExpansion, z) -> float:
    """Psi_f(z) = |f(z)|^2 Im(z)^k, evaluated through its invariance."""
    x, y = _xy(z)
    p, _ = reduce_to_fundamental_domain(UTBPoint(x, y, 0.0))
    return float(abs(complex(_qexp_eval(f, p.x, p.y))) ** 2) * p.y ** f.weight


@lru_cache(maxsize=8)
def form_observable(f: QExpansion) -> TestFunction:
    """Psi_f as a test function: cusp-decaying, no seed box, so the
    measure integrators take their generic adaptive routes."""
    k = f.weight

    def batch(xs, ys):
        rx, ry = reduce_points(np.asarray(xs, float), np.asarray(ys, float))
        vals = _qexp_eval(f, rx, ry)
        return np.abs(vals) ** 2 * ry ** k

    def evaluator(p: UTBPoint) -> float:
        return eval_psi_f(f, p)

    # honest sup-envelope constants: |f| <= sum |a(n)| e^(-2 pi n y) =: F(y)
    # on the reduced range, so Psi <= F(y)^2 y^k =: env(y)
    ys = np.geomspace(math.sqrt(3.0) / 2.0, 8.0, 400)
    n_idx = np.arange(1, min(len(f.coeffs), 80) + 1.0)
    absa = np.abs(np.array(f.coeffs[:len(n_idx)], dtype=float))
    fy = np.exp(-2.0 * math.pi * np.outer(ys, n_idx)) @ absa
    env = fy ** 2 * ys ** k
    alpha = 2.0
    return TestFunction(name=f"psi_form_w{k}", mode="lattice",
                        evaluator=evaluator, batch=batch,
                        c_psi=float((env * ys ** alpha).max()),
                        alpha_psi=alpha, support=None, profiles=None,
                        peak=float(env.max()))


def _fd_pairing(f: QExpansion, weight_fn, nx: int = 64, y_top: float = 5.0):
    # integral over the standard fundamental domain of weight_fn * Psi_f
    # with respect to dx dy / y^2, columns in x, adaptive in y
    gx, wx = gl_nodes(nx)
    xs = 0.5 * gx
    total = 0.0
    for xv, wv in zip(xs, wx):
        y0 = math.sqrt(max(1.0 - xv * xv, 0.0))

        def column(ys):
            ys = np.asarray(ys, float)
            xa = np.full(ys.shape, xv)
            psi = np.abs(_qexp_eval(f, xa, ys)) ** 2 * ys ** f.weight
            return weight_fn(xa, ys) * psi / ys ** 2

        res = adaptive(column, y0, y_top, abs_tol=1e-16, rel_tol=1e-11,
                       initial_edges=list(np.geomspace(y0, y_top, 24)))
        total += 0.5 * wv * res.value
    return total


@lru_cache(maxsize=8)
def petersson_norm(f: QExpansion) -> float:
    """||f||^2 over the fundamental domain; doubling the column count is
    the convergence check and the finer value is returned."""
    one = lambda xa, ys: 1.0
    v1 = _fd_pairing(f, one, nx=48)
    v2 = _fd_pairing(f, one, nx=72)
    if abs(v2 - v1) > 1e-8 * abs(v2):
        v2 = _fd_pairing(f, one, nx=108)
    return v2


# -- L-functions through Gaussian-smoothed Dirichlet series ------------------


@lru_cache(maxsize=8)
def _lambda_norm(f: QExpansion) -> np.ndarray:
    n = np.arange(1, len(f.coeffs) + 1, dtype=float)
    return np.array(f.coeffs, dtype=float) / n ** ((f.weight - 1) / 2.0)


@lru_cache(maxsize=32)
def _spf_sieve(m: int) -> np.ndarray:
    spf = np.zeros(m + 1, dtype=np.int64)
    spf[1] = 1
    for p in range(2, m + 1):
        if spf[p] == 0:
            spf[p::p][spf[p::p] == 0] = p
    return spf


def _mobius(m: int) -> np.ndarray:
    spf = _spf_sieve(m)
    mu = np.zeros(m + 1, dtype=np.int64)
    mu[1] = 1
    for n in range(2, m + 1):
        p = spf[n]
        r = n // p
        mu[n] = 0 if r % p == 0 else -mu[r]
    return mu


@lru_cache(maxsize=8)
def _sym2_coeffs(f: QExpansion) -> np.ndarray:
    """Dirichlet coefficients of L(sym2 f, s): square lambda, divide by
    zeta via Moebius, multiply by zeta(2s) via square indices."""
    m = len(f.coeffs)
    lam2 = _lambda_norm(f) ** 2
    mu = _mobius(m)
    b = np.zeros(m)
    for d in range(1, m + 1):
        if mu[d]:
            b[d - 1::d] += mu[d] * lam2[:m // d]
    c = np.zeros(m)
    for k in range(1, math.isqrt(m) + 1):
        c[k * k - 1::k * k] += b[:m // (k * k)]
    return c


def _smoothed_pair(coeffs: np.ndarray, s: float, x_cut: float,
                   log_weight: bool):
    n = np.arange(1, len(coeffs) + 1, dtype=float)
    base = coeffs * n ** (-s)
    if log_weight:
        base = base * np.log(n)
    hi = float(np.sum(base * np.exp(-(n / x_cut) ** 2)))
    lo = float(np.sum(base * np.exp(-(2.0 * n / x_cut) ** 2)))
    return (4.0 * hi - lo) / 3.0, hi, lo


def _dirichlet_value(coeffs, s, log_weight=False, rel_gate=1e-4):
    x_cut = len(coeffs) / 6.5
    val, hi, lo = _smoothed_pair(coeffs, s, x_cut, log_weight)
    scale = max(abs(hi), 1e-3)
    if abs(hi - lo) > rel_gate * scale:
        raise InsufficientConvergenceError(
            f"cutoffs {x_cut / 2:.0f} and {x_cut:.0f} disagree by "
            f"{abs(hi - lo):.3e} at s = {s}; supply more coefficients")
    return val, abs(hi - lo) / 3.0 + 1e-14 * abs(val)


def hecke_L(f: QExpansion, s: float) -> float:
    """L(f, s) = sum lambda(n) n^-s in the analytic normalization."""
    if s < 1.0:
        raise ValueError("right of the critical strip only")
    val, _ = _dirichlet_value(_lambda_norm(f), s)
    return val


@dataclass(frozen=True)
class LSeriesValue:
    s: float
    value: float
    completed: float
    est_error: float
    cutoff: float
    l_prime: Optional[float] = None
    completed_log_deriv: Optional[float] = None


def sym2_L(f: QExpansion, s: float, want_derivative: bool = False
           ) -> LSeriesValue:
    """L(sym2 f, s) for s >= 1, optionally with the completed logarithmic
    derivative assembled from the exact digamma term plus L'/L."""
    if s < 1.0:
        raise ValueError("sym2_L needs s >= 1")
    c = _sym2_coeffs(f)
    val, err = _dirichlet_value(c, s)
    k = f.weight
    completed = (4.0 * math.pi) ** (-(s + k - 1)) * gamma_fn(s + k - 1) * val
    l_prime = None
    log_deriv = None
    if want_derivative:
        neg_lp, err2 = _dirichlet_value(c, s, log_weight=True)
        l_prime = -neg_lp
        log_deriv = (-math.log(4.0 * math.pi) + float(digamma(s + k - 1))
                     + l_prime / val)
        err = err + err2
    return LSeriesValue(s=s, value=val, completed=completed, est_error=err,
                        cutoff=len(c) / 6.5, l_prime=l_prime,
                        completed_log_deriv=log_deriv)


def weight_W(k: int, s, t: float) -> complex:
    """(2 pi)^-sigma Gamma(sigma) (1 - iT)^-sigma with sigma = s+(k-1)/2."""
    sigma = complex(s) + (k - 1) / 2.0
    if sigma.real <= 0:
        raise ValueError("need Re(s + (k-1)/2) > 0")
    g = gamma_fn(sigma)
    return (cmath.exp(-sigma * math.log(2.0 * math.pi)) * complex(g)
            * cmath.exp(-sigma * cmath.log(1.0 - 1j * t)))


# -- the second moment along the sheared ray ---------------------------------


def second_moment_lhs(f: QExpansion, t: float, tol: float = 1e-8) -> float:
    """integral over 0 < y of |f(Ty + iy)|^2 y^k dy/y, split at the apex
    1/sqrt(T^2+1); both ends die doubly fast, the far cusp because the
    reduced height grows like 1/(y T^2)."""
    if not t > 1.0:
        raise ValueError("the split needs T > 1")
    psi = form_observable(f)
    u0 = 1.0 / math.sqrt(t * t + 1.0)

    def ray(ys):
        ys = np.asarray(ys, float)
        return psi.batch(t * ys, ys) / ys

    y_hi = 5.0
    y_lo = 1.0 / (5.0 * (t * t + 1.0))
    up = adaptive(ray, u0, y_hi, abs_tol=tol * 1e-3, rel_tol=tol,
                  initial_edges=list(np.geomspace(u0, y_hi, 60)))
    down = adaptive(ray, y_lo, u0, abs_tol=tol * 1e-3, rel_tol=tol,
                    initial_edges=list(np.geomspace(y_lo, u0, 60)))
    return up.value + down.value


def second_moment_prediction(f: QExpansion, t: float) -> float:
    """2 (||f||^2 / vol)(log T + Lambda'/Lambda(sym2 f, 1) + gamma
    - 2 zeta'(2)/zeta(2)), the main term the moment settles on."""
    pet = petersson_norm(f)
    ell = sym2_L(f, 1.0, want_derivative=True)
    vol = math.pi / 3.0
    bracket = (math.log(t) + ell.completed_log_deriv + EULER_GAMMA
               - 2.0 * zeta_prime(2.0) / zeta(2.0))
    return 2.0 * (pet / vol) * bracket


def kronecker_check(f: QExpansion):
    """(lhs, rhs, gap) for the limit-formula identity
    <log(4y|eta|^4), Psi_f> / ||f||^2 = gamma - Lambda'/Lambda(sym2 f, 1),
    the two sides computed along fully independent routes."""
    def logw(xa, ys):
        return np.log(4.0 * ys) + 4.0 * log_abs_eta_arr(xa, ys)

    lhs = _fd_pairing(f, logw) / petersson_norm(f)
    ell = sym2_L(f, 1.0, want_derivative=True)
    rhs = EULER_GAMMA - ell.completed_log_deriv
    return lhs, rhs, abs(lhs - rhs)
