"""Weight-zero Eisenstein series for the built-in groups.

The series is E(z, s) = (1/omega) sum of Im(gamma z)^s over cosets of the
translation subgroup, omega the cusp width.  Two evaluation routes:

- fourier (lattice only): the classical expansion through completed-zeta
  ratios and K-Bessel modes.  The only route that survives analytic
  continuation below s = 1, so it is the default for the lattice.
- coset: direct summation.  For the lattice the coprime bottom rows are
  recovered from the full integer lattice divided by 2 zeta(2s), with an
  area-integral tail correction.  For the thin group the bottom-row
  tables are summed at four nested height cutoffs and the geometric
  decay of the block sums is extrapolated; the series converges at s = 1
  outright because the critical exponent sits below 1.

The regularized value at s = 1 (lattice) subtracts the pole and lands on
a closed form in log|eta|.  The pairing functionals mu_eis integrate a
test function against the regularized series (lattice) or the plain
series at s = 1 (thin) with respect to dx dy / y^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .algebra import UTBPoint, mobius_act
from .groups import (GroupSpec, PSL2Z, WordBudget, bottom_rows,
                     cusp_normalizer, enumerate_words)
from .quadrature import adaptive, gl_nodes
from .specfun import (EULER_GAMMA, bessel_k, divisor_sigma, gamma_fn,
                      log_abs_eta, log_abs_eta_arr, zeta, zeta_prime)

__all__ = [
    "EisensteinEvaluator", "EisensteinSample", "ConvergenceError",
    "PairingError", "completed_zeta", "critical_exponent",
    "eisenstein_value", "eisenstein_sample", "regularized_E1", "mu_eis",
]


class ConvergenceError(ValueError):
    """Requested route cannot converge at the given parameters."""


class PairingError(ValueError):
    """Pairing integral fails its convergence preconditions."""


def completed_zeta(s: float) -> float:
    """xi(s) = pi^(-s/2) Gamma(s/2) zeta(s) for real s > 0, s != 1."""
    return math.pi ** (-0.5 * s) * gamma_fn(0.5 * s) * zeta(s)


@lru_cache(maxsize=8)
def critical_exponent(spec: GroupSpec) -> float:
    """Empirical growth exponent of the norm ball, 1.0 for lattices.

    Counts group elements with Frobenius norm below a ladder of radii and
    halves the fitted log-log slope.  The estimate only gates which s the
    coset route accepts; it never enters a value.
    """
    if spec.lattice:
        return 1.0
    radii = (16.0, 32.0, 64.0, 128.0, 256.0)
    top = radii[-1]

    def in_ball(g):
        return g.a * g.a + g.b * g.b + g.c * g.c + g.d * g.d <= top * top

    def keep(g):
        return max(abs(g.a), abs(g.b), abs(g.c), abs(g.d)) <= 4.0 * top

    res = enumerate_words(spec, predicate=in_ball,
                          budget=WordBudget(max_depth=4096, max_nodes=10 ** 7),
                          expand=keep)
    norms = np.sort([math.sqrt(g.a * g.a + g.b * g.b + g.c * g.c + g.d * g.d)
                     for g in res.elements])
    counts = np.searchsorted(norms, np.array(radii), side="right")
    slope = np.polyfit(np.log(radii), np.log(counts), 1)[0]
    return float(slope) / 2.0


@dataclass(frozen=True)
class EisensteinEvaluator:
    """Frozen evaluation setup: group, cusp, route, truncation controls.

    route "auto" resolves to fourier for lattices and coset otherwise.
    max_mode caps the Fourier mode count; max_height cuts the coset sums
    at bottom-row norm (thin) or at |cz + d| (lattice).
    """
    spec: GroupSpec = PSL2Z
    cusp_index: int = 0
    route: str = "auto"
    max_mode: int = 4000
    max_height: float = 1024.0

    def __post_init__(self):
        if self.route not in ("auto", "fourier", "coset"):
            raise ValueError(f"unknown route {self.route!r}")
        if not 0 <= self.cusp_index < len(self.spec.cusps):
            raise IndexError("cusp index out of range")
        if self.max_height < 32:
            raise ValueError("max_height below the smallest table")

    def value(self, z, s: float) -> float:
        return eisenstein_value(self, z, s)


@dataclass(frozen=True)
class EisensteinSample:
    value: float
    route: str
    est_error: float


def _point_xy(z):
    if isinstance(z, UTBPoint):
        return z.x, z.y
    zz = complex(z)
    if not zz.imag > 0:
        raise ValueError("evaluation point needs positive imaginary part")
    return zz.real, zz.imag


def _at_cusp(e: EisensteinEvaluator, x: float, y: float):
    """Working spec, moved point, and width for the selected cusp."""
    omega = e.spec.cusps[e.cusp_index].width
    if e.cusp_index == 0 and math.isinf(e.spec.cusps[0].point):
        return e.spec, x, y, omega
    n = cusp_normalizer(e.spec, e.cusp_index)
    wspec = e.spec.conjugated(n, name=f"{e.spec.name}@{e.cusp_index}")
    p = mobius_act(n, UTBPoint(x, y, 0.0))
    return wspec, p.x, p.y, omega


def eisenstein_value(e: EisensteinEvaluator, z, s: float) -> float:
    return eisenstein_sample(e, z, s).value


def eisenstein_sample(e: EisensteinEvaluator, z, s: float) -> EisensteinSample:
    x, y = _point_xy(z)
    route = e.route
    if route == "auto":
        route = "fourier" if e.spec.lattice else "coset"
    wspec, x, y, omega = _at_cusp(e, x, y)
    if route == "fourier":
        if not e.spec.lattice:
            raise ConvergenceError("fourier route is lattice-only")
        if s <= 0.5 or s == 1.0:
            raise ConvergenceError(
                "fourier route needs s > 1/2 away from the pole at s = 1")
        val, err = _fourier_value(x, y, s, omega, e.max_mode)
    elif e.spec.lattice:
        if s <= 1.0:
            raise ConvergenceError("lattice coset sum diverges for s <= 1")
        val, err = _lattice_coset_value(x, y, s, omega, e.max_height)
    else:
        gate = critical_exponent(e.spec) + 0.1
        if s < gate:
            raise ConvergenceError(
                f"thin coset sum needs s >= {gate:.3f} (empirical exponent "
                f"plus margin); got s = {s}")
        val, err = _thin_coset_value(wspec, x, y, s, omega, e.max_height)
    return EisensteinSample(val, route, err)


def _fourier_value(x, y, s, omega, cap):
    xi2 = completed_zeta(2.0 * s)
    total = y ** s + completed_zeta(2.0 * s - 1.0) / xi2 * y ** (1.0 - s)
    scale = abs(total) + 1.0
    pref = 4.0 / xi2 * math.sqrt(y)
    env = 0.0
    quiet = 0
    n = 1
    while n <= cap:
        bes = bessel_k(s - 0.5, 2.0 * math.pi * n * y)
        term = pref * n ** (s - 0.5) * divisor_sigma(1.0 - 2.0 * s, n) * bes
        env = abs(term)
        total += term * math.cos(2.0 * math.pi * n * x)
        # the cosine can vanish by accident, so convergence is judged on
        # the positive envelope, two quiet modes in a row
        if env < 1e-13 * scale:
            quiet += 1
            if quiet >= 2:
                break
        else:
            quiet = 0
        n += 1
    if n > cap and env >= 1e-12 * scale:
        raise ConvergenceError(
            f"mode cap {cap} too small at y = {y:.4g}; raise max_mode")
    return total / omega, (env + 1e-14 * abs(total)) / omega


def _lattice_coset_value(x, y, s, omega, radius):
    # full integer lattice inside |cz + d| <= R, divided by 2 zeta(2s);
    # the tail beyond R is replaced by its area integral, and the value
    # at R / sqrt(2) is carried along as the error estimate
    r2 = radius * radius
    total = 0.0
    half = 0.0
    cmax = int(radius / y)
    for c in range(-cmax, cmax + 1):
        w2 = r2 - c * c * y * y
        if w2 <= 0.0:
            continue
        w = math.sqrt(w2)
        dd = np.arange(math.ceil(-c * x - w), math.floor(-c * x + w) + 1.0)
        if c == 0:
            dd = dd[dd != 0.0]
        q = (c * x + dd) ** 2 + c * c * y * y
        t = q ** (-s)
        total += float(t.sum())
        half += float(t[q <= 0.5 * r2].sum())
    z2 = 2.0 * zeta(2.0 * s)

    def with_tail(partial, r):
        tail = (math.pi / y) * r ** (2.0 - 2.0 * s) / (s - 1.0)
        return y ** s * (partial + tail) / z2 / omega

    vr = with_tail(total, radius)
    vh = with_tail(half, radius / math.sqrt(2.0))
    return vr, abs(vr - vh) + 1e-15 * abs(vr)


def _thin_partial_heights(max_height):
    top = 2.0 ** round(math.log2(min(max(max_height, 128.0), 4096.0)))
    return (top / 8.0, top / 4.0, top / 2.0, top)


def _geometric_limit(v1, v2, v3):
    """Extrapolate a partial-sum triple assuming geometric block decay."""
    b1, b2 = v2 - v1, v3 - v2
    if b1 <= 0.0 or b2 <= 0.0:
        return v3
    r = b2 / b1
    if not 0.0 < r < 0.97:
        return v3
    return v3 + b2 * r / (1.0 - r)


def _thin_coset_value(wspec, x, y, s, omega, max_height):
    heights = _thin_partial_heights(max_height)
    rows = bottom_rows(wspec, heights[-1])
    c = rows[:, 2].astype(float)
    d = rows[:, 3].astype(float)
    n2 = c * c + d * d
    q = (c * x + d) ** 2 + c * c * y * y
    term = q ** (-s)
    partial = [float(term[n2 <= h * h].sum()) for h in heights]
    lim_lo = _geometric_limit(*partial[:3])
    lim_hi = _geometric_limit(*partial[1:])
    val = y ** s * lim_hi / omega
    err = y ** s * abs(lim_hi - lim_lo) / omega + 1e-15 * abs(val)
    return val, err


def regularized_E1(z) -> float:
    """Value at s = 1 after removing the (3/pi)/(s-1) pole, full modular
    group: (3/pi) (2 gamma - 2 zeta'(2)/zeta(2) - log(4 y |eta(z)|^4))."""
    x, y = _point_xy(z)
    const = 2.0 * EULER_GAMMA - 2.0 * zeta_prime(2.0) / zeta(2.0)
    return (3.0 / math.pi) * (const - math.log(4.0 * y)
                              - 4.0 * log_abs_eta(x, y))


def _regularized_E1_arr(x, y):
    const = 2.0 * EULER_GAMMA - 2.0 * zeta_prime(2.0) / zeta(2.0)
    return (3.0 / math.pi) * (const - np.log(4.0 * np.asarray(y, float))
                              - 4.0 * log_abs_eta_arr(x, y))


def _check_right_invariance(psi):
    # the pairings below only make sense fibered over the base point
    for x, y in ((0.05, 1.7), (-0.31, 1.21), (0.22, 2.9), (0.0, 1.05)):
        base = psi.evaluator(UTBPoint(x, y, 0.0))
        for th in (0.7, -1.9):
            if abs(psi.evaluator(UTBPoint(x, y, th)) - base) > 1e-9 * (1.0 + abs(base)):
                raise PairingError(
                    f"{psi.name}: pairing needs a direction-independent "
                    "test function")


def mu_eis(psi, regularized: bool) -> float:
    """Pairing of a test function with the Eisenstein series at s = 1.

    regularized=True: lattice only, integrates against the regularized
    value over the fundamental domain (box-supported functions reduce to
    their seed box).  regularized=False: thin only, unfolds the pairing
    through the seed profile, so the coset images do the folding and the
    series never needs its own fundamental domain.
    """
    _check_right_invariance(psi)
    if psi.mode == "lattice":
        if not regularized:
            raise PairingError(
                "the lattice series has a pole at s = 1; pair against the "
                "regularized value instead")
        if psi.support is not None:
            return _pair_box_lattice(psi)
        if not psi.alpha_psi > 1.0:
            raise PairingError(
                "cusp decay alpha <= 1 cannot pay for the logarithmic "
                "growth of the regularized series")
        return _pair_fd_lattice(psi)
    if psi.mode == "thin":
        if regularized:
            raise PairingError(
                "the thin series is already finite at s = 1; nothing to "
                "regularize")
        if psi.profiles is None:
            raise PairingError("thin pairing needs a seed-profile function")
        return _pair_box_thin(psi)
    raise PairingError("strip-mode functions pair with neither functional")


def _pair_box_lattice(psi):
    x_lo, x_hi, y_lo, y_hi = psi.support

    def run(n):
        gx, wx = gl_nodes(n)
        gy, wy = gl_nodes(n)
        xs = 0.5 * (x_lo + x_hi) + 0.5 * (x_hi - x_lo) * gx
        ys = 0.5 * (y_lo + y_hi) + 0.5 * (y_hi - y_lo) * gy
        sx = 0.5 * (x_hi - x_lo)
        sy = 0.5 * (y_hi - y_lo)
        X, Y = np.meshgrid(xs, ys, indexing="ij")
        vals = psi.batch(X.ravel(), Y.ravel()).reshape(X.shape)
        core = vals * _regularized_E1_arr(X, Y) / Y ** 2
        return sx * sy * float(wx @ core @ wy)

    v1, v2 = run(64), run(96)
    if abs(v2 - v1) > 1e-9 * (1.0 + abs(v2)):
        v2 = run(144)
    return v2


def _pair_fd_lattice(psi):
    # standard fundamental domain, x in [-1/2, 1/2] above the unit circle
    y_top = max(6.0, (3.0 * psi.c_psi * 1e12) ** (1.0 / psi.alpha_psi))
    gx, wx = gl_nodes(64)
    xs = 0.5 * gx
    total = 0.0
    for xv, wv in zip(xs, wx):
        y0 = math.sqrt(max(1.0 - xv * xv, 0.0))

        def column(ys):
            ys = np.asarray(ys, float)
            return (psi.batch(np.full(ys.shape, xv), ys)
                    * _regularized_E1_arr(np.full(ys.shape, xv), ys) / ys ** 2)

        res = adaptive(column, y0, y_top, abs_tol=1e-12, rel_tol=1e-10,
                       initial_edges=list(np.geomspace(y0, y_top, 40)))
        total += 0.5 * wv * res.value
    return total


def _pair_box_thin(psi):
    x_lo, x_hi, y_lo, y_hi = psi.support
    heights = _thin_partial_heights(1024.0)
    rows = bottom_rows(psi.spec(), heights[-1])
    n2 = (rows[:, 2] * rows[:, 2] + rows[:, 3] * rows[:, 3]).astype(float)
    order = np.argsort(n2, kind="stable")
    rows = rows[order]
    n2 = n2[order]

    def run(n):
        gx, wx = gl_nodes(n)
        gy, wy = gl_nodes(n)
        xs = 0.5 * (x_lo + x_hi) + 0.5 * (x_hi - x_lo) * gx
        ys = 0.5 * (y_lo + y_hi) + 0.5 * (y_hi - y_lo) * gy
        sx = 0.5 * (x_hi - x_lo)
        sy = 0.5 * (y_hi - y_lo)
        X, Y = np.meshgrid(xs, ys, indexing="ij")
        W = np.outer(wx, wy) * sx * sy
        phi = psi.batch(X.ravel(), Y.ravel()).reshape(X.shape)
        # seed against Im(gamma z) / y^2 summed per row, cumulatively,
        # so every cutoff height is read off the same pass
        base = W * phi / Y
        per_row = np.empty(len(rows))
        for lo in range(0, len(rows), 256):
            blk = rows[lo:lo + 256]
            cc = blk[:, 2].astype(float)[:, None, None]
            dd = blk[:, 3].astype(float)[:, None, None]
            den = (cc * X[None] + dd) ** 2 + (cc * Y[None]) ** 2
            per_row[lo:lo + 256] = np.sum(base[None] / den, axis=(1, 2))
        cum = np.cumsum(per_row)
        idx = np.searchsorted(n2, [h * h for h in heights], side="right") - 1
        partial = [float(cum[i]) if i >= 0 else 0.0 for i in idx]
        lo = _geometric_limit(*partial[:3])
        hi = _geometric_limit(*partial[1:])
        return hi, abs(hi - lo)

    v1, _ = run(60)
    v2, _ = run(90)
    if abs(v2 - v1) > 1e-8 * (1.0 + abs(v2)):
        v2, _ = run(135)
    return v2 / psi.omega
