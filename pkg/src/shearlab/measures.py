"""Measures along sheared rays and on the cusp strip, horocycle averages,
and Fourier coefficients of automorphic test functions.

The headline integral is mu_T: the pushforward of dy/y along the ray
u -> u*(T + i), u >= 1/sqrt(T^2+1), evaluated on an automorphic test
function.  For box bumps this is computed by unfolding: the bump is a
Poincare series of a single compactly supported profile, so the integral
is an exact finite sum over group translates whose image meets the box,
and each translate contributes a short smooth "spike" whose endpoints
solve a quadratic.  Blind quadrature is hopeless here: at T = 1000 the
support is a union of tens of thousands of intervals with relative width
down to 1e-6, which panel refinement cannot discover reliably.  The
adaptive path remains for small |T|, for cusp-decaying functions, and as
an independent cross-check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional

import numpy as np

from .algebra import UTBPoint, mobius_act
from .groups import PSL2Z, THIN4, GroupSpec, bottom_rows, reduce_points
from .quadrature import adaptive, gl_nodes

__all__ = [
    "TestFunction", "ShearSample", "RegistrationError", "bump_profile",
    "make_lattice_bump", "make_thin_bump", "make_strip_bump", "mu_T",
    "mu_T_strip", "fourier_coefficient", "horocycle_average", "haar_mean",
    "equidistribution_regression", "RegressionResult", "DEFAULT_BOX",
    "THIN_BOX",
]


def bump_profile(t):
    """C-infinity bump exp(1 - 1/(1-t^2)) on |t| < 1, zero outside."""
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    inside = np.abs(t) < 1.0
    ti = t[inside]
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - ti * ti))
    return out


class RegistrationError(ValueError):
    pass


@dataclass(frozen=True)
class TestFunction:
    """Automorphic observable with declared decay and support data.

    evaluator takes a UTBPoint; batch takes (x, y) arrays and is what the
    integrators call.  support is a fundamental-domain bounding box
    (x_lo, x_hi, y_lo, y_hi) for compactly supported functions, None for
    cusp-decaying ones.  profiles, set by the bump factories, holds the
    (P_x, P_y) product factors; it is what entitles the unfolded engines
    to reconstruct the single-translate profile instead of sampling the
    folded sum.  mode is "lattice", "thin", or "strip" (the last for
    functions living on the strip itself rather than the quotient).
    """
    name: str
    mode: str
    evaluator: Callable[[UTBPoint], float]
    batch: Callable[[np.ndarray, np.ndarray], np.ndarray]
    c_psi: float = 2.5
    alpha_psi: float = 2.0
    support: Optional[tuple] = None
    profiles: Optional[tuple] = None
    smoothness: str = "smooth"
    omega: float = 1.0
    peak: float = 1.0

    def spec(self) -> GroupSpec:
        if self.mode == "lattice":
            return PSL2Z
        if self.mode == "thin":
            return THIN4
        raise ValueError(f"no group attached to mode {self.mode!r}")


def _register(tf: TestFunction, n_samples: int = 1000, tol: float = 1e-7,
              seed: int = 20140823) -> TestFunction:
    """Spot-check automorphy before handing the function out."""
    if tf.mode == "strip":
        return tf
    rng = np.random.default_rng(seed)
    gens = tf.spec().gen_set()
    worst = 0.0
    for _ in range(n_samples):
        g = gens[rng.integers(len(gens))]
        if rng.random() < 0.5:
            g = g * gens[rng.integers(len(gens))]
        p = UTBPoint(rng.uniform(-3.0, 3.0),
                     math.exp(rng.uniform(math.log(0.1), math.log(8.0))),
                     0.0)
        worst = max(worst, abs(tf.evaluator(mobius_act(g, p)) - tf.evaluator(p)))
    if worst > tol:
        raise RegistrationError(
            f"{tf.name}: automorphy violated by {worst:.2e} (> {tol:g})")
    return tf


# -- built-in test functions -------------------------------------------------

# calibrated so the pre-asymptotic wobble at small radii sits well inside
# the regression tolerances; symmetric boxes land near a sign change of the
# correction term and make the small-T points unrepresentative
DEFAULT_BOX = (-0.2, 0.4, 1.3, 2.1)
# the thin group opens its coset windows late, so its default box hugs the
# floor of the injectivity range to pull the plateau forward
THIN_BOX = (-0.2, 0.4, 1.05, 1.8)


def _box_profiles(box):
    x_lo, x_hi, y_lo, y_hi = box

    def px(x):
        return bump_profile((2.0 * (np.asarray(x) - x_lo) / (x_hi - x_lo)) - 1.0)

    def py(y):
        return bump_profile((2.0 * (np.asarray(y) - y_lo) / (y_hi - y_lo)) - 1.0)

    return px, py


@lru_cache(maxsize=8)
def _thin_table(min_height: float) -> np.ndarray:
    # quantized heights so different radii share one cached word search
    for h in (32, 64, 128, 256, 512, 1024, 2048, 4096):
        if h >= min_height:
            return bottom_rows(THIN4, float(h))
    raise ValueError(f"row table of height {min_height:g} is out of reach")


def make_lattice_bump(box=DEFAULT_BOX, name: str = "lattice_bump") -> TestFunction:
    """Product bump in fundamental-domain coordinates, right-K-invariant.

    The box must sit strictly inside the standard domain (|x| < 1/2,
    y > 1), which makes the function a one-term Poincare series and the
    unfolded integrators exact.
    """
    x_lo, x_hi, y_lo, y_hi = box
    if not (-0.5 < x_lo < x_hi < 0.5 and 1.0 < y_lo < y_hi):
        raise ValueError("box must sit strictly inside the standard domain")
    px, py = _box_profiles(box)

    def batch(x, y):
        rx, ry = reduce_points(x, y)
        return px(rx) * py(ry)

    def evaluator(p: UTBPoint) -> float:
        return float(batch(np.array([p.x]), np.array([p.y]))[0])

    return _register(TestFunction(name, "lattice", evaluator, batch,
                                  c_psi=max(2.0 * y_hi, 1.0), alpha_psi=2.0,
                                  support=tuple(box), profiles=(px, py),
                                  omega=1.0))


def make_thin_bump(box=THIN_BOX, table_height: float = 80.0,
                   name: str = "thin_bump") -> TestFunction:
    """Poincare series of the box profile over the thin built-in group.

    The box sits above height 1 and is narrower than the cusp width, so
    (as in the lattice case) at most one group translate lands in it and
    pointwise evaluation is a finite scan of the cached coset table.
    table_height bounds the rows consulted; queries below the covered
    height raise rather than silently dropping translates.
    """
    x_lo, x_hi, y_lo, y_hi = box
    if not (1.0 < y_lo < y_hi and -2.0 < x_lo < x_hi < 2.0):
        raise ValueError("box must sit above height 1, inside one cusp period")
    px, py = _box_profiles(box)
    table = _thin_table(table_height)
    nz = table[table[:, 2] != 0]
    aa = nz[:, 0].astype(float)
    cc = nz[:, 2].astype(float)
    dd = nz[:, 3].astype(float)
    acs = aa / cc
    # a translate with row (c, d) reaches the box only if |cz+d|^2 <= y/y_lo;
    # for wrapped |x| <= 2 that keeps sqrt(c^2+d^2) under ~sqrt(5/(y*y_lo))
    y_floor = 5.0 / (y_lo * (table_height - 4.0) ** 2)

    def batch(x, y):
        x = np.mod(np.asarray(x, dtype=float) + 2.0, 4.0) - 2.0
        y = np.asarray(y, dtype=float)
        if np.any(y < y_floor):
            raise ValueError(f"{name}: need a taller row table below y={y_floor:g}")
        out = px(x) * py(y)
        for lo in range(0, len(x), 4096):
            sl = slice(lo, min(lo + 4096, len(x)))
            xs, ys = x[sl], y[sl]
            live = cc * cc <= 1.0 / (ys.min() * y_lo)
            c, d, ac = cc[live], dd[live], acs[live]
            den = (np.multiply.outer(c, xs) + d[:, None]) ** 2 + \
                np.multiply.outer(c * c, ys * ys)
            yr = ys[None, :] / den
            i, j = np.nonzero(yr > y_lo)
            if len(i):
                gx = ac[i] - (c[i] * xs[j] + d[i]) / (c[i] * den[i, j])
                gx = np.mod(gx + 2.0, 4.0) - 2.0
                np.add.at(out, sl.start + j, px(gx) * py(yr[i, j]))
        return out

    def evaluator(p: UTBPoint) -> float:
        return float(batch(np.array([p.x]), np.array([p.y]))[0])

    return _register(TestFunction(name, "thin", evaluator, batch,
                                  c_psi=max(2.0 * y_hi, 1.0), alpha_psi=2.0,
                                  support=tuple(box), profiles=(px, py),
                                  omega=4.0))


def make_strip_bump(box=DEFAULT_BOX, omega: float = 1.0,
                    name: str = "strip_bump") -> TestFunction:
    """Bump on the strip itself (x periodic, compact in y); not automorphic.
    Used by the coordinate-level strip checks."""
    x_lo, x_hi, y_lo, y_hi = box
    px, py = _box_profiles(box)

    def batch(x, y):
        x = np.mod(np.asarray(x, dtype=float) - x_lo, omega) + x_lo
        return px(x) * py(np.asarray(y, dtype=float))

    def evaluator(p: UTBPoint) -> float:
        return float(batch(np.array([p.x]), np.array([p.y]))[0])

    return TestFunction(name, "strip", evaluator, batch, support=tuple(box),
                        profiles=(px, py), omega=omega)


# -- mu_T --------------------------------------------------------------------

@dataclass(frozen=True)
class ShearSample:
    T: float
    value: float
    est_error: float
    n_nodes: int
    tol_met: bool
    route: str


def mu_T(psi: TestFunction, T: float, tol: float = 1e-7) -> ShearSample:
    """Integral of psi along the sheared ray against dy/y.

    Product bumps with |T| >= 8 go through the unfolded spike engine;
    everything else uses adaptive panels along the ray, with the
    evaluator doing its own domain folding.
    """
    if psi.profiles is not None and psi.mode in ("lattice", "thin") \
            and abs(T) >= 8.0:
        return _mu_T_unfolded(psi, float(T), tol)
    return _mu_T_generic(psi, float(T), tol)


def _mu_T_generic(psi: TestFunction, T: float, tol: float) -> ShearSample:
    u_min = 1.0 / math.sqrt(T * T + 1.0)
    if psi.support is not None:
        u_max = psi.support[3]
    else:
        # |psi| <= C y^-alpha above y = C, and on the ray the plane height
        # u is the cusp height once u > 1: cut where the tail drops below tol
        c, a = psi.c_psi, psi.alpha_psi
        u_max = max((2.0 * c / (a * tol)) ** (1.0 / a), c, 2.0)
    if u_max <= u_min:
        return ShearSample(T, 0.0, 0.0, 0, True, "generic")

    def f(u):
        return psi.batch(u * T, u) / u

    n_seed = int(np.clip(60.0 * max(abs(T), 1.0), 64, 30000))
    edges = np.geomspace(u_min, u_max, n_seed)
    res = adaptive(f, u_min, u_max, abs_tol=tol * 0.5, rel_tol=tol,
                   initial_edges=edges, max_panels=max(2 * n_seed, 20000))
    return ShearSample(T, res.value, res.est_error, res.n_evals,
                       res.converged, "generic")


def _window_rows(psi: TestFunction, T: float, y_lo: float):
    """(c, d, a/c) for every coset whose ray window reaches height y_lo.

    The window exists iff c|d| < (sqrt(T^2+1)+|T|)/(2 y_lo), with d of
    sign opposite to T.  Lattice rows are the coprime pairs and only need
    a/c mod 1, the modular inverse of d; thin rows come from the cached
    table, which carries the true a (the cusp offsets live in a coarser
    grid there, so a is needed modulo 4c, not c).
    """
    peak = (math.sqrt(T * T + 1.0) + abs(T)) / (2.0 * y_lo)
    if psi.mode == "lattice":
        for c in range(1, int(peak) + 2):
            for ad in range(1, int(peak / c) + 2):
                if math.gcd(c, ad) != 1:
                    continue
                d = ad if T < 0 else -ad
                ainv = pow(d % c, -1, c) if c > 1 else 0
                yield c, d, ainv / c
    else:
        for a, b, c, d in _thin_table(peak * 1.05 + 8.0):
            if c == 0 or (d >= 0 if T > 0 else d <= 0):
                continue
            if c * abs(d) <= peak + 1:
                yield int(c), int(d), a / c


def _mu_T_unfolded(psi: TestFunction, T: float, tol: float) -> ShearSample:
    x_lo, x_hi, y_lo, y_hi = psi.support
    px, py = psi.profiles
    u_min = 1.0 / math.sqrt(T * T + 1.0)
    omega = psi.omega
    t2p1 = T * T + 1.0
    kap_m = (math.sqrt(t2p1) - 1.0) / T
    kap_p = (math.sqrt(t2p1) + 1.0) / T

    row_data = []
    spikes = []         # (u_a, u_b, k_offset, row_index)
    for c, d, ac in _window_rows(psi, T, y_lo):
        A = c * c * t2p1
        B = 2.0 * c * d * T
        C = d * d
        # height condition c^2(T^2+1)u^2 + (2cdT - 1/y)u + d^2 <= 0; its
        # discriminant in the cancellation-free form 1/y^2 - 2B/y - 4c^2d^2
        disc0 = (1.0 / y_lo - 2.0 * B) / y_lo - 4.0 * C * c * c
        if disc0 <= 0.0:
            continue
        nb0 = 1.0 / y_lo - B
        sq0 = math.sqrt(disc0)
        out_lo = (nb0 - sq0) / (2.0 * A)
        out_hi = (nb0 + sq0) / (2.0 * A)
        if out_hi <= u_min:
            continue
        disc1 = (1.0 / y_hi - 2.0 * B) / y_hi - 4.0 * C * c * c
        if disc1 > 0.0:
            nb1 = 1.0 / y_hi - B
            sq1 = math.sqrt(disc1)
            bands = [(out_lo, (nb1 - sq1) / (2.0 * A)),
                     ((nb1 + sq1) / (2.0 * A), out_hi)]
        else:
            bands = [(out_lo, out_hi)]
        # the folded x turns around where cuT + d = kappa * cu
        stars = [s for s in (-d / (c * (T - kap_m)), -d / (c * (T + kap_p)))
                 if s > 0.0]
        ridx = len(row_data)
        row_data.append((float(c), float(d), float(ac), A, B, C))
        for lo, hi in bands:
            lo = max(lo, u_min)
            if hi <= lo:
                continue
            cuts = sorted([lo, hi] + [s for s in stars if lo < s < hi])
            for p, q in zip(cuts, cuts[1:]):
                if q > p:
                    _emit_spikes(spikes, ridx, p, q, c, d, ac, A, B, C, T,
                                 omega, x_lo, x_hi)

    # translation family: the ray itself crossing the box translates
    tr = []
    u_lo_t = max(u_min, y_lo)
    if y_hi > u_lo_t:
        xe = sorted((T * u_lo_t, T * y_hi))
        for k in range(int(math.ceil((xe[0] - x_hi) / omega)),
                       int(math.floor((xe[1] - x_lo) / omega)) + 1):
            kk = k * omega
            ua, ub = sorted(((kk + x_lo) / T, (kk + x_hi) / T))
            ua, ub = max(ua, u_lo_t), min(ub, y_hi)
            if ub > ua:
                tr.append((ua, ub, kk))

    rd = np.array(row_data) if row_data else np.zeros((0, 6))
    sp = np.array(spikes) if spikes else np.zeros((0, 4))
    tra = np.array(tr) if tr else np.zeros((0, 3))

    def total(n):
        xg, wg = gl_nodes(n)
        acc = 0.0
        nodes = 0
        if len(sp):
            ua, ub, kk = sp[:, 0], sp[:, 1], sp[:, 2]
            r = sp[:, 3].astype(int)
            U = (0.5 * (ua + ub))[:, None] + (0.5 * (ub - ua))[:, None] * xg
            W = (0.5 * (ub - ua))[:, None] * wg
            c, d, ac = rd[r, 0][:, None], rd[r, 1][:, None], rd[r, 2][:, None]
            A, B, C = rd[r, 3][:, None], rd[r, 4][:, None], rd[r, 5][:, None]
            D = (A * U + B) * U + C
            xr = ac - (c * U * T + d) / (c * D) - kk[:, None]
            acc += float(np.sum(W * px(xr) * py(U / D) / U))
            nodes += U.size
        if len(tra):
            ua, ub, kk = tra[:, 0], tra[:, 1], tra[:, 2]
            U = (0.5 * (ua + ub))[:, None] + (0.5 * (ub - ua))[:, None] * xg
            W = (0.5 * (ub - ua))[:, None] * wg
            acc += float(np.sum(W * px(U * T - kk[:, None]) * py(U) / U))
            nodes += U.size
        return acc, nodes

    v1, n1 = total(14)
    v2, n2 = total(22)
    err = abs(v2 - v1)
    if err > tol:
        v3, n3 = total(34)
        err = abs(v3 - v2)
        return ShearSample(T, v3, max(err, 1e-16), n1 + n2 + n3, err <= tol,
                           "unfolded")
    return ShearSample(T, v2, max(err, 1e-16), n1 + n2, True, "unfolded")


def _emit_spikes(out, ridx, p, q, c, d, ac, A, B, C, T, omega, x_lo, x_hi):
    """Sub-intervals of a monotone piece of the folded ray where x lands
    in the box, one per period offset."""

    def gval(u):
        return (c * u * T + d) / (c * ((A * u + B) * u + C))

    gp, gq = gval(p), gval(q)
    lo, hi = min(ac - gp, ac - gq), max(ac - gp, ac - gq)
    g_lo, g_hi = min(gp, gq), max(gp, gq)
    rising = gp <= gq
    for k in range(int(math.ceil((lo - x_hi) / omega)),
                   int(math.floor((hi - x_lo) / omega)) + 1):
        kk = k * omega
        # x in [kk+x_lo, kk+x_hi]  <=>  g in [ac-kk-x_hi, ac-kk-x_lo]
        xi0 = max(ac - kk - x_hi, g_lo)
        xi1 = min(ac - kk - x_lo, g_hi)
        if xi1 <= xi0:
            continue
        ua = _g_inverse(xi0 if rising else xi1, p, q, c, d, T, A, B, C)
        ub = _g_inverse(xi1 if rising else xi0, p, q, c, d, T, A, B, C)
        if ub > ua:
            out.append((ua, ub, kk, ridx))


def _g_inverse(xi, p, q, c, d, T, A, B, C):
    """Solve (cTu+d)/(c D(u)) = xi for the u in [p, q]; g is monotone
    there, so exactly one quadratic root is the right one."""
    a2 = xi * c * A
    a1 = xi * c * B - c * T
    a0 = xi * c * C - d
    if a2 == 0.0:
        return min(max(-a0 / a1, p), q)
    disc = a1 * a1 - 4.0 * a2 * a0
    sq = math.sqrt(max(disc, 0.0))
    qq = -0.5 * (a1 + math.copysign(sq, a1))
    r1 = qq / a2
    r2 = a0 / qq if qq != 0.0 else r1

    def miss(r):
        return max(p - r, r - q, 0.0)

    u = r1 if miss(r1) <= miss(r2) else r2
    return min(max(u, p), q)


# -- strip measure -----------------------------------------------------------

def mu_T_strip(psi: TestFunction, T: float, tol: float = 1e-8,
               route: str = "auto") -> float:
    """(1/omega) * integral of psi(x + iy) over x in [0, omega],
    y in (1/T, infinity), against dy/y dx.

    Automorphic product bumps unfold into a finite sum over group
    translates, each clipped by the height condition Im(g^-1 w) > 1/T;
    that sum is exact at any T.  route="direct" forces the literal 2-d
    quadrature instead, and strip-mode functions always integrate
    directly.
    """
    if route not in ("auto", "direct"):
        raise ValueError("route must be 'auto' or 'direct'")
    if not T > 0:
        raise ValueError("strip measure needs T > 0")
    if psi.mode == "strip" or route == "direct" or psi.profiles is None \
            or psi.support is None:
        return _strip_direct(psi, T, tol)
    return _strip_unfolded(psi, T, tol)


def _strip_direct(psi: TestFunction, T: float, tol: float,
                  nx: int = 1024) -> float:
    omega = psi.omega
    if psi.support is not None:
        y_top = psi.support[3]
    else:
        c, a = psi.c_psi, psi.alpha_psi
        y_top = max((2.0 * c / (a * tol)) ** (1.0 / a), c, 2.0)
    y_bot = 1.0 / T
    if y_top <= y_bot:
        return 0.0
    xs = (np.arange(nx) + 0.5) * (omega / nx)

    def f(y):
        return np.array([np.mean(psi.batch(xs, np.full(nx, yy))) / yy
                         for yy in np.atleast_1d(y)])

    res = adaptive(f, y_bot, y_top, abs_tol=tol, rel_tol=tol,
                   initial_edges=np.geomspace(y_bot, y_top, 200))
    return res.value


def _strip_rows(psi: TestFunction, T: float):
    """Rows (c, d), c > 0, whose translate can clear the 1/T height cut
    somewhere over the support box."""
    x_lo, x_hi, y_lo, y_hi = psi.support
    reach = math.sqrt(T * y_hi)
    xm = max(abs(x_lo), abs(x_hi))
    if psi.mode == "lattice":
        out = []
        for c in range(1, int(reach / y_lo) + 2):
            d_span = int(c * xm + reach) + 1
            out.extend((c, d) for d in range(-d_span, d_span + 1)
                       if math.gcd(c, abs(d)) == 1)
        return out
    table = _thin_table(reach + 4.0 * xm + 8.0)
    return [(int(c), int(d)) for _, _, c, d in table if c != 0]


def _strip_unfolded(psi: TestFunction, T: float, tol: float) -> float:
    x_lo, x_hi, y_lo, y_hi = psi.support
    px, py = psi.profiles
    omega = psi.omega
    rows = _strip_rows(psi, T)

    def run(ny, nx):
        yg, wy = gl_nodes(ny)
        xg, wx = gl_nodes(nx)
        ym = 0.5 * (y_lo + y_hi) + 0.5 * (y_hi - y_lo) * yg
        wym = 0.5 * (y_hi - y_lo) * wy
        xm = 0.5 * (x_lo + x_hi) + 0.5 * (x_hi - x_lo) * xg
        wxm = 0.5 * (x_hi - x_lo) * wx
        ix = float(wxm @ px(xm))
        # identity translate: its height is y itself, above 1/T on the
        # whole box once T y_lo > 1
        keep = ym > 1.0 / T
        total = ix * float(wym[keep] @ (py(ym[keep]) / ym[keep]))
        for c, d in rows:
            # x-window at height y: (cx+d)^2 < T y - c^2 y^2
            s2 = T * ym - c * c * ym * ym
            ok = s2 > 0.0
            if not np.any(ok):
                continue
            s = np.sqrt(s2[ok]) / c
            aa = np.maximum(-d / c - s, x_lo)
            bb = np.minimum(-d / c + s, x_hi)
            live = bb > aa
            if not np.any(live):
                continue
            ya, wya = ym[ok][live], wym[ok][live]
            aa, bb = aa[live], bb[live]
            X = (0.5 * (aa + bb))[:, None] + (0.5 * (bb - aa))[:, None] * xg
            WX = (0.5 * (bb - aa))[:, None] * wx
            h = ya[:, None] / ((c * X + d) ** 2 + (c * ya[:, None]) ** 2)
            inner = np.sum(WX * px(X) * h, axis=1)
            total += float(np.sum(wya * py(ya) / (ya * ya) * inner))
        return total / omega

    v1 = run(48, 24)
    v2 = run(96, 48)
    # the per-row x-windows move with y, so the y-integrand has kinks;
    # grid doubling is the error handle
    if abs(v2 - v1) > max(tol, 1e-12):
        v2 = run(192, 96)
    return v2


# -- horocycle data ----------------------------------------------------------

def fourier_coefficient(psi: TestFunction, m: int, y: float,
                        theta: float = 0.0, tol: float = 1e-9):
    """(1/omega) * integral over one period of psi(x+iy) e(-m x / omega).

    Trapezoid in x, spectrally accurate for smooth psi, grid doubling
    until stable.  Returns a float for m = 0, complex otherwise.  theta
    is accepted for interface symmetry; the built-in test functions are
    right-K-invariant and ignore it.
    """
    omega = psi.omega
    n, prev, cur = 1024, None, 0.0 + 0.0j
    while n <= (1 << 21):
        xs = (np.arange(n) + 0.5) * (omega / n)
        vals = psi.batch(xs, np.full(n, float(y)))
        cur = complex(np.mean(vals * np.exp((-2j * np.pi * m / omega) * xs)))
        if prev is not None and abs(cur - prev) <= tol * (1.0 + abs(cur)):
            break
        prev = cur
        n *= 2
    return cur.real if m == 0 else cur


def horocycle_average(psi: TestFunction, y: float, interval,
                      tol: float = 1e-9) -> float:
    x0, x1 = interval
    if not x1 > x0:
        raise ValueError("need x0 < x1")
    n, prev, cur = 2048, None, 0.0
    while n <= (1 << 21):
        xs = x0 + (np.arange(n) + 0.5) * ((x1 - x0) / n)
        cur = float(np.mean(psi.batch(xs, np.full(n, float(y)))))
        if prev is not None and abs(cur - prev) <= tol * (1.0 + abs(cur)):
            break
        prev = cur
        n *= 2
    return cur


def haar_mean(psi: TestFunction) -> float:
    """Mean against the normalized hyperbolic area 3/pi * dx dy / y^2 on
    the standard domain.  Lattice mode only."""
    if psi.mode != "lattice":
        raise ValueError("finite invariant measure needs the lattice mode")
    if psi.profiles is not None and psi.support is not None:
        x_lo, x_hi, y_lo, y_hi = psi.support
        px, py = psi.profiles
        xg, wg = gl_nodes(60)
        xm = 0.5 * (x_lo + x_hi) + 0.5 * (x_hi - x_lo) * xg
        ym = 0.5 * (y_lo + y_hi) + 0.5 * (y_hi - y_lo) * xg
        ix = 0.5 * (x_hi - x_lo) * float(wg @ px(xm))
        iy = 0.5 * (y_hi - y_lo) * float(wg @ (py(ym) / (ym * ym)))
        return 3.0 / math.pi * ix * iy
    c, a = psi.c_psi, psi.alpha_psi
    y_top = max((2.0 * c / (a * 1e-10)) ** (1.0 / a), c, 3.0)
    xg, wg = gl_nodes(40)
    xs = 0.5 * xg

    def fy(y):
        out = np.zeros_like(y)
        for i, yy in enumerate(np.atleast_1d(y)):
            live = xs * xs + yy * yy >= 1.0
            if np.any(live):
                out[i] = float((0.5 * wg[live]) @ psi.batch(
                    xs[live], np.full(int(live.sum()), yy))) / (yy * yy)
        return out

    res = adaptive(fy, math.sqrt(3.0) / 2.0, y_top, abs_tol=1e-11,
                   rel_tol=1e-10,
                   initial_edges=np.geomspace(math.sqrt(3.0) / 2.0, y_top, 400))
    return 3.0 / math.pi * res.value


# -- regression against the equidistribution law -----------------------------

@dataclass(frozen=True)
class RegressionResult:
    slope: float
    intercept: float
    decay_exponent: float
    t_list: tuple
    values: tuple
    residuals: tuple


def equidistribution_regression(psi: TestFunction, t_list,
                                tol: float = 1e-7) -> RegressionResult:
    """Fit mu_T(psi) against a*log T + b and report how fast the
    residuals die.

    Slope and intercept come from least squares over the full list; the
    decay exponent is the negated log-log slope of |residual|, dropping
    residuals under 1e-12 (quadrature noise, not signal).  The radii must
    span at least 1.5 decades so the two fitted terms are separable.
    """
    ts = np.array(sorted(float(t) for t in t_list))
    if len(ts) < 3 or ts[-1] < ts[0] * 10 ** 1.5:
        raise ValueError("need >= 3 radii spanning >= 1.5 decades")
    vals = np.array([mu_T(psi, t, tol).value for t in ts])
    X = np.column_stack([np.log(ts), np.ones_like(ts)])
    (a, b), *_ = np.linalg.lstsq(X, vals, rcond=None)
    resid = vals - (a * np.log(ts) + b)
    keep = np.abs(resid) > 1e-12
    if keep.sum() >= 2:
        decay = -float(np.polyfit(np.log(ts[keep]),
                                  np.log(np.abs(resid[keep])), 1)[0])
    else:
        decay = math.inf
    return RegressionResult(float(a), float(b), decay, tuple(ts.tolist()),
                            tuple(vals.tolist()), tuple(resid.tolist()))
