"""Hybridized two-body modes: selection rules and certified complex zeros.

The characteristic function D (one per polarization) vanishes at the
natural modes of the coupled system.  Complex zeros in the upper half
plane are located by seeding a damped Newton iteration from the
two-pole closed form at every selection-rule solution; the final set is
certified against an argument-principle winding count over the search
rectangle.

The search is restricted to the guided-hybrid window |omega - v_i kx| <
c k for both bodies: zeros outside (gap Fabry-Perot resonances
hybridizing with the radiation continuum) are a non-goal and lie beyond
the validity of the non-relativistic characteristic formula anyway.
"""

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.optimize import brentq

from . import kernels
from .core import Polarization, _as_pol
from .errors import (BoundaryTooCloseError, CertificationError,
                     DegenerateInputError)
from .modes import branch_table

_DEDUP_FRAC = 1e-6        # dedup radius relative to the frequency scale
_WINDOW_MARGIN = 0.02     # light-line safety margin, relative to c*k
_TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class HybridMode:
    """One certified complex eigenfrequency omega_c = omega' + i*lambda."""

    kx: float
    ky: float
    pol: Polarization
    omega_c: complex
    lambda_0: float | None = None

    @property
    def growth_rate(self):
        return self.omega_c.imag


@dataclass(frozen=True)
class SelectionSolution:
    """A (kx, ky) point where two co-moving poles Doppler-coincide.

    omega_co_1 * omega_co_2 < 0 holds by construction; slope is
    |d/dkx (omega1_lab - omega2_lab)| along kx and lambda0 the
    weak-coupling peak growth rate exp(-kd) sqrt|b1 b2|.  Negative
    branch ids (~n) mark the mirrored (negative-frequency) branch n.
    """

    kx: float
    ky: float
    pol: Polarization
    omega_co_1: float
    omega_co_2: float
    branch1: int
    branch2: int
    b1: float
    b2: float
    vg1: float
    vg2: float
    lambda0: float
    slope: float

    @property
    def k(self):
        return math.hypot(self.kx, self.ky)


def threshold_velocity(n1, n2):
    """Minimum |v2 - v1| for friction between slabs of indices n1, n2."""
    if not (n1 > 1.0 and n2 > 1.0):
        raise ValueError("threshold defined for refractive indices > 1")
    return 1.0 / n1 + 1.0 / n2


def selection_kx(omega_co_1, omega_co_2, v1, v2):
    """kx at which the Doppler-shifted pole frequencies coincide."""
    if v1 == v2:
        raise DegenerateInputError("selection kx undefined for v1 = v2")
    return -(omega_co_2 - omega_co_1) / (v2 - v1)


def two_pole_mode(omega1, omega2, b1, b2, k, d):
    """Both roots of the two-pole characteristic (weak coupling).

    omega = (omega1+omega2)/2 +- sqrt(e^{-2kd} b1 b2 + ((omega1-omega2)/2)^2);
    a conjugate pair with rate lambda0 sqrt(1 - (detuning/2 lambda0)^2)
    when b1 b2 < 0 and the detuning lies inside the window, else a real
    pair.
    """
    mid = 0.5 * (omega1 + omega2)
    s = cmath.sqrt(math.exp(-2.0 * k * d) * b1 * b2
                   + (0.5 * (omega1 - omega2)) ** 2)
    return mid + s, mid - s


def characteristic(pol, omega, kx, ky, scenario):
    """Two-body characteristic D = 1 - gap * R1(omega - v1 kx) R2(omega - v2 kx).

    Analytic in omega away from the Doppler-shifted reflection poles;
    D -> 1 as d -> infinity.  Pole errors from the reflection factors
    propagate (evaluate away from exact pole arguments).
    """
    from .core import reflection_slab, reflection_sheet

    pol = _as_pol(pol)
    k = math.hypot(kx, ky)
    w1 = omega - scenario.body1.v * kx
    w2 = omega - scenario.body2.v * kx
    if scenario.is_slab:
        r1 = reflection_slab(pol, w1, kx, ky, scenario.body1.medium)
        r2 = reflection_slab(pol, w2, kx, ky, scenario.body2.medium)
    else:
        r1 = reflection_sheet(w1, scenario.body1.medium)
        r2 = reflection_sheet(w2, scenario.body2.medium)
    if scenario.gap_full:
        gap = cmath.exp(-2.0 * scenario.d * kernels.gamma(k, complex(omega),
                                                          1.0, 1.0))
    else:
        gap = math.exp(-2.0 * scenario.d * k)
    return 1.0 - gap * r1 * r2


def _d_evaluators(pol, scenario, kx, ky):
    args = scenario.kernel_args(pol)

    def f(omega):
        return kernels.characteristic(complex(omega), kx, ky, *args)

    def farr(omegas):
        return kernels.characteristic_array(
            np.asarray(omegas, dtype=np.complex128), kx, ky, *args)
    return f, farr


def _guided_window(scenario, kx, k, margin=_WINDOW_MARGIN):
    """Lab-frame frequency window where both co-moving args are guided.

    |omega - v_i kx| < c k for i = 1, 2, shrunk by a light-line margin.
    """
    v1, v2 = scenario.body1.v, scenario.body2.v
    lo = -k + max(v1 * kx, v2 * kx) + margin * k
    hi = k + min(v1 * kx, v2 * kx) - margin * k
    return lo, hi


# ---------------------------------------------------------------------------
# adaptive rectangle boundary engine
# ---------------------------------------------------------------------------

class _NudgeNeeded(Exception):
    pass


def _wrap_angle(dt):
    return (dt + math.pi) % _TWO_PI - math.pi


def _cluster_points(anchors, delta, span_lo, span_hi):
    """Geometrically graded abscissas around each anchor inside the span.

    Resolves the phase winding of features sitting a distance ~delta off
    a horizontal edge; without them the uniform sampling can alias a
    full 2 pi turn between samples.
    """
    pts = []
    width = span_hi - span_lo
    max_span = width / 6.0
    for a in anchors:
        if a < span_lo - max_span or a > span_hi + max_span:
            continue
        if span_lo < a < span_hi:
            pts.append(a)
        s = max(delta, 1e-14 * max(abs(span_lo), abs(span_hi), 1.0))
        while s < max_span:
            for x in (a - s, a + s):
                if span_lo < x < span_hi:
                    pts.append(x)
            s *= 2.0
    return pts


def _trace_rectangle(farr, lo, hi, *, anchors=(), theta_max=0.4, mag_max=0.8,
                     max_depth=52, init_per_edge=24, floor_abs=1e-250):
    """Adaptively sample D along the rectangle boundary, counterclockwise.

    Returns ordered (z, f) arrays around the closed loop, refined until
    consecutive samples differ by < theta_max in argument and < mag_max
    in log magnitude.  anchors are real positions of known structure
    (poles and zero clusters near the real axis); horizontal edges get
    graded initial points around them.  Raises _NudgeNeeded when a
    sample lands on a zero or pole of D.
    """
    corners = [complex(lo.real, lo.imag), complex(hi.real, lo.imag),
               complex(hi.real, hi.imag), complex(lo.real, hi.imag)]
    segs = []
    for edge, (a, b) in enumerate(zip(corners, corners[1:] + corners[:1])):
        t = list(np.linspace(0.0, 1.0, init_per_edge, endpoint=False))
        if anchors and edge in (0, 2):
            # distance from this horizontal edge to the real-axis features
            delta = abs(a.imag) if edge == 0 else 0.3 * abs(a.imag)
            xs = _cluster_points(anchors, delta,
                                 min(a.real, b.real), max(a.real, b.real))
            t.extend((x - a.real) / (b.real - a.real) for x in xs)
            t = sorted(set(x for x in t if 0.0 <= x < 1.0))
        segs.append(a + (b - a) * np.array(t))
    z = np.concatenate(segs)
    f = farr(z)
    depth = np.zeros(len(z), dtype=np.int64)

    def _bad(vals):
        return (~np.isfinite(vals)) | (np.abs(vals) < floor_abs)

    if _bad(f).any():
        raise _NudgeNeeded
    while True:
        ang = np.angle(f)
        logm = np.log(np.abs(f))
        dtheta = np.abs(_wrap_angle(np.roll(ang, -1) - ang))
        dmag = np.abs(np.roll(logm, -1) - logm)
        need = (dtheta > theta_max) | (dmag > mag_max)
        if not need.any():
            return z, f
        if np.any(depth[need] >= max_depth):
            raise BoundaryTooCloseError(
                "adaptive boundary refinement exceeded depth limit")
        idx = np.nonzero(need)[0]
        mids = 0.5 * (z[idx] + np.roll(z, -1)[idx])
        fmids = farr(mids)
        if _bad(fmids).any():
            raise _NudgeNeeded
        child_depth = depth[idx] + 1
        z = np.insert(z, idx + 1, mids)
        f = np.insert(f, idx + 1, fmids)
        depth = np.insert(depth, idx + 1, child_depth)
        # parents were shifted by the inserts before them
        depth[idx + np.arange(len(idx))] = child_depth


def _loop_winding_and_sum(z, f, want_sum):
    ang = np.angle(f)
    dtheta = _wrap_angle(np.roll(ang, -1) - ang)
    total = float(np.sum(dtheta))
    n = total / _TWO_PI
    n_round = int(round(n))
    if abs(n - n_round) > 1e-3:
        raise BoundaryTooCloseError(f"winding number not integral: {n}")
    zero_sum = None
    if want_sum:
        logm = np.log(np.abs(f))
        dlog = (np.roll(logm, -1) - logm) + 1j * dtheta
        mid = 0.5 * (z + np.roll(z, -1))
        zero_sum = complex(np.sum(mid * dlog) / (2.0j * math.pi))
    return n_round, zero_sum


def _rect_analysis(farr, lo, hi, *, want_sum=False, **kw):
    """Winding number (zeros - poles) and optional zero-position sum.

    The rectangle is nudged slightly when the boundary lands on a zero
    or pole; a strictly-upper rectangle keeps its bottom edge in the
    upper half plane (raised, never lowered, so the enclosed-mode
    semantics of the caller survive).
    """
    if want_sum:
        # the zero-position sum needs a finer boundary polyline than the
        # integer winding count
        kw.setdefault("theta_max", 0.15)
        kw.setdefault("mag_max", 0.35)
    for attempt in range(8):
        try:
            z, f = _trace_rectangle(farr, lo, hi, **kw)
            if not want_sum:
                return _loop_winding_and_sum(z, f, False)
            # midpoint error on long smooth segments is invisible to the
            # angle criterion; drive it down by uniform halving passes
            n, zsum = _loop_winding_and_sum(z, f, True)
            for _ in range(6):
                mids = 0.5 * (z + np.roll(z, -1))
                fmids = farr(mids)
                bad = (~np.isfinite(fmids)) | (np.abs(fmids) < 1e-250)
                if bad.any():
                    raise _NudgeNeeded
                z2 = np.empty(2 * len(z), dtype=complex)
                f2 = np.empty(2 * len(f), dtype=complex)
                z2[0::2], z2[1::2] = z, mids
                f2[0::2], f2[1::2] = f, fmids
                z, f = z2, f2
                n2, zsum2 = _loop_winding_and_sum(z, f, True)
                done = abs(zsum2 - zsum) <= 2e-4 * max(abs(zsum2.imag),
                                                       1e-300)
                n, zsum = n2, zsum2
                if done:
                    break
            return n, zsum
        except _NudgeNeeded:
            dx = (hi.real - lo.real) * 2e-3 * (attempt + 1)
            dy = (hi.imag - lo.imag) * 2e-3 * (attempt + 1)
            if lo.imag > 0.0:
                bottom = lo.imag * (1.0 + 0.11 * (attempt + 1))
            else:
                bottom = lo.imag - dy
            lo = complex(lo.real - dx, bottom)
            hi = complex(hi.real + dx, hi.imag + dy)
    raise BoundaryTooCloseError("rectangle nudging failed to avoid zeros/poles")


def winding_count(pol, scenario, kx, ky, rect):
    """(zeros - poles) of D inside the complex rectangle rect = (lo, hi).

    Reflection poles inside the rectangle are all real for lossless
    media; count them with count_reflection_poles to extract the zero
    count when the rectangle straddles the real axis.
    """
    lo, hi = complex(rect[0]), complex(rect[1])
    _, farr = _d_evaluators(_as_pol(pol), scenario, kx, ky)
    anchors = tuple(_lab_pole_positions(scenario, _as_pol(pol), kx, ky))
    n, _ = _rect_analysis(farr, lo, hi, want_sum=False, anchors=anchors)
    return n


def zero_sum(pol, scenario, kx, ky, rect):
    """(count, sum of zero positions) of D inside rect.

    The sum is (1/2pi i) of the closed boundary integral of omega D'/D,
    accumulated from the branch-tracked log of D; with no poles inside,
    its imaginary part is the growth-rate sum entering the contour force
    formula.
    """
    lo, hi = complex(rect[0]), complex(rect[1])
    _, farr = _d_evaluators(_as_pol(pol), scenario, kx, ky)
    anchors = tuple(_lab_pole_positions(scenario, _as_pol(pol), kx, ky))
    return _rect_analysis(farr, lo, hi, want_sum=True, anchors=anchors)


def _lab_pole_positions(scenario, pol, kx, ky):
    """Real poles of D in the lab frame: Doppler-shifted guided modes."""
    k = math.hypot(kx, ky)
    out = []
    for body in (scenario.body1, scenario.body2):
        if scenario.is_slab:
            tab = branch_table(body.medium, pol, max(k, 1.0))
            ws = tab.pole_arrays(k)[0].tolist()
        else:
            ws = [body.medium.omega_sp]
        for w in ws:
            out.append(w + body.v * kx)
            out.append(-w + body.v * kx)
    return out


def count_reflection_poles(pol, scenario, kx, ky, rect):
    """Number of reflection poles of D inside rect (all on the real axis)."""
    lo, hi = complex(rect[0]), complex(rect[1])
    if not (lo.imag < 0.0 < hi.imag):
        return 0
    return sum(1 for w in _lab_pole_positions(scenario, _as_pol(pol), kx, ky)
               if lo.real < w < hi.real)


# ---------------------------------------------------------------------------
# selection rules on traced branches
# ---------------------------------------------------------------------------

def _k_hard_cap(d):
    return min(max(24.0, 30.0 / d), 120.0)


def _branch_birth(tab, bi):
    return tab._branches[bi]["k"][0]


def _branch_interp_arr(tab, bi, karr):
    br = tab._branches[bi]
    out = np.interp(karr, br["k"], br["w"])
    out = np.where((karr < br["k"][0]) | (karr > br["k"][-1]), np.nan, out)
    return out


def _pair_crossing(tab1, tab2, i, j, ky, adv, k_limit, allow_extend):
    """kx > 0 where branch i of body 1 Doppler-meets mirrored branch j."""

    def slack_arr(kxs):
        ks = np.hypot(kxs, ky)
        return (_branch_interp_arr(tab1, i, ks)
                + _branch_interp_arr(tab2, j, ks) - adv * kxs)

    def slack(kx):
        return float(slack_arr(np.array([kx]))[0])

    while True:
        birth = max(_branch_birth(tab1, i), _branch_birth(tab2, j))
        k_top = min(tab1.k_max, tab2.k_max, k_limit)
        kx_lo = math.sqrt(max(birth * birth - ky * ky, 0.0)) + 1e-9
        kx_hi = math.sqrt(max(k_top * k_top - ky * ky, 0.0))
        if kx_hi <= kx_lo:
            return None
        grid = np.linspace(kx_lo, kx_hi, 257)
        vals = slack_arr(grid)
        ok = np.isfinite(vals)
        grid, vals = grid[ok], vals[ok]
        if len(grid) < 2:
            return None
        neg = np.nonzero(vals <= 0.0)[0]
        if len(neg):
            a = int(neg[0])
            if a == 0:
                return float(grid[0])
            return float(brentq(slack, grid[a - 1], grid[a], rtol=1e-14))
        if allow_extend and min(tab1.k_max, tab2.k_max) < k_limit:
            tab1.extend(min(1.5 * tab1.k_max, k_limit))
            tab2.extend(min(1.5 * tab2.k_max, k_limit))
            continue
        return None


def _polish_crossing(tab1, tab2, i, j, ky, adv, kx_star):
    """Newton-polish a selection crossing on the exact pole dispersion.

    The interpolated crossing is off by the table resolution (~1e-5),
    many bandwidths for weak channels.  The iteration runs to a fixed
    point of a map that depends only on kx, so the result is independent
    of the bracket history (byte-reproducible sweeps); two-ulp limit
    cycles settle on the lower member.
    """
    k = math.hypot(kx_star, ky)
    p1 = tab1.polish_branch(i, k)
    p2 = tab2.polish_branch(j, k)
    prev = None
    for _ in range(12):
        resid = p1[0] + p2[0] - adv * kx_star
        dslack = (p1[2] + p2[2]) * (kx_star / k) - adv
        if dslack == 0.0:
            break
        kx_new = kx_star - resid / dslack
        if kx_new == kx_star:
            break
        if kx_new == prev:
            kx_star = min(kx_star, kx_new)
            k = math.hypot(kx_star, ky)
            p1 = tab1.polish_branch(i, k)
            p2 = tab2.polish_branch(j, k)
            break
        prev = kx_star
        kx_star = kx_new
        k = math.hypot(kx_star, ky)
        p1 = tab1.polish_branch(i, k)
        p2 = tab2.polish_branch(j, k)
    return kx_star, k, p1, p2


def solve_selection(scenario, pol, ky, kx_max=None, weight_cutoff=1e-12,
                    k_limit=None):
    """All selection-rule solutions at transverse wavenumber ky.

    Pairs a positive-frequency branch of body 1 with a mirrored branch
    of body 2 (orientation fixed by sign(v2 - v1) so that kx > 0) and
    solves for the lab-frame crossing along the traced dispersion.
    Crossings are confined to k <= k_limit; by default the limit keeps
    every channel whose gap weight exp(-2kd) is within weight_cutoff of
    the strongest one at this ky (pass the ky=0 limit to share a global
    weight window across a sweep).
    """
    return _solve_selection_cached(scenario, _as_pol(pol), float(ky),
                                   kx_max, weight_cutoff, k_limit)


@lru_cache(maxsize=65536)
def _solve_selection_cached(scenario, pol, ky, kx_max, weight_cutoff,
                            k_limit):
    if not scenario.is_slab:
        return _solve_selection_sheets(scenario, pol, ky, kx_max)
    v1, v2 = scenario.body1.v, scenario.body2.v
    dv = v2 - v1
    if dv == 0.0:
        return ()
    if abs(dv) < threshold_velocity(scenario.body1.medium.n_d,
                                    scenario.body2.medium.n_d):
        return ()
    sigma = 1.0 if dv > 0 else -1.0
    adv = abs(dv)
    d = scenario.d
    k_hard = _k_hard_cap(d)
    if kx_max is not None:
        k_hard = min(k_hard, math.hypot(kx_max, ky) + 1.0)
    if k_limit is not None:
        k_hard = min(k_hard, k_limit)
    tab1 = branch_table(scenario.body1.medium, pol, min(12.0, k_hard))
    tab2 = branch_table(scenario.body2.medium, pol, min(12.0, k_hard))

    # the fundamental pair crosses at the smallest k; it pins the weight
    # window for everything else
    kx0 = _pair_crossing(tab1, tab2, 0, 0, ky, adv, k_hard, allow_extend=True)
    if kx0 is None:
        return ()
    kx0, k0, _, _ = _polish_crossing(tab1, tab2, 0, 0, ky, adv, kx0)
    k_win = min(k_hard, k0 - math.log(weight_cutoff) / (2.0 * d))
    tab1.extend(k_win)
    tab2.extend(k_win)

    # a pair can only cross below k_win if the inverse phase indices sum
    # below the velocity contrast there
    k_chk = min(tab1.k_max, tab2.k_max, k_win)
    g1 = np.array([_branch_interp_arr(tab1, i, np.array([k_chk]))[0] / k_chk
                   for i in range(tab1.n_branches)])
    g2 = np.array([_branch_interp_arr(tab2, j, np.array([k_chk]))[0] / k_chk
                   for j in range(tab2.n_branches)])

    sols = []
    for i in range(tab1.n_branches):
        if not np.isfinite(g1[i]):
            continue
        for j in range(tab2.n_branches):
            if not np.isfinite(g2[j]) or g1[i] + g2[j] > adv:
                continue
            if max(_branch_birth(tab1, i), _branch_birth(tab2, j)) > k_win:
                continue
            kx_star = _pair_crossing(tab1, tab2, i, j, ky, adv, k_win,
                                     allow_extend=False)
            if kx_star is None:
                continue
            if kx_max is not None and kx_star > kx_max:
                continue
            k = math.hypot(kx_star, ky)
            if k > k_win:
                continue
            kx_star, k, (w1, b1, vg1), (w2, b2, vg2) = _polish_crossing(
                tab1, tab2, i, j, ky, adv, kx_star)
            lam0 = math.exp(-k * d) * math.sqrt(abs(b1 * b2))
            slope = abs(sigma * (vg1 + vg2) * (kx_star / k) - dv)
            sols.append(SelectionSolution(
                kx=kx_star, ky=ky, pol=pol,
                omega_co_1=sigma * w1, omega_co_2=-sigma * w2,
                branch1=i if sigma > 0 else ~i,
                branch2=~j if sigma > 0 else j,
                b1=sigma * b1, b2=-sigma * b2,
                vg1=sigma * vg1, vg2=-sigma * vg2,
                lambda0=lam0, slope=slope))
    if sols:
        wmax = max(math.exp(-2.0 * s.k * d) for s in sols)
        sols = [s for s in sols
                if math.exp(-2.0 * s.k * d) >= weight_cutoff * wmax]
    sols.sort(key=lambda s: (s.kx, s.omega_co_1))
    return tuple(sols)


def _solve_selection_sheets(scenario, pol, ky, kx_max):
    v1, v2 = scenario.body1.v, scenario.body2.v
    dv = v2 - v1
    if dv == 0.0:
        return ()
    sigma = 1.0 if dv > 0 else -1.0
    wsp1 = scenario.body1.medium.omega_sp
    wsp2 = scenario.body2.medium.omega_sp
    kx = sigma * (wsp1 + wsp2) / dv
    if kx <= 0 or (kx_max is not None and kx > kx_max):
        return ()
    k = math.hypot(kx, ky)
    b1 = sigma * (-wsp1 / 2.0)
    b2 = sigma * (wsp2 / 2.0)
    lam0 = math.exp(-k * scenario.d) * math.sqrt(abs(b1 * b2))
    return (SelectionSolution(
        kx=kx, ky=ky, pol=_as_pol(pol), omega_co_1=sigma * wsp1,
        omega_co_2=-sigma * wsp2, branch1=0, branch2=~0, b1=b1, b2=b2,
        vg1=0.0, vg2=0.0, lambda0=lam0, slope=abs(dv)),)


# ---------------------------------------------------------------------------
# certified complex-mode finder
# ---------------------------------------------------------------------------

# upper bound on the table-interpolation error of a pole frequency; the
# near-resonance prefilter widens its window by this much and candidates
# are then re-polished exactly at k before the final detuning test
_INTERP_TOL = 5e-4


def _pole_arrays(scenario, body, pol, k):
    """Co-moving pole data of one body, both signs (interpolated).

    Returns (omega, residue, branch, table); branch/table are None for
    sheets (their pole data is already exact).
    """
    if scenario.is_slab:
        tab = branch_table(body.medium, pol, max(k, 1.0))
        w0, b0, _, idx = tab.pole_arrays(k)
        w = np.concatenate([w0, -w0])
        b = np.concatenate([b0, -b0])
        br = list(idx) * 2
        return w, b, br, tab
    wsp = body.medium.omega_sp
    return (np.array([wsp, -wsp]), np.array([-wsp / 2.0, wsp / 2.0]),
            [None, None], None)


def _pole_set(scenario, body, pol, k):
    w, b, _, _ = _pole_arrays(scenario, body, pol, k)
    return list(zip(w.tolist(), b.tolist()))


def _signed_branch(branch, omega):
    return branch if omega >= 0 else ~branch


def _channel_pairs(scenario, pol, kx, ky, hints=None, window_factor=3.0):
    """Near-resonant opposite-sign pole pairs at (kx, ky).

    Returns (pairs, lam_hat) with pairs = [(w1_lab, w2_lab, b1, b2,
    lam0)].  Pair data comes from a first-order Taylor step off the
    nearest selection solution when hints (same-ky SelectionSolutions)
    are supplied; remaining candidates from the interpolated pole tables
    are re-solved exactly at k, so the detuning test resolves bands far
    narrower than the table resolution.
    """
    k = math.hypot(kx, ky)
    v1, v2 = scenario.body1.v, scenario.body2.v
    d = scenario.d
    pairs = []
    lam_hat = 0.0
    hinted = set()
    if hints:
        for h in hints:
            k0 = h.k
            if abs(k - k0) > 0.2 * max(k, k0):
                continue
            w1 = h.omega_co_1 + h.vg1 * (k - k0)
            w2 = h.omega_co_2 + h.vg2 * (k - k0)
            lam0 = math.exp(-k * d) * math.sqrt(abs(h.b1 * h.b2))
            lam_hat = max(lam_hat, lam0)
            hinted.add((h.branch1, h.branch2))
            o1 = w1 + v1 * kx
            o2 = w2 + v2 * kx
            if abs(o1 - o2) < window_factor * lam0:
                pairs.append((o1, o2, h.b1, h.b2, lam0))

    w1co, b1, br1, tab1 = _pole_arrays(scenario, scenario.body1, pol, k)
    w2co, b2, br2, tab2 = _pole_arrays(scenario, scenario.body2, pol, k)
    if not len(w1co) or not len(w2co):
        return pairs, lam_hat
    opp = np.less(np.outer(w1co, w2co), 0.0)
    lam0 = (math.exp(-k * d) * np.sqrt(np.abs(np.outer(b1, b2))))
    det = np.abs(np.subtract.outer(w1co + v1 * kx, w2co + v2 * kx))
    lam_hat = max(lam_hat, float(lam0[opp].max()) if opp.any() else 0.0)
    sel = opp & (det < window_factor * lam0 + _INTERP_TOL)
    ii, jj = np.nonzero(sel)

    polish_cache = {}

    def exact(tab, branch, w_int, b_int):
        if tab is None:
            return w_int, b_int
        sign = 1.0 if w_int >= 0 else -1.0
        key = (id(tab), branch)
        if key not in polish_cache:
            w, b, _ = tab.polish_branch(branch, k)
            polish_cache[key] = (w, b)
        w, b = polish_cache[key]
        return sign * w, sign * b

    for i, j in zip(ii, jj):
        sid = (_signed_branch(br1[i], w1co[i]) if br1[i] is not None else 0,
               _signed_branch(br2[j], w2co[j]) if br2[j] is not None else ~0)
        if sid in hinted:
            continue
        w1e, b1e = exact(tab1, br1[i], float(w1co[i]), float(b1[i]))
        w2e, b2e = exact(tab2, br2[j], float(w2co[j]), float(b2[j]))
        l0 = math.exp(-k * d) * math.sqrt(abs(b1e * b2e))
        o1 = w1e + v1 * kx
        o2 = w2e + v2 * kx
        lam_hat = max(lam_hat, l0)
        if abs(o1 - o2) < window_factor * l0:
            pairs.append((o1, o2, b1e, b2e, l0))
    return pairs, lam_hat


def _seed_pairs(scenario, pol, kx, ky, window_factor=3.0, hints=None):
    return _channel_pairs(scenario, pol, kx, ky, hints=hints,
                          window_factor=window_factor)


def _newton_polish(f, z0, scale, lam_window=None, max_iter=60):
    """Damped complex Newton on D, derivative by central difference.

    The difference step is capped by the coupling width so the
    derivative stays faithful inside narrow pole-pair structures.  The
    root is accepted when the residual drops below 1e-9 of the local
    D-scale |D'| * width (D swings by O(1) over one coupling width near
    interacting poles).
    """
    width = lam_window if lam_window else 1e-3 * scale
    z = complex(z0)
    fz = f(z)
    if not cmath.isfinite(fz):
        return None
    d = 0.0
    stalls = 0
    for _ in range(max_iter):
        h = max(min(1e-7 * max(abs(z), scale), 0.03 * width), 1e-13 * scale)
        d = (f(z + h) - f(z - h)) / (2.0 * h)
        if d == 0 or not cmath.isfinite(d):
            return None
        if abs(fz) <= 1e-10 * max(1.0, abs(d) * width):
            break
        step = -fz / d
        lam = 1.0
        for _ in range(10):
            z_new = z + lam * step
            f_new = f(z_new)
            if cmath.isfinite(f_new) and abs(f_new) < abs(fz):
                break
            lam *= 0.5
        else:
            break
        stalls = stalls + 1 if abs(f_new) > 0.5 * abs(fz) else 0
        z, fz = z_new, f_new
        if stalls >= 2:
            break
    d_scale = max(1.0, abs(d) * width)
    # near interacting poles the roundoff floor of D is |D'| * eps * (scale
    # of the cancelling frequency differences); never demand less
    noise = 8.0 * abs(d) * 2.3e-16 * (abs(z) + scale)
    if abs(fz) <= max(1e-9 * d_scale, noise):
        return z
    return None


def find_complex_modes(pol, scenario, kx, ky, certify=True, hints=None):
    """All certified growing modes (Im omega > 0) of D at (kx, ky).

    Seeds from the two-pole closed form at every opposite-sign pole pair
    inside (a margin around) the |omega1 - omega2| < 2 lambda0 window,
    polishes with damped Newton, deduplicates and keeps growing roots in
    the guided window.  With certify=True the count is checked against
    the winding number over the searched region (the union of channel
    windows); a mismatch triggers subdivision recovery and, failing
    that, CertificationError.  hints are same-ky SelectionSolutions that
    pin the channel data to solver precision (used by the quadrature).
    """
    pol = _as_pol(pol)
    k = math.hypot(kx, ky)
    if k == 0.0:
        return []
    f, farr = _d_evaluators(pol, scenario, kx, ky)
    scale = k
    win_lo, win_hi = _guided_window(scenario, kx, k)
    if win_hi <= win_lo:
        return []

    pairs, lam_hat = _channel_pairs(scenario, pol, kx, ky, hints=hints,
                                    window_factor=6.0)
    found = []
    for o1, o2, b1, b2, lam0 in pairs:
        if abs(o1 - o2) >= 3.0 * lam0:
            continue
        up, dn = two_pole_mode(o1, o2, b1, b2, k, scenario.d)
        z0 = up if up.imag >= dn.imag else dn
        if z0.imag <= 0.0:
            z0 = complex(0.5 * (o1 + o2), 0.3 * lam0)
        z = _newton_polish(f, z0, scale, lam_window=lam0)
        if z is not None and z.imag > 0.0 and win_lo < z.real < win_hi:
            found.append((z, lam0))

    if lam_hat > 0.0:
        floor = max(1e-11 * scale, min(1e-3 * lam_hat,
                    0.25 * min((z.imag for z, _ in found), default=math.inf)))
    else:
        floor = 1e-8 * scale
    found = [(z, l0) for z, l0 in found if z.imag > floor]
    found = _dedup(found, _DEDUP_FRAC * scale)

    if certify and pairs:
        top = max([3.0 * lam_hat, 20.0 * floor]
                  + [1.6 * z.imag for z, _ in found])
        windows = _merged_windows(pairs, found, win_lo, win_hi, lam_hat)
        poles = _lab_pole_positions(scenario, pol, kx, ky)
        n_total = 0
        per_window = []
        for wlo, whi in windows:
            anchors = tuple([w for w in poles if wlo - 1 < w < whi + 1]
                            + [0.5 * (o1 + o2) for o1, o2, *_ in pairs]
                            + [z.real for z, _ in found])
            lo = complex(wlo, floor)
            hi = complex(whi, top)
            n = _rect_analysis(farr, lo, hi, anchors=anchors)[0]
            per_window.append((lo, hi, anchors, n))
            n_total += n
        if n_total != len(found):
            for lo, hi, anchors, n in per_window:
                inside = [zf for zf in found
                          if lo.real < zf[0].real < hi.real
                          and lo.imag < zf[0].imag < hi.imag]
                if n != len(inside):
                    found = _recover_modes(f, farr, lo, hi, found, scale,
                                           anchors=anchors)
            n_total = sum(_rect_analysis(farr, lo, hi, anchors=anchors)[0]
                          for lo, hi, anchors, _ in per_window)
            if n_total != len(found):
                raise CertificationError(
                    f"winding count {n_total} != located modes "
                    f"{len(found)} at kx={kx}, ky={ky}, pol={pol.value}")
    found.sort(key=lambda zl: (zl[0].real, zl[0].imag))
    return [HybridMode(kx=kx, ky=ky, pol=pol, omega_c=z, lambda_0=l0)
            for z, l0 in found]


def _merged_windows(pairs, found, win_lo, win_hi, lam_hat):
    """Channel windows mid +- 8 lambda0, merged and clipped."""
    iv = []
    for o1, o2, _, _, lam0 in pairs:
        mid = 0.5 * (o1 + o2)
        hw = 8.0 * max(lam0, 0.25 * lam_hat)
        iv.append((max(mid - hw, win_lo), min(mid + hw, win_hi)))
    for z, _ in found:
        iv.append((max(z.real - 8.0 * lam_hat, win_lo),
                   min(z.real + 8.0 * lam_hat, win_hi)))
    iv = [w for w in iv if w[1] > w[0]]
    iv.sort()
    merged = []
    for lo, hi in iv:
        if merged and lo <= merged[-1][1]:
            merged[-1] = (merged[-1][0], max(merged[-1][1], hi))
        else:
            merged.append((lo, hi))
    return merged


def _dedup(found, radius):
    out = []
    for z, l0 in sorted(found, key=lambda t: (t[0].real, t[0].imag)):
        if all(abs(z - w) > radius for w, _ in out):
            out.append((z, l0))
    return out


def _recover_modes(f, farr, lo, hi, found, scale, anchors=()):
    """Locate zeros missed by seeding via recursive rectangle subdivision."""
    boxes = [(lo, hi)]
    centers = []
    min_size = 1e-7 * scale
    guard = 0
    while boxes and guard < 4000:
        guard += 1
        a, b = boxes.pop()
        try:
            n = _rect_analysis(farr, a, b, anchors=anchors)[0]
        except BoundaryTooCloseError:
            n = 1  # unresolved structure inside, keep splitting
        if n <= 0:
            continue
        w, hgt = b.real - a.real, b.imag - a.imag
        if max(w, hgt) < min_size or (n == 1 and max(w, hgt) < 1e-3 * scale):
            centers.append(0.5 * (a + b))
            continue
        if w >= hgt:
            m = 0.5 * (a.real + b.real)
            boxes.append((a, complex(m, b.imag)))
            boxes.append((complex(m, a.imag), b))
        else:
            m = 0.5 * (a.imag + b.imag)
            boxes.append((a, complex(b.real, m)))
            boxes.append((complex(a.real, m), b))
    merged = list(found)
    for c in centers:
        z = _newton_polish(f, c, scale, lam_window=hi.imag - lo.imag)
        if z is not None and z.imag > lo.imag:
            merged.append((z, None))
    return _dedup(merged, _DEDUP_FRAC * scale)
