"""Friction force spectra from the instability growth rates.

Four mutually cross-validating routes:

* force_mode_sum      -- quadrature of kx * sum(lambda) over certified modes
* force_contour       -- argument-principle contour integral, extrapolated
                         in the offset of the contour above the real axis
* force_weak_coupling -- 1-D integral along the selection curves using the
                         closed-form band integral (residues and group
                         velocities of the uncoupled guided modes)
* force_pendry_c16    -- the delta-collapsed lossless limit of the
                         Im R x Im R formula (the Pendry comparison)

The instability support is a thin band around each selection curve, so
the kx quadrature lays Gauss-Legendre panels across the band (half-width
4*lambda0/|d(omega1-omega2)/dkx|) and the ky integral is a trapezoid on
an adaptively terminated range.  All reductions are compensated sums in
a fixed order, so results are reproducible bit-for-bit.
"""

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .core import Polarization, _as_pol
from .errors import (DegenerateInputError, NonConvergenceError,
                     SaturationError, SupportTruncationError)
from .instability import (_channel_pairs, _d_evaluators, _guided_window,
                          _merged_windows, _rect_analysis,
                          find_complex_modes, solve_selection)

_SINH_MAX = 700.0
_PREF = 1.0 / (2.0 * math.pi) ** 2


@dataclass(frozen=True)
class ForceGrid:
    """Quadrature controls for the force integrals."""

    kx_max: float = 40.0
    ky_max: float = 40.0
    n_ky: int = 49                      # trapezoid points on [0, ky_end], odd
    panel_points: int = 16              # Gauss-Legendre order per kx panel
    panel_halfwidth_bands: float = 2.0  # units of the 2*lambda0/slope band
    weight_cutoff: float = 1e-12
    certify: bool = True
    contour_window: str = "local"       # or "full": whole guided window

    def __post_init__(self):
        if self.kx_max <= 0 or self.ky_max <= 0:
            raise ValueError("grid bounds must be positive")
        if self.n_ky < 5 or self.n_ky % 2 == 0:
            raise ValueError("n_ky must be odd and >= 5")
        if self.contour_window not in ("full", "local"):
            raise ValueError("contour_window must be 'full' or 'local'")


@dataclass(frozen=True)
class ForceResult:
    """Dimensionless force per unit area F_hat = (F/A0) h_s^4/(hbar c).

    value is the magnitude; the signed per-body force on body i is
    value * sign, with sgn(F_i) = -sgn(v_i - v_j).
    """

    value: float
    pol: Polarization
    method: str
    kx_max: float
    ky_max: float
    nx: int
    ny: int
    error: float
    body1_sign: int

    def signed(self, body=1):
        s = self.body1_sign if body == 1 else -self.body1_sign
        return s * self.value


@dataclass(frozen=True)
class ForceTimeSeries:
    times: tuple
    values: tuple


def pseudo_momentum_sign(v_i, v_j):
    """Sign of the pseudo-momentum of body i: -sgn(v_i - v_j)."""
    if v_i == v_j:
        raise DegenerateInputError(
            "pseudo-momentum sign undefined for equal velocities")
    return -1 if v_i > v_j else 1


def matter_total_ratio(n_i, v_i, sign_branch):
    """Factor converting the total force to the matter force near threshold.

    ratio = 1 - (sign_branch/n_i + v_i/c)^2; with v_i = 0 it reduces to
    1 - 1/n_i^2.
    """
    if not n_i > 1.0:
        raise ValueError("n_i must be > 1")
    if not abs(v_i) < 1.0:
        raise ValueError("|v_i| must be < 1")
    if sign_branch not in (1, -1, 1.0, -1.0):
        raise ValueError("sign_branch must be +-1")
    return 1.0 - (sign_branch / n_i + v_i) ** 2


def _body1_sign(scenario):
    v1, v2 = scenario.body1.v, scenario.body2.v
    if v1 == v2:
        return 0
    return pseudo_momentum_sign(v1, v2)


def lambda_spectrum(pol, scenario, kx, ky, certify=True, hints=None):
    """Sum of growth rates over all certified growing modes at (kx, ky)."""
    modes = find_complex_modes(pol, scenario, kx, ky, certify=certify,
                               hints=hints)
    return math.fsum(m.growth_rate for m in modes)


# ---------------------------------------------------------------------------
# ridge-following quadrature
# ---------------------------------------------------------------------------

@lru_cache(maxsize=32)
def _gl_rule(n):
    x, w = np.polynomial.legendre.leggauss(n)
    return x, w


def _panels(sols, kx_max, hw_bands):
    """Merged kx intervals covering the instability bands."""
    iv = []
    for s in sols:
        hw = hw_bands * 2.0 * s.lambda0 / max(s.slope, 1e-300)
        lo = max(s.kx - hw, 1e-12)
        hi = min(s.kx + hw, kx_max)
        if hi > lo:
            iv.append((lo, hi))
    iv.sort()
    merged = []
    for lo, hi in iv:
        if merged and lo <= merged[-1][1]:
            merged[-1] = (merged[-1][0], max(merged[-1][1], hi))
        else:
            merged.append((lo, hi))
    return merged


def _row_quadrature(sols, kx_max, grid, node_fn):
    """One ky row: Gauss-Legendre panels of node_fn over the merged bands.

    node_fn(kx) -> (value, aux); returns (value, error, records) with one
    (kx, weight, aux) record per fine-rule node.  The error estimate is
    the difference against the half-order rule.
    """
    panels = _panels(sols, kx_max, grid.panel_halfwidth_bands)
    vals, errs, recs = [], [], []
    n_coarse = max(grid.panel_points // 2, 4)
    for lo, hi in panels:
        mid, half = 0.5 * (hi + lo), 0.5 * (hi - lo)
        fine_terms = []
        for xi, wi in zip(*_gl_rule(grid.panel_points)):
            kx = mid + half * xi
            fv, aux = node_fn(kx)
            fine_terms.append(half * wi * fv)
            recs.append((kx, half * wi, aux))
        coarse_terms = [half * wi * node_fn(mid + half * xi)[0]
                        for xi, wi in zip(*_gl_rule(n_coarse))]
        fine = math.fsum(fine_terms)
        vals.append(fine)
        errs.append(abs(fine - math.fsum(coarse_terms)))
    return math.fsum(vals), math.fsum(errs), recs


def _row_weight_estimate(sols):
    """Closed-form band integral sum(pi * kx * lambda0^2 / slope) per row."""
    return math.fsum(math.pi * s.kx * s.lambda0 ** 2 / max(s.slope, 1e-300)
                     for s in sols)


def _ky_layout(pol, scenario, grid):
    """(ky grid, ky=0 solutions, global k limit), or (None, ..) when empty.

    Probes the closed-form row weight on a coarse grid, terminates the
    range where the weight falls below weight_cutoff of its maximum and
    verifies the configured box really contains the support.  The global
    k limit pins the gap-weight window of the strongest (ky = 0) channel
    for all rows.
    """
    sols0 = solve_selection(scenario, pol, 0.0, kx_max=grid.kx_max,
                            weight_cutoff=grid.weight_cutoff)
    if not sols0:
        return None, sols0, None
    k_limit = (min(s.k for s in sols0)
               - math.log(grid.weight_cutoff) / (2.0 * scenario.d))
    probes = np.linspace(0.0, grid.ky_max, 41)
    probe_sols = [solve_selection(scenario, pol, ky, kx_max=grid.kx_max,
                                  weight_cutoff=grid.weight_cutoff,
                                  k_limit=k_limit)
                  for ky in probes]
    est = np.array([_row_weight_estimate(s) for s in probe_sols])
    if not est.any():
        return None, sols0, k_limit
    top = est.max()
    if est[-1] > 1e-8 * top:
        raise SupportTruncationError(
            f"instability support not negligible at ky_max={grid.ky_max}")
    alive = np.nonzero(est > grid.weight_cutoff * top)[0]
    ky_end = probes[min(int(alive[-1]) + 1, len(probes) - 1)]
    for s in sols0:
        if s.kx > grid.kx_max - 4.0 * s.lambda0 / max(s.slope, 1e-300):
            raise SupportTruncationError(
                f"selection band at kx={s.kx} truncated by kx_max={grid.kx_max}")
    return np.linspace(0.0, max(ky_end, 1e-6), grid.n_ky), sols0, k_limit


def _trapz(ys, xs):
    dx = xs[1] - xs[0]
    return math.fsum(0.5 * dx * (ys[i] + ys[i + 1])
                     for i in range(len(ys) - 1))


def _trapz_pair_error(ys, xs):
    """|trapz - coarse trapz|/3 on an odd-length uniform grid."""
    dx = xs[1] - xs[0]
    fine = _trapz(ys, xs)
    coarse = math.fsum(dx * (ys[i] + ys[i + 2])
                       for i in range(0, len(ys) - 2, 2))
    return abs(fine - coarse) / 3.0


# ---------------------------------------------------------------------------
# mode field (shared by mode-sum, first-excitation and time evolution)
# ---------------------------------------------------------------------------

@lru_cache(maxsize=16)
def _mode_field(pol, scenario, grid):
    """Per-node growth rates on the ridge quadrature.

    Returns (rows, kys) with rows[i] = (nodes, row_value, row_error) and
    nodes = ((kx, weight, (lambda, ...)), ...); the reduction with node
    weight kx*sum(lambda) reproduces force_mode_sum exactly.
    """
    kys, _, k_limit = _ky_layout(pol, scenario, grid)
    if kys is None:
        return None, None
    rows = []
    for ky in kys:
        sols = solve_selection(scenario, pol, ky, kx_max=grid.kx_max,
                               weight_cutoff=grid.weight_cutoff,
                               k_limit=k_limit)

        def node_fn(kx):
            modes = find_complex_modes(pol, scenario, kx, ky,
                                       certify=grid.certify, hints=sols)
            lams = tuple(m.growth_rate for m in modes)
            return kx * math.fsum(lams), lams

        v, e, recs = _row_quadrature(sols, grid.kx_max, grid, node_fn)
        rows.append((tuple(recs), v, e))
    return tuple(rows), tuple(kys)


def _field_reduce(rows, kys, weight_fn):
    """2 * trapz_ky of sum_nodes w * weight_fn(kx, lambdas)."""
    row_vals = [math.fsum(w * weight_fn(kx, lams) for kx, w, lams in nodes)
                for nodes, _, _ in rows]
    return 2.0 * _trapz(row_vals, kys)


def _field_error(rows, kys):
    vals = [v for _, v, _ in rows]
    errs = [e for _, _, e in rows]
    return 2.0 * (_trapz_pair_error(vals, kys) + _trapz(errs, kys))


def force_mode_sum(pol, scenario, grid=None):
    """Mode-sum force: (1/2pi)^2 integral over (kx, ky) of kx*sum(lambda)."""
    pol = _as_pol(pol)
    grid = grid or ForceGrid()
    rows, kys = _mode_field(pol, scenario, grid)
    if rows is None:
        return _zero_result(pol, scenario, grid, "mode_sum")
    value = _PREF * _field_reduce(rows, kys,
                                  lambda kx, lams: kx * math.fsum(lams))
    err = _PREF * _field_error(rows, kys)
    return ForceResult(value=abs(value), pol=pol, method="mode_sum",
                       kx_max=grid.kx_max, ky_max=grid.ky_max,
                       nx=grid.panel_points, ny=grid.n_ky, error=err,
                       body1_sign=_body1_sign(scenario))


def first_excitation_force(pol, scenario, grid=None):
    """Force at the creation of the first excitation.

    With the weak-coupling momenta |p_wv| = kx/(2|omega_c|) the per-mode
    weight 2 lambda |omega_c| |p_wv| collapses to lambda*kx, so the
    magnitude coincides with force_mode_sum (and with the force variance
    at t = 0); only the per-body sign is attached.
    """
    res = force_mode_sum(pol, scenario, grid)
    return ForceResult(value=res.value, pol=res.pol,
                       method="first_excitation", kx_max=res.kx_max,
                       ky_max=res.ky_max, nx=res.nx, ny=res.ny,
                       error=res.error, body1_sign=res.body1_sign)


def force_time_series(pol, scenario, grid, times):
    """Expectation of the force vs time, F(t) ~ sum lambda kx sinh(2 lambda t).

    Exactly zero at t = 0; raises SaturationError when any 2*lambda*t
    exceeds the sinh overflow horizon (the constant-velocity assumption
    has long failed there anyway).
    """
    pol = _as_pol(pol)
    grid = grid or ForceGrid()
    times = [float(t) for t in times]
    if any(t < 0 for t in times):
        raise ValueError("times must be >= 0")
    rows, kys = _mode_field(pol, scenario, grid)
    if rows is None:
        return ForceTimeSeries(times=tuple(times),
                               values=tuple(0.0 for _ in times))
    lam_max = max((max(lams, default=0.0)
                   for nodes, _, _ in rows for _, _, lams in nodes),
                  default=0.0)
    values = []
    for t in times:
        if 2.0 * lam_max * t > _SINH_MAX:
            raise SaturationError(
                f"2*lambda*t = {2 * lam_max * t:.1f} overflows sinh")
        if t == 0.0:
            values.append(0.0)
            continue
        v = _PREF * _field_reduce(
            rows, kys,
            lambda kx, lams: kx * math.fsum(l * math.sinh(2.0 * l * t)
                                            for l in lams))
        values.append(v)
    return ForceTimeSeries(times=tuple(times), values=tuple(values))


# ---------------------------------------------------------------------------
# contour-integral force
# ---------------------------------------------------------------------------

def _node_sigma_lambda_contour(pol, scenario, kx, ky, eta, window,
                               hints=None):
    """Growth-rate sum at one node from the boundary integral of omega D'/D.

    The closed rectangles realize the contour passing at Im omega = eta
    above the real axis over the channel windows (zeros can live nowhere
    else); the closing edges replace the discarded arc at infinity.
    Zeros with lambda < eta fall outside and are recovered by the
    eta -> 0 extrapolation.
    """
    k = math.hypot(kx, ky)
    pairs, lam_hat = _channel_pairs(scenario, pol, kx, ky, hints=hints,
                                    window_factor=6.0)
    if lam_hat <= max(eta, 1e-11 * k) or not pairs:
        # below the growth floor the modes are indistinguishable from
        # real in double precision (same cut as the certified finder)
        return 0.0
    win_lo, win_hi = _guided_window(scenario, kx, k)
    if win_hi <= win_lo:
        return 0.0
    if window == "local":
        windows = _merged_windows(pairs, [], win_lo, win_hi, lam_hat)
    else:
        windows = [(win_lo, win_hi)]
    top = 3.0 * lam_hat
    if top <= eta:
        return 0.0
    _, farr = _d_evaluators(pol, scenario, kx, ky)
    anchors = tuple(w for p_ in pairs for w in p_[:2])
    total = 0.0
    for lo_re, hi_re in windows:
        _, zsum = _rect_analysis(farr, complex(lo_re, eta),
                                 complex(hi_re, top), want_sum=True,
                                 anchors=anchors)
        total += max(zsum.imag, 0.0)
    return total


def force_contour(pol, scenario, grid=None, eta=None):
    """Contour-integral force from omega D'/D along Im omega = eta.

    Evaluates the full force for a decreasing sequence of contour
    offsets eta and extrapolates eta -> 0+ (the missed band-edge mass
    scales as eta^3).
    """
    pol = _as_pol(pol)
    grid = grid or ForceGrid()
    kys, sols0, k_limit = _ky_layout(pol, scenario, grid)
    if kys is None:
        return _zero_result(pol, scenario, grid, "contour")
    lam_hat = max((s.lambda0 for s in sols0), default=0.0)
    if lam_hat <= 1e-11 * min(s.k for s in sols0):
        return _zero_result(pol, scenario, grid, "contour")
    eta0 = eta if eta is not None else 0.1 * lam_hat
    if not eta0 > 0.0:
        raise ValueError("contour offset eta must be > 0")
    etas = [eta0, 0.5 * eta0, 0.25 * eta0]

    totals, quad_errs = [], []
    for e in etas:
        row_vals, row_errs = [], []
        for ky in kys:
            sols = solve_selection(scenario, pol, ky, kx_max=grid.kx_max,
                                   weight_cutoff=grid.weight_cutoff,
                                   k_limit=k_limit)

            def node_fn(kx, _eta=e, _ky=ky, _sols=sols):
                s = _node_sigma_lambda_contour(pol, scenario, kx, _ky, _eta,
                                               grid.contour_window,
                                               hints=_sols)
                return kx * s, ()

            v, er, _ = _row_quadrature(sols, grid.kx_max, grid, node_fn)
            row_vals.append(v)
            row_errs.append(er)
        totals.append(2.0 * _trapz(row_vals, kys))
        quad_errs.append(2.0 * _trapz(row_errs, kys))

    # F(eta) = F0 - C*eta^3 from the band-edge sliver
    coef = np.polyfit(np.array(etas) ** 3, np.array(totals), 1)
    f0 = float(coef[1])
    resid = abs(f0 - totals[-1])
    if abs(f0) > 10.0 * quad_errs[-1] and resid > 0.25 * abs(f0):
        raise NonConvergenceError(
            f"eta extrapolation residual {resid} vs value {f0}")
    return ForceResult(value=abs(_PREF * f0), pol=pol, method="contour",
                       kx_max=grid.kx_max, ky_max=grid.ky_max,
                       nx=grid.panel_points, ny=grid.n_ky,
                       error=_PREF * (resid + quad_errs[-1]),
                       body1_sign=_body1_sign(scenario))


# ---------------------------------------------------------------------------
# weak-coupling / Pendry forces (1-D selection-curve integrals)
# ---------------------------------------------------------------------------

def _c17_row(sols, same_branch_only):
    """pi * sum kx e^{-2kd}|b1 b2| / slope, via lambda0^2 = e^{-2kd}|b1 b2|."""
    return math.pi * math.fsum(
        s.kx * s.lambda0 ** 2 / max(s.slope, 1e-300)
        for s in sols
        if not (same_branch_only and s.branch2 != ~s.branch1))


def _force_c17(pol, scenario, grid, same_branch_only, method):
    pol = _as_pol(pol)
    grid = grid or ForceGrid()
    kys, _, k_limit = _ky_layout(pol, scenario, grid)
    if kys is None:
        return _zero_result(pol, scenario, grid, method)
    row_vals = []
    for ky in kys:
        sols = solve_selection(scenario, pol, ky, kx_max=grid.kx_max,
                               weight_cutoff=grid.weight_cutoff,
                               k_limit=k_limit)
        row_vals.append(_c17_row(sols, same_branch_only))
    value = _PREF * 2.0 * _trapz(row_vals, kys)
    err = _PREF * 2.0 * _trapz_pair_error(row_vals, kys)
    return ForceResult(value=abs(value), pol=pol, method=method,
                       kx_max=grid.kx_max, ky_max=grid.ky_max,
                       nx=1, ny=grid.n_ky, error=err,
                       body1_sign=_body1_sign(scenario))


def force_weak_coupling(pol, scenario, grid=None):
    """Force from the guided-mode dispersion alone (band closed form).

    For identical media only the mirrored same-branch channels are kept
    (the dominant contribution); otherwise every selection channel
    enters through the general pole-pair form.
    """
    same = scenario.body1.medium == scenario.body2.medium
    return _force_c17(pol, scenario, grid, same, "weak_coupling")


def force_pendry_c16(pol, scenario, grid=None):
    """Lossless-limit Im R x Im R force (the Pendry comparison output).

    For lossless media Im R collapses onto pole delta functions, so the
    frequency integral reduces to the same selection-curve sum as the
    general pole-pair form, over all channels.
    """
    return _force_c17(pol, scenario, grid, False, "pendry_c16")


def _zero_result(pol, scenario, grid, method):
    return ForceResult(value=0.0, pol=pol, method=method,
                       kx_max=grid.kx_max, ky_max=grid.ky_max,
                       nx=grid.panel_points, ny=grid.n_ky, error=0.0,
                       body1_sign=_body1_sign(scenario))
