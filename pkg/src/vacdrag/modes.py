"""Guided modes of a grounded slab in its co-moving frame.

The guided modes are the real poles of the slab reflection coefficient,
i.e. the real zeros of the normalized denominator 1 + coth(gamma_d h) *
Yd/Y0 on the open interval (c*k/n_d, c*k).  On that interval the
denominator is real, so the search is a scalar sign-change scan plus
bracketed polishing.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from . import kernels
from .core import Polarization, SlabMedium, _as_pol
from .errors import (BranchLostError, HigherOrderPoleError,
                     NonConvergenceError, OutOfRangeError)

# scan grid on the guided interval; the denominator is smooth between its
# cot poles and this density bounds missed root pairs for k*h up to ~50
N_SCAN = 2048

_RES_STEP_FRAC = 1e-5   # residue differentiation step, relative to c*k


@dataclass(frozen=True)
class GuidedModePoint:
    k: float
    omega_co: float
    residue: float
    n_ph: float
    v_g_co: float


@dataclass(frozen=True)
class GuidedModeBranch:
    pol: Polarization
    branch_index: int
    points: tuple

    @property
    def k(self):
        return np.array([p.k for p in self.points])

    @property
    def omega_co(self):
        return np.array([p.omega_co for p in self.points])

    @property
    def n_ph(self):
        return np.array([p.n_ph for p in self.points])


def _den_scalar(slab, pol_code, k):
    def f(w):
        return kernels.slab_scan(w, k, slab.n_d, slab.h, pol_code)
    return f


def _scan_interval(k, n_d):
    lo = k / n_d
    hi = k
    return np.nextafter(lo, hi), np.nextafter(hi, lo)


def find_pole_frequencies(slab, pol, k, n_scan=N_SCAN):
    """All positive pole frequencies of the slab reflection at wavenumber k.

    Returns the real roots of the reflection denominator in the open
    guided interval (c*k/n_d, c*k), ascending.  Negative-frequency
    partners follow from symmetry (omega -> -omega is a pole with
    residue -b).  Empty when no guided mode exists.
    """
    pol = _as_pol(pol)
    if not k > 0.0:
        raise ValueError("k must be > 0")
    if slab.n_d <= 1.0:
        return []
    lo, hi = _scan_interval(k, slab.n_d)
    grid = np.linspace(lo, hi, n_scan)
    vals = kernels.slab_scan_array(grid, k, slab.n_d, slab.h, pol.code)
    finite = np.isfinite(vals)
    scale = np.median(np.abs(vals[finite])) if finite.any() else 1.0
    f = _den_scalar(slab, pol.code, k)
    roots = []
    sign = np.sign(vals)
    for i in np.nonzero(sign[:-1] * sign[1:] < 0)[0]:
        try:
            r = brentq(f, grid[i], grid[i + 1], xtol=1e-300, rtol=1e-14)
        except ValueError:
            continue
        # near the light-line edge the scan function diverges; discard
        # brackets whose polished point is not a genuine zero
        if abs(f(r)) < 1e-6 * max(scale, 1.0):
            roots.append(r)
    return roots


def _inv_reflection(slab, pol_code, k):
    def f(w):
        num, den = kernels.reflection_slab_parts(complex(w), k, slab.n_d,
                                                 slab.h, pol_code)
        return den / num
    return f


def residue_at_pole(slab, pol, k, omega_pole):
    """Residue b of R ~ b/(omega - omega_pole), simple pole assumed.

    Estimated from the pole product (omega - omega_pole) * R(omega) =
    b + delta*R_reg + O(delta^2) on a shrinking three-point stencil with
    quadratic elimination.  R has an antiresonance a distance ~|b| from
    the pole, so derivative-of-1/R stencils with a fixed step corrupt
    small residues; the product form is regular through it.
    """
    pol = _as_pol(pol)

    def prod(delta):
        w = omega_pole + delta
        num, den = kernels.reflection_slab_parts(complex(w), k, slab.n_d,
                                                 slab.h, pol.code)
        return delta * num / den

    h = _RES_STEP_FRAC * k
    p1, p2, p3 = prod(h), prod(h / 2.0), prod(h / 4.0)
    b = (8.0 * p3 - 6.0 * p2 + p1) / 3.0
    if abs(b) < 1e-10 * max(abs(p1 - p2), 1e-300):
        raise HigherOrderPoleError(
            f"vanishing residue at omega={omega_pole} (k={k})")
    if abs(b.imag) > 1e-8 * abs(b):
        raise NonConvergenceError(
            f"residue estimate not real: {b} at omega={omega_pole}, k={k}")
    return b.real


def _vg_central(ks, ws):
    vg = np.gradient(np.asarray(ws), np.asarray(ks))
    return vg


def trace_branch(slab, pol, branch_index, k_grid):
    """Follow one guided-mode branch over k_grid by continuity.

    branch_index counts roots ascending in omega at the first grid point
    (the fundamental p branch is index 0).  The continuation accepts the
    nearest root within 3x the local grid spacing times the local group
    velocity estimate; a miss raises BranchLostError.
    """
    pol = _as_pol(pol)
    k_grid = np.asarray(k_grid, dtype=float)
    if k_grid.ndim != 1 or len(k_grid) < 2:
        raise ValueError("k_grid must be a 1-D grid with >= 2 points")
    if not (np.all(np.diff(k_grid) > 0) and k_grid[0] > 0):
        raise ValueError("k_grid must be strictly increasing and positive")

    roots0 = find_pole_frequencies(slab, pol, k_grid[0])
    if branch_index >= len(roots0):
        raise BranchLostError(
            f"branch {branch_index} not present at k={k_grid[0]} "
            f"({len(roots0)} roots)")
    ws = [roots0[branch_index]]
    vg_est = 0.5
    for j in range(1, len(k_grid)):
        dk = k_grid[j] - k_grid[j - 1]
        pred = ws[-1] + vg_est * dk
        window = 3.0 * dk * max(abs(vg_est), 0.2)
        roots = find_pole_frequencies(slab, pol, k_grid[j])
        if not roots:
            raise BranchLostError(f"no roots at k={k_grid[j]}")
        cand = min(roots, key=lambda r: abs(r - pred))
        if abs(cand - pred) > window:
            raise BranchLostError(
                f"continuation lost branch {branch_index} at k={k_grid[j]}")
        ws.append(cand)
        vg_est = (ws[-1] - ws[-2]) / dk
    ws = np.array(ws)
    vg = _vg_central(k_grid, ws)
    pts = []
    for k, w, v in zip(k_grid, ws, vg):
        b = residue_at_pole(slab, pol, k, w)
        pts.append(GuidedModePoint(k=float(k), omega_co=float(w),
                                   residue=float(b), n_ph=float(k / w),
                                   v_g_co=float(v)))
    return GuidedModeBranch(pol=pol, branch_index=branch_index,
                            points=tuple(pts))


def branch_intersection_with_index(branch, n_ph_target, slab=None):
    """(k, omega_co) where the branch phase index equals n_ph_target.

    Monotone interpolation on the traced branch plus a bracketed polish
    against the exact pole condition when the slab is supplied.
    """
    nph = branch.n_ph
    ks = branch.k
    lo, hi = float(np.min(nph)), float(np.max(nph))
    if not (lo <= n_ph_target <= hi):
        raise OutOfRangeError(
            f"n_ph={n_ph_target} outside branch range [{lo}, {hi}]")
    idx = np.nonzero((nph[:-1] - n_ph_target) * (nph[1:] - n_ph_target) <= 0)[0]
    i = int(idx[0])
    if nph[i] == n_ph_target:
        return float(ks[i]), float(branch.omega_co[i])
    k_lo, k_hi = float(ks[i]), float(ks[i + 1])
    w_lo = float(branch.omega_co[i])

    if slab is None:
        # linear interpolation only
        t = (n_ph_target - nph[i]) / (nph[i + 1] - nph[i])
        k_star = k_lo + t * (k_hi - k_lo)
        return k_star, k_star / n_ph_target

    pol = branch.pol

    def phase_mismatch(k):
        pred = w_lo + (k - k_lo) * branch.points[i].v_g_co
        roots = find_pole_frequencies(slab, pol, k)
        w = min(roots, key=lambda r: abs(r - pred))
        return k / w - n_ph_target

    k_star = brentq(phase_mismatch, k_lo, k_hi, rtol=1e-13)
    return k_star, k_star / n_ph_target


class PoleInfo:
    """One guided-mode pole of a body at fixed k (positive branch)."""

    __slots__ = ("omega", "residue", "vg", "branch")

    def __init__(self, omega, residue, vg, branch):
        self.omega = omega
        self.residue = residue
        self.vg = vg
        self.branch = branch

    def mirrored(self):
        return PoleInfo(-self.omega, -self.residue, -self.vg, ~self.branch)


class BranchTable:
    """Dense cache of all guided branches of one (slab, pol) up to k_max.

    Rows are full root scans; branches are assembled by continuity with
    local re-polishing when the scan drops a root.  poles_at() serves
    interpolated (fast) or polished (exact) pole data to the selection
    and quadrature machinery.
    """

    GRID_PER_UNIT_K = 24
    K_MIN = 5e-3

    def __init__(self, slab, pol, k_max):
        self.slab = slab
        self.pol = _as_pol(pol)
        self.k_max = 0.0
        self._ks = []
        self._branches = []   # per branch: dict(k=[], w=[], b=[])
        self.extend(k_max)

    # -- construction ---------------------------------------------------

    def _row_roots(self, k):
        n = max(N_SCAN, 64 * (int(4 * k * self.slab.h) + 2))
        return find_pole_frequencies(self.slab, self.pol, k, n_scan=n)

    def _residues_row(self, k, roots):
        # pole-product estimator, see residue_at_pole
        if not roots:
            return []
        r = np.asarray(roots)
        h = _RES_STEP_FRAC * k
        steps = np.array([h, h / 2.0, h / 4.0])
        pts = np.concatenate([r + s for s in steps])
        num, den = kernels.numpy_impl.reflection_slab_parts(
            pts, k, self.slab.n_d, self.slab.h, self.pol.code)
        prod = ((pts - np.tile(r, 3)) * num / den).reshape(3, len(r))
        b = (8.0 * prod[2] - 6.0 * prod[1] + prod[0]) / 3.0
        return list(b.real)

    def extend(self, new_k_max):
        """Grow the table to cover new_k_max.

        Rows live on an absolute comb K_MIN + i/GRID_PER_UNIT_K, so two
        tables built through different growth histories hold identical
        rows where they overlap; everything interpolated off the table
        is then reproducible bit-for-bit across runs and worker counts.
        """
        i_end = int(math.ceil((new_k_max - self.K_MIN)
                              * self.GRID_PER_UNIT_K)) + 1
        i_start = len(self._ks)
        for i in range(i_start, max(i_end, i_start)):
            k = self.K_MIN + i / self.GRID_PER_UNIT_K
            roots = self._row_roots(k)
            bs = self._residues_row(k, roots)
            self._append_row(k, roots, bs)
        if self._ks:
            self.k_max = self._ks[-1]
        if len(self._ks) > i_start:
            self._rebuild_matrices()

    def _rebuild_matrices(self):
        """End-aligned branch matrices for vectorized interpolation.

        Every branch carries exactly one entry per comb row from its
        birth row onward, so branch bi occupies the trailing len(bi)
        columns; missing early columns are NaN.
        """
        n_rows = len(self._ks)
        self._ks_arr = np.array(self._ks)
        self._W = np.full((len(self._branches), n_rows), np.nan)
        self._B = np.full((len(self._branches), n_rows), np.nan)
        for bi, br in enumerate(self._branches):
            i0 = n_rows - len(br["k"])
            self._W[bi, i0:] = br["w"]
            self._B[bi, i0:] = br["b"]

    def pole_arrays(self, k):
        """(omega, residue, v_g, branch index) arrays of live poles at k."""
        if k > self.k_max:
            self.extend(1.25 * k)
        comb = self._ks_arr
        j = min(max(int(np.searchsorted(comb, k)), 1), len(comb) - 1)
        dk = comb[j] - comb[j - 1]
        t = (k - comb[j - 1]) / dk
        w_lo, w_hi = self._W[:, j - 1], self._W[:, j]
        alive = np.isfinite(w_lo) & np.isfinite(w_hi)
        w = w_lo * (1.0 - t) + w_hi * t
        b = self._B[:, j - 1] * (1.0 - t) + self._B[:, j] * t
        vg = (w_hi - w_lo) / dk
        idx = np.nonzero(alive)[0]
        return w[alive], b[alive], vg[alive], idx

    def _append_row(self, k, roots, bs):
        self._ks.append(k)
        taken = [False] * len(roots)
        if self._ks[:-1]:
            dk_prev = k - self._ks[-2]
        else:
            dk_prev = k
        for br in self._branches:
            pred = br["w"][-1]
            vg_est = 1.0  # unknown slope for a just-born branch; |v_g| <= c
            if len(br["w"]) > 1:
                vg_est = ((br["w"][-1] - br["w"][-2])
                          / (br["k"][-1] - br["k"][-2]))
                pred = br["w"][-1] + vg_est * (k - br["k"][-1])
            window = 3.0 * dk_prev * max(0.3, abs(vg_est))
            best, best_d = -1, np.inf
            for i, r in enumerate(roots):
                if not taken[i] and abs(r - pred) < best_d:
                    best, best_d = i, abs(r - pred)
            if best >= 0 and best_d <= window:
                taken[best] = True
                br["k"].append(k)
                br["w"].append(roots[best])
                br["b"].append(bs[best])
            else:
                # scan dropped the root; re-polish locally around prediction
                w = self._local_polish(k, pred, dk_prev)
                if w is None:
                    raise BranchLostError(
                        f"table lost a branch at k={k} "
                        f"({self.pol.value}, n_d={self.slab.n_d})")
                br["k"].append(k)
                br["w"].append(w)
                br["b"].append(self._residues_row(k, [w])[0])
        for i, r in enumerate(roots):
            if not taken[i]:
                self._branches.append(
                    {"k": [k], "w": [r], "b": [bs[i]]})
        self._branches.sort(key=lambda br: (br["k"][0], br["w"][0]))

    def _local_polish(self, k, pred, dk):
        f = _den_scalar(self.slab, self.pol.code, k)
        lo_lim, hi_lim = _scan_interval(k, self.slab.n_d)
        delta = max(1e-4 * k, 0.5 * dk)
        for _ in range(6):
            a = max(lo_lim, pred - delta)
            b = min(hi_lim, pred + delta)
            grid = np.linspace(a, b, 65)
            vals = kernels.slab_scan_array(grid, k, self.slab.n_d,
                                           self.slab.h, self.pol.code)
            sgn = np.sign(vals)
            hits = np.nonzero(sgn[:-1] * sgn[1:] < 0)[0]
            for i in hits:
                r = brentq(f, grid[i], grid[i + 1], rtol=1e-14)
                if abs(f(r)) < 1e-3:
                    return r
            delta *= 2.0
        return None

    # -- queries ----------------------------------------------------------

    @property
    def n_branches(self):
        return len(self._branches)

    def poles_at(self, k, polish=False):
        """Positive-frequency poles alive at k, as PoleInfo list.

        polish=False serves linear interpolation off the table (adequate
        for seeding and panel sizing); polish=True re-solves the pole,
        its residue and group velocity exactly at k.
        """
        w, b, vg, idx = self.pole_arrays(k)
        out = []
        for wi, bj, vj, bi in zip(w, b, vg, idx):
            if polish:
                wi, bj, vj = self._polish_pole(k, float(wi))
            out.append(PoleInfo(omega=float(wi), residue=float(bj),
                                vg=float(vj), branch=int(bi)))
        return out

    def polish_branch(self, bi, k):
        """Exact (omega, residue, v_g) of branch bi at k."""
        if k > self.k_max:
            self.extend(1.25 * k)
        br = self._branches[bi]
        est = float(np.interp(k, br["k"], br["w"]))
        return self._polish_pole(k, est)

    def _polish_pole(self, k, w_est):
        f = _den_scalar(self.slab, self.pol.code, k)
        w = self._bracketed_root(f, k, w_est)
        b = residue_at_pole(self.slab, self.pol, k, w)
        dk = 1e-4 * max(k, 1.0)
        wp = self._bracketed_root(_den_scalar(self.slab, self.pol.code, k + dk),
                                  k + dk, w)
        wm = self._bracketed_root(_den_scalar(self.slab, self.pol.code, k - dk),
                                  k - dk, w)
        vg = (wp - wm) / (2.0 * dk)
        return w, b, vg

    def _bracketed_root(self, f, k, est):
        lo_lim, hi_lim = _scan_interval(k, self.slab.n_d)
        delta = 2e-5 * k
        for _ in range(40):
            a = max(lo_lim, est - delta)
            b = min(hi_lim, est + delta)
            if f(a) * f(b) < 0:
                return brentq(f, a, b, rtol=1e-15)
            delta *= 2.0
        raise BranchLostError(f"pole polish failed near omega={est}, k={k}")


_TABLE_CACHE = {}


def branch_table(slab, pol, k_max):
    """Shared BranchTable cache (tables are velocity independent)."""
    pol = _as_pol(pol)
    key = (slab.n_d, slab.h, pol.code)
    tab = _TABLE_CACHE.get(key)
    if tab is None:
        tab = BranchTable(slab, pol, k_max)
        _TABLE_CACHE[key] = tab
    elif k_max > tab.k_max:
        tab.extend(k_max)
    return tab
