"""Units, material models, Doppler transform, admittances and reflections.

Internal unit system: c = hbar = h_s = 1.  Lengths are in units of the
slab thickness scale h_s, frequencies and wavenumbers in c/h_s and 1/h_s.
SI conversion happens only at output through :class:`Units`.
"""

import enum
import math
from dataclasses import dataclass, field

from . import kernels
from .errors import DegenerateInputError, PoleError

HBAR_SI = 1.054571817e-34     # J s
C_SI = 299792458.0            # m / s

# reflection evaluations closer to a pole than this (denominator relative
# to numerator) raise PoleError; callers that want the poles use modes.py
POLE_TOL = 1e-12


class Polarization(enum.Enum):
    S = "s"
    P = "p"

    @property
    def code(self):
        return kernels.POL_P if self is Polarization.P else kernels.POL_S


def _as_pol(pol):
    if isinstance(pol, Polarization):
        return pol
    return Polarization(pol)


@dataclass(frozen=True)
class Units:
    """Physical length scale attached to the dimensionless solution.

    The dimensionless force per area F_hat converts to SI via
    F/A0 = F_hat * hbar*c / h_s^4.
    """

    h_s_meters: float

    def __post_init__(self):
        if not self.h_s_meters > 0.0:
            raise ValueError("h_s_meters must be > 0")

    def force_to_si(self, f_hat):
        """N/m^2 from the dimensionless force per unit area."""
        return f_hat * HBAR_SI * C_SI / self.h_s_meters ** 4

    def time_to_si(self, t_hat):
        """seconds from time in units of h_s/c."""
        return t_hat * self.h_s_meters / C_SI


@dataclass(frozen=True)
class SlabMedium:
    """PEC-backed nondispersive dielectric slab in its co-moving frame.

    n_d = 1 is allowed as the degenerate vacuum-filled slab (a displaced
    PEC mirror); guided-mode searches require n_d > 1.
    """

    n_d: float
    h: float
    mu_rel: float = 1.0

    def __post_init__(self):
        if not self.n_d >= 1.0:
            raise ValueError("n_d must be >= 1 (nondispersive dielectric)")
        if not self.h > 0.0:
            raise ValueError("slab thickness h must be > 0")
        if self.mu_rel != 1.0:
            raise ValueError("non-magnetic media only (mu_rel = 1)")

    @property
    def eps_rel(self):
        return self.n_d * self.n_d


@dataclass(frozen=True)
class SheetMedium:
    """Metal sheet with a single surface-plasmon resonance omega_sp."""

    omega_sp: float

    def __post_init__(self):
        if not self.omega_sp > 0.0:
            raise ValueError("omega_sp must be > 0")


@dataclass(frozen=True)
class MovingBody:
    medium: object
    v: float

    def __post_init__(self):
        if not abs(self.v) < 1.0:
            raise ValueError("|v| must be < 1 (units of c)")
        if not isinstance(self.medium, (SlabMedium, SheetMedium)):
            raise TypeError("medium must be SlabMedium or SheetMedium")


@dataclass(frozen=True)
class Scenario:
    """Two moving bodies separated by a vacuum gap of width d.

    gap_model selects the vacuum coupling factor used in the two-body
    characteristic function: "gamma0" keeps the exact exp(-2*gamma0*d),
    "k" neglects retardation in the gap (exp(-2*k*d)).  "auto" uses
    gamma0 for slabs and k for sheets (the sheet model is defined with
    the unretarded factor).
    """

    body1: MovingBody
    body2: MovingBody
    d: float
    gap_model: str = "auto"

    def __post_init__(self):
        if not self.d > 0.0:
            raise ValueError("gap width d must be > 0")
        if type(self.body1.medium) is not type(self.body2.medium):
            raise ValueError("both bodies must carry the same medium kind")
        if self.gap_model not in ("auto", "gamma0", "k"):
            raise ValueError("gap_model must be one of auto/gamma0/k")

    @property
    def is_slab(self):
        return isinstance(self.body1.medium, SlabMedium)

    @property
    def gap_full(self):
        """True when the characteristic uses exp(-2*gamma0*d)."""
        if self.gap_model == "auto":
            return self.is_slab
        return self.gap_model == "gamma0"

    def kernel_args(self, pol):
        """Flat parameter tuple consumed by the kernel backends."""
        pol = _as_pol(pol)
        m1, m2 = self.body1.medium, self.body2.medium
        if self.is_slab:
            kind = kernels.KIND_SLAB
            a1, b1 = m1.n_d, m1.h
            a2, b2 = m2.n_d, m2.h
        else:
            kind = kernels.KIND_SHEET
            a1, b1 = m1.omega_sp, 0.0
            a2, b2 = m2.omega_sp, 0.0
        return (kind, pol.code, self.body1.v, self.body2.v, self.d,
                a1, b1, a2, b2, 1 if self.gap_full else 0)


def gamma(k, omega, eps_rel, mu_rel=1.0):
    """Propagation constant along +z, sqrt(k^2 - eps*mu*omega^2/c^2).

    Branch with Re >= 0; exactly on the cut the outgoing convention
    Im(gamma)*Re(omega) <= 0 applies (= the limit from the upper half
    plane, where all force contributions live).
    """
    if k < 0.0:
        raise ValueError("transverse wavenumber k must be >= 0")
    return kernels.gamma(k, complex(omega), eps_rel, mu_rel)


def admittance(pol, omega, gamma_val, eps_rel, mu_rel=1.0):
    """Normalized wave admittance, Y_p = eps*omega/(i*gamma*c), Y_s = i*gamma*c/(omega*mu)."""
    pol = _as_pol(pol)
    omega = complex(omega)
    gamma_val = complex(gamma_val)
    if pol is Polarization.P:
        if gamma_val == 0:
            raise DegenerateInputError("p admittance undefined at gamma = 0")
        return eps_rel * omega / (1j * gamma_val)
    if omega == 0:
        raise DegenerateInputError("s admittance undefined at omega = 0")
    return 1j * gamma_val / (omega * mu_rel)


def reflection_slab(pol, omega_co, kx, ky, slab):
    """Reflection coefficient of a PEC-backed slab in its co-moving frame.

    R = (Y0 - coth(gamma_d h) Yd) / (Y0 + coth(gamma_d h) Yd), evaluated
    through the admittance ratio so the p limit at omega -> 0 is regular.
    Raises PoleError within POLE_TOL of a guided-mode pole.
    """
    pol = _as_pol(pol)
    k = math.hypot(kx, ky)
    if k == 0.0 and omega_co == 0:
        raise DegenerateInputError("reflection undefined at k = 0, omega = 0")
    num, den = kernels.reflection_slab_parts(complex(omega_co), k, slab.n_d,
                                             slab.h, pol.code)
    if abs(den) < POLE_TOL * abs(num):
        raise PoleError(
            f"slab reflection pole near omega_co={omega_co} (k={k}, {pol.value})")
    return num / den


def reflection_sheet(omega_co, sheet):
    """Sheet reflection R = -omega_sp^2 / (omega^2 - omega_sp^2)."""
    omega_co = complex(omega_co)
    wsp2 = sheet.omega_sp ** 2
    if abs(omega_co * omega_co - wsp2) < POLE_TOL * wsp2:
        raise PoleError(f"sheet reflection pole at omega_co={omega_co}")
    return kernels.reflection_sheet(omega_co, sheet.omega_sp)


def doppler(omega_lab, kx, v):
    """Co-moving frequency omega_tilde = omega - v*kx (non-relativistic)."""
    return omega_lab - v * kx
