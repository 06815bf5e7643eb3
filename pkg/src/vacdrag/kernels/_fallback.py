"""Pure-numpy scalar/array kernels.

Fallback backend with the same call surface as the compiled extension
``vacdrag.kernels._core``.  All functions accept numpy arrays for the
frequency argument; the integer codes are ``pol`` 0=s / 1=p and ``kind``
0=slab / 1=sheet.
"""

import numpy as np

BACKEND = "numpy"

POL_S = 0
POL_P = 1
KIND_SLAB = 0
KIND_SHEET = 1


def gamma_array(k, omegas, eps_rel, mu_rel):
    """Propagation constant sqrt(k^2 - eps*mu*omega^2), branch Re >= 0.

    On the branch cut (real omega above the light line) the sign is fixed
    by the outgoing convention Im(gamma)*Re(omega) <= 0, which matches the
    limit from the upper half plane.
    """
    om = np.asarray(omegas, dtype=np.complex128)
    g = np.sqrt(k * k - eps_rel * mu_rel * om * om)
    flip = (g.real < 0.0) | ((g.real == 0.0) & (g.imag * om.real > 0.0))
    return np.where(flip, -g, g)


def gamma(k, omega, eps_rel, mu_rel):
    return complex(gamma_array(k, complex(omega), eps_rel, mu_rel))


def reflection_slab_parts(omega, k, n_d, h, pol):
    """Numerator and denominator of the PEC-backed slab reflection.

    With the admittance ratio q = Yd/Y0 and w = exp(-2*gamma_d*h) the
    coefficient is R = [(1-q) - w(1+q)] / [(1+q) - w(1-q)]; this form is
    free of the coth cancellation for thick evanescent slabs (n_d = 1
    reduces to -w exactly) and the guided-mode poles are the zeros of
    the denominator.
    """
    om = np.asarray(omega, dtype=np.complex128)
    g0 = gamma_array(k, om, 1.0, 1.0)
    gd = gamma_array(k, om, n_d * n_d, 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        if pol == POL_P:
            q = (n_d * n_d) * g0 / gd
        else:
            q = gd / g0
        w = np.exp(-2.0 * gd * h)
    return (1.0 - q) - w * (1.0 + q), (1.0 + q) - w * (1.0 - q)


def reflection_slab(omega, k, n_d, h, pol):
    num, den = reflection_slab_parts(omega, k, n_d, h, pol)
    with np.errstate(divide="ignore", invalid="ignore"):
        r = num / den
    if np.isscalar(omega) or np.ndim(omega) == 0:
        return complex(r)
    return r


def slab_scan_array(omegas, k, n_d, h, pol):
    """Real guided-mode dispersion function on the guided interval.

    den * exp(gamma_d h) is purely imaginary for real omega between the
    two light lines; its imaginary part (-2 sin(kappa h) - 2 q~ cos(...))
    vanishes exactly at the reflection poles and carries no cot poles.
    """
    om = np.asarray(omegas, dtype=np.complex128)
    g0 = gamma_array(k, om, 1.0, 1.0)
    gd = gamma_array(k, om, n_d * n_d, 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        if pol == POL_P:
            q = (n_d * n_d) * g0 / gd
        else:
            q = gd / g0
        val = ((1.0 + q) * np.exp(gd * h) - (1.0 - q) * np.exp(-gd * h))
    return val.imag


def slab_scan(omega, k, n_d, h, pol):
    return float(slab_scan_array(complex(omega), k, n_d, h, pol))


def reflection_sheet(omega, omega_sp):
    om = np.asarray(omega, dtype=np.complex128)
    with np.errstate(divide="ignore", invalid="ignore"):
        r = -omega_sp * omega_sp / (om * om - omega_sp * omega_sp)
    if np.ndim(omega) == 0:
        return complex(r)
    return r


def characteristic_array(omegas, kx, ky, kind, pol, v1, v2, d, a1, b1, a2, b2,
                         gap_full):
    """Two-body characteristic function D at fixed (kx, ky).

    D = 1 - gap * R1(omega - v1*kx) R2(omega - v2*kx); the gap factor is
    exp(-2*gamma0*d) when gap_full is true, else exp(-2*k*d).  Slab body
    parameters are (n_d, h), sheet bodies use (omega_sp, unused).
    """
    om = np.asarray(omegas, dtype=np.complex128)
    k = np.hypot(kx, ky)
    if gap_full:
        g0 = gamma_array(k, om, 1.0, 1.0)
        gap = np.exp(-2.0 * d * g0)
    else:
        gap = np.exp(-2.0 * d * k)
    w1 = om - v1 * kx
    w2 = om - v2 * kx
    if kind == KIND_SLAB:
        r1 = reflection_slab(w1, k, a1, b1, pol)
        r2 = reflection_slab(w2, k, a2, b2, pol)
    else:
        r1 = reflection_sheet(w1, a1)
        r2 = reflection_sheet(w2, a2)
    return 1.0 - gap * r1 * r2


def characteristic(omega, kx, ky, kind, pol, v1, v2, d, a1, b1, a2, b2,
                   gap_full):
    return complex(characteristic_array(complex(omega), kx, ky, kind, pol,
                                        v1, v2, d, a1, b1, a2, b2, gap_full))
