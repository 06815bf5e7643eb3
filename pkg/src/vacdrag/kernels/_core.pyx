# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled scalar kernels for the hot inner loops.

Mirrors vacdrag.kernels._fallback; scalar entry points take python
complex, characteristic_array loops over a 1-D frequency array in C.
"""

import numpy as np

from libc.math cimport sqrt as dsqrt

cdef extern from "complex.h" nogil:
    double complex csqrt(double complex)
    double complex cexp(double complex)

BACKEND = "cython"

POL_S = 0
POL_P = 1
KIND_SLAB = 0
KIND_SHEET = 1


cdef inline double complex _gamma(double k, double complex om, double eps,
                                  double mu) noexcept nogil:
    cdef double complex g = csqrt(k * k - eps * mu * om * om)
    if g.real < 0.0 or (g.real == 0.0 and g.imag * om.real > 0.0):
        g = -g
    return g


cdef inline void _slab_parts(double complex om, double k, double nd, double h,
                             int pol, double complex *num,
                             double complex *den) noexcept nogil:
    # R = [(1-q) - w(1+q)] / [(1+q) - w(1-q)] with w = exp(-2 gamma_d h);
    # free of the coth cancellation for thick evanescent slabs
    cdef double complex g0 = _gamma(k, om, 1.0, 1.0)
    cdef double complex gd = _gamma(k, om, nd * nd, 1.0)
    cdef double complex q, w
    if pol == 1:
        q = nd * nd * g0 / gd
    else:
        q = gd / g0
    w = cexp(-2.0 * gd * h)
    num[0] = (1.0 - q) - w * (1.0 + q)
    den[0] = (1.0 + q) - w * (1.0 - q)


cdef inline double complex _sheet(double complex om, double wsp) noexcept nogil:
    return -wsp * wsp / (om * om - wsp * wsp)


cdef inline double complex _characteristic(double complex om, double kx,
                                           double ky, double k, int kind,
                                           int pol, double v1, double v2,
                                           double d, double a1, double b1,
                                           double a2, double b2,
                                           int gap_full) noexcept nogil:
    cdef double complex gap, r1, r2, num, den
    if gap_full:
        gap = cexp(-2.0 * d * _gamma(k, om, 1.0, 1.0))
    else:
        gap = cexp(-2.0 * d * k + 0j)
    if kind == 0:
        _slab_parts(om - v1 * kx, k, a1, b1, pol, &num, &den)
        r1 = num / den
        _slab_parts(om - v2 * kx, k, a2, b2, pol, &num, &den)
        r2 = num / den
    else:
        r1 = _sheet(om - v1 * kx, a1)
        r2 = _sheet(om - v2 * kx, a2)
    return 1.0 - gap * r1 * r2


def gamma(k, omega, eps_rel, mu_rel):
    cdef double complex om = omega
    return complex(_gamma(k, om, eps_rel, mu_rel))


def reflection_slab_parts(omega, k, n_d, h, pol):
    cdef double complex om = omega
    cdef double complex num, den
    _slab_parts(om, k, n_d, h, pol, &num, &den)
    return complex(num), complex(den)


def reflection_slab(omega, k, n_d, h, pol):
    cdef double complex om = omega
    cdef double complex num, den
    _slab_parts(om, k, n_d, h, pol, &num, &den)
    return complex(num / den)


def slab_scan(omega, k, n_d, h, pol):
    # imaginary part of den * exp(gamma_d h): real dispersion function on
    # the guided interval, free of cot poles
    cdef double complex om = omega
    cdef double complex g0 = _gamma(k, om, 1.0, 1.0)
    cdef double complex gd = _gamma(k, om, n_d * n_d, 1.0)
    cdef double complex q
    if pol == 1:
        q = n_d * n_d * g0 / gd
    else:
        q = gd / g0
    cdef double complex val = ((1.0 + q) * cexp(gd * h)
                               - (1.0 - q) * cexp(-gd * h))
    return val.imag


def reflection_sheet(omega, omega_sp):
    cdef double complex om = omega
    return complex(_sheet(om, omega_sp))


def characteristic(omega, kx, ky, kind, pol, v1, v2, d, a1, b1, a2, b2,
                   gap_full):
    cdef double complex om = omega
    cdef double k = dsqrt(kx * kx + ky * ky)
    return complex(_characteristic(om, kx, ky, k, kind, pol, v1, v2, d,
                                   a1, b1, a2, b2, gap_full))


def characteristic_array(omegas, double kx, double ky, int kind, int pol,
                         double v1, double v2, double d, double a1, double b1,
                         double a2, double b2, int gap_full):
    om_arr = np.ascontiguousarray(omegas, dtype=np.complex128).ravel()
    cdef double complex[::1] om = om_arr
    out = np.empty(om.shape[0], dtype=np.complex128)
    cdef double complex[::1] vout = out
    cdef double k = dsqrt(kx * kx + ky * ky)
    cdef Py_ssize_t i
    for i in range(om.shape[0]):
        vout[i] = _characteristic(om[i], kx, ky, k, kind, pol, v1, v2, d,
                                  a1, b1, a2, b2, gap_full)
    return out
