# cython: boundscheck=False, wraparound=False, initializedcheck=False, cdivision=True
# cython: language_level=3
"""Compiled propagation kernel.

Marches the field through the equal slabs of one target: the two coherences
advance with an exact per-step integrating factor and a trapezoidal drive,
the field advances per slab with a Heun (predictor/corrector) step.
"""

import numpy as np


cdef void _coherence(double complex[::1] omega, double complex[::1] estep,
                     double drive, double dt, double complex[::1] rho) noexcept:
    cdef Py_ssize_t j, n = omega.shape[0]
    cdef double complex r = 0.0
    cdef double complex half = 0.5 * dt * 1j * drive
    rho[0] = 0.0
    for j in range(n - 1):
        r = estep[j] * (r + half * omega[j]) + half * omega[j + 1]
        rho[j + 1] = r


cdef void _source(double complex[::1] omega, double complex[::1] e_upper,
                  double complex[::1] e_lower, bint degenerate,
                  double src_coef, double drive, double dt,
                  double complex[::1] r_up, double complex[::1] r_lo,
                  double complex[::1] out) noexcept:
    cdef Py_ssize_t j, n = omega.shape[0]
    cdef double complex pref = 1j * src_coef
    _coherence(omega, e_upper, drive, dt, r_up)
    if degenerate:
        for j in range(n):
            out[j] = 2.0 * pref * r_up[j]
    else:
        _coherence(omega, e_lower, drive, dt, r_lo)
        for j in range(n):
            out[j] = pref * (r_up[j] + r_lo[j])


def propagate_slabs(omega, e_upper, e_lower, double src_coef, double drive,
                    double dt, int nz):
    """Field at the target exit face; see the numpy twin for the contract."""
    out_arr = np.array(omega, dtype=complex)
    cdef double complex[::1] om = out_arr
    cdef double complex[::1] e_up = np.ascontiguousarray(e_upper, dtype=complex)
    cdef bint degenerate = e_lower is None
    cdef double complex[::1] e_lo = e_up if degenerate else np.ascontiguousarray(
        e_lower, dtype=complex
    )
    cdef Py_ssize_t n = om.shape[0]
    cdef double dz = 1.0 / nz

    scratch = np.empty((4, n), dtype=complex)
    cdef double complex[::1] r_up = scratch[0]
    cdef double complex[::1] r_lo = scratch[1]
    cdef double complex[::1] s0 = scratch[2]
    cdef double complex[::1] s1 = scratch[3]
    pred_arr = np.empty(n, dtype=complex)
    cdef double complex[::1] pred = pred_arr

    cdef Py_ssize_t j
    cdef int step
    for step in range(nz):
        _source(om, e_up, e_lo, degenerate, src_coef, drive, dt, r_up, r_lo, s0)
        for j in range(n):
            pred[j] = om[j] + dz * s0[j]
        _source(pred, e_up, e_lo, degenerate, src_coef, drive, dt, r_up, r_lo, s1)
        for j in range(n):
            om[j] = om[j] + 0.5 * dz * (s0[j] + s1[j])
    return out_arr
