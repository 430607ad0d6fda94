"""Pure-numpy propagation kernel.

Same contract as the compiled extension: march the field through the
equal slabs of one target, advancing the two coherences with an exact
integrating factor per time step and the field with a Heun step per slab.
The sequential time recurrence

    rho[j+1] = estep[j] * rho[j] + (dt/2) * (estep[j] * s[j] + s[j+1])

is evaluated in closed form through cumulative products, which is safe here
because the integrating factor's magnitude decays only on the slow decay
scale of the transition.
"""

import numpy as np


def _coherence(omega: np.ndarray, estep: np.ndarray, drive: float, dt: float) -> np.ndarray:
    s = (1j * drive) * omega
    c = (0.5 * dt) * (estep * s[:-1] + s[1:])
    prefix = np.empty_like(omega)
    prefix[0] = 1.0
    np.cumprod(estep, out=prefix[1:])
    rho = np.empty_like(omega)
    rho[0] = 0.0
    np.cumsum(c / prefix[1:], out=rho[1:])
    rho[1:] *= prefix[1:]
    rho[0] = 0.0
    return rho


def propagate_slabs(
    omega: np.ndarray,
    e_upper: np.ndarray,
    e_lower: np.ndarray | None,
    src_coef: float,
    drive: float,
    dt: float,
    nz: int,
) -> np.ndarray:
    """Field at the target exit face.

    omega    input envelope over the time grid
    e_upper  per-step integrating factors of the upper transition
    e_lower  factors of the lower transition, or None when degenerate
    src_coef source prefactor per unit of the normalized depth
    drive    coherence drive prefactor
    """
    om = np.array(omega, dtype=complex)
    dz = 1.0 / nz

    def source(field):
        r = _coherence(field, e_upper, drive, dt)
        if e_lower is None:
            return (2j * src_coef) * r
        return (1j * src_coef) * (r + _coherence(field, e_lower, drive, dt))

    for _ in range(nz):
        s0 = source(om)
        s1 = source(om + dz * s0)
        om += (0.5 * dz) * (s0 + s1)
    return om
