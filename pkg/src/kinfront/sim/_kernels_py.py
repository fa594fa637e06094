"""Pure-numpy implementation of the Strang-split stepping kernel.

Semantically identical to the Cython twin in _kernels.pyx: half step of
first-order upwind transport with Dirichlet ghost values, a full Heun
step of the local reaction/relaxation term, another transport half step,
then a clamp to [0, 1] that reports the worst excess and the number of
clamped entries.
"""

import numpy as np

BACKEND = "python"


def _transport_half(g, nu_half, left_val, right_val):
    pos = nu_half > 0.0
    neg = nu_half < 0.0
    if np.any(pos):
        nu = nu_half[pos][:, None]
        gp = g[pos]
        left_ghost = gp[:, 0].copy()
        gp[:, 1:] -= nu * (gp[:, 1:] - gp[:, :-1])
        gp[:, 0] -= nu[:, 0] * (left_ghost - left_val)
        g[pos] = gp
    if np.any(neg):
        nu = nu_half[neg][:, None]
        gn = g[neg]
        gn[:, :-1] -= nu * (gn[:, 1:] - gn[:, :-1])
        gn[:, -1] -= nu[:, 0] * (right_val - gn[:, -1])
        g[neg] = gn


def strang_step(g, g1, rho, rho1, nu_half, masses, r, dt, left_val, right_val):
    """Advance g (shape (nv, nx)) by one full step of size dt, in place.

    g1, rho, rho1 are scratch arrays (same shapes as g, g[0], g[0]).
    Returns (max_clamp_excess, n_clamped).
    """
    _transport_half(g, nu_half, left_val, right_val)

    np.matmul(masses, g, out=rho)
    # k1 = rho(1+r) - g(1 + r rho); g1 = g + dt k1
    np.multiply(g, 1.0 + r * rho[None, :], out=g1)
    g1 *= -1.0
    g1 += (1.0 + r) * rho[None, :]
    g1 *= dt
    g1 += g
    np.matmul(masses, g1, out=rho1)
    # g <- (g + g1)/2 + dt/2 * k2 with k2 = rho1(1+r) - g1(1 + r rho1)
    g += g1
    g *= 0.5
    g1 *= 1.0 + r * rho1[None, :]
    g1 -= (1.0 + r) * rho1[None, :]
    g1 *= -0.5 * dt
    g += g1

    _transport_half(g, nu_half, left_val, right_val)

    over = g - 1.0
    under = -g
    excess = max(float(over.max(initial=0.0)), float(under.max(initial=0.0)))
    n_clamped = int(np.count_nonzero(over > 0.0) + np.count_nonzero(under > 0.0))
    if n_clamped:
        np.clip(g, 0.0, 1.0, out=g)
    return excess if excess > 0.0 else 0.0, n_clamped
