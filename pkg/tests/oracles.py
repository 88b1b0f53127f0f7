"""Independent reference computations used only by the tests.

These follow the textbook construction directly (explicit 4x4 products and
closed-form arc geometry) and share no code with the package.
"""

import numpy as np


def htm_trans(x=0.0, z=0.0):
    m = np.eye(4)
    m[0, 3] = x
    m[2, 3] = z
    return m


def htm_rot_y(a):
    c, s = np.cos(a), np.sin(a)
    m = np.eye(4)
    m[0, 0], m[0, 2], m[2, 0], m[2, 2] = c, s, -s, c
    return m


def htm_rot_z(a):
    c, s = np.cos(a), np.sin(a)
    m = np.eye(4)
    m[0, 0], m[0, 1], m[1, 0], m[1, 1] = c, -s, s, c
    return m


def arc_htm(phi, xi, L):
    """Px(lambda) Ry(xi phi) Px(-lambda), for phi well away from zero."""
    lam = L / phi
    return htm_trans(x=lam) @ htm_rot_y(xi * phi) @ htm_trans(x=-lam)


def gripper_htm(index, phi, xi, L, sigma, mount):
    t1 = htm_trans(z=sigma) @ htm_rot_y(mount) @ arc_htm(phi, xi, L)
    return t1 if index == 1 else htm_rot_z((index - 1) * 2 * np.pi / 3) @ t1


def radial_closed_form(phi, L, mount):
    """Fingertip distance from the gripper axis, vectorized over ``phi`` > 0."""
    phi = np.asarray(phi, dtype=float)
    lam = L / phi
    x, z = lam * (1 - np.cos(phi)), lam * np.sin(phi)
    return np.abs(np.cos(mount) * x + np.sin(mount) * z)


def dense_closure(radius, L, mount, phi_hi, step=1e-5):
    """First sampled phi at which the fingertips reach ``radius``."""
    phis = np.arange(step, phi_hi + step, step)
    r = radial_closed_form(phis, L, mount)
    idx = int(np.argmax(r <= radius))
    assert r[idx] <= radius
    # interpolate inside the bracketing sample interval
    if idx == 0:
        return phis[0]
    p0, p1, r0, r1 = phis[idx - 1], phis[idx], r[idx - 1], r[idx]
    return p0 + (r0 - radius) / (r0 - r1) * (p1 - p0)

