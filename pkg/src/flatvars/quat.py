"""Unit-quaternion arithmetic in (x, y, z, w) storage order.

All functions accept plain 1-D arrays or forward-mode duals and stay on the
unit sphere to floating-point accuracy without renormalization.  Rotation
vectors follow the axis-angle convention: ``quat_exp(phi)`` rotates by
``|phi|`` radians about ``phi``, and ``quat_log`` inverts it on the
principal branch.  Small angles switch to series in ``|phi|^2``, so both
maps are smooth through zero.
"""

from __future__ import annotations

import numpy as np

from .autodiff import concat, cos, cross, sin, sqrt, value_of, where, arctan2

IDENTITY = np.array([0.0, 0.0, 0.0, 1.0])

_SMALL = 1e-8  # threshold on the squared angle


def qmul(a, b):
    """Hamilton product a (x) b."""
    av, aw = a[0:3], a[3:4]
    bv, bw = b[0:3], b[3:4]
    vec = aw * bv + bw * av + cross(av, bv)
    w = aw * bw - (a[0:1] * b[0:1] + a[1:2] * b[1:2] + a[2:3] * b[2:3])
    return concat([vec, w])


def qconj(q):
    return concat([-q[0:3], q[3:4]])


def qrotate(q, v):
    """Rotate a 3-vector by a unit quaternion (body-to-world for attitudes)."""
    t = cross(q[0:3], v) * 2.0
    return v + q[3:4] * t + cross(q[0:3], t)


def qrotate_inv(q, v):
    """Rotate by the inverse quaternion (world-to-body)."""
    return qrotate(qconj(q), v)


def _sq_angle(phi):
    return phi[0:1] * phi[0:1] + phi[1:2] * phi[1:2] + phi[2:3] * phi[2:3]


def quat_exp(phi):
    """Unit quaternion for the rotation vector ``phi`` (angle = |phi|)."""
    s2 = _sq_angle(phi)
    small = value_of(s2) < _SMALL
    safe = where(small, np.ones(1), s2)
    theta = sqrt(safe)
    # sin(theta/2)/theta and cos(theta/2), series below the threshold
    vec_coeff = where(small, 0.5 - s2 / 48.0 + s2 * s2 / 3840.0, sin(theta * 0.5) / theta)
    w = where(small, 1.0 - s2 / 8.0 + s2 * s2 / 384.0, cos(theta * 0.5))
    return concat([phi * vec_coeff, w])


def quat_log(q):
    """Rotation vector of a unit quaternion, principal branch (angle <= pi)."""
    sign = np.where(value_of(q[3:4]) < 0.0, -1.0, 1.0)  # q and -q rotate alike
    v = q[0:3] * sign
    w = q[3:4] * sign
    n2 = _sq_angle(v)
    small = value_of(n2) < _SMALL
    safe = where(small, np.ones(1), n2)
    n = sqrt(safe)
    # 2*atan2(n, w)/n, series below the threshold (|q| = 1 so w ~ 1 there)
    coeff = where(small, 2.0 / w - 2.0 * n2 / (3.0 * w * w * w), 2.0 * arctan2(n, w) / n)
    return v * coeff


def qnormalize(q):
    n = sqrt(q[0:1] * q[0:1] + q[1:2] * q[1:2] + q[2:3] * q[2:3] + q[3:4] * q[3:4])
    return q / n
