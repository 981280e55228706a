"""Independent reference computations used by the tests."""
import numpy as np
from scipy import special


def flat_transmission_matrix(z, rho1, rho2, mu1, mu2, variant, tau=1.0):
    """4x4 interface matrix of the flat two-phase Stokes problem.

    Phase 1 fills y < 0, phase 2 fills y > 0; each phase carries one shear
    mode exp(-+W_k y) and one pressure mode exp(-+tau y).  Rows: [[v]],
    [[mu(v' + i tau w)]], then [[T_nn/rho]], [[rho w]] (S11) or [[T_nn]],
    [[w]] (S22).
    """
    lam = z * tau ** 2
    W1 = tau * np.sqrt(1 + rho1 * z / mu1)
    W2 = tau * np.sqrt(1 + rho2 * z / mu2)
    cols = [(1, -W1 / (1j * tau), 1.0, W1, 0.0),
            (2, W2 / (1j * tau), 1.0, -W2, 0.0),
            (1, -1j * tau / (lam * rho1), -tau / (lam * rho1), tau, 1.0),
            (2, -1j * tau / (lam * rho2), tau / (lam * rho2), -tau, 1.0)]
    M = np.zeros((4, 4), dtype=complex)
    for c, (ph, v, w, k, p) in enumerate(cols):
        s = 1.0 if ph == 2 else -1.0
        rho, mu = (rho2, mu2) if ph == 2 else (rho1, mu1)
        tnn = 2 * mu * k * w - p
        M[0, c] = s * v
        M[1, c] = s * mu * (k * v + 1j * tau * w)
        if variant.upper() == "S11":
            M[2, c], M[3, c] = s * tnn / rho, s * rho * w
        else:
            M[2, c], M[3, c] = s * tnn, s * w
    return M


def heat_ntd_bessel(lam, l, n, R, R_out, rho, kappa, d):
    """Th(R) from modified Bessel functions (rho, kappa, d are pairs)."""
    q = [np.sqrt(rho[k] * kappa[k] * lam / d[k]) for k in (0, 1)]
    if n == 3:
        def I(k, r, der=False):
            return special.spherical_in(l, q[k] * r, derivative=der) * (q[k] if der else 1)

        def K(k, r, der=False):
            return special.spherical_kn(l, q[k] * r, derivative=der) * (q[k] if der else 1)
    else:
        def I(k, r, der=False):
            return special.ivp(l, q[k] * r) * q[k] if der else special.iv(l, q[k] * r)

        def K(k, r, der=False):
            return special.kvp(l, q[k] * r) * q[k] if der else special.kv(l, q[k] * r)
    M = np.array([[I(0, R), -I(1, R), -K(1, R)],
                  [0.0, I(1, R_out, True), K(1, R_out, True)],
                  [d[0] * I(0, R, True), -d[1] * I(1, R, True), -d[1] * K(1, R, True)]])
    a, _, _ = np.linalg.solve(M, [0.0, 0.0, 1.0])
    return a * I(0, R)


def polar_curve_curvature(R, h, dh, d2h):
    """Minus the curvature of the curve r = R + h(phi) (so a circle gives -1/r)."""
    r = R + h
    return -(r ** 2 + 2 * dh ** 2 - r * d2h) / (r ** 2 + dh ** 2) ** 1.5


def axisymmetric_curvature(R, h, dh, d2h, theta):
    """Minus the mean-curvature sum of r = R + h(theta) about the polar axis."""
    r = R + h
    s = np.sqrt(r ** 2 + dh ** 2)
    k_meridian = (r ** 2 + 2 * dh ** 2 - r * d2h) / s ** 3
    # parallel curvature: normal component of the latitude circle
    k_parallel = (r * np.sin(theta) - dh * np.cos(theta)) / (s * r * np.sin(theta))
    return -(k_meridian + k_parallel)
