"""Equilibria: m equal balls of phase 1 in a container filled with phase 2.

Mass and energy are conserved:

    rho1*|Omega1| + rho2*|Omega2| = c0,      |Omega1| = m*(w_n/n)*R^n
    rho1*|Omega1|*eps1(theta) + rho2*|Omega2|*eps2(theta)
        + sigma*m*w_n*R^(n-1) = E0

where w_n is the surface measure of the unit sphere.  Since eps_j is
strictly increasing, the temperature equation has a unique root.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .errors import ConfigError, InfeasibleError, NoEquilibriumError, RangeError
from .geometry import sphere_measure
from .thermo import MaterialParams, entropy, internal_energy

THETA_MIN, THETA_MAX = 1e-8, 1e8


@dataclass(frozen=True)
class ConservedQuantities:
    c0: float          # total mass
    E0: float          # total energy
    volume: float      # |Omega|
    n: int = 3
    m: int = 1

    def __post_init__(self):
        if self.n < 2:
            raise ConfigError("dimension must be at least 2")
        if self.m < 1:
            raise ConfigError("ball count must be at least 1")
        if self.volume <= 0:
            raise ConfigError("domain volume must be positive")


@dataclass(frozen=True)
class EquilibriumConfig:
    m: int
    n: int
    R: float
    theta_star: float
    centers: np.ndarray = field(default=None)
    R_out: float | None = None

    @property
    def manifold_dimension(self) -> int:
        return manifold_dimension(self.m, self.n)

    def phase_volumes(self) -> tuple[float, float]:
        v1 = self.m * ball_volume(self.n, self.R)
        if self.R_out is None:
            raise ConfigError("R_out is needed for phase volumes")
        return v1, ball_volume(self.n, self.R_out) - v1


def manifold_dimension(m: int, n: int) -> int:
    """Dimension n*m + 2 of the equilibrium manifold (centers, R, theta)."""
    return n * m + 2


def ball_volume(n: int, R: float) -> float:
    return sphere_measure(n) / n * R ** n


def phase1_volume(q: ConservedQuantities, mat: MaterialParams) -> float:
    return (mat.rho2 * q.volume - q.c0) / mat.jump_rho


def radius_from_mass(q: ConservedQuantities, mat: MaterialParams) -> float:
    """Common radius from m*(w_n/n)*R^n = (rho2*|Omega| - c0)/[[rho]]."""
    v1 = phase1_volume(q, mat)
    if v1 <= 0:
        raise NoEquilibriumError(f"phase-1 volume {v1:.3g} is not positive")
    if v1 >= q.volume:
        raise InfeasibleError(f"phase-1 volume {v1:.3g} exceeds |Omega| = {q.volume:.3g}")
    return float((q.n * v1 / (q.m * sphere_measure(q.n))) ** (1.0 / q.n))


def mass_of(R: float, q: ConservedQuantities, mat: MaterialParams) -> float:
    """Total mass of m balls of radius R in |Omega| (inverse of radius_from_mass)."""
    v1 = q.m * ball_volume(q.n, R)
    return mat.rho1 * v1 + mat.rho2 * (q.volume - v1)


def surface_energy(n: int, m: int, R: float, sigma: float) -> float:
    return sigma * m * sphere_measure(n) * R ** (n - 1)


def bulk_energy(theta, v1: float, v2: float, mat: MaterialParams):
    return (mat.rho1 * v1 * internal_energy(theta, mat.phase1)
            + mat.rho2 * v2 * internal_energy(theta, mat.phase2))


def bulk_entropy(theta, v1: float, v2: float, mat: MaterialParams):
    return (mat.rho1 * v1 * entropy(theta, mat.phase1)
            + mat.rho2 * v2 * entropy(theta, mat.phase2))


def _solve_theta(target: float, v1: float, v2: float, mat: MaterialParams) -> float:
    """Unique theta with bulk_energy(theta) = target, bracketed in [1e-8, 1e8]."""
    def f(t):
        return float(bulk_energy(t, v1, v2, mat)) - target

    lo, hi = 1.0, 1.0
    while f(lo) > 0:
        lo /= 10.0
        if lo < THETA_MIN:
            raise NoEquilibriumError("energy below the attainable range")
    while f(hi) < 0:
        hi *= 10.0
        if hi > THETA_MAX:
            raise RangeError("no temperature bracket below 1e8")
    if f(lo) == 0:
        return lo
    return float(optimize.brentq(f, lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps,
                                 maxiter=500))


def temperature_from_energy(q: ConservedQuantities, R: float, mat: MaterialParams) -> float:
    """Equilibrium temperature from the energy balance at radius R."""
    v1 = q.m * ball_volume(q.n, R)
    v2 = q.volume - v1
    target = q.E0 - surface_energy(q.n, q.m, R, mat.sigma)
    return _solve_theta(target, v1, v2, mat)


def solve_equilibrium(q: ConservedQuantities, mat: MaterialParams,
                      centers=None, gap: float = 0.05) -> EquilibriumConfig:
    """Radius, temperature and a concentric container radius for m balls."""
    R = radius_from_mass(q, mat)
    theta = temperature_from_energy(q, R, mat)
    R_out = (q.volume * q.n / sphere_measure(q.n)) ** (1.0 / q.n)
    if centers is None:
        centers = default_centers(q.m, q.n, R, R_out, gap)
    centers = np.asarray(centers, dtype=float).reshape(q.m, q.n)
    check_disjoint(centers, R, R_out, gap)
    return EquilibriumConfig(m=q.m, n=q.n, R=R, theta_star=theta, centers=centers, R_out=R_out)


def default_centers(m: int, n: int, R: float, R_out: float, gap: float = 0.05):
    """Balls on a circle in the first coordinate plane of a ball container."""
    if m == 1:
        return np.zeros((1, n))
    ring = R_out - R * (1 + gap) - gap * R
    ang = 2 * np.pi * np.arange(m) / m
    c = np.zeros((m, n))
    c[:, 0] = ring * np.cos(ang)
    c[:, 1] = ring * np.sin(ang)
    return c


def check_disjoint(centers, R: float, R_out: float, gap: float = 0.05) -> None:
    """Raise InfeasibleError unless balls are separated and inside the container."""
    margin = gap * R
    for i, ci in enumerate(centers):
        if np.linalg.norm(ci) + R + margin > R_out:
            raise InfeasibleError(f"ball {i} touches the outer boundary")
        for j in range(i):
            if np.linalg.norm(ci - centers[j]) < 2 * R + margin:
                raise InfeasibleError(f"balls {j} and {i} touch")


@dataclass
class BulkState:
    """Bulk fields on a quadrature: points, weights, phase label, u, theta."""
    weights: np.ndarray
    phase: np.ndarray
    u: np.ndarray
    theta: np.ndarray

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=float)
        self.phase = np.asarray(self.phase, dtype=int)
        self.u = np.atleast_2d(np.asarray(self.u, dtype=float))
        self.theta = np.asarray(self.theta, dtype=float)
        npts = self.weights.shape[0]
        if (self.phase.shape != (npts,) or self.theta.shape != (npts,)
                or self.u.shape[0] != npts):
            raise ConfigError("state arrays must share the quadrature length")


def shell_quadrature(n: int, R: float, R_out: float, n_r: int = 24, L: int = 8):
    """Quadrature (weights, phase labels, radii) of the concentric ball pair.

    Product of Gauss-Legendre rules on [0, R] and [R, R_out] with the
    angular rule of the unit sphere.  Returns weights per node, phase label
    per node and the node radius.
    """
    from .geometry import ReferenceSphere
    ang = ReferenceSphere(n, 1.0, L)
    x, w = np.polynomial.legendre.leggauss(n_r)
    out_w, out_p, out_r = [], [], []
    for k, (a, b) in enumerate(((0.0, R), (R, R_out)), start=1):
        r = 0.5 * (b - a) * (x + 1) + a
        wr = 0.5 * (b - a) * w * r ** (n - 1)
        out_w.append(np.outer(wr, ang.weights).ravel())
        out_p.append(np.full(r.size * ang.npts, k))
        out_r.append(np.repeat(r, ang.npts))
    return np.concatenate(out_w), np.concatenate(out_p), np.concatenate(out_r)


def uniform_state(config: EquilibriumConfig, theta: float, n_r: int = 24, L: int = 8) -> BulkState:
    w, p, _ = shell_quadrature(config.n, config.R, config.R_out, n_r, L)
    return BulkState(w, p, np.zeros((w.size, config.n)), np.full(w.size, float(theta)))


def _check_grid(state: BulkState, config: EquilibriumConfig) -> None:
    if config.R_out is None:
        return
    v1, v2 = config.phase_volumes()
    got1 = state.weights[state.phase == 1].sum()
    got2 = state.weights[state.phase == 2].sum()
    if not (np.isclose(got1, v1, rtol=1e-8) and np.isclose(got2, v2, rtol=1e-8)):
        raise ConfigError("quadrature does not match the configuration's phase volumes")


def total_energy(state: BulkState, config: EquilibriumConfig, mat: MaterialParams) -> float:
    """int (rho/2 |u|^2 + rho*eps) dx + sigma*|Gamma|."""
    _check_grid(state, config)
    total = 0.0
    for k in (1, 2):
        sel = state.phase == k
        rho = mat.rho(k)
        kin = 0.5 * rho * np.sum(state.u[sel] ** 2, axis=1)
        eps = rho * internal_energy(state.theta[sel], mat.phase(k))
        total += float(np.sum(state.weights[sel] * (kin + eps)))
    return total + surface_energy(config.n, config.m, config.R, mat.sigma)


def total_entropy(state: BulkState, config: EquilibriumConfig, mat: MaterialParams) -> float:
    """int rho*eta(theta) dx."""
    _check_grid(state, config)
    total = 0.0
    for k in (1, 2):
        sel = state.phase == k
        total += float(np.sum(state.weights[sel] * mat.rho(k)
                              * entropy(state.theta[sel], mat.phase(k))))
    return total


def reduced_entropy(radii, theta1_shift: float, q: ConservedQuantities,
                    mat: MaterialParams) -> float:
    """Entropy of m balls with given radii at prescribed energy.

    Phase 1 sits at temperature theta1 = theta + theta1_shift and phase 2
    at theta, with theta fixed by the energy constraint.
    """
    radii = np.asarray(radii, dtype=float)
    n = q.n
    v1 = float(np.sum(ball_volume(n, radii)))
    v2 = q.volume - v1
    surf = mat.sigma * sphere_measure(n) * float(np.sum(radii ** (n - 1)))
    target = q.E0 - surf

    def f(t):
        t1 = t + theta1_shift
        if t1 <= 0:
            return -np.inf
        return (mat.rho1 * v1 * float(internal_energy(t1, mat.phase1))
                + mat.rho2 * v2 * float(internal_energy(t, mat.phase2)) - target)

    lo = max(THETA_MIN, -theta1_shift + THETA_MIN)
    hi = 1.0
    while f(hi) < 0:
        hi *= 2.0
        if hi > THETA_MAX:
            raise InfeasibleError("temperature constraint has no solution")
    if f(lo) > 0:
        raise InfeasibleError("temperature constraint has no solution")
    t = optimize.brentq(f, lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps)
    return float(mat.rho1 * v1 * entropy(t + theta1_shift, mat.phase1)
                 + mat.rho2 * v2 * entropy(t, mat.phase2))


def transfer_path(m: int, n: int, R: float, delta: float) -> np.ndarray:
    """Radii after moving volume delta from ball 2 to ball 1 (others fixed)."""
    v = ball_volume(n, R)
    if delta >= v:
        raise InfeasibleError("transfer exceeds the ball volume")
    radii = np.full(m, R)
    w = sphere_measure(n) / n
    radii[0] = ((v + delta) / w) ** (1.0 / n)
    radii[1] = ((v - delta) / w) ** (1.0 / n)
    return radii


def entropy_criticality_probe(config: EquilibriumConfig, q: ConservedQuantities,
                              mat: MaterialParams, n_samples: int = 32,
                              step: float = 1e-3, seed: int = 0) -> dict:
    """Test whether an equal-radius equilibrium maximizes the reduced entropy.

    The family perturbs ball volumes (total phase-1 volume fixed) and the
    temperature split between the phases, with the temperature level chosen
    so that the energy equals E0.  Random unit directions are probed at
    relative amplitude `step`; the point is reported a strict local maximum
    if the entropy drops along every probed direction.  For m >= 2 the
    volume-transfer path between two balls is also scanned.
    """
    m, n, R = config.m, config.n, config.R
    v = ball_volume(n, R)
    w = sphere_measure(n) / n
    phi0 = reduced_entropy(np.full(m, R), 0.0, q, mat)
    rng = np.random.default_rng(seed)
    # volume directions with zero sum, plus the temperature split
    basis = []
    for i in range(m - 1):
        e = np.zeros(m)
        e[i], e[i + 1] = 1.0, -1.0
        basis.append(e)
    dim = (m - 1) + 1
    worst, worst_gain = None, -np.inf
    for _ in range(n_samples):
        c = rng.standard_normal(dim)
        c /= np.linalg.norm(c)
        dv = np.zeros(m)
        for i in range(m - 1):
            dv += c[i] * basis[i]
        for sgn in (1.0, -1.0):
            radii = ((v + sgn * step * v * dv) / w) ** (1.0 / n)
            gain = reduced_entropy(radii, sgn * step * config.theta_star * c[-1], q, mat) - phi0
            if gain > worst_gain:
                worst_gain, worst = gain, sgn * c
    report = {"is_local_max": bool(worst_gain < 0), "worst_direction": worst.tolist(),
              "worst_gain": float(worst_gain), "entropy": phi0}
    if m >= 2:
        deltas = v * np.linspace(0.0, 0.2, 11)
        path = [reduced_entropy(transfer_path(m, n, R, d), 0.0, q, mat) for d in deltas]
        report["transfer_deltas"] = deltas.tolist()
        report["transfer_entropy"] = path
        report["transfer_increasing"] = bool(np.all(np.diff(path) > 0))
        report["witness"] = "volume transfer from ball 2 to ball 1"
    return report
