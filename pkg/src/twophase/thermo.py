"""Phase-wise thermodynamics.

Each phase carries a free energy psi(theta) with its first two derivatives,
a viscosity mu(theta) and a heat conductivity d(theta).  Derived quantities:

    eta   = -psi'              entropy
    eps   = psi + theta*eta    internal energy
    kappa = -theta*psi''       heat capacity (= d eps / d theta)

The latent heat is l(theta) = theta*[[psi'(theta)]] with [[v]] = v2 - v1.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import ConfigError, DomainError

Scalar = Callable[[float], float]


def _const(value: float) -> Scalar:
    def f(theta):
        return value + 0.0 * np.asarray(theta, dtype=float)
    return f


@dataclass(frozen=True)
class PhaseLaw:
    """Free energy triple plus transport coefficients of one phase."""
    psi: Scalar
    dpsi: Scalar
    ddpsi: Scalar
    mu: Scalar
    d: Scalar
    name: str = "custom"
    coeffs: tuple = ()

    def check(self, thetas: Sequence[float] | None = None) -> None:
        """Raise ConfigError if kappa, mu or d is not positive on `thetas`."""
        if thetas is None:
            thetas = np.logspace(-3, 3, 64)
        th = np.asarray(thetas, dtype=float)
        if np.any(np.asarray(self.ddpsi(th)) >= 0):
            raise ConfigError(f"law {self.name!r}: psi'' must be negative")
        if np.any(np.asarray(self.mu(th)) <= 0):
            raise ConfigError(f"law {self.name!r}: viscosity must be positive")
        if np.any(np.asarray(self.d(th)) <= 0):
            raise ConfigError(f"law {self.name!r}: conductivity must be positive")


def log_law(c: float = 1.0, e0: float = 0.0, s0: float = 0.0,
            mu: float = 1.0, d: float = 1.0) -> PhaseLaw:
    """psi = -c*theta*(ln theta - 1) + e0 - s0*theta.

    Gives eps = c*theta + e0, eta = c*ln(theta) + s0, kappa = c.
    With e0 = s0 = 0 this is the reference law of the test suite.
    """
    if c <= 0:
        raise ConfigError("log law needs c > 0")

    def psi(t):
        t = np.asarray(t, dtype=float)
        return -c * t * (np.log(t) - 1.0) + e0 - s0 * t

    def dpsi(t):
        return -c * np.log(np.asarray(t, dtype=float)) - s0

    def ddpsi(t):
        return -c / np.asarray(t, dtype=float)

    return PhaseLaw(psi, dpsi, ddpsi, _const(mu), _const(d),
                    name="log", coeffs=(c, e0, s0))


def power_transport_law(c: float = 1.0, e0: float = 0.0, s0: float = 0.0,
                        mu0: float = 1.0, mu_exp: float = 0.0,
                        d0: float = 1.0, d_exp: float = 0.0) -> PhaseLaw:
    """Log free energy with mu = mu0*theta**mu_exp and d = d0*theta**d_exp."""
    base = log_law(c, e0, s0)
    if mu0 <= 0 or d0 <= 0:
        raise ConfigError("transport prefactors must be positive")

    def mu(t):
        return mu0 * np.asarray(t, dtype=float) ** mu_exp

    def d(t):
        return d0 * np.asarray(t, dtype=float) ** d_exp

    return PhaseLaw(base.psi, base.dpsi, base.ddpsi, mu, d,
                    name="power", coeffs=(c, e0, s0, mu0, mu_exp, d0, d_exp))


LAWS = {
    "log": (log_law, ("c", "e0", "s0", "mu", "d")),
    "power": (power_transport_law, ("c", "e0", "s0", "mu0", "mu_exp", "d0", "d_exp")),
}


def make_law(name: str, coeffs: Sequence[float] = ()) -> PhaseLaw:
    """Build a registered law from its name and positional coefficients."""
    try:
        factory, names = LAWS[name]
    except KeyError:
        raise ConfigError(f"unknown phase law {name!r}; known: {sorted(LAWS)}") from None
    if len(coeffs) > len(names):
        raise ConfigError(f"law {name!r} takes at most {len(names)} coefficients {names}")
    return factory(*[float(c) for c in coeffs])


@dataclass(frozen=True)
class MaterialParams:
    rho1: float
    rho2: float
    sigma: float
    phase1: PhaseLaw = field(default_factory=log_law)
    phase2: PhaseLaw = field(default_factory=log_law)

    def __post_init__(self):
        if self.rho1 <= 0 or self.rho2 <= 0:
            raise ConfigError("densities must be positive")
        if self.rho1 == self.rho2:
            raise ConfigError("densities must differ (rho1 != rho2)")
        if self.sigma <= 0:
            raise ConfigError("surface tension must be positive")

    @property
    def jump_rho(self) -> float:
        return self.rho2 - self.rho1

    @property
    def jump_inv_rho(self) -> float:
        return 1.0 / self.rho2 - 1.0 / self.rho1

    def phase(self, k: int) -> PhaseLaw:
        if k == 1:
            return self.phase1
        if k == 2:
            return self.phase2
        raise ValueError("phase index must be 1 or 2")

    def rho(self, k: int) -> float:
        return self.rho1 if k == 1 else self.rho2


@dataclass(frozen=True)
class ThermoState:
    theta: float
    phase: int
    psi: float
    eta: float
    eps: float
    kappa: float
    mu: float
    d: float


def _check_theta(theta) -> None:
    if np.any(np.asarray(theta) <= 0) or not np.all(np.isfinite(theta)):
        raise DomainError("temperature must be positive and finite")


def eval_phase(theta: float, phase: int, mat: MaterialParams) -> ThermoState:
    """All derived quantities of one phase at temperature theta."""
    _check_theta(theta)
    law = mat.phase(phase)
    psi = float(law.psi(theta))
    eta = -float(law.dpsi(theta))
    return ThermoState(theta=float(theta), phase=phase, psi=psi, eta=eta,
                       eps=psi + theta * eta, kappa=-theta * float(law.ddpsi(theta)),
                       mu=float(law.mu(theta)), d=float(law.d(theta)))


def internal_energy(theta, law: PhaseLaw):
    """eps(theta) for a single law, vectorized."""
    _check_theta(theta)
    t = np.asarray(theta, dtype=float)
    return law.psi(t) - t * law.dpsi(t)


def entropy(theta, law: PhaseLaw):
    _check_theta(theta)
    return -law.dpsi(np.asarray(theta, dtype=float))


def latent_heat(theta: float, mat: MaterialParams) -> float:
    """l(theta) = theta*(psi_2'(theta) - psi_1'(theta))."""
    _check_theta(theta)
    return float(theta * (mat.phase2.dpsi(theta) - mat.phase1.dpsi(theta)))


def phase_flux_from_normal_jump(jump_u_normal: float, mat: MaterialParams) -> float:
    """j = [[u.nu]] / [[1/rho]]."""
    jinv = mat.jump_inv_rho
    if jinv == 0:
        raise ConfigError("equal densities: phase flux is not determined by [[u.nu]]")
    return jump_u_normal / jinv


def normal_jump_from_flux(j: float, mat: MaterialParams) -> float:
    """Inverse of phase_flux_from_normal_jump: [[u.nu]] = [[1/rho]]*j."""
    return mat.jump_inv_rho * j
