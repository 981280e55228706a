"""Flat-interface boundary symbols.

All symbols are functions of the scaled frequency z = lambda/tau^2 with

    omega_k = sqrt(1 + rho_k z/mu_k)     (principal branch)
    gamma_k = omega_k + 1/omega_k,       gamma = mu1*gamma1 + mu2*gamma2.

omega_k is holomorphic off the cut (-inf, -mu_k/rho_k].

The S11 and S22 bundles hold the scaled coefficients p_k, q_k of the 2x2
systems solved for the inverse interface operators, their Lopatinskii
determinant r = p1*q2 + p2*q1 and the factorization r = r1*r2.  The
default formulas reproduce the determinant of the flat transmission
problem; three misprints of the published display are corrected (see
`literal`).  With literal=True the formulas are evaluated exactly as
printed, for auditing.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import BranchError, ConfigError, DegeneracyError


@dataclass(frozen=True)
class SymbolParams:
    rho1: float
    rho2: float
    mu1: float
    mu2: float

    def __post_init__(self):
        if min(self.rho1, self.rho2, self.mu1, self.mu2) <= 0:
            raise ConfigError("densities and viscosities must be positive")

    @property
    def jump_rho(self) -> float:
        return self.rho2 - self.rho1

    @property
    def cut_ends(self) -> tuple[float, float]:
        return -self.mu1 / self.rho1, -self.mu2 / self.rho2

    @classmethod
    def from_material(cls, mat, theta: float) -> "SymbolParams":
        return cls(mat.rho1, mat.rho2, float(mat.phase1.mu(theta)), float(mat.phase2.mu(theta)))


@dataclass(frozen=True)
class SymbolPoint:
    z: complex
    omega1: complex
    omega2: complex
    gamma1: complex
    gamma2: complex
    gamma: complex


def on_cut(z, par: SymbolParams, atol: float = 0.0):
    """True where z lies on either branch cut."""
    z = np.asarray(z, dtype=complex)
    end = max(par.cut_ends)
    return (np.abs(z.imag) <= atol) & (z.real <= end)


def _omegas(z, par: SymbolParams):
    z = np.asarray(z, dtype=complex)
    if np.any(on_cut(z, par)):
        raise BranchError("z lies on a branch cut (-inf, -mu_k/rho_k]")
    w1 = np.sqrt(1.0 + par.rho1 * z / par.mu1)
    w2 = np.sqrt(1.0 + par.rho2 * z / par.mu2)
    return z, w1, w2


def symbol_point(z, par: SymbolParams) -> SymbolPoint:
    z, w1, w2 = _omegas(z, par)
    g1 = w1 + 1 / w1
    g2 = w2 + 1 / w2
    return SymbolPoint(z, w1, w2, g1, g2, par.mu1 * g1 + par.mu2 * g2)


def _bracket(w):
    """(omega-1)/omega + 2(omega+1)/(omega^2+1)."""
    return (w - 1) / w + 2 * (w + 1) / (w ** 2 + 1)


def psi_and_ell(z, par: SymbolParams):
    """psi(z) and ell(z) of the flat boundary symbol."""
    sp = symbol_point(z, par)
    w1, w2 = sp.omega1, sp.omega2
    b1, b2 = _bracket(w1), _bracket(w2)
    psi = ((w1 + 1) / (w1 ** 2 + 1) * par.mu2 * b2
           + (w2 + 1) / (w2 ** 2 + 1) * par.mu1 * b1)
    if np.any(np.abs(psi) < 1e-14):
        raise DegeneracyError("psi(z) vanishes")
    num = (par.rho1 * par.mu2 * (w1 - 1) / (w1 * (w1 ** 2 + 1)) * b2
           - par.rho2 * par.mu1 * (w2 - 1) / (w2 * (w2 ** 2 + 1)) * b1)
    return psi, num / psi


def ell_infinity_limit(par: SymbolParams) -> float:
    """Closed-form lim z*ell(z) as |z| -> infinity."""
    a = np.sqrt(par.mu2 / par.rho2)
    b = np.sqrt(par.mu1 / par.rho1)
    return 2 * par.mu1 * par.mu2 * (a - b) / (par.mu1 * a + par.mu2 * b)


@dataclass(frozen=True)
class SymbolBundle:
    variant: str
    p1: complex
    p2: complex
    q1: complex
    q2: complex
    r: complex
    r1: complex
    r2: complex
    pi1: complex   # interface pressure of phase 1 per unit |xi| and unit data
    pi2: complex

    @property
    def residual(self):
        return np.abs(self.r - self.r1 * self.r2) / (1 + np.abs(self.r))


def r1_common(sp: SymbolPoint):
    w1, w2 = sp.omega1, sp.omega2
    return sp.gamma / (w1 * w2 * (w1 + 1) * (w2 + 1))


def s11_r2_terms(z, par: SymbolParams, literal: bool = False) -> list:
    """Summands of r2 for the S11 system."""
    sp = symbol_point(z, par)
    w1, w2 = sp.omega1, sp.omega2
    a = par.mu2 * par.rho1 / (par.mu1 * par.rho2)
    b = par.mu1 * par.rho2 / (par.mu2 * par.rho1)
    lead = (par.rho2 / par.rho1 * w1 + par.rho1 / par.rho2 * w2) * (w1 + 1) * (w2 + 1)
    if literal:
        lead = lead * (w1 + 1) * (w2 + 1)
    return [lead,
            2 * (w1 - 1) * (w2 - 1),
            2 * a * (w2 - 1),
            2 * b * (w1 - 1),
            a * (w2 ** 2 + 1) * (w2 + 1),
            b * sp.gamma1 * w1 * (w1 + 1)]


def s22_r2_terms(z, par: SymbolParams, literal: bool = False) -> list:
    """Summands of r2 for the S22 system (printed form is already consistent)."""
    sp = symbol_point(z, par)
    w1, w2 = sp.omega1, sp.omega2
    return [(w1 + w2) * (w1 + 1) * (w2 + 1),
            2 * (w1 - 1) * (w2 - 1),
            par.mu2 / par.mu1 * 2 * (w2 - 1),
            par.mu2 / par.mu1 * (w2 ** 2 + 1) * (w2 + 1),
            par.mu1 / par.mu2 * 2 * (w1 - 1),
            par.mu1 / par.mu2 * (w1 ** 2 + 1) * (w1 + 1)]


def s11_symbols(z, par: SymbolParams, literal: bool = False) -> SymbolBundle:
    """Coefficients of the system for [S^11]^(-1) (prescribed k = [[rho u.nu]]/[[rho]])."""
    sp = symbol_point(z, par)
    w1, w2, g = sp.omega1, sp.omega2, sp.gamma
    r1_, r2_, m1, m2 = par.rho1, par.rho2, par.mu1, par.mu2
    jmr = m2 / r2_ - m1 / r1_
    p1 = 1 / r1_ - 2 * jmr / (g * w1) * (w1 - 1) / (w1 + 1)
    p2 = 1 / r2_ + 2 * jmr / (g * w2) * (w2 - 1) / (w2 + 1)
    q1 = g * (r1_ / w1 + r1_ * m2 * sp.gamma2 / (m1 * w1 * (w1 + 1))
              + r2_ / (w1 * w2) * (w1 - 1) / (w1 + 1))
    q2 = g * (r2_ / w2 + r2_ * m1 * sp.gamma1 / (m2 * w2 * (w2 + 1))
              + r1_ / (w1 * w2) * (w2 - 1) / (w2 + 1))
    r = p1 * q2 + p2 * q1
    rr1 = r1_common(sp)
    rr2 = sum(s11_r2_terms(z, par, literal))
    jump = par.jump_rho
    return SymbolBundle("S11", p1, p2, q1, q2, r, rr1, rr2,
                        jump * p2 / r * g ** 2, jump * p1 / r * g ** 2)


def s22_symbols(z, par: SymbolParams, literal: bool = False) -> SymbolBundle:
    """Coefficients of the system for [S^22]^(-1) (prescribed phase flux j)."""
    sp = symbol_point(z, par)
    w1, w2, g = sp.omega1, sp.omega2, sp.gamma
    m1, m2 = par.mu1, par.mu2
    jm = m2 - m1
    sgn = 1.0 if literal else -1.0
    p1 = 1 + sgn * 2 * jm / (g * w1) * (w1 - 1) / (w1 + 1)
    p2 = 1 - sgn * 2 * jm / (g * w2) * (w2 - 1) / (w2 + 1)
    c1 = 1 / m1 if literal else m2 / m1
    c2 = 1 / m2 if literal else m1 / m2
    q1 = g / w1 * (1 + 1 / w2 * (w1 - 1) / (w1 + 1) + c1 * sp.gamma2 / (w1 + 1))
    q2 = g / w2 * (1 + 1 / w1 * (w2 - 1) / (w2 + 1) + c2 * sp.gamma1 / (w2 + 1))
    r = p1 * q2 + p2 * q1
    rr1 = r1_common(sp)
    rr2 = sum(s22_r2_terms(z, par, literal))
    jump = 1 / par.rho2 - 1 / par.rho1
    return SymbolBundle("S22", p1, p2, q1, q2, r, rr1, rr2,
                        jump * p2 / r * g ** 2, jump * p1 / r * g ** 2)


def symbols(variant: str, z, par: SymbolParams, literal: bool = False) -> SymbolBundle:
    v = variant.upper()
    if v == "S11":
        return s11_symbols(z, par, literal)
    if v == "S22":
        return s22_symbols(z, par, literal)
    raise ConfigError(f"unknown variant {variant!r} (S11 or S22)")


def r2(variant: str, z, par: SymbolParams, literal: bool = False):
    terms = (s11_r2_terms if variant.upper() == "S11" else s22_r2_terms)(z, par, literal)
    return sum(terms)


def stated_limits(variant: str, par: SymbolParams) -> dict:
    """Limit values of p_k, q_k at z = 0 and z = infinity as published."""
    r1_, r2_, m1, m2 = par.rho1, par.rho2, par.mu1, par.mu2
    if variant.upper() == "S11":
        return {"p0": (1 / r1_, 1 / r2_),
                "q0": (2 * (m1 + m2) ** 2 * r1_ / m1, 2 * (m1 + m2) ** 2 * r2_ / m2),
                "pinf": (1 / r1_, 1 / r2_),
                "qinf": ((r1_ + r2_) * np.sqrt(r1_ * m1), (r1_ + r2_) * np.sqrt(r2_ * m2))}
    s = (np.sqrt(r1_ * m1) + np.sqrt(r2_ * m2)) ** 2
    return {"p0": (1.0, 1.0),
            "q0": (2 * (m1 + m2) ** 2 / m1, 2 * (m1 + m2) ** 2 / m2),
            "pinf": (1.0, 1.0),
            "qinf": (s * r1_, s * r2_)}


def derived_limits(variant: str, par: SymbolParams) -> dict:
    """Limit values implied by the (corrected) formulas themselves."""
    lim = stated_limits(variant, par)
    s = (np.sqrt(par.rho1 * par.mu1) + np.sqrt(par.rho2 * par.mu2)) ** 2
    if variant.upper() == "S11":
        lim["qinf"] = (s, s)
    else:
        lim["qinf"] = (s / par.rho1, s / par.rho2)
    return lim


# pluggable surface-tension symbol m(z)

def constant_m(m0: float = 1.0) -> Callable:
    """Constant m(z) = m0.  NON-PHYSICAL placeholder for plumbing tests only."""
    if m0 <= 0:
        raise ConfigError("m0 must be positive")

    def m_fn(z):
        return m0 + 0 * np.asarray(z, dtype=complex)

    m_fn.non_physical = True
    m_fn.bound = float(m0)
    return m_fn


def s_boundary_symbol(lam, xi, par: SymbolParams, sigma: float, c0: float = 0.0,
                      b0=None, m_fn: Callable | None = None):
    """s = lam + sigma*tau/[[rho]]^2*m(z) + c0*tau/[[rho]]*ell(z) + i*tau/[[rho]]*(b0.xi/|xi|)."""
    if m_fn is None:
        raise ConfigError("m_fn must be supplied (see constant_m for a placeholder)")
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    tau = float(np.linalg.norm(xi))
    if tau <= 0:
        raise ConfigError("tau = |xi| must be positive")
    z = lam / tau ** 2
    jr = par.jump_rho
    s = lam + sigma * tau / jr ** 2 * m_fn(z)
    if c0 != 0.0:
        s = s + c0 * tau / jr * psi_and_ell(z, par)[1]
    if b0 is not None:
        b0 = np.atleast_1d(np.asarray(b0, dtype=float))
        s = s + 1j * tau / jr * float(b0 @ xi) / tau
    return s
