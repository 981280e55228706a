"""Winding-number certificates via adaptive argument tracking.

A closed contour is a list of smooth segments z(t), t in [0, 1].  The
function is sampled along the path; between neighbours the argument change
is taken as angle(f_{k+1}/f_k), which is exact as long as it stays below
pi in modulus.  Intervals with |d arg| >= pi/2 are bisected (up to a depth
cap), and the winding number is the accumulated change over 2*pi.  The
initial sampling must resolve the argument: a change of more than 2*pi
between two initial samples aliases and cannot be detected locally.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import flat_symbols as fs
from .errors import ConfigError, ZeroOnContourError

Segment = Callable[[np.ndarray], np.ndarray]

DEFAULT_TOL = 1e-12
WINDING_BAND = 0.05
DEPTH_CAP = 20


@dataclass
class Contour:
    """Closed path made of parametrized segments with initial sample counts."""
    segments: list
    counts: list
    name: str = "contour"

    def initial(self):
        """Initial parameters as (segment index, t) pairs, closing point excluded."""
        seg, ts = [], []
        for i, c in enumerate(self.counts):
            t = np.linspace(0.0, 1.0, c, endpoint=False)
            seg.append(np.full(c, i))
            ts.append(t)
        return np.concatenate(seg), np.concatenate(ts)

    def evaluate(self, seg: np.ndarray, t: np.ndarray) -> np.ndarray:
        z = np.empty(t.shape, dtype=complex)
        for i, f in enumerate(self.segments):
            sel = seg == i
            if np.any(sel):
                z[sel] = f(t[sel])
        return z


def circle(center: complex = 0.0, radius: float = 1.0, count: int = 64) -> Contour:
    def seg(t):
        return center + radius * np.exp(2j * np.pi * t)
    return Contour([seg], [count], name=f"circle(c={center}, r={radius})")


def _axis_map(t, rmax, y0):
    """Signed log-linear map of t in [0,1] onto [rmax, -rmax]."""
    u = 1.0 - 2.0 * t
    scale = np.log1p(rmax / y0)
    return np.sign(u) * y0 * np.expm1(np.abs(u) * scale)


def half_disk(rmax: float, count: int = 256, y0: float = 1e-3) -> Contour:
    """Boundary of {Re z >= 0, |z| <= rmax}, counter-clockwise.

    The arc runs from -i*rmax to i*rmax through rmax; the imaginary axis is
    traversed downwards with logarithmic spacing away from the origin.
    """
    def arc(t):
        return rmax * np.exp(1j * np.pi * (t - 0.5))

    def axis(t):
        return 1j * _axis_map(t, rmax, y0)

    return Contour([arc, axis], [count, 2 * count], name=f"half_disk(rmax={rmax:g})")


def sector(phi: float, rmin: float, rmax: float, count: int = 256) -> Contour:
    """Boundary of {|arg z| <= phi, rmin <= |z| <= rmax}, counter-clockwise."""
    if not 0 < phi < np.pi:
        raise ConfigError("sector angle must lie in (0, pi)")
    if not 0 < rmin < rmax:
        raise ConfigError("need 0 < rmin < rmax")
    lr = np.log(rmax / rmin)

    def outer(t):
        return rmax * np.exp(1j * phi * (2 * t - 1))

    def ray_in(t):
        return rmin * np.exp(lr * (1 - t)) * np.exp(1j * phi)

    def inner(t):
        return rmin * np.exp(1j * phi * (1 - 2 * t))

    def ray_out(t):
        return rmin * np.exp(lr * t) * np.exp(-1j * phi)

    return Contour([outer, ray_in, inner, ray_out], [count, count, count // 4 + 4, count],
                   name=f"sector(phi={phi:g}, r={rmin:g}..{rmax:g})")


@dataclass(frozen=True)
class Region:
    kind: str            # "half-plane" or "sector"
    rmax: float
    rmin: float = 0.0
    phi: float = np.pi / 2
    margin: float = 0.0

    def contour(self, count: int = 256) -> Contour:
        if self.kind == "half-plane":
            return half_disk(self.rmax, count)
        if self.kind == "sector":
            return sector(self.phi, self.rmin, self.rmax, count)
        raise ConfigError(f"unknown region kind {self.kind!r}")

    def check_cuts(self, par: fs.SymbolParams) -> None:
        """Raise if the region comes closer than `margin` to a branch cut."""
        end = max(par.cut_ends)   # the cut nearest the origin
        if self.kind == "half-plane" or self.phi <= np.pi / 2:
            dist = -end
        else:
            dist = -end * np.sin(np.pi - self.phi)
        if dist <= self.margin:
            raise ConfigError("region is within the cut-avoidance margin")


@dataclass
class Certificate:
    function_id: str
    contour: str
    points: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)
    total_arg: float = 0.0
    winding: int = 0
    min_modulus: float = 0.0
    depth: int = 0
    max_step: float = 0.0
    verdict: str = "inconclusive"
    zeros: int = 0

    def to_dict(self) -> dict:
        return {"function": self.function_id, "contour": self.contour,
                "winding": self.winding, "accumulated_argument": self.total_arg,
                "min_modulus": self.min_modulus, "refinement_depth": self.depth,
                "max_arg_step": self.max_step, "samples": int(self.points.size),
                "verdict": self.verdict}


def winding_number(f: Callable, contour: Contour, tol: float = DEFAULT_TOL,
                   depth_cap: int = DEPTH_CAP, function_id: str = "f") -> Certificate:
    """Winding number of f around 0 along the closed contour."""
    seg, t = contour.initial()
    level = np.zeros(t.size, dtype=int)
    z = contour.evaluate(seg, t)
    fz = np.asarray(f(z), dtype=complex)
    depth = 0
    while True:
        nxt = np.roll(fz, -1)
        with np.errstate(divide="ignore", invalid="ignore"):
            step = np.angle(nxt / fz)
        bad = np.abs(step) >= np.pi / 2
        refinable = bad & (level < depth_cap)
        if not np.any(refinable):
            break
        idx = np.flatnonzero(refinable)
        # midpoints in parameter space; the last sample wraps to the next segment start
        seg_n = np.roll(seg, -1)[idx]
        t_n = np.roll(t, -1)[idx]
        same = (seg_n == seg[idx]) & (idx != t.size - 1)
        t_end = np.where(same, t_n, 1.0)
        new_t = 0.5 * (t[idx] + t_end)
        new_seg = seg[idx]
        new_level = level[idx] + 1
        level[idx] += 1
        new_z = contour.evaluate(new_seg, new_t)
        new_f = np.asarray(f(new_z), dtype=complex)
        order = np.argsort(np.concatenate([np.arange(t.size), idx + 0.5]), kind="stable")
        seg = np.concatenate([seg, new_seg])[order]
        t = np.concatenate([t, new_t])[order]
        level = np.concatenate([level, new_level])[order]
        z = np.concatenate([z, new_z])[order]
        fz = np.concatenate([fz, new_f])[order]
        depth = max(depth, int(new_level.max()))
    modulus = np.abs(fz)
    if not np.all(np.isfinite(fz)) or modulus.min() <= tol:
        raise ZeroOnContourError(
            f"|f| = {np.nanmin(modulus):.3e} <= tol on the contour; perturb the contour")
    step = np.angle(np.roll(fz, -1) / fz)
    total = float(np.sum(step))
    w = int(np.round(total / (2 * np.pi)))
    ok = abs(total / (2 * np.pi) - w) <= WINDING_BAND and np.all(np.abs(step) < np.pi / 2)
    if not ok:
        verdict = "inconclusive"
    elif w == 0:
        verdict = "zero-free"
    else:
        verdict = f"zeros-detected({w})"
    return Certificate(function_id, contour.name, z, fz, total, w, float(modulus.min()),
                       depth, float(np.max(np.abs(step))), verdict, w)


def certify_zero_free(variant: str, region: Region, par: fs.SymbolParams,
                      literal: bool = False, planted_zero: complex | None = None,
                      count: int = 256) -> Certificate:
    """Winding certificate of r2 (S11 or S22) along the boundary of a region."""
    region.check_cuts(par)
    name = f"r2[{variant.upper()}]"

    def f(z):
        v = fs.r2(variant, z, par, literal)
        if planted_zero is not None:
            v = v * (z - planted_zero)
        return v

    if planted_zero is not None:
        name += f"*(z-{planted_zero})"
    return winding_number(f, region.contour(count), function_id=name)


def certify_nested(variant: str, par: fs.SymbolParams,
                   rmaxes: Sequence[float] = (1e1, 1e3, 1e6), literal: bool = False) -> list:
    """Certificates on nested half-disks emulating the unbounded half-plane."""
    return [certify_zero_free(variant, Region("half-plane", r), par, literal) for r in rmaxes]


@dataclass(frozen=True)
class SymbolSetup:
    """Inputs of the full boundary symbol s(lambda, tau)."""
    par: fs.SymbolParams
    sigma: float
    c0: float = 0.0
    b0: tuple = ()
    m_fn: Callable | None = None


def lower_bound_scan(setup: SymbolSetup, region: Region, n_lam: int = 40, n_tau: int = 40,
                     tau_range=(1e-3, 1e3), n_dir: int = 2) -> dict:
    """c_hat = min |s(lambda, tau)|/(|lambda| + tau) over a polar x log grid."""
    if region.kind != "sector":
        raise ConfigError("lower_bound_scan expects a sector region")
    r = np.geomspace(max(region.rmin, 1e-12), region.rmax, n_lam)
    ang = np.linspace(-region.phi, region.phi, 2 * (n_lam // 4) + 1)
    lams = (r[:, None] * np.exp(1j * ang)[None, :]).ravel()
    taus = np.geomspace(*tau_range, n_tau)
    b0 = np.asarray(setup.b0, dtype=float) if len(setup.b0) else None
    dim = len(setup.b0) if len(setup.b0) else 1
    if b0 is not None and np.linalg.norm(b0) > 0:
        e = b0 / np.linalg.norm(b0)
        dirs = [e, -e][:max(1, n_dir)]
    else:
        dirs = [np.eye(dim)[0]]
    best, where, skipped = np.inf, None, 0
    for d in dirs:
        for tau in taus:
            z = lams / tau ** 2
            good = ~fs.on_cut(z, setup.par)
            skipped += int(np.sum(~good))
            s = fs.s_boundary_symbol(lams[good], tau * d, setup.par, setup.sigma,
                                     setup.c0, b0, setup.m_fn)
            ratio = np.abs(s) / (np.abs(lams[good]) + tau)
            k = int(np.argmin(ratio))
            if ratio[k] < best:
                best, where = float(ratio[k]), (complex(lams[good][k]), float(tau))
    return {"c_hat": best, "argmin_lambda": where[0], "argmin_tau": where[1],
            "skipped": skipped, "positive": bool(best > 0)}
