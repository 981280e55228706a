"""Interfaces given as normal graphs over a reference sphere.

A surface Gamma = {x0 + (R + h(p)) p : |p| = 1} is described by the height
h on the sphere Sigma of radius R.  Sign conventions: the normal of Sigma
points out of the ball (phase 1 inside), L_Sigma = -P_Sigma/R, and the
curvature H = trace L_Gamma, so a sphere of radius R has H = -(n-1)/R.

Surface calculus is done spectrally: real spherical harmonics for n = 3 on
a Gauss-Legendre x uniform grid, Fourier modes for n = 2 on a uniform
grid.  The only differential operator needed is the Laplace-Beltrami
operator; gradients and products of gradients come from the carre du champ

    Gamma(f, g) = (Delta(fg) - f Delta g - g Delta f) / 2 = grad f . grad g,

which is exact as long as the product fg stays within the resolved band.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import special

from .errors import ConfigError, GeometryError, ResolutionError

ADMISSIBLE_HEIGHT = 0.1   # |h| < R/10
ADMISSIBLE_SLOPE = 0.1    # |grad h| < 1/10


def sphere_measure(n: int) -> float:
    """Surface measure of the unit sphere in R^n."""
    return 2.0 * np.pi ** (n / 2.0) / special.gamma(n / 2.0)


def _real_sph_harm(l, m, colat, lon):
    """Real orthonormal spherical harmonic on the unit 2-sphere."""
    if m == 0:
        return special.sph_harm_y(l, 0, colat, lon).real
    y = special.sph_harm_y(l, abs(m), colat, lon)
    sign = (-1.0) ** m
    if m > 0:
        return np.sqrt(2.0) * sign * y.real
    return np.sqrt(2.0) * sign * y.imag


class ReferenceSphere:
    """Sphere of radius R in R^n (n = 2 or 3) with a spectral transform plan.

    Attributes
    ----------
    colat, lon : node angles (colat = pi/2 for n = 2)
    normals    : (P, n) unit outward normals at the nodes
    weights    : quadrature weights on the unit sphere (sum = |S^{n-1}|)
    basis      : (P, K) orthonormal harmonics on the unit sphere
    degree     : (K,) harmonic degree of each basis column
    order      : (K,) order m of each basis column
    """

    def __init__(self, n: int, R: float, L_max: int, center=None):
        if n not in (2, 3):
            raise ConfigError("only n = 2 and n = 3 are supported")
        if R <= 0:
            raise ConfigError("radius must be positive")
        if L_max < 1:
            raise ConfigError("L_max must be at least 1")
        self.n = n
        self.R = float(R)
        self.L_max = int(L_max)
        self.center = np.zeros(n) if center is None else np.asarray(center, dtype=float)
        if n == 2:
            nphi = 2 * L_max + 2
            lon = 2 * np.pi * np.arange(nphi) / nphi
            self.lon = lon
            self.colat = np.full_like(lon, np.pi / 2)
            self.weights = np.full(nphi, 2 * np.pi / nphi)
            self.normals = np.stack([np.cos(lon), np.sin(lon)], axis=1)
            cols, deg, order = [np.full(nphi, 1 / np.sqrt(2 * np.pi))], [0], [0]
            for k in range(1, L_max + 1):
                cols += [np.cos(k * lon) / np.sqrt(np.pi), np.sin(k * lon) / np.sqrt(np.pi)]
                deg += [k, k]
                order += [k, -k]
        else:
            x, wx = np.polynomial.legendre.leggauss(L_max + 1)
            nphi = 2 * L_max + 2
            phi = 2 * np.pi * np.arange(nphi) / nphi
            th = np.arccos(x)
            TH, PH = np.meshgrid(th, phi, indexing="ij")
            self.colat = TH.ravel()
            self.lon = PH.ravel()
            self.weights = np.outer(wx, np.full(nphi, 2 * np.pi / nphi)).ravel()
            st = np.sin(self.colat)
            self.normals = np.stack([st * np.cos(self.lon), st * np.sin(self.lon),
                                     np.cos(self.colat)], axis=1)
            cols, deg, order = [], [], []
            for l in range(L_max + 1):
                for m in range(-l, l + 1):
                    cols.append(_real_sph_harm(l, m, self.colat, self.lon))
                    deg.append(l)
                    order.append(m)
        self.basis = np.stack(cols, axis=1)
        self.degree = np.asarray(deg)
        self.order = np.asarray(order)
        self.lap_eig = -self.degree * (self.degree + n - 2) / self.R ** 2

    @property
    def npts(self) -> int:
        return self.basis.shape[0]

    @property
    def points(self) -> np.ndarray:
        return self.center + self.R * self.normals

    def analysis(self, f) -> np.ndarray:
        """Harmonic coefficients (unit-sphere normalization) of grid values."""
        return self.basis.T @ (self.weights * np.asarray(f, dtype=float))

    def synthesis(self, c) -> np.ndarray:
        return self.basis @ np.asarray(c, dtype=float)

    def laplacian(self, f) -> np.ndarray:
        """Laplace-Beltrami operator of the sphere of radius R."""
        return self.synthesis(self.lap_eig * self.analysis(f))

    def carre(self, f, g) -> np.ndarray:
        """grad f . grad g via the carre du champ identity."""
        f = np.asarray(f, dtype=float)
        g = np.asarray(g, dtype=float)
        return 0.5 * (self.laplacian(f * g) - f * self.laplacian(g) - g * self.laplacian(f))

    def gradient(self, f) -> np.ndarray:
        """Cartesian components (P, n) of the tangential gradient on Sigma."""
        return np.stack([self.carre(f, self.R * self.normals[:, i])
                         for i in range(self.n)], axis=1)

    def integrate(self, f) -> float:
        """Surface integral over Sigma (radius R)."""
        return float(self.R ** (self.n - 1) * np.sum(self.weights * f))

    def harmonic(self, l: int, m: int = 0) -> np.ndarray:
        """Grid values of the basis harmonic of degree l and order m."""
        idx = np.flatnonzero((self.degree == l) & (self.order == m))
        if idx.size != 1:
            raise ConfigError(f"no harmonic with l={l}, m={m} up to L_max={self.L_max}")
        return self.basis[:, idx[0]].copy()

    def check_resolved(self, f, max_degree: int, rtol: float = 1e-10) -> None:
        """Raise ResolutionError unless f is band-limited to max_degree."""
        f = np.asarray(f, dtype=float)
        c = self.analysis(f)
        scale = max(1.0, float(np.max(np.abs(f))))
        if np.max(np.abs(self.synthesis(c) - f)) > rtol * scale:
            raise ResolutionError(f"field has content beyond degree {self.L_max}")
        tail = np.abs(c[self.degree > max_degree])
        if tail.size and tail.max() > rtol * scale:
            raise ResolutionError(
                f"field has content beyond degree {max_degree} "
                f"(max tail coefficient {tail.max():.2e})")


def sphere_signed_distance(x, sph: ReferenceSphere):
    """|x - center| - R; negative inside the ball."""
    x = np.asarray(x, dtype=float)
    return np.linalg.norm(x - sph.center, axis=-1) - sph.R


@dataclass
class GraphPatch:
    """Height field h on the grid of a reference sphere."""
    sphere: ReferenceSphere
    h: np.ndarray

    def __post_init__(self):
        self.h = np.asarray(self.h, dtype=float)
        if self.h.shape != (self.sphere.npts,):
            raise ConfigError(f"height field must have {self.sphere.npts} nodes")

    @cached_property
    def grad_h(self) -> np.ndarray:
        return self.sphere.gradient(self.h)

    @cached_property
    def slope2(self) -> np.ndarray:
        """|grad_Sigma h|^2."""
        return self.sphere.carre(self.h, self.h)

    @cached_property
    def shrink(self) -> np.ndarray:
        """M_0(h) on tangent vectors: R/(R+h)."""
        return self.sphere.R / (self.sphere.R + self.h)

    @cached_property
    def alpha(self) -> np.ndarray:
        return self.shrink[:, None] * self.grad_h

    @cached_property
    def beta(self) -> np.ndarray:
        return 1.0 / np.sqrt(1.0 + self.shrink ** 2 * self.slope2)

    def admissible(self) -> bool:
        slope = np.sqrt(np.maximum(np.sum(self.grad_h ** 2, axis=1), 0.0))
        return bool(np.max(np.abs(self.h)) < ADMISSIBLE_HEIGHT * self.sphere.R
                    and np.max(slope) < ADMISSIBLE_SLOPE)

    def require_admissible(self) -> None:
        if not self.admissible():
            raise GeometryError("height field violates |h| < R/10 or |grad h| < 1/10")


def graph_normal_and_velocity(patch: GraphPatch, dt_h):
    """Unit normal beta*(nu_Sigma - alpha) and normal velocity beta*dt_h."""
    patch.require_admissible()
    nu = patch.beta[:, None] * (patch.sphere.normals - patch.alpha)
    return nu, patch.beta * np.asarray(dt_h, dtype=float)


def graph_curvature(patch: GraphPatch) -> np.ndarray:
    """Curvature H (sum of principal curvatures) of the graph at each node.

    With s = R/(R+h), g = |grad h|^2 and beta = (1 + s^2 g)^(-1/2):

        H = beta*s*[ -(n-1)/R + s*Lap h - (s^2/R)*g
                     - (beta^2/2)*( -(2 s^4/R)*g^2 + s^3*grad h.grad g ) ]

    which is the tubular-coordinate curvature formula specialized to
    L_Sigma = -P/R.  Needs h band-limited to L_max/3 so that every product
    fed to the Laplacian stays resolved.
    """
    patch.require_admissible()
    sph = patch.sphere
    sph.check_resolved(patch.h, sph.L_max // 3)
    n, R = sph.n, sph.R
    h = patch.h
    s = patch.shrink
    g = patch.slope2
    b = patch.beta
    lap_h = sph.laplacian(h)
    gam_hg = sph.carre(h, g)
    inner = (-(n - 1) / R + s * lap_h - s ** 2 * g / R
             - 0.5 * b ** 2 * (-2.0 * s ** 4 * g ** 2 / R + s ** 3 * gam_hg))
    return b * s * inner


def linearized_curvature_mode(l: int, n: int, R: float) -> float:
    """Eigenvalue a_l = (l(l+n-2) - (n-1))/R^2 of A_Sigma on degree-l harmonics."""
    if l < 0:
        raise ConfigError("harmonic degree must be nonnegative")
    return (l * (l + n - 2) - (n - 1)) / R ** 2


def translated_sphere_height(sph: ReferenceSphere, shift) -> np.ndarray:
    """Height over Sigma of the same sphere moved by `shift` (|shift| < R)."""
    shift = np.asarray(shift, dtype=float)
    c = sph.normals @ shift
    d2 = float(shift @ shift)
    return c + np.sqrt(sph.R ** 2 - d2 + c ** 2) - sph.R


def save_height_csv(path, sph: ReferenceSphere, h) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["node", "colatitude", "longitude", "h"])
        for i, (t, p, v) in enumerate(zip(sph.colat, sph.lon, h)):
            w.writerow([i, repr(float(t)), repr(float(p)), repr(float(v))])


def load_height_csv(path, sph: ReferenceSphere) -> np.ndarray:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if len(rows) != sph.npts:
        raise ConfigError(f"expected {sph.npts} nodes, file has {len(rows)}")
    h = np.empty(sph.npts)
    for row in rows:
        i = int(row["node"])
        if not (np.isclose(float(row["colatitude"]), sph.colat[i])
                and np.isclose(float(row["longitude"]), sph.lon[i])):
            raise ConfigError(f"node {i} does not match the grid")
        h[i] = float(row["h"])
    return h


def save_height_json(path, sph: ReferenceSphere, h) -> None:
    c = sph.analysis(h)
    doc = {"n": sph.n, "R": sph.R, "L_max": sph.L_max,
           "coefficients": [{"l": int(l), "m": int(m), "value": float(v)}
                            for l, m, v in zip(sph.degree, sph.order, c)]}
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1)


def load_height_json(path, sph: ReferenceSphere) -> np.ndarray:
    with open(path) as fh:
        doc = json.load(fh)
    if doc.get("n") != sph.n:
        raise ConfigError("dimension mismatch in coefficient file")
    c = np.zeros(len(sph.degree))
    lookup = {(int(l), int(m)): k for k, (l, m) in enumerate(zip(sph.degree, sph.order))}
    for item in doc["coefficients"]:
        key = (int(item["l"]), int(item["m"]))
        if key not in lookup:
            raise ResolutionError(f"coefficient {key} exceeds L_max={sph.L_max}")
        c[lookup[key]] = float(item["value"])
    return sph.synthesis(c)
