"""Mode-by-mode spectral analysis of the linearization at a spherical equilibrium.

Geometry: a ball of radius R (phase 1) centred in a ball of radius R_out
(phase 2), n = 2 or 3.  Every operator diagonalizes in spherical harmonics
of degree l; L = l(l+n-2) is the Laplace-Beltrami eigenvalue on the unit
sphere.

Poloidal modes (l >= 1) use the radial velocity U(r) and pressure P(r):

    u = U Y nu + V grad_1 Y,      V = (r U' + (n-1) U)/L     (div u = 0)
    lam rho U = mu (U'' + (n+1)U'/r + (n-1-L)U/r^2) - P'
    P'' + (n-1)P'/r - L P/r^2 = 0
    lam rho kappa Th = d (Th'' + (n-1)Th'/r - L Th/r^2)

with interface conditions at r = R

    [[V]] = 0,  [[mu (V' - V/r + U/r)]] = 0,
    -[[2 mu U' - P]] + sigma a_l h = 0,
    -[[(2 mu U' - P)/rho]] + l_* Th = 0,
    U_k = lam h + j/rho_k  (k = 1, 2),
    -(l_*/theta_*) j - [[d Th']] = 0,   [[Th]] = 0,

and U = U' = 0, Th' = 0 at r = R_out.  Degree zero has U = 0, constant
pressures, and keeps the (Th, h, j) coupling.  Toroidal (n = 3) and swirl
(n = 2, l = 0) velocities decouple from h and Th.

Discretization: Chebyshev collocation on [R, R_out]; on the ball a
Chebyshev grid on [-R, R] with an even number of nodes (none at the
origin) folded by parity, so regularity at r = 0 is built in.  The
resulting pencil A x = lam B x is solved densely.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np
from scipy import linalg, optimize

from .errors import ConfigError, ConvergenceError, DegeneracyError, SolvabilityError
from .geometry import linearized_curvature_mode
from .thermo import MaterialParams, eval_phase, latent_heat


@dataclass(frozen=True)
class RadialGeometry:
    n: int = 3
    R: float = 1.0
    R_out: float = 2.0
    N: int = 24      # collocation nodes per subinterval

    def __post_init__(self):
        if self.n not in (2, 3):
            raise ConfigError("only n = 2 and n = 3 are supported")
        if not 0 < self.R < self.R_out:
            raise ConfigError("need 0 < R < R_out")
        if self.N < 6:
            raise ConfigError("need at least 6 nodes per subinterval")

    def refined(self, factor: int = 2) -> "RadialGeometry":
        return replace(self, N=self.N * factor)


@dataclass(frozen=True)
class LinearizationParams:
    rho1: float
    rho2: float
    mu1: float
    mu2: float
    kappa1: float
    kappa2: float
    d1: float
    d2: float
    sigma: float
    theta_star: float
    l_star: float

    def __post_init__(self):
        for name in ("rho1", "rho2", "mu1", "mu2", "kappa1", "kappa2", "d1", "d2",
                     "sigma", "theta_star"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive")
        if self.rho1 == self.rho2:
            raise ConfigError("densities must differ")

    @property
    def c_star(self) -> float:
        return self.l_star ** 2 / self.theta_star

    @property
    def jump_rho(self) -> float:
        return self.rho2 - self.rho1

    @property
    def jump_inv_rho(self) -> float:
        return 1 / self.rho2 - 1 / self.rho1

    def phase(self, k: int) -> tuple[float, float, float, float]:
        """(rho, mu, kappa, d) of phase k."""
        if k == 1:
            return self.rho1, self.mu1, self.kappa1, self.d1
        return self.rho2, self.mu2, self.kappa2, self.d2

    @classmethod
    def from_material(cls, mat: MaterialParams, theta_star: float) -> "LinearizationParams":
        s1 = eval_phase(theta_star, 1, mat)
        s2 = eval_phase(theta_star, 2, mat)
        return cls(mat.rho1, mat.rho2, s1.mu, s2.mu, s1.kappa, s2.kappa, s1.d, s2.d,
                   mat.sigma, theta_star, latent_heat(theta_star, mat))


# Chebyshev machinery

def cheb(K: int):
    """Chebyshev extrema x_k = cos(pi k/K) and the differentiation matrix."""
    k = np.arange(K + 1)
    x = np.cos(np.pi * k / K)
    c = np.where((k == 0) | (k == K), 2.0, 1.0) * (-1.0) ** k
    X = x[:, None] - x[None, :]
    D = np.outer(c, 1 / c) / (X + np.eye(K + 1))
    D -= np.diag(D.sum(axis=1))
    return x, D


def bary_matrix(K: int, xi: np.ndarray) -> np.ndarray:
    """Interpolation matrix from Chebyshev extrema (degree K) to points xi."""
    k = np.arange(K + 1)
    x = np.cos(np.pi * k / K)
    w = (-1.0) ** k
    w[0] *= 0.5
    w[-1] *= 0.5
    diff = xi[:, None] - x[None, :]
    exact = np.abs(diff) < 1e-15
    diff[exact] = 1.0
    M = w / diff
    M /= M.sum(axis=1, keepdims=True)
    rows = np.flatnonzero(exact.any(axis=1))
    for i in rows:
        M[i] = exact[i].astype(float)
    return M


class _Radial:
    """Collocation operators on the ball (parity folded) and the shell."""

    def __init__(self, geom: RadialGeometry, nq: int | None = None):
        N, R, Ro = geom.N, geom.R, geom.R_out
        self.N = N
        # ball: 2N extrema on [-R, R], keep the N positive ones
        Kb = 2 * N - 1
        xb, Db = cheb(Kb)
        self.Kb = Kb
        self.rb = R * xb[:N]
        self.mirror = Kb - np.arange(N)
        self._Db = Db / R
        self._Db2 = self._Db @ self._Db
        # shell
        Ks = N - 1
        xs, Ds = cheb(Ks)
        self.Ks = Ks
        self.rs = R + (Ro - R) * (1 - xs) / 2
        self.Ds = -2.0 / (Ro - R) * Ds
        self.Ds2 = self.Ds @ self.Ds
        # Gauss-Legendre quadrature on both pieces
        nq = nq or 2 * N + 8
        g, w = np.polynomial.legendre.leggauss(nq)
        self.qb = 0.5 * R * (g + 1)
        self.wb = 0.5 * R * w
        self.qs = R + 0.5 * (Ro - R) * (g + 1)
        self.ws = 0.5 * (Ro - R) * w
        self._Ib = bary_matrix(Kb, self.qb / R)
        self.Is = bary_matrix(Ks, 1 - 2 * (self.qs - R) / (Ro - R))

    def _fold(self, M, p, rows=True):
        N = self.N
        if rows:
            M = M[:N]
        return M[:, :N] + p * M[:, self.mirror]

    @lru_cache(maxsize=8)
    def Db(self, p: int):
        return self._fold(self._Db, p)

    @lru_cache(maxsize=8)
    def Db2(self, p: int):
        return self._fold(self._Db2, p)

    @lru_cache(maxsize=8)
    def Ib(self, p: int):
        return self._fold(self._Ib, p, rows=False)


@lru_cache(maxsize=32)
def _radial(geom: RadialGeometry) -> _Radial:
    return _Radial(geom)


class _Layout:
    """Named slices of the unknown vector."""

    def __init__(self, spec):
        self.slices = {}
        off = 0
        for name, size in spec:
            self.slices[name] = slice(off, off + size)
            off += size
        self.size = off

    def __getitem__(self, name):
        return self.slices[name]

    def idx(self, name, i=0):
        return self.slices[name].start + i


class _System:
    """Row-by-row builder for the pencil (A, B) with an optional right-hand side."""

    def __init__(self, layout: _Layout):
        self.lay = layout
        n = layout.size
        self.A = np.zeros((n, n), dtype=complex)
        self.B = np.zeros((n, n), dtype=complex)
        self.rhs = {}
        self.row = 0
        self.tags = {}

    def new(self, tag: str | None = None) -> int:
        r = self.row
        self.row += 1
        if tag:
            self.tags[tag] = r
        return r

    def done(self):
        if self.row != self.lay.size:
            raise RuntimeError(f"assembled {self.row} rows for {self.lay.size} unknowns")


def _lap_rows(D, D2, r, n, L):
    """Matrix of f'' + (n-1) f'/r - L f/r^2 on the nodes r."""
    return D2 + (n - 1) / r[:, None] * D - np.diag(L / r ** 2)


def _heat_rows(sys, lam_B: bool, rad: _Radial, geom, par, l, L):
    """Interior heat rows in both phases and the Neumann row at R_out."""
    n = geom.n
    p = (-1) ** l
    lay = sys.lay
    for k, (D, D2, r, name, rng) in enumerate((
            (rad.Db(p), rad.Db2(p), rad.rb, "T1", range(1, rad.N)),
            (rad.Ds, rad.Ds2, rad.rs, "T2", range(1, rad.N - 1))), start=1):
        rho, mu, kap, d = par.phase(k)
        op = d * _lap_rows(D, D2, r, n, L)
        for i in rng:
            row = sys.new()
            sys.A[row, lay[name]] = op[i]
            if lam_B:
                sys.B[row, lay.idx(name, i)] = rho * kap
    row = sys.new("neumann_out")
    sys.A[row, lay["T2"]] = rad.Ds[-1]


def _heat_interface(sys, rad, par, l):
    """[[Th]] = 0 row.  Returns the flux functional -[[d Th']] as a row vector."""
    lay = sys.lay
    p = (-1) ** l
    row = sys.new("theta_jump")
    sys.A[row, lay.idx("T2")] = 1.0
    sys.A[row, lay.idx("T1")] = -1.0
    flux = np.zeros(lay.size, dtype=complex)
    flux[lay["T2"]] = -par.d2 * rad.Ds[0]
    flux[lay["T1"]] = par.d1 * rad.Db(p)[0]
    return flux


def _stokes_rows(sys, lam_B: bool, rad: _Radial, geom, par, l, L):
    """Interior momentum/pressure rows and the no-slip rows at R_out (l >= 1)."""
    n = geom.n
    pu, pp = (-1) ** (l - 1), (-1) ** l
    lay = sys.lay
    blocks = (
        (rad.Db(pu), rad.Db2(pu), rad.Db(pp), rad.Db2(pp), rad.rb, "U1", "P1", range(1, rad.N), 1),
        (rad.Ds, rad.Ds2, rad.Ds, rad.Ds2, rad.rs, "U2", "P2", range(1, rad.N - 1), 2))
    for DU, DU2, DP, DP2, r, un, pn, rng, k in blocks:
        rho, mu, _, _ = par.phase(k)
        mom = mu * (DU2 + (n + 1) / r[:, None] * DU + np.diag((n - 1 - L) / r ** 2))
        lapP = _lap_rows(DP, DP2, r, n, L)
        for i in rng:
            row = sys.new()
            sys.A[row, lay[un]] = mom[i]
            sys.A[row, lay[pn]] = -DP[i]
            if lam_B:
                sys.B[row, lay.idx(un, i)] = rho
            row = sys.new()
            sys.A[row, lay[pn]] = lapP[i]
    row = sys.new("noslip_u")
    sys.A[row, lay.idx("U2", rad.N - 1)] = 1.0
    row = sys.new("noslip_du")
    sys.A[row, lay["U2"]] = rad.Ds[-1]


def _stokes_traces(sys, rad, geom, par, l, L):
    """Row functionals at r = R: U_k, V-jump, shear-jump, T_nn per phase."""
    n, R = geom.n, geom.R
    lay = sys.lay
    pu, pp = (-1) ** (l - 1), (-1) ** l
    size = lay.size
    out = {}
    for k, DU, DU2, DP, un, pn in ((1, rad.Db(pu), rad.Db2(pu), rad.Db(pp), "U1", "P1"),
                                   (2, rad.Ds, rad.Ds2, rad.Ds, "U2", "P2")):
        rho, mu, _, _ = par.phase(k)
        e0 = np.zeros(rad.N)
        e0[0] = 1.0
        U = np.zeros(size, dtype=complex)
        U[lay[un]] = e0
        V = np.zeros(size, dtype=complex)
        V[lay[un]] = (R * DU[0] + (n - 1) * e0) / L
        sh = np.zeros(size, dtype=complex)
        sh[lay[un]] = mu * (R * DU2[0] + (n - 1) * DU[0] + (L - n + 1) / R * e0) / L
        Tnn = np.zeros(size, dtype=complex)
        Tnn[lay[un]] = 2 * mu * DU[0]
        Tnn[lay[pn]] = -e0
        out[k] = {"U": U, "V": V, "shear": sh, "Tnn": Tnn}
    return out


def _normalize(A, B, b=None):
    s = np.maximum(np.abs(A).max(axis=1), np.abs(B).max(axis=1))
    s[s == 0] = 1.0
    A = A / s[:, None]
    B = B / s[:, None]
    if b is not None:
        return A, B, b / s[:, None]
    return A, B


# pencils

def _poloidal_pencil(l: int, geom: RadialGeometry, par: LinearizationParams):
    N = geom.N
    rad = _radial(geom)
    L = l * (l + geom.n - 2)
    lay = _Layout([("U1", N), ("P1", N), ("T1", N), ("U2", N), ("P2", N), ("T2", N),
                   ("h", 1), ("j", 1)])
    sys = _System(lay)
    _stokes_rows(sys, True, rad, geom, par, l, L)
    _heat_rows(sys, True, rad, geom, par, l, L)
    tr = _stokes_traces(sys, rad, geom, par, l, L)
    flux = _heat_interface(sys, rad, par, l)
    a_l = linearized_curvature_mode(l, geom.n, geom.R)
    ih, ij = lay.idx("h"), lay.idx("j")
    r = sys.new("V_jump")
    sys.A[r] = tr[2]["V"] - tr[1]["V"]
    r = sys.new("shear_jump")
    sys.A[r] = tr[2]["shear"] - tr[1]["shear"]
    r = sys.new("normal_stress")
    sys.A[r] = -(tr[2]["Tnn"] - tr[1]["Tnn"])
    sys.A[r, ih] += par.sigma * a_l
    r = sys.new("stress_over_rho")
    sys.A[r] = -(tr[2]["Tnn"] / par.rho2 - tr[1]["Tnn"] / par.rho1)
    sys.A[r, lay.idx("T1")] += par.l_star
    for k in (1, 2):
        r = sys.new(f"kinematic{k}")
        sys.A[r] = tr[k]["U"]
        sys.A[r, ij] -= 1.0 / par.phase(k)[0]
        sys.B[r, ih] = 1.0
    r = sys.new("heat_flux")
    sys.A[r] = flux
    sys.A[r, ij] -= par.l_star / par.theta_star
    sys.done()
    return sys, lay


def _degree_zero_pencil(geom: RadialGeometry, par: LinearizationParams):
    N = geom.N
    rad = _radial(geom)
    lay = _Layout([("P1", 1), ("T1", N), ("P2", 1), ("T2", N), ("h", 1), ("j", 1)])
    sys = _System(lay)
    _heat_rows(sys, True, rad, geom, par, 0, 0)
    flux = _heat_interface(sys, rad, par, 0)
    a0 = linearized_curvature_mode(0, geom.n, geom.R)
    ih, ij = lay.idx("h"), lay.idx("j")
    p1, p2 = lay.idx("P1"), lay.idx("P2")
    r = sys.new("normal_stress")          # -[[-P]] + sigma a_0 h
    sys.A[r, p2], sys.A[r, p1], sys.A[r, ih] = 1.0, -1.0, par.sigma * a0
    r = sys.new("stress_over_rho")        # [[P/rho]] + l_* Th
    sys.A[r, p2], sys.A[r, p1] = 1 / par.rho2, -1 / par.rho1
    sys.A[r, lay.idx("T1")] = par.l_star
    for k in (1, 2):                      # 0 = lam h + j/rho_k
        r = sys.new(f"kinematic{k}")
        sys.A[r, ij] = -1.0 / par.phase(k)[0]
        sys.B[r, ih] = 1.0
    r = sys.new("heat_flux")
    sys.A[r] = flux
    sys.A[r, ij] -= par.l_star / par.theta_star
    sys.done()
    return sys, lay


def _toroidal_pencil(l: int, geom: RadialGeometry, par: LinearizationParams):
    """Toroidal (n = 3, l >= 1) or swirl (n = 2, l = 0) velocity W(r)."""
    N, n = geom.N, geom.n
    rad = _radial(geom)
    if n == 3:
        K, p = l * (l + 1), (-1) ** l
    else:
        K, p = 1, -1
    lay = _Layout([("W1", N), ("W2", N)])
    sys = _System(lay)
    for k, D, D2, r, name, rng in ((1, rad.Db(p), rad.Db2(p), rad.rb, "W1", range(1, N)),
                                   (2, rad.Ds, rad.Ds2, rad.rs, "W2", range(1, N - 1))):
        rho, mu, _, _ = par.phase(k)
        op = mu * _lap_rows(D, D2, r, n, K)
        for i in rng:
            row = sys.new()
            sys.A[row, lay[name]] = op[i]
            sys.B[row, lay.idx(name, i)] = rho
    row = sys.new("noslip")
    sys.A[row, lay.idx("W2", N - 1)] = 1.0
    row = sys.new("W_jump")
    sys.A[row, lay.idx("W2")] = 1.0
    sys.A[row, lay.idx("W1")] = -1.0
    row = sys.new("shear_jump")
    R = geom.R
    e0 = np.zeros(N)
    e0[0] = 1.0
    sys.A[row, lay["W2"]] = par.mu2 * (rad.Ds[0] - e0 / R)
    sys.A[row, lay["W1"]] -= par.mu1 * (rad.Db(p)[0] - e0 / R)
    sys.done()
    return sys, lay


def mode_pencil(l: int, geom: RadialGeometry, par: LinearizationParams, kind: str = "poloidal"):
    """Normalized pencil (A, B) and unknown layout for degree l."""
    if kind == "poloidal":
        sys, lay = _poloidal_pencil(l, geom, par) if l >= 1 else _degree_zero_pencil(geom, par)
    elif kind == "toroidal":
        if not has_toroidal(l, geom.n):
            raise ConfigError(f"no toroidal block for n={geom.n}, l={l}")
        sys, lay = _toroidal_pencil(l, geom, par)
    else:
        raise ConfigError(f"unknown block {kind!r}")
    A, B = _normalize(sys.A, sys.B)
    return A, B, lay


def has_toroidal(l: int, n: int) -> bool:
    return (n == 3 and l >= 1) or (n == 2 and l == 0)


def harmonic_multiplicity(l: int, n: int) -> int:
    if n == 2:
        return 1 if l == 0 else 2
    return 2 * l + 1


# boundary operators

def heat_ntd(lam: complex, l: int, geom: RadialGeometry, par: LinearizationParams,
             return_solution: bool = False, continued: bool = False):
    """Th(R) for the heat transmission problem with -[[d Th']] = 1.

    `continued=True` evaluates the analytic continuation to Re lam < 0
    (valid away from the Neumann heat spectrum).
    """
    if l == 0 and lam == 0:
        raise SolvabilityError("l = 0, lambda = 0: data must have zero mean")
    if np.real(lam) < 0 and not continued:
        raise ConfigError("heat_ntd expects Re lambda >= 0")
    N = geom.N
    rad = _radial(geom)
    L = l * (l + geom.n - 2)
    lay = _Layout([("T1", N), ("T2", N)])
    sys = _System(lay)
    _heat_rows(sys, True, rad, geom, par, l, L)
    flux = _heat_interface(sys, rad, par, l)
    r = sys.new("flux")
    sys.A[r] = flux
    sys.done()
    b = np.zeros(lay.size, dtype=complex)
    b[r] = 1.0
    M = sys.A - lam * sys.B
    x = _solve(M, b)
    val = complex(x[lay.idx("T1")])
    if return_solution:
        return val, x, lay
    return val


def _solve(M, b):
    s = np.abs(M).max(axis=1)
    s[s == 0] = 1.0
    M = M / s[:, None]
    b = b / s if b.ndim == 1 else b / s[:, None]
    try:
        lu = linalg.lu_factor(M, check_finite=True)
    except linalg.LinAlgError as exc:  # pragma: no cover
        raise ConvergenceError(str(exc)) from exc
    if np.any(np.abs(np.diag(lu[0])) < 1e-14 * np.abs(np.diag(lu[0])).max()):
        raise ConvergenceError("collocation matrix is numerically singular")
    return linalg.lu_solve(lu, b)


def heat_energy(lam, l, geom, par, x, lay):
    """(lam*int rho kappa |Th|^2 + int d(|Th'|^2 + L|Th|^2/r^2)) with r^(n-1) weights."""
    rad = _radial(geom)
    n = geom.n
    L = l * (l + n - 2)
    p = (-1) ** l
    Et, Eg = 0.0, 0.0
    for k, I, D, Dq, r, w, name in ((1, rad.Ib(p), rad.Db(p), rad.Ib(-p), rad.qb, rad.wb, "T1"),
                                    (2, rad.Is, rad.Ds, rad.Is, rad.qs, rad.ws, "T2")):
        rho, mu, kap, d = par.phase(k)
        T = I @ x[lay[name]]
        dT = Dq @ (D @ x[lay[name]])
        wr = w * r ** (n - 1)
        Et += rho * kap * np.sum(wr * np.abs(T) ** 2)
        Eg += d * np.sum(wr * (np.abs(dT) ** 2 + L * np.abs(T) ** 2 / r ** 2))
    return float(Et), float(Eg)


def stokes_operator(lam: complex, l: int, geom: RadialGeometry, par: LinearizationParams) -> dict:
    """2x2 mode matrix of S_lambda and the scalar N^S_lambda for degree l.

    Data g1 = -[[T_nn]], g2 = -[[T_nn/rho]]; outputs k = [[rho U]]/[[rho]]
    and j = [[U]]/[[1/rho]].  N^S maps -[[T_nn]] to U(R) when [[U]] = 0.
    Degree zero carries no radial velocity (a bounded divergence-free radial
    field vanishing at R_out is zero), so all outputs vanish there.
    """
    if l == 0:
        z = np.zeros((2, 2), dtype=complex)
        return {"S": z, "N_S": 0j, "mean_zero_violation": True}
    N = geom.N
    rad = _radial(geom)
    L = l * (l + geom.n - 2)
    lay = _Layout([("U1", N), ("P1", N), ("U2", N), ("P2", N)])

    def build(last_rows):
        sys = _System(lay)
        _stokes_rows(sys, True, rad, geom, par, l, L)
        tr = _stokes_traces(sys, rad, geom, par, l, L)
        r = sys.new()
        sys.A[r] = tr[2]["V"] - tr[1]["V"]
        r = sys.new()
        sys.A[r] = tr[2]["shear"] - tr[1]["shear"]
        rows = []
        for f in last_rows(tr):
            r = sys.new()
            sys.A[r] = f
            rows.append(r)
        sys.done()
        return sys, tr, rows

    sys, tr, rows = build(lambda tr: [-(tr[2]["Tnn"] - tr[1]["Tnn"]),
                                      -(tr[2]["Tnn"] / par.rho2 - tr[1]["Tnn"] / par.rho1)])
    b = np.zeros((lay.size, 2), dtype=complex)
    b[rows[0], 0] = 1.0
    b[rows[1], 1] = 1.0
    X = _solve(sys.A - lam * sys.B, b)
    U1 = tr[1]["U"] @ X
    U2 = tr[2]["U"] @ X
    k_out = (par.rho2 * U2 - par.rho1 * U1) / par.jump_rho
    j_out = (U2 - U1) / par.jump_inv_rho
    S = np.vstack([k_out, j_out])
    sysn, trn, rowsn = build(lambda tr: [-(tr[2]["Tnn"] - tr[1]["Tnn"]), tr[2]["U"] - tr[1]["U"]])
    bn = np.zeros(lay.size, dtype=complex)
    bn[rowsn[0]] = 1.0
    xn = _solve(sysn.A - lam * sysn.B, bn)
    return {"S": S, "N_S": complex(trn[1]["U"] @ xn), "mean_zero_violation": False}


def stokes_mode_solve(lam, l, geom, par, interface_data=(1.0, 0.0)) -> dict:
    """Mode response (k, j) to data (g1, g2) together with the operator entries."""
    op = stokes_operator(lam, l, geom, par)
    S = op["S"]
    g = np.asarray(interface_data, dtype=complex)
    k, j = S @ g
    return {"k": complex(k), "j": complex(j), "N_S": op["N_S"],
            "flagged": bool(op["mean_zero_violation"] and np.any(g != 0)),
            "S11": complex(S[0, 0]), "S12": complex(S[0, 1]),
            "S21": complex(S[1, 0]), "S22": complex(S[1, 1])}


def transfer_t(lam, l, geom, par, continued: bool = False) -> complex:
    """Scalar mode value of T_lambda = [N^S + R*(c N^H + G)^(-1) R]^(-1)."""
    S = stokes_operator(lam, l, geom, par)["S"]
    c = par.c_star
    if c == 0:
        inv_t = S[0, 0] - S[0, 1] * S[1, 0] / S[1, 1]
    else:
        NH = heat_ntd(lam, l, geom, par, continued=continued)
        inv_t = S[0, 0] - c * S[0, 1] * S[1, 0] * NH / (1 + c * S[1, 1] * NH)
    if abs(inv_t) < 1e-300:
        raise DegeneracyError("T_lambda is singular")
    return complex(1 / inv_t)


def reduced_dispersion(lam, l: int, geom: RadialGeometry, par: LinearizationParams,
                       continued: bool = False) -> complex:
    """b(lam, l) = lam*T_lam + sigma*a_l; eigenvalues with h != 0 are its roots.

    `continued=True` allows Re lam < 0 through analytic continuation.
    """
    if l < 1:
        raise ConfigError("degree zero is excluded by the mean-zero restriction")
    a_l = linearized_curvature_mode(l, geom.n, geom.R)
    return lam * transfer_t(lam, l, geom, par, continued) + par.sigma * a_l


# eigenvalues

@dataclass
class ModeSpectrum:
    l: int
    block: str
    eigenvalues: np.ndarray
    kernel_dim: int = 0
    geometric_kernel_dim: int = 0
    semisimple: bool = True
    energy_residuals: np.ndarray = field(default_factory=lambda: np.zeros(0))
    unconverged: np.ndarray = field(default_factory=lambda: np.zeros(0))
    grid_change: float = 0.0


def _finite_eig(A, B, want_vectors=True):
    w, V = linalg.eig(A, B, right=True, homogeneous_eigvals=True)
    alpha, beta = w
    ok = np.abs(beta) > 1e-11 * np.abs(alpha)
    lam = alpha[ok] / beta[ok]
    ok2 = np.abs(lam) < 1e9
    return lam[ok2], V[:, ok][:, ok2]


def _energy_poloidal(l, lam, x, lay, geom, par):
    rad = _radial(geom)
    n = geom.n
    L = l * (l + n - 2)
    pu = (-1) ** (l - 1)
    Eu = ED = 0.0
    for k, I, Ip, D, D2, r, w, un in (
            (1, rad.Ib(pu), rad.Ib(-pu), rad.Db(pu), rad.Db2(pu), rad.qb, rad.wb, "U1"),
            (2, rad.Is, rad.Is, rad.Ds, rad.Ds2, rad.qs, rad.ws, "U2")):
        rho, mu, _, _ = par.phase(k)
        u = x[lay[un]]
        U = I @ u
        dU = Ip @ (D @ u)
        d2U = I @ (D2 @ u)
        V = (r * dU + (n - 1) * U) / L
        S = (r * d2U + (n - 1) * dU + (L - n + 1) * U / r) / L
        wr = w * r ** (n - 1)
        Eu += rho * np.sum(wr * (np.abs(U) ** 2 + L * np.abs(V) ** 2))
        tang = (np.abs(V) ** 2 * (L ** 2 - (n - 2) * L) - 2 * L * np.real(U * np.conj(V))
                + (n - 1) * np.abs(U) ** 2) / r ** 2
        ED += mu * np.sum(wr * (np.abs(dU) ** 2 + 0.5 * L * np.abs(S) ** 2 + tang))
    return float(Eu), float(ED)


def _energy_toroidal(l, x, lay, geom, par):
    rad = _radial(geom)
    n = geom.n
    p = (-1) ** l if n == 3 else -1
    Eu = ED = 0.0
    for k, I, Ip, D, r, w, name in ((1, rad.Ib(p), rad.Ib(-p), rad.Db(p), rad.qb, rad.wb, "W1"),
                                    (2, rad.Is, rad.Is, rad.Ds, rad.qs, rad.ws, "W2")):
        rho, mu, _, _ = par.phase(k)
        W = I @ x[lay[name]]
        dW = Ip @ (D @ x[lay[name]])
        wr = w * r ** (n - 1)
        if n == 3:
            L = l * (l + 1)
            Eu += rho * L * np.sum(wr * np.abs(W) ** 2)
            ED += mu * np.sum(wr * (0.5 * L * np.abs(dW - W / r) ** 2
                                    + 0.5 * L * (L - 2) * np.abs(W) ** 2 / r ** 2))
        else:
            Eu += rho * np.sum(wr * np.abs(W) ** 2)
            ED += mu * np.sum(wr * 0.5 * np.abs(dW - W / r) ** 2)
    return float(Eu), float(ED)


def energy_residual(l: int, block: str, lam: complex, x: np.ndarray, lay: _Layout,
                    geom: RadialGeometry, par: LinearizationParams) -> float:
    """Relative residual of the energy identity for one eigenpair.

    Re(lam)*E_u + 2*E_D + sigma*Re(lam)*a_l*|h|^2 R^(n-1)
        + theta_*(Re(lam)*E_th + E_grad_th) = 0.
    The scale is the sum of the absolute terms plus sigma*|h|^2 R^(n-3),
    so kernel vectors made of h alone are measured against a positive scale.
    """
    n, R = geom.n, geom.R
    re = float(np.real(lam))
    if block == "toroidal":
        Eu, ED = _energy_toroidal(l, x, lay, geom, par)
        terms = [re * Eu, 2 * ED]
        scale = (1 + abs(lam)) * Eu + 2 * ED
    else:
        if l >= 1:
            Eu, ED = _energy_poloidal(l, lam, x, lay, geom, par)
        else:
            Eu = ED = 0.0
        h = x[lay.idx("h")]
        Eh = linearized_curvature_mode(l, n, R) * abs(h) ** 2 * R ** (n - 1)
        Et, Eg = heat_energy(lam, l, geom, par, x, lay)
        terms = [re * Eu, 2 * ED, par.sigma * re * Eh,
                 par.theta_star * re * Et, par.theta_star * Eg]
        scale = ((1 + abs(lam)) * (Eu + par.sigma * abs(Eh) + par.theta_star * Et)
                 + 2 * ED + par.theta_star * Eg + par.sigma * abs(h) ** 2 * R ** (n - 3))
    if scale == 0:
        return 0.0
    return float(abs(sum(terms)) / scale)


def _kernel(A, B, tol=1e-7):
    """Geometric multiplicity of 0 and the semi-simplicity test W^H B N0."""
    U, s, Vh = linalg.svd(A)
    if s[0] == 0:
        return A.shape[0], False
    rel = s / s[0]
    null = rel < 1e-10
    dim = int(null.sum())
    ambiguous = bool(np.any((rel >= 1e-10) & (rel < 1e-7)))
    if dim == 0:
        return 0, True, ambiguous
    N0 = Vh[-dim:].conj().T
    W0 = U[:, -dim:]
    M = W0.conj().T @ B @ N0
    sv = linalg.svdvals(M)
    semisimple = bool(sv.min() > tol * max(1.0, np.abs(B).max()))
    return dim, semisimple, ambiguous


def _block_eigs(l, block, geom, par, delta):
    A, B, lay = mode_pencil(l, geom, par, block)
    lam, V = _finite_eig(A, B)
    sel = np.real(lam) >= -delta
    return lam[sel], V[:, sel], lay, A, B


def default_delta(geom: RadialGeometry, par: LinearizationParams) -> float:
    return 0.5 * par.sigma * (geom.n - 1) / geom.R ** 2


def full_mode_eigenvalues(l: int, geom: RadialGeometry, par: LinearizationParams,
                          delta: float | None = None, block: str = "poloidal",
                          grid_check: bool = True, grid_tol: float = 1e-7) -> ModeSpectrum:
    """Eigenvalues of the degree-l pencil with Re lam >= -delta.

    Eigenvalues are reported only when a computation with twice the nodes
    reproduces them within grid_tol*max(1, |lam|); the others are returned
    in `unconverged`.
    """
    if delta is None:
        delta = default_delta(geom, par)
    lam, V, lay, A, B = _block_eigs(l, block, geom, par, delta)
    keep = np.ones(lam.size, dtype=bool)
    change = 0.0
    if grid_check and lam.size:
        lam2, *_ = _block_eigs(l, block, geom.refined(2), par, 2 * delta + 1.0)
        for i, z in enumerate(lam):
            d = np.min(np.abs(lam2 - z)) if lam2.size else np.inf
            if d > grid_tol * max(1.0, abs(z)):
                keep[i] = False
            else:
                change = max(change, float(d))
    res = np.array([energy_residual(l, block, z, V[:, i], lay, geom, par)
                    for i, z in enumerate(lam) if keep[i]])
    order = np.argsort(-np.real(lam[keep]))
    zero = np.abs(lam[keep]) < 1e-7
    alg = int(zero.sum())
    geo_dim, semisimple, _ = _kernel(A, B)
    return ModeSpectrum(l=l, block=block, eigenvalues=lam[keep][order], kernel_dim=alg,
                        geometric_kernel_dim=geo_dim,
                        semisimple=bool(semisimple and geo_dim == alg),
                        energy_residuals=res[order] if res.size else res,
                        unconverged=lam[~keep], grid_change=change)


def flow_eigenvalues(l: int, geom: RadialGeometry, par: LinearizationParams,
                     delta: float | None = None) -> np.ndarray:
    """Eigenvalues whose eigenvectors live in the (u, h) components.

    Meaningful when l_* = 0: the pencil then splits into a flow block and a
    heat block, and the flow eigenvalues do not depend on kappa_*, d_*.
    """
    if delta is None:
        delta = default_delta(geom, par)
    lam, V, lay, A, B = _block_eigs(l, "poloidal", geom, par, delta)
    heat = np.concatenate([np.arange(lay[k].start, lay[k].stop) for k in ("T1", "T2")])
    flow = np.setdiff1d(np.arange(lay.size), heat)
    share = np.linalg.norm(V[flow], axis=0) / np.linalg.norm(V, axis=0)
    out = lam[share > 0.5]
    return out[np.lexsort((np.imag(out), np.real(out)))]


def decoupling_check(l: int, geom: RadialGeometry, par: LinearizationParams,
                     factor: float = 10.0, delta: float | None = None) -> float:
    """Largest change of the flow eigenvalues when kappa_*, d_* are scaled by factor."""
    if par.l_star != 0:
        raise ConfigError("decoupling holds only for l_* = 0")
    p2 = replace(par, kappa1=par.kappa1 * factor, kappa2=par.kappa2 * factor,
                 d1=par.d1 * factor, d2=par.d2 * factor)
    a = flow_eigenvalues(l, geom, par, delta)
    b = flow_eigenvalues(l, geom, p2, delta)
    if a.size != b.size:
        return float("inf")
    return float(np.max(np.abs(a - b), initial=0.0))


def heat_decay_exponent(l: int, geom: RadialGeometry, par: LinearizationParams,
                        lam_range=(1.0, 1e4), count: int = 9) -> float:
    """Least-squares slope of log|N^H_lam| against log lam."""
    lams = np.geomspace(*lam_range, count)
    vals = np.array([abs(heat_ntd(x, l, geom, par)) for x in lams])
    return float(np.polyfit(np.log(lams), np.log(vals), 1)[0])


def mode_blocks(l: int, n: int) -> list:
    blocks = ["poloidal"]
    if has_toroidal(l, n):
        blocks.append("toroidal")
    return blocks


def kernel_analysis(geom: RadialGeometry, par: LinearizationParams, m: int = 1) -> dict:
    """Dimension of the kernel (degrees 0 and 1) and semi-simplicity of 0.

    For m = 1 the concentric pencils are used.  For m >= 2 balls in the
    non-interacting block model every ball contributes its degree-one
    kernel while degree zero keeps the two global directions.
    """
    total0, ss, ambiguous = 0, True, False
    for block in mode_blocks(0, geom.n):
        A, B, _ = mode_pencil(0, geom, par, block)
        d, s, a = _kernel(A, B)
        total0 += d
        ss &= s
        ambiguous |= a
    per1 = 0
    for block in mode_blocks(1, geom.n):
        A, B, _ = mode_pencil(1, geom, par, block)
        d, s, a = _kernel(A, B)
        per1 += d
        ss &= s
        ambiguous |= a
    dim = total0 + harmonic_multiplicity(1, geom.n) * per1 * m
    return {"dim": int(dim), "semisimple": bool(ss), "inconclusive": bool(ambiguous),
            "degree0": int(total0), "degree1_per_harmonic": int(per1)}


def spectrum_report(geom: RadialGeometry, par: LinearizationParams, L_max: int = 8,
                    delta: float | None = None) -> dict:
    """Aggregate the mode spectra for l = 0..L_max (single ball)."""
    per_l, all_res, unconverged, changes = [], [], [], []
    zero_mult, unstable = 0, []
    semisimple = True
    for l in range(L_max + 1):
        entry = {"l": l}
        for block in mode_blocks(l, geom.n):
            ms = full_mode_eigenvalues(l, geom, par, delta, block)
            mult = harmonic_multiplicity(l, geom.n)
            zero_mult += mult * ms.kernel_dim
            semisimple &= ms.semisimple
            all_res.extend(ms.energy_residuals.tolist())
            changes.append(ms.grid_change)
            unconverged.extend(ms.unconverged.tolist())
            nz = ms.eigenvalues[np.abs(ms.eigenvalues) >= 1e-7]
            unstable.extend(nz[np.real(nz) >= 1e-8].tolist())
            entry[block] = ms.eigenvalues
        per_l.append(entry)
    return {"per_l": per_l, "zero_multiplicity": int(zero_mult), "semisimple": bool(semisimple),
            "unstable": unstable, "energy_residual_max": float(max(all_res) if all_res else 0.0),
            "grid_change_max": float(max(changes) if changes else 0.0),
            "unconverged": unconverged}


# disconnected interface: non-interacting block model

def _block_radius(geom: RadialGeometry, m: int) -> float:
    """Outer radius of the equal-volume cell around each of m balls."""
    return geom.R_out * m ** (-1.0 / geom.n)


def block_heat_ntd(lam, geom: RadialGeometry, par: LinearizationParams, R_b: float) -> complex:
    """Degree-zero heat NtD value of one ball with Th = 0 on r = R_b."""
    g = replace(geom, R_out=R_b)
    N = g.N
    rad = _radial(g)
    lay = _Layout([("T1", N), ("T2", N)])
    sys = _System(lay)
    _heat_rows(sys, True, rad, g, par, 0, 0)
    # replace the Neumann row with a Dirichlet one
    r_out = sys.tags["neumann_out"]
    sys.A[r_out] = 0
    sys.A[r_out, lay.idx("T2", N - 1)] = 1.0
    flux = _heat_interface(sys, rad, par, 0)
    r = sys.new()
    sys.A[r] = flux
    sys.done()
    b = np.zeros(lay.size, dtype=complex)
    b[r] = 1.0
    x = _solve(sys.A - lam * sys.B, b)
    return complex(x[lay.idx("T1")])


def block_stokes_matrix(lam, geom: RadialGeometry, par: LinearizationParams, R_b: float):
    """Closed-form 2x2 S for the ball-constant mode with a traction-free reservoir at R_b.

    Inside the ball the velocity vanishes; outside it is the potential flow
    U = C r^(1-n).  With tau = T_nn^(2)(R)/U_2(R):
        S = 1/(tau [[rho]]^2) * [[-rho2^2, rho1 rho2^2], [rho1 rho2^2, -rho1^2 rho2^2]].
    """
    n, R = geom.n, geom.R
    if n == 3:
        phi = -R * (1 - R / R_b)
    else:
        phi = -R * np.log(R_b / R)
    tau = -2 * par.mu2 * (n - 1) * (1 / R - R ** (n - 1) / R_b ** n) + lam * par.rho2 * phi
    r1, r2 = par.rho1, par.rho2
    f = 1.0 / (tau * par.jump_rho ** 2)
    return f * np.array([[-r2 ** 2, r1 * r2 ** 2], [r1 * r2 ** 2, -r1 ** 2 * r2 ** 2]])


def block_transfer_t(lam, geom, par, R_b) -> complex:
    S = block_stokes_matrix(lam, geom, par, R_b)
    c = par.c_star
    NH = block_heat_ntd(lam, geom, par, R_b) if c else 0.0
    return complex((1 + c * S[1, 1] * NH) / S[0, 0])


def multi_ball_block_spectrum(m: int, geom: RadialGeometry, par: LinearizationParams,
                              R_b: float | None = None, lam_max: float = 1e6) -> dict:
    """Positive eigenvalues of the linearization for m equal, non-interacting balls.

    On mean-zero ball-constant heights B_lam = lam*T_lam - sigma(n-1)/R^2 acts
    as a multiple of the identity, so its m-1 eigenvalue curves coincide;
    each sign change gives one positive eigenvalue per curve.
    """
    if m < 1:
        raise ConfigError("m must be at least 1")
    if R_b is None:
        R_b = _block_radius(geom, m)
    if R_b <= geom.R:
        raise ConfigError("block radius must exceed the ball radius")
    a0 = linearized_curvature_mode(0, geom.n, geom.R)

    def mu(lam):
        return float(np.real(lam * block_transfer_t(lam, geom, par, R_b) + par.sigma * a0))

    grid = np.concatenate([[0.0], np.geomspace(1e-8, lam_max, 400)])
    vals = np.array([mu(x) for x in grid])
    crossings = []
    for a, b, fa, fb in zip(grid[:-1], grid[1:], vals[:-1], vals[1:]):
        if fa < 0 <= fb or fa >= 0 > fb:
            crossings.append(float(optimize.brentq(mu, a, b, xtol=1e-14, rtol=1e-13)))
    if m == 1:
        count = 0
    else:
        count = (m - 1) * sum(1 for _ in crossings)
    return {"positive_eigenvalue_count": int(count), "crossing_locations": crossings,
            "mu_at_zero": float(vals[0]), "R_b": float(R_b), "m": m}


def dispersion_curves(geom, par, ls, lams) -> list:
    """Rows (l, lam, Re b, Im b) of the reduced dispersion function."""
    rows = []
    for l in ls:
        for lam in lams:
            b = reduced_dispersion(lam, l, geom, par)
            rows.append((l, float(lam), float(np.real(b)), float(np.imag(b))))
    return rows
