"""Acceptance checks shared by the test-suite and the `selftest` subcommand.

Each check returns a CheckResult with a pass flag and a short detail line.
Tolerances are fixed here and are not configurable.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import equilibria as eq
from . import flat_symbols as fs
from . import geometry as geo
from . import sphere_spectral as ss
from . import zerocert as zc
from .thermo import MaterialParams, log_law


@dataclass
class CheckResult:
    number: int
    name: str
    passed: bool
    detail: str
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        self.passed = bool(self.passed)

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"[{tag}] {self.number:2d} {self.name}: {self.detail}"


def draw_symbol_params(rng, count: int = 10) -> list:
    out = []
    while len(out) < count:
        r1, r2, m1, m2 = rng.uniform(0.5, 3.0, 4)
        if abs(r1 - r2) > 0.1:
            out.append(fs.SymbolParams(r1, r2, m1, m2))
    return out


def right_half_plane(rng, count: int, rmax: float = 1e3) -> np.ndarray:
    r = np.exp(rng.uniform(np.log(1e-3), np.log(rmax), count))
    a = rng.uniform(-np.pi / 2, np.pi / 2, count)
    return r * np.exp(1j * a)


def default_params(l_star: float = 0.5) -> ss.LinearizationParams:
    return ss.LinearizationParams(rho1=1.0, rho2=2.0, mu1=1.0, mu2=2.0, kappa1=1.0,
                                  kappa2=1.0, d1=1.0, d2=1.0, sigma=1.0,
                                  theta_star=1.0, l_star=l_star)


def check_symbol_limits(seed: int = 0) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst0, worstinf, bad = 0.0, 0.0, set()
    worst_derived = 0.0
    for par in draw_symbol_params(rng):
        for v in ("S11", "S22"):
            lim = fs.stated_limits(v, par)
            der = fs.derived_limits(v, par)
            b0 = fs.symbols(v, 0.0, par)
            binf = fs.symbols(v, 1e8, par)
            for key, got in (("p0", (b0.p1, b0.p2)), ("q0", (b0.q1, b0.q2))):
                e = max(abs(got[i] - lim[key][i]) for i in range(2))
                worst0 = max(worst0, e)
                if e > 1e-12:
                    bad.add(f"{v}.{key}")
            for key, got in (("pinf", (binf.p1, binf.p2)), ("qinf", (binf.q1, binf.q2))):
                e = max(abs(got[i] - lim[key][i]) / abs(lim[key][i]) for i in range(2))
                ed = max(abs(got[i] - der[key][i]) / abs(der[key][i]) for i in range(2))
                worstinf = max(worstinf, e)
                worst_derived = max(worst_derived, ed)
                if e > 1e-3:
                    bad.add(f"{v}.{key}")
    ok = worst0 <= 1e-12 and worstinf <= 1e-3
    detail = (f"max abs err at 0 = {worst0:.1e}, max rel err at 1e8 = {worstinf:.1e}"
              + (f"; mismatching: {sorted(bad)}" if bad else "")
              + f"; vs limits of the formulas themselves {worst_derived:.1e}")
    return CheckResult(1, "symbol limits", ok, detail,
                       {"failing": sorted(bad), "derived_rel_err": worst_derived})


def check_factorization(seed: int = 1) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst, worst_literal = 0.0, 0.0
    for par in draw_symbol_params(rng):
        z = right_half_plane(rng, 200)
        for v in ("S11", "S22"):
            worst = max(worst, float(np.max(fs.symbols(v, z, par).residual)))
            worst_literal = max(worst_literal,
                                float(np.max(fs.symbols(v, z, par, literal=True).residual)))
    return CheckResult(2, "factorization", worst <= 1e-9,
                       f"max residual {worst:.1e} (as-printed formulas: {worst_literal:.1e})",
                       {"literal_residual": worst_literal})


def check_zero_free(seed: int = 2) -> CheckResult:
    rng = np.random.default_rng(seed)
    windings, planted = [], []
    for par in draw_symbol_params(rng):
        for v in ("S11", "S22"):
            for cert in zc.certify_nested(v, par):
                windings.append((cert.winding, cert.verdict))
            c0 = zc.certify_zero_free(v, zc.Region("half-plane", 1e1), par)
            c1 = zc.certify_zero_free(v, zc.Region("half-plane", 1e1), par,
                                      planted_zero=complex(*rng.uniform(0.5, 5, 2)))
            planted.append(c1.winding - c0.winding)
    ok = all(w == 0 and vd == "zero-free" for w, vd in windings) and all(p == 1 for p in planted)
    return CheckResult(3, "zero-free certificates", ok,
                       f"{len(windings)} certificates, windings {sorted({w for w, _ in windings})}, "
                       f"planted increments {sorted(set(planted))}")


def check_psi_ell(seed: int = 3) -> CheckResult:
    rng = np.random.default_rng(seed)
    e_psi0 = e_ell0 = e_inf = 0.0
    min_re = np.inf
    for par in draw_symbol_params(rng):
        psi0, ell0 = fs.psi_and_ell(0.0, par)
        e_psi0 = max(e_psi0, abs(psi0 - 2 * (par.mu1 + par.mu2)))
        e_ell0 = max(e_ell0, abs(ell0))
        psi, _ = fs.psi_and_ell(right_half_plane(rng, 500), par)
        min_re = min(min_re, float(np.min(psi.real)))
        target = fs.ell_infinity_limit(par)
        for arg in (0.0, np.pi / 4, -np.pi / 3):
            z = 1e8 * np.exp(1j * arg)
            e_inf = max(e_inf, abs(z * fs.psi_and_ell(z, par)[1] - target) / abs(target))
    ok = e_psi0 <= 1e-12 and e_ell0 <= 1e-12 and min_re > 0 and e_inf <= 1e-3
    return CheckResult(4, "psi/ell", ok,
                       f"|psi(0)-2(mu1+mu2)| = {e_psi0:.1e}, |ell(0)| = {e_ell0:.1e}, "
                       f"min Re psi = {min_re:.2e}, rel err z*ell(z) = {e_inf:.1e}")


def heat_l0_closed_form(lam: float, geom: ss.RadialGeometry, par: ss.LinearizationParams) -> float:
    """Th(R) for n = 3, l = 0 from sinh(q1 r)/r and exp(+-q2 r)/r."""
    R, Ro = geom.R, geom.R_out
    q1 = np.sqrt(par.rho1 * par.kappa1 * lam / par.d1)
    q2 = np.sqrt(par.rho2 * par.kappa2 * lam / par.d2)

    def f(r):
        return np.sinh(q1 * r) / r

    def df(r):
        return q1 * np.cosh(q1 * r) / r - np.sinh(q1 * r) / r ** 2

    def e(s, r):
        return np.exp(s * q2 * (r - R)) / r

    def de(s, r):
        return (s * q2 - 1 / r) * np.exp(s * q2 * (r - R)) / r

    M = np.array([[f(R), -e(1, R), -e(-1, R)],
                  [0.0, de(1, Ro), de(-1, Ro)],
                  [par.d1 * df(R), -par.d2 * de(1, R), -par.d2 * de(-1, R)]])
    a, _, _ = np.linalg.solve(M, [0.0, 0.0, 1.0])
    return float(a * f(R))


def check_heat_ntd() -> CheckResult:
    par = default_params()
    geom = ss.RadialGeometry(n=3, R=1.0, R_out=2.0, N=32)
    e_closed = 0.0
    for lam in (0.1, 1.0, 10.0, 100.0):
        ref = heat_l0_closed_form(lam, geom, par)
        e_closed = max(e_closed, abs(ss.heat_ntd(lam, 0, geom, par) - ref) / max(1, abs(ref)))
    e_quad = 0.0
    for n in (2, 3):
        g = ss.RadialGeometry(n=n, R=1.0, R_out=2.0, N=32)
        for lam in (0.5, 3.0 + 2.0j, 1j):
            for l in (0, 1, 3):
                val, x, lay = ss.heat_ntd(lam, l, g, par, return_solution=True)
                Et, Eg = ss.heat_energy(lam, l, g, par, x, lay)
                lhs = np.conj(val) * g.R ** (n - 1)
                e_quad = max(e_quad, abs(lhs - (lam * Et + Eg)) / (abs(lam) * Et + Eg))
    slope = max(ss.heat_decay_exponent(l, geom, par) for l in (0, 1, 2))
    ok = e_closed <= 1e-8 and e_quad <= 1e-8 and slope <= -0.05
    return CheckResult(5, "heat NtD", ok,
                       f"closed form err {e_closed:.1e}, quadratic identity err {e_quad:.1e}, "
                       f"decay slope {slope:.3f}")


def check_stokes_structure() -> CheckResult:
    par = default_params()
    e_sym = e_schur = e_const = 0.0
    min_eig = np.inf
    for n in (2, 3):
        geom = ss.RadialGeometry(n=n, R=1.0, R_out=2.0, N=32)
        for lam in (0.0, 1.0, 100.0):
            e_const = max(e_const, abs(ss.stokes_operator(lam, 0, geom, par)["N_S"]))
            for l in (1, 2, 3, 5):
                op = ss.stokes_operator(lam, l, geom, par)
                S = op["S"]
                scale = np.abs(S).max()
                e_sym = max(e_sym, abs(S[0, 1] - S[1, 0]) / scale)
                schur = S[0, 0] - S[0, 1] * S[1, 0] / S[1, 1]
                e_schur = max(e_schur, abs(op["N_S"] - schur) / scale)
                min_eig = min(min_eig, float(np.linalg.eigvalsh(0.5 * (S + S.conj().T)).min()))
    ok = e_sym <= 1e-8 and e_schur <= 1e-8 and e_const <= 1e-8
    return CheckResult(6, "Stokes operator structure", ok,
                       f"asymmetry {e_sym:.1e}, Schur err {e_schur:.1e}, |N^S e| = {e_const:.1e}, "
                       f"min eigenvalue of S {min_eig:.2e}")


def check_connected_spectrum(L_max: int = 6, N: int = 24) -> CheckResult:
    par = default_params()
    parts, ok = [], True
    for n in (2, 3):
        geom = ss.RadialGeometry(n=n, R=1.0, R_out=2.0, N=N)
        rep = ss.spectrum_report(geom, par, L_max)
        ker = ss.kernel_analysis(geom, par, 1)
        nonreal = [z for l in rep["per_l"] for b in ("poloidal", "toroidal") if b in l
                   for z in l[b] if np.real(z) >= 0 and abs(np.imag(z)) > 1e-8]
        this = (not rep["unstable"] and rep["zero_multiplicity"] == n + 2
                and ker["dim"] == n + 2 and rep["semisimple"] and ker["semisimple"]
                and not ker["inconclusive"] and rep["grid_change_max"] <= 1e-7
                and not rep["unconverged"] and rep["energy_residual_max"] <= 1e-6
                and not nonreal)
        ok &= this
        parts.append(f"n={n}: unstable {len(rep['unstable'])}, zero mult {rep['zero_multiplicity']}, "
                     f"semisimple {rep['semisimple'] and ker['semisimple']}, "
                     f"grid change {rep['grid_change_max']:.1e}, "
                     f"unconverged {len(rep['unconverged'])}, "
                     f"energy residual {rep['energy_residual_max']:.1e}")
    return CheckResult(7, "connected spectrum", ok, "; ".join(parts))


def check_block_model() -> CheckResult:
    par = default_params()
    counts = {}
    for n in (2, 3):
        geom = ss.RadialGeometry(n=n, R=1.0, R_out=3.0, N=24)
        for m in (2, 3, 5):
            counts[(n, m)] = ss.multi_ball_block_spectrum(m, geom, par)["positive_eigenvalue_count"]
    ok = all(c == m - 1 for (n, m), c in counts.items())
    return CheckResult(8, "block model count", ok,
                       ", ".join(f"n={n} m={m}: {c}" for (n, m), c in counts.items()))


def zero_latent_material() -> tuple[MaterialParams, float]:
    """Material whose latent heat vanishes at the returned temperature."""
    mat = MaterialParams(rho1=1.0, rho2=2.0, sigma=1.0,
                         phase1=log_law(c=1.0, s0=0.0, mu=1.0, d=1.0),
                         phase2=log_law(c=2.0, s0=0.0, mu=2.0, d=1.0))
    return mat, 1.0


def check_decoupling(delta: float = 10.0, N: int = 32) -> CheckResult:
    mat, theta = zero_latent_material()
    par = ss.LinearizationParams.from_material(mat, theta)
    worst = 0.0
    for n in (2, 3):
        geom = ss.RadialGeometry(n=n, R=1.0, R_out=2.0, N=N)
        for l in range(0, 5):
            worst = max(worst, ss.decoupling_check(l, geom, par, 10.0, delta))
    ok = par.l_star == 0 and worst <= 1e-9
    return CheckResult(9, "decoupling at zero latent heat", ok,
                       f"l_* = {par.l_star:g}, max flow eigenvalue change {worst:.1e}")


def check_equilibria() -> CheckResult:
    mat = MaterialParams(rho1=1.0, rho2=2.0, sigma=0.1,
                         phase1=log_law(c=1.0, e0=0.3), phase2=log_law(c=2.0, e0=0.1))
    e_rt, e_theta = 0.0, 0.0
    for n in (2, 3):
        for m in (1, 2, 3):
            vol = eq.ball_volume(n, 3.0)
            c0 = 1.9 * vol
            q = eq.ConservedQuantities(c0=c0, E0=5.0 * vol, volume=vol, n=n, m=m)
            R = eq.radius_from_mass(q, mat)
            e_rt = max(e_rt, abs(eq.mass_of(R, q, mat) - c0) / c0)
            R2 = eq.radius_from_mass(eq.ConservedQuantities(eq.mass_of(R, q, mat), q.E0, vol, n, m),
                                     mat)
            e_rt = max(e_rt, abs(R2 - R) / R)
            v1 = m * eq.ball_volume(n, R)
            v2 = vol - v1
            theta_ref = ((q.E0 - eq.surface_energy(n, m, R, mat.sigma) - 0.3 * v1 - 2 * 0.1 * v2)
                         / (v1 + 2 * 2.0 * v2))
            theta = eq.temperature_from_energy(q, R, mat)
            e_theta = max(e_theta, abs(theta - theta_ref) / theta_ref)
    probes = {}
    for m in (1, 2):
        vol = eq.ball_volume(3, 3.0)
        q = eq.ConservedQuantities(c0=1.9 * vol, E0=5.0 * vol, volume=vol, n=3, m=m)
        cfg = eq.solve_equilibrium(q, mat)
        probes[m] = eq.entropy_criticality_probe(cfg, q, mat)
    ok = (e_rt <= 1e-12 and e_theta <= 1e-10 and probes[1]["is_local_max"]
          and probes[2].get("transfer_increasing", False))
    return CheckResult(10, "equilibria", ok,
                       f"round trip err {e_rt:.1e}, temperature err {e_theta:.1e}, "
                       f"m=1 local max {probes[1]['is_local_max']}, "
                       f"m=2 transfer increasing {probes[2].get('transfer_increasing')}")


def check_geometry() -> CheckResult:
    e_flat, orders = 0.0, []
    for n in (2, 3):
        sph = geo.ReferenceSphere(n=n, R=1.3, L_max=24)
        H0 = geo.graph_curvature(geo.GraphPatch(sph, np.zeros(sph.npts)))
        e_flat = max(e_flat, float(np.max(np.abs(H0 + (n - 1) / sph.R))))
        l = 3
        Y = sph.harmonic(l, l)
        Y = Y / np.max(np.abs(Y))
        a_l = geo.linearized_curvature_mode(l, n, sph.R)
        eps = 1e-2 * 0.5 ** np.arange(5)
        errs = []
        for e in eps:
            H = geo.graph_curvature(geo.GraphPatch(sph, e * Y))
            errs.append(float(np.max(np.abs(H - H0 + e * a_l * Y))))
        orders.append(float(np.polyfit(np.log(eps), np.log(errs), 1)[0]))
    a1 = [geo.linearized_curvature_mode(1, n, 1.7) for n in (2, 3)]
    ok = e_flat <= 1e-10 and min(orders) >= 1.9 and all(a == 0 for a in a1)
    return CheckResult(11, "geometry", ok,
                       f"|H(0)+(n-1)/R| = {e_flat:.1e}, orders {[round(o, 3) for o in orders]}, "
                       f"a_1 = {a1}")


CHECKS = (check_symbol_limits, check_factorization, check_zero_free, check_psi_ell,
          check_heat_ntd, check_stokes_structure, check_connected_spectrum, check_block_model,
          check_decoupling, check_equilibria, check_geometry)


def run_all(echo=print) -> list:
    results = []
    for check in CHECKS:
        res = check()
        if echo:
            echo(res.line())
        results.append(res)
    return results
