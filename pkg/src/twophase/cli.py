"""Command-line driver.

Configuration is read from the shipped defaults.toml, optionally merged with
a user TOML file (--config) and then with dotted overrides such as
``--geometry.N 48``.  Unknown sections or keys are errors.

Exit codes: 0 success, 1 usage/config error, 2 certification failure or
instability, 3 inconclusive / non-converged.
"""
from __future__ import annotations

import argparse
import copy
import csv
import datetime
import json
import sys
from importlib import resources

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import __version__
from . import equilibria as eq
from . import flat_symbols as fs
from . import sphere_spectral as ss
from . import zerocert as zc
from .errors import (ConfigError, ConvergenceError, DegeneracyError, InfeasibleError,
                     NoEquilibriumError, TwoPhaseError, ZeroOnContourError)
from .thermo import MaterialParams, make_law

EXIT_OK, EXIT_CONFIG, EXIT_FAIL, EXIT_INCONCLUSIVE = 0, 1, 2, 3
SCHEMA = 1

SCAN_COLUMNS = ["re_z", "im_z", "re_omega1", "im_omega1", "re_omega2", "im_omega2",
                "re_psi", "im_psi", "re_ell", "im_ell", "re_p1", "im_p1", "re_p2", "im_p2",
                "re_q1", "im_q1", "re_q2", "im_q2", "re_r", "im_r",
                "re_r1r2", "im_r1r2", "residual"]
DISPERSION_COLUMNS = ["l", "lambda", "re_b", "im_b"]


# configuration

def load_defaults() -> dict:
    text = resources.files("twophase").joinpath("defaults.toml").read_text()
    return tomllib.loads(text)


def merge_config(base: dict, extra: dict, origin: str = "config") -> dict:
    out = copy.deepcopy(base)
    for section, values in extra.items():
        if section not in out:
            raise ConfigError(f"{origin}: unknown section [{section}]")
        if not isinstance(values, dict):
            raise ConfigError(f"{origin}: [{section}] must be a table")
        for key, val in values.items():
            if key not in out[section]:
                raise ConfigError(f"{origin}: unknown key {section}.{key}")
            out[section][key] = _coerce(val, out[section][key], f"{section}.{key}")
    return out


def _coerce(value, default, name):
    """Convert value to the type of default (strings are parsed)."""
    if isinstance(value, str) and not isinstance(default, str):
        try:
            value = json.loads(value.replace("'", '"')) if value not in ("true", "false") \
                else value == "true"
        except json.JSONDecodeError:
            raise ConfigError(f"{name}: cannot parse {value!r}") from None
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise ConfigError(f"{name}: expected true/false")
        return value
    if isinstance(default, int):
        if isinstance(value, bool) or not float(value).is_integer():
            raise ConfigError(f"{name}: expected an integer")
        return int(value)
    if isinstance(default, float):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{name}: expected a number")
        return float(value)
    if isinstance(default, list):
        if not isinstance(value, list):
            raise ConfigError(f"{name}: expected a list")
        return [float(v) for v in value]
    if isinstance(default, str):
        return str(value)
    return value


def parse_overrides(tokens: list) -> dict:
    """['--a.b', 'v', ...] -> {'a': {'b': 'v'}}."""
    out: dict = {}
    it = iter(tokens)
    for tok in it:
        if not tok.startswith("--") or "." not in tok:
            raise ConfigError(f"unrecognized argument {tok!r}")
        key = tok[2:]
        if "=" in key:
            key, val = key.split("=", 1)
        else:
            try:
                val = next(it)
            except StopIteration:
                raise ConfigError(f"missing value for {tok}") from None
        section, _, name = key.partition(".")
        out.setdefault(section, {})[name] = val
    return out


def resolve_config(path: str | None, overrides: list) -> dict:
    cfg = load_defaults()
    if path:
        try:
            with open(path, "rb") as fh:
                user = tomllib.load(fh)
        except (OSError, tomllib.TOMLDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        cfg = merge_config(cfg, user, path)
    return merge_config(cfg, parse_overrides(overrides), "command line")


def material_from(cfg: dict) -> MaterialParams:
    m = cfg["material"]
    return MaterialParams(rho1=m["rho1"], rho2=m["rho2"], sigma=m["sigma"],
                          phase1=make_law(m["law1"], m["coeffs1"]),
                          phase2=make_law(m["law2"], m["coeffs2"]))


def geometry_from(cfg: dict) -> ss.RadialGeometry:
    g = cfg["geometry"]
    return ss.RadialGeometry(n=g["n"], R=g["R"], R_out=g["R_out"], N=g["N"])


def conserved_from(cfg: dict, mat: MaterialParams) -> eq.ConservedQuantities:
    g, c = cfg["geometry"], cfg["conserved"]
    n, m, R = g["n"], g["m"], g["R"]
    vol = c["volume"] or eq.ball_volume(n, g["R_out"])
    q = eq.ConservedQuantities(c0=1.0, E0=1.0, volume=vol, n=n, m=m)
    c0 = c["c0"] or eq.mass_of(R, q, mat)
    if c["E0"]:
        E0 = c["E0"]
    else:
        v1 = m * eq.ball_volume(n, R)
        E0 = (float(eq.bulk_energy(cfg["spectrum"]["theta_star"], v1, vol - v1, mat))
              + eq.surface_energy(n, m, R, mat.sigma))
    return eq.ConservedQuantities(c0=c0, E0=E0, volume=vol, n=n, m=m)


# output helpers

def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (complex, np.complexfloating)):
        return [float(np.real(x)), float(np.imag(x))]
    if isinstance(x, np.bool_):
        return bool(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.floating):
        return float(x)
    return x


def emit(command: str, cfg: dict, result: dict, summary: str) -> None:
    doc = {"schema": SCHEMA, "command": command, "config": cfg, "result": _jsonable(result),
           "metadata": {"version": __version__,
                        "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat()}}
    text = json.dumps(doc, indent=2, sort_keys=True)
    out = cfg["run"]["output"]
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    print(summary, file=sys.stderr)


def write_csv(path: str, header: list, rows) -> None:
    if not path:
        return
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(v)) if not isinstance(v, int) else v for v in row])


# subcommands

def cmd_equilibrium(cfg, args) -> int:
    mat = material_from(cfg)
    q = conserved_from(cfg, mat)
    conf = eq.solve_equilibrium(q, mat)
    res = {"R": conf.R, "theta_star": conf.theta_star, "R_out": conf.R_out,
           "centers": conf.centers, "manifold_dimension": conf.manifold_dimension,
           "c0": q.c0, "E0": q.E0, "volume": q.volume}
    emit("equilibrium", cfg, res, f"equilibrium: R = {conf.R:.6g}, theta = {conf.theta_star:.6g}")
    return EXIT_OK


def _symbol_params(cfg) -> fs.SymbolParams:
    return fs.SymbolParams.from_material(material_from(cfg), cfg["spectrum"]["theta_star"])


def cmd_symbols_scan(cfg, args) -> int:
    par = _symbol_params(cfg)
    s = cfg["symbol"]
    variant = s["variant"].upper()
    re = np.linspace(0.0, s["re_max"], s["count"])
    im = np.linspace(-s["im_max"], s["im_max"], s["count"])
    rows, worst = [], 0.0
    for x in re:
        for y in im:
            z = complex(x, y)
            sp = fs.symbol_point(z, par)
            try:
                psi, ell = fs.psi_and_ell(z, par)
            except DegeneracyError:
                psi, ell = np.nan, np.nan
            b = fs.symbols(variant, z, par, s["literal"])
            r12 = b.r1 * b.r2
            res = float(b.residual)
            worst = max(worst, res)
            vals = [z, sp.omega1, sp.omega2, psi, ell, b.p1, b.p2, b.q1, b.q2, b.r, r12]
            row = []
            for v in vals:
                row += [float(np.real(v)), float(np.imag(v))]
            rows.append(row + [res])
    write_csv(cfg["run"]["csv"], SCAN_COLUMNS, rows)
    emit("symbols scan", cfg, {"variant": variant, "points": len(rows),
                               "max_factorization_residual": worst,
                               "columns": SCAN_COLUMNS},
         f"symbols scan: {len(rows)} points, max residual {worst:.2e}")
    return EXIT_OK


def cmd_certify(cfg, args) -> int:
    par = _symbol_params(cfg)
    s = cfg["symbol"]
    region = zc.Region("half-plane", s["rmax"])
    cert = zc.certify_zero_free(s["variant"], region, par, s["literal"])
    emit("lopatinskii certify", cfg, cert.to_dict(), f"certificate: {cert.verdict}")
    if cert.verdict == "zero-free":
        return EXIT_OK
    return EXIT_FAIL if cert.verdict.startswith("zeros") else EXIT_INCONCLUSIVE


def cmd_spectrum(cfg, args) -> int:
    mat = material_from(cfg)
    geom = geometry_from(cfg)
    sp = cfg["spectrum"]
    par = ss.LinearizationParams.from_material(mat, sp["theta_star"])
    m = cfg["geometry"]["m"]
    delta = sp["delta"] or None
    kernel = ss.kernel_analysis(geom, par, m)
    res = {"m": m, "kernel_dim": kernel["dim"], "semisimple": kernel["semisimple"],
           "kernel_inconclusive": kernel["inconclusive"],
           "expected_kernel_dim": eq.manifold_dimension(m, geom.n)}
    if m == 1:
        rep = ss.spectrum_report(geom, par, cfg["geometry"]["L_max"], delta)
        per_l = []
        for entry in rep["per_l"]:
            per_l.append({k: (v if k == "l" else np.asarray(v)) for k, v in entry.items()})
        res.update({"per_l": per_l, "positive_count": len(rep["unstable"]),
                    "unconverged": rep["unconverged"],
                    "gates": {"grid_independent": rep["grid_change_max"] <= 1e-7
                              and not rep["unconverged"],
                              "grid_change_max": rep["grid_change_max"],
                              "energy_residual_max": rep["energy_residual_max"]}})
        unstable = bool(rep["unstable"])
        inconclusive = bool(rep["unconverged"]) or kernel["inconclusive"]
    else:
        blk = ss.multi_ball_block_spectrum(m, geom, par)
        res.update({"per_l": [], "positive_count": blk["positive_eigenvalue_count"],
                    "crossing_locations": blk["crossing_locations"], "block_radius": blk["R_b"],
                    "model": "non-interacting balls",
                    "gates": {"grid_independent": True, "energy_residual_max": 0.0}})
        unstable = False
        inconclusive = kernel["inconclusive"]
    lams = np.geomspace(sp["lam_min"], sp["lam_max"], sp["lam_count"])
    ls = range(1, cfg["geometry"]["L_max"] + 1)
    write_csv(cfg["run"]["csv"], DISPERSION_COLUMNS, ss.dispersion_curves(geom, par, ls, lams))
    emit("spectrum compute", cfg, res,
         f"spectrum: positive_count = {res['positive_count']}, kernel_dim = {res['kernel_dim']}")
    if unstable:
        return EXIT_FAIL
    return EXIT_INCONCLUSIVE if inconclusive else EXIT_OK


def cmd_entropy(cfg, args) -> int:
    mat = material_from(cfg)
    q = conserved_from(cfg, mat)
    conf = eq.solve_equilibrium(q, mat)
    r = cfg["run"]
    rep = eq.entropy_criticality_probe(conf, q, mat, r["probe_samples"], r["probe_step"], r["seed"])
    emit("entropy probe", cfg, rep, f"entropy probe: local max = {rep['is_local_max']}")
    return EXIT_OK


def cmd_selftest(cfg, args) -> int:
    from .acceptance import run_all
    results = run_all(echo=lambda s: print(s, file=sys.stderr))
    emit("selftest", cfg, {"checks": [{"number": r.number, "name": r.name, "passed": r.passed,
                                       "detail": r.detail} for r in results]},
         f"selftest: {sum(r.passed for r in results)}/{len(results)} passed")
    return EXIT_OK if all(r.passed for r in results) else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="twophase",
        description="Stability analysis of two-phase equilibria with phase transition.",
        epilog="Any config key can be overridden with --section.key VALUE.")
    p.add_argument("--config", help="TOML file merged over the shipped defaults")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("equilibrium", help="radius and temperature from conserved quantities")
    sym = sub.add_parser("symbols", help="flat boundary symbols")
    sym_sub = sym.add_subparsers(dest="action", required=True)
    sym_sub.add_parser("scan", help="evaluate symbols on a grid",
                       description="CSV columns (run.csv): " + ", ".join(SCAN_COLUMNS))
    lop = sub.add_parser("lopatinskii", help="zero-freeness certificates")
    lop_sub = lop.add_subparsers(dest="action", required=True)
    cert = lop_sub.add_parser("certify", help="winding certificate on a half-disk")
    cert.add_argument("--variant", choices=["s11", "s22"])
    cert.add_argument("--rmax", type=float)
    spec = sub.add_parser("spectrum", help="linearized spectrum")
    spec_sub = spec.add_subparsers(dest="action", required=True)
    comp = spec_sub.add_parser("compute", help="per-mode eigenvalues or block-model count",
                               description="CSV columns (run.csv): "
                               + ", ".join(DISPERSION_COLUMNS))
    comp.add_argument("--m", type=int, help="number of balls")
    ent = sub.add_parser("entropy", help="entropy criticality")
    ent_sub = ent.add_subparsers(dest="action", required=True)
    ent_sub.add_parser("probe", help="probe the reduced entropy near the equilibrium")
    sub.add_parser("selftest", help="run the acceptance checks")
    return p


COMMANDS = {("equilibrium", None): cmd_equilibrium, ("symbols", "scan"): cmd_symbols_scan,
            ("lopatinskii", "certify"): cmd_certify, ("spectrum", "compute"): cmd_spectrum,
            ("entropy", "probe"): cmd_entropy, ("selftest", None): cmd_selftest}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args, rest = parser.parse_known_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    try:
        cfg = resolve_config(args.config, rest)
        if getattr(args, "variant", None):
            cfg["symbol"]["variant"] = args.variant
        if getattr(args, "rmax", None):
            cfg["symbol"]["rmax"] = float(args.rmax)
        if getattr(args, "m", None):
            cfg["geometry"]["m"] = int(args.m)
        return COMMANDS[(args.command, getattr(args, "action", None))](cfg, args)
    except (ConfigError, InfeasibleError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NoEquilibriumError as exc:
        print(f"no equilibrium: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except (ConvergenceError, ZeroOnContourError, DegeneracyError) as exc:
        print(f"inconclusive: {exc}", file=sys.stderr)
        return EXIT_INCONCLUSIVE
    except TwoPhaseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INCONCLUSIVE


if __name__ == "__main__":
    sys.exit(main())
