"""Command-line front end.

Subcommands: orbit, density, qcc, spectrum, gauge, spin, selftest.  Each run
resolves its configuration (JSON file, then command-line overrides, then
defaults), writes the fully resolved config next to the outputs, and emits
deterministic CSV/JSON (and optional PPM) files: identical configs give
byte-identical outputs at any SPINORBIT_THREADS setting.

Exit codes: 0 success, 1 selftest failure, 2 configuration error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Optional

import numpy as np

from . import classical_orbits as co
from . import gauge_field as gf
from . import outputs
from . import qcc_analysis as qa
from . import quantum_waves as qw

__all__ = ["ConfigError", "RunConfig", "main"]


class ConfigError(ValueError):
    """Invalid configuration; reported on stderr with exit code 2."""


def parse_rational(text) -> Fraction:
    """Exact rational from 'p/s', integer, or decimal strings."""
    if isinstance(text, Fraction):
        return text
    try:
        return Fraction(str(text))
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"not a rational number: {text!r}") from exc


def parse_angle(text) -> float:
    """Angle in radians; accepts plain floats and 'Npi' / 'pi/N' forms."""
    if isinstance(text, (int, float)):
        return float(text)
    s = str(text).strip().lower().replace(" ", "")
    if "pi" in s:
        head, _, tail = s.partition("pi")
        factor = 1.0
        if head not in ("", "+", "-"):
            factor = float(Fraction(head))
        elif head == "-":
            factor = -1.0
        if tail:
            if not tail.startswith("/"):
                raise ConfigError(f"malformed angle {text!r}")
            factor /= float(Fraction(tail[1:]))
        return factor * math.pi
    try:
        return float(s)
    except ValueError as exc:
        raise ConfigError(f"not an angle: {text!r}") from exc


def parse_chi(value) -> qw.Spinor:
    if isinstance(value, qw.Spinor):
        return value
    if isinstance(value, (list, tuple)):
        if len(value) != 4:
            raise ConfigError("numeric chi needs 4 entries: re_up,im_up,re_down,im_down")
        a, b, c, d = (float(v) for v in value)
        try:
            return qw.Spinor.of(complex(a, b), complex(c, d))
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    name = str(value).strip().lower()
    if name in ("plus", "+", "up"):
        return qw.Spinor.plus()
    if name in ("minus", "-", "down"):
        return qw.Spinor.minus()
    if name in ("plusx", "+x"):
        return qw.Spinor.plus_x()
    if "," in name:
        return parse_chi([float(p) for p in name.split(",")])
    raise ConfigError(f"unknown spin state {value!r}; use plus, minus, plusx, or 4 numbers")


def parse_nu_range(text) -> list[int]:
    s = str(text).strip()
    if ".." in s:
        lo, _, hi = s.partition("..")
        try:
            lo_i, hi_i = int(lo), int(hi)
        except ValueError as exc:
            raise ConfigError(f"malformed nu range {text!r}") from exc
        if hi_i < lo_i:
            raise ConfigError(f"empty nu range {text!r}")
        return list(range(lo_i, hi_i + 1))
    try:
        return [int(p) for p in s.split(",")]
    except ValueError as exc:
        raise ConfigError(f"malformed nu range {text!r}") from exc


@dataclass
class RunConfig:
    """Fully explicit run parameters; every field has a JSON representation."""

    # model
    k: str = "1"
    gamma: str = "15"
    dimensionless_strength: float = 1.0
    q: Optional[float] = None
    beta: Optional[float] = None
    eta: Optional[float] = None
    spin_magnitude: float = 1.0
    phi0: float = 0.0
    chi: object = "plus"
    n: int = 30
    nu_min: Optional[int] = None
    include_unsafe_modes: bool = False
    unsafe_r_max: float = 50.0
    # grid
    r_min: Optional[float] = None
    r_max: Optional[float] = None
    n_r: int = 192
    n_phi: Optional[int] = None
    spacing: str = "log"
    # outputs
    formats: list = field(default_factory=lambda: ["csv", "json"])
    image_size: int = 512
    # command knobs
    samples_per_petal: int = 1024
    r_clip: Optional[float] = None
    nu_range: str = "1..5"
    span: str = "4pi"
    steps: int = 2048
    gauge_r: list = field(default_factory=lambda: [1.0])
    gauge_phi: list = field(default_factory=lambda: [0.0])
    fd_step: Optional[float] = None
    ode_tol: float = 1e-11
    scale_fit: bool = True
    max_order_num: int = 18
    max_sheets: int = 4

    def resolved(self) -> "RunConfig":
        """Defaults filled and the q = 2*beta*eta consistency enforced."""
        cfg = dataclasses.replace(self)
        if cfg.beta is not None and cfg.eta is not None:
            derived = 2.0 * cfg.beta * cfg.eta
            if cfg.q is not None and abs(cfg.q - derived) > 1e-12:
                raise ConfigError(
                    f"inconsistent couplings: q={cfg.q!r} but 2*beta*eta={derived!r}"
                )
            cfg.q = derived
        if cfg.q is None:
            cfg.q = 0.1
        if cfg.eta is None:
            cfg.eta = 1.0
        if cfg.beta is None:
            if cfg.eta == 0.0:
                raise ConfigError("eta must be nonzero to derive beta from q")
            cfg.beta = cfg.q / (2.0 * cfg.eta)
        if abs(cfg.q - 2.0 * cfg.beta * cfg.eta) > 1e-12:
            raise ConfigError("q must equal 2*beta*eta")
        # validate eagerly so bad configs die before any output is written
        k = parse_rational(cfg.k)
        if k == 0:
            raise ConfigError("k must be nonzero")
        if parse_rational(cfg.gamma) <= 0:
            raise ConfigError("gamma must be > 0")
        if cfg.dimensionless_strength <= 0:
            raise ConfigError("dimensionless_strength must be > 0")
        if cfg.spin_magnitude <= 0:
            raise ConfigError("spin_magnitude must be > 0")
        if cfg.n < 1:
            raise ConfigError("n must be >= 1")
        if cfg.spacing not in ("log", "linear"):
            raise ConfigError("spacing must be 'log' or 'linear'")
        bad = [f for f in cfg.formats if f not in ("csv", "json", "ppm")]
        if bad:
            raise ConfigError(f"unknown formats: {bad}")
        parse_chi(cfg.chi)
        return cfg

    def to_payload(self) -> dict:
        payload = dataclasses.asdict(self)
        payload["k"] = str(parse_rational(self.k))
        payload["gamma"] = str(parse_rational(self.gamma))
        return payload

    @staticmethod
    def from_payload(payload: dict) -> "RunConfig":
        known = {f.name for f in dataclasses.fields(RunConfig)}
        unknown = set(payload) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return RunConfig(**payload)

    # -- derived model objects ------------------------------------------------

    def potential(self) -> co.PotentialSpec:
        cfg = self.resolved()
        return co.PotentialSpec(
            k=parse_rational(cfg.k),
            dimensionless_strength=cfg.dimensionless_strength,
            q=cfg.q,
            spin_magnitude=cfg.spin_magnitude,
        )

    def orbit_spec(self) -> co.OrbitSpec:
        cfg = self.resolved()
        return co.OrbitSpec(
            potential=self.potential(),
            gamma=float(parse_rational(cfg.gamma)),
            phi0=cfg.phi0,
        )

    def field_params(self) -> gf.FieldParams:
        cfg = self.resolved()
        return gf.FieldParams(eta=cfg.eta, beta=cfg.beta)

    def state(self) -> qw.MacroscopicState:
        cfg = self.resolved()
        return qw.macroscopic_state(
            self.potential(),
            parse_chi(cfg.chi),
            cfg.n,
            nu_min=cfg.nu_min,
            include_unsafe_modes=cfg.include_unsafe_modes,
            unsafe_r_max=cfg.unsafe_r_max,
        )

    def grid(self, state: qw.MacroscopicState) -> qw.PolarGrid:
        cfg = self.resolved()
        base = qw.default_grid(state, n_r=cfg.n_r, n_phi=cfg.n_phi, phi0=cfg.phi0)
        return qw.PolarGrid(
            r_min=cfg.r_min if cfg.r_min is not None else base.r_min,
            r_max=cfg.r_max if cfg.r_max is not None else base.r_max,
            n_r=cfg.n_r,
            n_phi=base.n_phi,
            phi_min=base.phi_min,
            phi_max=base.phi_max,
            spacing=cfg.spacing,
        )


PRESET_HELP = ", ".join(sorted(co.ORBIT_PRESETS))


def _load_config(args) -> RunConfig:
    if getattr(args, "config", None):
        try:
            payload = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config!r}: {exc}") from exc
        cfg = RunConfig.from_payload(payload)
    else:
        cfg = RunConfig()
    preset = getattr(args, "preset", None)
    if preset:
        if preset not in co.ORBIT_PRESETS:
            raise ConfigError(f"unknown preset {preset!r}; choices: {PRESET_HELP}")
        k, gamma = co.ORBIT_PRESETS[preset]
        cfg.k = str(k)
        cfg.gamma = str(gamma)
    overrides = {
        "k": "k", "gamma": "gamma", "q": "q", "beta": "beta", "eta": "eta",
        "strength": "dimensionless_strength", "spin_magnitude": "spin_magnitude",
        "phi0": "phi0", "chi": "chi", "n": "n", "nu_min": "nu_min",
        "r_min": "r_min", "r_max": "r_max", "n_r": "n_r", "n_phi": "n_phi",
        "spacing": "spacing", "formats": "formats", "image_size": "image_size",
        "samples_per_petal": "samples_per_petal", "r_clip": "r_clip",
        "nu": "nu_range", "span": "span", "steps": "steps",
        "gauge_r": "gauge_r", "gauge_phi": "gauge_phi", "fd_step": "fd_step",
        "ode_tol": "ode_tol", "max_order_num": "max_order_num",
        "max_sheets": "max_sheets",
    }
    for arg_name, field_name in overrides.items():
        value = getattr(args, arg_name, None)
        if value is not None:
            setattr(cfg, field_name, value)
    if getattr(args, "unsafe_modes", False):
        cfg.include_unsafe_modes = True
    if getattr(args, "no_scale_fit", False):
        cfg.scale_fit = False
    if getattr(args, "phi0", None) is not None:
        cfg.phi0 = parse_angle(args.phi0)
    return cfg.resolved()


def _prepare_outdir(args, cfg: RunConfig) -> Path:
    out = Path(getattr(args, "out", ".") or ".")
    out.mkdir(parents=True, exist_ok=True)
    outputs.write_json(out / "resolved_config.json", cfg.to_payload())
    return out


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_orbit(args) -> int:
    cfg = _load_config(args)
    out = _prepare_outdir(args, cfg)
    spec = cfg.orbit_spec()
    pts = co.orbit_polyline(
        spec,
        samples_per_petal=cfg.samples_per_petal,
        r_max=cfg.r_clip,
    )
    if "csv" in cfg.formats:
        outputs.write_csv(out / "orbit.csv", ["phi", "r", "x", "y"], pts)
    if "ppm" in cfg.formats:
        outputs.write_ppm(out / "orbit.ppm", outputs.polyline_image(pts[:, 2:4], cfg.image_size))
    if "json" in cfg.formats:
        span, petals, exact = co.closure_info(spec)
        outputs.write_json(out / "orbit_report.json", {
            "a_c": spec.a_c,
            "closure_span": span,
            "petals": petals,
            "exact_rational_k": exact,
            "points": int(pts.shape[0]),
        })
    return 0


def cmd_density(args) -> int:
    cfg = _load_config(args)
    out = _prepare_outdir(args, cfg)
    state = cfg.state()
    grid = cfg.grid(state)
    fld = qw.density_grid(state, grid)
    if "csv" in cfg.formats:
        rows = (
            (
                fld.r[i],
                fld.phi[m],
                fld.density[i, m],
                fld.values[i, m, 0].real,
                fld.values[i, m, 0].imag,
                fld.values[i, m, 1].real,
                fld.values[i, m, 1].imag,
            )
            for i in range(fld.r.size)
            for m in range(fld.phi.size)
        )
        outputs.write_csv(
            out / "density.csv",
            ["r", "phi", "density", "re_up", "im_up", "re_down", "im_down"],
            rows,
        )
        marg = qw.angular_marginal(fld)
        outputs.write_csv(
            out / "angular_marginal.csv",
            ["phi", "marginal"],
            zip(fld.phi, marg),
        )
    if "ppm" in cfg.formats:
        outputs.write_ppm(
            out / "density.ppm",
            outputs.density_image(fld.r, fld.phi, fld.density, cfg.image_size),
        )
    if "json" in cfg.formats:
        report = {
            "grid_norm_per_period": fld.grid_norm,
            "modes": list(state.nu_values),
            "includes_unsafe_modes": state.includes_unsafe,
            "radial_peak_largest_mode": state.radial_peak(),
        }
        if not state.includes_unsafe:
            report["phi_dot_expectation"] = state.phi_dot_expectation()
        outputs.write_json(out / "density_report.json", report)
    return 0


def cmd_qcc(args) -> int:
    cfg = _load_config(args)
    out = _prepare_outdir(args, cfg)
    state = cfg.state()
    grid = cfg.grid(state)
    fld = qw.density_grid(state, grid)
    ridge = qa.extract_ridge(fld)
    spec = cfg.orbit_spec()
    report = qa.compare_orbit(ridge, spec, scale_fit=cfg.scale_fit)
    scan = qa.detect_symmetry(
        fld, max_order_num=cfg.max_order_num, max_sheets=cfg.max_sheets
    )
    if "csv" in cfg.formats:
        outputs.write_csv(
            out / "ridge.csv",
            ["phi", "r_peak", "density_peak"],
            zip(ridge.phi, ridge.r_peak, ridge.density_peak),
        )
    payload = {
        "k": report.k,
        "gamma": report.gamma,
        "n": cfg.n,
        "nu_min": state.nu_values[0],
        "scale": report.scale,
        "scale_fit": cfg.scale_fit,
        "mean_relative_deviation": report.mean_relative_deviation,
        "max_relative_deviation": report.max_relative_deviation,
        "rays_compared": report.rays_compared,
        "symmetry_order_detected": str(scan.order),
        "symmetry_order_expected": str(abs(parse_rational(cfg.k))),
        "symmetry_mismatch": scan.mismatch,
        "symmetry_degenerate": scan.degenerate,
        "symmetry_ambiguous": [str(o) for o in scan.ambiguous],
    }
    outputs.write_json(out / "qcc_report.json", payload)
    return 0


def cmd_spectrum(args) -> int:
    cfg = _load_config(args)
    out = _prepare_outdir(args, cfg)
    pot = cfg.potential()
    nus = parse_nu_range(cfg.nu_range)
    try:
        levels = qw.cam_spectrum(pot, nus)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    payload = {
        "k": str(parse_rational(cfg.k)),
        "q": cfg.q,
        "levels": [
            {"nu": nu, "sign": sign, "lambda": value} for nu, sign, value in levels
        ],
    }
    outputs.write_json(out / "spectrum.json", payload)
    return 0


def _matrix_record(component: str, r: float, phi: float, m: np.ndarray) -> dict:
    return {
        "component": component,
        "r": r,
        "phi": phi,
        "re": [[float(m[0, 0].real), float(m[0, 1].real)],
               [float(m[1, 0].real), float(m[1, 1].real)]],
        "im": [[float(m[0, 0].imag), float(m[0, 1].imag)],
               [float(m[1, 0].imag), float(m[1, 1].imag)]],
    }


def cmd_gauge(args) -> int:
    cfg = _load_config(args)
    out = _prepare_outdir(args, cfg)
    params = cfg.field_params()
    records = []
    for r in cfg.gauge_r:
        for phi in cfg.gauge_phi:
            r = float(r)
            phi = float(phi)
            if r <= 0:
                raise ConfigError("gauge evaluation points need r > 0")
            pot = gf.gauge_potential(params, r, phi)
            strength = gf.field_strength(params, r, phi)
            for name, m in zip(("A_x", "A_y", "A_z"), pot):
                records.append(_matrix_record(name, r, phi, m))
            for name, m in zip(("B_x", "B_y", "B_z"), strength):
                records.append(_matrix_record(name, r, phi, m))
    holonomy = gf.holonomy_phase(params, loop_radius=float(cfg.gauge_r[0]))
    payload = {
        "eta": params.eta,
        "beta": params.beta,
        "q": params.q,
        "records": records,
        "holonomy": _matrix_record("loop_transport", float(cfg.gauge_r[0]), 0.0, holonomy),
    }
    outputs.write_json(out / "gauge.json", payload)
    return 0


def cmd_spin(args) -> int:
    cfg = _load_config(args)
    out = _prepare_outdir(args, cfg)
    chi = parse_chi(cfg.chi)
    span = parse_angle(cfg.span)
    if cfg.steps < 2:
        raise ConfigError("steps must be >= 2")
    q = cfg.q
    phi = np.linspace(0.0, span, cfg.steps)
    sx0, sy0, sz0 = chi.sigma_expectations()
    sx = sx0 * np.cos(q * phi) + sy0 * np.sin(q * phi)
    sy = -sx0 * np.sin(q * phi) + sy0 * np.cos(q * phi)
    rows = zip(phi, sx, sy, np.full_like(phi, sz0))
    outputs.write_csv(out / "spin.csv", ["phi", "sx", "sy", "sz"], rows)
    return 0


def cmd_selftest(args) -> int:
    from . import acceptance

    results = acceptance.run_all(verbose=True)
    return 0 if all(r.passed for r in results) else 1


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spinorbit2d",
        description=(
            "Classical and quantum zero-energy orbits of a spin-orbit-coupled "
            "particle in 2D power-law central potentials."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file; flags override its values")
    common.add_argument("--out", "-o", default=".", help="output directory")
    common.add_argument(
        "--formats",
        type=lambda s: [p.strip() for p in s.split(",") if p.strip()],
        help="comma list from csv,json,ppm",
    )
    common.add_argument("--image-size", dest="image_size", type=int)

    model = argparse.ArgumentParser(add_help=False)
    model.add_argument("--preset", help=f"named parameter set: {PRESET_HELP}")
    model.add_argument("--k", help="potential power index, exact rational like 7/3")
    model.add_argument("--gamma", help="kinetic angular momentum in hbar units (rational)")
    model.add_argument("--q", type=float, help="spin-orbit strength (default 0.1)")
    model.add_argument("--beta", type=float, help="coupling mu/(2c); q = 2*beta*eta")
    model.add_argument("--eta", type=float, help="line charge density")
    model.add_argument("--strength", type=float, help="2*M*rho/hbar^2 (default 1)")
    model.add_argument("--spin-magnitude", dest="spin_magnitude", type=float)
    model.add_argument("--phi0", help="initial apex angle (accepts 'pi/4' forms)")
    model.add_argument("--chi", help="spin state: plus, minus, plusx, or 4 numbers")
    model.add_argument("--n", type=int, help="superposition size (default 30)")
    model.add_argument("--nu-min", dest="nu_min", type=int)
    model.add_argument("--unsafe-modes", dest="unsafe_modes", action="store_true",
                       help="admit non-normalizable modes (truncated normalization)")

    grid = argparse.ArgumentParser(add_help=False)
    grid.add_argument("--r-min", dest="r_min", type=float)
    grid.add_argument("--r-max", dest="r_max", type=float)
    grid.add_argument("--n-r", dest="n_r", type=int)
    grid.add_argument("--n-phi", dest="n_phi", type=int)
    grid.add_argument("--spacing", choices=("log", "linear"))

    p_orbit = sub.add_parser("orbit", parents=[common, model],
                             help="classical orbit locus CSV/PPM")
    p_orbit.add_argument("--samples-per-petal", dest="samples_per_petal", type=int)
    p_orbit.add_argument("--r-clip", dest="r_clip", type=float,
                         help="clip radius for open orbits")
    p_orbit.set_defaults(func=cmd_orbit)

    p_density = sub.add_parser("density", parents=[common, model, grid],
                               help="quantum density grid, marginal, heatmap")
    p_density.set_defaults(func=cmd_density)

    p_qcc = sub.add_parser("qcc", parents=[common, model, grid],
                           help="ridge extraction + orbit comparison report")
    p_qcc.add_argument("--no-scale-fit", dest="no_scale_fit", action="store_true")
    p_qcc.add_argument("--max-order-num", dest="max_order_num", type=int)
    p_qcc.add_argument("--max-sheets", dest="max_sheets", type=int)
    p_qcc.set_defaults(func=cmd_qcc)

    p_spec = sub.add_parser("spectrum", parents=[common, model],
                            help="total angular momentum doublets")
    p_spec.add_argument("--nu", help="orders, e.g. 1..5 or 1,3,5")
    p_spec.set_defaults(func=cmd_spectrum)

    p_gauge = sub.add_parser("gauge", parents=[common, model],
                             help="gauge potential / field strength / holonomy JSON")
    p_gauge.add_argument("--r", dest="gauge_r", type=float, nargs="+")
    p_gauge.add_argument("--phi", dest="gauge_phi", type=float, nargs="+")
    p_gauge.set_defaults(func=cmd_gauge)

    p_spin = sub.add_parser("spin", parents=[common, model],
                            help="spin precession curves CSV")
    p_spin.add_argument("--span", help="angular span, e.g. 4pi")
    p_spin.add_argument("--steps", type=int)
    p_spin.set_defaults(func=cmd_spin)

    p_self = sub.add_parser("selftest", help="run the acceptance suite (exit 0/1)")
    p_self.set_defaults(func=cmd_selftest)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
