"""Command-line front end for radical-pair magnetometry limits.

Subcommands:

* ``qfi``     -- generator spectrum table (t, lambda_max, lambda_min, F_max)
                 plus the fundamental bound deltaB_F = 1/sqrt(8 nu0)/tau;
* ``sweep``   -- reaction-yield sensitivity 1/deltaB over an (A, B) grid,
                 integrated or time-resolved readout;
* ``optimal`` -- GHZ coherence-readout report (time-resolved or integrated);
* ``control`` -- pulsed cis/trans protocol: single run, field sweeps, or
                 exchange scan.

All quantities are in hbar = 1, gamma = 1 units (fields and couplings in
angular-frequency units, k = 1 normalization in the presets). The
``--restore-units`` flag converts reported fields to laboratory units via
gamma / 2 pi = 2.8 MHz/G. Output is CSV (default) or JSON; every file opens
with comment metadata naming the resolved run configuration and its sha256,
and identical configurations produce byte-identical files (no RNG, no
timestamps). ``--jobs N`` fans grid points out to a process pool with
order-preserving assembly.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Sequence

import numpy as np

from .control import ControlConfig, optimize_exchange, simulate_control
from .errors import ConfigError, NumericalError
from .hamiltonians import (
    HamiltonianSpec,
    ellipsoidal,
    isotropic,
    max_anisotropic,
    spheroidal,
)
from .optimal import deltaB_integrated_optimal, deltaB_timeresolved
from .qfi import delta_b_floor, field_generator
from .yields import evaluate_point

__all__ = ["main", "build_parser", "GAMMA_RAD_PER_S_PER_GAUSS"]

#: Electron gyromagnetic ratio, gamma/2pi = 2.8 MHz/G, as rad/s per gauss.
GAMMA_RAD_PER_S_PER_GAUSS = 2.0 * np.pi * 2.8e6
_GAUSS_PER_TESLA = 1e4


def _fmt(value) -> str:
    if isinstance(value, (bool, int, str)):
        return str(value)
    return "%.12g" % value


def _to_gauss(omega: float) -> float:
    """Angular-frequency field (rad/s at gamma = 1) to gauss."""
    return omega / GAMMA_RAD_PER_S_PER_GAUSS


def _write_output(
    args,
    command: str,
    run_config: dict,
    columns: Sequence[str],
    rows: Sequence[Sequence],
    extra: dict | None = None,
) -> None:
    config_json = json.dumps(run_config, sort_keys=True, separators=(",", ":"))
    sha = hashlib.sha256(config_json.encode()).hexdigest()
    extra = extra or {}
    if args.format == "json":
        doc = {
            "command": command,
            "config": run_config,
            "config_sha256": sha,
            "extra": {k: v for k, v in extra.items()},
            "columns": list(columns),
            "rows": [[float(v) for v in row] for row in rows],
        }
        text = json.dumps(doc, sort_keys=True, indent=2) + "\n"
    else:
        lines = [
            f"# rpmag {command}",
            f"# config: {config_json}",
            f"# config_sha256: {sha}",
        ]
        lines += [f"# {key} = {_fmt(val)}" for key, val in extra.items()]
        lines.append(",".join(columns))
        lines += [",".join(_fmt(v) for v in row) for row in rows]
        text = "\n".join(lines) + "\n"
    if args.out and args.out != "-":
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _linspace(lo: float, hi: float, steps: int, log: bool = False) -> np.ndarray:
    if steps < 1:
        raise ConfigError("grid needs at least one point")
    if steps == 1:
        return np.array([lo])
    if log:
        if lo <= 0 or hi <= 0:
            raise ConfigError("log grid endpoints must be positive")
        return np.geomspace(lo, hi, steps)
    return np.linspace(lo, hi, steps)


# ---------------------------------------------------------------------------
# qfi
# ---------------------------------------------------------------------------

_QFI_PRESETS = {
    "spheroidal": dict(
        variant="spheroidal", a_perp=1.0, a_z=2.0, B=0.5, k=1.0, nu0=1.0,
        t_min=0.25, t_max=3.0, t_steps=12, restore_units=False,
    ),
    "two-electron": dict(
        variant="two-electron", B=1.0, k=1.0, nu0=1.0,
        t_min=0.25, t_max=3.0, t_steps=12, restore_units=False,
    ),
    # tau = 1 us lifetime and nu0 = 1e12 pairs; fields in rad/s.
    "picotesla": dict(
        variant="spheroidal", a_perp=5e6, a_z=1e7, B=5e5, k=1e6, nu0=1e12,
        t_min=2.5e-7, t_max=3e-6, t_steps=12, restore_units=True,
    ),
}


def _qfi_spec(variant: str, args_dict: dict) -> HamiltonianSpec:
    b = args_dict.get("B")
    if b is None:
        raise ConfigError("--B is required")
    if variant == "isotropic":
        if args_dict.get("A") is None:
            raise ConfigError("isotropic variant needs --A")
        return isotropic(args_dict["A"], b)
    if variant == "max-anisotropic":
        if args_dict.get("A") is None:
            raise ConfigError("max-anisotropic variant needs --A")
        return max_anisotropic(args_dict["A"], b)
    if variant == "spheroidal":
        if args_dict.get("a_perp") is None or args_dict.get("a_z") is None:
            raise ConfigError("spheroidal variant needs --a-perp and --a-z")
        return spheroidal(args_dict["a_perp"], args_dict["a_z"], b)
    if variant == "ellipsoidal":
        for key in ("a_x", "a_y", "a_z"):
            if args_dict.get(key) is None:
                raise ConfigError("ellipsoidal variant needs --a-x, --a-y, --a-z")
        return ellipsoidal(args_dict["a_x"], args_dict["a_y"], args_dict["a_z"], b)
    if variant == "two-electron":
        return HamiltonianSpec(b=b)
    raise ConfigError(f"unknown qfi variant {variant!r}")


def _cmd_qfi(args) -> None:
    if args.preset:
        if args.preset not in _QFI_PRESETS:
            raise ConfigError(f"unknown qfi preset {args.preset!r}")
        params = dict(_QFI_PRESETS[args.preset])
    else:
        params = dict(
            variant=args.variant, A=args.A, a_perp=args.a_perp, a_x=args.a_x,
            a_y=args.a_y, a_z=args.a_z, B=args.B, k=args.k, nu0=args.nu0,
            restore_units=args.restore_units,
        )
        if args.t is not None:
            params.update(t_min=args.t, t_max=args.t, t_steps=1)
        else:
            if args.t_max is None:
                raise ConfigError("provide --t or --t-min/--t-max/--t-steps")
            params.update(t_min=args.t_min, t_max=args.t_max, t_steps=args.t_steps)
    params = {k: v for k, v in params.items() if v is not None}
    if params.get("t_steps", 0) < 1:
        raise ConfigError("empty time range")
    spec = _qfi_spec(params["variant"], params)
    times = _linspace(params["t_min"], params["t_max"], params["t_steps"])
    rows = []
    for t in times:
        gen = field_generator(spec, float(t))
        rows.append((t, gen.lambda_max, gen.lambda_min, gen.f_max))
    k, nu0 = params.get("k", 1.0), params.get("nu0", 1.0)
    floor = delta_b_floor(k, nu0)
    extra = {"deltaB_F": floor, "k": k, "nu0": nu0}
    if params.get("restore_units"):
        extra["deltaB_F_gauss"] = _to_gauss(floor)
        extra["deltaB_F_tesla"] = _to_gauss(floor) / _GAUSS_PER_TESLA
    run_config = {"command": "qfi", "preset": args.preset, **params}
    _write_output(args, "qfi", run_config,
                  ("t", "lambda_max", "lambda_min", "F_max"), rows, extra)


# ---------------------------------------------------------------------------
# sweep
# ---------------------------------------------------------------------------

_FIG2_A_GRID = dict(a_min=1.0, a_max=1000.0, a_steps=7, a_log=True)
_FIG2_B_GRID = dict(b_min=0.1, b_max=3.0, b_steps=59, b_log=False)
_FIG2_B_COARSE = dict(b_min=0.25, b_max=2.0, b_steps=8, b_log=False)
_FIG2_A_COARSE = dict(a_min=1.0, a_max=1000.0, a_steps=4, a_log=True)

_SWEEP_PRESETS = {
    "fig2a": dict(variant="isotropic", state="up", mode="integrated",
                  **_FIG2_A_GRID, **_FIG2_B_GRID),
    "fig2b": dict(variant="isotropic", state="down", mode="integrated",
                  **_FIG2_A_GRID, **_FIG2_B_GRID),
    "fig2c": dict(variant="isotropic", state="mixed", mode="integrated",
                  **_FIG2_A_GRID, **_FIG2_B_GRID),
    "fig2d": dict(variant="anisotropic", state="mixed", mode="integrated",
                  **_FIG2_A_GRID, **_FIG2_B_GRID),
    "fig2e": dict(variant="isotropic", state="mixed", mode="instantaneous",
                  **_FIG2_A_COARSE, **_FIG2_B_COARSE),
    "fig2f": dict(variant="anisotropic", state="mixed", mode="instantaneous",
                  **_FIG2_A_COARSE, **_FIG2_B_COARSE),
}


def _sweep_point(task):
    variant, state, mode, a, b, k, nu0 = task
    return evaluate_point(variant, state, mode, a, b, k, nu0)


def _map_tasks(worker: Callable, tasks: list, jobs: int) -> list:
    if jobs <= 1 or len(tasks) <= 1:
        return [worker(task) for task in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(worker, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))


def _cmd_sweep(args) -> None:
    if args.preset:
        if args.preset not in _SWEEP_PRESETS:
            raise ConfigError(f"unknown sweep preset {args.preset!r}")
        params = dict(_SWEEP_PRESETS[args.preset], k=1.0, nu0=1.0)
    else:
        params = dict(variant=args.variant, state=args.state, mode=args.mode,
                      k=args.k, nu0=args.nu0)
        if args.A is not None:
            params.update(a_min=args.A, a_max=args.A, a_steps=1, a_log=False)
        elif args.a_max is not None:
            params.update(a_min=args.a_min, a_max=args.a_max,
                          a_steps=args.a_steps, a_log=args.a_log)
        else:
            raise ConfigError("provide --A or --a-min/--a-max/--a-steps")
        if args.B is not None:
            params.update(b_min=args.B, b_max=args.B, b_steps=1, b_log=False)
        elif args.b_max is not None:
            params.update(b_min=args.b_min, b_max=args.b_max,
                          b_steps=args.b_steps, b_log=args.b_log)
        else:
            raise ConfigError("provide --B or --b-min/--b-max/--b-steps")
    a_values = _linspace(params["a_min"], params["a_max"], params["a_steps"],
                         params.get("a_log", False))
    b_values = _linspace(params["b_min"], params["b_max"], params["b_steps"],
                         params.get("b_log", False))
    k, nu0 = params["k"], params["nu0"]
    tasks = [
        (params["variant"], params["state"], params["mode"], float(a), float(b), k, nu0)
        for a in a_values
        for b in b_values
    ]
    deltas = _map_tasks(_sweep_point, tasks, args.jobs)
    columns = ["A", "B", "inv_deltaB"]
    if args.restore_units:
        columns += ["B_gauss", "deltaB_gauss"]
    rows = []
    for (variant, state, mode, a, b, _, _), db in zip(tasks, deltas):
        inv = 0.0 if not np.isfinite(db) or db == 0.0 else 1.0 / db
        row = [a, b, inv]
        if args.restore_units:
            row += [_to_gauss(b), _to_gauss(db)]
        rows.append(row)
    run_config = {"command": "sweep", "preset": args.preset, **params}
    _write_output(args, "sweep", run_config, columns, rows,
                  {"k": k, "nu0": nu0, "points": len(rows)})


# ---------------------------------------------------------------------------
# optimal
# ---------------------------------------------------------------------------


def _cmd_optimal(args) -> None:
    if args.B is None:
        raise ConfigError("--B is required")
    if args.mode == "time-resolved":
        bound = deltaB_timeresolved(args.k, args.nu0)
        rows = [
            ("delta_b", bound.delta_b),
            ("fisher_integral", bound.fisher_integral),
        ]
        delta_b = bound.delta_b
    else:
        res = deltaB_integrated_optimal(args.B, args.k, args.nu0)
        rows = [
            ("y_x", res.y_x),
            ("dyx_db", res.dyx_db),
            ("delta_y_x", res.delta_y_x),
            ("delta_b", res.delta_b),
        ]
        delta_b = res.delta_b
    floor = delta_b_floor(args.k, args.nu0)
    rows.append(("delta_b_floor", floor))
    rows.append(("delta_b_over_floor", delta_b / floor))
    if args.restore_units:
        rows.append(("delta_b_gauss", _to_gauss(delta_b)))
        rows.append(("delta_b_tesla", _to_gauss(delta_b) / _GAUSS_PER_TESLA))
    run_config = {
        "command": "optimal", "mode": args.mode, "B": args.B, "k": args.k,
        "nu0": args.nu0, "restore_units": bool(args.restore_units),
    }
    _write_output(args, "optimal", run_config, ("quantity", "value"), rows)


# ---------------------------------------------------------------------------
# control
# ---------------------------------------------------------------------------

_CONTROL_BASE = dict(a=352.0, b=17.6, k=1.0, j=0.65 * 352.0)
_CONTROL_B_FACTORS = np.linspace(0.4, 2.5, 43)


def _control_field_task(task):
    cfg_dict, b = task
    cfg = ControlConfig.from_dict(cfg_dict).with_field(b)
    res = simulate_control(cfg)
    return (b / cfg.k, res.lambda_b, res.delta_b_over_floor)


def _control_j_task(task):
    cfg_dict, j = task
    cfg = ControlConfig.from_dict({**cfg_dict, "j": j})
    res = simulate_control(cfg)
    return (j / cfg.a, res.delta_b_over_floor)


def _cmd_control(args) -> None:
    if args.config:
        with open(args.config, "r", encoding="utf-8") as fh:
            cfg = ControlConfig.from_json(fh.read())
    else:
        base = dict(_CONTROL_BASE)
        if args.A is not None:
            base["a"] = args.A
        if args.B is not None:
            base["b"] = args.B
        if args.k is not None:
            base["k"] = args.k
        if args.J is not None:
            base["j"] = args.J
        if args.mode:
            base["mode"] = args.mode
        if args.hyperfine:
            base["variant"] = args.hyperfine
        cfg = ControlConfig.from_dict(base)
    preset = args.preset
    if preset and preset not in ("fig5a", "fig5b", "fig5c"):
        raise ConfigError(f"unknown control preset {preset!r}")
    run_config = {"command": "control", "preset": preset, **cfg.to_dict()}
    if preset == "fig5a" or preset == "fig5b":
        # fig5a: the exchange-prepared protocol (solid curve); fig5b: the
        # frozen-closure isotropic baseline it is compared against (dashed).
        if preset == "fig5a":
            mode, variant = "finite_J", "anisotropic"
        else:
            mode, variant = "infinite_J_baseline", "isotropic"
        cfg_dict = {**cfg.to_dict(), "mode": mode, "variant": variant,
                    "pulse_period": None, "pulse_width": None}
        b_values = [float(cfg.b * f) for f in _CONTROL_B_FACTORS]
        tasks = [(cfg_dict, b) for b in b_values]
        rows = _map_tasks(_control_field_task, tasks, args.jobs)
        run_config["mode"] = mode
        run_config["variant"] = variant
        _write_output(args, "control", run_config,
                      ("B_over_k", "Lambda_B", "deltaB_over_deltaBF"), rows)
    elif preset == "fig5c":
        j_factors = np.linspace(0.3, 1.0, 15)
        cfg_dict = cfg.to_dict()
        tasks = [(cfg_dict, float(cfg.a * f)) for f in j_factors]
        rows = _map_tasks(_control_j_task, tasks, args.jobs)
        if args.scan_summary:
            j_opt, db_min = optimize_exchange(cfg, [cfg.a * f for f in j_factors])
            extra = {"J_opt_over_A": j_opt / cfg.a,
                     "deltaB_min_over_floor": db_min / (cfg.k / np.sqrt(8.0))}
        else:
            extra = None
        _write_output(args, "control", run_config,
                      ("J_over_A", "deltaB_over_deltaBF"), rows, extra)
    else:
        res = simulate_control(cfg)
        rows = [
            ("Y_S", res.y_s),
            ("Lambda_B", res.lambda_b),
            ("deltaB", res.delta_b),
            ("deltaB_over_deltaBF", res.delta_b_over_floor),
            ("tail", res.tail),
            ("windows", float(res.window_starts.size)),
        ]
        _write_output(args, "control", run_config, ("quantity", "value"), rows,
                      {"variance_model": res.variance_model})


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rpmag",
        description="Quantum limits and control schemes for radical-pair magnetometry.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--out", default=None, help="output path ('-' = stdout)")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--restore-units", action="store_true",
                       help="also report fields in gauss/tesla (gamma/2pi = 2.8 MHz/G)")

    p_qfi = sub.add_parser("qfi", help="generator spectrum and fundamental bound")
    p_qfi.add_argument("--preset", choices=sorted(_QFI_PRESETS))
    p_qfi.add_argument("--variant", default="spheroidal",
                       choices=("isotropic", "spheroidal", "ellipsoidal",
                                "max-anisotropic", "two-electron"))
    p_qfi.add_argument("--A", type=float)
    p_qfi.add_argument("--a-perp", dest="a_perp", type=float)
    p_qfi.add_argument("--a-x", dest="a_x", type=float)
    p_qfi.add_argument("--a-y", dest="a_y", type=float)
    p_qfi.add_argument("--a-z", dest="a_z", type=float)
    p_qfi.add_argument("--B", type=float)
    p_qfi.add_argument("--t", type=float)
    p_qfi.add_argument("--t-min", dest="t_min", type=float, default=0.0)
    p_qfi.add_argument("--t-max", dest="t_max", type=float)
    p_qfi.add_argument("--t-steps", dest="t_steps", type=int, default=11)
    p_qfi.add_argument("--k", type=float, default=1.0)
    p_qfi.add_argument("--nu0", type=float, default=1.0)
    common(p_qfi)
    p_qfi.set_defaults(func=_cmd_qfi)

    p_sweep = sub.add_parser("sweep", help="yield-sensitivity grid")
    p_sweep.add_argument("--preset", choices=sorted(_SWEEP_PRESETS))
    p_sweep.add_argument("--variant", default="isotropic",
                         choices=("isotropic", "anisotropic"))
    p_sweep.add_argument("--state", default="mixed", choices=("up", "down", "mixed"))
    p_sweep.add_argument("--mode", default="integrated",
                         choices=("integrated", "instantaneous"))
    p_sweep.add_argument("--A", type=float)
    p_sweep.add_argument("--a-min", dest="a_min", type=float)
    p_sweep.add_argument("--a-max", dest="a_max", type=float)
    p_sweep.add_argument("--a-steps", dest="a_steps", type=int, default=7)
    p_sweep.add_argument("--a-log", dest="a_log", action="store_true")
    p_sweep.add_argument("--B", type=float)
    p_sweep.add_argument("--b-min", dest="b_min", type=float)
    p_sweep.add_argument("--b-max", dest="b_max", type=float)
    p_sweep.add_argument("--b-steps", dest="b_steps", type=int, default=31)
    p_sweep.add_argument("--b-log", dest="b_log", action="store_true")
    p_sweep.add_argument("--k", type=float, default=1.0)
    p_sweep.add_argument("--nu0", type=float, default=1.0)
    p_sweep.add_argument("--jobs", type=int, default=1)
    common(p_sweep)
    p_sweep.set_defaults(func=_cmd_sweep)

    p_opt = sub.add_parser("optimal", help="GHZ coherence-readout report")
    p_opt.add_argument("--mode", default="time-resolved",
                       choices=("time-resolved", "integrated"))
    p_opt.add_argument("--B", type=float)
    p_opt.add_argument("--k", type=float, default=1.0)
    p_opt.add_argument("--nu0", type=float, default=1.0)
    common(p_opt)
    p_opt.set_defaults(func=_cmd_optimal)

    p_ctl = sub.add_parser("control", help="pulsed cis/trans protocol")
    p_ctl.add_argument("--preset", choices=("fig5a", "fig5b", "fig5c"))
    p_ctl.add_argument("--config", help="ControlConfig JSON file")
    p_ctl.add_argument("--A", type=float)
    p_ctl.add_argument("--B", type=float)
    p_ctl.add_argument("--k", type=float)
    p_ctl.add_argument("--J", type=float)
    p_ctl.add_argument("--mode", choices=("finite_J", "infinite_J_baseline"))
    p_ctl.add_argument("--hyperfine", choices=("anisotropic", "isotropic"),
                       help="hyperfine variant for non-preset runs")
    p_ctl.add_argument("--scan-summary", dest="scan_summary", action="store_true",
                       help="with fig5c: append the grid argmin to the metadata")
    p_ctl.add_argument("--jobs", type=int, default=1)
    common(p_ctl)
    p_ctl.set_defaults(func=_cmd_control)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
