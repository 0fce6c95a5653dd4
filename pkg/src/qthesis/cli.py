"""Batch command-line front end.

Every subcommand takes an optional JSON config whose keys mirror the
parameters of the underlying function; ``--key value`` flags override the
file. Tables are written as CSV (17 significant digits) or JSON to ``--out``
or stdout, and a JSON run manifest goes to stderr. Exit status is 2 for a
bad config and 1 for a failure during the computation.
"""
from __future__ import annotations

import argparse
import io
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .rng import default_jobs, make_rng, parallel_map, resolve_seed


class ConfigError(ValueError):
    """Invalid command configuration."""


# ---------------------------------------------------------------- converters

def _float(v):
    if isinstance(v, bool) or not isinstance(v, (int, float, str)):
        raise ValueError(f"expected a number, got {v!r}")
    return float(v)


def _int(v):
    if isinstance(v, bool):
        raise ValueError(f"expected an integer, got {v!r}")
    if isinstance(v, float) and not v.is_integer():
        raise ValueError(f"expected an integer, got {v!r}")
    return int(v)


def _floats(v):
    if isinstance(v, (list, tuple)):
        out = [_float(x) for x in v]
        if not out:
            raise ValueError("empty list")
        return out
    return [_float(v)]


def _str(v):
    if not isinstance(v, str):
        raise ValueError(f"expected a string, got {v!r}")
    return v


def _any(v):
    return v


def _choice(*options):
    def conv(v):
        v = _str(v).lower()
        if v not in options:
            raise ValueError(f"expected one of {options}, got {v!r}")
        return v
    return conv


# ---------------------------------------------------------------- tables

class Table:
    def __init__(self, columns, rows):
        self.columns = list(columns)
        self.rows = [list(r) for r in rows]


def _cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "%.17g" % float(v)
    return str(v)


def _json_value(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if np.isfinite(v) else str(v)
    return v


def table_bytes(table: Table, fmt: str) -> bytes:
    if fmt == "csv":
        buf = io.StringIO()
        buf.write(",".join(table.columns) + "\n")
        for r in table.rows:
            buf.write(",".join(_cell(v) for v in r) + "\n")
        return buf.getvalue().encode()
    if fmt == "json":
        doc = {"columns": table.columns, "rows": [[_json_value(v) for v in r] for r in table.rows]}
        return (json.dumps(doc, indent=1) + "\n").encode()
    raise ConfigError(f"format {fmt!r} is not available for this command")


# ---------------------------------------------------------------- commands

def _readout(p):
    from .weak import ReadoutModel
    return ReadoutModel(s=p["s"], bins=p["bins"], bin_range=(-p["j_max"], p["j_max"]))


def _check_positive(p, *keys):
    for k in keys:
        if not p[k] > 0:
            raise ValueError(f"{k} must be positive")


def _validate_eur(p):
    _check_positive(p, "s", "bins", "j_max")


def _run_eur_bound(p, ctx):
    from .entropic import BoundReport, bound_report
    ro = _readout(p)
    rows = []
    for ta in p["theta_a"]:
        for tf in p["theta_f"]:
            rows.append(bound_report(p["theta_rho"], ta, tf, p["s"], ro, theta_i=p["theta_i"]).row())
    cols = list(BoundReport.CSV_COLUMNS)
    return Table(cols, rows)


def _eur_sim_cell(k, ta, tf, p, seed):
    from .entropic import eur_bound, exact_eur_entropies, simulate_eur
    ro = _readout(p)
    noise = p["noise"]
    est = simulate_eur(p["theta_rho"], ta, tf, p["s"], p["shots"], ro, noise, make_rng(seed, 4, k), p["theta_i"])
    exact_i, exact_af = exact_eur_entropies(p["theta_rho"], ta, tf, p["s"], ro, noise, p["theta_i"])
    bound = eur_bound(ta, tf, p["s"], ro, theta_i=p["theta_i"]).value
    return [p["theta_rho"], ta, tf, p["s"], p["shots"], est.H_I, est.H_AF, est.H_AF_normalized,
            est.sigma_I, est.sigma_AF, est.H_I + est.H_AF, bound, exact_i, exact_af]


def _validate_eur_sim(p):
    from .entropic import NoiseModel
    _validate_eur(p)
    if p["shots"] < 100_000:
        raise ValueError("shots must be at least 100000")
    NoiseModel.from_dict(p["noise"])


def _run_eur_sim(p, ctx):
    cells = [(ta, tf) for ta in p["theta_a"] for tf in p["theta_f"]]
    args = [(k, ta, tf, p, ctx["seed"]) for k, (ta, tf) in enumerate(cells)]
    rows = parallel_map(_eur_sim_cell, args, ctx["jobs"])
    cols = ["theta_rho", "theta_a", "theta_f", "s", "shots", "H_I", "H_AF", "H_AF_norm", "sigma_I",
            "sigma_AF", "H_sum", "bound_eur", "exact_H_I", "exact_H_AF"]
    return Table(cols, rows)


def _validate_traj(p):
    _check_positive(p, "s", "shots")
    if p["prior"] == "rapidity":
        _check_positive(p, "half_width")
    elif p["prior"] == "fixed" and not -1 <= p["z0"] <= 1:
        raise ValueError("z0 must lie in [-1, 1]")


def _ensemble(p, ctx):
    """``(q, extra_columns)`` for the configured ensemble."""
    from .arrow import rapidity_flat_ensemble, run_feedback_ensemble, single_step_ensemble
    seed, jobs = ctx["seed"], ctx["jobs"]
    if p["protocol"] in ("cof", "acof", "none"):
        ens = run_feedback_ensemble(p["protocol"], p["shots"], p["s"], window=p["window"], rng_seed=seed,
                                    max_angle=p["max_angle"], initial=(p["x0"], p["z0"]), jobs=jobs)
        return ens.q, {"j": ens.j, "theta_app": ens.theta_app, "accepted": ens.accepted}
    if p["protocol"] == "fixed":
        return single_step_ensemble(p["z0"], p["s"], p["shots"], seed=seed, jobs=jobs), {}
    return rapidity_flat_ensemble(p["s"], p["shots"], half_width=p["half_width"], seed=seed, jobs=jobs), {}


def _run_traj(p, ctx):
    q, extra = _ensemble(p, ctx)
    cols = ["index", *extra, "q"]
    data = [np.arange(q.size), *extra.values(), q]
    rows = [[c[i].item() for c in data] for i in range(q.size)]
    return Table(cols, rows)


def _run_ft(p, ctx):
    from .arrow import InsufficientStatisticsError, detailed_ft_check, integral_ft_and_second_law
    q, extra = _ensemble(p, ctx)
    acceptance = 1.0
    if "accepted" in extra:
        acceptance = float(extra["accepted"].mean())
        q = q[extra["accepted"]]
    ift = integral_ft_and_second_law(q)
    try:
        ft = detailed_ft_check(q, p["bin_width"], min_samples=min(100_000, q.size))
    except InsufficientStatisticsError:
        ft = None
    if p["table"] == "bins":
        if ft is None:
            raise InsufficientStatisticsError("too few bins populated on both signs of Q")
        rows = zip(ft.q_bin, ft.q_mean, ft.log_ratio, ft.sigma, ft.n_pos, ft.n_neg)
        return Table(["q_bin", "q_mean", "log_ratio", "sigma", "n_pos", "n_neg"], rows)
    nan = float("nan")
    row = [p["protocol"], ift.n, acceptance, ift.mean_q, ift.mean_q_err, ift.ift, ift.ift_err,
           ft.slope if ft else nan, ft.slope_err if ft else nan, ft.slope_free if ft else nan,
           ift.second_law_holds, ift.absolute_irreversibility]
    return Table(["protocol", "n", "acceptance", "mean_q", "mean_q_err", "ift", "ift_err", "slope",
                  "slope_err", "slope_free", "second_law", "absolute_irreversibility"], [row])


def _validate_jc(p):
    from .cqed import JCParams
    JCParams(p["omega_c"], p["omega_q"], p["g"], p["n_max"])


def _run_jc(p, ctx):
    from .cqed import JCParams, dispersive_params, jc_spectrum
    params = JCParams(p["omega_c"], p["omega_q"], p["g"], p["n_max"])
    spec = jc_spectrum(params)
    rows = [[k, e, int(n)] for k, (e, n) in enumerate(zip(spec.energies, spec.excitations))]
    if params.delta != 0:
        chi, ncrit = dispersive_params(params.g, params.delta)
    else:
        chi = ncrit = float("nan")
    rows = [r + [chi, ncrit] for r in rows]
    return Table(["level", "energy", "excitations", "chi", "n_crit"], rows)


def _validate_transmon(p):
    if p["e_j"] is None and p["f01"] is None:
        raise ValueError("give either e_j and e_c, or f01 and f12")
    if p["e_j"] is not None:
        _check_positive(p, "e_j", "e_c")


def _run_transmon(p, ctx):
    from .cqed import TransmonParams, transmon_from_spectrum, transmon_spectrum
    if p["e_j"] is not None:
        tp = TransmonParams(p["e_j"], p["e_c"])
    else:
        tp = transmon_from_spectrum(p["f01"], p["f12"])
    f01, f12, alpha = transmon_spectrum(tp)
    return Table(["e_j", "e_c", "ratio", "f01", "f12", "alpha"], [[tp.e_j, tp.e_c, tp.e_j / tp.e_c, f01, f12, alpha]])


def _validate_pulse(p):
    from .pulses import RabiConfig, is_power_of_two
    cfg = RabiConfig.from_dict(p["rabi"])
    if not is_power_of_two(cfg.points):
        raise ValueError(f"points must be a power of 2, got {cfg.points}")


def _run_pulse(p, ctx):
    from .pulses import compile_rabi
    return compile_rabi(p["rabi"])


def _validate_jj(p):
    from .junction import JUNCTION_MODELS
    if p["model"] not in JUNCTION_MODELS:
        raise ValueError(f"model must be one of {JUNCTION_MODELS}")


def _run_jj(p, ctx):
    from . import junction as jn
    m = p["model"]
    if m == "ab":
        rows = [[r, p["gap"], jn.ambegaokar_baratoff(r, p["gap"])] for r in p["r_n"]]
        return Table(["r_n", "gap", "i_c"], rows)
    if m == "simmons":
        rows = [[x, p["phi"], jn.simmons_resistance(x, p["phi"], "printed"),
                 jn.simmons_resistance(x, p["phi"], "corrected")] for x in p["x"]]
        return Table(["x_nm", "phi_ev", "r_printed", "r_corrected"], rows)
    if m == "multilayer":
        rows = [[n, jn.multilayer_resistance(n, p["r_side"], p["r_top_base"], p["growth_factor"], p["mode"])]
                for n in range(1, p["n_layers"] + 1)]
        return Table(["n_layers", "resistance"], rows)
    params = jn.FITTED_OXIDATION
    curve = jn.cabrera_mott(params, n_points=p["n_points"])
    rows = [[t, x, jn.cabrera_inverse_log(t, params) if t > 0 else float("nan")] for t, x in zip(curve.t, curve.x)]
    return Table(["t_s", "x_nm", "x_inverse_log_nm"], rows)


def _validate_tls(p):
    _check_positive(p, "area", "freq_span")
    if p["splittings"] is None:
        _check_positive(p, "n", "g_max", "g_min")


def _run_tls(p, ctx):
    from .junction import sample_tls_splittings, tls_density_fit
    if p["splittings"] is not None:
        g = np.asarray(p["splittings"], dtype=float)
    else:
        g = sample_tls_splittings(p["n"], p["g_max"], p["g_min"], make_rng(ctx["seed"], 5))
    fit = tls_density_fit(g, p["area"], p["freq_span"])
    return Table(["n", "sigma", "sigma_err", "g_max", "g_max_err"],
                 [[g.size, fit.sigma, fit.sigma_err, fit.g_max, fit.g_max_err]])


_EUR_PARAMS = {
    "theta_rho": (0.0, _float), "theta_a": ([0.0], _floats), "theta_f": ([0.0], _floats),
    "theta_i": (0.0, _float), "s": (0.375, _float), "bins": (52, _int), "j_max": (8.0, _float),
}
_ENSEMBLE_PARAMS = {
    "protocol": ("fixed", _choice("cof", "acof", "none", "fixed", "rapidity")),
    "s": (0.375, _float), "shots": (100_000, _int), "x0": (1.0, _float), "z0": (0.0, _float),
    "window": (float(np.pi / 20), _float), "max_angle": (float(np.pi / 4), _float),
    "half_width": (200.0, _float),
}

COMMANDS = {
    "eur-bound": ("bound ladder for (theta_a, theta_f) pairs", _EUR_PARAMS, _validate_eur, _run_eur_bound),
    "eur-sim": ("Monte-Carlo entropies on a (theta_a, theta_f) grid",
                {**_EUR_PARAMS, "s": (0.2, _float), "shots": (100_000, _int), "noise": ({}, _any)},
                _validate_eur_sim, _run_eur_sim),
    "traj-ensemble": ("per-trial Q of a single-step or feedback ensemble", _ENSEMBLE_PARAMS,
                      lambda p: _validate_traj({**p, "prior": p["protocol"]}), _run_traj),
    "ft-check": ("fluctuation-theorem summary of an ensemble",
                 {**_ENSEMBLE_PARAMS, "bin_width": (0.1, _float), "table": ("summary", _choice("summary", "bins"))},
                 lambda p: _validate_traj({**p, "prior": p["protocol"]}), _run_ft),
    "jc-spectrum": ("dressed Jaynes-Cummings levels",
                    {"omega_c": (1.0, _float), "omega_q": (1.0, _float), "g": (0.01, _float), "n_max": (5, _int)},
                    _validate_jc, _run_jc),
    "transmon": ("transmon levels from E_J, E_C or the reverse",
                 {"e_j": (None, _float), "e_c": (None, _float), "f01": (None, _float), "f12": (None, _float)},
                 _validate_transmon, _run_transmon),
    "pulse-compile": ("compile a Rabi sequence", {"rabi": ({}, _any)}, _validate_pulse, _run_pulse),
    "jj-model": ("junction resistance, critical current and oxide growth",
                 {"model": ("ab", _str), "r_n": ([32.48e3], _floats), "gap": (50e9, _float),
                  "x": ([1.5], _floats), "phi": (2.0, _float), "n_layers": (10, _int), "r_side": (10e3, _float),
                  "r_top_base": (10e3, _float), "growth_factor": (2.0, _float), "mode": ("two_junction", _str),
                  "n_points": (400, _int)},
                 _validate_jj, _run_jj),
    "tls-fit": ("fit TLS density to observed splittings",
                {"splittings": (None, _any), "n": (200, _int), "g_max": (0.05, _float), "g_min": (0.005, _float),
                 "area": (1.0, _float), "freq_span": (1.0, _float)},
                _validate_tls, _run_tls),
}

# Keys that map to the RabiConfig when given at the top level of a pulse-compile config.
_RABI_KEYS = ("steps", "points", "qubit_ch", "cavity_ch", "trigger_marker", "ssm_freq", "durations",
              "qubit_start", "qubit_amplitude", "cavity_pulse", "trigger_pulse")


def _flag_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qthesis", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (help_text, params, _, _) in COMMANDS.items():
        sp = sub.add_parser(name, help=help_text)
        sp.add_argument("config", nargs="?", help="JSON config file")
        sp.add_argument("--dry-run", action="store_true", help="validate the config and stop")
        sp.add_argument("--seed", type=int, default=None, help="random seed (default 0)")
        sp.add_argument("--jobs", type=int, default=None, help="worker processes (default: logical cores)")
        sp.add_argument("--out", default=None, help="output file (default: stdout)")
        sp.add_argument("--format", choices=("csv", "json", "bin"), default=None)
        keys = list(params) + (list(_RABI_KEYS) if name == "pulse-compile" else [])
        for key in keys:
            sp.add_argument("--" + key.replace("_", "-"), dest=f"p_{key}", type=_flag_value, default=None,
                            metavar="VALUE")
    return parser


def resolve_params(command: str, args) -> dict:
    """Merge defaults, the JSON config file and flag overrides; raises :class:`ConfigError`."""
    _, params, validate, _ = COMMANDS[command]
    raw = {}
    if args.config:
        try:
            raw = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
    raw = dict(raw)
    for key in ("seed", "jobs"):
        if key in raw and getattr(args, key) is None:
            setattr(args, key, raw[key])
        raw.pop(key, None)
    if command == "pulse-compile":
        rabi = dict(raw.pop("rabi", {}))
        for key in _RABI_KEYS:
            if key in raw:
                rabi[key] = raw.pop(key)
            flag = getattr(args, f"p_{key}", None)
            if flag is not None:
                rabi[key] = flag
        raw["rabi"] = rabi
    for key in params:
        flag = getattr(args, f"p_{key}", None)
        if flag is not None:
            raw[key] = flag
    unknown = sorted(set(raw) - set(params))
    if unknown:
        raise ConfigError(f"unknown {command} parameters: {', '.join(unknown)}")
    out = {}
    for key, (default, conv) in params.items():
        value = raw.get(key, default)
        try:
            out[key] = value if value is None else conv(value)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{key}: {exc}") from exc
    try:
        validate(out)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    return out


def _write(data: bytes, out):
    if out is None:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()
    else:
        Path(out).write_bytes(data)


def _emit(result, fmt, out) -> list:
    from .pulses import Sequence, export_sequence, sequence_bytes
    if isinstance(result, Sequence):
        if fmt == "json":
            raise ConfigError("pulse-compile writes bin or csv")
        if fmt == "csv":
            if out is None:
                raise ConfigError("csv sequence export needs --out")
            return [str(p) for p in export_sequence(result, "csv", out)]
        _write(sequence_bytes(result), out)
        return [out or "<stdout>"]
    _write(table_bytes(result, fmt), out)
    return [out or "<stdout>"]


def _manifest(**fields):
    sys.stderr.write(json.dumps(fields, sort_keys=True, default=str) + "\n")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    t0 = time.perf_counter()
    command = args.command
    try:
        params = resolve_params(command, args)
        seed = resolve_seed(args.seed)
        jobs = default_jobs() if args.jobs is None else int(args.jobs)
        if jobs < 1:
            raise ConfigError("jobs must be at least 1")
        fmt = args.format or ("bin" if command == "pulse-compile" else "csv")
        if fmt == "bin" and command != "pulse-compile":
            raise ConfigError("bin output is only available for pulse-compile")
    except ConfigError as exc:
        print(f"qthesis {command}: config error: {exc}", file=sys.stderr)
        return 2
    manifest = {"command": command, "version": __version__, "seed": seed, "jobs": jobs, "format": fmt,
                "dry_run": args.dry_run}
    if args.dry_run:
        _manifest(**manifest, status="ok", elapsed_s=time.perf_counter() - t0)
        return 0
    try:
        result = COMMANDS[command][3](params, {"seed": seed, "jobs": jobs})
        files = _emit(result, fmt, args.out)
    except ConfigError as exc:
        print(f"qthesis {command}: config error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:   # any failure during the computation is reported, not raised
        print(f"qthesis {command}: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        _manifest(**manifest, status="error", elapsed_s=time.perf_counter() - t0)
        return 1
    _manifest(**manifest, status="ok", outputs=files, elapsed_s=time.perf_counter() - t0)
    return 0


if __name__ == "__main__":
    sys.exit(main())
