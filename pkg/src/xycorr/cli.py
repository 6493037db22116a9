"""Command-line front end: sweeps, spectra, crossings, ETCP fits and figure data.

Every command writes plain data tables (CSV or JSON).  Sweep commands emit one
table per (gamma, T) combination with columns ``lambda, r, value, measure``;
rows run lambda-major, separation-minor.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from . import analysis, finite, thermo
from .errors import PointFailure, XYCorrError

log = logging.getLogger("xycorr")

COMMANDS = (
    "correlators",
    "discord-sweep",
    "eof-sweep",
    "finite-spectrum",
    "crossings",
    "etcp-fit",
    "fidelity-compare",
    "reproduce-figure",
)

SWEEP_COLUMNS = ("lambda", "r", "value", "measure")


class ConfigError(Exception):
    pass


# ---------------------------------------------------------------- parsing


def parse_float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in str(text).replace(" ", "").split(",") if x]
    except ValueError as exc:
        raise ConfigError(f"bad number list {text!r}") from exc


def parse_int_list(text: str) -> list[int]:
    out = []
    for part in str(text).replace(" ", "").split(","):
        if not part:
            continue
        try:
            if "-" in part[1:]:
                a, b = part.split("-", 1)
                out.extend(range(int(a), int(b) + 1))
            else:
                out.append(int(part))
        except ValueError as exc:
            raise ConfigError(f"bad integer list {text!r}") from exc
    return out


def parse_range(text: str) -> np.ndarray:
    """``start:stop:step`` (inclusive of stop) or a single value."""
    parts = str(text).split(":")
    try:
        nums = [float(p) for p in parts]
    except ValueError as exc:
        raise ConfigError(f"bad range {text!r}; expected start:stop:step") from exc
    if len(nums) == 1:
        return np.array(nums)
    if len(nums) != 3:
        raise ConfigError(f"bad range {text!r}; expected start:stop:step")
    start, stop, step = nums
    if step <= 0:
        raise ConfigError("range step must be > 0")
    if stop < start:
        raise ConfigError("empty range: stop < start")
    count = int(np.floor((stop - start) / step + 1e-9)) + 1
    return np.round(start + step * np.arange(count), 12)


def read_config_file(path: str) -> dict[str, str]:
    """``key = value`` lines; ``#`` starts a comment."""
    out = {}
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    for num, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{num}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_").lower()] = value
    return out


@dataclass
class RunConfig:
    command: str
    gamma: list[float] = field(default_factory=lambda: [0.5])
    lambdas: np.ndarray = field(default_factory=lambda: parse_range("0:3:0.01"))
    temperatures: list[float] = field(default_factory=lambda: [0.0])
    rs: list[int] = field(default_factory=lambda: [1])
    n: int = 5
    output: str | None = None
    format: str = "csv"
    figure: str | None = None
    levels: int = 4
    lambda_max: float | None = None
    explicit: set = field(default_factory=set)

    def validate(self):
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        if not self.gamma or not len(self.lambdas) or not self.temperatures or not self.rs:
            raise ConfigError("parameter lists must be non-empty")
        if any(not 0 <= g <= 1 for g in self.gamma):
            raise ConfigError("gamma values must lie in [0, 1]")
        if np.any(self.lambdas < 0):
            raise ConfigError("lambda values must be >= 0")
        if any(t < 0 for t in self.temperatures):
            raise ConfigError("temperatures must be >= 0")
        if any(r < 1 for r in self.rs):
            raise ConfigError("separations must be >= 1")
        if self.command in ("finite-spectrum", "crossings", "fidelity-compare") and not 2 <= self.n <= 12:
            raise ConfigError("n must lie in [2, 12] for finite commands")
        if self.format not in ("csv", "json"):
            raise ConfigError(f"unknown format {self.format!r}")
        if self.command == "reproduce-figure" and self.figure not in FIGURES:
            raise ConfigError(f"--figure must be one of {', '.join(sorted(FIGURES))}")


_KEYS = {
    "gamma": ("gamma", parse_float_list),
    "lambda": ("lambdas", parse_range),
    "t": ("temperatures", parse_float_list),
    "r": ("rs", parse_int_list),
    "n": ("n", int),
    "output": ("output", str),
    "format": ("format", str),
    "figure": ("figure", str),
    "levels": ("levels", int),
    "lambda_max": ("lambda_max", float),
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="xycorr", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", help="key=value file; flags given on the command line win")
    p.add_argument("--gamma", help="comma-separated anisotropies")
    p.add_argument("--lambda", dest="lambda_", metavar="START:STOP:STEP", help="coupling grid")
    p.add_argument("--T", dest="t", help="comma-separated temperatures (0 = ground state)")
    p.add_argument("--r", help="separations, e.g. 1,2,5 or 1-10")
    p.add_argument("--n", help="ring size for finite commands")
    p.add_argument("--figure", help="figure preset for reproduce-figure")
    p.add_argument("--levels", help="number of levels for finite-spectrum")
    p.add_argument("--lambda-max", dest="lambda_max", help="upper scan limit for crossings")
    p.add_argument("--output", "-o", help="output file (stdout if omitted)")
    p.add_argument("--format", choices=("csv", "json"))
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def make_config(argv: list[str] | None) -> RunConfig:
    parser = build_parser()
    ns = parser.parse_args(argv)
    raw: dict[str, str] = {}
    if ns.config:
        raw.update(read_config_file(ns.config))
    flags = {
        "gamma": ns.gamma, "lambda": ns.lambda_, "t": ns.t, "r": ns.r, "n": ns.n,
        "output": ns.output, "format": ns.format, "figure": ns.figure,
        "levels": ns.levels, "lambda_max": ns.lambda_max,
    }
    raw.update({k: v for k, v in flags.items() if v is not None})
    cfg = RunConfig(command=ns.command)
    for key, value in raw.items():
        if key not in _KEYS:
            raise ConfigError(f"unknown config key {key!r}")
        attr, conv = _KEYS[key]
        try:
            setattr(cfg, attr, conv(value))
        except ValueError as exc:
            raise ConfigError(f"bad value for {key}: {value!r}") from exc
        cfg.explicit.add(attr)
    if "format" not in raw and cfg.output and cfg.output.endswith(".json"):
        cfg.format = "json"
    if ns.verbose:
        logging.basicConfig(level=logging.INFO, format="%(name)s: %(message)s")
    cfg.validate()
    return cfg


# ---------------------------------------------------------------- output


@dataclass
class Table:
    key: dict[str, Any]
    columns: tuple[str, ...]
    rows: list[tuple]


def _csv_cell(x) -> str:
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.12g}"
    return str(x)


def render_csv(table: Table) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(table.columns)
    for row in table.rows:
        w.writerow([_csv_cell(x) for x in row])
    return buf.getvalue()


def _plain(x):
    if isinstance(x, dict):
        return {k: _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, np.ndarray)):
        return [_plain(v) for v in x]
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, (float, np.floating)):
        return float(x)
    return x


def render_json(obj) -> str:
    return json.dumps(_plain(obj), indent=2, ensure_ascii=False) + "\n"


def table_json(table: Table) -> dict:
    return {**table.key, "columns": list(table.columns), "rows": [dict(zip(table.columns, r)) for r in table.rows]}


def _suffix_for(key: dict) -> str:
    return "".join(f"_{k}{_csv_cell(v)}" for k, v in key.items())


def write_tables(cfg: RunConfig, tables: list[Table]) -> list[str]:
    """Write each table; with several tables and a file target, one file per table."""
    written = []
    if cfg.output is None:
        if cfg.format == "json":
            sys.stdout.write(render_json([table_json(t) for t in tables]))
        else:
            for i, t in enumerate(tables):
                if len(tables) > 1:
                    sys.stdout.write(("\n" if i else "") + "# " + _suffix_for(t.key).lstrip("_") + "\n")
                sys.stdout.write(render_csv(t))
        return written
    out = Path(cfg.output)
    out.parent.mkdir(parents=True, exist_ok=True)
    for t in tables:
        path = out if len(tables) == 1 else out.with_name(out.stem + _suffix_for(t.key) + out.suffix)
        text = render_json(table_json(t)) if cfg.format == "json" else render_csv(t)
        path.write_text(text, encoding="utf-8", newline="\n")
        written.append(str(path))
    return written


def write_object(cfg: RunConfig, obj) -> None:
    text = render_json(obj)
    if cfg.output is None:
        sys.stdout.write(text)
    else:
        Path(cfg.output).parent.mkdir(parents=True, exist_ok=True)
        Path(cfg.output).write_text(text, encoding="utf-8", newline="\n")


# ---------------------------------------------------------------- commands


def _sweep_tables(gammas, temps, rs, lambdas, names, *, derivative=False) -> list[Table]:
    tables = []
    for g in gammas:
        for t in temps:
            series = analysis.thermo_sweep(g, t, rs, lambdas, names)
            tables.append(_series_table(g, t, rs, lambdas, names, series, derivative))
    return tables


def _series_table(g, t, rs, lambdas, names, series, derivative=False) -> Table:
    cols = {}
    for name in names:
        for r in rs:
            cols[(name, r)] = series[(name, r)].values
            if derivative:
                cols[(f"d{name}/dlambda", r)] = analysis.derivative_lambda(series[(name, r)]).values
    labels = sorted({k[0] for k in cols}, key=[k[0] for k in cols].index)
    rows = []
    for i, lam in enumerate(lambdas):
        for r in rs:
            for label in labels:
                rows.append((float(lam), r, float(cols[(label, r)][i]), label))
    return Table({"gamma": g, "T": t}, SWEEP_COLUMNS, rows)


def cmd_correlators(cfg: RunConfig) -> None:
    tables = []
    for g in cfg.gamma:
        for t in cfg.temperatures:
            rows = []
            for lam in cfg.lambdas:
                model = thermo.ModelPoint(float(lam), g, t)
                try:
                    gt = thermo.GTable.build(model, max(cfg.rs) + 1)
                    for r in cfg.rs:
                        c = thermo.correlators(gt, r)
                        for name in ("sigma_z", "xx", "yy", "zz"):
                            val = c.sigma_z_mean if name == "sigma_z" else getattr(c, name)
                            rows.append((float(lam), r, val, name))
                except XYCorrError as exc:
                    raise PointFailure({"lambda": float(lam), "gamma": g, "T": t}, exc) from exc
            tables.append(Table({"gamma": g, "T": t}, SWEEP_COLUMNS, rows))
    write_tables(cfg, tables)


def cmd_discord_sweep(cfg: RunConfig) -> None:
    write_tables(cfg, _sweep_tables(cfg.gamma, cfg.temperatures, cfg.rs, cfg.lambdas, ("discord",)))


def cmd_eof_sweep(cfg: RunConfig) -> None:
    write_tables(cfg, _sweep_tables(cfg.gamma, cfg.temperatures, cfg.rs, cfg.lambdas, ("eof",)))


def _spectrum_tables(n, gammas, lambdas, levels) -> list[Table]:
    tables = []
    for g in gammas:
        e = finite.energy_levels(n, g, lambdas, levels)
        rows = [
            (float(lam), n, k, float(e[i, k]), "energy")
            for i, lam in enumerate(lambdas)
            for k in range(e.shape[1])
        ]
        tables.append(Table({"gamma": g, "n": n}, ("lambda", "n", "level", "value", "measure"), rows))
    return tables


def cmd_finite_spectrum(cfg: RunConfig) -> None:
    write_tables(cfg, _spectrum_tables(cfg.n, cfg.gamma, cfg.lambdas, cfg.levels))


def cmd_crossings(cfg: RunConfig) -> None:
    reports = []
    for g in cfg.gamma:
        rep = finite.find_crossings(g, cfg.n, cfg.lambda_max)
        reports.append({"gamma": g, "n": cfg.n, "count": rep.count, "crossings": rep.crossings, "min_gaps": rep.min_gaps})
    if cfg.format == "csv":
        rows = [(r["gamma"], r["n"], i, lam) for r in reports for i, lam in enumerate(r["crossings"])]
        write_tables(cfg, [Table({}, ("gamma", "n", "index", "lambda"), rows)])
    else:
        write_object(cfg, reports[0] if len(reports) == 1 else reports)


def _etcp_records(gammas, rs, temps) -> list[dict]:
    out = []
    for g in gammas:
        for r, series in analysis.etcp_series(g, rs, temps).items():
            fit = analysis.fit_ansatz(series)
            out.append({
                "gamma": g, "r": r, "alpha": fit.alpha, "nu": fit.nu, "residual": fit.residual,
                "temperatures": series.temperatures, "lambda_tc": series.lambda_tc,
            })
    return out


def cmd_etcp_fit(cfg: RunConfig) -> None:
    temps = cfg.temperatures if "temperatures" in cfg.explicit else analysis.DEFAULT_TEMPERATURES
    records = _etcp_records(cfg.gamma, cfg.rs if "rs" in cfg.explicit else [15], temps)
    if cfg.format == "csv":
        rows = [
            (rec["gamma"], rec["r"], float(t), float(l), rec["alpha"], rec["nu"], rec["residual"])
            for rec in records
            for t, l in zip(rec["temperatures"], rec["lambda_tc"])
        ]
        write_tables(cfg, [Table({}, ("gamma", "r", "T", "lambda_tc", "alpha", "nu", "residual"), rows)])
    else:
        write_object(cfg, records[0] if len(records) == 1 else records)


def _fidelity_tables(n, gammas, temps, rs, lambdas) -> list[Table]:
    tables = []
    for g in gammas:
        for t in temps:
            f = analysis.compare_finite_infinite(n, g, t, rs, lambdas)
            rows = [(float(lam), r, float(f[j, i]), "fidelity") for i, lam in enumerate(lambdas) for j, r in enumerate(rs)]
            tables.append(Table({"gamma": g, "T": t}, SWEEP_COLUMNS, rows))
    return tables


def cmd_fidelity_compare(cfg: RunConfig) -> None:
    n = cfg.n if "n" in cfg.explicit else 10
    rs = cfg.rs if "rs" in cfg.explicit else list(range(1, n // 2 + 1))
    write_tables(cfg, _fidelity_tables(n, cfg.gamma, cfg.temperatures, rs, cfg.lambdas))


# ---------------------------------------------------------------- figure presets


def _grid(cfg, default):
    return cfg.lambdas if "lambdas" in cfg.explicit else parse_range(default)


def _fig_thermo(names, rs, gammas, temps, default_grid, derivative=False):
    def run(cfg):
        g = cfg.gamma if "gamma" in cfg.explicit else gammas
        t = cfg.temperatures if "temperatures" in cfg.explicit else temps
        r = cfg.rs if "rs" in cfg.explicit else rs
        lams = _grid(cfg, default_grid)
        return [
            _series_table(gg, tt, r, lams, names, analysis.thermo_sweep(gg, tt, r, lams, names), derivative)
            for gg in g
            for tt in t
        ]
    return run


def _fig_finite(n, rs, gammas, default_grid):
    def run(cfg):
        g = cfg.gamma if "gamma" in cfg.explicit else gammas
        t = cfg.temperatures if "temperatures" in cfg.explicit else [0.0]
        lams = _grid(cfg, default_grid)
        names = ("eof", "discord")
        return [
            _series_table(gg, tt, rs, lams, names, analysis.finite_sweep(n, gg, tt, rs, lams, names))
            for gg in g
            for tt in t
        ]
    return run


def _fig_gap(n):
    def run(cfg):
        g = cfg.gamma if "gamma" in cfg.explicit else list(np.round(np.arange(0, 1.0001, 0.05), 10))
        lams = _grid(cfg, "0:3:0.01")
        tables = []
        for gg in g:
            e = finite.energy_levels(n, gg, lams, 2)
            rows = [(float(lam), n, float(e[i, 1] - e[i, 0]), "gap") for i, lam in enumerate(lams)]
            tables.append(Table({"gamma": gg, "n": n}, ("lambda", "n", "value", "measure"), rows))
        return tables
    return run


def _fig_levels(cfg):
    g = cfg.gamma if "gamma" in cfg.explicit else [0.5]
    return _spectrum_tables(5, g, _grid(cfg, "0.9:1.5:0.002"), 4)


def _fig_etcp(gammas, rs):
    def run(cfg):
        g = cfg.gamma if "gamma" in cfg.explicit else gammas
        r = cfg.rs if "rs" in cfg.explicit else rs
        temps = cfg.temperatures if "temperatures" in cfg.explicit else analysis.DEFAULT_TEMPERATURES
        rows = []
        for rec in _etcp_records(g, r, temps):
            for t, l in zip(rec["temperatures"], rec["lambda_tc"]):
                rows.append((rec["gamma"], rec["r"], float(t), float(l), rec["alpha"], rec["nu"], rec["residual"]))
        return [Table({}, ("gamma", "r", "T", "lambda_tc", "alpha", "nu", "residual"), rows)]
    return run


def _fig_fidelity(cfg):
    g = cfg.gamma if "gamma" in cfg.explicit else [0.4, 0.8]
    return _fidelity_tables(10, g, [0.0], list(range(1, 6)), _grid(cfg, "0:3:0.05"))


_GAMMAS = list(np.round(np.arange(0.05, 1.0001, 0.05), 10))
_TEMPS = list(np.round(np.arange(0, 0.5001, 0.05), 10))

FIGURES = {
    "1a": _fig_thermo(("eof",), list(range(1, 16)), [0.5], [0.0], "0:3:0.01"),
    "1b": _fig_thermo(("discord",), list(range(1, 16)), [0.5], [0.0], "0:3:0.01"),
    "2a": _fig_thermo(("discord",), [15], [0.5], [0.0], "0:3:0.002", derivative=True),
    "2b": _fig_thermo(("discord",), [15], _GAMMAS, [0.0], "0:3:0.01"),
    "3ab": _fig_thermo(("eof",), [1], [0.5], _TEMPS, "0:3:0.005", derivative=True),
    "3cd": _fig_thermo(("discord",), [1], [0.5], _TEMPS, "0:3:0.005", derivative=True),
    "3ef": _fig_thermo(("discord",), [15], [0.5], _TEMPS, "0:3:0.005", derivative=True),
    "4a": _fig_etcp([0.5], [5, 10, 15, 25]),
    "4b": _fig_etcp([0.15, 0.3, 0.5, 0.75, 1.0], [15]),
    "5a": _fig_gap(3),
    "5b": _fig_gap(4),
    "5c": _fig_gap(5),
    "5d": _fig_levels,
    "6": _fig_finite(5, [1, 2], _GAMMAS, "0:3:0.01"),
    "7": _fig_finite(10, [1, 5], _GAMMAS, "0:3:0.02"),
    "9": _fig_fidelity,
}


def cmd_reproduce_figure(cfg: RunConfig) -> None:
    write_tables(cfg, FIGURES[cfg.figure](cfg))


HANDLERS = {
    "correlators": cmd_correlators,
    "discord-sweep": cmd_discord_sweep,
    "eof-sweep": cmd_eof_sweep,
    "finite-spectrum": cmd_finite_spectrum,
    "crossings": cmd_crossings,
    "etcp-fit": cmd_etcp_fit,
    "fidelity-compare": cmd_fidelity_compare,
    "reproduce-figure": cmd_reproduce_figure,
}


def run(cfg: RunConfig) -> int:
    try:
        HANDLERS[cfg.command](cfg)
    except PointFailure as exc:
        print(f"xycorr: numeric failure: {exc}", file=sys.stderr)
        return 1
    except XYCorrError as exc:
        print(f"xycorr: numeric failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


def main(argv: list[str] | None = None) -> int:
    try:
        cfg = make_config(argv)
    except ConfigError as exc:
        print(f"xycorr: config error: {exc}", file=sys.stderr)
        return 2
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
