"""Command-line surface: formula evaluation, experiments, and table export.

Commands
    exact     lower bound, exact DP value, upper bound for P(M_N < K-1)
    bounds    envelope CSV over ranges of N and K
    tables    the three reference tables (2 is deterministic, 1/3 seeded)
    simulate  run experiment configs, emit TrialReport JSON + per-trial CSV
    slln      ratio-trend report over an experiment's N grid
    gamma     series classifier verdict, optional empirical hit scan
    replay    re-execute a run manifest and verify byte-identical outputs

Every command writes its files (plus a manifest) into --out, defaulting to
the SWITCHRUN_OUT environment variable and then ./out.  Exit codes:
0 success, 2 usage/config error, 3 internal-consistency error (including
replay mismatches).
"""

from __future__ import annotations

import argparse
import configparser
import json
import os
import re
import sys
from pathlib import Path

from . import __version__
from .asymptotics import GammaFamily, classify_gamma_series
from .core import BernoulliParams
from .errors import ConfigError, DomainError, InternalConsistencyError
from .exact import bounds_mn_less, enumerate_mn_dist, exact_mn_cdf
from .montecarlo import ExperimentConfig, gamma_hit_scan, run_trials
from .prng import derive_seed
from .reporting import (
    RunManifest,
    TableData,
    build_table_loggrid,
    build_table_patterns,
    build_table_repeat_runs,
    fmt_g12,
    sha256_hex,
)

OUT_ENV = "SWITCHRUN_OUT"
DEFAULT_SEED = 20260810
EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INTERNAL = 3

_FMT_EXT = {"csv": "csv", "json": "json", "md": "md"}
_NAME_RE = re.compile(r"^[A-Za-z0-9_.-]+$")


# ---------------------------------------------------------------------------
# experiment config files
# ---------------------------------------------------------------------------

def parse_experiment_config(path: str) -> list[tuple[str, ExperimentConfig]]:
    """Parse a flat key/value config with one section per experiment.

    Grammar (INI style)::

        [baseline]
        p = 0.5
        n_grid = 1000, 100000     ; integers, comma or space separated
        trials = 50
        seed = 1
        epsilon = 0.5             ; optional, default 0.5
        gamma_a = 0.5             ; optional, both gamma_* or neither
        gamma_b = 0.0

    Parse errors carry configparser's line numbers; value errors name the
    section and key.
    """
    cp = configparser.ConfigParser()
    try:
        with open(path, encoding="utf-8") as f:
            cp.read_file(f, source=path)
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from None
    except configparser.Error as e:
        raise ConfigError(str(e)) from None
    if not cp.sections():
        raise ConfigError(f"{path}: no experiment sections found")

    known = {"p", "n_grid", "trials", "seed", "epsilon", "gamma_a", "gamma_b"}
    experiments = []
    for section in cp.sections():
        if not _NAME_RE.match(section):
            raise ConfigError(f"[{section}]: section names must match {_NAME_RE.pattern}")
        sec = cp[section]
        unknown = set(sec) - known
        if unknown:
            raise ConfigError(f"[{section}]: unknown keys {sorted(unknown)}")
        try:
            p = float(sec["p"])
            n_grid = tuple(int(tok) for tok in re.split(r"[,\s]+", sec["n_grid"].strip()) if tok)
            trials = int(sec["trials"])
            seed = int(sec["seed"])
            epsilon = float(sec.get("epsilon", "0.5"))
        except KeyError as e:
            raise ConfigError(f"[{section}]: missing required key {e.args[0]!r}") from None
        except ValueError as e:
            raise ConfigError(f"[{section}]: {e}") from None
        has_a, has_b = "gamma_a" in sec, "gamma_b" in sec
        if has_a != has_b:
            raise ConfigError(f"[{section}]: gamma_a and gamma_b must be given together")
        gamma = None
        if has_a:
            try:
                gamma = GammaFamily(float(sec["gamma_a"]), float(sec["gamma_b"]))
            except (ValueError, DomainError) as e:
                raise ConfigError(f"[{section}]: gamma: {e}") from None
        try:
            cfg = ExperimentConfig(
                p=p, n_grid=n_grid, trials=trials, seed=seed, epsilon=epsilon, gamma=gamma
            )
        except DomainError as e:
            raise ConfigError(f"[{section}]: {e}") from None
        experiments.append((section, cfg))
    return experiments


def _experiments_to_params(experiments: list[tuple[str, ExperimentConfig]]) -> list[dict]:
    out = []
    for name, cfg in experiments:
        out.append(
            {
                "name": name,
                "p": cfg.p,
                "n_grid": list(cfg.n_grid),
                "trials": cfg.trials,
                "seed": cfg.seed,
                "epsilon": cfg.epsilon,
                "gamma_a": None if cfg.gamma is None else cfg.gamma.a,
                "gamma_b": None if cfg.gamma is None else cfg.gamma.b,
            }
        )
    return out


def _experiments_from_params(entries: list[dict]) -> list[tuple[str, ExperimentConfig]]:
    out = []
    for e in entries:
        gamma = None
        if e.get("gamma_a") is not None:
            gamma = GammaFamily(float(e["gamma_a"]), float(e["gamma_b"]))
        out.append(
            (
                e["name"],
                ExperimentConfig(
                    p=float(e["p"]),
                    n_grid=tuple(int(n) for n in e["n_grid"]),
                    trials=int(e["trials"]),
                    seed=int(e["seed"]),
                    epsilon=float(e["epsilon"]),
                    gamma=gamma,
                ),
            )
        )
    return out


def parse_range(spec: str, name: str) -> list[int]:
    """'12' -> [12]; 'a:b' -> a..b; 'a:b:s' -> a, a+s, ... <= b."""
    parts = spec.split(":")
    try:
        nums = [int(x) for x in parts]
    except ValueError:
        raise ConfigError(f"--{name}: expected INT or A:B or A:B:STEP, got {spec!r}") from None
    if len(nums) == 1:
        return nums
    if len(nums) == 2:
        a, b = nums
        step = 1
    elif len(nums) == 3:
        a, b, step = nums
    else:
        raise ConfigError(f"--{name}: expected INT or A:B or A:B:STEP, got {spec!r}")
    if step < 1 or b < a:
        raise ConfigError(f"--{name}: empty or descending range {spec!r}")
    return list(range(a, b + 1, step))


# ---------------------------------------------------------------------------
# command cores: resolved parameters -> (files, stdout lines)
# ---------------------------------------------------------------------------

def _exec_exact(p: dict):
    N, K = int(p["N"]), int(p["K"])
    params = BernoulliParams(float(p["p"]))
    exact = exact_mn_cdf(N, K, params)
    if N >= 2 * K:
        env = bounds_mn_less(N, K, params)
        lower, upper = fmt_g12(env.lower), fmt_g12(env.upper)
        ok = env.lower - 1e-12 <= exact <= env.upper + 1e-12
        verdict = "OK" if ok else "FAIL"
    else:
        lower = upper = ""
        verdict = "NA"
    row = f"{lower},{fmt_g12(exact)},{upper},{verdict}"
    table = TableData(
        title="sandwich bounds and exact value for P(M_N < K-1)",
        columns=("N", "K", "p", "lower", "exact", "upper", "verdict"),
        rows=((str(N), str(K), fmt_g12(params.p), lower, fmt_g12(exact), upper, verdict),),
    )
    ext = _FMT_EXT[p["format"]]
    return {f"exact.{ext}": table.render(p["format"])}, [row]


def _exec_dist(p: dict):
    N = int(p["N"])
    params = BernoulliParams(float(p["p"]))
    dist = enumerate_mn_dist(N, params)
    fmt = p["format"]
    if fmt == "csv":
        content = dist.to_csv()
    elif fmt == "json":
        content = json.dumps(dist.to_json_obj(), indent=2) + "\n"
    else:
        table = TableData(
            title=f"P(M_N < K-1) for N={N}, p={fmt_g12(params.p)}",
            columns=("K", "cdf"),
            rows=tuple((str(k + 1), fmt_g12(v)) for k, v in enumerate(dist.cdf)),
        )
        content = table.to_md()
    ext = _FMT_EXT[fmt]
    return {f"dist.{ext}": content}, [f"exact law of M_{N} written ({N + 1} cdf points)"]


def _exec_bounds(p: dict):
    params = BernoulliParams(float(p["p"]))
    rows = []
    for K in p["k_values"]:
        for N in p["n_values"]:
            if N >= 2 * K >= 2:
                env = bounds_mn_less(N, K, params)
                rows.append(
                    (str(N), str(K), fmt_g12(params.p), fmt_g12(env.lower), fmt_g12(env.upper))
                )
    table = TableData(
        title="sandwich bounds on P(M_N < K-1)",
        columns=("N", "K", "p", "lower", "upper"),
        rows=tuple(rows),
    )
    ext = _FMT_EXT[p["format"]]
    return {f"bounds.{ext}": table.render(p["format"])}, [f"wrote {len(rows)} envelope rows"]


def _exec_tables(p: dict):
    table_id = int(p["table"])
    seed = int(p["seed"])
    if table_id == 1:
        table = build_table_patterns(seed)
    elif table_id == 2:
        table = build_table_loggrid()
    elif table_id == 3:
        table = build_table_repeat_runs(seed)
    else:
        raise DomainError(f"table must be 1, 2, or 3, got {table_id}")
    ext = _FMT_EXT[p["format"]]
    return {f"table{table_id}.{ext}": table.render(p["format"])}, [f"table {table_id} written"]


def _exec_simulate(p: dict):
    files = {}
    lines = []
    for name, cfg in _experiments_from_params(p["experiments"]):
        report = run_trials(cfg, workers=int(p.get("workers", 1)))
        files[f"{name}.report.json"] = json.dumps(report.to_json_obj(), indent=2) + "\n"
        files[f"{name}.trials.csv"] = report.trial_csv()
        lines.append(f"{name}: {len(report.points)} grid points x {cfg.trials} trials")
    return files, lines


def _exec_slln(p: dict):
    files = {}
    lines = []
    fmt = p["format"]
    ext = _FMT_EXT[fmt]
    for name, cfg in _experiments_from_params(p["experiments"]):
        report = run_trials(cfg, workers=int(p.get("workers", 1)))
        rows = []
        for pt in report.points:
            rows.append(
                (
                    str(pt.N),
                    fmt_g12(pt.mean_m),
                    fmt_g12(pt.mean_ratio),
                    fmt_g12(abs(1.0 - pt.mean_ratio)),
                )
            )
        table = TableData(
            title=f"SLLN ratio trend for p={fmt_g12(cfg.p)} ({cfg.trials} trials per N)",
            columns=("N", "mean_M", "mean_ratio", "abs_gap_to_1"),
            rows=tuple(rows),
        )
        files[f"{name}.slln.{ext}"] = table.render(fmt)
        trend = " -> ".join(fmt_g12(pt.mean_ratio) for pt in report.points)
        lines.append(f"{name}: mean ratio {trend}")
    return files, lines


def _exec_gamma(p: dict):
    fam = GammaFamily(float(p["a"]), float(p["b"]))
    params = BernoulliParams(float(p["p"]))
    verdict = classify_gamma_series(fam, params).value
    result = {
        "a": fam.a,
        "b": fam.b,
        "p": params.p,
        "verdict": verdict,
        "runs": [],
    }
    lines = [verdict]
    runs = int(p["runs"])
    if runs > 0:
        n_min, n_max = int(p["n_min"]), int(p["n_max"])
        seed = int(p["seed"])
        hits = 0
        for r in range(runs):
            first = gamma_hit_scan(params, fam, derive_seed(seed, r), n_max, n_min)
            result["runs"].append({"run": r, "first_hit_n": first})
            hits += first is not None
        result["hit_fraction"] = hits / runs
        lines.append(f"hit fraction: {hits}/{runs} (scan {n_min} <= N <= {n_max})")
    return {"gamma.json": json.dumps(result, indent=2) + "\n"}, lines


_EXECUTORS = {
    "exact": _exec_exact,
    "dist": _exec_dist,
    "bounds": _exec_bounds,
    "tables": _exec_tables,
    "simulate": _exec_simulate,
    "slln": _exec_slln,
    "gamma": _exec_gamma,
}


def execute_command(command: str, parameters: dict):
    """Pure command core: resolved parameters in, file contents out.

    Both normal runs and manifest replays go through here, which is what
    makes replays byte-identical by construction.
    """
    try:
        fn = _EXECUTORS[command]
    except KeyError:
        raise ConfigError(f"unknown command {command!r}") from None
    return fn(parameters)


# ---------------------------------------------------------------------------
# argument parsing and dispatch
# ---------------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="switchrun",
        description="Longest consecutive-switch statistics: exact values, bounds, "
        "thresholds, and seeded Monte Carlo experiments.",
    )
    parser.add_argument("--version", action="version", version=f"switchrun {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(sp):
        sp.add_argument("--format", choices=("csv", "json", "md"), default="csv")
        sp.add_argument("--out", help=f"output directory (default: ${OUT_ENV} or ./out)")

    sp = sub.add_parser("exact", help="bounds + exact DP value for P(M_N < K-1)")
    sp.add_argument("--N", type=int, required=True)
    sp.add_argument("--K", type=int, required=True)
    sp.add_argument("--p", type=float, required=True)
    add_common(sp)

    sp = sub.add_parser("dist", help="exact law of M_N by enumeration (N <= 24)")
    sp.add_argument("--N", type=int, required=True)
    sp.add_argument("--p", type=float, required=True)
    add_common(sp)

    sp = sub.add_parser("bounds", help="envelope table over N and K ranges")
    sp.add_argument("--N", required=True, help="INT or A:B or A:B:STEP")
    sp.add_argument("--K", required=True, help="INT or A:B or A:B:STEP")
    sp.add_argument("--p", type=float, required=True)
    add_common(sp)

    sp = sub.add_parser("tables", help="emit reference table 1, 2, or 3")
    sp.add_argument("--table", type=int, choices=(1, 2, 3), required=True)
    sp.add_argument("--seed", type=int, default=DEFAULT_SEED)
    add_common(sp)

    sp = sub.add_parser("simulate", help="run experiment configs")
    sp.add_argument("--config", required=True)
    sp.add_argument("--workers", type=int, default=1)
    add_common(sp)

    sp = sub.add_parser("slln", help="ratio-trend report from an experiment config")
    sp.add_argument("--config", required=True)
    sp.add_argument("--workers", type=int, default=1)
    add_common(sp)

    sp = sub.add_parser("gamma", help="series classifier; optional empirical scan")
    sp.add_argument("--a", type=float, required=True)
    sp.add_argument("--b", type=float, required=True)
    sp.add_argument("--p", type=float, required=True)
    sp.add_argument("--runs", type=int, default=0, help="empirical scan runs (0 = none)")
    sp.add_argument("--seed", type=int, default=DEFAULT_SEED)
    sp.add_argument("--N-max", dest="n_max", type=int, default=100000)
    sp.add_argument("--N-min", dest="n_min", type=int, default=2)
    add_common(sp)

    sp = sub.add_parser("replay", help="re-run a manifest, verify byte-identical outputs")
    sp.add_argument("--manifest", required=True)
    sp.add_argument("--out", help=f"output directory (default: ${OUT_ENV} or ./out)")

    return parser


def _resolve_out(arg_out: str | None) -> Path:
    return Path(arg_out or os.environ.get(OUT_ENV) or "out")


def _resolved_parameters(args: argparse.Namespace) -> dict:
    cmd = args.command
    if cmd == "exact":
        return {"N": args.N, "K": args.K, "p": args.p, "format": args.format}
    if cmd == "dist":
        return {"N": args.N, "p": args.p, "format": args.format}
    if cmd == "bounds":
        return {
            "n_values": parse_range(args.N, "N"),
            "k_values": parse_range(args.K, "K"),
            "p": args.p,
            "format": args.format,
        }
    if cmd == "tables":
        return {"table": args.table, "seed": args.seed, "format": args.format}
    if cmd in ("simulate", "slln"):
        experiments = parse_experiment_config(args.config)
        return {
            "experiments": _experiments_to_params(experiments),
            "workers": args.workers,
            "format": args.format,
        }
    if cmd == "gamma":
        return {
            "a": args.a,
            "b": args.b,
            "p": args.p,
            "runs": args.runs,
            "seed": args.seed,
            "n_max": args.n_max,
            "n_min": args.n_min,
            "format": args.format,
        }
    raise ConfigError(f"unknown command {cmd!r}")


def _write_outputs(out_dir: Path, command: str, parameters: dict, files: dict) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    for name, content in files.items():
        with open(out_dir / name, "w", encoding="utf-8", newline="\n") as f:
            f.write(content)
    manifest = RunManifest(
        artifact_version=__version__,
        command=command,
        parameters=parameters,
        seed=parameters.get("seed"),
        outputs={name: sha256_hex(content) for name, content in files.items()},
    )
    with open(out_dir / f"{command}.manifest.json", "w", encoding="utf-8", newline="\n") as f:
        f.write(manifest.to_json())


def _run_replay(args: argparse.Namespace) -> int:
    try:
        with open(args.manifest, encoding="utf-8") as f:
            manifest = RunManifest.from_json(f.read())
    except OSError as e:
        raise ConfigError(f"cannot read manifest: {e}") from None
    if manifest.artifact_version != __version__:
        print(
            f"warning: manifest was written by version {manifest.artifact_version}, "
            f"this is {__version__}",
            file=sys.stderr,
        )
    files, _ = execute_command(manifest.command, manifest.parameters)
    out_dir = _resolve_out(args.out)
    _write_outputs(out_dir, manifest.command, manifest.parameters, files)
    mismatches = []
    for name, digest in manifest.outputs.items():
        got = sha256_hex(files[name]) if name in files else "<missing>"
        status = "OK" if got == digest else "MISMATCH"
        if status != "OK":
            mismatches.append(name)
        print(f"{name}: {status}")
    extra = set(files) - set(manifest.outputs)
    if extra:
        mismatches.extend(sorted(extra))
        print(f"unexpected outputs: {sorted(extra)}")
    if mismatches:
        print(f"replay mismatch in {len(mismatches)} file(s)", file=sys.stderr)
        return EXIT_INTERNAL
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:  # argparse already printed the diagnostic
        return int(e.code) if e.code else EXIT_OK
    try:
        if args.command == "replay":
            return _run_replay(args)
        parameters = _resolved_parameters(args)
        files, lines = execute_command(args.command, parameters)
        _write_outputs(_resolve_out(args.out), args.command, parameters, files)
        for line in lines:
            print(line)
        return EXIT_OK
    except (DomainError, ConfigError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except InternalConsistencyError as e:
        print(f"internal consistency error: {e}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
