"""Experiment driver.

Subcommands ``spectrum``, ``fredholm``, ``verify``, and ``sweep`` read one
JSON config file (flags override file values), run the experiment, and write
CSV + JSON results.  Output is deterministic: rerunning a subcommand with the
same config and seed reproduces every file byte for byte.  The output
directory is deliberately excluded from the echoed config so runs into
different directories stay comparable.

Exit codes: 0 success, 1 invalid config or usage, 2 numerical-check failure,
3 I/O failure.
"""

from __future__ import annotations

import copy
import dataclasses
import json
import math
import sys
import warnings
from pathlib import Path

import click
import numpy as np

from . import __version__
from .backend import backend_name
from .errors import (
    ConfigError,
    DecayViolationError,
    DiscretizationTooCoarseError,
    EigensolverError,
    InconsistentSpectrumError,
    InvalidParameterError,
    LosDofError,
)
from .fredholm import build_table, default_quadrature_n, logdet_upper_bound
from .model import ClusterParams, derive, sample_network
from .channel import build_g_matrix, build_los_matrix, normalize_los
from .montecarlo import (
    bound_sweep,
    claim_sim_experiment,
    concentration_experiment,
    fredholm_identity_check,
    grid_from_m_law,
)
from .spectra import effective_dof, gram_spectrum, log_det_capacity

LN2 = math.log(2.0)

DEFAULTS = {
    "scenario": {"n": 500, "area": 10000.0, "distance": 300.0, "wavelength": 0.1},
    "seed": 1,
    "trials": 1,
    "threshold": 1.0,
    "quadrature_n": None,
    "bits": False,
    "out": "results",
    "fredholm": {"m": None, "k_max": None},
    "sweep": {
        "n_values": [100, 200, 400, 800],
        "m_exponents": [0.6, 0.8],
        "wavelength": 0.1,
        "d_factor": 4.0,
    },
    "verify": {
        "checks": ["identity", "claim", "envelopes", "concentration"],
        "identity_orders": [1, 2, 3],
        "identity_ms": [2.0, 5.0],
        "identity_trials": 100000,
        "claim_trials": 3,
        "envelope_trials": 3,
        "concentration_n_values": [100, 200, 400, 800],
        "concentration_trials": 30,
        "concentration_m_exponent": 0.6,
        "debug_corrupt_dk": False,
    },
}


class VerificationFailure(LosDofError):
    """One or more verify checks failed; maps to exit code 2."""


# ---------------------------------------------------------------------------
# config handling


def _merge(base: dict, override: dict, path: str = "") -> dict:
    merged = copy.deepcopy(base)
    for key, value in override.items():
        where = f"{path}.{key}" if path else key
        if key not in base:
            raise ConfigError(f"unknown config key '{where}'")
        if isinstance(base[key], dict):
            if not isinstance(value, dict):
                raise ConfigError(f"config key '{where}' must be an object")
            merged[key] = _merge(base[key], value, where)
        else:
            merged[key] = value
    return merged


def load_config(path: str | None, overrides: dict | None = None) -> dict:
    """Defaults, overlaid with the config file, overlaid with CLI flags."""
    config = copy.deepcopy(DEFAULTS)
    if path is not None:
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config file {path}: {exc}") from exc
        try:
            loaded = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(
                f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"
            ) from exc
        if not isinstance(loaded, dict):
            raise ConfigError(f"{path}: top level must be a JSON object")
        config = _merge(config, loaded)
    for key, value in (overrides or {}).items():
        if value is not None:
            config[key] = value
    _validate_config(config)
    return config


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise ConfigError(message)


def _validate_config(config: dict) -> None:
    scenario = config["scenario"]
    try:
        scenario_params(config)
    except InvalidParameterError as exc:
        raise ConfigError(f"scenario: {exc}") from exc
    _require(isinstance(config["seed"], int) and config["seed"] >= 0, "seed must be a non-negative integer")
    _require(isinstance(config["trials"], int) and config["trials"] >= 1, "trials must be an integer >= 1")
    _require(
        isinstance(config["threshold"], (int, float)) and config["threshold"] > 0,
        "threshold must be a positive number",
    )
    qn = config["quadrature_n"]
    _require(qn is None or (isinstance(qn, int) and qn >= 2), "quadrature_n must be an integer >= 2")
    _require(isinstance(config["bits"], bool), "bits must be a boolean")
    sweep = config["sweep"]
    _require(
        isinstance(sweep["n_values"], list) and sweep["n_values"] != [] and all(isinstance(v, int) and v >= 1 for v in sweep["n_values"]),
        "sweep.n_values must be a non-empty list of integers >= 1",
    )
    _require(
        isinstance(sweep["m_exponents"], list) and sweep["m_exponents"] != [],
        "sweep.m_exponents must be a non-empty list",
    )
    verify = config["verify"]
    known = {"identity", "claim", "envelopes", "concentration"}
    _require(isinstance(verify["checks"], list), "verify.checks must be a list")
    for name in verify["checks"]:
        _require(name in known, f"verify.checks contains unknown check '{name}' (known: {sorted(known)})")
    _require(scenario["n"] >= 1, "scenario.n must be >= 1")


def scenario_params(config: dict) -> ClusterParams:
    s = config["scenario"]
    for key in ("n", "area", "distance", "wavelength"):
        if key not in s:
            raise InvalidParameterError(f"missing scenario key '{key}'")
    return ClusterParams(n=s["n"], area=s["area"], distance=s["distance"], wavelength=s["wavelength"])


def echoed_config(config: dict) -> dict:
    """Effective config as embedded in outputs; excludes the output path."""
    echoed = copy.deepcopy(config)
    echoed.pop("out", None)
    return echoed


# ---------------------------------------------------------------------------
# serialization


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def _jsonable(value):
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_jsonable(v) for v in value.tolist()]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    return value


def _meta_lines(config: dict) -> list[str]:
    canonical = json.dumps(_jsonable(echoed_config(config)), sort_keys=True, separators=(",", ":"))
    return [
        f"# version: {__version__}",
        f"# backend: {backend_name()}",
        f"# seed: {config['seed']}",
        f"# config: {canonical}",
    ]


def write_csv(path: Path, config: dict, header: list[str], rows: list[list]) -> None:
    lines = _meta_lines(config)
    lines.append(",".join(header))
    lines.extend(",".join(_fmt(v) for v in row) for row in rows)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def write_json(path: Path, config: dict, payload: dict) -> None:
    body = {
        "version": __version__,
        "backend": backend_name(),
        "seed": config["seed"],
        "config": echoed_config(config),
    }
    body.update(payload)
    path.write_text(json.dumps(_jsonable(body), sort_keys=True, indent=2) + "\n", encoding="utf-8", newline="\n")


def _capacity_out(nats: float, bits: bool) -> float:
    return nats / LN2 if bits else nats


# ---------------------------------------------------------------------------
# subcommands


def run_spectrum(config: dict) -> Path:
    """Eigenvalue overlay of nP HH* and GG* plus a capacity summary."""
    params = scenario_params(config)
    derived = derive(params)
    bits = config["bits"]
    pos = sample_network(params, config["seed"])
    spec_h = gram_spectrum(normalize_los(build_los_matrix(pos, params), derived, params.n))
    spec_g = gram_spectrum(build_g_matrix(pos, derived.m))
    cap_h = log_det_capacity(spec_h)
    cap_g = log_det_capacity(spec_g)
    out = Path(config["out"])
    out.mkdir(parents=True, exist_ok=True)
    rows = [
        [i + 1, spec_h.eigenvalues[i], spec_g.eigenvalues[i]]
        for i in range(params.n)
    ]
    write_csv(out / "spectrum.csv", config, ["index", "eig_H", "eig_G"], rows)
    write_json(
        out / "spectrum_summary.json",
        config,
        {
            "experiment": "spectrum",
            "n": params.n,
            "m": derived.m,
            "power": derived.power,
            "in_regime": params.in_regime,
            "log_base": "2" if bits else "e",
            "capacity_h": _capacity_out(cap_h, bits),
            "capacity_g": _capacity_out(cap_g, bits),
            "capacity_ratio": cap_h / cap_g if cap_g != 0.0 else None,
            "threshold": config["threshold"],
            "dof_h": effective_dof(spec_h, config["threshold"]),
            "dof_g": effective_dof(spec_g, config["threshold"]),
            "max_residual_h": spec_h.max_residual,
            "max_residual_g": spec_g.max_residual,
        },
    )
    return out


def run_fredholm(config: dict) -> Path:
    """Operator eigenvalues, traces, d_k coefficients, and the decay fit."""
    params = scenario_params(config)
    m = config["fredholm"]["m"]
    if m is None:
        m = derive(params).m
    table = build_table(m, config["quadrature_n"], config["fredholm"]["k_max"])
    out = Path(config["out"])
    out.mkdir(parents=True, exist_ok=True)
    rows = [["mu", i + 1, table.mu[i]] for i in range(table.mu.size)]
    rows += [["trace", p + 1, table.traces[p]] for p in range(table.traces.size)]
    rows += [["dk", k, table.dk[k]] for k in range(table.dk.size)]
    write_csv(out / "fredholm.csv", config, ["series", "index", "value"], rows)
    bound = None
    if table.decay_c is not None:
        bound = _capacity_out(logdet_upper_bound(params.n, m, table.decay_c), config["bits"])
    write_json(
        out / "fredholm_summary.json",
        config,
        {
            "experiment": "fredholm",
            "m": m,
            "quadrature_n": table.quadrature_n,
            "k_max": int(table.dk.size - 1),
            "trace_1": float(table.traces[0]),
            "eigenvalues_above_half": int(np.count_nonzero(table.mu > 0.5)),
            "decay_c": table.decay_c,
            "decay_delta": table.decay_delta,
            "log_base": "2" if config["bits"] else "e",
            "logdet_upper_bound": bound,
        },
    )
    return out


def run_sweep(config: dict) -> Path:
    """Capacity/envelope sweep over the (n, m-law) grid."""
    sweep_cfg = config["sweep"]
    grid = []
    for exponent in sweep_cfg["m_exponents"]:
        grid.extend(
            grid_from_m_law(
                sweep_cfg["n_values"],
                exponent,
                wavelength=sweep_cfg["wavelength"],
                d_factor=sweep_cfg["d_factor"],
            )
        )
    result = bound_sweep(grid, config["threshold"], config["trials"], config["seed"])
    bits = config["bits"]
    out = Path(config["out"])
    out.mkdir(parents=True, exist_ok=True)
    header = [
        "point", "trial", "n", "area", "distance", "wavelength", "m", "power", "in_regime",
        "logdet_P_H", "logdet_nP_H", "logdet_G", "dof_H", "dof_G",
        "envelope_lower", "envelope_upper", "K1_implied", "K2_implied",
    ]
    rows = []
    for r in result.records:
        rows.append([
            r.point, r.trial, r.n, r.area, r.distance, r.wavelength, r.m, r.power, r.in_regime,
            _capacity_out(r.logdet_p_h, bits), _capacity_out(r.logdet_np_h, bits),
            _capacity_out(r.logdet_g, bits), r.dof_h, r.dof_g,
            r.envelope_lower, r.envelope_upper,
            _capacity_out(r.k1_implied, bits), _capacity_out(r.k2_implied, bits),
        ])
    write_csv(out / "sweep.csv", config, header, rows)
    k1 = [r.k1_implied for r in result.records if math.isfinite(r.k1_implied)]
    k2 = [r.k2_implied for r in result.records if math.isfinite(r.k2_implied)]
    write_json(
        out / "sweep_summary.json",
        config,
        {
            "experiment": "sweep",
            "points": len(grid),
            "trials": config["trials"],
            "log_base": "2" if bits else "e",
            "k1_min": min(k1) if k1 else None,
            "k1_max": max(k1) if k1 else None,
            "k2_min": min(k2) if k2 else None,
            "k2_max": max(k2) if k2 else None,
        },
    )
    return out


def _check_identity(config: dict) -> list[dict]:
    verify_cfg = config["verify"]
    checks = []
    for m in verify_cfg["identity_ms"]:
        table = build_table(float(m), config["quadrature_n"], max(verify_cfg["identity_orders"]), fit_decay=False)
        if verify_cfg["debug_corrupt_dk"]:
            table = dataclasses.replace(table, dk=table.dk * 1.5)
        for order in verify_cfg["identity_orders"]:
            result = fredholm_identity_check(
                order, float(m), verify_cfg["identity_trials"], config["seed"], table=table
            )
            checks.append(
                {
                    "name": f"identity k={order} m={_fmt(float(m))}",
                    "passed": not result.violated,
                    "details": {
                        "mc_mean": result.estimate.mean,
                        "mc_std_error": result.estimate.std_error,
                        "analytic": result.analytic,
                        "z_score": result.z_score,
                        "trials": result.estimate.trials,
                    },
                }
            )
    return checks


def _check_claim(config: dict) -> list[dict]:
    params = scenario_params(config)
    report = claim_sim_experiment(
        params, config["verify"]["claim_trials"], config["seed"], config["threshold"]
    )
    m = report.m
    dof_band = all(
        m / 4 <= r.dof_h <= 4 * m and m / 4 <= r.dof_g <= 4 * m for r in report.records
    )
    dof_pair = all(
        max(r.dof_h, r.dof_g) <= 2 * max(min(r.dof_h, r.dof_g), 1) for r in report.records
    )
    ratio_band = 0.5 <= report.ratio_mean <= 2.0
    return [
        {
            "name": "claim dof-vs-m band",
            "passed": dof_band and dof_pair,
            "details": {
                "m": m,
                "dof_h": [r.dof_h for r in report.records],
                "dof_g": [r.dof_g for r in report.records],
            },
        },
        {
            "name": "claim capacity ratio",
            "passed": ratio_band,
            "details": {"ratio_mean": report.ratio_mean, "ratios": [r.ratio for r in report.records]},
        },
    ]


def _check_envelopes(config: dict) -> list[dict]:
    sweep_cfg = config["sweep"]
    grid = []
    for exponent in sweep_cfg["m_exponents"]:
        grid.extend(
            grid_from_m_law(
                sweep_cfg["n_values"], exponent,
                wavelength=sweep_cfg["wavelength"], d_factor=sweep_cfg["d_factor"],
            )
        )
    result = bound_sweep(grid, config["threshold"], config["verify"]["envelope_trials"], config["seed"])
    k1_by_point: dict[int, list[float]] = {}
    k2_by_point: dict[int, list[float]] = {}
    for r in result.records:
        k1_by_point.setdefault(r.point, []).append(r.k1_implied)
        k2_by_point.setdefault(r.point, []).append(r.k2_implied)
    k1 = [float(np.mean(v)) for v in k1_by_point.values()]
    k2 = [float(np.mean(v)) for v in k2_by_point.values()]
    k1_ok = all(math.isfinite(v) for v in k1) and min(k1) > 0 and max(k1) / min(k1) <= 5.0
    k2_ok = all(math.isfinite(v) and v > 0 for v in k2) and max(k2) / min(k2) <= 3.0
    return [
        {
            "name": "envelope upper-bound constant",
            "passed": k2_ok,
            "details": {"k2_per_point": k2, "max_over_min": max(k2) / min(k2) if min(k2) > 0 else None},
        },
        {
            "name": "envelope lower-bound constant",
            "passed": k1_ok,
            "details": {"k1_per_point": k1, "max_over_min": max(k1) / min(k1) if min(k1) > 0 else None},
        },
    ]


def _check_concentration(config: dict) -> list[dict]:
    verify_cfg = config["verify"]
    report = concentration_experiment(
        verify_cfg["concentration_n_values"],
        verify_cfg["concentration_trials"],
        config["seed"],
        m_exponent=verify_cfg["concentration_m_exponent"],
    )
    passed = math.isfinite(report.exponent) and report.exponent <= 0.7
    return [
        {
            "name": "concentration growth exponent",
            "passed": passed,
            "details": {
                "exponent": report.exponent,
                "stds": [p.std for p in report.points],
                "n_values": [p.n for p in report.points],
            },
        }
    ]


def run_verify(config: dict) -> Path:
    """Bundle of identity, claim, envelope, and concentration checks."""
    runners = {
        "identity": _check_identity,
        "claim": _check_claim,
        "envelopes": _check_envelopes,
        "concentration": _check_concentration,
    }
    names = config["verify"]["checks"]
    if not names:
        warnings.warn("verify.checks is empty; nothing to run", stacklevel=2)
    checks: list[dict] = []
    for name in names:
        checks.extend(runners[name](config))
    out = Path(config["out"])
    out.mkdir(parents=True, exist_ok=True)
    all_passed = all(c["passed"] for c in checks)
    write_json(out / "verify_report.json", config, {"experiment": "verify", "checks": checks, "all_passed": all_passed})
    for check in checks:
        click.echo(f"{'PASS' if check['passed'] else 'FAIL'}  {check['name']}")
    if not all_passed:
        failed = ", ".join(c["name"] for c in checks if not c["passed"])
        raise VerificationFailure(f"failed checks: {failed}")
    return out


# ---------------------------------------------------------------------------
# command line


def _common_options(func):
    options = [
        click.option("--config", "config_path", type=str, default=None, help="JSON config file."),
        click.option("--seed", type=click.IntRange(min=0), default=None, help="RNG seed (overrides config)."),
        click.option("--trials", type=click.IntRange(min=1), default=None, help="Replicas per experiment point."),
        click.option("--threshold", type=float, default=None, help="Effective-dof eigenvalue threshold."),
        click.option("--quadrature-n", "quadrature_n", type=click.IntRange(min=2), default=None, help="Quadrature node count."),
        click.option("--bits", is_flag=True, default=False, help="Report capacities in bits instead of nats."),
        click.option("--out", type=str, default=None, help="Output directory."),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def _effective_config(config_path, seed, trials, threshold, quadrature_n, bits, out) -> dict:
    overrides = {
        "seed": seed,
        "trials": trials,
        "threshold": threshold,
        "quadrature_n": quadrature_n,
        "bits": True if bits else None,
        "out": out,
    }
    return load_config(config_path, overrides)


@click.group()
@click.version_option(version=__version__, prog_name="losdof")
def cli():
    """Spectra and degrees of freedom of line-of-sight MIMO channels."""


@cli.command()
@_common_options
def spectrum(**kwargs):
    """Write the eigenvalue overlay of nP HH* and GG* for one scenario."""
    out = run_spectrum(_effective_config(**kwargs))
    click.echo(f"wrote {out / 'spectrum.csv'} and {out / 'spectrum_summary.json'}")


@cli.command()
@_common_options
def fredholm(**kwargs):
    """Write sinc-operator eigenvalues, traces, d_k, and the decay fit."""
    out = run_fredholm(_effective_config(**kwargs))
    click.echo(f"wrote {out / 'fredholm.csv'} and {out / 'fredholm_summary.json'}")


@cli.command()
@_common_options
def verify(**kwargs):
    """Run the identity/approximation/envelope/concentration checks."""
    out = run_verify(_effective_config(**kwargs))
    click.echo(f"wrote {out / 'verify_report.json'}")


@cli.command()
@_common_options
def sweep(**kwargs):
    """Write the capacity/envelope sweep over the configured grid."""
    out = run_sweep(_effective_config(**kwargs))
    click.echo(f"wrote {out / 'sweep.csv'} and {out / 'sweep_summary.json'}")


def main(argv: list[str] | None = None) -> int:
    """Entry point with the documented exit-code mapping."""
    try:
        cli.main(args=argv, standalone_mode=False)
    except click.exceptions.Exit as exc:
        return int(exc.exit_code)
    except click.UsageError as exc:
        click.echo(f"error: {exc.format_message()}", err=True)
        return 1
    except (ConfigError, InvalidParameterError) as exc:
        click.echo(f"config error: {exc}", err=True)
        return 1
    except VerificationFailure as exc:
        click.echo(f"verification failed: {exc}", err=True)
        return 2
    except (
        InconsistentSpectrumError,
        DiscretizationTooCoarseError,
        EigensolverError,
        DecayViolationError,
    ) as exc:
        click.echo(f"numerical check failed: {exc}", err=True)
        return 2
    except OSError as exc:
        click.echo(f"I/O error: {exc}", err=True)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
