"""TOML configuration: process spec files ([fbm] / [diffusion] / [levy]
sections) and experiment files ([experiment] + [process] tables)."""

from __future__ import annotations

import sys

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from . import harness
from . import jump_measures as jm
from . import processes as pr


class ConfigError(ValueError):
    """Malformed TOML configuration."""


def load_toml(path: str) -> dict:
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"malformed TOML in {path}: {exc}") from None


def _require(table: dict, key: str, where: str):
    if key not in table:
        raise ConfigError(f"missing key {key!r} in {where}")
    return table[key]


def coefficient_from_table(table, where: str) -> pr.Coefficient:
    if isinstance(table, (int, float)):
        return pr.Coefficient("const", float(table))
    if not isinstance(table, dict):
        raise ConfigError(f"{where} must be a number or a table with a 'kind'")
    kind = _require(table, "kind", where)
    if kind == "const":
        return pr.Coefficient("const", float(_require(table, "value", where)))
    if kind == "zero":
        return pr.Coefficient("const", 0.0)
    if kind == "sin":
        return pr.Coefficient("sin", float(table.get("amplitude", 1.0)))
    if kind == "linear":
        return pr.Coefficient("linear", float(table.get("a", 0.0)), float(table.get("b", 0.0)))
    raise ConfigError(f"unknown coefficient kind {kind!r} in {where} "
                      "(expected const|zero|sin|linear)")


def jump_measure_from_table(table: dict, where: str) -> jm.JumpMeasure:
    family = _require(table, "family", where)
    if family == "none":
        return jm.NoJumps()
    if family == "discrete":
        return jm.DiscreteJumps(tuple(_require(table, "sizes", where)),
                                tuple(_require(table, "rates", where)))
    if family == "tempered-stable":
        return jm.TemperedStable(
            alpha_p=float(_require(table, "alpha_p", where)),
            alpha_n=float(_require(table, "alpha_n", where)),
            lam_p=float(_require(table, "lam_p", where)),
            lam_n=float(_require(table, "lam_n", where)),
            c_p=float(_require(table, "c_p", where)),
            c_n=float(_require(table, "c_n", where)),
        )
    if family == "meixner":
        return jm.Meixner(
            delta=float(_require(table, "delta", where)),
            eta=float(_require(table, "eta", where)),
            beta=float(_require(table, "beta", where)),
        )
    raise ConfigError(f"unknown jump measure family {family!r} in {where} "
                      "(expected none|discrete|tempered-stable|meixner)")


def source_from_table(table: dict, where: str = "[process]"):
    """Build a harness path source from a process table."""
    family = _require(table, "family", where)
    s = float(_require(table, "S", where))
    n = int(_require(table, "n", where))
    if family == "fbm":
        return harness.FbmSource(H=float(_require(table, "H", where)), S=s, n=n)
    if family == "bm":
        return harness.bm_source(S=s, n=n)
    if family == "diffusion":
        mu = coefficient_from_table(_require(table, "mu", where), f"{where}.mu")
        sigma = coefficient_from_table(_require(table, "sigma", where), f"{where}.sigma")
        growth = None
        if "mu_C" in table or "mu_D" in table:
            growth = (float(table.get("mu_C", 0.0)), float(table.get("mu_D", 0.0)))
        return harness.DiffusionSource(
            mu=mu, sigma=sigma, x0=float(table.get("x0", 0.0)), S=s, n=n,
            mu_growth=growth,
            sigma_bound=float(table["sigma_R"]) if "sigma_R" in table else None,
        )
    if family == "levy":
        triplet = pr.LevyTriplet(
            A=float(table.get("A", 0.0)),
            gamma=float(table.get("gamma", 0.0)),
            nu=jump_measure_from_table(table.get("nu", {"family": "none"}), f"{where}.nu"),
            eps=float(table.get("eps", 1e-3)),
        )
        return harness.LevySource(triplet=triplet, S=s, n=n)
    raise ConfigError(f"unknown process family {family!r} in {where} "
                      "(expected bm|fbm|diffusion|levy)")


def simulation_from_file(path: str, seed=None):
    """Read a path-simulation spec file with exactly one of the sections
    [fbm], [diffusion], [levy]; returns (source, seed)."""
    data = load_toml(path)
    sections = [k for k in ("fbm", "diffusion", "levy") if k in data]
    if len(sections) != 1:
        raise ConfigError(
            f"spec file must contain exactly one of [fbm]/[diffusion]/[levy], found {sections}"
        )
    name = sections[0]
    table = dict(data[name])
    table["family"] = name
    file_seed = table.pop("seed", None)
    if seed is None:
        seed = file_seed
    if seed is None:
        raise ConfigError(f"no seed in [{name}] and none given on the command line")
    return source_from_table(table, f"[{name}]"), int(seed)


_EXPERIMENT_KEYS = {
    "kind", "replicates", "base_seed", "c", "c_list", "u_grid", "lambda_grid",
    "mgf_cap", "mgf_bound", "alpha_lo", "alpha_hi", "var_window",
    "lln_tolerance", "slope_tolerance", "points_per_oscillation",
}


def experiment_from_dict(data: dict) -> harness.ExperimentConfig:
    exp = _require(data, "experiment", "experiment config")
    unknown = set(exp) - _EXPERIMENT_KEYS
    if unknown:
        raise ConfigError(f"unknown [experiment] keys: {sorted(unknown)}")
    source = source_from_table(_require(data, "process", "experiment config"))
    kwargs = {
        "kind": _require(exp, "kind", "[experiment]"),
        "source": source,
        "replicates": int(_require(exp, "replicates", "[experiment]")),
        "base_seed": int(_require(exp, "base_seed", "[experiment]")),
    }
    for key in ("c", "mgf_cap", "alpha_lo", "alpha_hi", "lln_tolerance", "slope_tolerance"):
        if key in exp:
            kwargs[key] = float(exp[key])
    if "points_per_oscillation" in exp:
        kwargs["points_per_oscillation"] = int(exp["points_per_oscillation"])
    for key in ("c_list", "u_grid", "lambda_grid", "var_window"):
        if key in exp:
            kwargs[key] = tuple(float(x) for x in exp[key])
    if "mgf_bound" in exp:
        kwargs["mgf_bound"] = str(exp["mgf_bound"])
    try:
        return harness.ExperimentConfig(**kwargs)
    except harness.HarnessError as exc:
        raise ConfigError(str(exc)) from exc


def experiment_from_file(path: str) -> harness.ExperimentConfig:
    return experiment_from_dict(load_toml(path))
