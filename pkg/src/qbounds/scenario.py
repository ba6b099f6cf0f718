"""Declarative scenarios: parse a JSON config, build the objects, run the test.

A scenario names a state family, a measurement family (or a range of
outcomes), the test kind, and optionally detector efficiency and sampling.
Parsing is strict: unknown keys and parameters are rejected with the path of
the offending field.
"""

from __future__ import annotations

import inspect
import json
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from . import __version__, bounds, catalog, fock, robustness, su2, two_mode
from .errors import ConfigError, QBoundsError

TEST_KINDS = ("state_test", "measurement_test")

SPIN_STATES = {
    "spin_projector": lambda j, m: su2.SpinOperator(j, su2.spin_projector(j, m).matrix, "state", f"|{j:g},{m:g}>"),
    "su2_coherent": lambda j, theta, phi=0.0: su2.spin_state(su2.su2_coherent(j, su2.SphereDirection(theta, phi)),
                                                            "su2_coherent"),
    "phase_averaged_equatorial": lambda j=1: su2.phase_averaged_equatorial(j),
    "maximally_mixed": lambda j: su2.maximally_mixed(j),
    "bloch": lambda r: su2.bloch_state(r),
}
SPIN_POVMS = {
    "spin_projector": su2.spin_projector,
    "coherent_projector": lambda j, theta, phi=0.0, weight=1.0: su2.su2_coherent_projector(
        j, su2.SphereDirection(theta, phi), weight),
    "bloch_povm": lambda lam, r_m: su2.bloch_povm(lam, r_m),
}


def _tmsv(zeta: float | None = None, zeta_sq: float | None = None):
    if (zeta is None) == (zeta_sq is None):
        raise ValueError("give exactly one of zeta, zeta_sq")
    return two_mode.tmsv(math.sqrt(zeta_sq) if zeta is None else zeta)


def _product_coherent(alpha1, alpha2):
    return two_mode.product_state(catalog.coherent_state(alpha1), catalog.coherent_state(alpha2))


TWO_MODE_STATES = {"tmsv": _tmsv, "product_coherent": _product_coherent}
TWO_MODE_MEASUREMENTS = {
    "joint_number": lambda n1, n2: ("joint_number", n1, n2),
    "total_number": lambda n: ("total_number", n),
    "quadrature_difference": lambda x: ("quadrature_difference", x),
}

TOP_KEYS = {"schema_version", "state", "measurement", "test_kind", "imperfection", "sampling", "output"}
OBJ_KEYS = {"family", "params"}
MEAS_KEYS = {"family", "params", "range"}
RANGE_KEYS = {"param", "start", "stop", "step"}
IMPERFECTION_KEYS = {"eta", "bound_kind", "eta_grid"}
SAMPLING_KEYS = {"trials", "seed", "replications"}
OUTPUT_KEYS = {"format", "path"}


@dataclass(frozen=True)
class ScenarioConfig:
    state: dict
    measurement: dict
    test_kind: str
    imperfection: dict | None = None
    sampling: dict | None = None
    output: dict = field(default_factory=lambda: {"format": "json"})

    @property
    def domain(self) -> str:
        fam = self.state["family"]
        if fam in TWO_MODE_STATES:
            return "two_mode"
        if fam in SPIN_STATES:
            return "spin"
        return "single_mode"

    def echo(self) -> dict:
        d = {"state": self.state, "measurement": self.measurement, "test_kind": self.test_kind}
        if self.imperfection is not None:
            d["imperfection"] = self.imperfection
        if self.sampling is not None:
            d["sampling"] = self.sampling
        return d


# ---------------------------------------------------------------------------
# parsing


def _strict(obj, allowed: set[str], where: str, required: tuple[str, ...] = ()) -> dict:
    if not isinstance(obj, dict):
        raise ConfigError(f"{where} must be an object", where)
    unknown = sorted(set(obj) - allowed)
    if unknown:
        raise ConfigError(f"unknown key(s) {unknown} in {where}", f"{where}.{unknown[0]}")
    for k in required:
        if k not in obj:
            raise ConfigError(f"missing required key {k!r} in {where}", f"{where}.{k}")
    return obj


def _family(obj: dict, where: str, registry: dict) -> tuple[str, dict]:
    fam = obj["family"]
    if fam not in registry:
        raise ConfigError(f"unknown family {fam!r}; choose from {sorted(registry)}", f"{where}.family")
    params = obj.get("params", {})
    if not isinstance(params, dict):
        raise ConfigError("params must be an object", f"{where}.params")
    try:
        sig = inspect.signature(registry[fam])
    except (TypeError, ValueError):
        return fam, params
    names = set(sig.parameters) - {"dim"}
    bad = sorted(set(params) - names)
    if bad:
        raise ConfigError(f"unknown parameter(s) {bad} for family {fam!r}", f"{where}.params.{bad[0]}")
    return fam, params


def parse_config(data: Any) -> ScenarioConfig:
    cfg = _strict(data, TOP_KEYS, "config", ("state", "measurement", "test_kind"))
    if cfg.get("schema_version", 1) != 1:
        raise ConfigError("unsupported schema_version", "config.schema_version")
    state = _strict(cfg["state"], OBJ_KEYS, "state", ("family",))
    meas = _strict(cfg["measurement"], MEAS_KEYS, "measurement", ("family",))
    if cfg["test_kind"] not in TEST_KINDS:
        raise ConfigError(f"test_kind must be one of {TEST_KINDS}", "config.test_kind")
    all_states = {**catalog.STATE_FAMILIES, **TWO_MODE_STATES, **SPIN_STATES}
    _family(state, "state", all_states)
    fam = state["family"]
    if fam in TWO_MODE_STATES:
        meas_registry = TWO_MODE_MEASUREMENTS
    elif fam in SPIN_STATES:
        meas_registry = SPIN_POVMS
    else:
        meas_registry = catalog.POVM_FAMILIES
    _family(meas, "measurement", meas_registry)
    if "range" in meas:
        rng = _strict(meas["range"], RANGE_KEYS, "measurement.range", ("param", "start", "stop"))
        if rng.get("step", 1) <= 0 or rng["stop"] < rng["start"]:
            raise ConfigError("range needs stop >= start and a positive step", "measurement.range")
    imp = cfg.get("imperfection")
    if imp is not None:
        _strict(imp, IMPERFECTION_KEYS, "imperfection")
        if "eta" in imp and not 0 < imp["eta"] <= 1:
            raise ConfigError("eta must lie in (0, 1]", "imperfection.eta")
        if imp.get("bound_kind", "state") not in robustness.BOUND_KINDS:
            raise ConfigError(f"bound_kind must be one of {robustness.BOUND_KINDS}", "imperfection.bound_kind")
        if fam not in catalog.STATE_FAMILIES:
            raise ConfigError("imperfection applies to single-mode states only", "imperfection")
    samp = cfg.get("sampling")
    if samp is not None:
        _strict(samp, SAMPLING_KEYS, "sampling", ("trials",))
        if not isinstance(samp["trials"], int) or samp["trials"] < 1:
            raise ConfigError("trials must be a positive integer", "sampling.trials")
        if not isinstance(samp.get("seed", 0), int) or not 0 <= samp.get("seed", 0) < 2**64:
            raise ConfigError("seed must be an unsigned 64-bit integer", "sampling.seed")
    out = _strict(cfg.get("output", {"format": "json"}), OUTPUT_KEYS, "output")
    if out.get("format", "json") not in ("json", "csv"):
        raise ConfigError("output.format must be json or csv", "output.format")
    return ScenarioConfig(state, meas, cfg["test_kind"], imp, samp, dict(out))


def load_config(path: str) -> ScenarioConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}", "config") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON at line {exc.lineno}: {exc.msg}", "config") from exc
    return parse_config(data)


# ---------------------------------------------------------------------------
# building objects


def _coerce(params: dict) -> dict:
    out = {}
    for k, v in params.items():
        if k.startswith("alpha"):
            if isinstance(v, dict) and set(v) <= {"re", "im"}:
                v = complex(v.get("re", 0.0), v.get("im", 0.0))
            elif isinstance(v, list) and len(v) == 2:
                v = complex(v[0], v[1])
        out[k] = v
    return out


def _build(registry: dict, block: dict, where: str, dim: int | None = None, **override):
    fam = block["family"]
    params = _coerce({**block.get("params", {}), **override})
    fn = registry[fam]
    try:
        if dim is not None and "dim" in inspect.signature(fn).parameters:
            params["dim"] = dim
    except (TypeError, ValueError):
        pass
    try:
        return fn(**params)
    except QBoundsError as exc:
        if isinstance(exc, (ValueError,)):
            raise ConfigError(f"{where}: {exc}", f"{where}.params") from exc
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: {exc}", f"{where}.params") from exc


def _outcomes(meas: dict) -> list[dict]:
    if "range" not in meas:
        return [{}]
    rng = meas["range"]
    step = rng.get("step", 1)
    n = int(math.floor((rng["stop"] - rng["start"]) / step + 1e-9)) + 1
    vals = [rng["start"] + i * step for i in range(n)]
    if all(isinstance(v, int) for v in (rng["start"], step)):
        vals = [int(v) for v in vals]
    return [{rng["param"]: v} for v in vals]


def _dims(obj) -> list[int]:
    if isinstance(obj, catalog.CatalogEntry):
        return [obj.dim]
    if isinstance(obj, (two_mode.TmsvState, two_mode.TwoModeOperator)):
        return list(obj.dims)
    if isinstance(obj, su2.SpinOperator):
        return [obj.dim]
    return []


def _single_mode(cfg: ScenarioConfig, dim: int | None, outcome: dict):
    state = _build(catalog.STATE_FAMILIES, cfg.state, "state", dim)
    povm = _build(catalog.POVM_FAMILIES, cfg.measurement, "measurement", dim, **outcome)
    imp = cfg.imperfection
    if imp and "eta" in imp:
        kind = imp.get("bound_kind", "state" if cfg.test_kind == "state_test" else "ideal_povm")
        if kind == "state" and cfg.test_kind != "state_test" or kind != "state" and cfg.test_kind == "state_test":
            raise ConfigError("bound_kind does not match test_kind", "imperfection.bound_kind")
        rep = robustness.efficiency_report(state, povm, float(imp["eta"]), kind)
    elif cfg.test_kind == "state_test":
        rep = bounds.state_test(state, povm)
    else:
        rep = bounds.measurement_test(povm, state)
    return rep, _dims(state) + _dims(povm)


def _two_mode(cfg: ScenarioConfig, dim: int | None, outcome: dict):
    if cfg.test_kind != "state_test":
        raise ConfigError("two-mode scenarios support state_test only", "config.test_kind")
    state = _build(TWO_MODE_STATES, cfg.state, "state")
    if dim is not None and isinstance(state, two_mode.TmsvState):
        state = two_mode.tmsv(state.zeta, dim)
    what = _build(TWO_MODE_MEASUREMENTS, cfg.measurement, "measurement", None, **outcome)
    if what[0] == "joint_number":
        rep = two_mode.joint_number_test(state, what[1], what[2])
    elif what[0] == "total_number":
        rep = two_mode.total_number_test(state, what[1])
    else:
        rep = two_mode.quadrature_difference_test(state, what[1])
    return rep, _dims(state)


def _spin(cfg: ScenarioConfig, dim: int | None, outcome: dict):
    state = _build(SPIN_STATES, cfg.state, "state")
    povm = _build(SPIN_POVMS, cfg.measurement, "measurement", None, **outcome)
    if cfg.test_kind == "state_test":
        rep = su2.su2_state_test(state, povm)
    else:
        rep = su2.su2_measurement_test(povm, state)
    return rep, _dims(state)


def environment(dims: list[int], seed: int | None = None) -> dict:
    env = {
        "package_version": __version__,
        "truncation_dims": dims,
        "tolerances": {"truncation": fock.TOL_TRUNC, "violation_relative": bounds.EPS_V},
    }
    if seed is not None:
        env["seed"] = seed
    return env


def run_scenario(cfg: ScenarioConfig, dim: int | None = None, seed: int | None = None):
    """Run every outcome of the scenario; returns (results, environment, summary)."""
    runner = {"single_mode": _single_mode, "two_mode": _two_mode, "spin": _spin}[cfg.domain]
    results, dims = [], []
    samp = cfg.sampling
    model = None
    if samp is not None:
        model = robustness.SamplingModel(samp["trials"], seed if seed is not None else samp.get("seed", 0))
    for outcome in _outcomes(cfg.measurement):
        rep, d = runner(cfg, dim, outcome)
        dims = sorted(set(dims) | set(d))
        row = rep.to_dict()
        if model is not None:
            row["sampling"] = sampling_summary(rep, model, samp.get("replications", 1))
        results.append(row)
    summary = {
        "any_violation": any(r["violated"] for r in results),
        "max_violation_pct": max(r["violation_pct"] for r in results),
    }
    return results, environment(dims, model.seed if model else seed), summary


def sampling_summary(rep: bounds.BoundReport, model: robustness.SamplingModel, replications: int = 1) -> dict:
    sigma = robustness.significance(rep, model)
    _, dp = robustness.sampling_moments(min(max(rep.probability, 0.0), 1.0), model)
    freq = robustness.simulate_counts(min(max(rep.probability, 0.0), 1.0), model, replications)
    return {
        "trials": model.trials,
        "seed": model.seed,
        "stddev": dp,
        "significance_sigma": sigma,
        "significant": robustness.is_significant(sigma),
        "replications": replications,
        "simulated_mean": float(np.mean(freq)),
    }
