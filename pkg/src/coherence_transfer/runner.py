"""Run configurations, scenario dispatch and CSV/JSON emission."""
from __future__ import annotations

import io
import json
from dataclasses import dataclass
from importlib import metadata
from pathlib import Path

import numpy as np

from . import capability as cap
from . import dynamics as dyn
from . import networks as nw
from . import optimizer as opt

SCENARIOS = ("one-qubit", "two-qubit", "triangle", "dqd", "lp-selftest")
FORMATS = ("csv", "json")


def tool_version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        from . import __version__
        return __version__


class ConfigError(ValueError):
    """Invalid configuration; maps to exit code 1."""


class SolverError(RuntimeError):
    """A solver did not reach an optimum; maps to exit code 2."""


# --- validation helpers -----------------------------------------------------

def _int(name, lo=None, hi=None, choices=None):
    def check(v):
        if isinstance(v, bool) or not isinstance(v, int):
            raise ConfigError(f"{name}: expected an integer, got {v!r}")
        if choices is not None and v not in choices:
            raise ConfigError(f"{name}: must be one of {list(choices)}, got {v}")
        if (lo is not None and v < lo) or (hi is not None and v > hi):
            raise ConfigError(f"{name}: must lie in [{lo}, {hi}], got {v}")
        return v
    return check


def _float(name, lo=None, hi=None, strict_lo=False):
    def check(v):
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not np.isfinite(v):
            raise ConfigError(f"{name}: expected a finite number, got {v!r}")
        v = float(v)
        if lo is not None and (v < lo or (strict_lo and v == lo)):
            raise ConfigError(f"{name}: must be {'>' if strict_lo else '>='} {lo}, got {v}")
        if hi is not None and v > hi:
            raise ConfigError(f"{name}: must be <= {hi}, got {v}")
        return v
    return check


def _choice(name, choices):
    def check(v):
        if v not in choices:
            raise ConfigError(f"{name}: must be one of {list(choices)}, got {v!r}")
        return v
    return check


def _visibilities(v):
    if not isinstance(v, (list, tuple)) or not v:
        raise ConfigError(f"visibilities: expected a nonempty list, got {v!r}")
    return tuple(_float("visibilities", 0.0, 1.0)(x) for x in v)


def _str(name):
    def check(v):
        if not isinstance(v, str) or not v:
            raise ConfigError(f"{name}: expected a nonempty string, got {v!r}")
        return v
    return check


_COMMON = {
    "seed": (_int("seed", 0, 2**64 - 1), 0),
    "out": (_str("out"), None),
    "format": (_choice("format", FORMATS), "csv"),
}

# key -> (validator, default); default None means optional and unset
_SCHEMA = {
    "one-qubit": {
        "network": (_int("network", choices=(4, 6)), 4),
        "rsp": (_int("rsp", 1, 3), 1),
        "checkpoint": (_int("checkpoint", 1, 3), 1),
        "visibilities": (_visibilities, None),
        "oracle_trials": (_int("oracle_trials", 0, 10**8), 0),
    },
    "two-qubit": {
        "network": (_int("network", choices=(4, 6)), 4),
        "variant": (_choice("variant", ("capable", "control")), "capable"),
        "checkpoint": (_int("checkpoint", 1, 3), 1),
        "visibilities": (_visibilities, None),
        "oracle_trials": (_int("oracle_trials", 0, 10**8), 0),
    },
    "triangle": {
        "restarts": (_int("restarts", 0, 100_000), 200),
    },
    "dqd": {
        "gamma_l": (_float("gamma_l", 0.0), 4.0),
        "gamma_r": (_float("gamma_r", 0.0), 0.1),
        "delta": (_float("delta"), 1.0),
        "t0_max": (_float("t0_max", 0.0, strict_lo=True), 6.0),
        "tau_max": (_float("tau_max", 0.0, strict_lo=True), 6.0),
        "points": (_int("points", 2, 2001), 121),
        "dt": (_float("dt", 0.0, strict_lo=True), 1e-3),
    },
    "lp-selftest": {
        "cases": (_int("cases", 1, 100_000), 200),
        "max_vars": (_int("max_vars", 4, 12), 12),
    },
}


@dataclass(frozen=True)
class RunConfig:
    scenario: str
    params: tuple  # sorted (key, value) pairs, lists stored as tuples
    seed: int = 0
    out: str | None = None
    format: str = "csv"

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise ConfigError(f"scenario: must be one of {list(SCENARIOS)}, got {self.scenario!r}")

    def get(self, key):
        return dict(self.params)[key]

    def to_dict(self) -> dict:
        d = {"scenario": self.scenario}
        for k, v in self.params:
            d[k] = list(v) if isinstance(v, tuple) else v
        d["seed"] = self.seed
        if self.out is not None:
            d["out"] = self.out
        d["format"] = self.format
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def config_from_dict(raw: dict) -> RunConfig:
    if not isinstance(raw, dict):
        raise ConfigError("config: top level must be a JSON object")
    if "scenario" not in raw:
        raise ConfigError("scenario: missing required key")
    scenario = raw["scenario"]
    if scenario not in _SCHEMA:
        raise ConfigError(f"scenario: must be one of {list(SCENARIOS)}, got {scenario!r}")
    schema = _SCHEMA[scenario]
    for key in raw:
        if key != "scenario" and key not in schema and key not in _COMMON:
            raise ConfigError(f"{key}: unknown key for scenario {scenario!r}")
    params = {}
    for key, (check, default) in schema.items():
        if key in raw:
            params[key] = check(raw[key])
        elif default is not None:
            params[key] = default
    if "visibilities" in schema:
        n_pairs = params["network"] // 2
        vis = params.get("visibilities", (1.0,) * n_pairs)
        if len(vis) != n_pairs:
            raise ConfigError(f"visibilities: network {params['network']} needs {n_pairs} entries, got {len(vis)}")
        params["visibilities"] = vis
    if scenario == "dqd":
        step = min(params["t0_max"], params["tau_max"]) / (params["points"] - 1)
        if params["dt"] > step / 10 + 1e-15:
            raise ConfigError(f"dt: must be at most a tenth of the grid spacing {step:g}, got {params['dt']}")
    common = {k: check(raw[k]) for k, (check, _) in _COMMON.items() if k in raw}
    return RunConfig(scenario, tuple(sorted(params.items())), **common)


def _reject_duplicates(pairs):
    seen = {}
    for k, v in pairs:
        if k in seen:
            raise ConfigError(f"{k}: duplicate key")
        seen[k] = v
    return seen


def parse_config(text: str) -> RunConfig:
    try:
        raw = json.loads(text, object_pairs_hook=_reject_duplicates)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return config_from_dict(raw)


# --- execution --------------------------------------------------------------

def _provenance(config: RunConfig) -> dict:
    return {"config": config.to_dict(), "seed": config.seed, "tool_version": tool_version()}


def _kernel(data: nw.ScenarioData) -> cap.KernelResult:
    res = cap.criterion_q(data)
    if res.solver_status is not opt.LPStatus.OPTIMAL:
        raise SolverError(f"{data.metadata}: kernel LP ended with status {res.solver_status.value}")
    return res


def _scenario_result(config: RunConfig, data: nw.ScenarioData) -> dict:
    res = _kernel(data)
    out = {
        "kind": "scenario",
        "scenario": config.scenario,
        "q_value": res.q_value,
        "certified": res.certifies,
        "transfer_matrix": res.minimizer.t.tolist(),
        "p_diag": data.diag_populations.tolist(),
        "p_checkpoint": data.checkpoint_populations.tolist(),
        "metadata": data.metadata,
    }
    trials = config.get("oracle_trials")
    if trials:
        out["oracle_bound"] = cap.sample_incapable_bound(data, trials, config.seed)
    return out


def run(config: RunConfig, n_jobs: int = 1) -> dict:
    """Execute ``config``; ``n_jobs`` only affects speed, never the result."""
    s = config.scenario
    try:
        if s == "one-qubit":
            data = nw.run_one_qubit(config.get("network"), config.get("rsp"), config.get("checkpoint"),
                                    config.get("visibilities"))
            result = _scenario_result(config, data)
        elif s == "two-qubit":
            data = nw.run_two_qubit(config.get("network"), nw.Variant(config.get("variant")),
                                    config.get("checkpoint"), config.get("visibilities"))
            result = _scenario_result(config, data)
        elif s == "triangle":
            p_q = nw.triangle_quantum_distribution()
            value, model = cap.triangle_fit(p_q, restarts=config.get("restarts"), seed=config.seed, n_jobs=n_jobs)
            result = {
                "kind": "triangle",
                "q_value": value,
                "p_quantum": p_q.tolist(),
                "p_classical": nw.triangle_classical_distribution(model).tolist(),
                "model": {"gamma": model.gamma, "p": list(model.p), "q": list(model.q)},
            }
        elif s == "dqd":
            model = dyn.dqd_model(config.get("gamma_l"), config.get("gamma_r"), config.get("delta"))
            grid = dyn.SweepGrid.uniform(config.get("t0_max"), config.get("tau_max"), config.get("points"),
                                         config.get("dt"))
            q = dyn.qt_sweep(model, grid=grid, n_jobs=n_jobs)
            result = {"kind": "sweep", "t0": list(grid.t0_values), "tau": list(grid.tau_values),
                      "q": q.tolist(), "q_max": float(q.max())}
        else:
            result = lp_selftest(config.get("cases"), config.get("max_vars"), config.seed)
    except (dyn.DynamicsError, FloatingPointError) as exc:
        raise SolverError(f"{s}: {exc}") from exc
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"{s}: {exc}") from exc
    result["provenance"] = _provenance(config)
    return result


def lp_selftest(cases: int = 200, max_vars: int = 12, seed: int = 0) -> dict:
    """Simplex against vertex enumeration on random bounded LPs."""
    rng = np.random.default_rng(seed)
    rows = []
    for case in range(cases):
        lp = opt.random_bounded_lp(rng, max_vars)
        res = opt.simplex_solve(lp)
        status, ref, _ = opt.vertex_enumeration(lp)
        if res.status is not opt.LPStatus.OPTIMAL or status is not opt.LPStatus.OPTIMAL:
            raise SolverError(f"lp-selftest case {case}: simplex {res.status.value}, enumeration {status.value}")
        rows.append((case, lp.n_vars, res.optimum, ref))
    diff = max(abs(a - b) for _, _, a, b in rows)
    return {"kind": "lp-selftest", "cases": rows, "max_abs_diff": diff}


# --- emission ---------------------------------------------------------------

def fmt(x: float) -> str:
    """12 digits after the leading one, lowercase exponent, no negative zero."""
    x = float(x)
    if x == 0.0:
        x = 0.0
    return format(x, "#.13g")


def csv_text(result: dict) -> str:
    buf = io.StringIO()
    kind = result["kind"]
    if kind == "scenario":
        buf.write("k,i,p_diag,p_checkpoint\n")
        for k, (w, p) in enumerate(zip(result["p_diag"], result["p_checkpoint"]), start=1):
            for i, (a, b) in enumerate(zip(w, p)):
                buf.write(f"{k},{i},{fmt(a)},{fmt(b)}\n")
        buf.write(f"Q,{fmt(result['q_value'])}\n")
    elif kind == "sweep":
        buf.write("t0,tau,q\n")
        for t0, row in zip(result["t0"], result["q"]):
            for tau, q in zip(result["tau"], row):
                buf.write(f"{fmt(t0)},{fmt(tau)},{fmt(q)}\n")
    elif kind == "triangle":
        buf.write("outcome,p_quantum,p_classical\n")
        for (a, b, c), pq, pc in zip(nw.TRIANGLE_OUTCOMES, result["p_quantum"], result["p_classical"]):
            buf.write(f"{a}{b}{c},{fmt(pq)},{fmt(pc)}\n")
        buf.write(f"Q,{fmt(result['q_value'])}\n")
    elif kind == "lp-selftest":
        buf.write("case,n_vars,simplex,enumeration\n")
        for case, n, a, b in result["cases"]:
            buf.write(f"{case},{n},{fmt(a)},{fmt(b)}\n")
        buf.write(f"max_abs_diff,{fmt(result['max_abs_diff'])}\n")
    else:
        raise ValueError(f"unknown result kind {kind!r}")
    return buf.getvalue()


def _json_ready(obj):
    if isinstance(obj, dict):
        return {k: _json_ready(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_ready(v) for v in obj]
    if isinstance(obj, (float, np.floating)):
        return float(fmt(obj))
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def json_text(result: dict) -> str:
    return json.dumps(_json_ready(result), indent=2, sort_keys=True) + "\n"


def emit_csv(result: dict, path) -> Path:
    path = Path(path)
    path.write_text(csv_text(result), encoding="utf-8", newline="")
    return path


def emit_json(result: dict, path) -> Path:
    path = Path(path)
    path.write_text(json_text(result), encoding="utf-8", newline="")
    return path
