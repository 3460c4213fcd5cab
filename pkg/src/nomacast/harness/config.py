"""Scenario configuration and its plain-text (INI) form.

Schema (every key optional unless marked)::

    [scenario]
    name = f4                     ; used for output file names
    kind = PowerMin               ; PowerMin | SumRate | EE | Convergence (required)
    model = A                     ; region preset A-E
    delta_d = 20                  ; model D only, meters
    antennas = 8
    users = 3
    pathloss_exponent = 2.5
    noise_dbm = -80
    schemes = NOMA, SDMA, OMA     ; see SCHEMES for the names per kind

    [sweep]
    variable = rate               ; one of SWEEP_VARIABLES (required)
    values = 1, 2, 3, 4, 5        ; non-empty, sorted (required)
    series_variable = antennas    ; optional second parameter (one curve each)
    series_values = 6, 8, 10

    [params]
    rate = 3                      ; per-group target rate R (bits/s/Hz)
    grades = 1, 1, 1              ; fair-policy ratios (default all ones)
    p_tot_dbm = 30
    rate_pri = 1                  ; EE: original-group rate
    p_c_w = 30                    ; EE: circuit power in watts
    mm_tol = 1e-4
    max_mm_iters = 50
    epsilon_k = 1e-3
    ee_model = E                  ; Convergence: geometry of the EE run
    ee_antennas = 6
    ee_users = 5

    [run]
    trials = 150
    seed = 0
    out = results
"""
import configparser
import io
from dataclasses import asdict, dataclass, replace
from typing import Optional

KINDS = ("PowerMin", "SumRate", "EE", "Convergence")

SCHEMES = {
    "PowerMin": ("NOMA", "SDMA", "OMA", "SDR"),
    "SumRate": ("NOMA", "SDMA", "OMA"),
    "EE": ("EEmax", "SEmax", "OMA"),
    "Convergence": ("Alg1", "Alg3"),
}

# "gcase" selects the region preset: 1 -> A, 2 -> B, 3 -> C
SWEEP_VARIABLES = ("rate", "delta_d", "antennas", "users", "gcase", "p_tot_dbm", "trial")
GCASE_MODELS = {1: "A", 2: "B", 3: "C"}
INT_VARIABLES = ("antennas", "users", "gcase", "trial")


class ConfigError(ValueError):
    """Invalid or incomplete scenario configuration."""


@dataclass(frozen=True)
class ScenarioConfig:
    kind: str
    sweep_variable: str
    sweep_values: tuple
    name: str = "run"
    model: str = "A"
    delta_d: Optional[float] = None
    antennas: int = 8
    users: int = 3
    pathloss_exponent: float = 2.5
    noise_dbm: float = -80.0
    schemes: tuple = ()
    series_variable: Optional[str] = None
    series_values: tuple = ()
    rate: float = 3.0
    grades: tuple = ()
    p_tot_dbm: float = 30.0
    rate_pri: float = 1.0
    p_c_w: float = 30.0
    mm_tol: float = 1e-4
    max_mm_iters: int = 50
    epsilon_k: float = 1e-3
    ee_model: str = "E"
    ee_antennas: int = 6
    ee_users: int = 5
    trials: int = 150
    seed: int = 0
    out: str = "results"

    def __post_init__(self):
        if not self.schemes and self.kind in SCHEMES:
            object.__setattr__(self, "schemes", SCHEMES[self.kind])
        validate(self)

    def with_overrides(self, **kw):
        kw = {k: v for k, v in kw.items() if v is not None}
        return replace(self, **kw) if kw else self

    def points(self):
        """``(series value, sweep value)`` pairs in output order."""
        series = self.series_values or (None,)
        return [(s, v) for s in series for v in self.sweep_values]


def _sorted(values):
    return all(a < b for a, b in zip(values, values[1:]))


def validate(cfg: ScenarioConfig):
    if cfg.kind not in KINDS:
        raise ConfigError(f"unknown scenario kind {cfg.kind!r}; expected one of {KINDS}")
    bad = [s for s in cfg.schemes if s not in SCHEMES[cfg.kind]]
    if bad or not cfg.schemes:
        raise ConfigError(f"schemes {bad or '(none)'} not available for {cfg.kind}; "
                          f"choose from {SCHEMES[cfg.kind]}")
    for var, values, label in ((cfg.sweep_variable, cfg.sweep_values, "sweep"),
                               (cfg.series_variable, cfg.series_values, "series")):
        if label == "series" and var is None:
            if values:
                raise ConfigError("series_values given without series_variable")
            continue
        if var not in SWEEP_VARIABLES:
            raise ConfigError(f"unknown {label} variable {var!r}; expected one of "
                              f"{SWEEP_VARIABLES}")
        if not values:
            raise ConfigError(f"{label} grid is empty")
        if not _sorted(values):
            raise ConfigError(f"{label} grid must be sorted and free of duplicates")
        if var == "gcase" and any(v not in GCASE_MODELS for v in values):
            raise ConfigError(f"gcase values must be in {sorted(GCASE_MODELS)}")
        if var == "delta_d" and any(not 0 <= v < 60 for v in values):
            raise ConfigError("delta_d values must lie in [0, 60)")
    if cfg.series_variable is not None and cfg.series_variable == cfg.sweep_variable:
        raise ConfigError("series and sweep variables must differ")
    if cfg.trials < 1:
        raise ConfigError("trials must be at least 1")
    if cfg.antennas < 1 or cfg.users < 1:
        raise ConfigError("antennas and users must be positive")
    if cfg.model.upper() not in "ABCDE" or len(cfg.model) != 1:
        raise ConfigError(f"unknown region model {cfg.model!r}")
    varies = {cfg.sweep_variable, cfg.series_variable}
    if cfg.model.upper() == "D" and cfg.delta_d is None and "delta_d" not in varies:
        raise ConfigError("model D needs delta_d")
    if not cfg.mm_tol > 0 or not cfg.epsilon_k > 0:
        raise ConfigError("tolerances must be positive")
    if cfg.grades and any(not g > 0 for g in cfg.grades):
        raise ConfigError("grades must be positive")


# -- INI round trip -------------------------------------------------------

_SECTIONS = {
    "scenario": ("name", "kind", "model", "delta_d", "antennas", "users", "pathloss_exponent",
                 "noise_dbm", "schemes"),
    "sweep": ("sweep_variable", "sweep_values", "series_variable", "series_values"),
    "params": ("rate", "grades", "p_tot_dbm", "rate_pri", "p_c_w", "mm_tol", "max_mm_iters",
               "epsilon_k", "ee_model", "ee_antennas", "ee_users"),
    "run": ("trials", "seed", "out"),
}
_INI_KEY = {"sweep_variable": "variable", "sweep_values": "values"}
_INT_KEYS = ("antennas", "users", "max_mm_iters", "ee_antennas", "ee_users", "trials", "seed")
_FLOAT_KEYS = ("delta_d", "pathloss_exponent", "noise_dbm", "rate", "p_tot_dbm", "rate_pri",
               "p_c_w", "mm_tol", "epsilon_k")


def _grid_value(var, text):
    return int(text) if var in INT_VARIABLES else float(text)


def _parse(key, text, raw):
    text = text.strip()
    try:
        if key in ("sweep_values", "series_values"):
            var = raw.get("sweep_variable" if key == "sweep_values" else "series_variable")
            return tuple(_grid_value(var, t) for t in text.split(",") if t.strip())
        if key == "grades":
            return tuple(float(t) for t in text.split(",") if t.strip())
        if key == "schemes":
            return tuple(t.strip() for t in text.split(",") if t.strip())
        if key in _INT_KEYS:
            return int(text)
        if key in _FLOAT_KEYS:
            return float(text)
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {text!r} ({exc})") from None
    return text


def _format(value):
    if isinstance(value, tuple):
        return ", ".join(_format(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def loads(text) -> ScenarioConfig:
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"unreadable config: {exc}") from None
    unknown = set(cp.sections()) - set(_SECTIONS)
    if unknown:
        raise ConfigError(f"unknown sections {sorted(unknown)}")
    raw = {}
    for sec, keys in _SECTIONS.items():
        if sec not in cp:
            continue
        ini_keys = {_INI_KEY.get(k, k): k for k in keys}
        for k, v in cp[sec].items():
            if k not in ini_keys:
                raise ConfigError(f"unknown key {k!r} in [{sec}]")
            if v.strip():
                raw[ini_keys[k]] = v
    for req in ("kind", "sweep_variable", "sweep_values"):
        if req not in raw:
            raise ConfigError(f"missing required key {_INI_KEY.get(req, req)!r}")
    kw = {k: _parse(k, v, raw) for k, v in raw.items()}
    try:
        return ScenarioConfig(**kw)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


def load(path) -> ScenarioConfig:
    try:
        with open(path) as fh:
            return loads(fh.read())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None


def dumps(cfg: ScenarioConfig, include_out=True) -> str:
    """Resolved config in INI form; ``loads(dumps(cfg)) == cfg``.

    ``include_out=False`` leaves out the output directory, which does not
    affect results (used for the headers of result files).
    """
    values = asdict(cfg)
    out = io.StringIO()
    for sec, keys in _SECTIONS.items():
        out.write(f"[{sec}]\n")
        for k in keys:
            v = values[k]
            if v is None or v == () or (k == "out" and not include_out):
                continue
            out.write(f"{_INI_KEY.get(k, k)} = {_format(v)}\n")
        out.write("\n")
    return out.getvalue()
