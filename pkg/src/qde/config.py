"""Run configuration: an INI file whose keys carry their unit as a suffix.

Frequencies are written in units of 2 pi x GHz or 2 pi x MHz (``_ghz`` and
``_mhz`` keys), lengths in nm, fields in V/m and charge-stability energies
in units of the on-site repulsion U.  Unknown sections or keys are errors.
"""

import configparser
import hashlib
import json
from dataclasses import dataclass, field

from .errors import ConfigError


def _floats(text):
    return tuple(float(x) for x in text.replace(",", " ").split())


def _bool(text):
    v = text.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _int(text):
    v = float(text)
    if v != int(v):
        raise ValueError(f"not an integer: {text!r}")
    return int(v)


def _optional_float(text):
    return None if text.strip().lower() in ("", "none") else float(text)


# section -> key -> (parser, default)
SCHEMA = {
    "qubit": {
        "delta_ghz": (float, 30.0),
        "t_c_ghz": (float, 14.0),
    },
    "mediator": {
        "lambda_nm": (float, 200.0),
        "j_c_ghz": (float, 6.0),
        "omega_s_ghz": (_optional_float, None),
    },
    "drive": {
        "field_v_per_m": (float, 2.0),
        "resonant": (_bool, True),
        "r": (_int, -100),
        "m": (_int, 0),
        "phase_rad": (float, 0.0),
    },
    "geometry": {
        "a_nm": (float, 500.0),
        "sigma_nm": (float, 20.0),
        "permittivity": (float, 11.7),
    },
    "noise": {
        "gamma_mhz": (float, 0.25),
        "gamma_m_mhz": (float, 0.37),
    },
    "stability": {
        "v_over_u": (float, 0.33),
        "eps2_over_u": (float, 0.90),
        "v_m_over_u": (float, 0.22),
        "u_c_over_u": (float, 0.91),
        "v_c_over_u": (float, 0.28),
        "eps_m_over_u": (float, 2.1),
        "v_mc_over_u": (float, -0.98),
    },
    "grids": {
        "stability_nx": (_int, 401),
        "stability_ny": (_int, 401),
        "spectrum_max_delta_over_tc": (float, 5.0),
        "spectrum_points": (_int, 101),
        "sweep_lambda_nm": (_floats, (50.0, 300.0, 10.0)),
        "sweep_a_nm": (_floats, (400.0, 500.0, 600.0, 800.0)),
        "fidelity_points": (_int, 21),
        "fidelity_gamma_max_mhz": (float, 1.0),
        "fidelity_gamma_m_max_mhz": (float, 1.0),
        "fidelity_steps_per_gate": (_int, 2000),
        "leakage_steps_per_gate": (_int, 4000),
        "leakage_sample_ns": (float, 0.01),
        "leakage_gates": (float, 9.0),
    },
    "output": {
        "directory": (str, "qde_out"),
        "formats": (lambda s: tuple(x.strip() for x in s.split(",") if x.strip()), ("csv", "json")),
    },
}


@dataclass(frozen=True)
class RunConfig:
    values: dict = field(default_factory=dict)

    def __getitem__(self, key):
        section, name = key.split(".")
        return self.values[section][name]

    def canonical(self):
        return json.dumps(self.values, sort_keys=True, default=list)

    @property
    def digest(self):
        return hashlib.sha256(self.canonical().encode()).hexdigest()

    def with_values(self, **overrides):
        """Copy with ``section__key=value`` overrides (already parsed)."""
        vals = {s: dict(v) for s, v in self.values.items()}
        for k, v in overrides.items():
            section, name = k.split("__")
            if section not in SCHEMA or name not in SCHEMA[section]:
                raise ConfigError(f"unknown setting {section}.{name}")
            vals[section][name] = v
        return RunConfig(vals)


def defaults():
    return RunConfig({s: {k: d for k, (_, d) in keys.items()} for s, keys in SCHEMA.items()})


def parse_text(text):
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse config: {exc}") from exc
    vals = {s: dict(v) for s, v in defaults().values.items()}
    for section in cp.sections():
        if section not in SCHEMA:
            raise ConfigError(f"unknown section [{section}]")
        for key, raw in cp.items(section):
            if key not in SCHEMA[section]:
                raise ConfigError(f"unknown key {section}.{key}")
            parser = SCHEMA[section][key][0]
            try:
                vals[section][key] = parser(raw)
            except ValueError as exc:
                raise ConfigError(f"{section}.{key}: {exc}") from exc
    cfg = RunConfig(vals)
    validate(cfg)
    return cfg


def load(path=None):
    if path is None:
        return defaults()
    try:
        with open(path, encoding="utf-8") as fh:
            return parse_text(fh.read())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc


def validate(cfg):
    checks = [
        (cfg["qubit.delta_ghz"] > 0, "qubit.delta_ghz must be positive"),
        (cfg["qubit.t_c_ghz"] >= 0, "qubit.t_c_ghz must be non-negative"),
        (cfg["mediator.lambda_nm"] > 0, "mediator.lambda_nm must be positive"),
        (cfg["mediator.j_c_ghz"] > 0, "mediator.j_c_ghz must be positive"),
        (cfg["geometry.a_nm"] > 0, "geometry.a_nm must be positive"),
        (cfg["geometry.sigma_nm"] >= 0, "geometry.sigma_nm must be non-negative"),
        (cfg["geometry.permittivity"] > 0, "geometry.permittivity must be positive"),
        (cfg["drive.field_v_per_m"] >= 0, "drive.field_v_per_m must be non-negative"),
        (cfg["drive.resonant"], "only the resonantly driven mediator is supported"),
        (cfg["noise.gamma_mhz"] >= 0 and cfg["noise.gamma_m_mhz"] >= 0, "rates must be non-negative"),
        (cfg["grids.stability_nx"] >= 1 and cfg["grids.stability_ny"] >= 1, "stability grid is empty"),
        (cfg["grids.spectrum_points"] >= 1, "spectrum grid is empty"),
        (cfg["grids.fidelity_points"] >= 1, "fidelity grid is empty"),
        (len(cfg["grids.sweep_lambda_nm"]) == 3 and cfg["grids.sweep_lambda_nm"][2] > 0,
         "grids.sweep_lambda_nm is 'min, max, step' with a positive step"),
        (len(cfg["grids.sweep_a_nm"]) >= 1, "grids.sweep_a_nm is empty"),
        (cfg["grids.leakage_gates"] > 0 and cfg["grids.leakage_sample_ns"] > 0, "leakage window must be positive"),
        (set(cfg["output.formats"]) <= {"csv", "json"}, "output.formats takes csv and/or json"),
    ]
    for ok, msg in checks:
        if not ok:
            raise ConfigError(msg)
    return cfg


def as_dict(cfg):
    return {s: dict(v) for s, v in cfg.values.items()}


def example_text():
    """Full default config in file form."""
    lines = []
    for section, keys in SCHEMA.items():
        lines.append(f"[{section}]")
        for k, (_, d) in keys.items():
            if isinstance(d, tuple):
                d = ", ".join(str(x) for x in d)
            elif d is None:
                d = "none"
            lines.append(f"{k} = {d}")
        lines.append("")
    return "\n".join(lines)
