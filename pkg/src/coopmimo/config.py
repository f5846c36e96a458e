"""Simulation configuration: defaults, validation, and the key-value format.

The on-disk format is an INI-style UTF-8 document with one section per
subsystem.  Parsing is fail-closed: unknown sections or keys are rejected
with the offending name, and every constraint violation names its field.
An empty document yields the default configuration (4-antenna source,
2-antenna relay and destination, 0.4/0.3/0.5 km topology, QPSK, one bit
per symbol per stream).
"""

import configparser
import io
from dataclasses import dataclass, field, replace

from .protocol import ProtocolKind


class ConfigError(ValueError):
    """Malformed or inconsistent configuration."""


PRECODER_MODES = ("proposed", "disjoint", "nonadaptive", "per_node")
RHO_METHODS = ("integrated", "per_k")
DEFAULT_PROTOCOLS = (
    ProtocolKind.PDF,
    ProtocolKind.DF,
    ProtocolKind.AF,
    ProtocolKind.NO_RELAY,
)


@dataclass(frozen=True)
class SimConfig:
    # antennas and stream blocks
    n_s: int = 4
    n_r: int = 2
    n_d: int = 2
    n1: int = 2
    n2: int = 2
    modulation: str = "qpsk"
    # node geometry (km)
    d_sr_km: float = 0.4
    d_rd_km: float = 0.3
    d_sd_km: float = 0.5
    # frame: phase length in symbols and payload bits per stream
    t_symbols: int = 96
    l_bits: int = 96
    # per-link antenna correlation magnitudes
    rho_sd: float = 0.5
    rho_sr: float = 0.5
    rho_rd: float = 0.5
    # power budget and precoder mode
    p0: float = 1.0
    mode: str = "proposed"
    alpha_s: float | None = None
    alpha_r: float | None = None
    rho_method: str = "integrated"
    # symbol-error-rate model for the interference residual terms
    ser_mode: str = "from_sinr"
    ser_fixed: float | None = None
    # sweep controls
    snr_db: tuple = (0.0, 10.0, 20.0, 30.0)
    protocols: tuple = DEFAULT_PROTOCOLS
    trials: int = 100_000
    seed: int = 1
    workers: int = 1
    target_outage: float = 1e-2

    def __post_init__(self):
        _positive_int = (
            ("n_s", self.n_s), ("n_r", self.n_r), ("n_d", self.n_d),
            ("n1", self.n1), ("n2", self.n2),
            ("t_symbols", self.t_symbols), ("l_bits", self.l_bits),
            ("trials", self.trials), ("workers", self.workers),
        )
        for name, val in _positive_int:
            if not isinstance(val, int) or val < 1:
                raise ConfigError(f"{name} must be a positive integer, got {val!r}")
        if self.n1 + self.n2 != self.n_s:
            raise ConfigError(
                f"n1 + n2 must equal n_s ({self.n1} + {self.n2} != {self.n_s})"
            )
        for name, val in (
            ("d_sr_km", self.d_sr_km), ("d_rd_km", self.d_rd_km),
            ("d_sd_km", self.d_sd_km), ("p0", self.p0),
        ):
            if not val > 0:
                raise ConfigError(f"{name} must be positive, got {val!r}")
        for name, val in (
            ("rho_sd", self.rho_sd), ("rho_sr", self.rho_sr), ("rho_rd", self.rho_rd)
        ):
            if not 0.0 <= val < 1.0:
                raise ConfigError(f"{name} must lie in [0, 1), got {val!r}")
        if self.modulation not in ("qpsk", "16qam"):
            raise ConfigError(f"modulation must be qpsk or 16qam, got {self.modulation!r}")
        if self.mode not in PRECODER_MODES:
            raise ConfigError(f"mode must be one of {PRECODER_MODES}, got {self.mode!r}")
        if self.rho_method not in RHO_METHODS:
            raise ConfigError(f"rho_method must be one of {RHO_METHODS}")
        if self.ser_mode not in ("from_sinr", "fixed"):
            raise ConfigError(f"ser_mode must be from_sinr or fixed, got {self.ser_mode!r}")
        if self.ser_mode == "fixed" and (
            self.ser_fixed is None or not 0.0 < self.ser_fixed < 1.0
        ):
            raise ConfigError("ser_fixed must lie in (0, 1) when ser_mode is fixed")
        if self.mode == "per_node":
            if self.alpha_s is None or self.alpha_r is None:
                raise ConfigError("per_node mode requires alpha_s and alpha_r")
            if self.alpha_s < 0 or self.alpha_r < 0:
                raise ConfigError("alpha_s and alpha_r must be nonnegative")
            if self.alpha_s + self.alpha_r > self.p0 + 1e-9:
                raise ConfigError("alpha_s + alpha_r exceeds the total budget p0")
        if not self.snr_db or not all(
            isinstance(s, float) and abs(s) < 1e6 for s in self.snr_db
        ):
            raise ConfigError("snr_db must be a non-empty tuple of finite floats")
        if not self.protocols:
            raise ConfigError("protocols must not be empty")
        for p in self.protocols:
            if not isinstance(p, ProtocolKind):
                raise ConfigError(f"unknown protocol {p!r}")
        if not 0.0 < self.target_outage < 1.0:
            raise ConfigError(f"target_outage must lie in (0, 1), got {self.target_outage!r}")
        if not isinstance(self.seed, int) or self.seed < 0:
            raise ConfigError(f"seed must be a nonnegative integer, got {self.seed!r}")

    @property
    def rate_bits(self):
        """Per-stream spectral efficiency target, bits per symbol."""
        return self.l_bits / self.t_symbols

    @property
    def d_thresh(self):
        """SINR threshold for decodability: 2^(L/T) - 1."""
        return 2.0 ** self.rate_bits - 1.0


# section -> key -> (attribute, parser) for the INI document
def _parse_snr_spec(text):
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ConfigError(f"SNR range must be START:STOP:STEP, got {text!r}")
        try:
            start, stop, step = (float(p) for p in parts)
        except ValueError as e:
            raise ConfigError(f"bad SNR range {text!r}: {e}") from None
        if step <= 0:
            raise ConfigError("SNR step must be positive")
        n = int(round((stop - start) / step))
        points = tuple(round(start + i * step, 9) for i in range(n + 1))
        if not points or points[-1] > stop + 1e-9:
            raise ConfigError(f"empty SNR range {text!r}")
        return points
    try:
        return tuple(float(p) for p in text.split(","))
    except ValueError as e:
        raise ConfigError(f"bad SNR list {text!r}: {e}") from None


def _parse_protocols(text):
    out = []
    for name in text.split(","):
        name = name.strip().upper()
        if not name:
            continue
        try:
            out.append(ProtocolKind[name])
        except KeyError:
            valid = ", ".join(p.name for p in ProtocolKind)
            raise ConfigError(f"unknown protocol {name!r} (expected one of {valid})") from None
    if not out:
        raise ConfigError("protocol list is empty")
    return tuple(out)


def _int(text):
    return int(text.strip())


def _float(text):
    return float(text.strip())


def _opt_float(text):
    text = text.strip()
    return None if not text else float(text)


def _lower(text):
    return text.strip().lower()


_SCHEMA = {
    "system": {
        "n_s": ("n_s", _int),
        "n_r": ("n_r", _int),
        "n_d": ("n_d", _int),
        "n1": ("n1", _int),
        "n2": ("n2", _int),
        "modulation": ("modulation", _lower),
    },
    "topology": {
        "d_sr_km": ("d_sr_km", _float),
        "d_rd_km": ("d_rd_km", _float),
        "d_sd_km": ("d_sd_km", _float),
    },
    "frame": {
        "t_symbols": ("t_symbols", _int),
        "l_bits": ("l_bits", _int),
    },
    "correlation": {
        "rho_sd": ("rho_sd", _float),
        "rho_sr": ("rho_sr", _float),
        "rho_rd": ("rho_rd", _float),
    },
    "power": {
        "p0": ("p0", _float),
        "mode": ("mode", _lower),
        "alpha_s": ("alpha_s", _opt_float),
        "alpha_r": ("alpha_r", _opt_float),
        "rho_method": ("rho_method", _lower),
    },
    "ser": {
        "mode": ("ser_mode", _lower),
        "fixed_value": ("ser_fixed", _opt_float),
    },
    "sweep": {
        "snr_db": ("snr_db", _parse_snr_spec),
        "protocols": ("protocols", _parse_protocols),
        "trials": ("trials", _int),
        "seed": ("seed", _int),
        "workers": ("workers", _int),
        "target_outage": ("target_outage", _float),
    },
}


def parse_config(text):
    """Parse a config document into a validated SimConfig.

    Unknown sections and keys are errors, as are malformed values; error
    messages carry the section/key so a bad file points at itself.
    """
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(text)
    except configparser.Error as e:
        raise ConfigError(f"config parse error: {e}") from None

    overrides = {}
    for section in parser.sections():
        if section not in _SCHEMA:
            raise ConfigError(f"unknown config section [{section}]")
        for key, raw in parser.items(section):
            if key not in _SCHEMA[section]:
                raise ConfigError(f"unknown key {key!r} in section [{section}]")
            attr, convert = _SCHEMA[section][key]
            try:
                overrides[attr] = convert(raw)
            except ConfigError:
                raise
            except ValueError as e:
                raise ConfigError(f"bad value for [{section}] {key}: {e}") from None
    return SimConfig(**overrides)


def load_config(path):
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


def serialize_config(cfg):
    """Render a SimConfig back to the document format (round-trips)."""
    parser = configparser.ConfigParser(interpolation=None)
    values = {
        "system": {
            "n_s": cfg.n_s, "n_r": cfg.n_r, "n_d": cfg.n_d,
            "n1": cfg.n1, "n2": cfg.n2, "modulation": cfg.modulation,
        },
        "topology": {
            "d_sr_km": cfg.d_sr_km, "d_rd_km": cfg.d_rd_km, "d_sd_km": cfg.d_sd_km,
        },
        "frame": {"t_symbols": cfg.t_symbols, "l_bits": cfg.l_bits},
        "correlation": {
            "rho_sd": cfg.rho_sd, "rho_sr": cfg.rho_sr, "rho_rd": cfg.rho_rd,
        },
        "power": {
            "p0": cfg.p0,
            "mode": cfg.mode,
            "alpha_s": "" if cfg.alpha_s is None else cfg.alpha_s,
            "alpha_r": "" if cfg.alpha_r is None else cfg.alpha_r,
            "rho_method": cfg.rho_method,
        },
        "ser": {
            "mode": cfg.ser_mode,
            "fixed_value": "" if cfg.ser_fixed is None else cfg.ser_fixed,
        },
        "sweep": {
            "snr_db": ",".join(repr(s) for s in cfg.snr_db),
            "protocols": ",".join(p.name for p in cfg.protocols),
            "trials": cfg.trials,
            "seed": cfg.seed,
            "workers": cfg.workers,
            "target_outage": cfg.target_outage,
        },
    }
    for section, keys in values.items():
        parser[section] = {k: str(v) for k, v in keys.items()}
    out = io.StringIO()
    parser.write(out)
    return out.getvalue()


def with_overrides(cfg, **kwargs):
    """Functional update helper (validates the result)."""
    return replace(cfg, **kwargs)
