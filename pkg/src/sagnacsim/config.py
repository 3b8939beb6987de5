"""Experiment-description parser: a small line-oriented format with exact
line/column diagnostics and a canonical serializer.

Grammar (frozen in docs/GRAMMAR.md): `[section]` headers and `key = value`
lines, `#` comments, blank lines ignored.  Sections: bank, sagnac, noise,
detection, sweep, output ([output] may repeat, one block per output file).
Values are integers, reals with optional SI suffix (n/u/m), angles with an
optional deg/rad suffix (radians by default), bare enum words, booleans.
Unknown sections/keys and malformed values are reported with the position of
the first offending byte; scanning continues so one pass reports everything.
Missing sections fall back to documented defaults (K=4, HeNe wavelength,
ideal detection, one 2*pi sweep of 4096 points), which reproduce the
8-fold-fringe demo out of the box.  Duplicate keys: last one wins.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field, replace

import numpy as np

from .correlator import DetectionModel
from .eraser import QWP_DISCRETE_PHASES, BANK_MODES, EraserBankSpec, phase_schedule
from .sagnac import NOISE_KINDS, NoiseSpec, SagnacConfig

SECTIONS = ("bank", "sagnac", "noise", "detection", "sweep", "output")
OUTPUT_FORMATS = ("csv", "json", "svg")

_SI = {"n": 1e-9, "u": 1e-6, "m": 1e-3}


@dataclass(frozen=True)
class ParseDiagnostic:
    line: int
    column: int
    severity: str  # "error" | "warning"
    message: str

    def __str__(self):
        return f"{self.line}:{self.column}: {self.severity}: {self.message}"


@dataclass(frozen=True)
class SweepSpec:
    zeta_start: float = 0.0
    zeta_end: float = 2.0 * math.pi
    points: int = 4096


@dataclass(frozen=True)
class OutputSpec:
    format: str
    path: str


@dataclass(frozen=True)
class RunConfig:
    bank: EraserBankSpec = field(default_factory=EraserBankSpec)
    sagnac: SagnacConfig = field(default_factory=SagnacConfig)
    noise: NoiseSpec = field(default_factory=NoiseSpec)
    detection: DetectionModel = field(default_factory=DetectionModel)
    sweep: SweepSpec = field(default_factory=SweepSpec)
    outputs: tuple[OutputSpec, ...] = ()


def default_config() -> RunConfig:
    return _assemble({}, [], [])[0]


def sweep_grid(sweep: SweepSpec) -> np.ndarray:
    """Endpoint-exclusive uniform grid over [zeta_start, zeta_end)."""
    span = sweep.zeta_end - sweep.zeta_start
    return sweep.zeta_start + span * np.arange(sweep.points) / sweep.points


# ---------------------------------------------------------------------------
# value converters; each returns the parsed value or raises _BadValue

class _BadValue(Exception):
    pass


def _conv_int(text):
    if re.fullmatch(r"[+-]?\d+", text):
        return int(text)
    raise _BadValue("expected integer")


def _conv_uint(text):
    if re.fullmatch(r"\d+", text):
        return int(text)
    raise _BadValue("expected unsigned integer")


def _conv_real(text):
    try:
        return float(text)
    except ValueError:
        pass
    if len(text) > 1 and text[-1] in _SI:
        try:
            return float(text[:-1]) * _SI[text[-1]]
        except ValueError:
            pass
    raise _BadValue("expected real number (optional SI suffix n/u/m)")


def _conv_angle(text):
    unit = 1.0
    body = text
    for suffix, scale in (("deg", math.pi / 180.0), ("rad", 1.0)):
        if text.endswith(suffix):
            body, unit = text[: -len(suffix)].strip(), scale
            break
    try:
        return float(body) * unit
    except ValueError:
        raise _BadValue("expected angle (real with optional deg/rad suffix)")


def _conv_bool(text):
    if text in ("true", "false"):
        return text == "true"
    raise _BadValue("expected true or false")


def _conv_enum(allowed):
    def conv(text):
        if text in allowed:
            return text
        raise _BadValue("expected one of: " + ", ".join(allowed))
    return conv


def _positive(conv, what="value"):
    def wrapped(text):
        x = conv(text)
        if x <= 0:
            raise _BadValue(f"{what} must be > 0")
        return x
    return wrapped


def _nonnegative(conv, what="value"):
    def wrapped(text):
        x = conv(text)
        if x < 0:
            raise _BadValue(f"{what} must be >= 0")
        return x
    return wrapped


def _conv_text(text):
    if not text:
        raise _BadValue("expected a non-empty value")
    return text


_KEYS = {
    "bank": {
        "block_count": _positive(_conv_int, "block_count"),
        "mode": _conv_enum(BANK_MODES),
        "strict": _conv_bool,
    },
    "sagnac": {
        "wavelength": _positive(_conv_real, "wavelength"),
        "enclosed_area": _positive(_conv_real, "enclosed_area"),
        "angular_velocity": _conv_real,
        "input_intensity": _nonnegative(_conv_real, "input_intensity"),
        "photon_rate": _positive(_conv_real, "photon_rate"),
    },
    "noise": {
        "kind": _conv_enum(NOISE_KINDS),
        "sigma": _nonnegative(_conv_angle, "sigma"),
        "seed": _conv_uint,
    },
    "detection": {
        "kind": _conv_enum(("ideal", "poisson")),
        "photons_per_channel": _positive(_conv_real, "photons_per_channel"),
        "seed": _conv_uint,
    },
    "sweep": {
        "zeta_start": _conv_angle,
        "zeta_end": _conv_angle,
        "points": _positive(_conv_int, "points"),
    },
    "output": {
        "format": _conv_enum(OUTPUT_FORMATS),
        "path": _conv_text,
    },
}

_SECTION_RE = re.compile(r"^\s*\[(\w+)\]\s*$")


def _scan(source: str):
    """One pass over the text: typed (section, key, value) triples plus
    every malformed line as a positioned diagnostic."""
    values: dict[str, dict] = {}
    outputs: list[dict] = []
    diags: list[ParseDiagnostic] = []
    section = None

    for lineno, raw in enumerate(source.splitlines(), start=1):
        cut = raw.find("#")
        text = raw if cut < 0 else raw[:cut]
        if not text.strip():
            continue
        indent = len(text) - len(text.lstrip())

        if text.lstrip().startswith("["):
            m = _SECTION_RE.match(text)
            if not m:
                diags.append(ParseDiagnostic(lineno, indent + 1, "error",
                                             "malformed section header (expected [name])"))
                section = None
                continue
            name = m.group(1)
            if name not in SECTIONS:
                diags.append(ParseDiagnostic(lineno, text.index("[") + 2, "error",
                                             f"unknown section [{name}]"))
                section = None
                continue
            section = name
            if name == "output":
                outputs.append({"_line": lineno, "_col": indent + 1})
            continue

        eq = text.find("=")
        if eq < 0:
            diags.append(ParseDiagnostic(lineno, indent + 1, "error",
                                         "expected 'key = value' or a [section] header"))
            continue
        key = text[:eq].strip()
        key_col = indent + 1
        if not key:
            diags.append(ParseDiagnostic(lineno, eq + 1, "error", "missing key before '='"))
            continue
        after = text[eq + 1:]
        vtext = after.strip()
        value_col = eq + 2 + (len(after) - len(after.lstrip()))
        if section is None:
            diags.append(ParseDiagnostic(lineno, key_col, "error",
                                         f"'{key}' appears before any [section] header"))
            continue
        keys = _KEYS[section]
        if key not in keys:
            diags.append(ParseDiagnostic(lineno, key_col, "error",
                                         f"unknown key '{key}' in [{section}]"))
            continue
        if not vtext:
            diags.append(ParseDiagnostic(lineno, value_col, "error", "missing value"))
            continue
        try:
            value = keys[key](vtext)
        except _BadValue as bad:
            diags.append(ParseDiagnostic(lineno, value_col, "error", str(bad)))
            continue
        if section == "output":
            outputs[-1][key] = value
        else:
            values.setdefault(section, {})[key] = value

    return values, outputs, diags


def _assemble(values, outputs, diags):
    """Fill defaults and build the typed config; diagnostics win over output."""
    bank_v = values.get("bank", {})
    k = bank_v.get("block_count", 4)
    bank = EraserBankSpec(block_count=k, mode=bank_v.get("mode", "qwp_blocks"),
                          phase_schedule=phase_schedule(k),
                          strict=bank_v.get("strict", False))

    sag_v = values.get("sagnac", {})
    sagnac = SagnacConfig(
        wavelength=sag_v.get("wavelength", 632.8e-9),
        enclosed_area=sag_v.get("enclosed_area", 1.0),
        angular_velocity=sag_v.get("angular_velocity", 7.292e-5),
        input_intensity=sag_v.get("input_intensity", 1.0),
        photon_rate=sag_v.get("photon_rate", 1e15),
    )

    noi_v = values.get("noise", {})
    noise = NoiseSpec(kind=noi_v.get("kind", "none"),
                      sigma=noi_v.get("sigma", 0.0),
                      seed=noi_v.get("seed", 0))

    det_v = values.get("detection", {})
    detection = DetectionModel(
        kind=det_v.get("kind", "ideal"),
        photons_per_channel=det_v.get("photons_per_channel",
                                      sagnac.photon_rate / bank.total_order),
        seed=det_v.get("seed", 0),
    )

    swp_v = values.get("sweep", {})
    sweep = SweepSpec(zeta_start=swp_v.get("zeta_start", 0.0),
                      zeta_end=swp_v.get("zeta_end", 2.0 * math.pi),
                      points=swp_v.get("points", 4096))

    out_specs = []
    for rec in outputs:
        missing = [key for key in ("format", "path") if key not in rec]
        if missing:
            diags.append(ParseDiagnostic(rec["_line"], rec["_col"], "error",
                                         "[output] section missing " +
                                         " and ".join(f"'{m}'" for m in missing)))
            continue
        out_specs.append(OutputSpec(format=rec["format"], path=rec["path"]))

    return RunConfig(bank=bank, sagnac=sagnac, noise=noise, detection=detection,
                     sweep=sweep, outputs=tuple(out_specs)), diags


def parse(source: str):
    """Parse config text; returns a RunConfig, or a non-empty diagnostic list."""
    values, outputs, diags = _scan(source)
    cfg, diags = _assemble(values, outputs, diags)
    errors = [d for d in diags if d.severity == "error"]
    return errors if errors else cfg


def parse_override(cfg: RunConfig, override: str):
    """Apply one 'section.key=value' override; returns (config, diagnostics)."""
    diags = []
    m = re.fullmatch(r"\s*(\w+)\.(\w+)\s*=\s*(.*?)\s*", override)
    if not m:
        return cfg, [ParseDiagnostic(1, 1, "error",
                                     f"override {override!r}: expected section.key=value")]
    section, key, vtext = m.groups()
    if section == "output" or section not in SECTIONS:
        return cfg, [ParseDiagnostic(1, 1, "error",
                                     f"override {override!r}: unknown section '{section}'")]
    if key not in _KEYS[section]:
        return cfg, [ParseDiagnostic(1, 1, "error",
                                     f"override {override!r}: unknown key '{key}'")]
    try:
        value = _KEYS[section][key](vtext)
    except _BadValue as bad:
        return cfg, [ParseDiagnostic(1, 1, "error", f"override {override!r}: {bad}")]

    if section == "bank":
        bank = cfg.bank
        if key == "block_count":
            bank = EraserBankSpec(block_count=value, mode=bank.mode,
                                  phase_schedule=phase_schedule(value),
                                  strict=bank.strict)
        else:
            bank = replace(bank, **{key: value})
        return replace(cfg, bank=bank), diags
    target = {"sagnac": "sagnac", "noise": "noise",
              "detection": "detection", "sweep": "sweep"}[section]
    return replace(cfg, **{target: replace(getattr(cfg, target), **{key: value})}), diags


def validate(cfg: RunConfig) -> list[ParseDiagnostic]:
    """Cross-field checks; an empty list means the config is runnable."""
    diags = []
    need = 64 * cfg.bank.total_order
    if cfg.sweep.points < need:
        diags.append(ParseDiagnostic(1, 1, "error",
                                     f"sweep.points below 64*N ({cfg.sweep.points} < {need})"))
    if not cfg.sweep.zeta_end > cfg.sweep.zeta_start:
        diags.append(ParseDiagnostic(1, 1, "error",
                                     "sweep.zeta_end must exceed sweep.zeta_start"))
    if cfg.noise.kind == "differential_arm":
        diags.append(ParseDiagnostic(1, 1, "error",
                                     "differential_arm noise cannot occur in the shared-path "
                                     "ring topology (it exists only for the MZI baseline)"))
    if cfg.bank.mode == "qwp_blocks" and cfg.bank.strict:
        off_grid = [xi for xi in cfg.bank.phase_schedule
                    if min(abs(xi - q) for q in QWP_DISCRETE_PHASES) > 1e-12]
        if off_grid:
            diags.append(ParseDiagnostic(1, 1, "error",
                                         "strict qwp_blocks mode: schedule contains phases "
                                         "a discrete QWP cannot realize "
                                         f"(first: {off_grid[0]:.6g} rad)"))
    span = cfg.sweep.zeta_end - cfg.sweep.zeta_start
    if abs(span - 2.0 * math.pi) > 1e-9:
        diags.append(ParseDiagnostic(1, 1, "warning",
                                     "sweep does not span one full 2*pi period; "
                                     "fringe-count metrics will be omitted"))
    if cfg.detection.kind == "poisson" and cfg.detection.photons_per_channel <= 0:
        diags.append(ParseDiagnostic(1, 1, "error",
                                     "poisson detection requires photons_per_channel > 0"))
    return diags


def canonical_text(cfg: RunConfig) -> str:
    """Serialize so that parse(canonical_text(cfg)) == cfg, byte for byte stable."""
    lines = [
        "[bank]",
        f"block_count = {cfg.bank.block_count}",
        f"mode = {cfg.bank.mode}",
        f"strict = {'true' if cfg.bank.strict else 'false'}",
        "",
        "[sagnac]",
        f"wavelength = {cfg.sagnac.wavelength!r}",
        f"enclosed_area = {cfg.sagnac.enclosed_area!r}",
        f"angular_velocity = {cfg.sagnac.angular_velocity!r}",
        f"input_intensity = {cfg.sagnac.input_intensity!r}",
        f"photon_rate = {cfg.sagnac.photon_rate!r}",
        "",
        "[noise]",
        f"kind = {cfg.noise.kind}",
        f"sigma = {cfg.noise.sigma!r}",
        f"seed = {cfg.noise.seed}",
        "",
        "[detection]",
        f"kind = {cfg.detection.kind}",
        f"photons_per_channel = {cfg.detection.photons_per_channel!r}",
        f"seed = {cfg.detection.seed}",
        "",
        "[sweep]",
        f"zeta_start = {cfg.sweep.zeta_start!r}",
        f"zeta_end = {cfg.sweep.zeta_end!r}",
        f"points = {cfg.sweep.points}",
    ]
    for out in cfg.outputs:
        lines += ["", "[output]", f"format = {out.format}", f"path = {out.path}"]
    return "\n".join(lines) + "\n"
