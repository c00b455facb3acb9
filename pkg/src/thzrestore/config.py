"""Pipeline configuration: INI sections addressed as ``section.key``.

Example::

    [optics]
    pixel_pitch = 1.0

    [phantom]
    shapes = disk 20 22 9 0.9 0.3; rect 40 8 56 24 0.6 0.8

Every key has a default; ``overrides`` (``--set section.key=value``) win over
the file.
"""
from __future__ import annotations

import configparser
import dataclasses
from dataclasses import dataclass, field

from . import forward_model
from .forward_model import Disk, NoiseParams, Rect
from .nnet.loss import LossConfig
from .nnet.train import TrainConfig
from .nnet.unet import Architecture
from .psf import OpticsConfig
from .r2r import R2RConfig
from .spectral import BandSelection


class ConfigError(ValueError):
    pass


@dataclass
class PhantomSection:
    height: int = 64
    width: int = 64
    bands: int = 20
    df: float = 0.1
    f_start: float = 0.1
    background: float = 0.3
    absorption: float = 0.5
    texture: float = 0.0
    shapes: str = "disk 18 20 9 0.9 0.3; disk 44 22 8 0.7 0.6; disk 30 45 11 0.55 0.15"

    def parsed_shapes(self):
        return parse_shapes(self.shapes)


@dataclass
class NoiseSection:
    level: float = 25.0  # baseline sigma on the 0..255 scale
    p: float = 2.0
    beta: float = -1.0  # < 0: derive from sigma_ratio over [ratio_f_low, ratio_f_high]
    sigma_ratio: float = 2.0
    ratio_f_low: float = 0.1
    ratio_f_high: float = 2.0
    poisson_gain: float = 0.002

    def params(self):
        sigma0_sq = (self.level / 255.0) ** 2
        beta = self.beta
        if beta < 0:
            beta = forward_model.beta_for_sigma_ratio(
                sigma0_sq, self.p, self.ratio_f_low, self.ratio_f_high, self.sigma_ratio)
        return NoiseParams(sigma0_sq, beta, self.p, self.poisson_gain)


@dataclass
class PsfSection:
    truncation: float = 3.0
    max_size: int = 51


@dataclass
class PcaSection:
    retain: str = "5"

    def value(self):
        text = self.retain.strip()
        if "." in text:
            return float(text)
        return int(text)


@dataclass
class BandsSection:
    f_initial: float = -1.0  # < 0: whole cube
    f_end: float = -1.0

    def selection(self):
        if self.f_initial < 0 and self.f_end < 0:
            return None
        return BandSelection(self.f_initial, self.f_end)


@dataclass
class ArchSection:
    widths: str = "16,32,64"
    passthrough: bool = True

    def architecture(self):
        return Architecture(tuple(int(w) for w in self.widths.split(",")), self.passthrough)


@dataclass
class RunSection:
    seed: int = 0
    window: str = "none"


@dataclass
class PipelineConfig:
    run: RunSection = field(default_factory=RunSection)
    optics: OpticsConfig = field(default_factory=lambda: OpticsConfig(pixel_pitch=1.0))
    psf: PsfSection = field(default_factory=PsfSection)
    phantom: PhantomSection = field(default_factory=PhantomSection)
    noise: NoiseSection = field(default_factory=NoiseSection)
    bands: BandsSection = field(default_factory=BandsSection)
    pca: PcaSection = field(default_factory=PcaSection)
    r2r: R2RConfig = field(default_factory=R2RConfig)
    loss: LossConfig = field(default_factory=LossConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    arch: ArchSection = field(default_factory=ArchSection)

    def validate(self):
        """Raise ConfigError naming the first invalid field."""
        try:
            self.noise.params()
            self.bands.selection()
            self.arch.architecture()
            self.phantom.parsed_shapes()
            self.pca.value()
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        return self

    def as_dict(self):
        return {name: dataclasses.asdict(getattr(self, name)) for name in SECTIONS}


SECTIONS = [f.name for f in dataclasses.fields(PipelineConfig)]


def parse_shapes(text):
    shapes = []
    for chunk in text.split(";"):
        parts = chunk.split()
        if not parts:
            continue
        kind, nums = parts[0].lower(), [float(v) for v in parts[1:]]
        if kind == "disk" and len(nums) in (4, 5):
            shapes.append(Disk(*nums))
        elif kind == "rect" and len(nums) in (5, 6):
            shapes.append(Rect(int(nums[0]), int(nums[1]), int(nums[2]), int(nums[3]), *nums[4:]))
        else:
            raise ConfigError(f"cannot parse shape {chunk.strip()!r} "
                              "(disk cx cy r amp [decay] | rect x0 y0 x1 y1 amp [decay])")
    return shapes


def _coerce(raw, current, key):
    try:
        if isinstance(current, bool):
            low = raw.strip().lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        if isinstance(current, int):
            return int(raw)
        if isinstance(current, float):
            return float(raw)
        return raw.strip()
    except ValueError:
        raise ConfigError(f"{key}: cannot interpret {raw!r} as {type(current).__name__}") from None


def load_config(path=None, overrides=(), seed=None):
    """Build a validated PipelineConfig from an optional INI file plus overrides."""
    values = {}
    if path is not None:
        parser = configparser.ConfigParser()
        if not parser.read(path):
            raise ConfigError(f"cannot read config file {path}")
        for section in parser.sections():
            for key, raw in parser.items(section):
                values[f"{section}.{key}"] = raw
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not key=value")
        key, raw = item.split("=", 1)
        values[key.strip()] = raw
    if seed is not None:
        values["run.seed"] = str(seed)

    base = PipelineConfig()
    per_section = {name: {} for name in SECTIONS}
    for key, raw in values.items():
        section, _, name = key.partition(".")
        if section not in per_section:
            raise ConfigError(f"unknown config section in {key!r}")
        current_obj = getattr(base, section)
        fields = {f.name for f in dataclasses.fields(current_obj)}
        if name not in fields:
            raise ConfigError(f"unknown config key {key!r}")
        per_section[section][name] = _coerce(raw, getattr(current_obj, name), key)

    seed_value = int(per_section["run"].get("seed", base.run.seed))
    for section in ("r2r", "train"):
        per_section[section].setdefault("seed", seed_value)

    built = {}
    for section, kwargs in per_section.items():
        current_obj = getattr(base, section)
        try:
            built[section] = dataclasses.replace(current_obj, **kwargs)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    return PipelineConfig(**built).validate()


def dump_config(cfg):
    """INI text that reloads to an identical config."""
    lines = []
    for section, values in cfg.as_dict().items():
        lines.append(f"[{section}]")
        for key, value in values.items():
            if isinstance(value, bool):
                value = "true" if value else "false"
            elif isinstance(value, float):
                value = repr(value)
            lines.append(f"{key} = {value}")
        lines.append("")
    return "\n".join(lines)
