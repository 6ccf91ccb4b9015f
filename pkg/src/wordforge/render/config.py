"""Sophistication levels and the rendering distribution parameters.

Every sampling distribution of the generator lives here as a named,
overridable config value, serialized to a flat ``key = value`` text file
so ablations are explicit about what they varied.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, fields
from pathlib import Path


class SophisticationLevel(enum.IntEnum):
    """Cumulative feature ladder of the generator.

    A: black-on-white, single default font.  B: full font catalogue with
    random font properties.  C: + layer coloring and border/shadow.
    D: + projective distortion.  E: + noise, blur, compression (and the
    optional elastic warp).  F: + natural image blending.
    """

    A = 1
    B = 2
    C = 3
    D = 4
    E = 5
    F = 6

    @classmethod
    def from_str(cls, s: str) -> "SophisticationLevel":
        try:
            return cls[s.strip().upper()]
        except KeyError:
            raise ValueError(f"unknown level {s!r} (expected a..f)") from None

    @property
    def full_fonts(self) -> bool:
        return self >= SophisticationLevel.B

    @property
    def coloring(self) -> bool:
        return self >= SophisticationLevel.C

    @property
    def projective(self) -> bool:
        return self >= SophisticationLevel.D

    @property
    def noise(self) -> bool:
        return self >= SophisticationLevel.E

    @property
    def blending(self) -> bool:
        return self >= SophisticationLevel.F


@dataclass
class RenderConfig:
    # font rendering
    font_size: int = 40
    margin: int = 4
    default_font: str = "DejaVuSans.ttf"
    kerning_min: float = -0.05  # em
    kerning_max: float = 0.10
    weight_bold_p: float = 0.3
    underline_p: float = 0.05
    curve_p: float = 0.2
    curve_amp_max: float = 4.0  # px
    curve_period_min: float = 60.0
    curve_period_max: float = 240.0
    # border / shadow
    border_p: float = 0.3
    border_width_max: int = 3
    # coloring
    min_contrast: float = 25.0  # |fg - bg| luma, 0..255 scale
    color_attempts: int = 20
    # projective distortion (fraction of layer dims)
    projective_jitter: float = 0.12
    # degradation
    noise_sigma_max: float = 8.0
    blur_sigma_max: float = 1.5
    jpeg_q_min: int = 60
    jpeg_q_max: int = 95
    elastic_enabled: bool = True
    elastic_amp_max: float = 1.5  # px
    elastic_smoothing: float = 3.0
    # natural-image blending
    blend_alpha_min: float = 0.1
    blend_alpha_max: float = 0.6
    composite_alpha_min: float = 0.85

    def to_file(self, path) -> None:
        lines = [f"{f.name} = {getattr(self, f.name)}" for f in fields(self)]
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")

    @classmethod
    def from_file(cls, path) -> "RenderConfig":
        known = {f.name: f.type for f in fields(cls)}
        kwargs = {}
        for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            key, value = key.strip(), value.strip()
            if not sep or key not in known:
                raise ValueError(f"{path}:{lineno}: unknown config entry {raw!r}")
            kwargs[key] = _parse(value, known[key])
        return cls(**kwargs)


def _parse(value: str, annot: str):
    if annot == "bool":
        if value in ("True", "true", "1"):
            return True
        if value in ("False", "false", "0"):
            return False
        raise ValueError(f"expected boolean, got {value!r}")
    if annot == "int":
        return int(value)
    if annot == "float":
        return float(value)
    return value
