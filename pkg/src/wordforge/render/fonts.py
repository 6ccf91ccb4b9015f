"""Font catalogue: a directory of TrueType/OpenType files.

The bundled DejaVu/STIX set is the default; point ``WORDFORGE_FONT_DIR``
or constructor arguments at any other directory to swap the catalogue.
"""

from __future__ import annotations

import os
from importlib import resources
from pathlib import Path

from PIL import ImageFont

ENV_FONT_DIR = "WORDFORGE_FONT_DIR"
FONT_SUFFIXES = (".ttf", ".otf")


def bundled_font_dir() -> Path:
    return Path(str(resources.files("wordforge.data").joinpath("fonts")))


class FontCatalog:
    """Immutable, index-addressed list of font files."""

    def __init__(self, font_dir=None, default_font: str = "DejaVuSans.ttf"):
        if font_dir is None:
            font_dir = os.environ.get(ENV_FONT_DIR) or bundled_font_dir()
        self.font_dir = Path(font_dir)
        if not self.font_dir.is_dir():
            raise FileNotFoundError(f"font directory {self.font_dir} does not exist")
        self.paths = sorted(p for p in self.font_dir.iterdir()
                            if p.suffix.lower() in FONT_SUFFIXES)
        if not self.paths:
            raise FileNotFoundError(f"no font files in {self.font_dir}")
        names = [p.name for p in self.paths]
        self.default_index = names.index(default_font) if default_font in names else 0
        self._cache: dict[tuple[int, int], ImageFont.FreeTypeFont] = {}

    def __len__(self) -> int:
        return len(self.paths)

    def resolve(self, font_id: int) -> Path:
        if not 0 <= font_id < len(self.paths):
            raise ValueError(f"font id {font_id} outside catalogue of {len(self.paths)}")
        return self.paths[font_id]

    def load(self, font_id: int, size: int) -> ImageFont.FreeTypeFont:
        key = (font_id, size)
        if key not in self._cache:
            path = self.resolve(font_id)
            try:
                self._cache[key] = ImageFont.truetype(str(path), size)
            except OSError as e:
                raise OSError(f"unreadable font file {path}: {e}") from e
        return self._cache[key]
