"""Font loading and text measurement shared by scene sampling and rendering."""

from __future__ import annotations

from functools import lru_cache

from PIL import ImageFont


@lru_cache(maxsize=64)
def get_font(size: int) -> ImageFont.FreeTypeFont:
    """Scalable font bundled with Pillow; cached per size, deterministic metrics."""
    return ImageFont.load_default(size=size)


def text_extent(text: str, font_size: int) -> tuple[float, float, float, float]:
    """Glyph extent (x0, y0, w, h) relative to the draw anchor (left-ascender).

    The returned offsets are what ``ImageDraw.text`` produces when drawing at
    an anchor point, so ``anchor + (x0, y0)`` is the top-left of the inked box.
    """
    x0, y0, x1, y1 = get_font(font_size).getbbox(text)
    return float(x0), float(y0), float(x1 - x0), float(y1 - y0)
