"""Scene imagery and image revision providers.

The mocks render fully deterministic PNGs with Pillow: a scene is a placeholder
panorama view labeled with its view parameters, and a revision composites the
instruction text onto the source image. Byte-for-byte reproducibility is what
makes session exports replayable in tests.
"""
from __future__ import annotations

import io
import logging
import textwrap
from abc import ABC, abstractmethod
from typing import Optional

import requests as _requests
from PIL import Image, ImageDraw, ImageFont

from .errors import ImageProviderError, SceneProviderError
from .util import digest_of, sha256_hex

log = logging.getLogger(__name__)

DEFAULT_SCENE_SIZE = (640, 640)


class SceneProvider(ABC):
    @abstractmethod
    def fetch_scene_image(self, view: dict) -> bytes:
        """PNG bytes for the given view params. Raises SceneProviderError."""


class ImageRevisionProvider(ABC):
    @abstractmethod
    def revise(self, source_png: bytes, instruction: str) -> bytes:
        """PNG bytes of the revised design. Raises ImageProviderError."""


def _font():
    return ImageFont.load_default()


def _png_bytes(img: Image.Image) -> bytes:
    buf = io.BytesIO()
    img.save(buf, format="PNG")
    return buf.getvalue()


class MockSceneProvider(SceneProvider):
    """Placeholder street scene: colors derive from the panorama id, the view
    parameters are printed into the image, so every distinct view yields
    distinct but reproducible bytes."""

    def __init__(self, size: tuple[int, int] = DEFAULT_SCENE_SIZE):
        self.size = size

    def fetch_scene_image(self, view: dict) -> bytes:
        digest = digest_of(view)
        seed = bytes.fromhex(digest[:12])
        sky = (100 + seed[0] % 100, 140 + seed[1] % 80, 180 + seed[2] % 60)
        ground = (60 + seed[3] % 60, 70 + seed[4] % 60, 60 + seed[5] % 40)
        width, height = self.size
        img = Image.new("RGB", self.size, sky)
        draw = ImageDraw.Draw(img)
        horizon = int(height * 0.55)
        draw.rectangle([0, horizon, width, height], fill=ground)
        # A "street" wedge gives the placeholder some depth.
        road = (ground[0] // 2, ground[1] // 2, ground[2] // 2)
        draw.polygon([(width // 2 - 30, horizon), (width // 2 + 30, horizon),
                      (int(width * 0.85), height), (int(width * 0.15), height)], fill=road)
        lines = [
            "street scene placeholder",
            f"panorama {view['panorama_id']}",
            f"heading {view['heading']:.1f}  pitch {view['pitch']:.1f}  fov {view['fov']:.1f}",
            f"lat {view['latitude']:.6f}  lon {view['longitude']:.6f}",
        ]
        draw.multiline_text((12, 12), "\n".join(lines), fill=(255, 255, 255), font=_font())
        return _png_bytes(img)


class MockImageRevisionProvider(ImageRevisionProvider):
    """Composites the instruction text onto the source image inside a caption
    band; a thin border colored from the instruction digest makes any prompt
    change visible even where text clips."""

    MAX_CAPTION_LINES = 14

    def revise(self, source_png: bytes, instruction: str) -> bytes:
        try:
            img = Image.open(io.BytesIO(source_png)).convert("RGB")
        except Exception as exc:
            raise ImageProviderError(f"unreadable source image: {exc}") from exc
        width, height = img.size
        digest = digest_of(instruction)
        seed = bytes.fromhex(digest[:6])
        accent = (80 + seed[0] % 176, 80 + seed[1] % 176, 80 + seed[2] % 176)
        draw = ImageDraw.Draw(img)
        draw.rectangle([0, 0, width - 1, height - 1], outline=accent, width=4)
        lines: list[str] = []
        for raw in instruction.splitlines():
            if not raw.strip():
                continue
            lines.extend(textwrap.wrap(raw.strip(), width=max(20, width // 8)))
            if len(lines) >= self.MAX_CAPTION_LINES:
                lines = lines[: self.MAX_CAPTION_LINES]
                break
        band_height = 16 + 11 * len(lines)
        band_top = max(0, height - band_height)
        band = Image.new("RGB", (width, height - band_top), (20, 24, 28))
        img.paste(band, (0, band_top))
        draw.multiline_text((8, band_top + 8), "\n".join(lines),
                            fill=(235, 235, 235), font=_font())
        return _png_bytes(img)


class LiveSceneProvider(SceneProvider):
    """Street-level static imagery over HTTP (panorama id + view params)."""

    def __init__(self, endpoint: Optional[str], api_key: Optional[str],
                 size: tuple[int, int] = DEFAULT_SCENE_SIZE, timeout: float = 30.0):
        self.endpoint = endpoint
        self.api_key = api_key
        self.size = size
        self.timeout = timeout

    def fetch_scene_image(self, view: dict) -> bytes:
        if not self.endpoint or not self.api_key:
            raise SceneProviderError("live scene provider is missing endpoint or api key")
        params = {
            "pano": view["panorama_id"],
            "heading": view["heading"],
            "pitch": view["pitch"],
            "fov": view["fov"],
            "size": f"{self.size[0]}x{self.size[1]}",
            "key": self.api_key,
        }
        try:
            resp = _requests.get(self.endpoint, params=params, timeout=self.timeout)
            resp.raise_for_status()
        except Exception as exc:
            raise SceneProviderError(f"scene fetch failed: {exc}") from exc
        if not resp.content:
            raise SceneProviderError("scene fetch returned no image data")
        return resp.content


class LiveImageRevisionProvider(ImageRevisionProvider):
    """Image-editing endpoint taking the source image and instruction text."""

    def __init__(self, endpoint: Optional[str], api_key: Optional[str],
                 timeout: float = 60.0):
        self.endpoint = endpoint
        self.api_key = api_key
        self.timeout = timeout

    def revise(self, source_png: bytes, instruction: str) -> bytes:
        if not self.endpoint or not self.api_key:
            raise ImageProviderError("live image provider is missing endpoint or api key")
        try:
            resp = _requests.post(
                self.endpoint,
                files={"image": ("source.png", source_png, "image/png")},
                data={"instruction": instruction},
                headers={"Authorization": f"Bearer {self.api_key}"},
                timeout=self.timeout)
            resp.raise_for_status()
        except Exception as exc:
            raise ImageProviderError(f"image revision failed: {exc}") from exc
        if not resp.content:
            raise ImageProviderError("image revision returned no image data")
        return resp.content


def content_hash(data: bytes) -> str:
    return sha256_hex(data)
