"""Binary PGM/PPM emission of log-scale density images.

Gray value: linear ramp over the clamped log10-mass range [-9, 0] mapped to
[0, 255]; the floor sentinel (zero-mass pixels) clamps to 0.  The color
variant applies a fixed blue -> green -> red ramp over the same range.
"""

from __future__ import annotations

import numpy as np

from .errors import DomainError
from .measures import DensityImage

LOG_LO = -9.0
LOG_HI = 0.0


def density_bytes(img: DensityImage) -> np.ndarray:
    v = np.clip(np.nan_to_num(img.values, neginf=LOG_LO), LOG_LO, LOG_HI)
    scaled = 255.0 * (v - LOG_LO) / (LOG_HI - LOG_LO)
    return np.floor(scaled + 0.5).astype(np.uint8)


def render_density_pgm(img: DensityImage, path) -> int:
    """Write a binary "P5" grayscale image; returns bytes written."""
    px = img.px
    if img.values.shape != (px, px):
        raise DomainError(f"density image shape {img.values.shape} != ({px}, {px})")
    header = f"P5\n{px} {px}\n255\n".encode("ascii")
    payload = density_bytes(img).tobytes()
    data = header + payload
    with open(path, "wb") as fh:
        fh.write(data)
    return len(data)


def _ramp_rgb(byte_vals: np.ndarray) -> np.ndarray:
    """Blue -> green -> red, piecewise linear with the break at mid-range."""
    t = byte_vals.astype(np.float64) / 255.0
    rgb = np.zeros(byte_vals.shape + (3,), dtype=np.float64)
    lo = t <= 0.5
    u = np.where(lo, 2.0 * t, 2.0 * t - 1.0)
    rgb[..., 0] = np.where(lo, 0.0, u)          # red rises in the top half
    rgb[..., 1] = np.where(lo, u, 1.0 - u)      # green peaks in the middle
    rgb[..., 2] = np.where(lo, 1.0 - u, 0.0)    # blue fades in the bottom half
    return np.floor(rgb * 255.0 + 0.5).astype(np.uint8)


def render_density_ppm(img: DensityImage, path) -> int:
    """Write a binary "P6" color image with the documented ramp."""
    px = img.px
    header = f"P6\n{px} {px}\n255\n".encode("ascii")
    payload = _ramp_rgb(density_bytes(img)).tobytes()
    data = header + payload
    with open(path, "wb") as fh:
        fh.write(data)
    return len(data)
