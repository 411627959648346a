"""SLM phase-mask synthesis and diffraction-order analysis.

Masks are phase grids in [0, 2pi) evaluated at pixel centers
(ix + 0.5, iy + 0.5). The library generates spiral phases, a blazed
carrier grating, the six tomography patterns (spiral or step functions
added to the carrier), and the binarized dual-order fork used to split
light evenly into the two first orders. Binarizing cos(phi + grating)
to its sign keeps only odd harmonics with cosine amplitudes
4/pi * (1, -1/3, 1/5, ...), which is what concentrates the power into
the n = +-1 orders; fourier_order_coefficients verifies that expansion
numerically.

Exports use 8-bit grayscale, 0 (black) for phase 0 up to 255 for phase
just below 2pi. Binary PGM (P5) is the bit-exact reference format; PNG
carries identical pixel values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

TWO_PI = 2.0 * math.pi

DEFAULT_WIDTH = 1080
DEFAULT_HEIGHT = 1080
DEFAULT_PERIOD = 16.0

TOMOGRAPHY_KINDS = ("LH", "LV", "LD", "LA", "LL", "LR")

# Fig-label convention: each analyzer basis letter has one projection mask.
BASIS_TO_PATTERN = {"H": "LH", "V": "LV", "D": "LD", "A": "LA", "L": "LL", "R": "LR"}


def _wrap_phase(phase: np.ndarray) -> np.ndarray:
    wrapped = np.mod(np.asarray(phase, dtype=float), TWO_PI)
    # mod can round a tiny negative input up to exactly 2*pi
    wrapped[wrapped >= TWO_PI] = 0.0
    return wrapped


@dataclass(frozen=True)
class GratingSpec:
    """Raster geometry and carrier period for mask synthesis."""

    period_g: float = DEFAULT_PERIOD
    width: int = DEFAULT_WIDTH
    height: int = DEFAULT_HEIGHT
    center: tuple[float, float] | None = None

    def __post_init__(self):
        if not (isinstance(self.width, int) and isinstance(self.height, int)
                and self.width >= 1 and self.height >= 1):
            raise ValidationError(
                f"mask size must be positive integers, got {self.width}x{self.height}")
        if not (math.isfinite(self.period_g) and self.period_g >= 2.0):
            raise ValidationError(
                f"period_g must be at least 2 px (binary-pattern Nyquist), got {self.period_g!r}")
        if self.center is None:
            object.__setattr__(self, "center", (self.width / 2.0, self.height / 2.0))
        else:
            cx, cy = float(self.center[0]), float(self.center[1])
            if not (math.isfinite(cx) and math.isfinite(cy)):
                raise ValidationError(f"center must be finite, got {self.center!r}")
            object.__setattr__(self, "center", (cx, cy))


@dataclass(frozen=True, eq=False)
class PhaseMask:
    """Phase grid in [0, 2pi), row-major phase[iy, ix]."""

    width: int
    height: int
    phase: np.ndarray
    center: tuple[float, float]

    def __post_init__(self):
        arr = np.asarray(self.phase, dtype=float)
        if arr.shape != (self.height, self.width):
            raise ValidationError(
                f"phase grid shape {arr.shape} does not match {self.height}x{self.width}")
        if not np.all(np.isfinite(arr)):
            raise ValidationError("phase grid contains non-finite values")
        arr = _wrap_phase(arr)
        arr.setflags(write=False)
        object.__setattr__(self, "phase", arr)
        object.__setattr__(self, "center", (float(self.center[0]), float(self.center[1])))


def _pixel_grid(spec: GratingSpec):
    x = np.arange(spec.width, dtype=float) + 0.5
    y = np.arange(spec.height, dtype=float) + 0.5
    return np.meshgrid(x, y)


def _azimuth(xx: np.ndarray, yy: np.ndarray, spec: GratingSpec) -> np.ndarray:
    cx, cy = spec.center
    return np.arctan2(yy - cy, xx - cx)


def _carrier(xx: np.ndarray, spec: GratingSpec) -> np.ndarray:
    return TWO_PI * np.mod(xx / spec.period_g, 1.0)


def _mask(spec: GratingSpec, phase: np.ndarray) -> PhaseMask:
    return PhaseMask(width=spec.width, height=spec.height, phase=phase, center=spec.center)


def spiral_phase(l_prime: int, spec: GratingSpec) -> PhaseMask:
    """Azimuthal phase ramp l' * atan2(y - cy, x - cx), wrapped."""
    if not isinstance(l_prime, (int, np.integer)):
        raise ValidationError(f"l_prime must be an integer, got {l_prime!r}")
    xx, yy = _pixel_grid(spec)
    return _mask(spec, float(l_prime) * _azimuth(xx, yy, spec))


def blazed_grating(spec: GratingSpec) -> PhaseMask:
    """Linear carrier 2*pi*mod(x/g, 1) in absolute pixel coordinates."""
    xx, _ = _pixel_grid(spec)
    return _mask(spec, _carrier(xx, spec))


def _unit_step(arg: np.ndarray) -> np.ndarray:
    # step is 1 for nonnegative arguments
    return np.where(arg >= 0.0, 1.0, 0.0)


def tomography_pattern(kind: str, spec: GratingSpec) -> PhaseMask:
    """One of the six projection masks, each riding on the blazed carrier.

    LH/LV add a -+1 spiral; LD/LA/LL/LR add a half-plane pi step whose
    edge is vertical, horizontal, or one of the two diagonals through the
    center.
    """
    key = str(kind).upper()
    xx, yy = _pixel_grid(spec)
    cx, cy = spec.center
    dx = xx - cx
    dy = yy - cy
    if key == "LH":
        extra = -_azimuth(xx, yy, spec)
    elif key == "LV":
        extra = _azimuth(xx, yy, spec)
    elif key == "LD":
        extra = math.pi * _unit_step(dx)
    elif key == "LA":
        extra = math.pi * _unit_step(dy)
    elif key == "LL":
        extra = math.pi * _unit_step(dx + dy)
    elif key == "LR":
        extra = math.pi * _unit_step(dx - dy)
    else:
        raise ValidationError(
            f"unknown tomography pattern {kind!r}; expected one of {TOMOGRAPHY_KINDS}")
    return _mask(spec, extra + _carrier(xx, spec))


def pattern_for_basis(label: str, spec: GratingSpec) -> PhaseMask:
    """Projection mask for a single-photon analyzer basis letter."""
    if label not in BASIS_TO_PATTERN:
        raise ValidationError(
            f"no projection mask for basis {label!r}; expected one of "
            f"{tuple(BASIS_TO_PATTERN)}")
    return tomography_pattern(BASIS_TO_PATTERN[label], spec)


def dual_order_pattern(spec: GratingSpec, rotated: bool = False) -> PhaseMask:
    """Binarized fork: 0 where cos(phi + carrier) >= 0, pi elsewhere.

    The carrier here is centered, 2*pi*mod((x - cx)/g, 1), so the 180
    degree rotation is exactly the grid flip about the center. Binarizing
    drops the even orders and splits power evenly between n = +1 and -1.
    """
    xx, yy = _pixel_grid(spec)
    if rotated:
        cx, cy = spec.center
        xx = 2.0 * cx - xx
        yy = 2.0 * cy - yy
    cx, cy = spec.center
    arg = np.arctan2(yy - cy, xx - cx) + TWO_PI * np.mod((xx - cx) / spec.period_g, 1.0)
    return _mask(spec, np.where(np.cos(arg) >= 0.0, 0.0, math.pi))


def rotate_180(mask: PhaseMask) -> PhaseMask:
    """Flip the pixel grid about its center (both axes reversed)."""
    return PhaseMask(width=mask.width, height=mask.height,
                     phase=mask.phase[::-1, ::-1], center=mask.center)


def fourier_order_coefficients(period_samples: int, max_order: int) -> dict[int, complex]:
    """Fourier coefficients of the binarized wave sgn(cos theta).

    Samples one period uniformly and returns {order: coefficient} for
    orders 0..max_order, normalized so an ideal square wave gives a
    cosine amplitude of 4/pi at order 1, -4/(3 pi) at order 3, and zero
    at even orders.
    """
    if not (isinstance(period_samples, (int, np.integer)) and period_samples >= 4):
        raise ValidationError(f"period_samples must be an integer >= 4, got {period_samples!r}")
    if not (isinstance(max_order, (int, np.integer)) and max_order >= 0):
        raise ValidationError(f"max_order must be a nonnegative integer, got {max_order!r}")
    if period_samples < 4 * max(1, max_order):
        raise ValidationError(
            f"period_samples={period_samples} undersamples order {max_order};"
            f" need at least {4 * max_order}")
    theta = TWO_PI * np.arange(int(period_samples)) / float(period_samples)
    wave = np.sign(np.cos(theta))
    coeffs: dict[int, complex] = {0: complex(np.mean(wave))}
    for order in range(1, int(max_order) + 1):
        coeffs[order] = complex(2.0 * np.mean(wave * np.exp(-1j * order * theta)))
    return coeffs


# --- 8-bit export -------------------------------------------------------


def mask_to_pixels(mask: PhaseMask) -> np.ndarray:
    """Quantize to 8-bit gray: floor(phase / 2pi * 256), clamped to 255."""
    levels = np.floor(mask.phase / TWO_PI * 256.0)
    return np.clip(levels, 0, 255).astype(np.uint8)


def write_pgm(pixels: np.ndarray, path) -> None:
    """Binary PGM (P5, maxval 255), row-major."""
    arr = np.ascontiguousarray(pixels, dtype=np.uint8)
    if arr.ndim != 2:
        raise ValidationError(f"pixel grid must be 2-D, got shape {arr.shape}")
    header = f"P5\n{arr.shape[1]} {arr.shape[0]}\n255\n".encode("ascii")
    try:
        with open(path, "wb") as fh:
            fh.write(header)
            fh.write(arr.tobytes())
    except OSError as exc:
        raise OSError(f"cannot write mask to {path}: {exc}") from exc


def read_pgm(path) -> np.ndarray:
    """Read a binary PGM written by write_pgm (P5, maxval 255)."""
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        raise OSError(f"cannot read mask from {path}: {exc}") from exc
    fields: list[bytes] = []
    pos = 0
    while len(fields) < 4 and pos < len(data):
        while pos < len(data) and data[pos:pos + 1].isspace():
            pos += 1
        if data[pos:pos + 1] == b"#":
            while pos < len(data) and data[pos:pos + 1] != b"\n":
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos:pos + 1].isspace():
            pos += 1
        fields.append(data[start:pos])
    if len(fields) != 4 or fields[0] != b"P5":
        raise ValidationError(f"{path} is not a binary PGM (P5) file")
    try:
        width, height, maxval = int(fields[1]), int(fields[2]), int(fields[3])
    except ValueError:
        raise ValidationError(f"{path} has a malformed PGM header")
    if maxval != 255:
        raise ValidationError(f"{path}: only maxval 255 is supported, got {maxval}")
    pos += 1  # single whitespace byte after maxval
    raster = data[pos:pos + width * height]
    if len(raster) != width * height:
        raise ValidationError(f"{path}: raster is truncated")
    return np.frombuffer(raster, dtype=np.uint8).reshape(height, width)


def write_png(pixels: np.ndarray, path) -> None:
    """8-bit grayscale PNG with the same pixel values as the PGM export."""
    from PIL import Image

    arr = np.ascontiguousarray(pixels, dtype=np.uint8)
    if arr.ndim != 2:
        raise ValidationError(f"pixel grid must be 2-D, got shape {arr.shape}")
    try:
        Image.fromarray(arr, mode="L").save(path, format="PNG")
    except OSError as exc:
        raise OSError(f"cannot write mask to {path}: {exc}") from exc


def export_mask(mask: PhaseMask, path, format: str = "pgm8") -> None:
    """Write an 8-bit mask image; format 'pgm8' or 'png8'."""
    pixels = mask_to_pixels(mask)
    if format == "pgm8":
        write_pgm(pixels, path)
    elif format == "png8":
        write_png(pixels, path)
    else:
        raise ValidationError(f"unknown export format {format!r}; use 'pgm8' or 'png8'")
