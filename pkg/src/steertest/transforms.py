"""The nine realistic image transformations and their default parameter grids.

Linear: brightness (add a bias), contrast (multiply by a gain).
Affine: translation, scale, shear, rotation, via a generic 2x3 warp with
inverse mapping, bilinear interpolation and black fill; rotation is about
the image center, the other three use the top-left origin matrices.
Convolutional: averaging, gaussian, median and bilateral blurs with
replicate borders. Composite: procedural rain and fog, deterministic in
(seed, intensity).

Every operation is pure: inputs are never mutated and identical arguments
give bit-identical outputs. Values are computed in float and quantized once
at the end (round half away from zero, then clamp to [0, 255]).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ParamError
from .image_io import check_image
from .rng import SplitMix64, hash01

SIMPLE_KINDS = ("blur", "brightness", "contrast", "rotation", "scale",
                "shear", "translation")
COMPOSITE_KINDS = ("rain", "fog")
ALL_KINDS = SIMPLE_KINDS + COMPOSITE_KINDS

BLUR_FILTERS = ("averaging", "gaussian", "median", "bilateral")

# Default parameter grids; the duplicated gaussian 3x3 entry is intentional
# (see README).
DEFAULT_PARAMS: dict[str, tuple[tuple, ...]] = {
    "translation": tuple((10 * k, 10 * k) for k in range(1, 11)),
    "scale": tuple((1.0 + 0.5 * k, 1.0 + 0.5 * k) for k in range(1, 11)),
    "shear": tuple((round(-1.0 + 0.1 * k, 1), 0.0) for k in range(0, 10)),
    "rotation": tuple((3 * k,) for k in range(1, 11)),
    "contrast": tuple((round(1.2 + 0.2 * k, 1),) for k in range(0, 10)),
    "brightness": tuple((10 * k,) for k in range(1, 11)),
    "blur": (("averaging", 3), ("averaging", 4), ("averaging", 5), ("averaging", 6),
             ("gaussian", 3), ("gaussian", 5), ("gaussian", 7), ("gaussian", 3),
             ("median", 3), ("median", 5),
             ("bilateral", 9, 75.0, 75.0)),
    # composite effects take (seed, intensity); the grids fix the intensities
    # and the search/harness supplies seeds from its own stream
    "rain": ((0.25,), (0.5,), (0.75,), (1.0,)),
    "fog": ((0.25,), (0.5,), (0.75,), (1.0,)),
}


@dataclass(frozen=True)
class TransformSpec:
    """One transformation kind plus its concrete parameter tuple."""
    kind: str
    params: tuple

    def describe(self) -> str:
        return f"{self.kind}({','.join(str(p) for p in self.params)})"


def unique_params(grid, limit: int | None = None) -> tuple[tuple, ...]:
    """Drop exact duplicate parameter entries, keeping first occurrences."""
    seen, out = set(), []
    for p in grid:
        if p not in seen:
            seen.add(p)
            out.append(p)
        if limit is not None and len(out) >= limit:
            break
    return tuple(out)


def _quantize(values: np.ndarray) -> np.ndarray:
    # round half away from zero, once, then clamp
    rounded = np.sign(values) * np.floor(np.abs(values) + 0.5)
    return np.clip(rounded, 0, 255).astype(np.uint8)


def adjust_brightness(img: np.ndarray, beta: float) -> np.ndarray:
    img = check_image(img)
    return _quantize(img.astype(np.float64) + float(beta))


def adjust_contrast(img: np.ndarray, alpha: float) -> np.ndarray:
    img = check_image(img)
    if alpha <= 0:
        raise ParamError(f"contrast gain must be > 0, got {alpha}")
    return _quantize(img.astype(np.float64) * float(alpha))


def translation_matrix(tx: float, ty: float) -> np.ndarray:
    return np.array([[1.0, 0.0, tx], [0.0, 1.0, ty]])


def scale_matrix(sx: float, sy: float) -> np.ndarray:
    return np.array([[sx, 0.0, 0.0], [0.0, sy, 0.0]])


def shear_matrix(sx: float, sy: float) -> np.ndarray:
    return np.array([[1.0, sx, 0.0], [sy, 1.0, 0.0]])


def rotation_matrix(degrees: float, center: tuple[float, float]) -> np.ndarray:
    """Rotation about a center point, expressed as a 2x3 matrix."""
    q = math.radians(degrees)
    c, s = math.cos(q), math.sin(q)
    cx, cy = center
    return np.array([[c, -s, cx - c * cx + s * cy],
                     [s, c, cy - s * cx - c * cy]])


def affine_transform(img: np.ndarray, matrix: np.ndarray) -> np.ndarray:
    """Warp by a 2x3 matrix: inverse mapping, bilinear sampling, black fill."""
    img = check_image(img)
    matrix = np.asarray(matrix, dtype=np.float64)
    if matrix.shape != (2, 3):
        raise ParamError(f"affine matrix must be 2x3, got {matrix.shape}")
    a = matrix[:, :2]
    t = matrix[:, 2]
    det = a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0]
    if abs(det) < 1e-12:
        raise ParamError("affine matrix is singular")
    inv = np.array([[a[1, 1], -a[0, 1]], [-a[1, 0], a[0, 0]]]) / det

    h, w, c = img.shape
    yo, xo = np.mgrid[0:h, 0:w].astype(np.float64)
    xs = inv[0, 0] * (xo - t[0]) + inv[0, 1] * (yo - t[1])
    ys = inv[1, 0] * (xo - t[0]) + inv[1, 1] * (yo - t[1])

    x0 = np.floor(xs)
    y0 = np.floor(ys)
    fx = xs - x0
    fy = ys - y0
    x0 = x0.astype(np.int64)
    y0 = y0.astype(np.int64)

    pixels = img.astype(np.float64)
    out = np.zeros((h, w, c), dtype=np.float64)
    for dy in (0, 1):
        for dx in (0, 1):
            xi = x0 + dx
            yi = y0 + dy
            valid = (xi >= 0) & (xi < w) & (yi >= 0) & (yi < h)
            weight = (fx if dx else 1.0 - fx) * (fy if dy else 1.0 - fy)
            sample = pixels[yi.clip(0, h - 1), xi.clip(0, w - 1)]
            out += np.where(valid, weight, 0.0)[..., None] * sample
    return _quantize(out)


def _replicate_pad(img: np.ndarray, top: int, bottom: int, left: int, right: int) -> np.ndarray:
    return np.pad(img, ((top, bottom), (left, right), (0, 0)), mode="edge")


def gaussian_kernel_1d(size: int) -> np.ndarray:
    """Normalized 1-D gaussian; sigma follows the usual size heuristic."""
    sigma = 0.3 * ((size - 1) * 0.5 - 1) + 0.8
    xs = np.arange(size, dtype=np.float64) - (size - 1) / 2.0
    k = np.exp(-(xs * xs) / (2.0 * sigma * sigma))
    return k / k.sum()


def _window_stack(padded: np.ndarray, k: int, h: int, w: int) -> np.ndarray:
    # (k*k, h, w, c) view stack of each pixel's neighborhood
    return np.stack([padded[dy:dy + h, dx:dx + w]
                     for dy in range(k) for dx in range(k)])


def blur(img: np.ndarray, filter_name: str, params: tuple) -> np.ndarray:
    """Blur with one of: averaging, gaussian, median, bilateral."""
    img = check_image(img)
    h, w, _ = img.shape
    if filter_name == "averaging":
        (k,) = params
        k = int(k)
        if k < 1:
            raise ParamError("averaging kernel size must be >= 1")
        anchor = k // 2
        padded = _replicate_pad(img, anchor, k - 1 - anchor, anchor, k - 1 - anchor)
        stack = _window_stack(padded.astype(np.float64), k, h, w)
        return _quantize(stack.mean(axis=0))
    if filter_name == "gaussian":
        (k,) = params
        k = int(k)
        if k < 1 or k % 2 == 0:
            raise ParamError("gaussian kernel size must be odd and >= 1")
        kern = gaussian_kernel_1d(k)
        r = k // 2
        padded = _replicate_pad(img, r, r, r, r).astype(np.float64)
        tmp = np.zeros((h, w + 2 * r, img.shape[2]))
        for dy in range(k):
            tmp += kern[dy] * padded[dy:dy + h]
        out = np.zeros((h, w, img.shape[2]))
        for dx in range(k):
            out += kern[dx] * tmp[:, dx:dx + w]
        return _quantize(out)
    if filter_name == "median":
        (k,) = params
        k = int(k)
        if k < 1 or k % 2 == 0:
            raise ParamError("median aperture must be odd and >= 1")
        r = k // 2
        padded = _replicate_pad(img, r, r, r, r)
        stack = _window_stack(padded, k, h, w)
        return np.median(stack, axis=0).astype(np.uint8)
    if filter_name == "bilateral":
        diameter, sigma_color, sigma_space = params
        diameter = int(diameter)
        if diameter < 1 or diameter % 2 == 0:
            raise ParamError("bilateral diameter must be odd and >= 1")
        r = diameter // 2
        padded = _replicate_pad(img, r, r, r, r).astype(np.float64)
        center = img.astype(np.float64)
        num = np.zeros_like(center)
        den = np.zeros_like(center)
        inv_space = -1.0 / (2.0 * float(sigma_space) ** 2)
        inv_color = -1.0 / (2.0 * float(sigma_color) ** 2)
        for dy in range(diameter):
            for dx in range(diameter):
                spatial = math.exp(((dy - r) ** 2 + (dx - r) ** 2) * inv_space)
                shifted = padded[dy:dy + h, dx:dx + w]
                weight = spatial * np.exp((shifted - center) ** 2 * inv_color)
                num += weight * shifted
                den += weight
        return _quantize(num / den)
    raise ParamError(f"unknown blur filter {filter_name!r}")


def _value_noise(height: int, width: int, seed: int, cell: int = 16) -> np.ndarray:
    """Seeded lattice value noise in [0, 1], bilinearly interpolated."""
    gh = height // cell + 2
    gw = width // cell + 2
    lattice = np.empty((gh, gw))
    for gy in range(gh):
        for gx in range(gw):
            lattice[gy, gx] = hash01(seed, gy, gx)
    ys = np.arange(height) / cell
    xs = np.arange(width) / cell
    y0 = ys.astype(int)
    x0 = xs.astype(int)
    fy = (ys - y0)[:, None]
    fx = (xs - x0)[None, :]
    v00 = lattice[np.ix_(y0, x0)]
    v01 = lattice[np.ix_(y0, x0 + 1)]
    v10 = lattice[np.ix_(y0 + 1, x0)]
    v11 = lattice[np.ix_(y0 + 1, x0 + 1)]
    return (v00 * (1 - fy) * (1 - fx) + v01 * (1 - fy) * fx
            + v10 * fy * (1 - fx) + v11 * fy * fx)


def add_fog(img: np.ndarray, seed: int, intensity: float) -> np.ndarray:
    """Alpha-blend toward white through a smooth value-noise mask.

    The blend factor is intensity * (0.5 + 0.5 * noise), so at intensity 1
    every non-white pixel moves up by at least half a gray level and the
    mean luminance strictly increases on any non-white image.
    """
    img = check_image(img)
    if not 0.0 <= intensity <= 1.0:
        raise ParamError(f"fog intensity must be in [0, 1], got {intensity}")
    if intensity == 0.0:
        return img.copy()
    h, w, _ = img.shape
    mask = _value_noise(h, w, seed)
    alpha = (intensity * (0.5 + 0.5 * mask))[..., None]
    pixels = img.astype(np.float64)
    return _quantize(pixels + (255.0 - pixels) * alpha)


def add_rain(img: np.ndarray, seed: int, intensity: float) -> np.ndarray:
    """Seeded slanted bright streaks followed by a mild 3-tap motion blur."""
    img = check_image(img)
    if not 0.0 <= intensity <= 1.0:
        raise ParamError(f"rain intensity must be in [0, 1], got {intensity}")
    if intensity == 0.0:
        return img.copy()
    h, w, _ = img.shape
    stream = SplitMix64(seed)
    slant = stream.uniform(-0.4, 0.4)
    n_streaks = int(round(intensity * h * w / 50.0))
    canvas = img.astype(np.float64)
    for _ in range(n_streaks):
        x0 = stream.randint(w)
        y0 = stream.randint(h)
        length = 4 + stream.randint(max(h // 4, 1))
        boost = 60.0 + 80.0 * stream.next_float()
        for step in range(length):
            y = y0 + step
            x = int(round(x0 + slant * step))
            if 0 <= y < h and 0 <= x < w:
                canvas[y, x] += boost
    # motion blur along the streak direction
    blurred = canvas.copy()
    for sign in (-1, 1):
        ys = np.clip(np.arange(h) + sign, 0, h - 1)
        xs = np.clip(np.arange(w) + int(round(slant)) * sign, 0, w - 1)
        blurred += canvas[np.ix_(ys, xs)]
    return _quantize(blurred / 3.0)


_AFFINE_BUILDERS = {
    "translation": lambda p, img: translation_matrix(*p),
    "scale": lambda p, img: scale_matrix(*p),
    "shear": lambda p, img: shear_matrix(*p),
    "rotation": lambda p, img: rotation_matrix(
        p[0], ((img.shape[1] - 1) / 2.0, (img.shape[0] - 1) / 2.0)),
}


def apply(img: np.ndarray, spec: TransformSpec) -> np.ndarray:
    """Dispatch one TransformSpec; pure function of (img, spec)."""
    kind, p = spec.kind, spec.params
    if kind == "brightness":
        return adjust_brightness(img, p[0])
    if kind == "contrast":
        return adjust_contrast(img, p[0])
    if kind in _AFFINE_BUILDERS:
        return affine_transform(img, _AFFINE_BUILDERS[kind](p, img))
    if kind == "blur":
        return blur(img, p[0], tuple(p[1:]))
    if kind == "fog":
        return add_fog(img, int(p[0]), float(p[1]))
    if kind == "rain":
        return add_rain(img, int(p[0]), float(p[1]))
    raise ParamError(f"unknown transformation kind {kind!r}")


def apply_chain(img: np.ndarray, specs) -> np.ndarray:
    for spec in specs:
        img = apply(img, spec)
    return img


def spec_to_json(spec: TransformSpec) -> dict:
    return {"kind": spec.kind, "params": list(spec.params)}


def spec_from_json(doc: dict) -> TransformSpec:
    return TransformSpec(doc["kind"], tuple(doc["params"]))
