"""Spectrogram enhancement: denoise, binarize, equalize, and close.

The chain turns a float spectrogram into a boolean foreground mask:

    median filter -> 8-bit min-max normalization -> Otsu threshold
    -> {0, 255} mask image -> CLAHE -> Otsu threshold -> morphological closing

Every stage is deterministic, so the whole chain is reproducible bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class EnhanceConfig:
    """Knobs for the enhancement chain."""

    median_kernel: int = 3
    clahe_clip_limit: float = 2.0
    clahe_tiles: tuple[int, int] = (8, 8)
    close_kernel: tuple[int, int] = (3, 3)

    def __post_init__(self) -> None:
        if self.median_kernel < 1 or self.median_kernel % 2 == 0:
            raise ValueError(f"median_kernel must be odd and >= 1, got {self.median_kernel}")
        if self.clahe_clip_limit <= 0:
            raise ValueError(f"clahe_clip_limit must be positive, got {self.clahe_clip_limit}")
        th, tw = self.clahe_tiles
        if th < 1 or tw < 1:
            raise ValueError(f"clahe_tiles must be >= 1, got {self.clahe_tiles}")
        kh, kw = self.close_kernel
        if kh < 1 or kw < 1:
            raise ValueError(f"close_kernel must be >= 1, got {self.close_kernel}")


@dataclass(frozen=True)
class EnhanceStages:
    """Intermediate images of the chain, kept for rendering and debugging."""

    filtered: np.ndarray
    normalized: np.ndarray
    first_mask: np.ndarray
    equalized: np.ndarray
    second_mask: np.ndarray
    closed: np.ndarray


def _round_half_up(x: np.ndarray) -> np.ndarray:
    return np.floor(x + 0.5)


def _median3x3(values: np.ndarray) -> np.ndarray:
    """3x3 median via a min/max network on the nine shifted neighbor planes."""
    h, w = values.shape
    p = np.pad(values, 1, mode="edge")
    v = [p[i:i + h, j:j + w].copy() for i in range(3) for j in range(3)]

    def swap(i: int, j: int) -> None:
        lo = np.minimum(v[i], v[j])
        np.maximum(v[i], v[j], out=v[j])
        v[i] = lo

    for base in (0, 3, 6):  # sort each row triple
        swap(base, base + 1)
        swap(base + 1, base + 2)
        swap(base, base + 1)
    # median of 9 = median(max of row minima, median of row medians, min of row maxima)
    hi = np.maximum(np.maximum(v[0], v[3]), v[6])
    lo = np.minimum(np.minimum(v[2], v[5]), v[8])
    a, b, c = v[1], v[4], v[7]
    mid = np.maximum(np.minimum(a, b), np.minimum(np.maximum(a, b), c))
    return np.maximum(np.minimum(hi, mid), np.minimum(np.maximum(hi, mid), lo))


def median_filter(values: np.ndarray, kernel: int = 3) -> np.ndarray:
    """Median-filter a 2-D array with an odd square kernel.

    Borders replicate the edge values. kernel=1 is the identity. The output
    never exceeds the input's range (medians of existing values).
    """
    if kernel < 1 or kernel % 2 == 0:
        raise ValueError(f"kernel must be odd and >= 1, got {kernel}")
    values = np.asarray(values)
    if values.ndim != 2:
        raise ValueError("median_filter expects a 2-D array")
    if kernel == 1:
        return values.copy()
    if kernel == 3:
        return _median3x3(values)
    r = kernel // 2
    padded = np.pad(values, r, mode="edge")
    windows = np.lib.stride_tricks.sliding_window_view(padded, (kernel, kernel))
    return np.median(windows.reshape(values.shape + (kernel * kernel,)), axis=-1).astype(
        values.dtype, copy=False
    )


def normalize_to_u8(values: np.ndarray) -> np.ndarray:
    """Min-max normalize to uint8: round(255 * (v - min) / (max - min)), half up.

    A constant input maps to all zeros. The map is monotone, so value order
    is preserved.
    """
    values = np.asarray(values)
    lo = float(values.min())
    hi = float(values.max())
    if hi == lo:
        return np.zeros(values.shape, dtype=np.uint8)
    scaled = (values.astype(np.float64) - lo) * (255.0 / (hi - lo))
    return _round_half_up(scaled).astype(np.uint8)


def otsu_threshold(image: np.ndarray) -> tuple[int, np.ndarray]:
    """Otsu's threshold on a uint8 image: (threshold, foreground mask).

    Picks the threshold t in [0, 255] maximizing the between-class variance of
    the {<= t, > t} split (smallest t on ties); foreground is intensity > t.
    An all-zero image therefore yields an empty mask.
    """
    image = np.asarray(image)
    if image.dtype != np.uint8:
        raise ValueError(f"otsu_threshold expects uint8, got {image.dtype}")
    hist = np.bincount(image.ravel(), minlength=256).astype(np.float64)
    n = hist.sum()
    w0 = np.cumsum(hist)
    s0 = np.cumsum(np.arange(256, dtype=np.float64) * hist)
    total = s0[-1]
    w1 = n - w0
    with np.errstate(divide="ignore", invalid="ignore"):
        mu0 = s0 / w0
        mu1 = (total - s0) / w1
        between = w0 * w1 * (mu0 - mu1) ** 2
    between[~np.isfinite(between)] = 0.0
    t = int(np.argmax(between))  # argmax takes the first (smallest) maximizer
    return t, image > t


def _tile_mappings(padded: np.ndarray, tiles: tuple[int, int], tile_h: int, tile_w: int,
                   clip_limit: float) -> np.ndarray:
    """Per-tile clipped-equalization lookup tables, shape (tiles_r, tiles_c, 256)."""
    tr, tc = tiles
    n_px = tile_h * tile_w
    clip = clip_limit * n_px / 256.0
    maps = np.empty((tr, tc, 256), dtype=np.float64)
    for i in range(tr):
        for j in range(tc):
            tile = padded[i * tile_h:(i + 1) * tile_h, j * tile_w:(j + 1) * tile_w]
            hist = np.bincount(tile.ravel(), minlength=256).astype(np.float64)
            excess = np.maximum(hist - clip, 0.0).sum()
            hist = np.minimum(hist, clip) + excess / 256.0
            maps[i, j] = _round_half_up(255.0 * np.cumsum(hist) / n_px)
    return maps


def clahe(image: np.ndarray, clip_limit: float = 2.0,
          tiles: tuple[int, int] = (8, 8)) -> np.ndarray:
    """Contrast-limited adaptive histogram equalization of a uint8 image.

    The image is padded by edge replication to a multiple of the tile grid.
    Each tile's 256-bin histogram is clipped at clip_limit * tile_pixels / 256
    with the excess redistributed uniformly; its scaled CDF becomes a lookup
    table. Pixels blend the tables of the four surrounding tile centers
    bilinearly; beyond the outermost centers the nearest table is used. With a
    single tile and a non-binding clip limit this reduces to plain global
    histogram equalization.
    """
    image = np.asarray(image)
    if image.dtype != np.uint8:
        raise ValueError(f"clahe expects uint8, got {image.dtype}")
    if clip_limit <= 0:
        raise ValueError(f"clip_limit must be positive, got {clip_limit}")
    tr, tc = tiles
    if tr < 1 or tc < 1:
        raise ValueError(f"tiles must be >= 1, got {tiles}")
    h, w = image.shape
    tile_h = -(-h // tr)
    tile_w = -(-w // tc)
    padded = np.pad(image, ((0, tr * tile_h - h), (0, tc * tile_w - w)), mode="edge")
    maps = _tile_mappings(padded, tiles, tile_h, tile_w, clip_limit)

    # fractional tile coordinates of every padded pixel, measured between tile centers
    uy = (np.arange(padded.shape[0]) - (tile_h - 1) / 2.0) / tile_h
    ux = (np.arange(padded.shape[1]) - (tile_w - 1) / 2.0) / tile_w
    i0 = np.clip(np.floor(uy).astype(np.intp), 0, tr - 1)
    j0 = np.clip(np.floor(ux).astype(np.intp), 0, tc - 1)
    i1 = np.minimum(i0 + 1, tr - 1)
    j1 = np.minimum(j0 + 1, tc - 1)
    wy = np.clip(uy - np.floor(uy), 0.0, 1.0)
    wx = np.clip(ux - np.floor(ux), 0.0, 1.0)
    wy[(uy < 0) | (uy > tr - 1)] = 0.0  # outside the center grid: nearest tile only
    wx[(ux < 0) | (ux > tc - 1)] = 0.0

    v = padded
    rows0, rows1 = i0[:, None], i1[:, None]
    cols0, cols1 = j0[None, :], j1[None, :]
    wy_col = wy[:, None]
    wx_row = wx[None, :]
    top = (1.0 - wx_row) * maps[rows0, cols0, v] + wx_row * maps[rows0, cols1, v]
    bottom = (1.0 - wx_row) * maps[rows1, cols0, v] + wx_row * maps[rows1, cols1, v]
    out = _round_half_up((1.0 - wy_col) * top + wy_col * bottom).astype(np.uint8)
    return out[:h, :w]


def _kernel_offsets(kh: int, kw: int, reflected: bool) -> list[tuple[int, int]]:
    cy, cx = (kh - 1) // 2, (kw - 1) // 2
    offs = [(dy, dx) for dy in range(-cy, kh - cy) for dx in range(-cx, kw - cx)]
    if reflected:
        offs = [(-dy, -dx) for dy, dx in offs]
    return offs


def _shift_slices(h: int, w: int, dy: int, dx: int):
    """(dst, src) slice pairs so that dst[y, x] aligns with src[y + dy, x + dx]."""
    src = (slice(max(dy, 0), h + min(dy, 0)), slice(max(dx, 0), w + min(dx, 0)))
    dst = (slice(max(-dy, 0), h + min(-dy, 0)), slice(max(-dx, 0), w + min(-dx, 0)))
    return dst, src


def morph_close(mask: np.ndarray, kernel: tuple[int, int] = (3, 3)) -> np.ndarray:
    """Morphological closing of a boolean mask with a rectangular kernel.

    Dilation ORs the neighbors that exist inside the frame; the following
    erosion uses the reflected kernel and treats positions beyond the frame as
    foreground, so the frame edge never erodes pixels away. With this border
    handling the closing is extensive (output covers input) and idempotent
    for every kernel, including even-sided and flat ones.
    """
    mask = np.asarray(mask)
    if mask.dtype != np.bool_:
        raise ValueError(f"morph_close expects a boolean mask, got {mask.dtype}")
    kh, kw = kernel
    if kh < 1 or kw < 1:
        raise ValueError(f"kernel sides must be >= 1, got {kernel}")
    h, w = mask.shape
    dilated = np.zeros_like(mask)
    for dy, dx in _kernel_offsets(kh, kw, reflected=False):
        dst, src = _shift_slices(h, w, dy, dx)
        np.logical_or(dilated[dst], mask[src], out=dilated[dst])
    closed = np.ones_like(mask)
    for dy, dx in _kernel_offsets(kh, kw, reflected=True):
        dst, src = _shift_slices(h, w, dy, dx)
        np.logical_and(closed[dst], dilated[src], out=closed[dst])
    return closed


def enhance_stages(values: np.ndarray, config: EnhanceConfig | None = None) -> EnhanceStages:
    """Run the full enhancement chain, keeping every intermediate image."""
    cfg = config if config is not None else EnhanceConfig()
    filtered = median_filter(values, cfg.median_kernel)
    normalized = normalize_to_u8(filtered)
    _, first_mask = otsu_threshold(normalized)
    mask_image = np.where(first_mask, 255, 0).astype(np.uint8)
    equalized = clahe(mask_image, cfg.clahe_clip_limit, cfg.clahe_tiles)
    _, second_mask = otsu_threshold(equalized)
    closed = morph_close(second_mask, cfg.close_kernel)
    return EnhanceStages(filtered=filtered, normalized=normalized, first_mask=first_mask,
                         equalized=equalized, second_mask=second_mask, closed=closed)


def enhance(values: np.ndarray, config: EnhanceConfig | None = None) -> np.ndarray:
    """Enhance a spectrogram into a boolean foreground mask (same shape)."""
    return enhance_stages(values, config).closed
