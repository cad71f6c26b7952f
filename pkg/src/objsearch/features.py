"""Feature vectors for (object, cell) pairs and the scaled sigmoid.

A feature vector concatenates a one-hot object id, a flattened 16x16 bilinear
resample of the wall-distance window around the cell, and a sinusoidal
positional encoding of the cell coordinates, then normalizes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .gridmap import wall_distance

PATCH_SIDE = 16

_STD_FLOOR = 1e-12


@dataclass(frozen=True)
class FeatureConfig:
    n_objects: int
    patch_cells: int = 75
    pe_dim: int = 20
    normalization: str = "l2"  # l2 | mean_var
    sigmoid_scale: float = 1.0

    def __post_init__(self):
        if self.n_objects < 1:
            raise ValueError("n_objects must be >= 1")
        if self.pe_dim % 2 != 0:
            raise ValueError("pe_dim must be even")
        if self.patch_cells < 1:
            raise ValueError("patch_cells must be >= 1")
        if self.normalization not in ("l2", "mean_var"):
            raise ValueError(f"unknown normalization {self.normalization!r}")
        if self.sigmoid_scale <= 0:
            raise ValueError("sigmoid_scale must be positive")

    @property
    def dim(self):
        return self.n_objects + PATCH_SIDE * PATCH_SIDE + self.pe_dim


def sigmoid(z, s=1.0):
    """Scaled logistic e^(zs) / (1 + e^(zs)); stable for large |zs|."""
    if s <= 0:
        raise ValueError("sigmoid slope must be positive")
    zs = np.multiply(z, s)
    out = np.where(zs >= 0, 1.0 / (1.0 + np.exp(-np.abs(zs))),
                   np.exp(-np.abs(zs)) / (1.0 + np.exp(-np.abs(zs))))
    if np.isscalar(z) or np.ndim(z) == 0:
        return float(out)
    return out


def sinusoidal_pe(x, dim):
    """Sinusoidal positional encoding of a (row, col) cell.

    Half the entries encode the row, half the col; each half is filled with
    (sin(c / 10000^(4j/dim)), cos(...)) pairs, truncated if the half is odd.
    """
    if dim % 2 != 0:
        raise ValueError("positional encoding dimension must be even")
    half = dim // 2
    out = np.empty(dim)
    for axis, coord in enumerate(x):
        base = axis * half
        for m in range(half):
            j = m // 2
            angle = coord / (10000.0 ** (4.0 * j / dim))
            out[base + m] = np.sin(angle) if m % 2 == 0 else np.cos(angle)
    return out


def resample_patch(wall, x, patch_cells):
    """Bilinear 16x16 resample of the window of side ``patch_cells`` centered
    at cell ``x``; samples outside the map read 0."""
    span = float(patch_cells)
    offsets = (np.arange(PATCH_SIDE) + 0.5) / PATCH_SIDE * span - span / 2.0
    rows = x[0] + offsets
    cols = x[1] + offsets
    rr, cc = np.meshgrid(rows, cols, indexing="ij")
    return ndimage.map_coordinates(
        wall, [rr, cc], order=1, mode="constant", cval=0.0
    )


def build_phi(occ_map, config, i, x):
    """Feature vector for object ``i`` observed from cell ``x``."""
    if not 0 <= i < config.n_objects:
        raise ValueError(f"object id {i} out of range [0, {config.n_objects})")
    one_hot = np.zeros(config.n_objects)
    one_hot[i] = 1.0
    patch = resample_patch(wall_distance(occ_map), x, config.patch_cells)
    pe = sinusoidal_pe(x, config.pe_dim)
    phi = np.concatenate([one_hot, patch.ravel(), pe])
    return normalize(phi, config.normalization)


def normalize(v, mode):
    if mode == "l2":
        n = np.linalg.norm(v)
        return v / n if n > 0 else v
    if mode == "mean_var":
        centered = v - np.mean(v)
        return centered / max(np.std(centered), _STD_FLOOR)
    raise ValueError(f"unknown normalization {mode!r}")
