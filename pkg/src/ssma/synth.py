"""Two-spiral toy domains with scale / rotation / translation deformations."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import DomainDataset, MultiDomainDataset, derive_seed
from .errors import DataError, ParameterError


@dataclass(frozen=True)
class Deformation:
    """Affine map ``x -> scale * R(rotation) @ x + translation`` (degrees)."""

    scale: float = 1.0
    rotation: float = 0.0
    translation: tuple = (0.0, 0.0)

    def __post_init__(self):
        if not self.scale > 0:
            raise ParameterError(f"scale must be positive, got {self.scale}")
        t = tuple(float(v) for v in self.translation)
        if len(t) != 2:
            raise ParameterError("translation must be a 2-vector")
        object.__setattr__(self, "translation", t)
        object.__setattr__(self, "scale", float(self.scale))
        object.__setattr__(self, "rotation", float(self.rotation))

    def matrix(self) -> np.ndarray:
        th = np.deg2rad(self.rotation)
        c, s = np.cos(th), np.sin(th)
        return self.scale * np.array([[c, -s], [s, c]])

    def inverse(self) -> "Deformation":
        t = -(np.linalg.inv(self.matrix()) @ np.asarray(self.translation))
        return Deformation(1.0 / self.scale, -self.rotation, tuple(t))

    def then(self, other: "Deformation") -> "Deformation":
        """The deformation equal to applying ``self`` first, then ``other``."""
        t = other.matrix() @ np.asarray(self.translation) + np.asarray(other.translation)
        return Deformation(self.scale * other.scale, self.rotation + other.rotation, tuple(t))


IDENTITY = Deformation()

# Named settings for the toy experiments. Domain 2 is twice as large, then
# rotated by 90 degrees, then shifted.
SETTINGS = {
    "none": IDENTITY,
    "s": Deformation(scale=2.0),
    "sr": Deformation(scale=2.0, rotation=90.0),
    "srt": Deformation(scale=2.0, rotation=90.0, translation=(3.0, -2.0)),
}


def apply_deformation(points: np.ndarray, deform: Deformation) -> np.ndarray:
    points = np.asarray(points, dtype=float)
    if points.ndim != 2 or points.shape[0] != 2:
        raise DataError(f"expected a 2 x n point matrix, got shape {points.shape}")
    return deform.matrix() @ points + np.asarray(deform.translation)[:, None]


def spiral(
    n_per_class: int,
    classes: int,
    noise_sd: float,
    rng: np.random.Generator,
    a: float = 0.5,
    b: float = 0.4,
    tau_range: tuple = (0.0, 3 * np.pi),
):
    """Noisy points on ``r = a + b*tau`` with classes as equal-width bands of ``tau``.

    Returns ``(points, labels, tau)`` with points of shape ``(2, classes*n_per_class)``.
    """
    edges = np.linspace(tau_range[0], tau_range[1], classes + 1)
    tau = np.concatenate([rng.uniform(edges[c], edges[c + 1], n_per_class) for c in range(classes)])
    labels = np.repeat(np.arange(1, classes + 1), n_per_class)
    r = a + b * tau
    pts = np.vstack([r * np.cos(tau), r * np.sin(tau)])
    pts = pts + noise_sd * rng.standard_normal(pts.shape)
    return pts, labels, tau


def make_spiral_pair(
    n_per_class: int = 667,
    classes: int = 3,
    noise_sd: float = 0.05,
    deform: Deformation = IDENTITY,
    seed: int = 0,
    **spiral_kw,
) -> MultiDomainDataset:
    """Domain ``"1"`` is an undeformed spiral; domain ``"2"`` a fresh draw passed through ``deform``."""
    if classes < 2:
        raise ParameterError(f"need at least 2 classes, got {classes}")
    if n_per_class < 1:
        raise ParameterError(f"n_per_class must be >= 1, got {n_per_class}")
    if noise_sd < 0:
        raise ParameterError("noise_sd must be >= 0")
    p1, y1, _ = spiral(n_per_class, classes, noise_sd, np.random.default_rng(derive_seed(seed, "spiral", 1)), **spiral_kw)
    p2, y2, _ = spiral(n_per_class, classes, noise_sd, np.random.default_rng(derive_seed(seed, "spiral", 2)), **spiral_kw)
    p2 = apply_deformation(p2, deform)
    return MultiDomainDataset(
        (
            DomainDataset("1", p1, y1.tolist(), "spiral"),
            DomainDataset("2", p2, y2.tolist(), "deformed spiral"),
        ),
        classes,
    )


def toy_dataset(
    setting: str = "sr",
    n_per_class: int = 667,
    classes: int = 3,
    noise_sd: float = 0.05,
    seed: int = 0,
    scale=None,
    rotation=None,
    translation=None,
) -> MultiDomainDataset:
    """``make_spiral_pair`` for a named setting, with optional per-field overrides."""
    try:
        base = SETTINGS[setting]
    except KeyError:
        raise ParameterError(f"unknown toy setting {setting!r}; choose from {sorted(SETTINGS)}") from None
    deform = Deformation(
        base.scale if scale is None else scale,
        base.rotation if rotation is None else rotation,
        base.translation if translation is None else tuple(translation),
    )
    return make_spiral_pair(n_per_class, classes, noise_sd, deform, seed)
