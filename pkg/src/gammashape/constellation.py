"""Constellation and APSK candidate-set types.

Symbols are plain Python/numpy complex numbers; ``polar`` and
``from_polar`` convert to the (amplitude, phase) view with phase in
[0, 2*pi).
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

__all__ = [
    "polar",
    "from_polar",
    "CandidateSet",
    "Constellation",
    "generate_apsk",
    "normalize_power",
    "pairwise_distance_sum",
    "min_distance",
    "psk",
    "qam",
]

TWO_PI = 2.0 * np.pi


def polar(z):
    """Return (rho, phi) with phi wrapped into [0, 2*pi)."""
    z = np.asarray(z, dtype=complex)
    phi = np.mod(np.angle(z), TWO_PI)
    # mod can return exactly 2*pi for tiny negative angles
    phi = np.where(phi >= TWO_PI, 0.0, phi)
    return np.abs(z), phi


def from_polar(rho, phi):
    return np.asarray(rho, dtype=float) * np.exp(1j * np.asarray(phi, dtype=float))


@dataclass(frozen=True, eq=False)
class CandidateSet:
    """APSK candidate points, ring-major then increasing phase."""

    points: np.ndarray
    ring_radii: np.ndarray
    points_per_ring: np.ndarray
    ring_index: np.ndarray = field(repr=False)

    def __post_init__(self):
        if len(self.points) != int(np.sum(self.points_per_ring)):
            raise ValueError("point count does not match points_per_ring")
        radii = np.asarray(self.ring_radii)
        if np.any(radii <= 0) or np.any(np.diff(radii) <= 0):
            raise ValueError("ring radii must be positive and strictly increasing")

    def __len__(self):
        return len(self.points)

    def rotated(self, theta: float) -> "CandidateSet":
        return CandidateSet(self.points * np.exp(1j * theta), self.ring_radii,
                            self.points_per_ring, self.ring_index)


@dataclass(frozen=True, eq=False)
class Constellation:
    """M distinct complex symbols with their average power."""

    points: np.ndarray
    avg_power: float

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=complex)
        object.__setattr__(self, "points", pts)
        if pts.ndim != 1 or len(pts) < 2:
            raise ValueError("a constellation needs at least two points")
        power = float(np.mean(np.abs(pts) ** 2))
        if abs(power - self.avg_power) > 1e-9 * max(abs(self.avg_power), 1e-300):
            raise ValueError(f"avg_power {self.avg_power} does not match points ({power})")
        if min_distance(pts) <= 0.0:
            raise ValueError("constellation points must be distinct")

    @property
    def M(self) -> int:
        return len(self.points)

    @property
    def amplitudes(self) -> np.ndarray:
        return np.abs(self.points)

    @classmethod
    def from_points(cls, points) -> "Constellation":
        pts = np.asarray(points, dtype=complex)
        return cls(pts, float(np.mean(np.abs(pts) ** 2)))

    def rotated(self, theta: float) -> "Constellation":
        return Constellation.from_points(self.points * np.exp(1j * theta))

    def to_dict(self) -> dict:
        return {
            "points": [[float(z.real), float(z.imag)] for z in self.points],
            "avg_power": float(self.avg_power),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Constellation":
        pts = np.array([complex(re, im) for re, im in data["points"]])
        power = float(np.mean(np.abs(pts) ** 2))
        # stored avg_power is informational; recompute to keep the invariant exact
        if abs(power - float(data.get("avg_power", power))) > 1e-9 * max(power, 1e-300):
            raise ValueError("stored avg_power disagrees with stored points")
        return cls(pts, power)

    def to_json(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")

    @classmethod
    def from_json(cls, path) -> "Constellation":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["re", "im"])
            for z in self.points:
                w.writerow([repr(float(z.real)), repr(float(z.imag))])

    @classmethod
    def from_csv(cls, path) -> "Constellation":
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        return cls.from_points([complex(float(r["re"]), float(r["im"])) for r in rows])


def generate_apsk(num_rings: int, points_per_ring: int, max_radius: float) -> CandidateSet:
    """Build a staggered APSK grid.

    Ring ``k`` (1-based) has radius ``max_radius * k / num_rings`` and
    ``points_per_ring`` symbols spaced uniformly in phase, offset by
    ``(k - 1) * pi / points_per_ring``.
    """
    if int(num_rings) != num_rings or num_rings < 1:
        raise ValueError(f"num_rings must be a positive integer, got {num_rings}")
    if int(points_per_ring) != points_per_ring or points_per_ring < 1:
        raise ValueError(f"points_per_ring must be a positive integer, got {points_per_ring}")
    if not max_radius > 0:
        raise ValueError(f"max_radius must be positive, got {max_radius}")
    num_rings = int(num_rings)
    n = int(points_per_ring)
    k = np.arange(1, num_rings + 1)
    radii = max_radius * k / num_rings
    base = TWO_PI * np.arange(n) / n
    phases = (k[:, None] - 1) * np.pi / n + base[None, :]
    pts = (radii[:, None] * np.exp(1j * phases)).ravel()
    ring_index = np.repeat(np.arange(num_rings), n)
    return CandidateSet(pts, radii, np.full(num_rings, n), ring_index)


def normalize_power(points, P: float) -> Constellation:
    """Scale ``points`` by sqrt(M P / sum |x|^2) so the mean power is P."""
    if not P > 0:
        raise ValueError(f"P must be positive, got {P}")
    pts = np.asarray(points, dtype=complex)
    energy = float(np.sum(np.abs(pts) ** 2))
    if energy <= 0.0:
        raise ValueError("cannot normalize an all-zero point set")
    scaled = pts * np.sqrt(len(pts) * P / energy)
    return Constellation(scaled, float(np.mean(np.abs(scaled) ** 2)))


def pairwise_distance_sum(points) -> float:
    """Sum of |x_i - x_j|^2 over all ordered pairs (i = j included)."""
    pts = np.asarray(points, dtype=complex)
    if pts.size == 0:
        raise ValueError("empty point set")
    diff = pts[:, None] - pts[None, :]
    return float(np.sum(diff.real ** 2 + diff.imag ** 2))


def min_distance(points) -> float:
    pts = points.points if isinstance(points, Constellation) else np.asarray(points, dtype=complex)
    d = np.abs(pts[:, None] - pts[None, :])
    np.fill_diagonal(d, np.inf)
    return float(d.min())


def psk(M: int, P: float = 1.0) -> Constellation:
    return normalize_power(np.exp(1j * TWO_PI * np.arange(M) / M), P)


def qam(M: int, P: float = 1.0) -> Constellation:
    side = int(round(np.sqrt(M)))
    if side * side != M:
        raise ValueError("square QAM needs M to be a perfect square")
    levels = np.arange(side) * 2.0 - (side - 1)
    grid = (levels[None, :] + 1j * levels[:, None]).ravel()
    return normalize_power(grid, P)
