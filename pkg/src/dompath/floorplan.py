"""Floorplan data model, geometric predicates and the JSON file format."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

import numpy as np
from scipy.spatial import cKDTree

EPS_GEO = 1e-9
EPS_ANGLE = 1e-9
TWO_PI = 2.0 * math.pi


class FloorplanError(ValueError):
    """Malformed floorplan document (bad JSON or schema)."""


class ValidationError(ValueError):
    """Floorplan content violates a model invariant."""


class Point(NamedTuple):
    x: float
    y: float


@dataclass(frozen=True)
class Wall:
    a: Point
    b: Point
    penetration_db: float
    diffraction_db_per_90: float = 0.0

    def __post_init__(self):
        if self.penetration_db < 0 or self.diffraction_db_per_90 < 0:
            raise ValidationError(f"negative loss on wall {self.a}-{self.b}")
        if math.dist(self.a, self.b) < EPS_GEO:
            raise ValidationError(f"zero-length wall at {self.a}")


@dataclass(frozen=True)
class Corner:
    position: Point
    diffraction_db_per_rad: float
    # wall indices sorted by the angle of the wall ray leaving this corner
    incident_walls: tuple[int, ...]
    wall_angles: tuple[float, ...]
    wall_penetration: tuple[float, ...]


@dataclass(frozen=True)
class RadioConstants:
    freespace_exponent: float = 2.0
    reference_loss_db: float = 40.0
    reference_distance: float = 1.0

    def __post_init__(self):
        if self.freespace_exponent <= 0:
            raise ValidationError("freespace_exponent must be positive")
        if self.reference_distance <= 0:
            raise ValidationError("reference_distance_m must be positive")

    @property
    def alpha(self) -> float:
        """Coefficient of ln(d) in the objective, 10*n/ln(10) dB."""
        return 10.0 * self.freespace_exponent / math.log(10.0)


def ray_angle(origin, target) -> float:
    """Angle in [0, 2*pi) of the ray from origin towards target."""
    a = math.atan2(target[1] - origin[1], target[0] - origin[0])
    return a + TWO_PI if a < 0 else a


def deflection_angle(dir_in, dir_out) -> float:
    """Angle in [0, pi] between two directions of travel; 0 is straight on."""
    n_in = math.hypot(*dir_in)
    n_out = math.hypot(*dir_out)
    if n_in < EPS_GEO or n_out < EPS_GEO:
        raise ValueError("zero-length direction")
    cos = (dir_in[0] * dir_out[0] + dir_in[1] * dir_out[1]) / (n_in * n_out)
    sin = (dir_in[0] * dir_out[1] - dir_in[1] * dir_out[0]) / (n_in * n_out)
    return abs(math.atan2(sin, cos))


def angle_between(theta: float, phi: float) -> float:
    """Deflection between travel heading theta and outgoing heading phi.

    Both engines go through this function so intra-corner weights agree
    bit for bit.
    """
    delta = (phi - theta) % TWO_PI
    return delta if delta <= math.pi else TWO_PI - delta


class Floorplan:
    """Immutable set of walls plus the corners derived from their endpoints.

    Walls whose interior passes through another wall's endpoint are split
    there, so every corner is an endpoint of all walls that touch it.
    """

    def __init__(self, walls: Iterable[Wall], constants: RadioConstants | None = None,
                 name: str = ""):
        self.name = name
        self.constants = constants or RadioConstants()
        self.walls: tuple[Wall, ...] = tuple(_split_at_corners(list(walls)))
        self._derive_corners()
        self._cache: dict = {}

    # -- derived data -------------------------------------------------------
    def _derive_corners(self):
        walls = self.walls
        n = len(walls)
        self.wall_a = np.array([w.a for w in walls], dtype=float).reshape(n, 2)
        self.wall_b = np.array([w.b for w in walls], dtype=float).reshape(n, 2)
        self.wall_pen = np.array([w.penetration_db for w in walls], dtype=float)
        ends = np.concatenate([self.wall_a, self.wall_b]) if n else np.zeros((0, 2))
        positions, end_to_corner = _dedup_points(ends)
        self.wall_corner = end_to_corner.reshape(2, n).T if n else np.zeros((0, 2), int)
        incident: list[list[tuple[float, int]]] = [[] for _ in range(len(positions))]
        for w, (ca, cb) in enumerate(self.wall_corner):
            incident[ca].append((ray_angle(positions[ca], positions[cb]), w))
            incident[cb].append((ray_angle(positions[cb], positions[ca]), w))
        corners = []
        for c, inc in enumerate(incident):
            inc.sort()
            angles = tuple(a for a, _ in inc)
            for a0, a1 in zip(angles, angles[1:]):
                if a1 - a0 < EPS_ANGLE:
                    raise ValidationError(
                        f"overlapping colinear walls at corner {tuple(positions[c])}")
            k90 = max(walls[w].diffraction_db_per_90 for _, w in inc)
            corners.append(Corner(Point(*map(float, positions[c])), k90 / (math.pi / 2),
                                  tuple(w for _, w in inc), angles,
                                  tuple(walls[w].penetration_db for _, w in inc)))
        self.corners: tuple[Corner, ...] = tuple(corners)
        self.corner_pos = np.asarray(positions, dtype=float).reshape(-1, 2)

    @property
    def alpha(self) -> float:
        return self.constants.alpha

    @property
    def bounding_box(self) -> tuple[Point, Point] | None:
        if not self.walls:
            return None
        lo = self.corner_pos.min(axis=0)
        hi = self.corner_pos.max(axis=0)
        return Point(*map(float, lo)), Point(*map(float, hi))

    def contains(self, p, tol: float = EPS_GEO) -> bool:
        box = self.bounding_box
        if box is None:
            return True
        (x0, y0), (x1, y1) = box
        return x0 - tol <= p[0] <= x1 + tol and y0 - tol <= p[1] <= y1 + tol

    def __repr__(self):
        return (f"Floorplan(name={self.name!r}, walls={len(self.walls)}, "
                f"corners={len(self.corners)})")

    # -- serialization -------------------------------------------------------
    def to_dict(self) -> dict:
        c = self.constants
        return {
            "name": self.name,
            "freespace_exponent": c.freespace_exponent,
            "reference_loss_db": c.reference_loss_db,
            "reference_distance_m": c.reference_distance,
            "walls": [
                {"a": list(w.a), "b": list(w.b), "penetration_db": w.penetration_db,
                 "diffraction_db_per_90deg": w.diffraction_db_per_90}
                for w in self.walls
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)


def _dedup_points(points: np.ndarray, tol: float = EPS_GEO):
    """Cluster points closer than tol; returns (positions, index per input)."""
    n = len(points)
    if n == 0:
        return np.zeros((0, 2)), np.zeros(0, dtype=int)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i, j in cKDTree(points).query_pairs(tol):
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[max(ri, rj)] = min(ri, rj)
    roots = [find(i) for i in range(n)]
    order = {}
    for r in roots:
        if r not in order:
            order[r] = len(order)
    positions = np.array([points[r] for r in order])
    return positions, np.array([order[r] for r in roots], dtype=int)


def _split_at_corners(walls: list[Wall]) -> list[Wall]:
    """Split each wall at any other wall endpoint lying in its interior."""
    if not walls:
        return walls
    ends = np.array([p for w in walls for p in (w.a, w.b)], dtype=float)
    pts, _ = _dedup_points(ends)
    out = []
    for w in walls:
        a = np.asarray(w.a, dtype=float)
        v = np.asarray(w.b, dtype=float) - a
        length = float(np.hypot(*v))
        rel = pts - a
        t = rel @ v / (length * length)
        off = np.abs(v[0] * rel[:, 1] - v[1] * rel[:, 0]) / length
        inside = (off <= EPS_GEO) & (t * length > EPS_GEO) & ((1 - t) * length > EPS_GEO)
        if not inside.any():
            out.append(w)
            continue
        cuts = [w.a] + [Point(*pts[i]) for i in np.argsort(t) if inside[i]] + [w.b]
        for p, q in zip(cuts, cuts[1:]):
            out.append(Wall(Point(*p), Point(*q), w.penetration_db, w.diffraction_db_per_90))
    return out


# -- segment predicates ------------------------------------------------------

def crossing_mask(a, b, wall_a: np.ndarray, wall_b: np.ndarray) -> np.ndarray:
    """Boolean mask of walls properly crossed by the open segment (a, b).

    Touching a wall endpoint, starting or ending on a wall, and colinear
    overlap are not crossings.
    """
    ax, ay = a
    ux, uy = b[0] - ax, b[1] - ay
    seg_len = math.hypot(ux, uy)
    if seg_len < EPS_GEO:
        raise ValueError("degenerate segment")
    px, py = wall_a[:, 0], wall_a[:, 1]
    vx, vy = wall_b[:, 0] - px, wall_b[:, 1] - py
    wlen = np.hypot(vx, vy)
    dp = (ux * (py - ay) - uy * (px - ax)) / seg_len
    dq = (ux * (wall_b[:, 1] - ay) - uy * (wall_b[:, 0] - ax)) / seg_len
    da = (vx * (ay - py) - vy * (ax - px)) / wlen
    db = (vx * (b[1] - py) - vy * (b[0] - px)) / wlen
    e = EPS_GEO
    straddle_wall = ((dp > e) & (dq < -e)) | ((dp < -e) & (dq > e))
    straddle_seg = ((da > e) & (db < -e)) | ((da < -e) & (db > e))
    return straddle_wall & straddle_seg


def segment_penetration(a, b, plan: Floorplan) -> tuple[float, list[int]]:
    """Total penetration loss of walls properly crossed by segment (a, b)."""
    if math.dist(a, b) < EPS_GEO:
        raise ValueError("segment endpoints coincide")
    if not plan.walls:
        return 0.0, []
    mask = crossing_mask(a, b, plan.wall_a, plan.wall_b)
    crossed = np.flatnonzero(mask).tolist()
    # fsum keeps the total independent of wall order
    return math.fsum(plan.wall_pen[crossed]), crossed


# -- file format -------------------------------------------------------------

_TOP_KEYS = {"name", "freespace_exponent", "reference_loss_db", "reference_distance_m", "walls"}
_WALL_KEYS = {"a", "b", "penetration_db", "diffraction_db_per_90deg"}


def _point(value, where: str) -> Point:
    if (not isinstance(value, Sequence) or isinstance(value, str) or len(value) != 2
            or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value)):
        raise FloorplanError(f"{where}: expected [x, y] numbers, got {value!r}")
    if not all(math.isfinite(v) for v in value):
        raise ValidationError(f"{where}: non-finite coordinate")
    return Point(float(value[0]), float(value[1]))


def _number(doc: dict, key: str, default, where: str) -> float:
    value = doc.get(key, default)
    if value is None or isinstance(value, bool) or not isinstance(value, (int, float)):
        raise FloorplanError(f"{where}.{key}: expected a number, got {value!r}")
    return float(value)


def parse_floorplan(text: str) -> Floorplan:
    """Parse a floorplan JSON document."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FloorplanError(f"line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise FloorplanError("top level: expected an object")
    unknown = set(doc) - _TOP_KEYS
    if unknown:
        raise FloorplanError(f"top level: unknown field(s) {sorted(unknown)}")
    if "walls" not in doc or not isinstance(doc["walls"], list):
        raise FloorplanError("top level: 'walls' must be a list")
    name = doc.get("name", "")
    if not isinstance(name, str):
        raise FloorplanError("name: expected a string")
    constants = RadioConstants(
        _number(doc, "freespace_exponent", 2.0, "top level"),
        _number(doc, "reference_loss_db", 40.0, "top level"),
        _number(doc, "reference_distance_m", 1.0, "top level"),
    )
    walls = []
    for i, w in enumerate(doc["walls"]):
        where = f"walls[{i}]"
        if not isinstance(w, dict):
            raise FloorplanError(f"{where}: expected an object")
        unknown = set(w) - _WALL_KEYS
        if unknown:
            raise FloorplanError(f"{where}: unknown field(s) {sorted(unknown)}")
        for key in ("a", "b", "penetration_db"):
            if key not in w:
                raise FloorplanError(f"{where}: missing field '{key}'")
        try:
            walls.append(Wall(_point(w["a"], f"{where}.a"), _point(w["b"], f"{where}.b"),
                              _number(w, "penetration_db", None, where),
                              _number(w, "diffraction_db_per_90deg", 0.0, where)))
        except ValidationError as exc:
            raise ValidationError(f"{where}: {exc}") from exc
    return Floorplan(walls, constants, name)


def load_floorplan(path) -> Floorplan:
    with open(path, encoding="utf-8") as fh:
        return parse_floorplan(fh.read())
