"""Synthetic buildings: random spanning-tree mazes and a regular office grid."""

from __future__ import annotations

import numpy as np

from .floorplan import Floorplan, Point, RadioConstants, Wall

CONCRETE_DB = 15.0
DRYWALL_DB = 2.0
DRYWALL_DIFFRACTION_DB_PER_90 = 5.0


def uniform_spanning_tree(rows: int, cols: int, rng: np.random.Generator) -> set:
    """Wilson's algorithm on the rows x cols grid graph.

    Returns the tree as a set of frozenset({cell, cell}) edges, cells being
    (i, j) tuples.
    """
    cells = [(i, j) for i in range(rows) for j in range(cols)]
    in_tree = {cells[int(rng.integers(len(cells)))]}
    nxt = {}
    tree = set()

    def neighbours(c):
        i, j = c
        out = []
        if i > 0:
            out.append((i - 1, j))
        if i < rows - 1:
            out.append((i + 1, j))
        if j > 0:
            out.append((i, j - 1))
        if j < cols - 1:
            out.append((i, j + 1))
        return out

    for start in cells:
        u = start
        while u not in in_tree:
            nb = neighbours(u)
            nxt[u] = nb[int(rng.integers(len(nb)))]
            u = nxt[u]
        # walking the successor pointers erases the loops
        u = start
        while u not in in_tree:
            in_tree.add(u)
            tree.add(frozenset((u, nxt[u])))
            u = nxt[u]
    return tree


def generate_maze(seed: int, cells: int = 20, cell_size: float = 3.0,
                  interior_db: float = DRYWALL_DB, exterior_db: float = CONCRETE_DB,
                  diffraction_db_per_90: float = DRYWALL_DIFFRACTION_DB_PER_90) -> Floorplan:
    """cells x cells maze: walls are the planar dual of the non-tree grid edges."""
    if cells < 2:
        raise ValueError("cells must be >= 2")
    rng = np.random.default_rng(seed)
    tree = uniform_spanning_tree(cells, cells, rng)
    k = diffraction_db_per_90
    s = float(cell_size)
    walls = []
    for i in range(cells):
        for j in range(cells):
            if i + 1 < cells and frozenset(((i, j), (i + 1, j))) not in tree:
                x = (i + 1) * s
                walls.append(Wall(Point(x, j * s), Point(x, (j + 1) * s), interior_db, k))
            if j + 1 < cells and frozenset(((i, j), (i, j + 1))) not in tree:
                y = (j + 1) * s
                walls.append(Wall(Point(i * s, y), Point((i + 1) * s, y), interior_db, k))
    top = cells * s
    for i in range(cells):
        lo, hi = i * s, (i + 1) * s
        walls += [
            Wall(Point(lo, 0.0), Point(hi, 0.0), exterior_db, k),
            Wall(Point(lo, top), Point(hi, top), exterior_db, k),
            Wall(Point(0.0, lo), Point(0.0, hi), exterior_db, k),
            Wall(Point(top, lo), Point(top, hi), exterior_db, k),
        ]
    return Floorplan(walls, RadioConstants(), name=f"maze-{cells}-seed{seed}")


def _row_groups(rows: int) -> list[int]:
    # a single row against each exterior wall, back-to-back pairs in between
    groups = [1]
    left = rows - 1
    while left >= 2:
        groups.append(2)
        left -= 2
    if left:
        groups.append(1)
    return groups


def generate_office(rows: int = 12, cols: int = 20, office_w: float = 3.0,
                    office_d: float = 4.0, hallway: float = 2.0) -> Floorplan:
    """Regular office grid served by hallways.

    Each row of ``cols`` offices is split in two halves by a central
    north-south hallway; rows are grouped back to back with an east-west
    hallway between groups. 12 x 20 gives a 62m x 60m plan.
    """
    if rows < 1 or cols < 1:
        raise ValueError("rows and cols must be >= 1")
    k = DRYWALL_DIFFRACTION_DB_PER_90
    left = (cols + 1) // 2
    right = cols - left
    xs = [i * office_w for i in range(left)]
    x_hall = left * office_w
    xs += [x_hall + hallway + i * office_w for i in range(right)]
    width = x_hall + hallway + right * office_w
    ys = []
    y = 0.0
    for g, size in enumerate(_row_groups(rows)):
        if g:
            y += hallway
        for _ in range(size):
            ys.append(y)
            y += office_d
    height = y

    segments = set()

    def add(p, q):
        p, q = (round(p[0], 9), round(p[1], 9)), (round(q[0], 9), round(q[1], 9))
        on_x = p[0] == q[0] and p[0] in (0.0, width)
        on_y = p[1] == q[1] and p[1] in (0.0, height)
        if not (on_x or on_y):
            segments.add((min(p, q), max(p, q)))

    for x0 in xs:
        for y0 in ys:
            x1, y1 = x0 + office_w, y0 + office_d
            add((x0, y0), (x1, y0))
            add((x0, y1), (x1, y1))
            add((x0, y0), (x0, y1))
            add((x1, y0), (x1, y1))
    walls = [Wall(Point(*p), Point(*q), DRYWALL_DB, k) for p, q in sorted(segments)]
    box = [(0.0, 0.0), (width, 0.0), (width, height), (0.0, height)]
    for p, q in zip(box, box[1:] + box[:1]):
        walls.append(Wall(Point(*p), Point(*q), CONCRETE_DB, k))
    return Floorplan(walls, RadioConstants(), name=f"office-{rows}x{cols}")
