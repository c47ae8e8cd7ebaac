"""Desk-scale 2D grid scenarios: graph construction, parametric obstacle
worlds, and a k-shortest-path candidate library.

Four obstacle kinds span the weakly-correlated (forest) to strongly
correlated (twowall, baffle) spectrum:

  forest  - n discs with uniform centers (quantized to 1/64 grid units);
  onewall - one full-width horizontal wall, one cell thick, with a gap;
  twowall - two such walls at distinct rows with independent gaps;
  baffle  - a wall attached to the left boundary and one to the right,
            at distinct rows, each leaving a gap at its free end.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, asdict
from itertools import islice

import networkx as nx
import numpy as np

from . import rng as _rng
from .geometry import SCALE, edge_segments, segments_hit_disc, segments_hit_rect
from .model import Dataset, ExplicitGraph, Path, SQRT2, compute_membership, split_dataset

KINDS = ("forest", "onewall", "twowall", "baffle")

# Neighbor offsets (drow, dcol) covering each undirected edge once.
_OFFSETS = ((0, 1), (1, 0), (1, 1), (1, -1))


@dataclass
class ScenarioSpec:
    """Parametric generative model for one scenario family."""

    kind: str
    rows: int
    cols: int
    connectivity: int = 8
    seed: int = 0
    # forest
    n_discs: int = 6
    disc_radius: float = 0.7
    # wall kinds (onewall / twowall / baffle).  Defaults keep walls and gaps
    # in the central band of the grid so that the k-shortest library (which
    # hugs the start-goal diagonal) retains coverage of most worlds.
    gap_width: int | None = None  # default 3 for walls, cols // 2 for baffle
    wall_row_lo: int | None = None  # default rows // 3
    wall_row_hi: int | None = None  # default rows - 1 - rows // 3
    gap_col_lo: int | None = None  # default cols // 4
    gap_col_hi: int | None = None  # default cols - gap - cols // 4

    def validate(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown scenario kind {self.kind!r}")
        if self.rows < 5 or self.cols < 5:
            raise ValueError("grid must be at least 5x5")
        if self.connectivity != 8:
            raise ValueError("only 8-connected grids are supported")
        if self.kind == "forest":
            if self.n_discs < 0 or self.disc_radius <= 0:
                raise ValueError("forest needs n_discs >= 0 and disc_radius > 0")
            return
        gw = self.gap_width_eff()
        if gw < 1:
            raise ValueError("gap width must be at least 1 cell")
        lo, hi = self.row_range()
        if not (1 <= lo <= hi <= self.rows - 2):
            raise ValueError("wall row range outside grid interior")
        if self.kind in ("twowall", "baffle") and hi - lo < 1:
            raise ValueError(f"{self.kind} needs at least two candidate rows")
        if self.kind == "baffle":
            if gw >= self.cols:
                raise ValueError("baffle gap width must leave room for the wall")
            return
        glo, ghi = self.gap_range()
        if not (0 <= glo <= ghi <= self.cols - gw):
            raise ValueError("gap column range leaves the grid")

    def gap_width_eff(self) -> int:
        if self.gap_width is not None:
            return self.gap_width
        if self.kind == "baffle":
            return self.cols // 2
        return 2 if self.kind == "twowall" else 3

    def row_range(self) -> tuple[int, int]:
        # twowall keeps both walls within one row of the center so the
        # discrete configuration space stays small enough for a sampled
        # database to resolve, while the walls still straddle the diagonal.
        if self.kind == "twowall":
            mid = (self.rows - 1) // 2
            lo, hi = mid - 1, mid + 1
        else:
            lo, hi = self.rows // 3, self.rows - 1 - self.rows // 3
        if self.wall_row_lo is not None:
            lo = self.wall_row_lo
        if self.wall_row_hi is not None:
            hi = self.wall_row_hi
        return lo, hi

    def gap_range(self) -> tuple[int, int]:
        gw = self.gap_width_eff()
        if self.kind == "twowall":
            # gap band sits left of the center column: the start-goal
            # diagonal crosses the walls right of it, so an optimistic
            # shortest-path baseline pays for wall pokes before detouring
            lo = max((self.cols - gw) // 2 - 2, 0)
            hi = lo + 2
        else:
            lo = self.cols // 4
            hi = self.cols - gw - self.cols // 4
        if self.gap_col_lo is not None:
            lo = self.gap_col_lo
        if self.gap_col_hi is not None:
            hi = self.gap_col_hi
        return lo, hi


def build_grid_graph(rows: int, cols: int, connectivity: int = 8) -> ExplicitGraph:
    """8-connected integer lattice; unit evaluation cost, Euclidean lengths.

    Vertex (r, c) has id r * cols + c and position (x=c, y=r).  Start is the
    bottom-left corner (0, 0), goal the top-right corner.
    """
    if rows < 2 or cols < 2:
        raise ValueError("grid must be at least 2x2")
    if connectivity != 8:
        raise ValueError("only 8-connected grids are supported")
    positions = np.array(
        [(c, r) for r in range(rows) for c in range(cols)], dtype=np.float64
    )
    endpoints = []
    lengths = []
    for r in range(rows):
        for c in range(cols):
            for dr, dc in _OFFSETS:
                r2, c2 = r + dr, c + dc
                if 0 <= r2 < rows and 0 <= c2 < cols:
                    endpoints.append((r * cols + c, r2 * cols + c2))
                    lengths.append(1.0 if dr == 0 or dc == 0 else SQRT2)
    endpoints = np.asarray(endpoints, dtype=np.int64)
    return ExplicitGraph(
        positions=positions,
        endpoints=endpoints,
        eval_cost=np.ones(len(endpoints), dtype=np.float64),
        length=np.asarray(lengths, dtype=np.float64),
        start=0,
        goal=rows * cols - 1,
    )


def _sample_obstacles(spec: ScenarioSpec, rng: np.random.Generator) -> dict:
    """Draw one world's obstacle parameters (scaled-integer geometry)."""
    rows, cols, gw = spec.rows, spec.cols, spec.gap_width_eff()
    half = SCALE // 2

    def wall_rects(row: int, gap_col: int) -> list[tuple[int, int, int, int]]:
        ylo, yhi = row * SCALE - half, row * SCALE + half
        rects = []
        if gap_col > 0:
            rects.append((-half, gap_col * SCALE - half, ylo, yhi))
        if gap_col + gw - 1 < cols - 1:
            rects.append(((gap_col + gw - 1) * SCALE + half, (cols - 1) * SCALE + half, ylo, yhi))
        return rects

    if spec.kind == "forest":
        r = int(round(spec.disc_radius * SCALE))
        discs = [
            (
                int(rng.integers(0, (cols - 1) * SCALE + 1)),
                int(rng.integers(0, (rows - 1) * SCALE + 1)),
                r,
            )
            for _ in range(spec.n_discs)
        ]
        return {"discs": discs, "rects": []}

    rlo, rhi = spec.row_range()
    if spec.kind == "onewall":
        w = int(rng.integers(rlo, rhi + 1))
        glo, ghi = spec.gap_range()
        g = int(rng.integers(glo, ghi + 1))
        return {"discs": [], "rects": wall_rects(w, g)}

    # Two distinct rows for twowall / baffle.
    choices = np.arange(rlo, rhi + 1)
    pair = rng.choice(choices, size=2, replace=False)
    if spec.kind == "twowall":
        glo, ghi = spec.gap_range()
        rects = []
        for w in sorted(int(x) for x in pair):
            rects += wall_rects(w, int(rng.integers(glo, ghi + 1)))
        return {"discs": [], "rects": rects}

    # baffle: the left-attached wall (gap on the right end) sits at the
    # higher row, the right-attached wall (gap on the left end) at the
    # lower row, so the free corridor bends the start-goal diagonal rather
    # than blocking it outright.
    r_left, r_right = int(pair.max()), int(pair.min())
    half_rects = [
        (-half, (cols - 1 - gw) * SCALE + half,
         r_left * SCALE - half, r_left * SCALE + half),
        (gw * SCALE - half, (cols - 1) * SCALE + half,
         r_right * SCALE - half, r_right * SCALE + half),
    ]
    return {"discs": [], "rects": half_rects}


def sample_world(
    spec: ScenarioSpec, rng: np.random.Generator, segments: np.ndarray
) -> np.ndarray:
    """Validity bit vector: an edge is invalid iff its segment meets any
    sampled obstacle region (exact integer tests)."""
    obstacles = _sample_obstacles(spec, rng)
    blocked = np.zeros(segments.shape[0], dtype=bool)
    for cx, cy, r in obstacles["discs"]:
        blocked |= segments_hit_disc(segments, cx, cy, r)
    for xlo, xhi, ylo, yhi in obstacles["rects"]:
        blocked |= segments_hit_rect(segments, xlo, xhi, ylo, yhi)
    return (~blocked).astype(np.uint8)


class LibraryTruncated(UserWarning):
    """Fewer distinct simple paths exist than the requested library size."""


def build_path_library(
    graph: ExplicitGraph, k: int, m: int, seed: int
) -> tuple[list[Path], bool]:
    """k shortest loopless start-goal paths on the obstacle-free graph,
    subsampled uniformly to m (shortest always kept), re-sorted by length.

    Returns (paths, truncated) where truncated flags that fewer than m
    distinct paths exist.
    """
    if not k >= m >= 1:
        raise ValueError("need k >= m >= 1")
    G = nx.Graph()
    G.add_nodes_from(range(graph.num_vertices))
    edge_id = {}
    for e, (u, v) in enumerate(graph.endpoints):
        G.add_edge(int(u), int(v), weight=float(graph.length[e]))
        edge_id[(int(u), int(v))] = e
        edge_id[(int(v), int(u))] = e

    try:
        vertex_paths = list(islice(
            nx.shortest_simple_paths(G, graph.start, graph.goal, weight="weight"), k
        ))
    except nx.NetworkXNoPath as exc:
        raise ValueError("start and goal are not connected") from exc

    seen = set()
    candidates: list[Path] = []
    for vp in vertex_paths:
        ids = tuple(edge_id[(vp[i], vp[i + 1])] for i in range(len(vp) - 1))
        if ids not in seen:
            seen.add(ids)
            candidates.append(Path(ids))

    truncated = len(candidates) < m
    if truncated:
        warnings.warn(
            f"only {len(candidates)} distinct simple paths found (wanted {m})",
            LibraryTruncated,
        )
        chosen = list(range(len(candidates)))
    elif len(candidates) == m:
        chosen = list(range(m))
    else:
        gen = _rng.substream(seed, _rng.STREAM_SUBSAMPLE)
        rest = gen.choice(np.arange(1, len(candidates)), size=m - 1, replace=False)
        chosen = [0] + sorted(int(i) for i in rest)

    def total_length(p: Path) -> float:
        return float(graph.length[list(p.edge_ids)].sum())

    chosen.sort(key=lambda i: (total_length(candidates[i]), i))
    return [candidates[i] for i in chosen], truncated


def generate_dataset(
    spec: ScenarioSpec,
    n_worlds: int,
    k: int,
    m: int,
    test_fraction: float = 0.1,
    seed: int | None = None,
) -> Dataset:
    """Full dataset: graph, sampled worlds, library, membership and split.

    Worlds draw from per-index substreams (stream id = world index) so the
    output is identical however sampling is parallelized.
    """
    spec.validate()
    if n_worlds < 10:
        raise ValueError("need at least 10 worlds")
    root_seed = spec.seed if seed is None else seed

    graph = build_grid_graph(spec.rows, spec.cols, spec.connectivity)
    segments = edge_segments(graph.positions, graph.endpoints)
    theta = np.stack(
        [
            sample_world(spec, _rng.substream(root_seed, _rng.STREAM_WORLDS, i), segments)
            for i in range(n_worlds)
        ]
    )
    paths, truncated = build_path_library(graph, k, m, root_seed)
    membership = compute_membership(theta, paths)

    ds = Dataset(
        graph=graph,
        theta=theta,
        paths=paths,
        membership=membership,
        provenance={},
    )
    split_dataset(ds, test_fraction, root_seed)
    coverage = float(membership[ds.train].any(axis=1).mean())
    ds.provenance = {
        "generator": "drdplan.scenarios",
        "scenario": {k_: v for k_, v in asdict(spec).items() if v is not None},
        "n_worlds": int(n_worlds),
        "k_shortest": int(k),
        "library_size": len(paths),
        "library_truncated": bool(truncated),
        "test_fraction": float(test_fraction),
        "seed": int(root_seed),
        "train_coverage": coverage,
        "streams": dict(_rng.STREAM_NAMES),
    }
    return ds
