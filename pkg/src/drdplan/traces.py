"""Run traces and terminal verdicts shared by every policy."""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class Solved:
    """A candidate path was proven fully valid (or, for the tree-only
    ablation, claimed valid). ``path_index`` is None when the policy found a
    path outside the library (full-graph LazySP)."""

    path_index: int | None = None


@dataclass(frozen=True)
class AllRegionsDead:
    """Every candidate path holds an invalid edge.  ``off_database`` marks
    the degenerate case of an emptied explicit version space."""

    off_database: bool = False


@dataclass(frozen=True)
class Infeasible:
    """The optimistic graph itself is disconnected (full-graph LazySP)."""


@dataclass(frozen=True)
class Handoff:
    """The explicit-database policy stopped below its confidence threshold;
    payload is attached by the caller (version space or bias vector)."""


@dataclass(frozen=True)
class Unsolved:
    """Intermediate status: uncertainty still spans multiple regions."""


@dataclass
class RunTrace:
    """Ordered record of edge evaluations performed during one episode.

    ``records`` holds (edge id, outcome, cost) in evaluation order.  Policies
    never evaluate an edge twice, so edge ids are distinct.
    """

    policy: str
    world_index: int = -1
    records: list[tuple[int, int, float]] = field(default_factory=list)
    terminal: object = None
    # Edge ids of the path backing a Solved verdict (library path or the
    # LazySP graph path); empty otherwise.
    path_edges: tuple[int, ...] = ()
    # False only for unverified claims (tree-only ablation).
    verified: bool = True

    @property
    def total_cost(self) -> float:
        return float(sum(c for _, _, c in self.records))

    @property
    def evaluated(self) -> dict[int, int]:
        return {e: o for e, o, _ in self.records}

    def record(self, edge: int, outcome: int, cost: float) -> None:
        self.records.append((int(edge), int(outcome), float(cost)))
