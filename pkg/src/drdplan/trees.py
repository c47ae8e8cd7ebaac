"""Offline compilation of the explicit-database policy into a decision tree.

Internal nodes name the edge to evaluate and branch on its outcome.  Leaves
either name a proven-valid path (Solved), certify that no library path
survives the training database (Dead), or hand off to the Bernoulli
completion policy with a bias vector mixing the empirical edge-validity
fraction of the surviving training worlds with an uninformed 0.5 term.
"""

from __future__ import annotations

import json
import sys
from dataclasses import dataclass, field

import numpy as np

from . import ec2
from .io import atomic_write_bytes
from .traces import AllRegionsDead, RunTrace, Solved

TREE_SCHEMA_VERSION = 1


class TreeSizeExceeded(RuntimeError):
    """Compilation grew past max_nodes; raise rather than emit a partial tree."""


@dataclass(frozen=True)
class InternalNode:
    edge: int
    child0: int  # followed when the edge evaluates invalid
    child1: int  # followed when the edge evaluates valid


@dataclass(frozen=True)
class SolvedLeaf:
    region: int


@dataclass(frozen=True)
class DeadLeaf:
    pass


@dataclass(frozen=True)
class HandoffLeaf:
    bias: tuple[float, ...]
    active_count: int


@dataclass
class DecisionTree:
    nodes: list
    root: int
    params: dict = field(default_factory=dict)

    def depth(self) -> int:
        def walk(i: int) -> int:
            node = self.nodes[i]
            if isinstance(node, InternalNode):
                return 1 + max(walk(node.child0), walk(node.child1))
            return 0

        sys.setrecursionlimit(max(sys.getrecursionlimit(), 4 * len(self.nodes) + 100))
        return walk(self.root)

    def leaf_counts(self) -> dict:
        counts = {"internal": 0, "solved": 0, "dead": 0, "handoff": 0}
        for node in self.nodes:
            if isinstance(node, InternalNode):
                counts["internal"] += 1
            elif isinstance(node, SolvedLeaf):
                counts["solved"] += 1
            elif isinstance(node, DeadLeaf):
                counts["dead"] += 1
            else:
                counts["handoff"] += 1
        return counts


def bias_vector(
    vs: ec2.VersionSpace, problem: ec2.DrdProblem, alpha: float
) -> np.ndarray:
    """Per-edge validity bias: alpha * empirical fraction over the active
    hypotheses + (1 - alpha) * 0.5; observed edges use the outcome instead
    of the fraction.  Entries stay inside [(1-a)/2, 1-(1-a)/2]."""
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must be in (0, 1)")
    if not vs.active.any():
        raise ValueError("bias_vector needs a nonempty active set")
    frac = problem.outcomes[vs.active].mean(axis=0).astype(np.float64)
    theta = alpha * frac + (1.0 - alpha) * 0.5
    for e, o in vs.observed.items():
        theta[e] = alpha * float(o) + (1.0 - alpha) * 0.5
    return theta


def _observed_bias(alpha: float, outcome: int) -> float:
    return alpha * float(outcome) + (1.0 - alpha) * 0.5


def compile_tree(
    problem: ec2.DrdProblem,
    eta: float,
    alpha: float,
    max_nodes: int = 200_000,
    params: dict | None = None,
) -> DecisionTree:
    """Depth-first greedy expansion of the explicit-database policy.

    Node indices are assigned post-order (children before parents), so the
    serialized bytes do not depend on how sibling subtrees are scheduled.
    """
    if not 0.0 <= eta <= 1.0:
        raise ValueError("eta must be in [0, 1]")
    if problem.num_hypotheses == 0:
        raise ValueError("training set is empty")

    nodes: list = []
    root_weight = float(problem.prior.sum())
    all_edges = range(problem.num_tests)
    sys.setrecursionlimit(max(sys.getrecursionlimit(), 8 * problem.num_tests + 1000))

    def emit(node) -> int:
        if len(nodes) >= max_nodes:
            raise TreeSizeExceeded(f"decision tree exceeded max_nodes={max_nodes}")
        nodes.append(node)
        return len(nodes) - 1

    def build(vs: ec2.VersionSpace) -> int:
        status = ec2.is_solved(vs, problem)
        if isinstance(status, Solved):
            return emit(SolvedLeaf(status.path_index))
        if isinstance(status, AllRegionsDead):
            return emit(DeadLeaf())
        bias = bias_vector(vs, problem, alpha)
        if vs.active_weight() <= eta * root_weight:
            return emit(HandoffLeaf(tuple(bias), vs.active_count))
        candidates = [e for e in all_edges if e not in vs.observed]
        sel = ec2.select_test(vs, problem, candidates) if candidates else None
        if sel is None:
            return emit(HandoffLeaf(tuple(bias), vs.active_count))
        edge, _ = sel
        children = []
        for outcome in (0, 1):
            child_vs = ec2.observe(vs, problem, edge, outcome)
            if not child_vs.active.any():
                # Training never realizes this outcome here: fall back to the
                # parent's bias with the branching edge pinned to the outcome.
                fallback = bias.copy()
                fallback[edge] = _observed_bias(alpha, outcome)
                children.append(emit(HandoffLeaf(tuple(fallback), 0)))
            else:
                children.append(build(child_vs))
        return emit(InternalNode(edge, children[0], children[1]))

    root = build(problem.root_version_space())
    tree = DecisionTree(nodes=nodes, root=root, params=dict(params or {}))
    tree.params.update({"eta": float(eta), "alpha": float(alpha), "max_nodes": int(max_nodes)})
    tree.params["stats"] = {**tree.leaf_counts(), "depth": tree.depth()}
    return tree


def compile_from_dataset(
    dataset, eta: float, alpha: float, max_nodes: int = 200_000
) -> DecisionTree:
    from .io import dataset_hash

    problem = ec2.problem_from_dataset(dataset, dataset.train)
    return compile_tree(
        problem,
        eta,
        alpha,
        max_nodes,
        params={"dataset_hash": dataset_hash(dataset), "n_train": int(len(dataset.train))},
    )


def execute_tree(
    tree: DecisionTree,
    oracle,
    eval_cost: np.ndarray,
    policy_name: str = "tree",
    world_index: int = -1,
) -> tuple[object, RunTrace]:
    """Follow branches by querying the oracle; returns (leaf, trace)."""
    trace = RunTrace(policy=policy_name, world_index=world_index)
    node = tree.nodes[tree.root]
    while isinstance(node, InternalNode):
        outcome = int(oracle(node.edge))
        trace.record(node.edge, outcome, float(eval_cost[node.edge]))
        node = tree.nodes[node.child1 if outcome else node.child0]
    return node, trace


def tree_to_bytes(tree: DecisionTree) -> bytes:
    records = []
    for node in tree.nodes:
        if isinstance(node, InternalNode):
            records.append({"type": "internal", "edge": node.edge,
                            "child": [node.child0, node.child1]})
        elif isinstance(node, SolvedLeaf):
            records.append({"type": "solved", "region": node.region})
        elif isinstance(node, DeadLeaf):
            records.append({"type": "dead"})
        elif isinstance(node, HandoffLeaf):
            records.append({"type": "handoff", "bias": list(node.bias),
                            "active_count": node.active_count})
        else:
            raise TypeError(f"unknown node type {type(node)!r}")
    doc = {
        "schema_version": TREE_SCHEMA_VERSION,
        "params": tree.params,
        "root": tree.root,
        "nodes": records,
    }
    return (json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n").encode("ascii")


class TreeFormatError(ValueError):
    """Malformed or wrong-version tree file."""


def tree_from_bytes(data: bytes) -> DecisionTree:
    try:
        doc = json.loads(data.decode("ascii"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise TreeFormatError(f"bad tree file: {exc}") from exc
    if doc.get("schema_version") != TREE_SCHEMA_VERSION:
        raise TreeFormatError(
            f"unsupported tree schema_version {doc.get('schema_version')!r}"
        )
    nodes: list = []
    for rec in doc["nodes"]:
        t = rec["type"]
        if t == "internal":
            nodes.append(InternalNode(rec["edge"], rec["child"][0], rec["child"][1]))
        elif t == "solved":
            nodes.append(SolvedLeaf(rec["region"]))
        elif t == "dead":
            nodes.append(DeadLeaf())
        elif t == "handoff":
            nodes.append(HandoffLeaf(tuple(rec["bias"]), rec["active_count"]))
        else:
            raise TreeFormatError(f"unknown node type {t!r}")
    return DecisionTree(nodes=nodes, root=doc["root"], params=doc["params"])


def save_tree(tree: DecisionTree, path: str) -> None:
    atomic_write_bytes(path, tree_to_bytes(tree))


def load_tree(path: str) -> DecisionTree:
    with open(path, "rb") as f:
        return tree_from_bytes(f.read())
