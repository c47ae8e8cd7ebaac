"""Benchmark harness: run policies over dataset splits, account evaluation
cost, and reduce per-world costs to normalized-cost confidence intervals
and training-size ablation curves.

Policy ids: lazysp-graph, lazysp-set, random, bisect, direct+bisect,
direct-only.  The last two require a compiled decision tree whose recorded
dataset hash matches the dataset.
"""

from __future__ import annotations

import json
import multiprocessing

import numpy as np

from . import baselines, bernoulli, ec2, rng as _rng, trees
from .io import atomic_write_bytes, dataset_hash
from .model import Dataset
from .traces import AllRegionsDead, Infeasible, RunTrace, Solved

POLICY_IDS = (
    "lazysp-graph",
    "lazysp-set",
    "random",
    "bisect",
    "direct+bisect",
    "direct-only",
)

RUNS_SCHEMA_VERSION = 1


class ContractError(RuntimeError):
    """Inputs violate a cross-artifact contract (e.g. tree/dataset hash)."""


def _world_oracle(dataset: Dataset, h: int):
    row = dataset.theta[h]

    def oracle(edge: int) -> int:
        return int(row[edge])

    return oracle


def _replay_surviving(dataset: Dataset, train_idx: np.ndarray, observed: dict) -> np.ndarray:
    """Mask over train_idx of worlds consistent with the observations."""
    th = dataset.theta[train_idx]
    mask = np.ones(len(train_idx), dtype=bool)
    for e, o in observed.items():
        mask &= th[:, e] == o
    return mask


def _fallback_bias(
    dataset: Dataset, train_idx: np.ndarray, observed: dict, alpha: float
) -> np.ndarray:
    """Bias for continuations the tree did not anticipate: empirical edge
    fractions over the observation-consistent training worlds (or the whole
    training set if none survive), with observed edges pinned."""
    th = dataset.theta[train_idx]
    mask = _replay_surviving(dataset, train_idx, observed)
    base = th[mask] if mask.any() else th
    frac = base.mean(axis=0).astype(np.float64)
    theta = alpha * frac + (1.0 - alpha) * 0.5
    for e, o in observed.items():
        theta[e] = alpha * float(o) + (1.0 - alpha) * 0.5
    return theta


def _continue_with_bisect(
    dataset: Dataset, trace: RunTrace, bias: np.ndarray, alpha: float, oracle, h: int
) -> RunTrace:
    belief = bernoulli.BernoulliBelief(
        beta=bernoulli.clamp_bias(bias, alpha), observed=trace.evaluated
    )
    regions = [tuple(p.edge_ids) for p in dataset.paths]
    sub = bernoulli.bisect_policy(
        belief, regions, dataset.graph.eval_cost, oracle, trace.policy, h
    )
    trace.records.extend(sub.records)
    trace.terminal = sub.terminal
    trace.path_edges = sub.path_edges
    return trace


def _run_direct_bisect(dataset: Dataset, tree: trees.DecisionTree, train_idx, h: int) -> RunTrace:
    oracle = _world_oracle(dataset, h)
    alpha = float(tree.params["alpha"])
    leaf, trace = trees.execute_tree(
        tree, oracle, dataset.graph.eval_cost, "direct+bisect", h
    )
    if isinstance(leaf, trees.SolvedLeaf):
        # Off-database safety: prove the named path against the live world.
        path = dataset.paths[leaf.region].edge_ids
        evaluated = trace.evaluated
        valid = all(evaluated.get(e, 1) == 1 for e in path)
        if valid:
            for e in path:
                if e not in evaluated:
                    outcome = oracle(e)
                    trace.record(e, outcome, float(dataset.graph.eval_cost[e]))
                    if not outcome:
                        valid = False
                        break
        if valid:
            trace.terminal = Solved(leaf.region)
            trace.path_edges = tuple(path)
            return trace
        bias = _fallback_bias(dataset, train_idx, trace.evaluated, alpha)
        return _continue_with_bisect(dataset, trace, bias, alpha, oracle, h)
    if isinstance(leaf, trees.HandoffLeaf):
        return _continue_with_bisect(
            dataset, trace, np.asarray(leaf.bias), alpha, oracle, h
        )
    # DeadLeaf: the training database says no path survives, but the verdict
    # must be witnessed on the live world; the completion policy does that.
    bias = _fallback_bias(dataset, train_idx, trace.evaluated, alpha)
    return _continue_with_bisect(dataset, trace, bias, alpha, oracle, h)


def _run_direct_only(dataset: Dataset, tree: trees.DecisionTree, train_idx, h: int) -> RunTrace:
    oracle = _world_oracle(dataset, h)
    leaf, trace = trees.execute_tree(
        tree, oracle, dataset.graph.eval_cost, "direct-only", h
    )
    world = dataset.theta[h]
    if isinstance(leaf, trees.SolvedLeaf):
        region = leaf.region
    elif isinstance(leaf, trees.HandoffLeaf):
        mask = _replay_surviving(dataset, train_idx, trace.evaluated)
        memb = dataset.membership[train_idx][mask]
        plausible = np.nonzero(memb.any(axis=0))[0] if mask.any() else np.empty(0, int)
        region = int(plausible[0]) if plausible.size else None
    else:  # DeadLeaf
        region = None
    if region is None:
        trace.terminal = AllRegionsDead()
        trace.verified = not dataset.membership[h].any()
        return trace
    path = dataset.paths[region].edge_ids
    trace.terminal = Solved(region)
    trace.path_edges = tuple(path)
    trace.verified = bool(world[list(path)].all())
    return trace


def _run_one(policy: str, dataset: Dataset, tree, train_idx, seed: int, alpha: float, h: int) -> RunTrace:
    oracle = _world_oracle(dataset, h)
    if policy == "lazysp-graph":
        return baselines.lazysp_graph(dataset.graph, oracle, world_index=h)
    if policy == "lazysp-set":
        return baselines.lazysp_set(dataset.paths, dataset.graph, oracle, world_index=h)
    if policy == "random":
        return baselines.random_policy(dataset.paths, dataset.graph, oracle, seed, world_index=h)
    if policy == "bisect":
        # Standalone baseline: training column means as bias.
        frac = dataset.theta[train_idx].mean(axis=0)
        belief = bernoulli.BernoulliBelief(beta=bernoulli.clamp_bias(frac, alpha))
        regions = [tuple(p.edge_ids) for p in dataset.paths]
        return bernoulli.bisect_policy(
            belief, regions, dataset.graph.eval_cost, oracle, "bisect", h
        )
    if policy == "direct+bisect":
        return _run_direct_bisect(dataset, tree, train_idx, h)
    if policy == "direct-only":
        return _run_direct_only(dataset, tree, train_idx, h)
    raise ValueError(f"unknown policy id {policy!r}")


_POOL_STATE: dict = {}


def _pool_run(h: int) -> RunTrace:
    s = _POOL_STATE
    return _run_one(s["policy"], s["dataset"], s["tree"], s["train_idx"], s["seed"], s["alpha"], h)


def run_policy(
    policy: str,
    dataset: Dataset,
    split: str = "test",
    tree: trees.DecisionTree | None = None,
    seed: int = 0,
    jobs: int = 1,
    alpha: float = 0.9,
    train_idx: np.ndarray | None = None,
) -> list[RunTrace]:
    """Run one policy over every world of the chosen split."""
    if policy not in POLICY_IDS:
        raise ValueError(f"unknown policy id {policy!r}")
    needs_tree = policy in ("direct+bisect", "direct-only")
    if needs_tree:
        if tree is None:
            raise ContractError(f"policy {policy} requires a compiled tree")
        want = tree.params.get("dataset_hash")
        have = dataset_hash(dataset)
        if want is not None and want != have:
            raise ContractError(
                f"tree was compiled for dataset {want[:12]}..., got {have[:12]}..."
            )
        alpha = float(tree.params.get("alpha", alpha))
    if train_idx is None:
        prefix = tree.params.get("train_prefix") if tree is not None else None
        train_idx = dataset.train[:prefix] if prefix else dataset.train
    worlds = {"test": dataset.test, "train": dataset.train}.get(split)
    if worlds is None:
        worlds = np.arange(dataset.num_worlds)

    if jobs <= 1:
        return [_run_one(policy, dataset, tree, train_idx, seed, alpha, int(h)) for h in worlds]

    _POOL_STATE.update(
        policy=policy, dataset=dataset, tree=tree, train_idx=train_idx, seed=seed, alpha=alpha
    )
    ctx = multiprocessing.get_context("fork")
    with ctx.Pool(jobs) as pool:
        results = pool.map(_pool_run, [int(h) for h in worlds])
    _POOL_STATE.clear()
    return results


def normalized_cost(
    costs_alg, costs_ref, bootstrap_n: int = 10_000, seed: int = 0
) -> tuple[float, float]:
    """95% percentile-bootstrap CI of the mean paired ratio-minus-one.

    Statistic: mean over worlds of (cost_alg / cost_ref - 1); resampling is
    over worlds.  Pairs with cost_ref == 0 must be filtered by the caller.
    """
    a = np.asarray(costs_alg, dtype=np.float64)
    r = np.asarray(costs_ref, dtype=np.float64)
    if a.shape != r.shape or a.size < 2:
        raise ValueError("need paired cost vectors of equal length >= 2")
    if np.any(r == 0):
        raise ValueError("reference costs must be nonzero (filter zero pairs first)")
    ratios = a / r - 1.0
    gen = _rng.substream(seed, _rng.STREAM_BOOTSTRAP)
    idx = gen.integers(0, len(ratios), size=(bootstrap_n, len(ratios)))
    means = ratios[idx].mean(axis=1)
    return float(np.percentile(means, 2.5)), float(np.percentile(means, 97.5))


def trace_success(trace: RunTrace, dataset: Dataset) -> bool:
    """Solved with a path that is genuinely valid in the world."""
    if not isinstance(trace.terminal, Solved):
        return False
    if not trace.verified:
        return False
    world = dataset.theta[trace.world_index]
    return bool(world[list(trace.path_edges)].all()) if trace.path_edges else False


def summarize(traces: list[RunTrace], dataset: Dataset) -> dict:
    """Per-policy reduction: cost and success keyed by world index."""
    feasible = {int(h): bool(dataset.membership[h].any()) for h in dataset.test}
    out = {
        "costs": {int(t.world_index): t.total_cost for t in traces},
        "success": {int(t.world_index): trace_success(t, dataset) for t in traces},
        "feasible": {int(t.world_index): feasible.get(int(t.world_index), bool(dataset.membership[t.world_index].any())) for t in traces},
    }
    return out


def sweep_training_size(
    dataset: Dataset,
    sizes,
    eta: float,
    alpha: float,
    max_nodes: int = 200_000,
    jobs: int = 1,
) -> list[dict]:
    """Training-size ablation: recompile on nested training prefixes, report
    mean/variance of the combined policy's cost and both failure rates on
    the fixed test split (feasible worlds only for cost and failure)."""
    sizes = list(sizes)
    if sizes != sorted(sizes):
        raise ValueError("sizes must be increasing")
    if sizes[-1] > len(dataset.train):
        raise ValueError("largest size exceeds the training split")
    ds_hash = dataset_hash(dataset)
    feasible = dataset.membership[dataset.test].any(axis=1)
    results = []
    for size in sizes:
        sub = dataset.train[:size]
        problem = ec2.problem_from_dataset(dataset, sub)
        tree = trees.compile_tree(
            problem, eta, alpha, max_nodes,
            params={"dataset_hash": ds_hash, "train_prefix": int(size)},
        )
        combined = run_policy("direct+bisect", dataset, "test", tree, jobs=jobs, train_idx=sub)
        tree_only = run_policy("direct-only", dataset, "test", tree, jobs=jobs, train_idx=sub)
        costs = np.array([t.total_cost for t in combined])[feasible]
        ok_combined = np.array([trace_success(t, dataset) for t in combined])[feasible]
        ok_tree = np.array([trace_success(t, dataset) for t in tree_only])[feasible]
        results.append(
            {
                "n_train": int(size),
                "mean_cost": float(costs.mean()),
                "var_cost": float(costs.var(ddof=1)) if len(costs) > 1 else 0.0,
                "failure_rate_direct_only": float(1.0 - ok_tree.mean()),
                "failure_rate_direct_bisect": float(1.0 - ok_combined.mean()),
                "n_feasible_test": int(feasible.sum()),
                "tree_stats": tree.params["stats"],
            }
        )
    return results


# ---------------------------------------------------------------------------
# Run-file persistence and report assembly


def _terminal_to_json(t) -> dict:
    if isinstance(t, Solved):
        return {"kind": "solved", "path_index": t.path_index}
    if isinstance(t, AllRegionsDead):
        return {"kind": "dead", "off_database": t.off_database}
    if isinstance(t, Infeasible):
        return {"kind": "infeasible"}
    raise TypeError(f"cannot serialize terminal {t!r}")


def _terminal_from_json(d: dict):
    kind = d["kind"]
    if kind == "solved":
        return Solved(d["path_index"])
    if kind == "dead":
        return AllRegionsDead(d.get("off_database", False))
    if kind == "infeasible":
        return Infeasible()
    raise ValueError(f"unknown terminal kind {kind!r}")


def traces_to_json(traces: list[RunTrace]) -> list[dict]:
    return [
        {
            "policy": t.policy,
            "world_index": t.world_index,
            "records": [[e, o, c] for e, o, c in t.records],
            "terminal": _terminal_to_json(t.terminal),
            "path_edges": list(t.path_edges),
            "verified": t.verified,
        }
        for t in traces
    ]


def traces_from_json(docs: list[dict]) -> list[RunTrace]:
    out = []
    for d in docs:
        t = RunTrace(policy=d["policy"], world_index=d["world_index"])
        t.records = [(int(e), int(o), float(c)) for e, o, c in d["records"]]
        t.terminal = _terminal_from_json(d["terminal"])
        t.path_edges = tuple(d["path_edges"])
        t.verified = bool(d.get("verified", True))
        out.append(t)
    return out


def save_runs(
    path: str,
    policy: str,
    dataset: Dataset,
    traces: list[RunTrace],
    seed: int,
    params: dict | None = None,
) -> None:
    feasible = {int(h): bool(dataset.membership[h].any()) for h in {t.world_index for t in traces}}
    doc = {
        "schema_version": RUNS_SCHEMA_VERSION,
        "policy": policy,
        "dataset_hash": dataset_hash(dataset),
        "dataset_label": dataset.provenance.get("scenario", {}).get("kind", "dataset"),
        "seed": int(seed),
        "params": params or {},
        "feasible": feasible,
        "traces": traces_to_json(traces),
    }
    atomic_write_bytes(path, (json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n").encode())


def load_runs(path: str) -> dict:
    with open(path, "rb") as f:
        doc = json.loads(f.read().decode())
    if doc.get("schema_version") != RUNS_SCHEMA_VERSION:
        raise ValueError(f"unsupported runs schema in {path}")
    return doc


def build_report(
    run_docs: list[dict],
    reference: str,
    bootstrap_n: int = 10_000,
    seed: int = 0,
) -> dict:
    """Normalized-cost CIs of every policy against the reference, per
    dataset, paired on the feasible worlds both policies ran."""
    by_ds: dict[str, dict[str, dict]] = {}
    labels: dict[str, str] = {}
    for doc in run_docs:
        key = doc["dataset_hash"]
        labels[key] = doc["dataset_label"]
        by_ds.setdefault(key, {})[doc["policy"]] = doc

    report = {
        "reference": reference,
        "bootstrap_n": int(bootstrap_n),
        "bootstrap_seed": int(seed),
        "statistic": "mean paired (cost/ref - 1), percentile bootstrap over worlds",
        "edge_selector": "forward",
        "datasets": {},
    }
    for key, policies in sorted(by_ds.items()):
        if reference not in policies:
            raise ValueError(f"reference policy {reference!r} missing for dataset {labels[key]}")
        ref_doc = policies[reference]
        ref_costs = {
            t["world_index"]: sum(c for _, _, c in t["records"])
            for t in ref_doc["traces"]
        }
        feasible = {int(k): v for k, v in ref_doc["feasible"].items()}
        entry = {"label": labels[key], "policies": {}}
        for name, doc in sorted(policies.items()):
            costs = {
                t["world_index"]: sum(c for _, _, c in t["records"]) for t in doc["traces"]
            }
            succ = {
                t["world_index"]: t["terminal"]["kind"] == "solved" and t.get("verified", True)
                for t in doc["traces"]
            }
            common = sorted(
                h for h in costs
                if h in ref_costs and feasible.get(h, False) and ref_costs[h] > 0
            )
            excluded = sorted(h for h in costs if h in ref_costs and feasible.get(h, False) and ref_costs[h] == 0)
            pol = {
                "mean_cost": float(np.mean([costs[h] for h in common])) if common else None,
                "success_rate": float(np.mean([succ[h] for h in common])) if common else None,
                "n_paired": len(common),
                "n_excluded_zero_ref": len(excluded),
                "infeasible_rate": float(np.mean([not feasible.get(t["world_index"], False) for t in doc["traces"]])),
            }
            if len(common) >= 2:
                lo, hi = normalized_cost(
                    [costs[h] for h in common], [ref_costs[h] for h in common], bootstrap_n, seed
                )
                pol["ci"] = [lo, hi]
            else:
                pol["ci"] = None
            entry["policies"][name] = pol
        report["datasets"][key] = entry
    return report


def report_to_csv(report: dict) -> str:
    """Wide table mirroring the benchmark table layout: one row per policy,
    one (low, high) column pair per dataset."""
    keys = sorted(report["datasets"])
    labels = [report["datasets"][k]["label"] for k in keys]
    policies = sorted({p for k in keys for p in report["datasets"][k]["policies"]})
    lines = ["policy," + ",".join(f"{l}_ci_low,{l}_ci_high" for l in labels)]
    for pol in policies:
        cells = [pol]
        for k in keys:
            entry = report["datasets"][k]["policies"].get(pol)
            ci = entry["ci"] if entry else None
            if ci is None:
                cells += ["", ""]
            else:
                cells += [f"{ci[0]:.6f}", f"{ci[1]:.6f}"]
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def sweep_to_csv(results: list[dict]) -> str:
    lines = ["n_train,mean_cost,var_cost,failure_rate_direct_only,failure_rate_direct_bisect"]
    for row in results:
        lines.append(
            f"{row['n_train']},{row['mean_cost']:.6f},{row['var_cost']:.6f},"
            f"{row['failure_rate_direct_only']:.6f},{row['failure_rate_direct_bisect']:.6f}"
        )
    return "\n".join(lines) + "\n"
