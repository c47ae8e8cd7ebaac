"""Generate one small dataset per scenario kind and describe it.

Run:  python3 demos/generate_scenarios.py [out_dir]

Equivalent CLI:
  drdplan gen --scenario twowall --grid 11x11 --worlds 200 --paths 100 \
      --k 800 --seed 0 --out twowall.bin
"""

import os
import sys

from drdplan.io import dataset_hash, save_dataset
from drdplan.model import validate_dataset
from drdplan.scenarios import KINDS, ScenarioSpec, generate_dataset


def main() -> None:
    out_dir = sys.argv[1] if len(sys.argv) > 1 else "."
    os.makedirs(out_dir, exist_ok=True)
    for kind in KINDS:
        spec = ScenarioSpec(kind=kind, rows=11, cols=11, seed=0)
        ds = generate_dataset(spec, n_worlds=200, k=800, m=100, test_fraction=0.1)
        violations = validate_dataset(ds)
        assert violations == [], violations
        path = f"{out_dir}/{kind}.bin"
        save_dataset(ds, path)
        feasible = ds.membership.any(axis=1).mean()
        print(
            f"{kind:8s}  worlds={ds.num_worlds}  edges={ds.graph.num_edges}  "
            f"paths={ds.num_paths}  feasible={feasible:.2f}  "
            f"train_coverage={ds.provenance['train_coverage']:.2f}  "
            f"hash={dataset_hash(ds)[:12]}  -> {path}"
        )


if __name__ == "__main__":
    main()
