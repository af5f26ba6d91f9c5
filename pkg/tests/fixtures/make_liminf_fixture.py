"""Regenerate liminf_phi.json from the long-double brute-force oracle.

    python3 tests/fixtures/make_liminf_fixture.py
"""

import json
import statistics
import sys
from pathlib import Path

HERE = Path(__file__).resolve().parent
sys.path.insert(0, str(HERE.parent))

from dioph.exact import INF, golden_ratio  # noqa: E402
from dioph.experiments import sample_gammas  # noqa: E402
from dioph.weights import PlaceSet  # noqa: E402

from oracles import brute_liminf_real  # noqa: E402

SEED = 0
SAMPLES = 200
GRID = [10 ** 2, 10 ** 3, 10 ** 4, 10 ** 5]


def main():
    alpha = golden_ratio().enclose(64).mid
    gammas = sample_gammas(SEED, PlaceSet.parse("inf"), 1, SAMPLES)
    stats = [brute_liminf_real(alpha, g.at(INF)[0], GRID) for g in gammas]
    medians = [statistics.median(col) for col in zip(*stats)]
    data = {
        "alpha": "golden ratio",
        "seed": SEED,
        "samples": SAMPLES,
        "grid": GRID,
        "medians": medians,
        "ratio": medians[-1] / medians[0],
        "slack": 0.1,
    }
    (HERE / "liminf_phi.json").write_text(json.dumps(data, indent=2) + "\n")
    print(json.dumps(data, indent=2))


if __name__ == "__main__":
    main()
