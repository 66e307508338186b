#!/usr/bin/env python3
"""Record scoring fixtures for the frontend agreement tests.

For 25 scripted questionnaire inputs this captures (a) the probability the
``pqscreen score`` command prints and (b) the exact response body the
scoring service returns, so the UI test suite can verify the displayed
numbers against both without running Python.
"""

import json
import subprocess
import sys
from pathlib import Path

import numpy as np

from pqscreen.artifacts import builtin_artifact
from pqscreen.cohort import PQ_ITEM_NAMES
from pqscreen.serve import ScoringService, _encode

OUT = Path(__file__).resolve().parent.parent / "frontend" / "tests" / "fixtures" / "scoring_cases.json"


def scripted_cases():
    rng = np.random.default_rng(20250808)
    cases = [
        {"name": "all-zero", "features": {}, "age": 0, "gender": 0},
        {"name": "mean-age-healthy", "features": {}, "age": 66.42, "gender": 0},
        {"name": "tremor-4", "features": {"P2_TRMR": 4}, "age": 66, "gender": 1},
        {"name": "handwriting-2-eating-1", "features": {"P2_HWRT": 2, "P2_EAT": 1},
         "age": 70, "gender": 0},
        {"name": "all-severe", "features": {n: 4 for n in PQ_ITEM_NAMES}, "age": 80,
         "gender": 1},
    ]
    while len(cases) < 25:
        k = int(rng.integers(0, 8))
        picks = rng.choice(len(PQ_ITEM_NAMES), size=k, replace=False)
        features = {PQ_ITEM_NAMES[i]: int(rng.integers(0, 5)) for i in picks}
        cases.append(
            {
                "name": f"random-{len(cases):02d}",
                "features": features,
                "age": round(float(rng.uniform(35, 90)), 2),
                "gender": int(rng.integers(0, 2)),
            }
        )
    return cases


def cli_probability(case) -> float:
    cmd = [sys.executable, "-m", "pqscreen.cli", "score", "--model", "paper-eq1",
           "--age", str(case["age"]), "--gender", str(case["gender"])]
    for name, value in case["features"].items():
        cmd += ["--set", f"{name}={value}"]
    out = subprocess.run(cmd, capture_output=True, text=True, check=True).stdout
    line = next(l for l in out.splitlines() if l.startswith("probability:"))
    return float(line.split()[1])


def main():
    service = ScoringService(builtin_artifact("paper-eq1"))
    fixtures = []
    for case in scripted_cases():
        request = {
            "features": {n: case["features"].get(n, 0) for n in PQ_ITEM_NAMES},
            "age": case["age"],
            "gender": case["gender"],
        }
        status, payload = service.handle_score_body(json.dumps(request).encode())
        assert status == 200, payload
        fixtures.append(
            {
                "name": case["name"],
                "request": request,
                "cli_probability": cli_probability(case),
                # exact bytes the HTTP layer sends for this request
                "response_body": _encode(payload).decode("utf-8"),
            }
        )
    OUT.parent.mkdir(parents=True, exist_ok=True)
    OUT.write_text(json.dumps(fixtures, indent=1))
    print(f"wrote {OUT} ({len(fixtures)} cases)")


if __name__ == "__main__":
    main()
