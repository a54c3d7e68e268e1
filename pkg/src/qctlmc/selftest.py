"""Built-in differential test: every strategy against the direct semantics."""

from __future__ import annotations

import random
from typing import TextIO

from .formula import to_text
from .oracle import model_check
from .qbf import check_validity
from .randgen import random_job
from .reduce import STRATEGIES, ReductionJob, reduce


def run_selftest(jobs: int = 40, seed: int = 0, out: TextIO | None = None) -> bool:
    rng = random.Random(seed)
    failures = 0
    runs = 0
    for i in range(jobs):
        job = random_job(rng, prenex=True)
        want = model_check(job.structure, job.initial, job.formula)
        for s in STRATEGIES:
            got = check_validity(reduce(ReductionJob(job.structure, job.initial, job.formula, s)))
            runs += 1
            if got != want:
                failures += 1
                if out:
                    print(f"MISMATCH job {i} strategy {s}: {to_text(job.formula)} at {job.initial}", file=out)
    if out:
        print(f"{runs} runs, {failures} disagreements with the oracle", file=out)
    return failures == 0
