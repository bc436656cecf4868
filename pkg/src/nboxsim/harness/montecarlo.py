"""Seeded Monte Carlo trajectories for a pre/post-selected ensemble.

Each trial draws three uniforms: one for the intermediate outcome, one for
the pointer branch inside a composite outcome (mixture semantics only), and
one for the post-selection test. Trial ``t`` takes its uniforms from block
``t`` of a Philox4x64 stream keyed by the seed, so a trial's randomness is a
function of ``(seed, t)`` alone and any split of the trials across workers
reproduces the same records.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from numpy.random import Philox

from ..errors import InsufficientDataError
from ..measurement import ZERO_PROB, Mode, branch_weights, born_term, lueders_update
from ..pps import PrePostEnsemble, postselect_probability

__all__ = [
    "TrialRecord",
    "EmpiricalDistribution",
    "SamplingPlan",
    "rng_stream",
    "trial_uniforms",
    "sample_trajectory",
    "run_trials",
    "estimate_conditional",
]

WORDS_PER_TRIAL = 4  # one Philox block


@dataclass(frozen=True)
class TrialRecord:
    trial_index: int
    outcome_label: str
    pointer_branch: int | None  # 1-based pointer basis index
    postselected: bool


def trial_uniforms(seed: int, start: int, count: int):
    """Uniforms in [0, 1) for trials ``start .. start+count-1``, shape ``(count, 4)``."""
    if not 0 <= seed < 2**64:
        raise ValueError(f"seed {seed} is not a 64-bit unsigned integer")
    if start < 0 or count < 0:
        raise ValueError("trial range must be non-negative")
    raw = Philox(key=seed, counter=start).random_raw(WORDS_PER_TRIAL * count)
    return (raw >> np.uint64(11)).astype(np.float64).reshape(count, WORDS_PER_TRIAL) * 2.0**-53


def rng_stream(seed: int, t: int):
    """The uniforms of trial ``t``."""
    return trial_uniforms(seed, t, 1)[0]


def _cdf(weights):
    # dividing by the last partial sum makes the final positive entry exactly 1.0
    c = np.cumsum(weights)
    return c / c[-1]


class SamplingPlan:
    """Precomputed inverse-CDF tables for one ensemble.

    Building the plan does all the linear algebra once; sampling then only
    needs table lookups, which keeps single-trial and batched sampling on the
    same arithmetic path.
    """

    def __init__(self, e: PrePostEnsemble):
        self.labels = e.measurement.labels
        mixture = e.semantics.mode is Mode.MIXTURE
        probs = np.array([born_term(e.initial, p) for p in e.measurement.projectors])
        self.outcome_cdf = _cdf(np.where(probs < ZERO_PROB, 0.0, probs))
        self.branch_cdfs, self.pointers, self.fidelities = [], [], []
        for p, prob in zip(e.measurement.projectors, probs):
            if prob < ZERO_PROB:
                cdf, ptr, fid = np.ones(1), np.array([-1]), np.zeros(1)
            elif mixture:
                subset, weights = branch_weights(e.initial, p, e.semantics.pointer_basis)
                basis = e.semantics.pointer_basis[:, subset]
                fid = np.abs(basis.conj().T @ e.final) ** 2
                cdf = _cdf(weights)
                ptr = subset + 1 if subset.size > 1 else np.array([-1])
            else:
                state, _ = lueders_update(e.initial, p)
                cdf, ptr = np.ones(1), np.array([-1])
                fid = np.array([postselect_probability(state, e.final)])
            self.branch_cdfs.append(cdf)
            self.pointers.append(ptr)
            self.fidelities.append(np.clip(fid, 0.0, 1.0))

    def sample(self, u):
        """Map an ``(m, 3+)`` block of uniforms to (outcome index, pointer, postselected) arrays."""
        u = np.atleast_2d(u)
        outcome = np.searchsorted(self.outcome_cdf, u[:, 0], side="right")
        outcome = np.minimum(outcome, len(self.labels) - 1)
        pointer = np.full(u.shape[0], -1, dtype=np.int64)
        fidelity = np.zeros(u.shape[0])
        for k in np.unique(outcome):
            rows = outcome == k
            cdf = self.branch_cdfs[k]
            branch = np.minimum(np.searchsorted(cdf, u[rows, 1], side="right"), cdf.size - 1)
            if self.pointers[k][0] != -1:
                pointer[rows] = self.pointers[k][branch]
            fidelity[rows] = self.fidelities[k][branch]
        return outcome, pointer, u[:, 2] < fidelity


def sample_trajectory(e, uniforms, trial_index: int = 0) -> TrialRecord:
    """Sample one trial from its uniforms (see :func:`rng_stream`).

    ``e`` may be a :class:`PrePostEnsemble` or a prebuilt :class:`SamplingPlan`.
    """
    plan = e if isinstance(e, SamplingPlan) else SamplingPlan(e)
    outcome, pointer, post = plan.sample(np.asarray(uniforms, dtype=np.float64)[None, :])
    return TrialRecord(
        trial_index,
        plan.labels[int(outcome[0])],
        None if pointer[0] < 0 else int(pointer[0]),
        bool(post[0]),
    )


def _chunk(plan, seed, start, stop):
    outcome, pointer, post = plan.sample(trial_uniforms(seed, start, stop - start))
    return [
        TrialRecord(start + t, plan.labels[k], None if b < 0 else int(b), bool(s))
        for t, (k, b, s) in enumerate(zip(outcome.tolist(), pointer.tolist(), post.tolist()))
    ]


def run_trials(e: PrePostEnsemble, trials: int, seed: int, workers: int = 1, chunk_size: int = 16384):
    """Sample ``trials`` independent trajectories; output does not depend on ``workers``."""
    if trials < 1:
        raise ValueError("trials must be positive")
    plan = SamplingPlan(e)
    bounds = [(a, min(a + chunk_size, trials)) for a in range(0, trials, chunk_size)]
    if workers <= 1:
        parts = [_chunk(plan, seed, a, b) for a, b in bounds]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda ab: _chunk(plan, seed, *ab), bounds))
    return [r for part in parts for r in part]


@dataclass(frozen=True)
class EmpiricalDistribution:
    labels: tuple[str, ...]
    probs: tuple[float, ...]
    stderrs: tuple[float, ...]
    postselected: int
    trials: int

    @property
    def postselection_rate(self) -> float:
        return self.postselected / self.trials

    @property
    def rate_stderr(self) -> float:
        r = self.postselection_rate
        return math.sqrt(r * (1.0 - r) / self.trials)

    def __getitem__(self, label):
        return self.probs[self.labels.index(label)]

    def stderr(self, label):
        return self.stderrs[self.labels.index(label)]


def estimate_conditional(records, labels=None) -> EmpiricalDistribution:
    """Frequencies among post-selected records, with binomial standard errors.

    ``labels`` fixes the row order (and includes never-seen outcomes); by
    default labels appear in order of first occurrence.
    """
    records = list(records)
    kept = [r.outcome_label for r in records if r.postselected]
    if not kept:
        raise InsufficientDataError("no post-selected trials")
    if labels is None:
        labels = tuple(dict.fromkeys(r.outcome_label for r in records))
    m = len(kept)
    counts = {label: 0 for label in labels}
    for label in kept:
        counts[label] = counts.get(label, 0) + 1
    labels = tuple(counts)
    probs = tuple(counts[label] / m for label in labels)
    stderrs = tuple(math.sqrt(p * (1.0 - p) / m) for p in probs)
    return EmpiricalDistribution(labels, probs, stderrs, m, len(records))
