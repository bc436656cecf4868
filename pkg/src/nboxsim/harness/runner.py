"""Turn a validated experiment into a :class:`Report`."""
from __future__ import annotations

import numpy as np

from ..errors import NBoxError, QueryError
from ..measurement import DensityMatrix, ZERO_PROB, born_distribution, born_term, lueders_update, mixture_update, Mode
from ..nbox import guessing_game, refinement_report
from ..pps import conditional_distribution, joint_probabilities, postselect_probability, raw_eq9_sum
from .experiment import ExperimentSpec, Query, build_ensemble
from .montecarlo import estimate_conditional, run_trials
from .report import Report, Row, Table

__all__ = ["run_experiment", "table_name"]


def table_name(q: Query) -> str:
    if not q.params:
        return q.name
    return q.name + "[" + ",".join(f"{k}={v}" for k, v in q.params) + "]"


def _rows(pairs):
    return tuple(Row(label, float(v)) for label, v in pairs)


def _conditional(e, q):
    d = conditional_distribution(e)
    return _rows(zip(d.labels, d.conditional_probs))


def _unconditional(e, q):
    d = born_distribution(e.initial, e.measurement)
    return _rows(zip(d.labels, d.probs))


def _joint(e, q):
    joints = joint_probabilities(e)
    return _rows([*zip(e.labels, joints), ("postselection_rate", sum(joints))])


def _residual_state(e, q):
    out = []
    for label, p in zip(e.labels, e.measurement.projectors):
        if born_term(e.initial, p) < ZERO_PROB:
            continue
        if e.semantics.mode is Mode.PURE:
            state, _ = lueders_update(e.initial, p)
            populations = np.abs(state) ** 2
        else:
            state, _ = mixture_update(e.initial, p, e.semantics.pointer_basis)
            populations = np.real(np.diag(state.matrix))
        out += [(f"{label}|{j}", w) for j, w in enumerate(populations, start=1)]
        out.append((f"{label}|final", postselect_probability(state, e.final)))
    return _rows(out)


def _refinement(spec, q):
    r = refinement_report(spec.scenario, q.get("i"))
    return _rows(
        [
            ("all_boxes_refines_open_box", r.all_boxes_refines_open_box),
            ("indistinguishable_refines_open_box", r.indistinguishable_refines_open_box),
            ("all_boxes_compatible_with_indistinguishable", r.all_boxes_compatible_with_indistinguishable),
            ("max_cross_commutator", r.max_cross_commutator),
            ("open_box_pairs_compatible", r.open_box_pairs_compatible),
        ]
    )


def _guess(spec, q):
    g = guessing_game(spec.scenario, q.get("opened"), q.get("guess"), spec.semantics)
    return _rows([("record_in_opened", g.record_in_opened_prob), ("guess_correct", g.guess_correct_prob)])


def _raw_eq9(e, q):
    i = q.get("i")
    rows = [("raw_eq9", raw_eq9_sum(e.final, i))]
    weights = np.abs(e.initial) ** 2
    weights[i - 1] = 0.0
    if weights.sum() >= ZERO_PROB:
        rho = DensityMatrix(np.diag(weights / weights.sum()).astype(np.complex128))
        rows.append(("mixture_weighted", postselect_probability(rho, e.final)))
    return _rows(rows)


_ENSEMBLE_QUERIES = {
    "conditional": _conditional,
    "unconditional": _unconditional,
    "joint": _joint,
    "residual_state": _residual_state,
    "raw_eq9": _raw_eq9,
}
_SCENARIO_QUERIES = {"refinement_report": _refinement, "guessing_game": _guess}


def _empirical(e, spec, workers):
    mc = spec.montecarlo
    records = run_trials(e, mc.trials, mc.seed, workers=workers)
    try:
        est = estimate_conditional(records, labels=e.labels)
    except NBoxError as exc:
        raise QueryError("montecarlo", exc) from exc
    conditional = Table(
        "conditional", tuple(Row(label, p, s) for label, p, s in zip(est.labels, est.probs, est.stderrs))
    )
    rate = Table("postselection", (Row("rate", est.postselection_rate, est.rate_stderr),))
    return (conditional, rate)


def run_experiment(spec: ExperimentSpec, workers: int = 1) -> Report:
    """Answer every query exactly and, if requested, add the Monte Carlo section.

    ``workers`` only parallelizes trial sampling; it never changes the report.
    """
    e = build_ensemble(spec)
    tables = []
    for q in spec.queries:
        try:
            if q.name in _SCENARIO_QUERIES:
                rows = _SCENARIO_QUERIES[q.name](spec, q)
            else:
                rows = _ENSEMBLE_QUERIES[q.name](e, q)
        except NBoxError as exc:
            raise QueryError(table_name(q), exc) from exc
        tables.append(Table(table_name(q), rows))
    empirical = ()
    seed = trials = None
    if spec.montecarlo is not None:
        empirical = _empirical(e, spec, workers)
        seed, trials = spec.montecarlo.seed, spec.montecarlo.trials
    return Report(spec.to_dict(), tuple(tables), empirical, seed=seed, trials=trials)
