"""Point estimators: LRSE, MAP, Bayes rules, and unbiasedness diagnostics.

The least relative surprise estimator (LRSE) maximizes the relative belief
ratio; the MAP estimator maximizes the marginal posterior.  A Bayes rule
under a given loss minimizes posterior risk by exhaustive search over the
marginal support.  Ties are never resolved silently: results carry the whole
argmax set and a flag, because the optimality statements for these
estimators assume a unique maximizer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from collections.abc import Callable

import numpy as np

from .errors import InvariantViolation
from .losses import LossSpec, h_vector, posterior_risk_vector
from .model import BeliefTables, FiniteModel, PredictiveTables, belief_tables

TIE_RTOL = 1e-12


def tied_argmax(values: np.ndarray) -> tuple[int, tuple[int, ...], bool]:
    """Index of the maximum plus the set of ties within tolerance.

    The tolerance is relative to the spread of the values, so criteria that
    differ only by an additive constant (ratios versus negated risks) give
    the same tie classes.
    """
    vals = np.asarray(values, dtype=float)
    best = float(vals.max())
    tol = TIE_RTOL * float(vals.max() - vals.min())
    ties = tuple(int(i) for i in np.flatnonzero(vals >= best - tol))
    return ties[0], ties, len(ties) > 1


@dataclass(frozen=True)
class EstimateResult:
    """A chosen marginal value with its criterion value and tie diagnostics."""

    psi_index: int
    psi_label: str
    criterion_value: float
    tie: bool
    argmax_set: tuple[int, ...]
    tail_bound: float | None = None

    def __post_init__(self):
        if self.psi_index not in self.argmax_set:
            raise InvariantViolation("chosen index must belong to the argmax set")


def _from_tables(tables: BeliefTables, values: np.ndarray) -> EstimateResult:
    idx, ties, tie = tied_argmax(values)
    return EstimateResult(
        psi_index=idx,
        psi_label=tables.psi_labels[idx],
        criterion_value=float(values[idx]),
        tie=tie,
        argmax_set=ties,
        tail_bound=tables.tail_bound,
    )


def lrse(tables: BeliefTables) -> EstimateResult:
    """Least relative surprise estimator: argmax of the relative belief ratio."""
    return _from_tables(tables, tables.rb)


def map_estimate(tables: BeliefTables) -> EstimateResult:
    """MAP estimator: argmax of the marginal posterior."""
    return _from_tables(tables, tables.marg_post)


def bayes_rule(loss: LossSpec, tables: BeliefTables) -> EstimateResult:
    """Exhaustive posterior-risk minimizer over the marginal support.

    The criterion value reported is the negative posterior risk, so larger
    is better, matching the other estimators.
    """
    risks = posterior_risk_vector(loss, tables)
    return _from_tables(tables, -risks)


def predict_lrse(pred: PredictiveTables) -> EstimateResult:
    """Future value maximizing the predictive belief ratio."""
    idx, ties, tie = tied_argmax(pred.rb_pred)
    return EstimateResult(
        psi_index=idx,
        psi_label=pred.y_labels[idx],
        criterion_value=float(pred.rb_pred[idx]),
        tie=tie,
        argmax_set=ties,
    )


# -- decision rules over a finite sample space -----------------------------


def rule_from_estimator(
    model: FiniteModel, chooser: Callable[[BeliefTables], EstimateResult]
) -> np.ndarray:
    """Tabulate an estimator into a decision rule over the sample space."""
    return np.array(
        [chooser(belief_tables(model, x)).psi_index for x in range(model.n_x)],
        dtype=np.intp,
    )


def lrse_rule(model: FiniteModel) -> np.ndarray:
    return rule_from_estimator(model, lrse)


def map_rule(model: FiniteModel) -> np.ndarray:
    return rule_from_estimator(model, map_estimate)


def anti_lrse_rule(model: FiniteModel) -> np.ndarray:
    """Rule picking the psi whose belief dropped the most at each x.

    Serves as the negative control for the unbiasedness diagnostics: it
    deliberately chooses a value the data argues against.
    """
    return np.array(
        [int(np.argmin(belief_tables(model, x).rb)) for x in range(model.n_x)],
        dtype=np.intp,
    )


# -- Bayesian unbiasedness --------------------------------------------------


def unbiasedness_gap(loss: LossSpec, rule, model: FiniteModel) -> float:
    """Margin by which a rule is Bayesian unbiased under an indicator loss.

    Returns the exact enumeration of

    ``sum_x m(x) * h(rule(x)) * (marg_post_x[rule(x)] - marg_prior[rule(x)])``

    where ``h`` is the weight-per-true-value form of the loss.  The rule is
    Bayesian unbiased under the loss if and only if the value is >= 0: a
    nonnegative gap means the rule's prior risk does not exceed its expected
    loss against an independently prior-drawn false value.
    """
    rule_arr = np.asarray(rule, dtype=np.intp)
    if rule_arr.shape != (model.n_x,):
        raise InvariantViolation("decision rule must assign one psi per sample point")
    marg_prior = model.marginal_prior()
    h = h_vector(loss, marg_prior)
    terms = []
    for x in range(model.n_x):
        tab = belief_tables(model, x)
        j = int(rule_arr[x])
        terms.append(tab.evidence * h[j] * (tab.marg_post[j] - marg_prior[j]))
    return math.fsum(terms)


def uniform_unbiasedness_check(rule, model: FiniteModel) -> np.ndarray:
    """Per-observation check that the chosen value gained belief.

    Entry ``x`` is true when ``marg_post_x[rule(x)] >= marg_prior[rule(x)]``
    (up to a 1e-12 relative tolerance).  A rule passing at every x is
    uniformly Bayesian unbiased; the LRSE rule always passes because the
    maximal relative belief ratio is at least one.
    """
    rule_arr = np.asarray(rule, dtype=np.intp)
    if rule_arr.shape != (model.n_x,):
        raise InvariantViolation("decision rule must assign one psi per sample point")
    marg_prior = model.marginal_prior()
    out = np.zeros(model.n_x, dtype=bool)
    for x in range(model.n_x):
        tab = belief_tables(model, x)
        j = int(rule_arr[x])
        out[x] = tab.marg_post[j] >= marg_prior[j] * (1.0 - 1e-12)
    return out
