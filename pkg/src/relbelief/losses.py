"""Prior-driven loss families and the posterior/prior risks they induce.

The loss of taking action ``psi`` when the true marginal value is
``Psi(theta)`` is always zero for the correct action.  For a wrong action the
family members differ in how the penalty depends on the prior:

* ``zero-one``      — constant penalty 1.
* ``prior-based``   — penalty ``1 / marg_prior[Psi(theta)]``, so errors on
  prior-unlikely values are punished hard.
* ``capped``        — ``1 / max(eta, marg_prior[Psi(theta)])``; bounds the
  prior-based penalty so it stays usable on countable supports.
* ``capped-grid``   — the capped loss for a bin-discretized problem; behaves
  like ``capped`` on the grid model and records the bin width.
* ``weighted``      — ``h[Psi(theta)]`` for a user-supplied nonnegative
  weight per marginal value.
* ``ball``          — indicator that ``Psi(theta)`` falls outside the closed
  ball of a given radius around the action; needs psi coordinates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    InfiniteSampleSpace,
    InvariantViolation,
    UnknownPsi,
)
from .model import BeliefTables, FiniteModel, belief_tables

ZERO_ONE = "zero-one"
PRIOR_BASED = "prior-based"
CAPPED = "capped"
CAPPED_GRID = "capped-grid"
WEIGHTED = "weighted"
BALL = "ball"

_KINDS = (ZERO_ONE, PRIOR_BASED, CAPPED, CAPPED_GRID, WEIGHTED, BALL)

IDENTITY_TOL = 1e-10


@dataclass(frozen=True)
class LossSpec:
    """Tagged description of one member of the loss family."""

    kind: str
    eta: float | None = None
    radius: float | None = None
    weights: np.ndarray | None = None
    bin_width: float | None = None

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise InvariantViolation(f"unknown loss kind {self.kind!r}")
        if self.kind in (CAPPED, CAPPED_GRID):
            if self.eta is None or not self.eta > 0:
                raise InvariantViolation("capped losses need eta > 0")
        if self.kind == CAPPED_GRID:
            if self.bin_width is None or not self.bin_width > 0:
                raise InvariantViolation("grid losses need a positive bin width")
        if self.kind == BALL:
            if self.radius is None or not self.radius > 0:
                raise InvariantViolation("ball losses need a positive radius")
        if self.kind == WEIGHTED:
            if self.weights is None:
                raise InvariantViolation("weighted losses need a weight vector")
            w = np.asarray(self.weights, dtype=float)
            if w.ndim != 1 or w.size == 0 or np.any(w < 0) or not np.all(np.isfinite(w)):
                raise InvariantViolation("weights must be finite and nonnegative")
            w = w.copy()
            w.setflags(write=False)
            object.__setattr__(self, "weights", w)

    # Convenience constructors keep call sites readable.
    @classmethod
    def zero_one(cls) -> "LossSpec":
        return cls(ZERO_ONE)

    @classmethod
    def prior_based(cls) -> "LossSpec":
        return cls(PRIOR_BASED)

    @classmethod
    def capped(cls, eta: float) -> "LossSpec":
        return cls(CAPPED, eta=float(eta))

    @classmethod
    def capped_grid(cls, eta: float, bin_width: float) -> "LossSpec":
        return cls(CAPPED_GRID, eta=float(eta), bin_width=float(bin_width))

    @classmethod
    def weighted(cls, weights) -> "LossSpec":
        return cls(WEIGHTED, weights=np.asarray(weights, dtype=float))

    @classmethod
    def ball(cls, radius: float) -> "LossSpec":
        return cls(BALL, radius=float(radius))

    def describe(self) -> str:
        if self.kind == CAPPED:
            return f"capped:{self.eta:g}"
        if self.kind == CAPPED_GRID:
            return f"capped-grid:{self.eta:g}@{self.bin_width:g}"
        if self.kind == BALL:
            return f"ball:{self.radius:g}"
        return self.kind


def parse_loss(text: str, base_dir: str | Path | None = None) -> LossSpec:
    """Parse the command-line loss syntax.

    Accepted forms: ``zero-one``, ``prior-based``, ``capped:ETA``,
    ``ball:RADIUS``, ``weighted:FILE`` where FILE holds one weight per line.
    """
    text = text.strip()
    if text == ZERO_ONE:
        return LossSpec.zero_one()
    if text == PRIOR_BASED:
        return LossSpec.prior_based()
    if text.startswith("capped:"):
        return LossSpec.capped(float(text.split(":", 1)[1]))
    if text.startswith("ball:"):
        return LossSpec.ball(float(text.split(":", 1)[1]))
    if text.startswith("weighted:"):
        path = Path(text.split(":", 1)[1])
        if base_dir is not None and not path.is_absolute():
            path = Path(base_dir) / path
        return LossSpec.weighted(np.loadtxt(path, ndmin=1))
    raise InvariantViolation(f"cannot parse loss spec {text!r}")


@dataclass(frozen=True)
class RiskReport:
    """Conditional error probabilities of a decision rule and their aggregates.

    ``per_class_error[j]`` is the probability of deciding wrongly when the
    j-th marginal value is true, computed under the fiber-averaged sampling
    distribution of the data.  ``unweighted_sum`` adds these equally;
    ``prior_weighted_sum`` weighs them by the marginal prior and equals the
    prior probability of an error.  ``prior_risk`` is the expected loss of
    the rule under the given loss spec.
    """

    per_class_error: np.ndarray
    unweighted_sum: float
    prior_weighted_sum: float
    prior_risk: float
    std_err: np.ndarray | None = None

    def __post_init__(self):
        errs = np.asarray(self.per_class_error, dtype=float)
        if np.any(errs < -1e-12) or np.any(errs > 1.0 + 1e-12):
            raise InvariantViolation("per-class errors must lie in [0, 1]")
        if self.prior_weighted_sum > self.unweighted_sum + 1e-12:
            raise InvariantViolation("prior-weighted error cannot exceed the plain sum")
        errs = errs.copy()
        errs.setflags(write=False)
        object.__setattr__(self, "per_class_error", errs)


# -- pointwise loss values -------------------------------------------------


def loss_value(loss: LossSpec, theta_index: int, psi_index: int, model: FiniteModel) -> float:
    """Evaluate the indicator-form loss for one (theta, action) pair."""
    if not 0 <= psi_index < model.n_psi:
        raise UnknownPsi(f"psi index {psi_index} out of range")
    if not 0 <= theta_index < model.n_theta:
        raise InvariantViolation(f"theta index {theta_index} out of range")
    true_psi = int(model.psi_map[theta_index])
    if loss.kind == BALL:
        coords = model.psi_coords
        if coords is None:
            raise InvariantViolation("ball loss needs psi coordinates")
        dist = float(np.linalg.norm(np.atleast_1d(coords[true_psi] - coords[psi_index])))
        return 0.0 if dist <= loss.radius else 1.0
    if true_psi == psi_index:
        return 0.0
    if loss.kind == ZERO_ONE:
        return 1.0
    marg_prior = model.marginal_prior()
    if loss.kind == PRIOR_BASED:
        return 1.0 / float(marg_prior[true_psi])
    if loss.kind in (CAPPED, CAPPED_GRID):
        return 1.0 / max(loss.eta, float(marg_prior[true_psi]))
    if loss.kind == WEIGHTED:
        if loss.weights.size != model.n_psi:
            raise InvariantViolation("weight vector length does not match psi support")
        return float(loss.weights[true_psi])
    raise InvariantViolation(f"unhandled loss kind {loss.kind!r}")


def h_vector(loss: LossSpec, marg_prior: np.ndarray) -> np.ndarray:
    """Weight-per-true-value form of an indicator loss.

    Every kind except ``ball`` can be written as
    ``I(true != action) * h(true)``; this returns the vector ``h``.
    """
    if loss.kind == ZERO_ONE:
        return np.ones_like(marg_prior)
    if loss.kind == PRIOR_BASED:
        return 1.0 / marg_prior
    if loss.kind in (CAPPED, CAPPED_GRID):
        return 1.0 / np.maximum(loss.eta, marg_prior)
    if loss.kind == WEIGHTED:
        if loss.weights.size != marg_prior.size:
            raise InvariantViolation("weight vector length does not match psi support")
        return np.asarray(loss.weights, dtype=float)
    raise InvariantViolation(f"{loss.kind} loss has no weight-per-true-value form")


# -- posterior risk --------------------------------------------------------


def posterior_risk_vector(loss: LossSpec, tables: BeliefTables) -> np.ndarray:
    """Posterior risk of every candidate action at once."""
    post = tables.marg_post
    if loss.kind == ZERO_ONE:
        return 1.0 - post
    if loss.kind == PRIOR_BASED:
        return float(np.sum(tables.rb)) - tables.rb
    if loss.kind in (CAPPED, CAPPED_GRID):
        capped = post / np.maximum(loss.eta, tables.marg_prior)
        return float(np.sum(capped)) - capped
    if loss.kind == WEIGHTED:
        weighted = h_vector(loss, tables.marg_prior) * post
        return float(np.sum(weighted)) - weighted
    if loss.kind == BALL:
        coords = tables.psi_coords
        if coords is None:
            raise InvariantViolation("ball loss needs psi coordinates on the tables")
        pts = np.atleast_2d(coords.astype(float))
        if pts.shape[0] != tables.n_psi:
            pts = pts.T
        diff = pts[:, None, :] - pts[None, :, :]
        inside = np.linalg.norm(diff, axis=-1) <= loss.radius
        return 1.0 - inside @ post
    raise InvariantViolation(f"unhandled loss kind {loss.kind!r}")


def posterior_risk(loss: LossSpec, candidate: int, tables: BeliefTables) -> float:
    """Expected loss of acting with ``candidate`` under the posterior."""
    if not 0 <= candidate < tables.n_psi:
        raise UnknownPsi(f"psi index {candidate} out of range")
    return float(posterior_risk_vector(loss, tables)[candidate])


# -- prior risk over the whole sample space --------------------------------


def _require_stochastic_rows(model: FiniteModel) -> np.ndarray:
    if not model.is_table:
        raise InfiniteSampleSpace("prior risk needs an enumerable sample space")
    lik = model.likelihood
    row_sums = lik.sum(axis=1)
    if np.max(np.abs(row_sums - 1.0)) > 1e-9:
        raise InvariantViolation(
            "prior risk needs row-stochastic likelihoods (each theta a distribution over x)"
        )
    return lik


def _check_rule(rule, model: FiniteModel) -> np.ndarray:
    arr = np.asarray(rule, dtype=np.intp)
    if arr.shape != (model.n_x,):
        raise InvariantViolation("decision rule must assign one psi per sample point")
    if arr.min() < 0 or arr.max() >= model.n_psi:
        raise UnknownPsi("decision rule points outside the psi support")
    return arr


def conditional_sampling_table(model: FiniteModel) -> np.ndarray:
    """Fiber-averaged sampling distribution ``M[j, x]`` for each psi value.

    Row ``j`` is the distribution of the data when the j-th marginal value
    is true, averaging the per-theta sampling distributions under the prior
    conditioned on the fiber.
    """
    lik = _require_stochastic_rows(model)
    marg_prior = model.marginal_prior()
    out = np.zeros((model.n_psi, model.n_x))
    for j in range(model.n_psi):
        fiber = model.fiber(j)
        cond = model.prior[fiber] / marg_prior[j]
        out[j] = cond @ lik[fiber]
    return out


def prior_risk(loss: LossSpec, rule, model: FiniteModel) -> RiskReport:
    """Exact prior risk of a decision rule, with per-class error probabilities.

    Summation uses :func:`math.fsum` so results are invariant to how the
    sample space might be chunked across workers.

    Raises
    ------
    InfiniteSampleSpace
        If the model carries a density callback instead of a table.
    """
    rule_arr = _check_rule(rule, model)
    sampling = conditional_sampling_table(model)
    marg_prior = model.marginal_prior()

    wrong = rule_arr[None, :] != np.arange(model.n_psi)[:, None]
    per_class = np.array(
        [math.fsum(sampling[j, wrong[j]]) for j in range(model.n_psi)]
    )
    unweighted = math.fsum(per_class)
    weighted = math.fsum(per_class * marg_prior)

    lik = model.likelihood
    contributions = []
    for i in range(model.n_theta):
        for x in range(model.n_x):
            lval = loss_value(loss, i, int(rule_arr[x]), model)
            if lval:
                contributions.append(model.prior[i] * lik[i, x] * lval)
    risk = math.fsum(contributions)

    if loss.kind == PRIOR_BASED:
        if abs(risk - unweighted) > IDENTITY_TOL:
            raise InvariantViolation(
                "prior risk must equal the sum of conditional error probabilities"
            )
        rb_terms = []
        for x in range(model.n_x):
            tab = belief_tables(model, x)
            rb_terms.append(tab.evidence * tab.rb[rule_arr[x]])
        alt = model.n_psi - math.fsum(rb_terms)
        if abs(risk - alt) > IDENTITY_TOL:
            raise InvariantViolation(
                "prior risk must equal n_psi minus the expected chosen ratio"
            )
    elif loss.kind == ZERO_ONE and abs(risk - weighted) > IDENTITY_TOL:
        raise InvariantViolation(
            "zero-one prior risk must equal the prior-weighted error probability"
        )

    return RiskReport(
        per_class_error=per_class,
        unweighted_sum=unweighted,
        prior_weighted_sum=weighted,
        prior_risk=risk,
    )
