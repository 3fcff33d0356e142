"""Closed-form model families used both as user-facing models and oracles.

Each family carries analytic decision rules or estimators that the generic
pipeline (finite models plus estimators) must reproduce, so they double as
independent checks of the numerical machinery: a two-class Bernoulli
classifier with known rates, a conjugate Gaussian linear regression, and a
Beta-Bernoulli class predictor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .discretize import ContinuousModel1D
from .errors import InvariantViolation, SingularDesign
from .estimators import EstimateResult
from .losses import LossSpec, RiskReport, prior_risk
from .model import FiniteModel


# -- two-class Bernoulli classification --------------------------------------


@dataclass(frozen=True)
class BinomialClassifier:
    """Single Bernoulli observation from one of two known success rates.

    The first class has success probability ``psi1`` and prior weight
    ``1 - epsilon``; the second has ``psi2`` and prior weight ``epsilon``.
    """

    psi1: float
    psi2: float
    epsilon: float

    def __post_init__(self):
        if not (0.0 < self.psi1 < 1.0 and 0.0 < self.psi2 < 1.0):
            raise InvariantViolation("success probabilities must lie in (0, 1)")
        if not 0.0 < self.epsilon < 1.0:
            raise InvariantViolation("epsilon must lie in (0, 1)")

    def to_finite_model(self) -> FiniteModel:
        """Equivalent two-point finite model over the sample space {0, 1}."""
        return FiniteModel(
            theta_labels=("psi1", "psi2"),
            prior=np.array([1.0 - self.epsilon, self.epsilon]),
            likelihood=np.array(
                [[1.0 - self.psi1, self.psi1], [1.0 - self.psi2, self.psi2]]
            ),
            psi_map=np.array([0, 1]),
            psi_labels=("psi1", "psi2"),
            psi_coords=np.array([self.psi1, self.psi2]),
            x_labels=("0", "1"),
        )


def classify(model: BinomialClassifier, x: int, method: str) -> EstimateResult:
    """Closed-form class decision for one observed Bernoulli outcome.

    The MAP rule compares posterior weights, the LRSE rule compares the
    success (or failure) rates directly; exact ties are surfaced, not
    broken silently.
    """
    if x not in (0, 1):
        raise InvariantViolation("observation must be 0 or 1")
    p1, p2 = (model.psi1, model.psi2) if x == 1 else (1 - model.psi1, 1 - model.psi2)
    if method == "map":
        s1, s2 = p1 * (1.0 - model.epsilon), p2 * model.epsilon
    elif method == "lrse":
        s1, s2 = p1, p2
    else:
        raise InvariantViolation(f"unknown method {method!r}")
    if s1 == s2:
        idx, ties, tie = 0, (0, 1), True
    elif s1 > s2:
        idx, ties, tie = 0, (0,), False
    else:
        idx, ties, tie = 1, (1,), False
    return EstimateResult(
        psi_index=idx,
        psi_label=("psi1", "psi2")[idx],
        criterion_value=float((s1, s2)[idx]),
        tie=tie,
        argmax_set=ties,
    )


def classifier_risks(
    model: BinomialClassifier, method: str, loss: LossSpec | None = None
) -> RiskReport:
    """Exact per-class misclassification probabilities of a decision method.

    The rule is tabulated from the closed-form decisions and evaluated by
    exact enumeration over the two-point sample space.  The default loss is
    the prior-based one, under which the prior risk equals the plain sum of
    the two conditional error probabilities.
    """
    rule = [classify(model, x, method).psi_index for x in (0, 1)]
    return prior_risk(loss or LossSpec.prior_based(), rule, model.to_finite_model())


# -- conjugate Gaussian linear regression ------------------------------------


@dataclass(frozen=True)
class GaussianRegression:
    """Linear model with known error variance and an isotropic normal prior.

    ``y = X beta + e`` with ``e ~ N(0, sigma2 I)`` and ``beta ~ N(0, tau2 I)``.
    The marginal parameter of interest is ``psi = w' beta`` at a predictor
    setting ``w``.
    """

    X: np.ndarray
    y: np.ndarray
    w: np.ndarray
    sigma2: float
    tau2: float

    def __post_init__(self):
        X = np.atleast_2d(np.asarray(self.X, dtype=float))
        y = np.asarray(self.y, dtype=float).reshape(-1)
        w = np.asarray(self.w, dtype=float).reshape(-1)
        if X.shape[0] != y.size or X.shape[1] != w.size:
            raise InvariantViolation("X, y, w dimensions are inconsistent")
        if not (self.sigma2 > 0 and self.tau2 > 0):
            raise InvariantViolation("variances must be positive")
        if np.linalg.matrix_rank(X) < X.shape[1]:
            raise SingularDesign("design matrix must have full column rank")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "w", w)


@dataclass(frozen=True)
class RegressionEstimates:
    mu_post_beta: np.ndarray
    sigma_post_beta: np.ndarray
    mle: np.ndarray
    psi_map: float
    psi_lrse: float
    psi_prior_var: float
    psi_post_var: float


def regression_estimates(model: GaussianRegression) -> RegressionEstimates:
    """Posterior moments of beta and the closed-form estimators of ``w' beta``.

    The MAP estimate of the linear functional is its posterior mean; the
    LRSE inflates it by ``1 / (1 - post_var / prior_var)``, which pushes it
    toward the plug-in estimate from the least-squares fit and reaches it
    exactly as the prior variance grows.
    """
    X, y, w = model.X, model.y, model.w
    xtx = X.T @ X
    precision = np.eye(X.shape[1]) / model.tau2 + xtx / model.sigma2
    sigma_post = np.linalg.inv(precision)
    mle = np.linalg.solve(xtx, X.T @ y)
    mu_post = sigma_post @ (xtx @ mle) / model.sigma2

    prior_var = model.tau2 * float(w @ w)
    post_var = float(w @ sigma_post @ w)
    if not post_var < prior_var:
        raise InvariantViolation("posterior variance must shrink below the prior variance")
    mu_psi = float(w @ mu_post)
    shrink = 1.0 - post_var / prior_var
    return RegressionEstimates(
        mu_post_beta=mu_post,
        sigma_post_beta=sigma_post,
        mle=mle,
        psi_map=mu_psi,
        psi_lrse=mu_psi / shrink,
        psi_prior_var=prior_var,
        psi_post_var=post_var,
    )


@dataclass(frozen=True)
class RegressionPrediction:
    z_map: float
    z_lrse: float
    z_prior_var: float
    z_post_var: float


def regression_predict(model: GaussianRegression) -> RegressionPrediction:
    """Closed-form predictors of a future response at the setting ``w``.

    The prediction target adds the observation noise to the linear
    functional, so its LRSE is the estimation LRSE scaled up by the ratio
    of prior variances; the identity is asserted on every call.
    """
    est = regression_estimates(model)
    prior_var = model.sigma2 + est.psi_prior_var
    post_var = model.sigma2 + est.psi_post_var
    mu = est.psi_map
    z_lrse = mu / (1.0 - post_var / prior_var)
    scale = 1.0 + model.sigma2 / (model.tau2 * float(model.w @ model.w))
    if est.psi_lrse != 0.0 and not math.isclose(
        z_lrse, scale * est.psi_lrse, rel_tol=1e-10
    ):
        raise InvariantViolation("prediction and estimation LRSEs violate the scale identity")
    return RegressionPrediction(
        z_map=mu, z_lrse=z_lrse, z_prior_var=prior_var, z_post_var=post_var
    )


# -- Beta-Bernoulli class prediction ------------------------------------------


def gaussian_likelihood_ratio(mu: float, x_next: float) -> float:
    """Density ratio of N(mu, 1) to N(0, 1) at the new observation."""
    return math.exp(mu * x_next - mu * mu / 2.0)


@dataclass(frozen=True)
class BetaBernoulliPredictor:
    """Predict the class of a new observation under an unknown mixing rate.

    The class rate has a Beta(alpha, beta) prior; ``n`` labelled training
    cases with class mean ``cbar`` were observed, and ``f_ratio`` is the
    evaluated density ratio of the new observation under class 1 versus
    class 0.
    """

    alpha: float
    beta: float
    n: int
    cbar: float
    f_ratio: float

    def __post_init__(self):
        if not (self.alpha > 0 and self.beta > 0):
            raise InvariantViolation("Beta parameters must be positive")
        if self.n < 0 or not 0.0 <= self.cbar <= 1.0:
            raise InvariantViolation("need n >= 0 and class mean in [0, 1]")
        if not self.f_ratio > 0:
            raise InvariantViolation("likelihood ratio must be positive")


def decision_statistic(method: str, alpha: float, beta: float, n: int, k):
    """Posterior-odds factor multiplying the likelihood ratio, vectorized in k.

    ``k`` is the number of class-1 training cases.  The decision is class 1
    when ``f_ratio * statistic >= 1``.  The LRSE statistic carries the extra
    ``beta / alpha`` factor that cancels the prior odds of the classes.
    """
    k = np.asarray(k, dtype=float)
    if method == "map":
        return (alpha + k) / (beta + n - k)
    if method == "lrse":
        # single fraction, so exact-threshold inputs stay exact
        return (beta * (alpha + k)) / (alpha * (beta + n - k))
    raise InvariantViolation(f"unknown method {method!r}")


def predicts_one(method: str, alpha: float, beta: float, n: int, k, f_ratio):
    """Vectorized class-1 decision; ties at the threshold go to class 1."""
    stat = decision_statistic(method, alpha, beta, n, k)
    return np.asarray(f_ratio) * stat >= 1.0


def predict_class(model: BetaBernoulliPredictor, method: str) -> int:
    """Closed-form class prediction (1 at the exact threshold)."""
    k = model.n * model.cbar
    return int(
        predicts_one(method, model.alpha, model.beta, model.n, k, model.f_ratio)
    )


def predictive_tables_for(model: BetaBernoulliPredictor):
    """Conjugate prior/posterior predictive tables for the class of interest.

    Gives the generic predictive pipeline the exact inputs implied by the
    Beta prior, so the argmax of the returned ratio must reproduce
    :func:`predict_class` away from exact ties.
    """
    from .model import PredictiveTables

    a, b = model.alpha, model.beta
    k = model.n * model.cbar
    prior_pred = np.array([b / (a + b), a / (a + b)])
    post_odds = model.f_ratio * (a + k) / (b + model.n - k)
    post_pred = np.array([1.0, post_odds])
    post_pred /= post_pred.sum()
    return PredictiveTables(
        y_labels=("0", "1"),
        prior_pred=prior_pred,
        post_pred=post_pred,
        rb_pred=post_pred / prior_pred,
    )


# -- conjugate normal testbed --------------------------------------------------


@dataclass(frozen=True)
class NormalNormalTestbed:
    """Scalar normal mean with a normal prior, truncated for grid work.

    Prior ``theta ~ N(0, tau^2)``, observation ``x ~ N(theta, sigma^2)``.
    The LRSE of the full parameter is the observation itself (the maximum
    likelihood value); the MAP is the shrunk posterior mean.
    """

    tau: float = 1.0
    sigma: float = 1.0
    half_width_sds: float = 8.0

    def __post_init__(self):
        if not (self.tau > 0 and self.sigma > 0 and self.half_width_sds >= 6):
            raise InvariantViolation("need positive scales and a wide enough interval")

    def continuous_model(self) -> ContinuousModel1D:
        tau, sigma = self.tau, self.sigma

        def prior_density(t):
            return np.exp(-0.5 * (np.asarray(t) / tau) ** 2) / (
                tau * math.sqrt(2 * math.pi)
            )

        def likelihood(t, x):
            return np.exp(-0.5 * ((x - np.asarray(t)) / sigma) ** 2) / (
                sigma * math.sqrt(2 * math.pi)
            )

        half = self.half_width_sds * tau
        return ContinuousModel1D(
            prior_density=prior_density, likelihood=likelihood, support=(-half, half)
        )

    def psi_lrse(self, x: float) -> float:
        return float(x)

    def psi_map(self, x: float) -> float:
        t2, s2 = self.tau**2, self.sigma**2
        return t2 * x / (t2 + s2)

    def posterior_moments(self, x: float) -> tuple[float, float]:
        t2, s2 = self.tau**2, self.sigma**2
        return t2 * x / (t2 + s2), t2 * s2 / (t2 + s2)
