"""Credible regions ranked by posterior density, belief ratio, or risk.

Three families share one construction: rank the marginal support by a
criterion, accumulate posterior mass down the ranking until the requested
credibility is reached, and include every value tied with the boundary.
Including boundary ties can push the attained mass above the request, so the
sweep and brute-force checks restrict themselves to "attainable" credibility
levels, where the attained mass equals the request exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvariantViolation, TooLargeForBruteForce, UnknownPsi
from .losses import CAPPED, LossSpec, posterior_risk_vector
from .model import BeliefTables

TIE_RTOL = 1e-12
GAMMA_TOL = 1e-12


@dataclass(frozen=True)
class CredibleRegion:
    """A credibility region over the marginal support.

    ``members`` is the index set, ``threshold`` the criterion cutoff that was
    actually attained, and ``attained_mass`` the posterior mass of the
    members, which is at least the requested ``gamma``.
    """

    gamma: float
    members: tuple[int, ...]
    threshold: float
    attained_mass: float

    def __post_init__(self):
        object.__setattr__(self, "members", tuple(sorted(self.members)))
        if not -GAMMA_TOL <= self.gamma <= 1.0 + GAMMA_TOL:
            raise InvariantViolation("gamma must lie in [0, 1]")
        if self.attained_mass < self.gamma - 1e-12:
            raise InvariantViolation("attained mass fell below the requested credibility")


def _spread_tol(values: np.ndarray) -> float:
    # Tie detection must be invariant to shifting the criterion by a
    # constant (posterior risks are a large constant minus the ratio), so
    # the tolerance is taken relative to the spread of the values.
    return TIE_RTOL * float(values.max() - values.min())


def _ranked_region(values: np.ndarray, masses: np.ndarray, gamma: float) -> CredibleRegion:
    """Super-level region of ``values`` holding posterior mass >= gamma."""
    if not -GAMMA_TOL <= gamma <= 1.0 + GAMMA_TOL:
        raise InvariantViolation("gamma must lie in [0, 1]")
    order = np.argsort(-values, kind="stable")
    if gamma >= 1.0 - GAMMA_TOL:
        # Full credibility is the whole support; the cumulative-mass search
        # below could drop members whose posterior mass rounds away.
        hit = values.size - 1
    else:
        # First ranking position at which the accumulated mass reaches gamma.
        cum = np.cumsum(masses[order])
        hit = int(np.searchsorted(cum, gamma - GAMMA_TOL, side="left"))
        hit = min(hit, values.size - 1)
    threshold = float(values[order[hit]])
    keep = values >= threshold - _spread_tol(values)
    members = tuple(int(i) for i in np.flatnonzero(keep))
    attained = math.fsum(masses[list(members)])
    return CredibleRegion(
        gamma=float(gamma), members=members, threshold=threshold, attained_mass=attained
    )


def hpd_region(tables: BeliefTables, gamma: float) -> CredibleRegion:
    """Highest-posterior-density region: super-level set of the posterior.

    As gamma drops to zero the region shrinks to the posterior mode set.
    """
    return _ranked_region(tables.marg_post, tables.marg_post, gamma)


def rs_region(tables: BeliefTables, gamma: float) -> CredibleRegion:
    """Relative-surprise region: super-level set of the belief ratio."""
    return _ranked_region(tables.rb, tables.marg_post, gamma)


def lpl_region(loss: LossSpec, tables: BeliefTables, gamma: float) -> CredibleRegion:
    """Lowest-posterior-loss region: sub-level set of posterior risk.

    The stored threshold is the risk cutoff (smaller is better inside the
    region).
    """
    risks = posterior_risk_vector(loss, tables)
    region = _ranked_region(-risks, tables.marg_post, gamma)
    return CredibleRegion(
        gamma=region.gamma,
        members=region.members,
        threshold=-region.threshold,
        attained_mass=region.attained_mass,
    )


def tail_probability(tables: BeliefTables, psi0: int) -> float:
    """Posterior mass of values no less surprising than ``psi0``.

    Computes the posterior probability that the relative belief ratio is at
    most the ratio at ``psi0``, ties included.  The LRSE attains 1.
    """
    if not 0 <= psi0 < tables.n_psi:
        raise UnknownPsi(f"psi index {psi0} out of range")
    cutoff = float(tables.rb[psi0])
    keep = tables.rb <= cutoff + _spread_tol(tables.rb)
    return math.fsum(tables.marg_post[keep])


def attainable_gammas(tables: BeliefTables, family: str = "rs") -> np.ndarray:
    """Credibility levels attained exactly by a region family.

    These are the cumulative posterior masses at the boundaries of the
    ranking's tie classes; at any of them the constructed region holds
    exactly that much posterior mass.
    """
    if family == "rs":
        values = tables.rb
    elif family == "hpd":
        values = tables.marg_post
    else:
        raise InvariantViolation(f"unknown region family {family!r}")
    order = np.argsort(-values, kind="stable")
    cum = np.cumsum(tables.marg_post[order])
    ranked = values[order]
    tol = _spread_tol(values)
    out = []
    for pos in range(ranked.size):
        last_of_class = pos == ranked.size - 1 or ranked[pos + 1] < ranked[pos] - tol
        if last_of_class:
            out.append(float(cum[pos]))
    return np.array(out)


def region_distance(a: CredibleRegion, b: CredibleRegion, tables: BeliefTables) -> float:
    """Posterior mass of the symmetric difference of two member sets."""
    for region in (a, b):
        if region.members and max(region.members) >= tables.n_psi:
            raise InvariantViolation("region members do not fit the tables' support")
    sym = set(a.members) ^ set(b.members)
    if not sym:
        return 0.0
    return math.fsum(tables.marg_post[sorted(sym)])


# -- sweep of the capped loss toward the belief-ratio region ----------------


@dataclass(frozen=True)
class EtaSweepRow:
    eta: float
    region: CredibleRegion
    contains_rs: bool
    within_next: bool
    equals_rs: bool


@dataclass(frozen=True)
class EtaSweepReport:
    """Inclusion report for capped-loss regions along a shrinking eta grid.

    ``rs`` is the belief-ratio region at the requested gamma and
    ``next_region`` the one at the next exactly-attainable credibility above
    it (full support when none exists).  The final row, at the smallest eta,
    is the finite proxy for the limit: once eta falls below the smallest
    marginal prior weight the cap is inactive and the capped region equals
    the belief-ratio region outright.
    """

    gamma: float
    rs: CredibleRegion
    next_gamma: float
    next_region: CredibleRegion
    rows: tuple[EtaSweepRow, ...] = field(default_factory=tuple)

    @property
    def final_contains_rs(self) -> bool:
        return self.rows[-1].contains_rs

    @property
    def final_within_next(self) -> bool:
        return self.rows[-1].within_next

    @property
    def final_equals_rs(self) -> bool:
        return self.rows[-1].equals_rs


def _check_schedule(values, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise InvariantViolation(f"{name} schedule must be a nonempty sequence")
    if np.any(arr <= 0):
        raise InvariantViolation(f"{name} schedule must be strictly positive")
    if arr.size > 1 and np.any(np.diff(arr) >= 0):
        raise InvariantViolation(f"{name} schedule must be strictly decreasing")
    return arr


def eta_sweep(tables: BeliefTables, gamma: float, etas) -> EtaSweepReport:
    """Capped-loss regions for a decreasing eta schedule, with inclusions.

    For each eta the region is the lowest-posterior-loss region under the
    capped prior-based loss.  Each row reports whether it contains the
    belief-ratio region at ``gamma`` and whether it stays inside the
    belief-ratio region at the next exactly-attainable credibility.
    """
    etas = _check_schedule(etas, "eta")
    rs = rs_region(tables, gamma)
    levels = attainable_gammas(tables, "rs")
    above = levels[levels > gamma + GAMMA_TOL]
    next_gamma = float(above[0]) if above.size else 1.0
    next_region = rs_region(tables, next_gamma)
    rs_set = set(rs.members)
    next_set = set(next_region.members)

    rows = []
    for eta in etas:
        region = lpl_region(LossSpec(CAPPED, eta=float(eta)), tables, gamma)
        got = set(region.members)
        rows.append(
            EtaSweepRow(
                eta=float(eta),
                region=region,
                contains_rs=rs_set <= got,
                within_next=got <= next_set,
                equals_rs=got == rs_set,
            )
        )
    return EtaSweepReport(
        gamma=float(gamma),
        rs=rs,
        next_gamma=next_gamma,
        next_region=next_region,
        rows=tuple(rows),
    )


# -- brute-force optimality over all subsets --------------------------------


def minimal_prior_size_check(
    tables: BeliefTables, gamma: float, *, max_support: int = 20
) -> bool:
    """Exhaustively verify the prior-size optimality of the belief-ratio region.

    At a credibility attained exactly, the belief-ratio region must have the
    smallest prior mass among all subsets holding at least ``gamma`` of the
    posterior, and the largest posterior-to-prior mass ratio among subsets
    of the same prior mass.  Checked against every subset of the support.

    Raises
    ------
    TooLargeForBruteForce
        If the support exceeds ``max_support`` points.
    InvariantViolation
        If ``gamma`` is not attained exactly (pick one from
        :func:`attainable_gammas`).
    """
    n = tables.n_psi
    if n > max_support:
        raise TooLargeForBruteForce(f"support of {n} exceeds limit {max_support}")
    region = rs_region(tables, gamma)
    if abs(region.attained_mass - gamma) > 1e-9:
        raise InvariantViolation(
            "prior-size optimality is only defined at exactly attained credibilities"
        )

    masks = (np.arange(1 << n)[:, None] >> np.arange(n)[None, :]) & 1
    masks = masks.astype(float)
    post_mass = masks @ tables.marg_post
    prior_mass = masks @ tables.marg_prior

    member_vec = np.zeros(n)
    member_vec[list(region.members)] = 1.0
    region_prior = float(member_vec @ tables.marg_prior)
    region_post = float(member_vec @ tables.marg_post)

    eligible = post_mass >= gamma - 1e-9
    best_prior = float(prior_mass[eligible].min())
    if region_prior > best_prior + 1e-9:
        return False

    same_prior = np.abs(prior_mass - region_prior) <= 1e-9
    nonzero = prior_mass[same_prior] > 0
    ratios = post_mass[same_prior][nonzero] / prior_mass[same_prior][nonzero]
    if ratios.size and region_post / region_prior < float(ratios.max()) - 1e-9:
        return False
    return True
