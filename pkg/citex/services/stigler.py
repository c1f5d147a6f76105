"""
Stigler (Bradley-Terry) export-score model fitted by quasi-likelihood.

For each pair of journals i < j exchanging t_ij > 0 citations, c_ij of
them are citations of i by j and E(c_ij) = t_ij * pi_ij with
logit(pi_ij) = mu_i - mu_j. Point estimates solve the binomial-logistic
score equations; the dispersion only rescales their variance.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import numpy.typing as npt
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components
from scipy.special import expit

from citex.core.exceptions import (
    ConvergenceError,
    DisconnectedGraphError,
    EstimationError,
    InvalidParameterError,
    SeparationError,
)
from citex.models.corpus import CitationMatrix, PairTable
from citex.models.fits import ResidualReport, SimulationEnvelope, StiglerFit
from citex.schemas.journal import Journal

logger = logging.getLogger(__name__)

SUM_CONSTRAINT = "sum"
REFERENCE_PREFIX = "ref:"

# squared standardized residuals below this count as an exact fit
PHI_FLOOR = 1e-10


def pairs_from_matrix(C: CitationMatrix) -> PairTable:
    """
    Pairs of journals that exchange citations.

    The OTHER aggregate and the diagonal never enter the table.
    """
    C = C.without_other()
    counts = np.asarray(C.counts)
    upper_i, upper_j = np.triu_indices(C.n, k=1)
    wins = counts[upper_i, upper_j]
    total = wins + counts[upper_j, upper_i]
    keep = total > 0
    return PairTable(
        labels=tuple(C.abbrevs),
        i=upper_i[keep],
        j=upper_j[keep],
        wins=wins[keep],
        total=total[keep],
    )


def win_probability(mu_i: Union[float, npt.ArrayLike], mu_j: Union[float, npt.ArrayLike]):
    """Probability that a citation exchanged between i and j is a citation of i."""
    return expit(np.subtract(mu_i, mu_j))


def loglik(mu: npt.ArrayLike, pairs: PairTable) -> float:
    """Sum of c_ij (mu_i - mu_j) - t_ij log(1 + exp(mu_i - mu_j)) over pairs."""
    mu = np.asarray(mu, dtype=np.float64)
    diff = mu[pairs.i] - mu[pairs.j]
    return float(np.sum(pairs.wins * diff - pairs.total * np.logaddexp(0.0, diff)))


def score(mu: npt.ArrayLike, pairs: PairTable) -> npt.NDArray[np.float64]:
    """Gradient of loglik with respect to mu."""
    mu = np.asarray(mu, dtype=np.float64)
    resid = pairs.wins - pairs.total * win_probability(mu[pairs.i], mu[pairs.j])
    return (
        np.bincount(pairs.i, weights=resid, minlength=pairs.n)
        - np.bincount(pairs.j, weights=resid, minlength=pairs.n)
    )


def information(mu: npt.ArrayLike, pairs: PairTable) -> npt.NDArray[np.float64]:
    """Expected information D^T V^-1 D, a weighted graph Laplacian."""
    mu = np.asarray(mu, dtype=np.float64)
    p = win_probability(mu[pairs.i], mu[pairs.j])
    w = pairs.total * p * (1.0 - p)
    info = np.zeros((pairs.n, pairs.n))
    np.add.at(info, (pairs.i, pairs.i), w)
    np.add.at(info, (pairs.j, pairs.j), w)
    np.add.at(info, (pairs.i, pairs.j), -w)
    np.add.at(info, (pairs.j, pairs.i), -w)
    return info


def _check_connected(pairs: PairTable) -> None:
    graph = csr_matrix((np.ones(pairs.m), (pairs.i, pairs.j)), shape=(pairs.n, pairs.n))
    count, membership = connected_components(graph, directed=False)
    if count > 1:
        components = [
            [pairs.labels[k] for k in np.flatnonzero(membership == c)] for c in range(count)
        ]
        raise DisconnectedGraphError(components)


def _check_separation(pairs: PairTable) -> None:
    won = np.bincount(pairs.i, weights=pairs.wins, minlength=pairs.n) + np.bincount(
        pairs.j, weights=pairs.losses, minlength=pairs.n
    )
    played = np.bincount(pairs.i, weights=pairs.total, minlength=pairs.n) + np.bincount(
        pairs.j, weights=pairs.total, minlength=pairs.n
    )
    extreme = np.flatnonzero((won == 0) | (won == played))
    if extreme.size:
        raise SeparationError([pairs.labels[k] for k in extreme])


def _check_dominance(pairs: PairTable) -> None:
    """
    Every group of journals must be cited at least once by the rest.

    Edge a -> b when a received a citation from b. A strongly connected
    win graph is needed for finite scores; otherwise the components that
    no outsider ever beats are reported.
    """
    losses = pairs.losses
    winners = np.concatenate([pairs.i[pairs.wins > 0], pairs.j[losses > 0]])
    losers = np.concatenate([pairs.j[pairs.wins > 0], pairs.i[losses > 0]])
    graph = csr_matrix((np.ones(winners.size), (winners, losers)), shape=(pairs.n, pairs.n))
    count, membership = connected_components(graph, directed=True, connection="strong")
    if count == 1:
        return
    beaten = np.zeros(count, dtype=bool)
    crossing = membership[winners] != membership[losers]
    beaten[membership[losers[crossing]]] = True
    dominating = np.flatnonzero(~beaten[membership])
    raise SeparationError([pairs.labels[k] for k in dominating])


def pearson_terms(mu: npt.ArrayLike, pairs: PairTable) -> npt.NDArray[np.float64]:
    """Pearson residual of c_ij for every pair, in table order."""
    mu = np.asarray(mu, dtype=np.float64)
    p = win_probability(mu[pairs.i], mu[pairs.j])
    expected = pairs.total * p
    spread = np.sqrt(pairs.total * p * (1.0 - p))
    return np.divide(pairs.wins - expected, spread, out=np.zeros_like(spread), where=spread > 0)


def _dispersion(mu: npt.NDArray[np.float64], pairs: PairTable) -> Optional[float]:
    dof = pairs.m - pairs.n + 1
    if dof <= 0:
        logger.warning(f"Dispersion unavailable (m - n + 1 = {dof}); variances use phi = 1")
        return None
    phi = float(np.sum(pearson_terms(mu, pairs) ** 2) / dof)
    if phi <= PHI_FLOOR:
        logger.warning("Pearson residuals vanish; dispersion unavailable, variances use phi = 1")
        return None
    return phi


def _parse_constraint(constraint: str, labels: Sequence[str]) -> Optional[int]:
    if constraint == SUM_CONSTRAINT:
        return None
    if constraint.startswith(REFERENCE_PREFIX):
        key = constraint[len(REFERENCE_PREFIX):]
        if key not in labels:
            raise InvalidParameterError(f"--constraint: unknown reference journal '{key}'")
        return list(labels).index(key)
    raise InvalidParameterError(f"--constraint must be 'sum' or 'ref:ABBREV', got '{constraint}'")


def fit(
    pairs: PairTable,
    tol: float = 1e-10,
    max_iter: int = 100,
    constraint: str = SUM_CONSTRAINT,
    separation_bound: float = 30.0,
) -> StiglerFit:
    """
    Fit export scores by damped Newton iterations from mu = 0.

    Args:
        pairs: Pair table with t_ij > 0
        tol: Tolerance on the score norm (relative to the largest t_ij)
        max_iter: Newton iteration limit
        constraint: "sum" (scores sum to zero) or "ref:ABBREV" (that score is zero)
        separation_bound: |mu| beyond which estimates are treated as diverging

    Returns:
        StiglerFit

    Raises:
        DisconnectedGraphError: If some journals never exchange citations with the rest
        SeparationError: If a journal or a group of journals wins or loses all its exchanges
        ConvergenceError: If max_iter is reached or the iterations stall
    """
    reference = _parse_constraint(constraint, pairs.labels)
    if pairs.n < 2:
        raise EstimationError("At least two journals are needed")
    _check_connected(pairs)
    _check_separation(pairs)
    _check_dominance(pairs)

    n = pairs.n
    centering = np.full((n, n), 1.0 / n)
    scale = max(1.0, float(pairs.total.max()))
    mu = np.zeros(n)
    current = loglik(mu, pairs)
    grad = score(mu, pairs)
    converged = False
    iterations = 0

    for iterations in range(1, max_iter + 1):
        info = information(mu, pairs)
        step = np.linalg.solve(info + centering, grad)

        factor = 1.0
        candidate = mu + step
        value = loglik(candidate, pairs)
        while value < current - 1e-12 * abs(current) and factor > 1e-10:
            factor *= 0.5
            candidate = mu + factor * step
            value = loglik(candidate, pairs)

        moved = float(np.max(np.abs(candidate - mu)))
        mu = candidate - candidate.mean()
        current = loglik(mu, pairs)
        grad = score(mu, pairs)
        norm = float(np.max(np.abs(grad)))
        logger.debug(f"Newton iteration {iterations}: loglik={current:.10g} score={norm:.3e}")

        if np.max(np.abs(mu)) > separation_bound and norm > tol * scale:
            diverging = [pairs.labels[k] for k in np.flatnonzero(np.abs(mu) > separation_bound)]
            raise SeparationError(diverging)
        if norm <= tol * scale:
            converged = True
            break
        if moved < 1e-14:
            raise ConvergenceError("Stigler fit stalled before the score equations were solved", iterations, norm)

    if not converged:
        raise ConvergenceError("Stigler fit did not converge", iterations, float(np.max(np.abs(grad))))

    phi = _dispersion(mu, pairs)
    factor = phi if phi is not None else 1.0
    inverse = np.linalg.inv(information(mu, pairs) + centering) - centering
    vcov = factor * 0.5 * (inverse + inverse.T)

    result = StiglerFit(
        labels=pairs.labels,
        mu=mu,
        vcov=vcov,
        phi=phi,
        m=pairs.m,
        loglik=current,
        converged=True,
        iterations=iterations,
        score_norm=float(np.max(np.abs(grad))),
    )
    logger.info(
        f"Stigler fit: n={n}, m={pairs.m}, iterations={iterations}, "
        f"phi={'n/a' if phi is None else f'{phi:.4f}'}"
    )
    if reference is not None:
        result = anchored(result, reference)
    return result


def anchored(fit_: StiglerFit, reference: int) -> StiglerFit:
    """Re-express a fit so that the reference journal's score is zero."""
    n = fit_.n
    shift = np.eye(n)
    shift[:, reference] -= 1.0
    return StiglerFit(
        labels=fit_.labels,
        mu=fit_.mu - fit_.mu[reference],
        vcov=shift @ fit_.vcov @ shift.T,
        phi=fit_.phi,
        m=fit_.m,
        loglik=fit_.loglik,
        converged=fit_.converged,
        iterations=fit_.iterations,
        score_norm=fit_.score_norm,
        constraint=f"{REFERENCE_PREFIX}{fit_.labels[reference]}",
    )


def fit_matrix(C: CitationMatrix, **kwargs) -> StiglerFit:
    """Fit the model to the within-list pairs of a citation matrix."""
    return fit(pairs_from_matrix(C), **kwargs)


def pearson_residuals(fit_: StiglerFit, pairs: PairTable) -> Dict[Tuple[int, int], float]:
    """Pearson residuals for both orientations; r_ji = -r_ij."""
    terms = pearson_terms(fit_.mu, pairs)
    residuals: Dict[Tuple[int, int], float] = {}
    for a, b, r in zip(pairs.i, pairs.j, terms):
        residuals[(int(a), int(b))] = float(r)
        residuals[(int(b), int(a))] = float(-r)
    return residuals


def journal_residuals(fit_: StiglerFit, pairs: PairTable) -> npt.NDArray[np.float64]:
    """
    Standardized regression of each journal's Pearson residuals on opponents' scores.

    r_i = sum_j mu_j r_ij / sqrt(phi * sum_j mu_j^2), summing over opponents
    that exchange citations with i. Undefined values are NaN.
    """
    mu = np.asarray(fit_.mu)
    terms = pearson_terms(mu, pairs)
    # r_ij for journal i against opponent j, and r_ji = -r_ij for j against i
    numerator = np.bincount(pairs.i, weights=mu[pairs.j] * terms, minlength=pairs.n) + np.bincount(
        pairs.j, weights=mu[pairs.i] * -terms, minlength=pairs.n
    )
    squares = np.bincount(pairs.i, weights=mu[pairs.j] ** 2, minlength=pairs.n) + np.bincount(
        pairs.j, weights=mu[pairs.i] ** 2, minlength=pairs.n
    )
    denominator = np.sqrt(fit_.dispersion * squares)
    undefined = denominator == 0
    if undefined.any():
        names = ", ".join(pairs.labels[k] for k in np.flatnonzero(undefined))
        logger.warning(f"Journal residual undefined (opponent scores all zero): {names}")
    return np.divide(numerator, denominator, out=np.full(pairs.n, np.nan), where=~undefined)


def _replicate(
    fit_: StiglerFit,
    pairs: PairTable,
    trials: npt.NDArray[np.int64],
    probability: npt.NDArray[np.float64],
    seed: np.random.SeedSequence,
) -> Optional[npt.NDArray[np.float64]]:
    rng = np.random.default_rng(seed)
    wins = rng.binomial(trials, probability).astype(np.float64)
    keep = trials > 0
    simulated = PairTable(
        labels=pairs.labels,
        i=pairs.i[keep],
        j=pairs.j[keep],
        wins=wins[keep],
        total=trials[keep].astype(np.float64),
    )
    try:
        refit = fit(simulated)
    except EstimationError as e:
        logger.debug(f"Replicate dropped: {e}")
        return None
    residuals = journal_residuals(refit, simulated)
    if np.any(np.isnan(residuals)):
        return None
    return np.sort(residuals)


def simulation_envelope(
    fit_: StiglerFit,
    pairs: PairTable,
    n_sim: int = 99,
    level: float = 0.95,
    seed: int = 20100101,
    max_workers: int = 4,
) -> SimulationEnvelope:
    """
    Parametric-bootstrap envelope for sorted journal residuals.

    Each replicate draws C*_ij ~ Binomial(t_ij, pi_ij) from the fitted
    model, refits it and sorts the journal residuals. Replicates get
    their own child seeds, so the band does not depend on scheduling.
    """
    if not 0.0 < level < 1.0:
        raise InvalidParameterError(f"level must lie in (0, 1), got {level}")
    minimum = math.ceil(1.0 / (1.0 - level) - 1e-9) - 1
    if n_sim < minimum:
        raise InvalidParameterError(f"n_sim must be at least {minimum} for level {level}")

    trials = np.rint(pairs.total).astype(np.int64)
    if np.any(trials != pairs.total):
        logger.warning("Non-integer exchange totals rounded for binomial simulation")
    probability = win_probability(fit_.mu[pairs.i], fit_.mu[pairs.j])
    children = np.random.SeedSequence(seed).spawn(n_sim)

    with ThreadPoolExecutor(max_workers=max(1, max_workers)) as executor:
        outcomes = list(executor.map(
            lambda child: _replicate(fit_, pairs, trials, probability, child), children
        ))

    samples = [o for o in outcomes if o is not None]
    failed = n_sim - len(samples)
    if failed:
        logger.warning(f"{failed} of {n_sim} simulation replicates failed and were dropped")
    if not samples:
        raise EstimationError("Every simulation replicate failed")

    stacked = np.vstack(samples)
    tail = (1.0 - level) / 2.0
    return SimulationEnvelope(
        level=level,
        lower=np.quantile(stacked, tail, axis=0),
        upper=np.quantile(stacked, 1.0 - tail, axis=0),
        median=np.quantile(stacked, 0.5, axis=0),
        n_sim=n_sim,
        n_failed=failed,
        seed=seed,
    )


def residual_report(
    fit_: StiglerFit,
    pairs: PairTable,
    envelope: Optional[SimulationEnvelope] = None,
) -> ResidualReport:
    return ResidualReport(
        labels=fit_.labels,
        pearson=pearson_residuals(fit_, pairs),
        journal_residuals=journal_residuals(fit_, pairs),
        envelope=envelope,
    )


def merge_journals(C: CitationMatrix, i: Union[int, str], j: Union[int, str]) -> CitationMatrix:
    """
    Treat two journals as one.

    Rows and columns are summed into the position of the first of the
    two; mutual citations become self-citations of the merged journal.
    """
    a = C.index_of(i) if isinstance(i, str) else int(i)
    b = C.index_of(j) if isinstance(j, str) else int(j)
    if a == b:
        raise InvalidParameterError("cannot merge a journal with itself")
    for k in (a, b):
        if not 0 <= k < C.n:
            raise InvalidParameterError(f"journal index {k} out of range")
    keep, drop = min(a, b), max(a, b)

    aggregate = np.delete(np.eye(C.n), drop, axis=0)
    aggregate[keep, drop] = 1.0
    counts = aggregate @ np.asarray(C.counts) @ aggregate.T

    first, second = C.journals[keep], C.journals[drop]
    merged = Journal(
        abbrev=f"{first.abbrev}+{second.abbrev}",
        full_name=" + ".join(x for x in (first.full_name, second.full_name) if x),
    )
    journals: List[Journal] = [
        merged if k == keep else journal
        for k, journal in enumerate(C.journals) if k != drop
    ]
    return CitationMatrix(journals=tuple(journals), counts=counts, window_label=C.window_label)
