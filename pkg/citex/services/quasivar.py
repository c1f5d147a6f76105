"""
Quasi-variances, comparison intervals and approximate pairwise z-tests.
"""
import logging
from typing import Dict, List, Tuple, Union

import numpy as np
import numpy.typing as npt
from scipy.optimize import least_squares
from scipy.special import expit
from scipy.stats import norm

from citex.core.exceptions import InvalidParameterError, QuasiVarianceError
from citex.models.fits import QuasiVarianceSet, StiglerFit

logger = logging.getLogger(__name__)

_TINY = 1e-300

JournalRef = Union[int, str]


def _contrast_variances(fit: StiglerFit) -> Tuple[npt.NDArray[np.int64], npt.NDArray[np.int64], npt.NDArray[np.float64]]:
    V = np.asarray(fit.vcov)
    upper_i, upper_j = np.triu_indices(fit.n, k=1)
    v = V[upper_i, upper_i] + V[upper_j, upper_j] - 2.0 * V[upper_i, upper_j]
    return upper_i, upper_j, v


def _objective(eta: npt.NDArray[np.float64], i, j, log_v) -> float:
    r = np.logaddexp(eta[i], eta[j]) - log_v
    return float(np.sum(r ** 2))


def quasi_variances(fit: StiglerFit) -> QuasiVarianceSet:
    """
    Quasi-variances q such that q_i + q_j approximates var(mu_i - mu_j).

    Minimizes the sum over pairs of [log(q_i + q_j) - log var(mu_i - mu_j)]^2
    with q = exp(eta), starting from q_i = var(mu_i).
    """
    if fit.n < 2:
        raise QuasiVarianceError("Quasi-variances need at least two journals")
    i, j, v = _contrast_variances(fit)
    scale = float(np.max(np.abs(v))) if v.size else 0.0
    valid = v > max(scale, 1.0) * 1e-14
    excluded: List[Tuple[int, int]] = [(int(a), int(b)) for a, b in zip(i[~valid], j[~valid])]
    for a, b in excluded:
        logger.warning(
            f"var({fit.labels[a]} - {fit.labels[b]}) is zero; pair excluded from quasi-variances"
        )
    if not valid.any():
        raise QuasiVarianceError("Every contrast variance is zero")

    fi, fj, log_v = i[valid], j[valid], np.log(v[valid])

    def residuals(eta: npt.NDArray[np.float64]) -> npt.NDArray[np.float64]:
        return np.logaddexp(eta[fi], eta[fj]) - log_v

    def jacobian(eta: npt.NDArray[np.float64]) -> npt.NDArray[np.float64]:
        jac = np.zeros((fi.size, fit.n))
        share = expit(eta[fi] - eta[fj])
        rows = np.arange(fi.size)
        jac[rows, fi] = share
        jac[rows, fj] = 1.0 - share
        return jac

    start = np.log(np.clip(np.diag(np.asarray(fit.vcov)), _TINY, None))
    initial = _objective(start, fi, fj, log_v)
    solution = least_squares(
        residuals, start, jac=jacobian, method="trf", ftol=1e-12, xtol=1e-12, gtol=1e-12, max_nfev=2000
    )
    eta = solution.x
    final = _objective(eta, fi, fj, log_v)
    if final > initial:
        eta, final = start, initial
    if not solution.success:
        logger.warning(f"Quasi-variance solve stopped early: {solution.message}")

    qvar = np.exp(eta)
    per_pair: Dict[Tuple[int, int], float] = {}
    for a, b, var in zip(fi, fj, v[valid]):
        per_pair[(int(a), int(b))] = float(abs(qvar[a] + qvar[b] - var) / var)
    worst = max(per_pair.values())
    logger.info(f"Quasi-variances: worst relative error {worst:.4f} over {len(per_pair)} pairs")
    return QuasiVarianceSet(
        labels=fit.labels,
        qvar=qvar,
        worst_rel_error=worst,
        per_pair_rel_error=per_pair,
        initial_objective=initial,
        final_objective=final,
        excluded_pairs=excluded,
    )


def _index(fit: StiglerFit, ref: JournalRef) -> int:
    if isinstance(ref, str):
        return fit.index_of(ref)
    if not 0 <= int(ref) < fit.n:
        raise InvalidParameterError(f"journal index {ref} out of range")
    return int(ref)


def z_test(qv: QuasiVarianceSet, fit: StiglerFit, i: JournalRef, j: JournalRef) -> Tuple[float, float]:
    """
    Compare two export scores.

    Returns:
        (z from quasi-variances, z from the full variance matrix)
    """
    a, b = _index(fit, i), _index(fit, j)
    if a == b:
        return 0.0, 0.0
    difference = float(fit.mu[a] - fit.mu[b])
    approx_var = float(qv.qvar[a] + qv.qvar[b])
    exact_var = fit.contrast_variance(a, b)
    if approx_var <= 0 or exact_var <= 0:
        raise QuasiVarianceError(f"zero variance comparing {fit.labels[a]} and {fit.labels[b]}")
    return difference / np.sqrt(approx_var), difference / np.sqrt(exact_var)


def comparison_intervals(qv: QuasiVarianceSet, fit: StiglerFit, level: float = 0.95) -> npt.NDArray[np.float64]:
    """Per-journal intervals mu_i -/+ z * qse_i as an (n, 2) array."""
    if not 0.0 < level < 1.0:
        raise InvalidParameterError(f"level must lie in (0, 1), got {level}")
    z = norm.ppf(0.5 * (1.0 + level))
    half = z * np.sqrt(np.asarray(qv.qvar))
    mu = np.asarray(fit.mu)
    return np.column_stack([mu - half, mu + half])
