"""
Adaptive ranking lasso over the Stigler model.

Maximizes the quasi-log-likelihood subject to
sum_{i<j} w_ij |mu_i - mu_j| <= s and sum(mu) = 0, for a grid of bounds
s, and selects the grouped solution with the smallest TIC.

Each bound is solved by an augmented Lagrangian (ADMM) scheme on the
split mu-differences z = D mu, where D maps scores to all pairwise
differences. The z-step is a projection onto the weighted l1 ball and
the mu-step a Newton solve. Detected groups are then re-fitted with
their equality structure imposed so tied journals share one exact value.
"""
import logging
from typing import List, Optional, Tuple

import numpy as np
import numpy.typing as npt
from scipy.optimize import brentq

from citex.core.exceptions import ConvergenceError, InvalidParameterError
from citex.models.corpus import PairTable
from citex.models.fits import StiglerFit
from citex.models.lasso import LassoPath, PathPoint
from citex.services.stigler import information, loglik, score

logger = logging.getLogger(__name__)

Groups = Tuple[Tuple[int, ...], ...]

_EPS = 1e-300


def information_criterion(loglik_value: float, phi: float, p: int) -> float:
    """TIC under the quasi-model: -2 loglik + 2 phi p."""
    return -2.0 * loglik_value + 2.0 * phi * p


def tic(point: PathPoint, phi: float) -> float:
    return information_criterion(point.loglik, phi, point.p)


def penalty(mu: npt.ArrayLike, weights: npt.ArrayLike) -> float:
    """sum_{i<j} w_ij |mu_i - mu_j|."""
    mu = np.asarray(mu, dtype=np.float64)
    W = np.asarray(weights, dtype=np.float64)
    i, j = np.triu_indices(mu.shape[0], k=1)
    return float(np.sum(W[i, j] * np.abs(mu[i] - mu[j])))


def project_weighted_l1(v: npt.NDArray[np.float64], w: npt.NDArray[np.float64], s: float) -> npt.NDArray[np.float64]:
    """Euclidean projection of v onto {z : sum w_k |z_k| <= s}."""
    magnitude = np.abs(v)
    if np.sum(w * magnitude) <= s:
        return v.copy()
    if s <= 0:
        return np.zeros_like(v)
    ratio = magnitude / w
    order = np.argsort(-ratio, kind="stable")
    threshold = (np.cumsum((w * magnitude)[order]) - s) / np.cumsum((w * w)[order])
    active = np.flatnonzero(ratio[order] > threshold)
    theta = threshold[active[-1]]
    return np.sign(v) * np.maximum(magnitude - theta * w, 0.0)


def detect_groups(mu: npt.ArrayLike, group_tol: float) -> Groups:
    """
    Partition journals into groups of (transitively) equal scores.

    Groups are ordered by descending score, members by index.
    """
    mu = np.asarray(mu, dtype=np.float64)
    order = np.argsort(-mu, kind="stable")
    groups: List[List[int]] = [[int(order[0])]]
    for previous, current in zip(order[:-1], order[1:]):
        if mu[previous] - mu[current] < group_tol:
            groups[-1].append(int(current))
        else:
            groups.append([int(current)])
    return tuple(tuple(sorted(g)) for g in groups)


class RankingLasso:
    """Solver for the bounded ranking-lasso problem and its path."""

    def __init__(
        self,
        group_tol: float = 1e-4,
        weight_cap: float = 1e8,
        initial_rho: float = 1.0,
        rho_factor: float = 10.0,
        inner_tol: float = 1e-8,
        outer_tol: float = 1e-6,
        max_iter: int = 20000,
    ):
        self.group_tol = group_tol
        self.weight_cap = weight_cap
        self.initial_rho = initial_rho
        self.rho_factor = rho_factor
        self.inner_tol = inner_tol
        self.outer_tol = outer_tol
        self.max_iter = max_iter

    def adaptive_weights(self, fit: StiglerFit) -> npt.NDArray[np.float64]:
        """
        w_ij = 1 / |mu_i - mu_j| from the unpenalized fit.

        Differences below 1 / weight_cap get the capped weight.
        """
        mu = np.asarray(fit.mu)
        gaps = np.abs(mu[:, None] - mu[None, :])
        weights = np.where(gaps < 1.0 / self.weight_cap, self.weight_cap, 1.0 / np.maximum(gaps, _EPS))
        np.fill_diagonal(weights, 0.0)
        return weights

    # bounded problem

    def solve_at_bound(
        self,
        pairs: PairTable,
        weights: npt.ArrayLike,
        s: float,
        warm_start: Optional[npt.ArrayLike] = None,
        phi: float = 1.0,
        qle: Optional[npt.ArrayLike] = None,
    ) -> PathPoint:
        """
        Maximize the quasi-log-likelihood under the weighted pairwise bound s.

        Args:
            pairs: Pair table
            weights: Symmetric n x n adaptive weights
            s: Bound on the weighted sum of absolute score differences
            warm_start: Starting scores (zeros when None)
            phi: Dispersion used for TIC
            qle: Unpenalized estimates; returned directly when the bound is inactive

        Returns:
            PathPoint with exact within-group equality

        Raises:
            ConvergenceError: If the augmented Lagrangian loop does not converge
        """
        if s < 0:
            raise InvalidParameterError(f"bound s must be >= 0, got {s}")
        n = pairs.n
        W = np.asarray(weights, dtype=np.float64)

        if s == 0:
            mu = np.zeros(n)
            return self._point(s, mu, ((tuple(range(n))),), pairs, phi, W, 0)

        if qle is not None and penalty(qle, W) <= s:
            mu = np.asarray(qle, dtype=np.float64) - np.mean(qle)
            return self._point(s, mu, detect_groups(mu, self.group_tol), pairs, phi, W, 0)

        start = np.zeros(n) if warm_start is None else np.asarray(warm_start, dtype=np.float64)
        raw, iterations = self._admm(pairs, W, s, start - start.mean())
        groups = detect_groups(raw, self.group_tol)
        mu = self._refit_groups(pairs, W, s, groups, raw)
        return self._point(s, mu, groups, pairs, phi, W, iterations)

    def _point(self, s, mu, groups, pairs, phi, W, iterations) -> PathPoint:
        value = loglik(mu, pairs)
        return PathPoint(
            s=float(s),
            mu=mu,
            groups=groups,
            loglik=value,
            tic=information_criterion(value, phi, len(groups)),
            penalty=penalty(mu, W),
            iterations=iterations,
        )

    def _admm(
        self, pairs: PairTable, W: npt.NDArray[np.float64], s: float, mu: npt.NDArray[np.float64]
    ) -> Tuple[npt.NDArray[np.float64], int]:
        n = pairs.n
        ci, cj = np.triu_indices(n, k=1)
        w = W[ci, cj]

        def diff(x: npt.NDArray[np.float64]) -> npt.NDArray[np.float64]:
            return x[ci] - x[cj]

        def adjoint(y: npt.NDArray[np.float64]) -> npt.NDArray[np.float64]:
            return np.bincount(ci, weights=y, minlength=n) - np.bincount(cj, weights=y, minlength=n)

        rho = self.initial_rho
        z = project_weighted_l1(diff(mu), w, s)
        u = np.zeros_like(z)
        check_every = 10
        last_primal = np.inf
        primal = dual = np.inf

        for iteration in range(1, self.max_iter + 1):
            mu = self._mu_step(pairs, mu, z - u, rho, diff, adjoint)
            d_mu = diff(mu)
            z_old = z
            z = project_weighted_l1(d_mu + u, w, s)
            u = u + d_mu - z

            primal = float(np.linalg.norm(d_mu - z))
            dual = float(rho * np.linalg.norm(adjoint(z - z_old)))
            eps_primal = self.outer_tol * max(1.0, float(np.linalg.norm(d_mu)), float(np.linalg.norm(z)))
            eps_dual = self.outer_tol * max(1.0, float(rho * np.linalg.norm(adjoint(u))))
            if primal <= eps_primal and dual <= eps_dual:
                logger.debug(f"ADMM at s={s:.6g}: {iteration} iterations, rho={rho:.1e}")
                return mu, iteration

            if iteration % check_every == 0:
                if primal > eps_primal and primal > 0.25 * last_primal:
                    rho *= self.rho_factor
                    u /= self.rho_factor
                last_primal = primal

        raise ConvergenceError(
            f"Ranking lasso did not converge at s={s:.6g}", self.max_iter, max(primal, dual), bound=s
        )

    def _mu_step(self, pairs, mu, target, rho, diff, adjoint) -> npt.NDArray[np.float64]:
        """Newton solve of min -loglik(mu) + rho/2 ||D mu - target||^2 with sum(mu) = 0."""
        n = pairs.n
        curvature = rho * (n * np.eye(n) - np.ones((n, n))) + np.full((n, n), 1.0 / n)
        scale = max(1.0, float(pairs.total.max()))

        def objective(x):
            r = diff(x) - target
            return -loglik(x, pairs) + 0.5 * rho * float(r @ r)

        current = objective(mu)
        for _ in range(50):
            grad = -score(mu, pairs) + rho * adjoint(diff(mu) - target)
            if np.max(np.abs(grad)) <= self.inner_tol * scale:
                break
            step = np.linalg.solve(information(mu, pairs) + curvature, grad)
            factor = 1.0
            candidate = mu - step
            value = objective(candidate)
            while value > current + 1e-14 * abs(current) and factor > 1e-10:
                factor *= 0.5
                candidate = mu - factor * step
                value = objective(candidate)
            if np.max(np.abs(candidate - mu)) < 1e-15:
                break
            mu = candidate - candidate.mean()
            current = objective(mu)
        return mu

    # grouped re-fit

    def _refit_groups(
        self,
        pairs: PairTable,
        W: npt.NDArray[np.float64],
        s: float,
        groups: Groups,
        raw: npt.NDArray[np.float64],
    ) -> npt.NDArray[np.float64]:
        n, p = pairs.n, len(groups)
        membership = np.zeros((n, p))
        for g, members in enumerate(groups):
            membership[list(members), g] = 1.0
        sizes = membership.sum(axis=0)
        fallback = membership @ ((membership.T @ raw) / sizes)
        fallback -= fallback.mean()
        if p == 1:
            return np.zeros(n)

        # groups are ordered by descending score, so beta_g > beta_h for g < h
        between = membership.T @ W @ membership
        direction = np.array([between[g, g + 1:].sum() - between[g, :g].sum() for g in range(p)])

        scale = max(1.0, float(pairs.total.max()))

        def objective(beta, nu):
            return loglik(membership @ beta, pairs) - nu * float(direction @ beta)

        def solve(nu: float) -> Optional[npt.NDArray[np.float64]]:
            beta = membership.T @ raw / sizes
            current = objective(beta, nu)
            for _ in range(100):
                mu = membership @ beta
                grad = membership.T @ score(mu, pairs) - nu * direction
                if np.max(np.abs(grad)) <= self.inner_tol * scale:
                    break
                hessian = membership.T @ information(mu, pairs) @ membership + np.full((p, p), 1.0 / p)
                step = np.linalg.solve(hessian, grad)
                factor = 1.0
                value = objective(beta + step, nu)
                while value < current - 1e-14 * abs(current) and factor > 1e-10:
                    factor *= 0.5
                    value = objective(beta + factor * step, nu)
                if np.max(np.abs(factor * step)) < 1e-15:
                    break
                beta = beta + factor * step
                current = value
                if not np.all(np.isfinite(beta)) or np.max(np.abs(beta)) > 1e3:
                    return None
            return beta - (sizes @ beta) / n

        def ordered(beta: Optional[npt.NDArray[np.float64]]) -> bool:
            return beta is not None and bool(np.all(np.diff(beta) < 0))

        beta = solve(0.0)
        if ordered(beta) and direction @ beta <= s:
            return membership @ beta

        def excess(nu: float) -> float:
            candidate = solve(nu)
            if candidate is None:
                return -s
            return float(direction @ candidate) - s

        high = 1.0
        while excess(high) > 0 and high < 1e12:
            high *= 4.0
        try:
            nu = brentq(excess, 0.0, high, xtol=1e-14, rtol=1e-12, maxiter=200)
        except ValueError:
            logger.debug(f"Grouped re-fit bracket failed at s={s:.6g}; using group means")
            return fallback
        beta = solve(nu)
        if not ordered(beta):
            logger.debug(f"Grouped re-fit reordered groups at s={s:.6g}; using group means")
            return fallback
        return membership @ beta

    # path

    def trace_path(self, pairs: PairTable, fit: StiglerFit, n_points: int = 101) -> LassoPath:
        """
        Solve over a grid of bounds from 0 to 1.05 times the penalty at the QLE.

        The grid is 0 followed by geometrically spaced bounds; each solve is
        warm-started from the previous one. The selected point minimizes TIC.
        """
        if n_points < 2:
            raise InvalidParameterError(f"--points must be >= 2, got {n_points}")
        if not fit.converged:
            raise InvalidParameterError("trace_path needs a converged unpenalized fit")
        qle = np.asarray(fit.mu) - np.mean(fit.mu)
        W = self.adaptive_weights(fit)
        at_qle = penalty(qle, W)
        s_max = 1.05 * at_qle if at_qle > 0 else 1.0
        grid = np.concatenate([[0.0], np.geomspace(s_max * 1e-4, s_max, n_points - 1)])
        phi = fit.dispersion

        points: List[PathPoint] = []
        warm = np.zeros(fit.n)
        for s in grid:
            try:
                point = self.solve_at_bound(pairs, W, float(s), warm, phi=phi, qle=qle)
            except ConvergenceError as e:
                logger.error(f"Path failed at s={s:.6g}: {e}")
                raise
            points.append(point)
            warm = np.asarray(point.mu)

        tics = np.array([p.tic for p in points])
        selected = int(np.argmin(tics))
        logger.info(
            f"Ranking lasso: {len(points)} points, selected s={points[selected].s:.6g} "
            f"with {points[selected].p} groups"
        )
        previous = 0
        for point in points:
            if point.p < previous:
                logger.info(f"Group count decreases to {point.p} at s={point.s:.6g}")
            previous = point.p
        return LassoPath(
            labels=fit.labels,
            points=tuple(points),
            weights=W,
            selected=selected,
            phi=phi,
            penalty_at_qle=at_qle,
        )


def adaptive_weights(fit: StiglerFit) -> npt.NDArray[np.float64]:
    return get_ranking_lasso().adaptive_weights(fit)


def solve_at_bound(pairs, weights, s, warm_start=None, **kwargs) -> PathPoint:
    return get_ranking_lasso().solve_at_bound(pairs, weights, s, warm_start, **kwargs)


def trace_path(pairs: PairTable, fit: StiglerFit, n_points: int = 101) -> LassoPath:
    return get_ranking_lasso().trace_path(pairs, fit, n_points)


# Singleton instance
_ranking_lasso: Optional[RankingLasso] = None


def get_ranking_lasso() -> RankingLasso:
    """Get the singleton solver configured from settings."""
    global _ranking_lasso
    if _ranking_lasso is None:
        from citex.config import get_settings
        settings = get_settings()
        _ranking_lasso = RankingLasso(
            group_tol=settings.group_tol,
            weight_cap=settings.weight_cap,
            initial_rho=settings.lasso_initial_rho,
            rho_factor=settings.lasso_rho_factor,
            inner_tol=settings.lasso_inner_tol,
            outer_tol=settings.lasso_outer_tol,
            max_iter=settings.lasso_max_iter,
        )
    return _ranking_lasso
