"""
Eigenfactor and Article Influence scores via a damped citation Markov chain.
"""
import logging
from pathlib import Path
from typing import Dict, Mapping, Optional, Tuple, Union

import numpy as np
import numpy.typing as npt
import pandas as pd

from citex.core.exceptions import ConvergenceError, CorpusError, InvalidParameterError
from citex.models.corpus import CitationMatrix
from citex.models.network import EigenResult
from citex.services.corpus import read_table

logger = logging.getLogger(__name__)

SHARE_TOLERANCE = 1e-12

ArticleCounts = Union[Mapping[str, float], npt.ArrayLike]


def article_shares(counts: npt.ArrayLike) -> npt.NDArray[np.float64]:
    """Normalize article counts into a probability vector."""
    counts = np.asarray(counts, dtype=np.float64)
    if np.any(~np.isfinite(counts)) or np.any(counts < 0):
        raise InvalidParameterError("article counts must be finite and non-negative")
    total = counts.sum()
    if total <= 0:
        raise InvalidParameterError("at least one journal needs a positive article count")
    return counts / total


def normalize_citations(
    C: CitationMatrix, a: Optional[npt.ArrayLike] = None
) -> Tuple[npt.NDArray[np.float64], npt.NDArray[np.bool_]]:
    """
    Zero the diagonal and make every column sum to one.

    Columns with no outgoing citations (dangling journals) are replaced
    by the article-share vector `a` (uniform when not given).

    Returns:
        (normalized matrix, dangling-column mask)
    """
    n = C.n
    counts = np.array(C.counts, dtype=np.float64)
    np.fill_diagonal(counts, 0.0)
    shares = np.full(n, 1.0 / n) if a is None else np.asarray(a, dtype=np.float64)

    sums = counts.sum(axis=0)
    dangling = sums == 0
    normalized = np.divide(counts, sums, out=np.zeros_like(counts), where=~dangling)
    normalized[:, dangling] = shares[:, None]
    if dangling.any():
        names = ", ".join(C.abbrevs[k] for k in np.flatnonzero(dangling))
        logger.info(f"Dangling journals (no outgoing citations): {names}")
    return normalized, dangling


def transition_matrix(
    Ctilde: npt.ArrayLike, a: npt.ArrayLike, damping: float
) -> npt.NDArray[np.float64]:
    """P = damping * Ctilde + (1 - damping) * a e^T."""
    if not 0.0 <= damping < 1.0:
        raise InvalidParameterError(f"damping must lie in [0, 1), got {damping}")
    a = np.asarray(a, dtype=np.float64)
    if np.any(a < 0) or abs(a.sum() - 1.0) > SHARE_TOLERANCE:
        raise InvalidParameterError(f"article shares must be a probability vector (sum={a.sum()!r})")
    Ctilde = np.asarray(Ctilde, dtype=np.float64)
    return damping * Ctilde + (1.0 - damping) * np.outer(a, np.ones(a.shape[0]))


def align_articles(C: CitationMatrix, articles: ArticleCounts) -> npt.NDArray[np.float64]:
    """Order article counts by matrix position."""
    if isinstance(articles, Mapping):
        missing = [key for key in C.abbrevs if key not in articles]
        if missing:
            raise CorpusError(f"No article count for: {', '.join(missing)}")
        return np.array([float(articles[key]) for key in C.abbrevs])
    values = np.asarray(articles, dtype=np.float64)
    if values.shape != (C.n,):
        raise InvalidParameterError(f"expected {C.n} article counts, got shape {values.shape}")
    return values


def load_article_counts(path: Union[str, Path]) -> Dict[str, float]:
    """Read a CSV with columns journal,articles."""
    frame = read_table(path, ("journal", "articles"), dtype={"journal": str})
    values = pd.to_numeric(frame["articles"], errors="coerce")
    if values.isna().any():
        raise CorpusError(f"{Path(path).name}: non-numeric article count")
    return {str(j).strip(): float(v) for j, v in zip(frame["journal"], values)}


def eigenfactor_scores(
    C: CitationMatrix,
    articles: Optional[ArticleCounts] = None,
    damping: float = 0.85,
    tol: float = 1e-12,
    max_iter: int = 10000,
) -> EigenResult:
    """
    Eigenfactor and Article Influence scores by power iteration.

    Args:
        C: Citation matrix; an OTHER aggregate is dropped
        articles: Article counts per journal; uniform shares when None
        damping: Probability of following a citation
        tol: L1 tolerance on successive stationary vectors
        max_iter: Iteration limit

    Returns:
        EigenResult with EF summing to 100

    Raises:
        ConvergenceError: If the residual stays above tol
    """
    C = C.without_other()
    if articles is None:
        logger.warning("No article counts given; using uniform article shares")
        a = np.full(C.n, 1.0 / C.n)
    else:
        a = article_shares(align_articles(C, articles))

    Ctilde, dangling = normalize_citations(C, a)
    P = transition_matrix(Ctilde, a, damping)

    psi = np.full(C.n, 1.0 / C.n)
    residual = np.inf
    iterations = 0
    while iterations < max_iter:
        iterations += 1
        updated = P @ psi
        updated /= updated.sum()
        residual = float(np.abs(updated - psi).sum())
        psi = updated
        if residual < tol:
            break
    else:
        raise ConvergenceError("Power iteration did not converge", iterations, residual)

    weighted = Ctilde @ psi
    ef = 100.0 * weighted / weighted.sum()
    ai = np.divide(0.01 * ef, a, out=np.full(C.n, np.nan), where=a > 0)
    logger.info(f"Eigenfactor converged in {iterations} iterations (residual {residual:.2e})")
    return EigenResult(
        labels=tuple(C.abbrevs),
        psi=psi,
        ef=ef,
        ai=ai,
        a=a,
        damping=damping,
        iterations=iterations,
        residual=residual,
        dangling=dangling,
    )
