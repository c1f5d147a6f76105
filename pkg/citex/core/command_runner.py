"""
Execution of CLI subcommands: compute, write artifacts, record the manifest.
"""
import logging
from pathlib import Path
from typing import Callable, Dict, List, Optional

import numpy as np
import pandas as pd

from citex.config import get_settings
from citex.core.constants import get_method_display_name
from citex.core.exceptions import InvalidParameterError
from citex.models.corpus import CitationMatrix
from citex.models.enums import Command, ImpactIndex
from citex.models.fits import QuasiVarianceSet, StiglerFit
from citex.models.lasso import LassoPath
from citex.schemas.assessment import UnitScore
from citex.schemas.manifest import RunManifest
from citex.schemas.options import RunOptions
from citex.services import assess, cluster, descriptives, eigenfactor, figures, quasivar, stigler
from citex.services.corpus import (
    NameResolver,
    default_aliases,
    default_catalogue,
    exchange_totals,
    load_aliases,
    load_matrix,
)
from citex.services.export_service import ExportService, emit_rank_table
from citex.services.ranking_lasso import get_ranking_lasso

logger = logging.getLogger(__name__)


class _WarningCollector(logging.Handler):
    """Keeps WARNING records of a run for the manifest."""

    def __init__(self):
        super().__init__(level=logging.WARNING)
        self.messages: List[str] = []

    def emit(self, record: logging.LogRecord) -> None:
        self.messages.append(record.getMessage())


class CommandRunner:
    """
    Runs one subcommand end to end.

    Every run writes its artifacts and a manifest.json into the output
    directory, including failed runs (with the error recorded).
    """

    def __init__(self):
        self.settings = get_settings()
        self._handlers: Dict[Command, Callable[[RunOptions, ExportService], None]] = {
            Command.DESCRIBE: self._describe,
            Command.INDEX: self._index,
            Command.CLUSTER: self._cluster,
            Command.EIGENFACTOR: self._eigenfactor,
            Command.STIGLER: self._stigler,
            Command.LASSO: self._lasso,
            Command.ASSESS: self._assess,
            Command.REPORT: self._report,
        }
        self.messages: List[str] = []

    def run(self, command: Command, options: RunOptions) -> RunManifest:
        """
        Execute a subcommand.

        Args:
            command: Subcommand to run
            options: Parsed options

        Returns:
            The manifest written next to the artifacts
        """
        command = Command(command)
        self.messages = []
        export = ExportService(self.settings.ensure_directories(options.out), self.settings.csv_precision)
        collector = _WarningCollector()
        root = logging.getLogger("citex")
        root.addHandler(collector)
        error: Optional[str] = None
        logger.info(f"Running {command.value} into {options.out}")
        try:
            self._handlers[command](options, export)
        except Exception as e:
            error = str(e)
            logger.error(f"{command.value} failed: {e}")
            raise
        finally:
            root.removeHandler(collector)
            parameters = {
                key: (str(value) if isinstance(value, (Path, tuple, list)) else getattr(value, "value", value))
                for key, value in options.model_dump().items()
                if key != "out"
            }
            manifest = export.export_manifest(
                command=command.value,
                inputs=[p for p in options.input_files() if p.is_file()],
                parameters=parameters,
                seed=options.seed,
                warnings=collector.messages,
                error=error,
            )
        return manifest

    # shared steps

    def _matrix(self, options: RunOptions) -> CitationMatrix:
        if options.input is None:
            raise InvalidParameterError("--input is required")
        return load_matrix(options.input, options.format, catalogue=default_catalogue(), window_label=options.window)

    def _fit(self, C: CitationMatrix, options: RunOptions) -> StiglerFit:
        return stigler.fit(
            stigler.pairs_from_matrix(C),
            tol=options.tol or self.settings.fit_tol,
            max_iter=self.settings.fit_max_iter,
            constraint=options.constraint,
            separation_bound=self.settings.separation_bound,
        )

    def _yearly(self, options: RunOptions):
        return descriptives.load_yearly(options.yearly, options.year)

    def _scores_frame(self, fit: StiglerFit, qv: Optional[QuasiVarianceSet]) -> pd.DataFrame:
        frame = pd.DataFrame({"journal": list(fit.labels), "mu": np.asarray(fit.mu)})
        if qv is not None:
            frame["qse"] = np.asarray(qv.qse)
        frame["rank"] = descriptives.rank_values(list(fit.mu), list(fit.labels))
        return frame

    def _grouped_frame(self, fit: StiglerFit, path: LassoPath) -> pd.DataFrame:
        point = path.selected_point
        group_of = {k: g + 1 for g, members in enumerate(point.groups) for k in members}
        return pd.DataFrame({
            "journal": list(fit.labels),
            "mu": np.asarray(fit.mu),
            "mu_grouped": np.asarray(point.mu),
            "group": [group_of[k] for k in range(fit.n)],
            "rank": descriptives.rank_values(list(point.mu), list(fit.labels)),
        })

    # subcommands

    def _describe(self, options: RunOptions, export: ExportService) -> None:
        C = self._matrix(options)
        summaries = descriptives.summarize(C, options.stat_keys)
        frame = pd.DataFrame([s.model_dump() for s in summaries]).rename(columns={
            "citing_self_prop": "citing_self",
            "citing_stat_prop": "citing_stat",
            "cited_self_prop": "cited_self",
            "cited_stat_prop": "cited_stat",
        })
        export.export_csv("descriptives.csv", frame)

    def _index(self, options: RunOptions, export: ExportService) -> None:
        if options.yearly is None:
            raise InvalidParameterError("--yearly is required for index")
        yearly, own = self._yearly(options)
        scores = descriptives.index_table(yearly.values(), options.kind, own)
        labels = [s.journal for s in scores]
        values = [s.value for s in scores]
        frame = pd.DataFrame({
            "journal": labels,
            "value": values,
            "rank": pd.array(descriptives.rank_values(values, labels), dtype="Int64"),
        })
        export.export_csv(f"index_{options.kind.value}.csv", frame)

    def _cluster(self, options: RunOptions, export: ExportService) -> None:
        C = self._matrix(options).without_other()
        distances = cluster.correlation_distance(exchange_totals(C))
        dendrogram = cluster.complete_linkage(distances)
        partition = cluster.cut(dendrogram, options.cut)
        logger.info(f"Cut at {options.cut}: {len(partition)} clusters")

        export.export_csv("clusters.csv", pd.DataFrame(
            cluster.cluster_assignments(partition), columns=["journal", "cluster"]
        ))
        export.export_csv("merges.csv", pd.DataFrame(
            dendrogram.to_linkage(), columns=["left", "right", "height", "size"]
        ).astype({"left": int, "right": int, "size": int}))
        export.register(figures.dendrogram_plot(
            dendrogram, export.path_for("dendrogram.svg"), options.cut, partition
        ))

    def _eigenfactor(self, options: RunOptions, export: ExportService) -> None:
        C = self._matrix(options)
        articles = eigenfactor.load_article_counts(options.articles) if options.articles else None
        result = eigenfactor.eigenfactor_scores(
            C,
            articles,
            damping=options.damping,
            tol=options.tol or self.settings.eigen_tol,
            max_iter=self.settings.eigen_max_iter,
        )
        labels = list(result.labels)
        ai = [None if np.isnan(v) else float(v) for v in result.ai]
        export.export_csv("eigenfactor.csv", pd.DataFrame({
            "journal": labels,
            "EF": np.asarray(result.ef),
            "AI": ai,
            "rank_EF": descriptives.rank_values(list(result.ef), labels),
            "rank_AI": pd.array(descriptives.rank_values(ai, labels), dtype="Int64"),
        }))

    def _stigler(self, options: RunOptions, export: ExportService) -> None:
        C = self._matrix(options)
        pairs = stigler.pairs_from_matrix(C)
        fit = self._fit(C, options)
        centered = fit.recentered()
        qv = quasivar.quasi_variances(centered)

        export.export_csv("stigler.csv", self._scores_frame(fit, qv if options.qvar else None))
        self.messages.append(
            f"phi = {'unavailable' if fit.phi is None else f'{fit.phi:.4f}'} (m = {fit.m}, n = {fit.n})"
        )

        envelope = None
        if options.simulations:
            envelope = stigler.simulation_envelope(
                centered, pairs, options.simulations, options.level, options.seed, options.workers
            )
        report = stigler.residual_report(centered, pairs, envelope)
        residuals = pd.DataFrame({"journal": list(fit.labels), "residual": np.asarray(report.journal_residuals)})
        export.export_csv("residuals.csv", residuals)
        if envelope is not None:
            ordered = np.sort(report.journal_residuals)
            export.export_csv("envelope.csv", pd.DataFrame({
                "order": np.arange(1, fit.n + 1),
                "residual": ordered,
                "lower": np.asarray(envelope.lower),
                "median": np.asarray(envelope.median),
                "upper": np.asarray(envelope.upper),
            }))
            inside = int(envelope.inside(ordered).sum())
            self.messages.append(f"{inside} of {fit.n} sorted residuals inside the {envelope.level:.0%} envelope")
            export.register(figures.residual_qq_plot(report, export.path_for("residuals_qq.svg"), centered.mu))

        if options.ztest is not None:
            a, b = options.ztest
            z_approx, z_exact = quasivar.z_test(qv, centered, a, b)
            export.export_csv("ztest.csv", pd.DataFrame(
                [{"journal_a": a, "journal_b": b, "z_approx": z_approx, "z_exact": z_exact}]
            ))
            self.messages.append(f"z({a} vs {b}): approx {z_approx:.2f}, exact {z_exact:.2f}")

        export.register(figures.centipede_plot(centered, qv, export.path_for("centipede.svg")))

    def _lasso(self, options: RunOptions, export: ExportService) -> None:
        C = self._matrix(options)
        pairs = stigler.pairs_from_matrix(C)
        fit = self._fit(C, options).recentered()
        path = get_ranking_lasso().trace_path(pairs, fit, options.points)

        rows = []
        for k, point in enumerate(path.points):
            row = {"s": point.s, "p": point.p, "loglik": point.loglik, "tic": point.tic,
                   "penalty": point.penalty, "selected": int(k == path.selected)}
            row.update({label: float(v) for label, v in zip(fit.labels, point.mu)})
            rows.append(row)
        export.export_csv("lasso_path.csv", pd.DataFrame(rows))
        export.export_csv("lasso_grouped.csv", self._grouped_frame(fit, path))
        export.register(figures.path_plot(path, export.path_for("lasso_path.svg")))
        self.messages.append(f"TIC selects {path.selected_point.p} groups at s = {path.selected_point.s:.6g}")

    def _assess(self, options: RunOptions, export: ExportService) -> None:
        missing = [flag for flag, value in (("--scores", options.scores), ("--outputs", options.outputs),
                                            ("--profiles", options.profiles)) if value is None]
        if missing:
            raise InvalidParameterError(f"assess needs {', '.join(missing)}")
        tables = assess.load_score_table(options.scores, options.score_columns)
        aliases = load_aliases(options.aliases) if options.aliases else default_aliases()
        resolver = NameResolver(default_catalogue(), aliases)
        profiles = assess.load_profiles(options.profiles)
        outputs = assess.resolve_outputs(assess.load_outputs(options.outputs), resolver)

        units_by_method: Dict[str, List[UnitScore]] = {}
        for method, scores in tables.items():
            units_by_method[method] = assess.build_unit_scores(
                profiles,
                outputs,
                scores,
                transform=options.transform or assess.default_transform(method),
                statistic=options.statistic,
                scoring=options.scoring,
            )
        export.export_csv("assessment.csv", pd.DataFrame([{
            "method": method,
            "unit": u.unit,
            "rae_score": u.rae_score,
            "mean_score": u.mean_journal_score,
            "coverage": u.coverage_ratio,
            "n_scored": u.n_scored,
            "n_total": u.n_total,
        } for method, units in units_by_method.items() for u in units]))
        export.register(figures.assessment_scatter(
            {method: assess.eligible_units(units, options.min_coverage) for method, units in units_by_method.items()},
            export.path_for("assessment.svg"),
        ))
        rows = assess.correlate_methods(units_by_method, options.min_coverage)
        export.export_csv("correlation.csv", pd.DataFrame([r.model_dump() for r in rows]))
        for r in rows:
            value = "undefined" if r.pearson is None else f"{r.pearson:.2f}"
            self.messages.append(f"{r.method}: Pearson correlation over {r.units} units: {value}")

    def _report(self, options: RunOptions, export: ExportService) -> None:
        C = self._matrix(options)
        pairs = stigler.pairs_from_matrix(C)
        fit = self._fit(C, options).recentered()
        qv = quasivar.quasi_variances(fit)
        path = get_ranking_lasso().trace_path(pairs, fit, options.points)
        point = path.selected_point

        labels = list(fit.labels)
        intervals = quasivar.comparison_intervals(qv, fit, options.level)
        table = pd.DataFrame({
            "journal": labels,
            "SM": np.asarray(fit.mu),
            "QSE": np.asarray(qv.qse),
            "SM_grouped": np.asarray(point.mu),
            "lower": intervals[:, 0],
            "upper": intervals[:, 1],
            "rank": descriptives.rank_values(list(fit.mu), labels),
        }).sort_values("rank", kind="stable")
        export.export_csv("report.csv", table)

        methods: Dict[str, Dict[str, Optional[float]]] = {
            "SM": dict(zip(labels, map(float, fit.mu))),
            "SMgrouped": dict(zip(labels, map(float, point.mu))),
        }
        if options.articles is not None:
            result = eigenfactor.eigenfactor_scores(
                C, eigenfactor.load_article_counts(options.articles), damping=options.damping,
                tol=self.settings.eigen_tol, max_iter=self.settings.eigen_max_iter,
            )
            methods["EF"] = dict(zip(result.labels, map(float, result.ef)))
            methods["AI"] = {j: (None if np.isnan(v) else float(v)) for j, v in zip(result.labels, result.ai)}
        if options.yearly is not None:
            yearly, own = self._yearly(options)
            for kind in ("II", "IF", "IFno", "IF5"):
                scores = descriptives.index_table(yearly.values(), ImpactIndex(kind), own)
                methods[kind] = {s.journal: s.value for s in scores}
        ranks = emit_rank_table(methods, labels)
        export.export_csv("rank_table.csv", ranks)
        values = emit_rank_table(methods, labels, include_values=True)
        export.export_csv("method_scores.csv", values[[c for c in values.columns if not c.startswith("rank_")]])

        export.export_excel(
            "report.xlsx",
            {"Scores": table, "Rankings": ranks},
            {
                "Journals": fit.n,
                "Pairs exchanging citations": fit.m,
                "Dispersion": None if fit.phi is None else round(fit.phi, 4),
                "Worst quasi-variance error": round(qv.worst_rel_error, 4),
                "TIC groups": point.p,
                "Selected bound": point.s,
                "Methods ranked": ", ".join(get_method_display_name(m) for m in methods),
            },
        )
        export.register(figures.centipede_plot(fit, qv, export.path_for("centipede.svg")))
        export.register(figures.path_plot(path, export.path_for("lasso_path.svg")))
        self.messages.append(
            f"{fit.n} journals, phi = {'unavailable' if fit.phi is None else f'{fit.phi:.2f}'}, "
            f"{point.p} groups selected by TIC"
        )


def get_command_runner() -> CommandRunner:
    """Get a command runner bound to the current settings."""
    return CommandRunner()
