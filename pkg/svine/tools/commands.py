"""
Batch commands behind the CLI. Each returns an exit status (or None for
success) and raises library errors for the registry to map.
"""

import os
from typing import List, Optional, Sequence

import numpy as np
import pandas as pd
from scipy import special

from svine.bridge.task_runner import TaskRunner
from svine.core.errors import ConvergenceError, InputError
from svine.core.inference import FitReport, aic_table, fit_copula, fit_full
from svine.core.linear_oracle import KpacfKind
from svine.core.logging_utils import get_logger
from svine.core.margins import MarginKind
from svine.core.paircopula import Family
from svine.core.process import convergence_experiment, innovations, simulate
from svine.tools.io_utils import RunManifest, manifest_path, read_series, write_frame, write_json
from svine.tools.spec_files import ModelSpecFile

logger = get_logger("commands", "commands.log")

DEFAULT_SEMI_EMPIRICAL_LAGS = 10


def _stem(out_path: str) -> str:
    return os.path.splitext(out_path)[0]


def cmd_simulate(
    spec_path: str,
    n: int,
    seed: int,
    out_path: str,
    truncation: Optional[int] = None,
    family: Optional[str] = None,
    negative_rule: Optional[str] = None,
) -> int:
    """Simulate a path from a spec and write it as CSV."""
    if n < 1:
        raise InputError(f"n must be >= 1, got {n}")
    spec = ModelSpecFile.load(spec_path).with_overrides(family, negative_rule, truncation)
    model = spec.model()
    path = simulate(model, n, seed)
    write_frame(path.to_frame(), out_path)

    manifest = RunManifest(
        "simulate",
        {"spec": spec_path, "n": n, "truncation": truncation, "family": family, "negative_rule": negative_rule},
        seed=seed,
    )
    manifest.add_input(spec_path)
    manifest.add_output(out_path)
    manifest.write(manifest_path(out_path))
    print(f"✅ Simulated n={n} seed={seed} truncation={model.p} families={model.seq.families()} -> {out_path}")
    return 0


def cmd_fit(
    data_path: str,
    spec_template_path: str,
    out_path: str,
    family: Optional[str] = None,
    negative_rule: Optional[str] = None,
    truncation: Optional[int] = None,
    semi_empirical_lags: int = DEFAULT_SEMI_EMPIRICAL_LAGS,
) -> int:
    """
    Fit the template to a data series.

    Data strictly inside (0, 1) with no margin in the template are treated as
    copula-scale observations; otherwise the template's margin kind (empirical
    by default) is fitted first. Writes the report JSON, residual CSV and
    semi-empirical kpacf CSV; on non-convergence the report is still written.
    """
    x = read_series(data_path)
    if x.size < 2:
        raise InputError(f"need at least 2 observations to fit, got {x.size}")
    spec = ModelSpecFile.load(spec_template_path).with_overrides(family, negative_rule, truncation)
    if spec.kpacf is None:
        raise InputError("fitting needs a kpacf template, not an explicit sequence")
    fam = spec.families[0]
    kwargs = {
        "negative_rotation": spec.negative_rotation,
        "positive_rotation": spec.positive_rotation,
        "semi_empirical_lags": min(semi_empirical_lags, x.size - 1),
    }
    copula_scale = spec.margin_kind is None and np.all((x > 0.0) & (x < 1.0))
    try:
        if copula_scale:
            report = fit_copula(x, spec.kpacf, fam, spec.negative_rule, spec.truncation_lag, **kwargs)
        else:
            kind = spec.margin_kind or MarginKind.EMPIRICAL
            report = fit_full(x, kind, spec.kpacf, fam, spec.negative_rule, spec.truncation_lag, **kwargs)
    except ConvergenceError as e:
        if isinstance(e.report, FitReport):
            logger.warning("Writing non-converged fit report to %s", out_path)
            _write_fit_outputs(e.report, data_path, spec_template_path, out_path)
        raise
    _write_fit_outputs(report, data_path, spec_template_path, out_path)
    print(fit_summary(report, out_path))
    return 0


def fit_summary(report: FitReport, out_path: str) -> str:
    """One-line fit summary; copula-only figures, plus margin-inclusive ones for a parametric margin."""
    line = (
        f"✅ Fitted {report.family.value} {report.spec.kind.value} kpacf: "
        f"params={report.n_params} loglik={report.loglik:.4f} aic={report.aic:.4f}"
    )
    if report.margin_fit is not None and report.margin_fit.n_params > 0 and report.total_aic is not None:
        line += f" | with {report.margin_fit.kind.value} margin: params={report.total_n_params} aic={report.total_aic:.4f}"
    return f"{line} -> {out_path}"


def _write_fit_outputs(report: FitReport, data_path: str, spec_path: str, out_path: str):
    write_json(report.to_dict(), out_path)
    stem = _stem(out_path)
    res_path = write_frame(
        pd.DataFrame({"z": report.residuals_z, "z_normal": report.residuals_normal}), stem + "_residuals.csv"
    )
    outputs = [out_path, res_path]
    if report.semi_empirical_kpacf:
        K = len(report.semi_empirical_kpacf)
        model_tau = report.model().seq.kendall_taus()
        model_tau = np.concatenate([model_tau, np.zeros(max(0, K - model_tau.size))])[:K]
        kp_path = write_frame(
            pd.DataFrame(
                {"k": np.arange(1, K + 1), "tau_semi_empirical": report.semi_empirical_kpacf, "tau_model": model_tau}
            ),
            stem + "_kpacf.csv",
        )
        outputs.append(kp_path)
    manifest = RunManifest("fit", {"data": data_path, "spec": spec_path, "family": report.family.value})
    manifest.add_input(data_path)
    manifest.add_input(spec_path)
    for path in outputs:
        manifest.add_output(path)
    manifest.write(manifest_path(out_path))


def cmd_experiment(
    spec_path: str,
    n: int,
    seed: int,
    out_dir: str,
    families: Optional[Sequence[str]] = None,
    truncation: Optional[int] = None,
) -> int:
    """Run the filter-convergence experiment for each family of a spec, one CSV per family."""
    if n < 2:
        raise InputError(f"n must be >= 2, got {n}")
    spec = ModelSpecFile.load(spec_path).with_overrides(truncation=truncation)
    fams: List[Optional[Family]] = [Family(f) for f in families] if families else list(spec.families)
    if spec.sequence is not None:
        fams = [None]
    z = innovations(seed, n)
    os.makedirs(out_dir, exist_ok=True)

    def _run(family: Optional[Family]) -> str:
        model = spec.model(family)
        table = convergence_experiment(model.seq, n, seed, z=z)
        name = family.value if family is not None else "sequence"
        return write_frame(table, os.path.join(out_dir, f"experiment_{name}.csv"))

    paths = TaskRunner().map(_run, fams, label="experiment")
    manifest = RunManifest(
        "experiment",
        {"spec": spec_path, "n": n, "families": [f.value if f else "sequence" for f in fams], "truncation": truncation},
        seed=seed,
    )
    manifest.add_input(spec_path)
    for path in paths:
        manifest.add_output(path)
    manifest.write(manifest_path(out_dir))
    print(f"✅ Experiment n={n} seed={seed}: wrote {len(paths)} table(s) to {out_dir}")
    return 0


def cmd_residual_qq(report_path: str, out_path: str) -> int:
    """Write (theoretical normal quantile, sorted residual) pairs from a fit report."""
    if not os.path.isfile(report_path):
        raise InputError(f"Report file not found: {report_path}")
    with open(report_path, "r", encoding="utf-8") as f:
        report = FitReport.from_json(f.read())
    res = np.sort(np.asarray(report.residuals_normal, dtype=float))
    if res.size == 0:
        raise InputError(f"Report {report_path} has no residuals")
    n = res.size
    theoretical = special.ndtri(np.arange(1, n + 1) / (n + 1))
    write_frame(pd.DataFrame({"theoretical": theoretical, "sample": res}), out_path)
    manifest = RunManifest("residual-qq", {"report": report_path})
    manifest.add_input(report_path)
    manifest.add_output(out_path)
    manifest.write(manifest_path(out_path))
    print(f"✅ QQ data for {n} residuals -> {out_path}")
    return 0


def kpacf_table(spec: ModelSpecFile) -> pd.DataFrame:
    """Kendall partial autocorrelations of a spec (and the pair copulas realizing them)."""
    model = spec.model()
    taus = model.seq.kendall_taus()
    data = {"k": np.arange(1, taus.size + 1), "tau": taus}
    if spec.kpacf is not None and spec.kpacf.kind is not KpacfKind.EXPLICIT:
        data["alpha"] = spec.kpacf.replace(horizon=max(taus.size, 1)).pacf()[: taus.size]
    data["copula"] = [
        f"{c.family.value}({c.to_dict()['param']}, rot={c.rotation})" for c in model.seq.copulas
    ]
    return pd.DataFrame(data)


def cmd_kpacf(spec_path: str, out_path: Optional[str] = None, truncation: Optional[int] = None) -> int:
    """Print (and optionally write) the kpacf table of a spec."""
    spec = ModelSpecFile.load(spec_path).with_overrides(truncation=truncation)
    table = kpacf_table(spec)
    print(table.to_string(index=False))
    if out_path:
        write_frame(table, out_path)
        manifest = RunManifest("kpacf", {"spec": spec_path, "truncation": truncation})
        manifest.add_input(spec_path)
        manifest.add_output(out_path)
        manifest.write(manifest_path(out_path))
    return 0


def cmd_compare(report_paths: Sequence[str], out_path: Optional[str] = None) -> int:
    """Print the AIC comparison table of several fit reports."""
    if not report_paths:
        raise InputError("compare needs at least one report")
    reports = {}
    for path in report_paths:
        if not os.path.isfile(path):
            raise InputError(f"Report file not found: {path}")
        with open(path, "r", encoding="utf-8") as f:
            reports[os.path.basename(path)] = FitReport.from_json(f.read())
    table = aic_table(reports)
    print(table.to_string(index=False))
    if out_path:
        write_frame(table, out_path)
        manifest = RunManifest("compare", {"reports": list(report_paths)})
        for path in report_paths:
            manifest.add_input(path)
        manifest.add_output(out_path)
        manifest.write(manifest_path(out_path))
    return 0
