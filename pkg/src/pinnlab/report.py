"""Aggregate the study CSVs in an output directory into ``report.md`` plus figures."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from . import io
from .experiments import fit_loglog_slope

BOUND_SLACK = 1e-12


def _perturbation_section(rows):
    violations = sum(r["d_total"] > r["bound"] + BOUND_SLACK for r in rows)
    small = [r["ratio"] for r in rows if r["delta"] <= 0.05]
    return [
        "## Deterministic perturbation bound",
        "",
        f"- perturbation amplitudes: {len(rows)} "
        f"(delta from {rows[0]['delta']:.3g} to {rows[-1]['delta']:.3g})",
        f"- bound violations: {violations}",
        f"- max tightness ratio |dL|/bound: {max(r['ratio'] for r in rows):.4g}",
        f"- max tightness ratio for delta <= 0.05: {max(small):.4g}" if small else
        "- no amplitudes at or below 0.05",
        "- reference (published): deviation from bound about 5% for delta <= 0.05",
        "",
        "| delta | measured | bound | ratio |",
        "|---|---|---|---|",
        *(f"| {r['delta']:.4g} | {r['d_total']:.4g} | {r['bound']:.4g} | {r['ratio']:.4g} |" for r in rows),
        "",
    ], violations


def _concentration_section(agg):
    fit = fit_loglog_slope([(a["n_f"], a["std"]) for a in agg]) if len(agg) >= 2 else None
    decreasing = all(b["std"] < a["std"] for a, b in zip(agg, agg[1:]))
    lines = [
        "## Residual loss concentration",
        "",
        f"- std of L_f decreases strictly across the grid: {'yes' if decreasing else 'no'}",
        f"- std at N_f={agg[0]['n_f']}: {agg[0]['std']:.4g}; at N_f={agg[-1]['n_f']}: {agg[-1]['std']:.4g}",
    ]
    if fit is not None:
        lines.append(f"- log-log slope of std vs N_f: {fit.slope:.4f} (r^2 {fit.r_squared:.3f}); "
                     "predicted -0.5")
    lines += [
        "- reference (published): std 0.024 at N_f=20 to 0.006 at N_f=200",
        "",
        "| N_f | mean L_f | std L_f |",
        "|---|---|---|",
        *(f"| {a['n_f']} | {a['mean']:.4g} | {a['std']:.4g} |" for a in agg),
        "",
    ]
    return lines, fit


def _generalization_section(rows):
    fit = fit_loglog_slope([(r["l_s"], r["c0_error"]) for r in rows]) if len(rows) >= 2 else None
    lines = ["## Sobolev-to-uniform generalization", "", f"- trained nets: {len(rows)}"]
    if fit is not None:
        lines.append(f"- log-log slope of C0 error vs L_s: {fit.slope:.4f} (r^2 {fit.r_squared:.3f}); "
                     "predicted 0.5")
    lines += [
        "- reference (published): slope about 0.51",
        "",
        "| N_f | seed | L_s | C0 error |",
        "|---|---|---|---|",
        *(f"| {r['n_f']} | {r['seed']} | {r['l_s']:.4g} | {r['c0_error']:.4g} |" for r in rows),
        "",
    ]
    return lines, fit


def write_report(out_dir, figures: bool = True) -> Path:
    out_dir = Path(out_dir)
    sources = {name: out_dir / f"{name}.csv"
               for name in ("perturbation", "concentration_agg", "generalization")}
    if not any(p.exists() for p in sources.values()):
        raise FileNotFoundError(f"no study CSVs found in {out_dir}")
    if figures:
        from . import figures as fig

    lines = ["# PINN stability report", ""]
    summary = []
    if sources["perturbation"].exists():
        rows = io.read_csv(sources["perturbation"])
        section, violations = _perturbation_section(rows)
        lines += section
        summary.append(f"| deterministic perturbation bound | violations: {violations} |")
        if figures:
            fig.perturbation_figure(rows, out_dir / "perturbation.png")
    if sources["concentration_agg"].exists():
        agg = io.read_csv(sources["concentration_agg"])
        section, fit = _concentration_section(agg)
        lines += section
        summary.append(f"| residual loss concentration | slope: {fit.slope:.4f} |" if fit else
                       "| residual loss concentration | slope: n/a |")
        if figures:
            fig.concentration_figure(agg, fit, out_dir / "concentration.png")
    if sources["generalization"].exists():
        rows = io.read_csv(sources["generalization"])
        section, fit = _generalization_section(rows)
        lines += section
        summary.append(f"| Sobolev-to-uniform generalization | slope: {fit.slope:.4f} |" if fit else
                       "| Sobolev-to-uniform generalization | slope: n/a |")
        if figures and rows:
            fig.generalization_figure(rows, fit, out_dir / "generalization.png")
    head = ["## Summary", "", "| study | outcome |", "|---|---|", *summary, ""]
    path = out_dir / "report.md"
    path.write_text("\n".join(lines[:2] + head + lines[2:]))
    return path
