"""CSV and markdown writers for benchmark runs and rank statistics."""
from __future__ import annotations

import csv
import io

import numpy as np
from scipy import stats as sps

from .evaluation import METRIC_FIELDS
from .stats import average_ranks, friedman, nemenyi_cd, sign_test, win_tie_loss


def fmt(x):
    """Shortest round-trip text for a number, blank for ``None``."""
    if x is None:
        return ""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def _csv(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


CELL_HEADER = ("dataset", "variant", "h_l", "C", "mu", "theta", *METRIC_FIELDS, "auc_std", "n_folds")


def cell_rows(dataset, variant, result):
    for r in result.table:
        s = r.summary()
        c = r.cell
        yield [dataset, variant, fmt(c.h_l), fmt(c.C), fmt(c.mu), fmt(c.theta),
               *(fmt(s[k]) for k in METRIC_FIELDS), fmt(s["auc_std"]), str(len(r.folds))]


def results_csv(runs):
    """``runs``: list of ``(dataset, variant, GridResult)``."""
    rows = [row for ds, v, res in runs for row in cell_rows(ds, v, res)]
    return _csv(CELL_HEADER, rows)


SUMMARY_HEADER = ("dataset", "variant", "h_l", "C", "mu", "theta", *METRIC_FIELDS, "auc_std", "nested_auc")


def summary_csv(runs):
    rows = []
    for ds, v, res in runs:
        s = res.best.summary()
        c = res.best_cell
        rows.append([ds, v, fmt(c.h_l), fmt(c.C), fmt(c.mu), fmt(c.theta),
                     *(fmt(s[k]) for k in METRIC_FIELDS), fmt(s["auc_std"]), fmt(res.nested_auc)])
    return _csv(SUMMARY_HEADER, rows)


def auc_matrix(runs):
    """Best AUCs as ``(datasets, variants, K x d array)`` in first-seen order."""
    datasets, variants = [], []
    for ds, v, _ in runs:
        if ds not in datasets:
            datasets.append(ds)
        if v not in variants:
            variants.append(v)
    A = np.full((len(datasets), len(variants)), np.nan)
    for ds, v, res in runs:
        A[datasets.index(ds), variants.index(v)] = res.best_auc
    return datasets, variants, A


def _num(x, digits=4):
    return "-" if x is None else f"{x:.{digits}g}"


def summary_md(runs):
    """Per-dataset best AUC with its hyperparameters, then average AUC and rank."""
    datasets, variants, A = auc_matrix(runs)
    best = {(ds, v): res for ds, v, res in runs}
    lines = ["| Dataset | " + " | ".join(f"{v} (AUC, h_l) (C, mu, theta)" for v in variants) + " |",
             "|---" * (len(variants) + 1) + "|"]
    for ds in datasets:
        cells = []
        for v in variants:
            res = best.get((ds, v))
            if res is None:
                cells.append("")
                continue
            c = res.best_cell
            theta = None if res.variant not in ("GE_IFRVFL_CIL_1", "GE_IFRVFL_CIL_2") else c.theta
            cells.append(f"({res.best_auc:.4f}, {c.h_l}) ({_num(c.C)}, {_num(c.mu)}, {_num(theta)})")
        lines.append(f"| {ds} | " + " | ".join(cells) + " |")
    lines.append("| Average AUC | " + " | ".join(f"{m:.4f}" for m in np.nanmean(A, axis=0)) + " |")
    if np.all(np.isfinite(A)) and len(variants) >= 2:
        rt = average_ranks(A)
        lines.append("| Average Rank | " + " | ".join(f"{r:.4f}" for r in rt.avg_ranks) + " |")
    return "\n".join(lines) + "\n"


def ranks_csv(datasets, models, aucs):
    rt = average_ranks(aucs)
    rows = [[ds, *(fmt(r) for r in row)] for ds, row in zip(datasets, rt.ranks)]
    rows.append(["average", *(fmt(r) for r in rt.avg_ranks)])
    return _csv(("dataset", *models), rows)


def stats_md(datasets, models, aucs, reference=None):
    """Friedman, Nemenyi and sign-test report for a K x d AUC matrix."""
    aucs = np.asarray(aucs, dtype=float)
    rt = average_ranks(aucs)
    K, d = aucs.shape
    out = ["## Average ranks", "", "| Model | Average AUC | Average rank |", "|---|---|---|"]
    for m, a, r in zip(models, aucs.mean(axis=0), rt.avg_ranks):
        out.append(f"| {m} | {a:.4f} | {r:.4f} |")
    out.append("")
    if K >= 2:
        fr = friedman(rt.avg_ranks, K)
        p_chi = sps.chi2.sf(fr.chi2, d - 1)
        out += ["## Friedman test", "",
                f"- chi2_F = {fr.chi2:.4f} (df = {d - 1}, p = {p_chi:.3g})"]
        if fr.ff_infinite:
            out.append("- F_F = inf (chi2_F reaches K(d-1))")
        else:
            p_ff = sps.f.sf(fr.ff, d - 1, (d - 1) * (K - 1))
            out.append(f"- F_F = {fr.ff:.4f} (df = {d - 1}, {(d - 1) * (K - 1)}; p = {p_ff:.3g})")
        out.append("")
    else:
        out += ["## Friedman test", "", "- needs at least two datasets", ""]
    if 2 <= d <= 10:
        out += ["## Nemenyi test", ""]
        for alpha in (0.05, 0.10):
            out.append(f"- CD(alpha={alpha:.2f}) = {nemenyi_cd(d, K, alpha):.4f}")
        cd = nemenyi_cd(d, K, 0.05)
        ref = int(np.argmin(rt.avg_ranks)) if reference is None else models.index(reference)
        worse = [m for j, m in enumerate(models) if rt.avg_ranks[j] - rt.avg_ranks[ref] > cd]
        out.append(f"- significantly worse than {models[ref]} at 0.05: {', '.join(worse) or 'none'}")
        out.append("")
    ref = int(np.argmin(rt.avg_ranks)) if reference is None else models.index(reference)
    out += [f"## Sign test ({models[ref]} against each model)", "",
            "| Model | Wins | Ties | Losses | Threshold | Significant |", "|---|---|---|---|---|---|"]
    for j, m in enumerate(models):
        if j == ref:
            continue
        w, t, l = win_tie_loss(aucs[:, ref], aucs[:, j])
        st = sign_test(w, t, l)
        out.append(f"| {m} | {w} | {t} | {l} | {st.threshold:.2f} | {'yes' if st.significant else 'no'} |")
    return "\n".join(out) + "\n"


def noise_tables(level_runs):
    """Mean best AUC per variant and noise level.

    ``level_runs`` maps level to a runs list. Returns ``(csv_text, md_text)``.
    """
    levels = sorted(level_runs)
    variants = []
    for runs in level_runs.values():
        for _, v, _ in runs:
            if v not in variants:
                variants.append(v)
    M = np.full((len(variants), len(levels)), np.nan)
    for j, lv in enumerate(levels):
        _, vs, A = auc_matrix(level_runs[lv])
        for i, v in enumerate(vs):
            M[variants.index(v), j] = np.nanmean(A[:, i])
    avg = np.nanmean(M, axis=1)
    header = ("variant", *(f"{lv:g}" for lv in levels), "average")
    rows = [[v, *(fmt(x) for x in M[i]), fmt(avg[i])] for i, v in enumerate(variants)]
    md = ["| Model | " + " | ".join(f"{100 * lv:g}%" for lv in levels) + " | Average |",
          "|---" * (len(levels) + 2) + "|"]
    for i, v in enumerate(variants):
        md.append(f"| {v} | " + " | ".join(f"{x:.4f}" for x in M[i]) + f" | {avg[i]:.4f} |")
    return _csv(header, rows), "\n".join(md) + "\n"


def read_auc_csv(text):
    """Parse ``dataset,model1,model2,...`` rows into ``(datasets, models, K x d)``."""
    rows = [r for r in csv.reader(io.StringIO(text)) if r and any(c.strip() for c in r)]
    if len(rows) < 2:
        raise ValueError("AUC table needs a header and at least one row")
    models = [m.strip() for m in rows[0][1:]]
    datasets, values = [], []
    for i, r in enumerate(rows[1:], start=2):
        if len(r) != len(models) + 1:
            raise ValueError(f"line {i}: expected {len(models) + 1} fields, got {len(r)}")
        datasets.append(r[0].strip())
        try:
            values.append([float(c) for c in r[1:]])
        except ValueError as exc:
            raise ValueError(f"line {i}: {exc}") from exc
    A = np.array(values)
    if not np.all(np.isfinite(A)):
        raise ValueError("AUC table contains non-finite values")
    return datasets, models, A


__all__ = ["auc_matrix", "fmt", "noise_tables", "ranks_csv", "read_auc_csv", "results_csv",
           "stats_md", "summary_csv", "summary_md"]

