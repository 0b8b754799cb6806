"""Text tables, the per-fold CSV and the time-versus-sensitivity CSV."""

from __future__ import annotations

import csv
import io

REPORT_COLUMNS = ["method", "fold", "tp", "fn", "tn", "fp", "acc", "sens", "spec",
                  "ci_acc", "ci_sens", "ci_spec"]
BENCH_COLUMNS = ["method", "mean_seconds", "min_seconds", "max_seconds", "sensitivity"]


def _rate(v):
    return "" if v is None else f"{v:.4f}"


def _ci(v):
    return "" if v is None else f"{v:.3f}"


def _row(method, fold, cm, rep):
    return [method, fold, cm.tp, cm.fn, cm.tn, cm.fp,
            _rate(rep.accuracy), _rate(rep.sensitivity), _rate(rep.specificity),
            _ci(rep.ci_accuracy), _ci(rep.ci_sensitivity), _ci(rep.ci_specificity)]


def report_csv(reports, timing=False):
    """Per-fold rows plus an ``all`` row from the cumulative matrix.

    Rates carry 4 decimals and half-widths 3. ``score_seconds`` is appended
    only with ``timing=True`` since wall-clock values differ between runs.
    """
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(REPORT_COLUMNS + (["score_seconds"] if timing else []))
    for r in reports:
        for f in r.folds:
            row = _row(r.method, f.fold, f.confusion, f.report)
            w.writerow(row + ([f"{f.score_seconds:.6g}"] if timing else []))
        row = _row(r.method, "all", r.confusion, r.overall)
        w.writerow(row + ([f"{r.mean_score_seconds:.6g}"] if timing else []))
    return buf.getvalue()


def _pm(value, ci):
    if value is None:
        return "n/a"
    return f"{value:.4f} ± {ci:.3f}"


def report_text(reports, class_names=("negative", "positive"), positive_class=1):
    """Summary table (rate ± 95% half-width) followed by the cumulative
    confusion matrix of each method."""
    neg = ", ".join(n for i, n in enumerate(class_names) if i != positive_class) or "negative"
    pos = class_names[positive_class] if positive_class < len(class_names) else "positive"
    head = ["Method", "Accuracy", "Sensitivity", "Specificity"]
    rows = [[r.method, _pm(r.overall.accuracy, r.overall.ci_accuracy),
             _pm(r.overall.sensitivity, r.overall.ci_sensitivity),
             _pm(r.overall.specificity, r.overall.ci_specificity)] for r in reports]
    widths = [max(len(x[i]) for x in [head] + rows) for i in range(4)]
    fmt = "  ".join(f"{{:<{w}}}" for w in widths)
    lines = [f"Cumulative performance over {len(reports[0].folds)} folds (95% CI)", ""]
    lines.append(fmt.format(*head))
    lines.append("  ".join("-" * w for w in widths))
    lines += [fmt.format(*row) for row in rows]
    for r in reports:
        cm = r.confusion
        lines += ["", f"Cumulative confusion matrix: {r.method}",
                  f"{'':>22}{'predicted ' + neg:>24}{'predicted ' + pos:>24}",
                  f"{'actual ' + neg:>22}{cm.tn:>24}{cm.fp:>24}",
                  f"{'actual ' + pos:>22}{cm.fn:>24}{cm.tp:>24}"]
    return "\n".join(lines) + "\n"


def benchmark_csv(rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(BENCH_COLUMNS)
    for row in rows:
        sens = row["sensitivity"]
        w.writerow([row["method"], f"{row['mean_seconds']:.6g}", f"{row['min_seconds']:.6g}",
                    f"{row['max_seconds']:.6g}", "" if sens is None else f"{sens:.6g}"])
    return buf.getvalue()


def read_benchmark_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != BENCH_COLUMNS:
            raise ValueError(f"unexpected benchmark columns {reader.fieldnames}")
        out = []
        for rec in reader:
            out.append({
                "method": rec["method"],
                **{k: float(rec[k]) for k in BENCH_COLUMNS[1:4]},
                "sensitivity": float(rec["sensitivity"]) if rec["sensitivity"] else None,
            })
    return out


def predictions_csv(report):
    """Per-sample predictions (dataset row index, fold, predicted label)."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["method", "index", "fold", "predicted"])
    rows = []
    for f in report.folds:
        rows += [(int(i), f.fold, int(p)) for i, p in zip(f.test_index, f.predictions)]
    for i, fold, p in sorted(rows):
        w.writerow([report.method, i, fold, p])
    return buf.getvalue()
