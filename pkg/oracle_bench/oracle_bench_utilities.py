import json
import math
from io import BytesIO, StringIO

import pandas as pd

from decomposer.decomposer_utilities import DecomposerUtilities


def _finite_or_none(v):
    return v if v is None or math.isfinite(v) else None


class OracleBenchUtilities:
    def __init__(self):
        self.decomposer_utils = DecomposerUtilities()


    def report_to_dict(self, report, cfg=None):
        """Machine-readable Monte Carlo report; unmatched RMSE entries become null."""
        return {
            "n_samples": report.n_samples,
            "snr_db": report.snr_db if math.isfinite(report.snr_db) else None,
            "trials": report.trials,
            "truth": [self.decomposer_utils.tone_to_dict(t) for t in report.truth],
            "config": cfg.to_dict() if cfg is not None else None,
            "frequency_rmse": [_finite_or_none(v) for v in report.frequency_rmse],
            "frequency_rmse_bins": [_finite_or_none(v) for v in report.frequency_rmse_bins],
            "amplitude_rmse": [_finite_or_none(v) for v in report.amplitude_rmse],
            "phase_rmse": [_finite_or_none(v) for v in report.phase_rmse],
            "matched_counts": list(report.matched_counts),
            "detection_successes": report.detection_successes,
            "stage_times": dict(report.stage_times),
            "per_trial": [
                {k: list(v) if isinstance(v, tuple) else v for k, v in row.items()}
                for row in report.per_trial
            ],
        }


    def per_trial_frame(self, report):
        """One row per trial, one error column per truth tone and parameter."""
        records = []
        for row in report.per_trial:
            rec = {k: row[k] for k in ("trial", "seed", "n_estimates", "stop_reason", "detected")}
            for i in range(len(report.truth)):
                rec[f"frequency_error_{i}"] = row["frequency_errors"][i]
                rec[f"amplitude_error_{i}"] = row["amplitude_errors"][i]
                rec[f"phase_error_{i}"] = row["phase_errors"][i]
            records.append(rec)
        return pd.DataFrame.from_records(records)


    def summary_frame(self, report):
        bw_rmse = report.frequency_rmse_bins
        return pd.DataFrame({
            "tone": range(len(report.truth)),
            "frequency": [t.frequency for t in report.truth],
            "matched": report.matched_counts,
            "frequency_rmse_bins": bw_rmse,
            "amplitude_rmse": report.amplitude_rmse,
            "phase_rmse": report.phase_rmse,
        })


    def summary_table(self, report):
        """Plain-text table for terminals and logs."""
        header = (
            f"N={report.n_samples}  SNR={report.snr_db} dB  trials={report.trials}  "
            f"detections={report.detection_successes}/{report.trials}\n"
        )
        return header + self.summary_frame(report).to_string(index=False, float_format=lambda v: f"{v:.6g}")


    def scaling_frame(self, points):
        return pd.DataFrame([
            {
                "n_samples": p.n_samples,
                "wall_time": p.wall_time,
                "evaluations": p.evaluations,
                "counted_evaluations": p.counted_evaluations,
            }
            for p in points
        ])


    # ------------ file formats -----------------

    def report_json(self, report, cfg=None):
        return json.dumps(self.report_to_dict(report, cfg), indent=2, allow_nan=False) + "\n"


    def report_csv(self, report):
        buf = StringIO()
        self.per_trial_frame(report).to_csv(buf, index=False)
        return buf.getvalue()


    def report_xlsx(self, report):
        """Return BytesIO of a workbook with a summary sheet and a per-trial sheet."""
        out = BytesIO()
        with pd.ExcelWriter(out, engine="openpyxl") as writer:
            self.summary_frame(report).to_excel(writer, sheet_name="summary", index=False)
            self.per_trial_frame(report).to_excel(writer, sheet_name="trials", index=False)
        out.seek(0)
        return out


    def write_report(self, report, path, fmt="json", cfg=None):
        if fmt == "json":
            with open(path, "w", encoding="utf-8") as f:
                f.write(self.report_json(report, cfg))
        elif fmt == "csv":
            with open(path, "w", encoding="utf-8", newline="") as f:
                f.write(self.report_csv(report))
        elif fmt == "xlsx":
            with open(path, "wb") as f:
                f.write(self.report_xlsx(report).getvalue())
        else:
            raise ValueError("fmt must be 'json', 'csv' or 'xlsx'")
