import logging
import os
from datetime import datetime
from typing import Dict, List, Optional, Sequence

import pandas as pd

import config
from bench_harness import BenchReport, attribute_overhead, decrypt_encrypt_ratio, scaling_fits

logger = logging.getLogger(__name__)


class ReportExporter:
    """Write benchmark reports as CSV files and xlsx workbooks"""

    def __init__(self, export_dir: str = config.EXPORT_DIR):
        self.export_dir = export_dir

    def _default_path(self, stem: str, suffix: str) -> str:
        os.makedirs(self.export_dir, exist_ok=True)
        timestamp = datetime.now().strftime("%Y%m%d_%H%M%S")
        return os.path.join(self.export_dir, f"{stem}_{timestamp}.{suffix}")

    def export_csv(self, report: BenchReport, filepath: Optional[str] = None) -> str:
        filepath = report.write_csv(filepath or self._default_path(report.experiment, "csv"))
        logger.info("%s report written to %s", report.experiment, filepath)
        return filepath

    def export_workbook(self, reports: Sequence[BenchReport], filepath: Optional[str] = None) -> str:
        """One sheet per experiment plus a Summary sheet"""
        filepath = filepath or self._default_path("bench", "xlsx")

        with pd.ExcelWriter(filepath, engine="openpyxl") as writer:
            for report in reports:
                report.to_frame().to_excel(writer, sheet_name=report.experiment[:31], index=False)

            summary_df = pd.DataFrame(self._create_summary_data(reports))
            summary_df.to_excel(writer, sheet_name="Summary", index=False)

            by_name = {r.experiment: r for r in reports}
            if "encrypt-time" in by_name and "decrypt-time" in by_name:
                ratio_df = decrypt_encrypt_ratio(by_name["encrypt-time"], by_name["decrypt-time"])
                ratio_df.to_excel(writer, sheet_name="Decrypt_vs_Encrypt", index=False)

            environments = sorted({r.environment for r in reports if r.environment})
            pd.DataFrame({"environment": environments}).to_excel(writer, sheet_name="Environment", index=False)

        logger.info("workbook with %d reports written to %s", len(reports), filepath)
        return filepath

    def _create_summary_data(self, reports: Sequence[BenchReport]) -> List[Dict]:
        summary = []
        for report in reports:
            if report.experiment == "queries":
                for row in report.rows:
                    summary.append({
                        "experiment": "queries",
                        "series": f"{row['variant']} {row['query']}",
                        "mean_ms": row["mean_ms"],
                        "std_dev": row["std_dev"],
                        "reference_ms": row["reference_ms"],
                    })
                continue

            for fit in scaling_fits(report):
                group_axis = "plaintext_kb" if fit["x"] == "attrs" else "attrs"
                summary.append({
                    "experiment": report.experiment,
                    "series": f"{fit['metric']} vs {fit['x']} at {group_axis}={fit[group_axis]}",
                    "slope": fit["slope"],
                    "intercept": fit["intercept"],
                    "r_squared": fit["r_squared"],
                })

            if report.experiment == "size":
                for row in attribute_overhead(report):
                    summary.append({
                        "experiment": "size",
                        "series": f"bytes per attribute at {row['plaintext_kb']} KB",
                        "slope": row["bytes_per_attribute"],
                    })
        return summary
