"""
Report Generator - Emit benchmark tables and error curves

Bench results are written as plain data: one CSV per table, one CSV per set
of mean error curves, a JSON document with everything, and a Markdown summary
for reading. Plotting is left to external tools.
"""

import csv
import json
import os
from datetime import datetime
from typing import Any, Dict, List, Optional

import numpy as np
from rich.console import Console
from rich.table import Table


class ReportGenerator:
    """Write bench tables and curves to an output directory"""

    @staticmethod
    def _ensure_dir(path: str) -> None:
        directory = os.path.dirname(path)
        if directory:
            os.makedirs(directory, exist_ok=True)

    @staticmethod
    def write_table_csv(rows: List[Dict[str, Any]], path: str) -> Optional[str]:
        """
        Write table rows to CSV, columns in first-row order.

        Args:
            rows: Table rows as dicts
            path: Target file path

        Returns:
            Path to written file, or None if there were no rows
        """
        if not rows:
            return None
        ReportGenerator._ensure_dir(path)
        with open(path, "w", newline="", encoding="utf-8") as f:
            writer = csv.DictWriter(f, fieldnames=list(rows[0].keys()), lineterminator="\n")
            writer.writeheader()
            writer.writerows(rows)
        return path

    @staticmethod
    def write_curves_csv(curves: Dict[str, np.ndarray], path: str) -> Optional[str]:
        """
        Write mean error curves, one row per node count L.

        Args:
            curves: Column name -> curve values indexed by L - 1
            path: Target file path

        Returns:
            Path to written file, or None if there were no curves
        """
        curves = {name: values for name, values in curves.items() if len(values)}
        if not curves:
            return None
        length = max(len(values) for values in curves.values())
        rows = []
        for i in range(length):
            row: Dict[str, Any] = {"L": i + 1}
            for name, values in curves.items():
                row[name] = repr(float(values[i])) if i < len(values) else ""
            rows.append(row)
        return ReportGenerator.write_table_csv(rows, path)

    @staticmethod
    def write_json(data: Dict[str, Any], path: str) -> str:
        """Write the full bench result document."""
        ReportGenerator._ensure_dir(path)
        with open(path, "w", encoding="utf-8") as f:
            json.dump(data, f, indent=2)
        return path

    @staticmethod
    def markdown_table(rows: List[Dict[str, Any]]) -> str:
        """Render rows as a Markdown table."""
        if not rows:
            return "_no rows_\n"
        headers = list(rows[0].keys())
        lines = ["| " + " | ".join(headers) + " |",
                 "|" + "|".join("---" for _ in headers) + "|"]
        for row in rows:
            lines.append("| " + " | ".join(str(row.get(h, "")) for h in headers) + " |")
        return "\n".join(lines) + "\n"

    @staticmethod
    def write_markdown(tables: Dict[str, List[Dict[str, Any]]], path: str,
                       title: str = "SCN benchmark", notes: Optional[List[str]] = None) -> str:
        """
        Write all tables into one Markdown summary.

        Args:
            tables: Table title -> rows
            path: Target file path
            title: Document title
            notes: Optional bullet lines printed under the title

        Returns:
            Path to written file
        """
        parts = [f"# {title}\n",
                 f"Generated {datetime.now().strftime('%Y-%m-%d %H:%M:%S')}\n"]
        for note in notes or []:
            parts.append(f"- {note}")
        if notes:
            parts.append("")
        for name, rows in tables.items():
            parts.append(f"## {name}\n")
            parts.append(ReportGenerator.markdown_table(rows))
        ReportGenerator._ensure_dir(path)
        with open(path, "w", encoding="utf-8") as f:
            f.write("\n".join(parts))
        return path

    @staticmethod
    def print_table(title: str, rows: List[Dict[str, Any]],
                    console: Optional[Console] = None) -> None:
        """Pretty-print one table on the console."""
        console = console or Console()
        if not rows:
            console.print(f"[yellow]{title}: no rows[/yellow]")
            return
        table = Table(title=title, header_style="bold cyan")
        for header in rows[0].keys():
            table.add_column(str(header))
        for row in rows:
            table.add_row(*(str(v) for v in row.values()))
        console.print(table)
