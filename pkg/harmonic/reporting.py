"""
Report emission for equivalence experiments.

Reports are written as CSV (rows only) or JSON (rows, summary, config and notes). Every
report gets a `.hist.json` sidecar with 32-bin histograms of log-ratios per
(p, method_a, method_b), ready for external plotting.
"""

import csv
import json
import logging
import math
from pathlib import Path
from typing import Any, Dict, List, Union

import numpy as np

from .exceptions import ConfigurationError, ReportIOError
from .experiments import EquivalenceReport

logger = logging.getLogger(__name__)

CSV_COLUMNS = ('field_id', 'p', 'method_a', 'method_b', 'norm_a', 'norm_b', 'ratio')
REPORT_FORMATS = ('csv', 'json')
HISTOGRAM_BINS = 32


def sidecar_path(path: Union[str, Path]) -> Path:
    path = Path(path)
    return path.with_name(f"{path.stem}.hist.json")


def report_filename(report: EquivalenceReport, fmt: str) -> str:
    return f"{report.kind}_seed{report.config.get('seed', 0)}.{fmt}"


def ratio_histograms(report: EquivalenceReport) -> List[Dict[str, Any]]:
    groups: Dict[tuple, List[float]] = {}
    for row in report.rows:
        groups.setdefault((row['p'], row['method_a'], row['method_b']), []).append(
            math.log(row['ratio']))
    out = []
    for (p, a, b), logs in groups.items():
        counts, edges = np.histogram(np.asarray(logs), bins=HISTOGRAM_BINS)
        out.append({'p': p, 'method_a': a, 'method_b': b,
                    'counts': [int(c) for c in counts],
                    'log_ratio_edges': [float(e) for e in edges]})
    return out


def _write_csv(report: EquivalenceReport, path: Path) -> None:
    with path.open('w', newline='', encoding='utf-8') as handle:
        writer = csv.DictWriter(handle, fieldnames=CSV_COLUMNS, extrasaction='ignore',
                                lineterminator='\n')
        writer.writeheader()
        for row in report.rows:
            writer.writerow({**row, 'norm_a': repr(float(row['norm_a'])),
                             'norm_b': repr(float(row['norm_b'])),
                             'ratio': repr(float(row['ratio']))})


def _write_json(data: Any, path: Path) -> None:
    with path.open('w', encoding='utf-8') as handle:
        json.dump(data, handle, indent=2, sort_keys=True)
        handle.write('\n')


def emit_report(report: EquivalenceReport, fmt: str, path: Union[str, Path]) -> Path:
    """
    Writes `report` to `path` in `fmt` and the histogram sidecar next to it.

    Raises:
        ConfigurationError: unknown format.
        ReportIOError: the file or its directory cannot be written.
    """
    if fmt not in REPORT_FORMATS:
        raise ConfigurationError(f"Unknown report format '{fmt}'.")
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        if fmt == 'csv':
            _write_csv(report, path)
        else:
            _write_json(report.to_dict(), path)
        _write_json({'kind': report.kind, 'bins': HISTOGRAM_BINS,
                     'histograms': ratio_histograms(report)}, sidecar_path(path))
    except OSError as exc:
        raise ReportIOError(path, exc.strerror or str(exc)) from exc
    logger.info("Report written to %s (%d rows)", path, len(report.rows))
    return path


def load_report(path: Union[str, Path]) -> EquivalenceReport:
    """Reads a JSON report written by `emit_report`."""
    path = Path(path)
    try:
        with path.open(encoding='utf-8') as handle:
            data = json.load(handle)
    except OSError as exc:
        raise ReportIOError(path, exc.strerror or str(exc)) from exc
    except json.JSONDecodeError as exc:
        raise ReportIOError(path, f"invalid JSON report: {exc}") from exc
    return EquivalenceReport(data['kind'], data['config'], data['rows'], data['summary'],
                             data.get('notes', {}))
