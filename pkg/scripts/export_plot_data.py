#!/usr/bin/env python3
"""
Script to export plot data from a finished run
Reads the report and tables of a results directory and writes tab-separated
columns for external plotting tools
"""

import argparse
import json
import logging
import sys
from dataclasses import fields
from datetime import datetime
from pathlib import Path

import pandas as pd

sys.path.insert(0, str(Path(__file__).resolve().parents[1]))

from config import Config
from data_storage.result_writer import FLOAT_FORMAT, read_table
from spectral.instability_report import InstabilityReport, depth_plot_series

logging.basicConfig(
    level=logging.INFO,
    format='%(asctime)s - %(levelname)s - %(message)s'
)
logger = logging.getLogger(__name__)


def _write_tsv(frame: pd.DataFrame, output_file: Path) -> None:
    frame.to_csv(output_file, sep='\t', index=False, float_format=FLOAT_FORMAT)
    logger.info(f"✓ Exported {len(frame)} rows to {output_file}")


def export_depth_plot(results_dir: Path, output_dir: Path) -> bool:
    """Depth lines from instability_report.json, markers from resonances.csv"""
    report_file = results_dir / 'instability_report.json'
    if not report_file.exists():
        logger.warning(f"No report found in {results_dir}")
        return False
    try:
        with open(report_file) as f:
            payload = json.load(f)
        known = {f.name for f in fields(InstabilityReport)} - {'resonances'}
        report = InstabilityReport(**{k: v for k, v in payload.items() if k in known})
        _write_tsv(pd.DataFrame(depth_plot_series(report)['depth_lines']), output_dir / 'depth_lines.tsv')

        resonances_file = results_dir / 'resonances.csv'
        if resonances_file.exists():
            table = read_table(str(resonances_file))
            _write_tsv(table[['h', 're_z', 'im_z', 'q']], output_dir / 'markers.tsv')
        return True
    except Exception as e:
        logger.error(f"Error exporting depth plot: {str(e)}")
        return False


def export_mu_curves(results_dir: Path, output_dir: Path) -> bool:
    """|μ|/scale as one column per h over the τ grid"""
    scan_file = results_dir / 'mu_scan.csv'
    if not scan_file.exists():
        logger.warning(f"No mu scan found in {results_dir}")
        return False
    try:
        scan = read_table(str(scan_file))
        scan['ratio'] = scan['abs_mu'] / scan['mu_scale']
        wide = scan.pivot_table(index='tau', columns='h', values='ratio').sort_index(axis=1, ascending=False)
        wide.columns = [f"h={h:.6g}" for h in wide.columns]
        _write_tsv(wide.reset_index(), output_dir / 'mu_curves.tsv')
        return True
    except Exception as e:
        logger.error(f"Error exporting mu curves: {str(e)}")
        return False


def export_kappa_curves(results_dir: Path, output_dir: Path) -> bool:
    """Leading Im z/h as one column per κ over h"""
    kappa_file = results_dir / 'kappa_scan.csv'
    if not kappa_file.exists():
        logger.warning(f"No kappa scan found in {results_dir}")
        return False
    try:
        scan = read_table(str(kappa_file))
        wide = scan.pivot_table(index='h', columns='kappa', values='leading_depth_ratio')
        wide.columns = [f"kappa={k:g}" for k in wide.columns]
        _write_tsv(wide.sort_index(ascending=False).reset_index(), output_dir / 'kappa_curves.tsv')
        return True
    except Exception as e:
        logger.error(f"Error exporting kappa curves: {str(e)}")
        return False


def export_all(results_dir: Path, output_dir: Path) -> int:
    exporters = (export_depth_plot, export_mu_curves, export_kappa_curves)
    return sum(1 for exporter in exporters if exporter(results_dir, output_dir))


def main():
    """Main function"""
    parser = argparse.ArgumentParser(description="Export plot data from a results directory")
    parser.add_argument('results_dir', nargs='?', default=Config.RESULTS_DIR)
    parser.add_argument('--output-dir', default=None)
    args = parser.parse_args()

    results_dir = Path(args.results_dir)
    if args.output_dir:
        export_dir = Path(args.output_dir)
    else:
        timestamp = datetime.now().strftime('%Y%m%d_%H%M%S')
        export_dir = Path(Config.PLOT_EXPORT_DIR) / timestamp
    export_dir.mkdir(parents=True, exist_ok=True)

    logger.info(f"Exporting plot data from {results_dir} to {export_dir}")
    exported = export_all(results_dir, export_dir)

    logger.info("=" * 60)
    logger.info(f"Export complete: {exported} plot groups written")
    return 0 if exported else 1


if __name__ == "__main__":
    sys.exit(main())
