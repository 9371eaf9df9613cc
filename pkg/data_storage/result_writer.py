import json
import logging
import os
from typing import Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from dynamics.flow import Trajectory, trajectory_to_frame

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
FLOAT_FORMAT = '%.17g'

INVARIANT_COLUMNS = ['k', 'A', 'B_re', 'B_im', 'T', 'nu', 'g_plus_norm', 'g_minus_norm', 'M_plus',
                     'M_minus', 'w', 'fit_residual_plus', 'fit_residual_minus', 'M_plus_error',
                     'M_minus_error']
RESONANCE_COLUMNS = ['h', 'q', 're_z', 'im_z', 'tau', 'im_z_over_h', 'residual']
MU_SCAN_COLUMNS = ['h', 'on_hset', 'tau', 'abs_mu', 'mu_scale']
HSET_COLUMNS = ['j', 'h']
LATTICE_COLUMNS = ['h', 'q', 're_z', 'im_z', 'lattice_re_z', 'lattice_im_z', 'distance', 'distance_over_h',
                   'scaled_distance']
KAPPA_COLUMNS = ['kappa', 'h', 'coupling_abs', 'count', 'leading_depth_ratio', 'mean_depth_ratio']


def _jsonable(value):
    if isinstance(value, complex):
        return [value.real, value.imag]
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.ndarray):
        return value.tolist()
    raise TypeError(f"{type(value).__name__} is not JSON serializable")


class ResultWriter:
    """Single writer for every file of a run; CSV tables carry a schema comment line"""

    def __init__(self, out_dir: str):
        self.out_dir = out_dir
        self.written: List[str] = []
        os.makedirs(out_dir, exist_ok=True)

    def _path(self, name: str) -> str:
        return os.path.join(self.out_dir, name)

    def write_table(self, rows: Sequence[Dict], name: str, columns: List[str], table: str) -> str:
        """Write rows as CSV; an empty row list still writes the header"""
        path = self._path(name)
        try:
            frame = pd.DataFrame(list(rows), columns=columns)
            with open(path, 'w', newline='', encoding='utf-8') as f:
                f.write(f"# resonance_lab {table} schema v{SCHEMA_VERSION}\n")
                frame.to_csv(f, index=False, float_format=FLOAT_FORMAT)
            self.written.append(path)
            logger.info(f"Wrote {len(frame)} {table} rows to {path}")
            return path
        except Exception as e:
            logger.error(f"Error writing {table} table {path}: {str(e)}")
            raise

    def write_json(self, payload: Dict, name: str) -> str:
        path = self._path(name)
        try:
            with open(path, 'w', encoding='utf-8') as f:
                f.write(json.dumps(payload, sort_keys=True, indent=2, default=_jsonable) + '\n')
            self.written.append(path)
            logger.info(f"Wrote {path}")
            return path
        except Exception as e:
            logger.error(f"Error writing JSON {path}: {str(e)}")
            raise

    def write_trajectory(self, traj: Trajectory, name: str) -> str:
        """Columns t, x1, x2, xi1, xi2"""
        return self.write_table(trajectory_to_frame(traj).to_dict('records'), name,
                                ['t', 'x1', 'x2', 'xi1', 'xi2'], 'trajectory')

    def write_plot_data(self, rows: Sequence[Dict], name: str, columns: Optional[List[str]] = None) -> str:
        """Tab-separated columns for external plotting tools"""
        path = self._path(name)
        try:
            frame = pd.DataFrame(list(rows), columns=columns)
            frame.to_csv(path, sep='\t', index=False, float_format=FLOAT_FORMAT)
            self.written.append(path)
            logger.info(f"Wrote {len(frame)} plot rows to {path}")
            return path
        except Exception as e:
            logger.error(f"Error writing plot data {path}: {str(e)}")
            raise


def read_table(path: str) -> pd.DataFrame:
    """Read a table written by ResultWriter"""
    return pd.read_csv(path, comment='#')
