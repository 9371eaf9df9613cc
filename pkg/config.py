import json
import os
from dataclasses import asdict, dataclass, field, fields
from typing import Dict, List, Optional

from dotenv import load_dotenv

from dynamics.potential import PotentialSpec
from errors import ConfigError

load_dotenv()


class Config:
    # Application Configuration
    LOG_LEVEL = os.getenv('LOG_LEVEL', 'INFO')
    LOG_DIR = os.getenv('LOG_DIR', 'logs')
    RESULTS_DIR = os.getenv('RESULTS_DIR', 'results')
    PLOT_EXPORT_DIR = os.getenv('PLOT_EXPORT_DIR', 'plot_exports')

    # Run defaults
    DEFAULT_THREADS = int(os.getenv('DEFAULT_THREADS', 1))
    RUN_MODE = os.getenv('RUN_MODE', 'report')
    RUN_CONFIG = os.getenv('RUN_CONFIG', 'configs/case_II_synthetic.json')


UNITS = "model units, dimensionless"
H_MODES = ('explicit', 'case', 'geometric')


def _default_constants() -> Dict:
    return {'lambda1': 1.0, 'lambda2': 1.5, 'E0': 1.0}


def _default_h_selection() -> Dict:
    return {'mode': 'geometric', 'm_min': 7, 'm_max': 17}


def _default_window() -> Dict:
    return {'C': 12.0, 'A': -12.0, 'B': -4.0, 'im_upper': 1.0}


def _default_mu_scan() -> Dict:
    return {'tau_min': -4.0, 'tau_max': 4.0, 'n_tau': 81, 'midpoints': True}


def _default_kappa_scan() -> Dict:
    return {'kappa': [0.25, 0.5, 1.0, 2.0], 're_min': -12.0, 're_max': -4.0}


def _default_outputs() -> Dict:
    return {
        'invariants': 'invariants.csv',
        'mu_scan': 'mu_scan.csv',
        'hset': 'hset.csv',
        'pseudo_resonances': 'pseudo_resonances.csv',
        'lattice_check': 'lattice_check.csv',
        'report': 'instability_report.json',
        'resonances': 'resonances.csv',
        'kappa_scan': 'kappa_scan.csv',
        'trajectories': 'trajectory_{label}.csv',
        'depth_lines': 'depth_lines.tsv',
        'markers': 'markers.tsv',
    }


@dataclass
class RunConfig:
    """
    One experiment file

    Exactly one of `potential` (dynamics mode) and `synthetic_invariants`
    (records fed straight to the spectral layer) is set. Window coefficients
    and h values are in units of h.
    """

    name: str = 'experiment'
    units: str = UNITS
    potential: Optional[PotentialSpec] = None
    synthetic_invariants: Optional[List[Dict]] = None
    constants: Dict = field(default_factory=_default_constants)
    perturbed_index: Optional[int] = None
    dynamics: Dict = field(default_factory=dict)
    case: Optional[str] = None
    delta: float = 0.1
    alpha: float = 0.25
    h_selection: Dict = field(default_factory=_default_h_selection)
    window: Dict = field(default_factory=_default_window)
    solver: Dict = field(default_factory=dict)
    mu_scan: Dict = field(default_factory=_default_mu_scan)
    kappa_scan: Dict = field(default_factory=_default_kappa_scan)
    outputs: Dict = field(default_factory=_default_outputs)
    seed: int = 0
    threads: int = Config.DEFAULT_THREADS
    out_dir: str = Config.RESULTS_DIR

    @property
    def mode(self) -> str:
        return 'dynamics' if self.potential is not None else 'synthetic'

    def output_name(self, key: str) -> str:
        return self.outputs.get(key, _default_outputs()[key])

    @classmethod
    def from_dict(cls, record: Dict) -> 'RunConfig':
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(record) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {unknown}")
        values = dict(record)
        if values.get('potential') is not None:
            values['potential'] = PotentialSpec.from_dict(values['potential'])
        for key, default in (('constants', _default_constants), ('window', _default_window),
                             ('mu_scan', _default_mu_scan), ('kappa_scan', _default_kappa_scan),
                             ('outputs', _default_outputs)):
            if key in values:
                values[key] = {**default(), **values[key]}
        return cls(**values)

    def to_dict(self) -> Dict:
        record = asdict(self)
        record['potential'] = self.potential.to_dict() if self.potential is not None else None
        return record

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    @classmethod
    def load(cls, path: str) -> 'RunConfig':
        try:
            with open(path, 'r') as f:
                record = json.load(f)
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {path}")
        except json.JSONDecodeError as e:
            raise ConfigError(f"config file {path} is not valid JSON: {str(e)}")
        return cls.from_dict(record).validate()

    def save(self, path: str) -> None:
        os.makedirs(os.path.dirname(path) or '.', exist_ok=True)
        with open(path, 'w') as f:
            f.write(self.to_json() + '\n')

    def problems(self) -> List[str]:
        issues = []
        if (self.potential is None) == (self.synthetic_invariants is None):
            issues.append("exactly one of 'potential' and 'synthetic_invariants' must be given")
        if self.potential is not None:
            issues.extend(self.potential.problems())
        if self.synthetic_invariants is not None and not self.synthetic_invariants:
            issues.append("'synthetic_invariants' is empty")
        if not 0 < self.delta < 0.5:
            issues.append(f"delta must lie in (0, 1/2), got {self.delta}")
        if self.alpha <= 0:
            issues.append(f"alpha must be positive, got {self.alpha}")
        if self.case not in (None, 'I', 'II'):
            issues.append(f"case must be 'I', 'II' or null, got {self.case!r}")

        C, A, B = (self.window.get(k) for k in ('C', 'A', 'B'))
        if None in (C, A, B) or not (-C <= A < B <= C):
            issues.append(f"window needs -C <= A < B <= C, got C={C}, A={A}, B={B}")

        mode = self.h_selection.get('mode')
        if mode not in H_MODES:
            issues.append(f"h_selection mode must be one of {H_MODES}, got {mode!r}")
        elif mode == 'explicit':
            values = self.h_selection.get('values') or []
            if not values or not all(0 < h < 1 for h in values):
                issues.append("explicit h values must be a non-empty list in (0, 1)")
        elif mode == 'case' and self.case is None:
            issues.append("h_selection mode 'case' needs a case")
        elif mode == 'geometric':
            m_min, m_max = self.h_selection.get('m_min', 1), self.h_selection.get('m_max', 0)
            if not 1 <= m_min <= m_max:
                issues.append(f"geometric h grid needs 1 <= m_min <= m_max, got {m_min}..{m_max}")

        if self.threads < 1:
            issues.append(f"threads must be at least 1, got {self.threads}")
        return issues

    def validate(self) -> 'RunConfig':
        issues = self.problems()
        if issues:
            raise ConfigError("; ".join(issues))
        return self

    def with_overrides(self, out_dir: Optional[str] = None, h_values: Optional[List[float]] = None,
                       delta: Optional[float] = None, threads: Optional[int] = None) -> 'RunConfig':
        """Copy with the command-line flags applied"""
        cfg = RunConfig.from_dict(self.to_dict())
        if out_dir is not None:
            cfg.out_dir = out_dir
        if h_values:
            cfg.h_selection = {'mode': 'explicit', 'values': [float(h) for h in h_values]}
        if delta is not None:
            cfg.delta = float(delta)
        if threads is not None:
            cfg.threads = int(threads)
        return cfg.validate()
