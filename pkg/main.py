#!/usr/bin/env python3
"""
Resonance Lab Application
Runs the homoclinic dynamics and the pseudo-resonance pipelines from an
experiment file and writes tables, reports and plot data
"""

import argparse
import logging
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

# Import configuration
from config import Config, RunConfig

# Import pipelines
from dynamics.homoclinic_finder import HomoclinicCandidate, HomoclinicFinder
from dynamics.invariants import HomoclinicDatum, assemble_invariants
from dynamics.non_return import sample_non_return
from spectral.instability_report import InstabilityAnalysis, WindowParams, depth_plot_series
from spectral.kappa_scan import kappa_depth_scan
from spectral.pseudo_resonances import (
    PseudoResonance,
    PseudoResonanceSolver,
    lattice_z_q,
    local_window,
)
from spectral.quantization import QuantizationInput, mu, mu_scale
from spectral.synthetic import admissible_h_set, check_case, input_from_records

# Import result storage
from data_storage.result_writer import (
    HSET_COLUMNS,
    INVARIANT_COLUMNS,
    KAPPA_COLUMNS,
    LATTICE_COLUMNS,
    MU_SCAN_COLUMNS,
    RESONANCE_COLUMNS,
    ResultWriter,
)
from errors import EXIT_NO_HOMOCLINICS, ConfigError, NoneFound, ResonanceLabError, exit_code_for
from run_manifest import RunManifest

# Setup logging
os.makedirs(Config.LOG_DIR, exist_ok=True)
logging.basicConfig(
    level=getattr(logging, Config.LOG_LEVEL),
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
    handlers=[
        logging.FileHandler(os.path.join(Config.LOG_DIR, 'resonance_lab.log')),
        logging.StreamHandler()
    ]
)
logging.captureWarnings(True)

logger = logging.getLogger(__name__)

COMMANDS = ('invariants', 'mu-scan', 'h-set', 'pseudo-resonances', 'lattice-check', 'report',
            'kappa-scan', 'trajectories')


class ResonanceLabApp:
    def __init__(self, cfg: RunConfig, command: str = 'report'):
        self.cfg = cfg
        self.command = command
        self.writer = ResultWriter(cfg.out_dir)
        self.manifest = RunManifest(cfg.out_dir, command, cfg.name)
        self.solver = PseudoResonanceSolver.from_settings(cfg.solver)
        self._candidates: Optional[List[HomoclinicCandidate]] = None
        self._invariants: Optional[List[HomoclinicDatum]] = None
        self._input: Optional[QuantizationInput] = None

    def _fail(self, stage: str, error: Exception) -> None:
        logger.error(f"Error in {stage} [{getattr(error, 'provenance', 'lab')}]: {str(error)}")
        self.manifest.fail_stage(stage, error)

    def map_over_h(self, fn: Callable[[float], Dict], h_list: Sequence[float]) -> List[Dict]:
        """Fan h values out to the worker pool; results come back ordered by decreasing h"""
        ordered = sorted(h_list, reverse=True)
        with ThreadPoolExecutor(max_workers=self.cfg.threads) as executor:
            return list(executor.map(fn, ordered))

    def find_homoclinics(self) -> List[HomoclinicCandidate]:
        """Homoclinic trajectories of the configured potential"""
        if self._candidates is None:
            if self.cfg.potential is None:
                raise ConfigError(f"'{self.command}' needs a 'potential' section")
            settings = {**self.cfg.dynamics, 'threads': self.cfg.threads}
            finder = HomoclinicFinder.from_settings(self.cfg.potential, settings)
            self._candidates = finder.find(int(self.cfg.dynamics.get('n_shoot', 241)))
        return self._candidates

    def compute_invariants(self) -> List[HomoclinicDatum]:
        if self._invariants is None:
            candidates = self.find_homoclinics()
            maslov = self.cfg.dynamics.get('maslov')
            if maslov is None:
                maslov = [0] * len(candidates)
                logger.warning(f"No Maslov indices configured; using ν = 0 for all {len(candidates)} trajectories")
            settings = {k: self.cfg.dynamics[k] for k in ('r_fit', 'n_radii', 'tol') if k in self.cfg.dynamics}
            self._invariants = assemble_invariants(self.cfg.potential, [c.trajectory for c in candidates],
                                                   maslov, **settings)
        return self._invariants

    def build_input(self) -> QuantizationInput:
        """Quantization input from the synthetic records or the computed invariants"""
        if self._input is not None:
            return self._input
        cfg = self.cfg
        if cfg.mode == 'synthetic':
            c = cfg.constants
            self._input = input_from_records(cfg.synthetic_invariants, c['lambda1'], c['lambda2'], c['E0'],
                                             cfg.perturbed_index or 1)
        else:
            data = self.compute_invariants()
            perturbed = [d.index for d in data if d.w_integral != 0]
            index = cfg.perturbed_index or (perturbed[0] if len(perturbed) == 1 else 1)
            spec = cfg.potential
            self._input = QuantizationInput(data=tuple(data), lambda1=spec.lambda1, lambda2=spec.lambda2,
                                            E0=spec.E0, source='dynamics', perturbed_index=index).validate()
        logger.info(f"Quantization input: K={self._input.K}, source={self._input.source}, w={self._input.w:.6g}")
        return self._input

    def h_values(self, inp: QuantizationInput) -> List[float]:
        selection = self.cfg.h_selection
        mode = selection['mode']
        if mode == 'explicit':
            return [float(h) for h in selection['values']]
        if mode == 'case':
            return admissible_h_set(inp, self.cfg.case, selection.get('j_max', 20),
                                    selection.get('m_min', 1), selection.get('m_max', 17))
        return [2.0 ** (-m) for m in range(selection['m_min'], selection['m_max'] + 1)]

    def solve_h(self, inp: QuantizationInput, h: float) -> List[PseudoResonance]:
        w = self.cfg.window
        window = local_window(inp, h, self.cfg.delta, w['A'], w['B'], w['C'], w.get('im_upper', 1.0))
        resonances, _ = self.solver.solve_with_retry(inp, h, self.cfg.delta, window)
        return resonances

    def run_invariants(self) -> None:
        """Invariants table of the homoclinic trajectories"""
        stage = 'invariants'
        self.manifest.start_stage(stage)
        name = self.cfg.output_name('invariants')
        try:
            data = self.compute_invariants()
            self.writer.write_table([d.table_row() for d in data], name, INVARIANT_COLUMNS, 'invariants')
            details = {'rows': len(data)}
            n_samples = self.cfg.dynamics.get('non_return_samples')
            if n_samples:
                report = sample_non_return(self.cfg.potential, n_samples=int(n_samples), seed=self.cfg.seed)
                details['non_return'] = report.to_dict()
            self.manifest.complete_stage(stage, **details)
        except NoneFound as e:
            self.writer.write_table([], name, INVARIANT_COLUMNS, 'invariants')
            self._fail(stage, e)
        except Exception as e:
            self._fail(stage, e)

    def run_trajectories(self) -> None:
        """One CSV per homoclinic trajectory plus the closing diagnostics"""
        stage = 'trajectories'
        self.manifest.start_stage(stage)
        try:
            candidates = self.find_homoclinics()
            pattern = self.cfg.output_name('trajectories')
            for c in candidates:
                self.writer.write_trajectory(c.trajectory, pattern.format(label=c.trajectory.label))
            summaries = [c.summary() for c in candidates]
            self.writer.write_table(summaries, 'homoclinics.csv', list(summaries[0].keys()), 'homoclinics')
            self.manifest.complete_stage(stage, trajectories=len(candidates))
        except Exception as e:
            self._fail(stage, e)

    def run_h_set(self) -> Optional[List[float]]:
        """Admissible h values of the configured case"""
        stage = 'h-set'
        self.manifest.start_stage(stage)
        try:
            if self.cfg.case is None:
                raise ConfigError("'h-set' needs a case")
            selection = self.cfg.h_selection
            hset = admissible_h_set(self.build_input(), self.cfg.case, selection.get('j_max', 20),
                                    selection.get('m_min', 1), selection.get('m_max', 17))
            rows = [{'j': j, 'h': h} for j, h in enumerate(hset)]
            self.writer.write_table(rows, self.cfg.output_name('hset'), HSET_COLUMNS, 'hset')
            self.manifest.complete_stage(stage, rows=len(rows))
            return hset
        except Exception as e:
            self._fail(stage, e)
            return None

    def run_mu_scan(self) -> None:
        """|μ(τ, h)| on a real τ grid; Case (I) also scans the midpoints between ℋ values"""
        stage = 'mu-scan'
        self.manifest.start_stage(stage)
        try:
            inp = self.build_input()
            scan = self.cfg.mu_scan
            tau = np.linspace(scan['tau_min'], scan['tau_max'], int(scan['n_tau']))
            if self.cfg.case == 'I':
                hset = self.run_h_set() or []
                points = [(h, True) for h in hset]
                if scan.get('midpoints', True):
                    points += [(0.5 * (a + b), False) for a, b in zip(hset, hset[1:])]
            else:
                if self.cfg.case == 'II':
                    check_case(inp, 'II')
                points = [(h, self.cfg.case == 'II') for h in self.h_values(inp)]

            rows = []
            scale = mu_scale(inp, tau)
            for h, on_hset in sorted(points, reverse=True):
                values = np.abs(mu(inp, tau, h))
                rows.extend({'h': h, 'on_hset': on_hset, 'tau': float(t), 'abs_mu': float(v), 'mu_scale': float(s)}
                            for t, v, s in zip(tau, values, scale))
            self.writer.write_table(rows, self.cfg.output_name('mu_scan'), MU_SCAN_COLUMNS, 'mu_scan')
            self.manifest.complete_stage(stage, rows=len(rows))
        except Exception as e:
            self._fail(stage, e)

    def run_pseudo_resonances(self) -> Optional[List[PseudoResonance]]:
        """Pseudo-resonances of the perturbed problem for every selected h"""
        stage = 'pseudo-resonances'
        self.manifest.start_stage(stage)
        try:
            inp = self.build_input()
            per_h = self.map_over_h(lambda h: {'h': h, 'resonances': self.solve_h(inp, h)}, self.h_values(inp))
            resonances = [r for entry in per_h for r in entry['resonances']]
            self.writer.write_table([r.to_row() for r in resonances], self.cfg.output_name('pseudo_resonances'),
                                    RESONANCE_COLUMNS, 'pseudo_resonances')
            self.manifest.complete_stage(stage, rows=len(resonances))
            return resonances
        except Exception as e:
            self._fail(stage, e)
            return None

    def run_lattice_check(self) -> None:
        """Distance from every computed root to its lattice point z_q(τ)"""
        stage = 'lattice-check'
        resonances = self.run_pseudo_resonances()
        if resonances is None:
            return
        self.manifest.start_stage(stage)
        try:
            inp = self.build_input()
            rows = []
            for r in resonances:
                lattice = lattice_z_q(inp, r.tau, r.q, r.h, self.cfg.delta)
                distance = abs(r.z - lattice)
                rows.append({
                    'h': r.h, 'q': r.q, 're_z': r.z.real, 'im_z': r.z.imag,
                    'lattice_re_z': lattice.real, 'lattice_im_z': lattice.imag,
                    'distance': distance, 'distance_over_h': distance / r.h,
                    'scaled_distance': distance / r.h * abs(np.log(r.h)),
                })
            self.writer.write_table(rows, self.cfg.output_name('lattice_check'), LATTICE_COLUMNS, 'lattice_check')
            worst = max((row['scaled_distance'] for row in rows), default=0.0)
            self.manifest.complete_stage(stage, rows=len(rows), max_scaled_distance=worst)
        except Exception as e:
            self._fail(stage, e)

    def run_report(self) -> None:
        """Instability report, resonance table and depth plot data"""
        stage = 'report'
        self.manifest.start_stage(stage)
        try:
            inp = self.build_input()
            cfg = self.cfg
            window = WindowParams(**cfg.window).validate()
            analysis = InstabilityAnalysis(self.solver, n_exceptions=int(cfg.solver.get('n_exceptions', 2)))
            analysis.check_parameters(inp, cfg.delta, cfg.alpha)
            h_list = self.h_values(inp)
            hset = None
            if cfg.case is not None:
                selection = cfg.h_selection
                hset = admissible_h_set(inp, cfg.case, selection.get('j_max', 20), selection.get('m_min', 1),
                                        selection.get('m_max', 17))

            results = self.map_over_h(lambda h: analysis.analyze_h(inp, h, cfg.delta, cfg.alpha, window), h_list)
            report = analysis.summarize(inp, cfg.delta, cfg.alpha, window, results, hset)

            payload = report.to_dict()
            payload['config'] = cfg.name
            payload['source'] = inp.source
            self.writer.write_json(payload, cfg.output_name('report'))
            self.writer.write_table(report.resonance_rows(), cfg.output_name('resonances'),
                                    RESONANCE_COLUMNS, 'resonances')
            series = depth_plot_series(report)
            self.writer.write_plot_data(series['depth_lines'], cfg.output_name('depth_lines'),
                                        ['h', 're_z', 'unperturbed_line', 'perturbed_line'])
            self.writer.write_plot_data(series['markers'], cfg.output_name('markers'), ['h', 're_z', 'im_z', 'q'])
            self.manifest.complete_stage(stage, h_values=len(h_list), resonances=len(report.resonances),
                                         trapping_increase=report.trapping_increase,
                                         trapping_bound=report.trapping_bound)
        except Exception as e:
            self._fail(stage, e)

    def run_kappa_scan(self) -> None:
        """Leading depths of the P + κhW pseudo-resonances"""
        stage = 'kappa-scan'
        self.manifest.start_stage(stage)
        try:
            inp = self.build_input()
            scan = self.cfg.kappa_scan
            rows = kappa_depth_scan(inp, scan['kappa'], self.h_values(inp), scan['re_min'], scan['re_max'],
                                    self.solver)
            self.writer.write_table(rows, self.cfg.output_name('kappa_scan'), KAPPA_COLUMNS, 'kappa_scan')
            self.manifest.complete_stage(stage, rows=len(rows))
        except Exception as e:
            self._fail(stage, e)

    def run(self) -> int:
        """Run the command; returns the exit code"""
        logger.info(f"Running '{self.command}' for config '{self.cfg.name}' ({self.cfg.mode} mode)")
        start_time = time.time()
        steps = {
            'invariants': self.run_invariants,
            'mu-scan': self.run_mu_scan,
            'h-set': self.run_h_set,
            'pseudo-resonances': self.run_pseudo_resonances,
            'lattice-check': self.run_lattice_check,
            'report': self.run_report,
            'kappa-scan': self.run_kappa_scan,
            'trajectories': self.run_trajectories,
        }
        steps[self.command]()

        for path in self.writer.written:
            self.manifest.record_output(path)
        code = self.manifest.finish()
        duration = time.time() - start_time
        if code == 0:
            logger.info(f"'{self.command}' completed in {duration:.2f} seconds")
        elif code == EXIT_NO_HOMOCLINICS:
            logger.warning(f"'{self.command}' found no homoclinic trajectories ({duration:.2f} seconds)")
        else:
            logger.error(f"'{self.command}' failed with exit code {code} after {duration:.2f} seconds")
        return code


def _add_run_flags(parser: argparse.ArgumentParser, default=None) -> None:
    parser.add_argument('--config', default=default, help="experiment file (JSON)")
    parser.add_argument('--out-dir', default=default, help="output directory")
    parser.add_argument('--h', type=float, action='append', dest='h_values', default=default,
                        help="explicit h value (repeatable)")
    parser.add_argument('--delta', type=float, default=default, help="perturbation exponent δ")
    parser.add_argument('--threads', type=int, default=default, help="worker threads over h")


def build_parser() -> argparse.ArgumentParser:
    """Run flags are accepted before or after the subcommand; later ones win"""
    parser = argparse.ArgumentParser(description="Resonance instability lab")
    _add_run_flags(parser)
    subparsers = parser.add_subparsers(dest='command')
    for command in COMMANDS:
        # unset subcommand flags must not clear the ones given before it
        _add_run_flags(subparsers.add_parser(command), default=argparse.SUPPRESS)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Main application entry point"""
    args = build_parser().parse_args(argv)
    command = args.command or Config.RUN_MODE
    if command not in COMMANDS:
        logger.error(f"Unknown command '{command}'")
        return ConfigError.exit_code

    try:
        cfg = RunConfig.load(args.config or Config.RUN_CONFIG)
        cfg = cfg.with_overrides(out_dir=args.out_dir, h_values=args.h_values, delta=args.delta,
                                 threads=args.threads)
    except ResonanceLabError as e:
        logger.error(f"Error loading config [{e.provenance}]: {str(e)}")
        return exit_code_for(e)

    app = ResonanceLabApp(cfg, command)
    return app.run()


if __name__ == "__main__":
    sys.exit(main())
