#!/usr/bin/env python3
"""
Run Manifest
Tracks pipeline stages, failures and written files for one run
"""

import json
import os
import sys
from datetime import datetime
from typing import Dict, List, Optional

from errors import EXIT_OK, exit_code_for

MANIFEST_NAME = "run_manifest.json"


class RunManifest:
    def __init__(self, out_dir: str, command: str, config_name: str = ''):
        self.manifest_file = os.path.join(out_dir, MANIFEST_NAME)
        self.data = {
            'command': command,
            'config': config_name,
            'started_at': datetime.now().isoformat(),
            'finished_at': None,
            'status': 'running',
            'exit_code': None,
            'stages': {},
            'failures': [],
            'outputs': [],
        }

    @classmethod
    def load(cls, path: str) -> 'RunManifest':
        """Load an existing manifest"""
        with open(path, 'r') as f:
            data = json.load(f)
        manifest = cls(os.path.dirname(path), data.get('command', ''), data.get('config', ''))
        manifest.data = data
        return manifest

    def save(self):
        """Save manifest to file"""
        os.makedirs(os.path.dirname(self.manifest_file) or '.', exist_ok=True)
        with open(self.manifest_file, 'w') as f:
            json.dump(self.data, f, indent=2, sort_keys=True)

    def start_stage(self, stage: str):
        self.data['stages'][stage] = {'status': 'running', 'started_at': datetime.now().isoformat()}

    def complete_stage(self, stage: str, **details):
        entry = self.data['stages'].setdefault(stage, {})
        entry.update({'status': 'success', 'finished_at': datetime.now().isoformat(), **details})

    def fail_stage(self, stage: str, error: BaseException):
        """Record a failed stage with the module that raised"""
        entry = self.data['stages'].setdefault(stage, {})
        entry.update({'status': 'failed', 'finished_at': datetime.now().isoformat()})
        self.data['failures'].append({
            'stage': stage,
            'provenance': getattr(error, 'provenance', 'lab'),
            'error': type(error).__name__,
            'message': str(error),
            'exit_code': exit_code_for(error),
        })

    def record_output(self, path: str):
        if path not in self.data['outputs']:
            self.data['outputs'].append(path)

    @property
    def failures(self) -> List[Dict]:
        return self.data['failures']

    def exit_code(self) -> int:
        """Exit code of the first failure, 0 when every stage succeeded"""
        if not self.failures:
            return EXIT_OK
        return self.failures[0]['exit_code']

    def finish(self, exit_code: Optional[int] = None) -> int:
        code = self.exit_code() if exit_code is None else exit_code
        self.data['exit_code'] = code
        self.data['status'] = 'success' if code == EXIT_OK else 'failed'
        self.data['finished_at'] = datetime.now().isoformat()
        self.save()
        return code

    def get_summary(self) -> Dict:
        return {
            'command': self.data['command'],
            'status': self.data['status'],
            'exit_code': self.data['exit_code'],
            'stages': {name: stage.get('status') for name, stage in self.data['stages'].items()},
            'n_outputs': len(self.data['outputs']),
            'failures': [f"{f['provenance']}: {f['error']}: {f['message']}" for f in self.failures],
        }

    def print_summary(self):
        """Print manifest summary"""
        summary = self.get_summary()

        print("📊 Resonance Lab Run Summary")
        print("=" * 50)
        print(f"Command: {summary['command']}")
        print(f"Status: {summary['status']} (exit code {summary['exit_code']})")
        for stage, status in summary['stages'].items():
            print(f"  {stage}: {status}")
        print(f"Files written: {summary['n_outputs']}")
        for failure in summary['failures']:
            print(f"  ✗ {failure}")
        print()


if __name__ == "__main__":
    path = sys.argv[1] if len(sys.argv) > 1 else os.path.join('results', MANIFEST_NAME)
    RunManifest.load(path).print_summary()
