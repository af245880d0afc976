"""
Experiment manifests: which scenario/controller pairs to run, where their
artifacts go, and the loop (or process pool) that runs them.
"""
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import product
from pathlib import Path
from typing import Optional

import django
from django.core.exceptions import ValidationError
from django.utils.translation import gettext_lazy as _

from sim.runner import LOOPBACK, MODES, NETWORKED, run_scenario
from sim.scenario import CONTROLLERS, SCENARIOS, ScenarioConfig
from sim.validators import validate_choice

from .compare import compare
from .validators import validate_jobs

logger = logging.getLogger(__name__)

MATRIX_ALL = 'all'


@dataclass(frozen=True)
class RunEntry:
    scenario: str
    controller: str

    def __post_init__(self):
        object.__setattr__(self, 'scenario', self.scenario.lower())
        object.__setattr__(self, 'controller', self.controller.lower())
        validate_choice('scenario', self.scenario, SCENARIOS)
        validate_choice('controller', self.controller, CONTROLLERS)

    def __str__(self):
        return f'{self.scenario}/{self.controller}'


@dataclass(frozen=True)
class RunManifest:
    entries: tuple
    out_dir: Path
    seed: int = 0
    mode: str = LOOPBACK
    laps: Optional[int] = None
    port: int = 0

    def __post_init__(self):
        object.__setattr__(self, 'entries', tuple(self.entries))
        object.__setattr__(self, 'out_dir', Path(self.out_dir))
        if not self.entries:
            raise ValidationError({'entries': _('A manifest needs at least one run.')})
        validate_choice('mode', self.mode, MODES)
        if self.seed < 0:
            raise ValidationError({'seed': _('Seed cannot be negative.')})
        if self.laps is not None and self.laps < 1:
            raise ValidationError({'laps': _('A run needs at least one lap.')})

    @classmethod
    def matrix(cls, out_dir, scenarios=SCENARIOS, controllers=CONTROLLERS, **kwargs):
        entries = [RunEntry(scenario, controller) for scenario, controller in product(scenarios, controllers)]
        return cls(entries=entries, out_dir=out_dir, **kwargs)

    def scenario_for(self, entry, config):
        overrides = {'seed': self.seed}
        if self.laps is not None:
            overrides['laps'] = self.laps
        return ScenarioConfig.from_config(config, entry.scenario, entry.controller, **overrides)

    def run_dir(self, entry):
        return self.out_dir / entry.scenario / f'{entry.controller}-seed{self.seed}'


@dataclass
class RunOutcome:
    entry: RunEntry
    run_dir: Path
    report: Optional[object] = None
    error: str = ''
    wall_time: float = 0.0
    paths: dict = field(default_factory=dict)

    @property
    def ok(self):
        return self.report is not None and not self.error


def execute_entry(manifest, entry, config):
    """One run of ``manifest``; failures are caught and reported in the outcome."""
    run_dir = manifest.run_dir(entry)
    started = time.perf_counter()
    try:
        scenario = manifest.scenario_for(entry, config)
        result = run_scenario(scenario, config, mode=manifest.mode, out_dir=run_dir, port=manifest.port)
    except ValidationError as exc:
        logger.error("run %s failed: %s", entry, '; '.join(exc.messages))
        return RunOutcome(entry, run_dir, error='; '.join(exc.messages),
                          wall_time=time.perf_counter() - started)
    except Exception as exc:
        logger.exception("run %s crashed", entry)
        return RunOutcome(entry, run_dir, error=f'{type(exc).__name__}: {exc}',
                          wall_time=time.perf_counter() - started)
    return RunOutcome(entry, run_dir, report=result.report, paths=result.paths,
                      wall_time=time.perf_counter() - started)


def _setup_worker():
    django.setup()


def run_manifest(manifest, config, jobs=1):
    """
    Every entry of ``manifest``, in order. With ``jobs`` > 1 the runs share a
    process pool; each run is still a single loop.
    """
    validate_jobs(jobs)
    if jobs > 1 and manifest.mode == NETWORKED and manifest.port:
        raise ValidationError({'port': _('Parallel networked runs need ephemeral ports (port 0).')})
    logger.info("running %d experiment(s) with %d job(s) into %s", len(manifest.entries), jobs,
                manifest.out_dir)
    if jobs == 1:
        return [execute_entry(manifest, entry, config) for entry in manifest.entries]
    with ProcessPoolExecutor(max_workers=jobs, initializer=_setup_worker) as pool:
        futures = [pool.submit(execute_entry, manifest, entry, config) for entry in manifest.entries]
        return [future.result() for future in futures]


def write_comparisons(outcomes, out_dir):
    """
    A comparison table per scenario with at least two finished controllers.
    Returns {scenario: path}.
    """
    by_scenario = {}
    for outcome in outcomes:
        if outcome.ok:
            by_scenario.setdefault(outcome.entry.scenario, []).append(outcome.report)
    written = {}
    for scenario, reports in by_scenario.items():
        if len(reports) < 2:
            continue
        table = compare(reports)
        directory = Path(out_dir) / scenario
        directory.mkdir(parents=True, exist_ok=True)
        path = directory / 'comparison.csv'
        table.formatted().to_csv(path, index_label='metric')
        table.to_frame().to_csv(directory / 'comparison_long.csv', index=False, float_format='%.6f')
        written[scenario] = path
    return written
