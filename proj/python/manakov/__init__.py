"""Python front end for the manakov solvers.

Configs are plain dicts using the same keys as the command-line tool;
missing keys take their defaults.  Fields are complex arrays of shape
(n_points, 2).
"""

import json

import numpy as np

from . import _core
from ._core import ConfigError, IoError, StudyError, ks_two_sample, wavenumbers

__version__ = _core.__version__

__all__ = [
    "ConfigError",
    "IoError",
    "StudyError",
    "convergence_study",
    "default_config",
    "driver_stats",
    "h1_norm",
    "initial_field",
    "ks_two_sample",
    "l2_norm",
    "limit_energy",
    "observables",
    "psi_frame_oracle",
    "read_snapshot",
    "resolve_config",
    "simulate_limit",
    "simulate_pmd",
    "wavenumbers",
    "write_snapshot",
]


def _dump(config, overrides):
    merged = dict(config or {})
    merged.update(overrides)
    return json.dumps(merged)


def _field(a):
    return None if a is None else np.ascontiguousarray(a, dtype=np.complex128)


def _trajectory(raw):
    raw["config"] = json.loads(raw["config"])
    return raw


def default_config():
    return json.loads(_core.default_config())


def resolve_config(config=None, subcommand="simulate-pmd", **overrides):
    return json.loads(_core.resolve_config(_dump(config, overrides), subcommand))


def initial_field(config=None, **overrides):
    return _core.initial_field(_dump(config, overrides))


def l2_norm(field, domain_length):
    return _core.l2_norm(_field(field), domain_length)


def h1_norm(field, domain_length):
    return _core.h1_norm(_field(field), domain_length)


def limit_energy(field, domain_length, d0=1.0):
    return _core.limit_energy(_field(field), domain_length, d0)


def observables(field, domain_length, config=None, **overrides):
    return _core.observables(_field(field), domain_length, _dump(config, overrides))


def simulate_pmd(config=None, initial=None, **overrides):
    """One PMD trajectory: dict with records, final_field, abort, config."""
    return _trajectory(_core.simulate_pmd(_dump(config, overrides), _field(initial)))


def psi_frame_oracle(config=None, initial=None, **overrides):
    """Same path as simulate_pmd, integrated in the rotating frame."""
    return _trajectory(_core.psi_frame_oracle(_dump(config, overrides), _field(initial)))


def simulate_limit(config=None, initial=None, **overrides):
    return _trajectory(_core.simulate_limit(_dump(config, overrides), _field(initial)))


def driver_stats(config=None, **overrides):
    return _core.driver_stats(_dump(config, overrides))


def convergence_study(config=None, **overrides):
    return _core.convergence_study(_dump(config, overrides))


def read_snapshot(path):
    """Returns (field, domain_length, time)."""
    return _core.read_snapshot(str(path))


def write_snapshot(path, field, domain_length, time=0.0):
    _core.write_snapshot(str(path), _field(field), domain_length, time)
