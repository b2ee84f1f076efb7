import json
import logging
import os

from dksel.errors import InvalidParamsError
from dksel.models.params import SelectParams

logger = logging.getLogger(__name__)

THREADS_ENV = 'DKSEL_THREADS'

DEFAULTS = {
    'pool': None,
    'k': 10,
    'theta': 0.5,
    'lambda': 2.0,
    'max_iters': 1000,
    'gap_tol': 1e-9,
    'recompute_period': 50,
    'init': 'topk',
    'allow_small_lambda': False,
    'restarts': 0,
    'polish': False,
    'threads': None,
    'seed': 0,
}


def resolve_threads(threads: int = None) -> int:
    """
    Worker count: the explicit value, else DKSEL_THREADS, else 1.
    """
    if threads is not None:
        if int(threads) < 1:
            raise InvalidParamsError(f'threads must be >= 1, got {threads}')
        return int(threads)
    raw = os.environ.get(THREADS_ENV)
    if raw is None or raw == '':
        return 1
    try:
        value = int(raw)
    except ValueError:
        value = 0
    if value < 1:
        logger.warning(f'ignoring {THREADS_ENV}={raw!r}, running single-threaded')
        return 1
    return value


def prepare_params(defaults: dict, params: dict) -> dict:
    """
    Merge per-call parameters over defaults. Keys whose per-call value is None
    keep the default.

    Args:
        defaults (dict): Default parameters.
        params (dict): Provided parameters.

    Returns:
        dict: Final parameters
    """
    merged = dict(defaults)
    for key, value in (params or {}).items():
        if value is not None:
            merged[key] = value
    return merged


class Settings:
    """
    Run settings, loaded from a settings.json style dict::

        {
            "pool": "path/to/pool.dksel",
            "k": 10,
            "theta": 0.5,
            "lambda": 2.0
        }

    Unknown keys are rejected so typos do not silently fall back to defaults.
    """
    def __init__(self, config: dict = None):
        config = dict(config or {})
        unknown = sorted(set(config) - set(DEFAULTS))
        if unknown:
            raise InvalidParamsError(f"unknown settings: {', '.join(unknown)}")
        self.values = prepare_params(DEFAULTS, config)

    @classmethod
    def from_dict(cls, config: dict) -> 'Settings':
        return cls(config)

    @classmethod
    def from_file(cls, path) -> 'Settings':
        with open(path, 'r', encoding='utf-8') as f:
            try:
                config = json.loads(f.read())
            except json.JSONDecodeError as e:
                raise InvalidParamsError(f'{path}: not valid JSON ({e})')
        return cls(config)

    def updated(self, **overrides) -> 'Settings':
        """
        Copy of these settings with the non-None overrides applied.
        """
        return Settings(prepare_params(self.values, overrides))

    def __getitem__(self, key):
        return self.values[key]

    @property
    def threads(self) -> int:
        return resolve_threads(self.values['threads'])

    def select_params(self, **overrides) -> SelectParams:
        """
        SelectParams from the settings, with per-call overrides applied on top.
        ``lam`` is accepted as an alias of ``lambda``.
        """
        if 'lam' in overrides:
            lam = overrides.pop('lam')
            overrides.setdefault('lambda', lam)
        unknown = sorted(set(overrides) - set(DEFAULTS))
        if unknown:
            raise InvalidParamsError(f"unknown settings: {', '.join(unknown)}")
        values = prepare_params(self.values, overrides)
        return SelectParams(
            k=int(values['k']),
            theta=float(values['theta']),
            lam=float(values['lambda']),
            max_iters=int(values['max_iters']),
            gap_tol=float(values['gap_tol']),
            recompute_period=int(values['recompute_period']),
            init=values['init'],
            allow_small_lambda=bool(values['allow_small_lambda']),
            restarts=int(values['restarts']),
            polish=bool(values['polish']),
            seed=int(values['seed']),
        )

    def as_dict(self) -> dict:
        """
        Returns every effective setting, defaults included, in a fixed key order
        """
        data = {key: self.values[key] for key in DEFAULTS}
        data['threads'] = self.threads
        return data
