"""Shared helpers: a per-session run cache so overlapping sweeps reuse work."""

from tanglesim.engine import ExperimentConfig, launch

_CACHE: dict[tuple, object] = {}


def cached_launch(config: ExperimentConfig, seed: int):
    """launch(), memoized on the (frozen) config and seed."""
    key = (config, seed)
    if key not in _CACHE:
        _CACHE[key] = launch(config, seed)
    return _CACHE[key]


def cached_records():
    """Every metrics record produced through the cache so far."""
    return dict(_CACHE)
