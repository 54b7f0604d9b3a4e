"""Shared domain types: parameter vectors and reproducible RNG streams.

Parameter vectors are plain ``{name: float}`` dicts throughout the package;
each model fixes the set of names and the order used for output. All state
is kept in 64-bit floats.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

Params = dict


class ConfigError(ValueError):
    """Invalid model or experiment configuration."""


@dataclass(frozen=True)
class RngStream:
    """A reproducible, independent random stream.

    A stream is identified by ``(base_seed, path)``. Generators are built on
    the Philox counter-based bit generator keyed through
    ``np.random.SeedSequence(entropy=base_seed, spawn_key=path)``, so distinct
    paths give independent, non-overlapping streams by construction, and the
    same (seed, path, call sequence) yields bit-identical draws on every
    platform for a fixed numpy version.
    """

    base_seed: int
    path: tuple = ()

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(entropy=self.base_seed, spawn_key=self.path)
        return np.random.Generator(np.random.Philox(ss))

    def child(self, index: int) -> "RngStream":
        """Derive a sub-stream, e.g. one per filter component."""
        return RngStream(self.base_seed, self.path + (int(index),))


def derive_stream(base_seed: int, replicate: int) -> RngStream:
    """Stream for one replicate; distinct replicates never share draws."""
    if base_seed < 0:
        raise ConfigError(f"base seed must be >= 0, got {base_seed}")
    if replicate < 0:
        raise ConfigError(f"replicate index must be >= 0, got {replicate}")
    return RngStream(int(base_seed), (int(replicate),))
