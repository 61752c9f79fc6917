"""Named perturbation methods, so harnesses and the CLI can run any of them
from one description."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .baselines import (CondensationConfig, RandomRotationConfig, perturb_condensation,
                        perturb_random_rotation)
from .dataset import Dataset
from .errors import ConfigError
from .grouping import BY_CLUSTER_COUNT, BY_GROUP_SIZE, GroupingConfig
from .perturb import PerturbConfig, PerturbedDataset, perturb_static
from .seeding import derive_seed
from .stream import StreamConfig, open_stream

METHODS = ("procal", "dc", "rp")


@dataclass(frozen=True)
class MethodSpec:
    method: str = "procal"
    mode: str = "static"
    kprime: int | None = None
    k: int | None = None
    seed: int = 0
    buffer: int | None = None
    threshold: int | None = None
    iterations: int = 10
    sigma: float = 0.3
    max_kmeans_iterations: int = 100

    def __post_init__(self):
        if self.method not in METHODS:
            raise ConfigError(f"unknown method {self.method!r}; choose from {', '.join(METHODS)}")
        if self.mode not in ("static", "stream"):
            raise ConfigError(f"unknown mode {self.mode!r}")
        if self.method == "procal":
            if (self.k is None) == (self.kprime is None):
                raise ConfigError("procal needs exactly one of --k or --kprime")
        elif self.method == "dc" and self.kprime is None:
            raise ConfigError("dc needs --kprime")
        if self.mode == "stream":
            if self.method != "procal":
                raise ConfigError(f"{self.method} has no stream mode")
            if self.buffer is None or self.threshold is None:
                raise ConfigError("stream mode needs --buffer and --threshold")

    @property
    def label(self) -> str:
        if self.method == "dc":
            return "DC"
        if self.method == "rp":
            return "RP"
        name = "k'-P2RoCAl" if self.kprime is not None else "k-P2RoCAl_kmeans"
        return name + ("_streams" if self.mode == "stream" else "")

    def grouping(self) -> GroupingConfig:
        if self.kprime is not None:
            return GroupingConfig(BY_GROUP_SIZE, self.kprime, derive_seed(self.seed, "grouping"))
        return GroupingConfig(BY_CLUSTER_COUNT, self.k, derive_seed(self.seed, "grouping"),
                              self.max_kmeans_iterations)

    def stream_config(self) -> StreamConfig:
        return StreamConfig(self.buffer, self.threshold, self.grouping(), self.seed)

    def run(self, d: Dataset, keep_provenance: bool = False) -> PerturbedDataset:
        if self.method == "dc":
            return perturb_condensation(d, CondensationConfig(self.kprime, self.seed), keep_provenance)
        if self.method == "rp":
            return perturb_random_rotation(
                d, RandomRotationConfig(self.iterations, self.sigma, self.seed), keep_provenance)
        if self.mode == "static":
            return perturb_static(d, PerturbConfig(self.grouping(), self.seed), keep_provenance)
        blocks = list(open_stream(((d.values[i], None if d.labels is None else d.labels[i])
                                   for i in range(d.m)), self.stream_config(), keep_provenance=True))
        values = np.concatenate([b.values for b in blocks])
        labels = None if d.labels is None else np.concatenate([b.labels for b in blocks])
        prov = np.concatenate([b.provenance for b in blocks])
        return PerturbedDataset(d.with_values(values, labels), prov if keep_provenance else None)
