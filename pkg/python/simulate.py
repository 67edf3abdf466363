"""
Seeded sampling of claim counts and aggregate claims.

Draws are split into shards of at most SimConfig.shard_size. Every shard gets
its own PCG64 stream spawned from SeedSequence(seed), shards may run on a
thread pool, and their outputs are concatenated in shard order, so a seed
always reproduces the same sample whatever the worker count.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Callable, Dict, List

import numpy as np
from pydantic import BaseModel, Field

from . import config
from .baselines import CountModel, NegBinDist, PoissonDist
from .compound import CompoundModel, ImpliedCountDist
from .errors import ParameterError
from .ndoppe import NdoppeDist

logger = logging.getLogger("ndoppe_simulate")

GENERATOR_NAME = "PCG64"


class SimConfig(BaseModel):
    seed: int = Field(default=config.DEFAULT_SEED, ge=0, lt=2 ** 64)
    replicates: int = Field(ge=1)
    shard_size: int = Field(default=config.SIM_SHARD_SIZE, ge=1)
    workers: int = Field(default=1, ge=1)

    def shard_sizes(self) -> List[int]:
        full, rest = divmod(self.replicates, self.shard_size)
        return [self.shard_size] * full + ([rest] if rest else [])


class SampleSummary(BaseModel):
    n: int
    mean: float
    variance: float
    mean_std_error: float
    atom_share: float
    atom_std_error: float
    metadata: Dict[str, Any] = {}


def generator_metadata(cfg: SimConfig) -> Dict[str, Any]:
    return {
        "generator": GENERATOR_NAME,
        "numpy_version": np.__version__,
        "seed": cfg.seed,
        "shards": len(cfg.shard_sizes()),
    }


def _run_sharded(cfg: SimConfig, draw: Callable[[np.random.Generator, int], np.ndarray]) -> np.ndarray:
    sizes = cfg.shard_sizes()
    seeds = np.random.SeedSequence(cfg.seed).spawn(len(sizes))

    def run(i: int) -> np.ndarray:
        rng = np.random.Generator(np.random.PCG64(seeds[i]))
        return draw(rng, sizes[i])

    if cfg.workers > 1 and len(sizes) > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            parts = list(pool.map(run, range(len(sizes))))
    else:
        parts = [run(i) for i in range(len(sizes))]
    logger.debug(f"sampled {cfg.replicates} draws in {len(sizes)} shard(s), seed={cfg.seed}")
    return np.concatenate(parts)


def _ndoppe_draws(d: NdoppeDist, rng: np.random.Generator, size: int) -> np.ndarray:
    """Pick component k with probability w_k, then add k+1 geometric failure counts."""
    weights = np.asarray(d.weights, dtype=float)
    comps = rng.choice(weights.size, size=size, p=weights / weights.sum())
    out = np.zeros(size, dtype=np.int64)
    for k in np.unique(comps):
        idx = np.flatnonzero(comps == k)
        # numpy's geometric counts trials up to the first success
        geo = rng.geometric(d.theta, size=(idx.size, int(k) + 1)) - 1
        out[idx] = geo.sum(axis=1)
    return out


def _count_draws(dist: CountModel, rng: np.random.Generator, size: int) -> np.ndarray:
    if isinstance(dist, NdoppeDist):
        return _ndoppe_draws(dist, rng, size)
    if isinstance(dist, PoissonDist):
        return rng.poisson(dist.alpha, size=size).astype(np.int64)
    if isinstance(dist, NegBinDist):
        return rng.negative_binomial(dist.r_param, 1.0 - dist.p_fail, size=size).astype(np.int64)
    if isinstance(dist, ImpliedCountDist):
        table = dist.table()
        return rng.choice(table.size, size=size, p=table / table.sum()).astype(np.int64)
    raise ParameterError(f"no sampler for count model {type(dist).__name__}")


def sample_ndoppe(d: NdoppeDist, cfg: SimConfig) -> np.ndarray:
    return _run_sharded(cfg, lambda rng, size: _ndoppe_draws(d, rng, size))


def sample_counts(dist: CountModel, cfg: SimConfig) -> np.ndarray:
    return _run_sharded(cfg, lambda rng, size: _count_draws(dist, rng, size))


def sample_aggregate(m: CompoundModel, cfg: SimConfig) -> np.ndarray:
    """S = 0 when N = 0, otherwise a Gamma(N, 1/gamma) draw (the sum of N exponentials)."""
    primary = m.primary
    scale = 1.0 / m.gamma

    def draw(rng, size):
        counts = _count_draws(primary, rng, size)
        out = np.zeros(size, dtype=float)
        positive = counts > 0
        out[positive] = rng.gamma(counts[positive].astype(float), scale)
        return out

    return _run_sharded(cfg, draw)


def summarize(sample: np.ndarray, cfg: SimConfig = None) -> SampleSummary:
    sample = np.asarray(sample)
    n = int(sample.size)
    if n < 2:
        raise ParameterError("a summary needs at least two draws")
    mean = float(sample.mean())
    variance = float(sample.var(ddof=1))
    atom = float(np.mean(sample == 0))
    return SampleSummary(
        n=n,
        mean=mean,
        variance=variance,
        mean_std_error=math.sqrt(variance / n),
        atom_share=atom,
        atom_std_error=math.sqrt(atom * (1.0 - atom) / n),
        metadata=generator_metadata(cfg) if cfg is not None else {},
    )
