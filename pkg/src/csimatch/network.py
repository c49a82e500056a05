"""Random deployments and Rayleigh channel draws for a K-pair MIMO interference network.

All objects here are immutable once built. Randomness always comes in through an
explicit :class:`numpy.random.Generator`; :func:`deployment_streams` hands out the
independent per-deployment generators used by the Monte Carlo harness.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

__all__ = [
    "SystemConfig",
    "NetworkInstance",
    "ChannelSet",
    "generate_deployment",
    "draw_channels",
    "nominal_snr",
    "sigma2_for_snr",
    "sigma2_for_snr_db",
    "deployment_streams",
]

# deployments with any tx-rx distance below this are redrawn
MIN_DISTANCE = 1e-6


def _as_tuple(value, K: int, cast) -> tuple:
    if np.ndim(value) == 0:
        return (cast(value),) * K
    out = tuple(cast(v) for v in value)
    if len(out) != K:
        raise ValueError(f"expected {K} per-node entries, got {len(out)}")
    return out


@dataclass(frozen=True)
class SystemConfig:
    """Scenario constants.

    Per-node fields (``M``, ``N``, ``d``, ``P``) accept a scalar, which is
    broadcast to all ``K`` nodes, or a length-``K`` sequence. The defaults are
    the 25-pair scenario with 5x5 antennas, two streams and a 10^4 symbol
    coherence block; ``sigma2`` defaults to the value giving 0 dB nominal SNR.
    """

    K: int = 25
    M: Sequence[int] | int = 5
    N: Sequence[int] | int = 5
    d: Sequence[int] | int = 2
    P: Sequence[float] | float = 1.0
    sigma2: float = 8e-6
    T: int = 10_000
    region_side: float = 250.0
    link_distance: float = 50.0
    pathloss_exp: float = 3.0
    seed: int = 0

    def __post_init__(self):
        K = int(self.K)
        if K < 1:
            raise ValueError("K must be at least 1")
        object.__setattr__(self, "K", K)
        for name, cast in (("M", int), ("N", int), ("d", int), ("P", float)):
            object.__setattr__(self, name, _as_tuple(getattr(self, name), K, cast))
        if min(self.M) < 1 or min(self.N) < 1:
            raise ValueError("antenna counts must be >= 1")
        for k in range(K):
            if not 1 <= self.d[k] <= min(self.M[k], self.N[k]):
                raise ValueError(f"d[{k}]={self.d[k]} must lie in [1, min(M, N)]")
        if max(self.N) > min(self.M):
            # analog feedback count assumes N_k <= M_j for every pair
            raise ValueError("every N[k] must be <= every M[j]")
        if min(self.P) <= 0:
            raise ValueError("power budgets must be positive")
        if self.sigma2 <= 0:
            raise ValueError("sigma2 must be positive")
        if int(self.T) <= 0:
            raise ValueError("T must be positive")
        object.__setattr__(self, "T", int(self.T))
        if self.pathloss_exp < 0:
            raise ValueError("pathloss_exp must be non-negative")
        if self.link_distance <= 0 or self.region_side <= 0:
            raise ValueError("geometry lengths must be positive")

    @property
    def is_symmetric(self) -> bool:
        return len(set(self.M)) == 1 and len(set(self.N)) == 1 and len(set(self.d)) == 1

    def with_snr_db(self, snr_db: float) -> "SystemConfig":
        """Copy of this config with ``sigma2`` set for the given nominal SNR."""
        return replace(self, sigma2=sigma2_for_snr_db(self, snr_db))


def _frozen(a) -> np.ndarray:
    a = np.array(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class NetworkInstance:
    """One deployment. ``a[j, k]`` and ``gamma[j, k]`` index transmitter j, receiver k."""

    tx_pos: np.ndarray
    rx_pos: np.ndarray
    a: np.ndarray
    gamma: np.ndarray

    def __post_init__(self):
        for name in ("tx_pos", "rx_pos", "a", "gamma"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))

    @property
    def K(self) -> int:
        return self.a.shape[0]


@dataclass(frozen=True, eq=False)
class ChannelSet:
    """Small-scale fading; ``H[j][k]`` has shape ``(N[k], M[j])``."""

    H: tuple = field(repr=False)

    def __post_init__(self):
        H = tuple(tuple(_frozen(h) for h in row) for row in self.H)
        object.__setattr__(self, "H", H)

    @property
    def K(self) -> int:
        return len(self.H)

    def replace_link(self, j: int, k: int, h) -> "ChannelSet":
        rows = [list(row) for row in self.H]
        rows[j][k] = np.asarray(h, dtype=complex)
        return ChannelSet(rows)

    def digest(self) -> str:
        """SHA-256 over all matrices, for checking that runs share realizations."""
        sha = hashlib.sha256()
        for row in self.H:
            for h in row:
                sha.update(np.ascontiguousarray(h).tobytes())
        return sha.hexdigest()


def generate_deployment(config: SystemConfig, rng: np.random.Generator) -> NetworkInstance:
    """Drop transmitters uniformly in the square and each receiver on a circle around its transmitter.

    Receivers are placed at ``link_distance`` with a uniform angle and are not
    confined to the square.
    """
    K, side, dist = config.K, config.region_side, config.link_distance
    while True:
        tx = rng.uniform(0.0, side, size=(K, 2))
        theta = rng.uniform(0.0, 2 * np.pi, size=K)
        rx = tx + dist * np.column_stack([np.cos(theta), np.sin(theta)])
        a = np.linalg.norm(tx[:, None, :] - rx[None, :, :], axis=-1)
        if a.min() >= MIN_DISTANCE:
            break
    # exact self-distance; the trig round trip is off by an ulp or so
    np.fill_diagonal(a, dist)
    gamma = a ** (-float(config.pathloss_exp))
    return NetworkInstance(tx_pos=tx, rx_pos=rx, a=a, gamma=gamma)


def draw_channels(config: SystemConfig, rng: np.random.Generator) -> ChannelSet:
    """i.i.d. CN(0, 1) entries for every transmitter-receiver pair."""
    K = config.K
    H = []
    for j in range(K):
        row = []
        for k in range(K):
            z = rng.standard_normal((config.N[k], config.M[j], 2))
            row.append((z[..., 0] + 1j * z[..., 1]) / np.sqrt(2))
        H.append(row)
    return ChannelSet(H)


def nominal_snr(config: SystemConfig) -> float:
    """Direct-link SNR at the nominal link distance, before fading."""
    return config.link_distance ** (-float(config.pathloss_exp)) / config.sigma2


def sigma2_for_snr(config: SystemConfig, snr: float) -> float:
    """Noise variance that puts the nominal SNR at ``snr`` (linear)."""
    if snr <= 0:
        raise ValueError("snr must be positive")
    return config.link_distance ** (-float(config.pathloss_exp)) / snr


def sigma2_for_snr_db(config: SystemConfig, snr_db: float) -> float:
    return sigma2_for_snr(config, 10.0 ** (snr_db / 10.0))


def deployment_streams(seed: int, index: int) -> tuple[np.random.Generator, np.random.Generator]:
    """Independent (geometry, fading) generators for deployment ``index``.

    Each deployment gets its own spawn key, so results do not depend on which
    worker handles it or in what order.
    """
    root = np.random.SeedSequence(entropy=seed, spawn_key=(index,))
    geo, fade = root.spawn(2)
    return np.random.default_rng(geo), np.random.default_rng(fade)
