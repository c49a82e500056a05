"""Many-to-many stable matching between transmitters and receivers.

Receivers value transmitters by how strongly their interference aligns with the
direct channel; transmitters value receivers by received interference power per
antenna. Both sides pick their top-``q`` counterparts (additively separable
utilities, so a greedy pick solves the choice problem exactly), and a
receiver-proposing deferred-acceptance procedure reaches a stable matching.

Indices are 0-based throughout. ``None`` stands for the empty counterpart.

By default every direct pair ``(k, k)`` is reserved: it ranks above all cross
links on both sides and is held from the start, so it always takes one quota
slot. Set ``reserve_direct=False`` on :class:`PreferenceTable` to rank direct
links by their plain values instead.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Hashable, Iterable, Sequence

import numpy as np

from .network import ChannelSet, NetworkInstance, SystemConfig

__all__ = [
    "DegenerateChannelError",
    "InvalidMatchingError",
    "QuotaRangeError",
    "SizeLimitError",
    "UnsupportedConfigurationError",
    "PreferenceTable",
    "QuotaConfig",
    "Matching",
    "SharingSet",
    "phi_rx",
    "phi_tx",
    "preference_table",
    "choose",
    "beta_bounds",
    "compute_quota",
    "alpha",
    "target_prelog",
    "run_deferred_acceptance",
    "is_stable",
    "brute_force_stable_matchings",
    "matching_to_sharing_set",
]

BRUTE_FORCE_MAX_K = 4


class DegenerateChannelError(ValueError):
    pass


class UnsupportedConfigurationError(ValueError):
    pass


class QuotaRangeError(ValueError):
    pass


class InvalidMatchingError(ValueError):
    pass


class SizeLimitError(ValueError):
    pass


# ---------------------------------------------------------------------------
# data types


@dataclass(frozen=True, eq=False)
class PreferenceTable:
    """``phi_rx[k, j]`` is receiver k's value for transmitter j; ``phi_tx[j, k]`` the reverse."""

    phi_rx: np.ndarray
    phi_tx: np.ndarray
    reserve_direct: bool = True

    def __post_init__(self):
        for name in ("phi_rx", "phi_tx"):
            a = np.array(getattr(self, name), dtype=float)
            if a.ndim != 2 or a.shape[0] != a.shape[1]:
                raise ValueError(f"{name} must be a square matrix")
            if not np.all(np.isfinite(a)) or np.any(a < 0):
                raise ValueError(f"{name} entries must be finite and non-negative")
            a.setflags(write=False)
            object.__setattr__(self, name, a)
        if self.phi_rx.shape != self.phi_tx.shape:
            raise ValueError("phi_rx and phi_tx shapes differ")

    @property
    def K(self) -> int:
        return self.phi_rx.shape[0]

    def rx_values(self, k: int) -> list[float]:
        """Receiver k's effective value for every transmitter (direct link on top if reserved)."""
        vals = self.phi_rx[k].tolist()
        if self.reserve_direct:
            vals[k] = math.inf
        return vals

    def tx_values(self, j: int) -> list[float]:
        vals = self.phi_tx[j].tolist()
        if self.reserve_direct:
            vals[j] = math.inf
        return vals


@dataclass(frozen=True)
class QuotaConfig:
    q_rx: tuple[int, ...]
    q_tx: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "q_rx", tuple(int(q) for q in self.q_rx))
        object.__setattr__(self, "q_tx", tuple(int(q) for q in self.q_tx))
        K = len(self.q_rx)
        if len(self.q_tx) != K:
            raise ValueError("q_rx and q_tx lengths differ")
        if any(not 1 <= q <= K for q in self.q_rx + self.q_tx):
            raise QuotaRangeError(f"quotas must lie in [1, {K}]")

    @classmethod
    def uniform(cls, K: int, q: int) -> "QuotaConfig":
        return cls((q,) * K, (q,) * K)

    @property
    def K(self) -> int:
        return len(self.q_rx)


@dataclass(frozen=True)
class Matching:
    """Set-valued correspondence: ``of_tx[j]`` holds receivers, ``of_rx[k]`` transmitters."""

    of_tx: tuple[frozenset, ...]
    of_rx: tuple[frozenset, ...]

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[int, int]], K: int) -> "Matching":
        """Build from ``(j, k)`` transmitter/receiver pairs; symmetric by construction."""
        of_tx = [set() for _ in range(K)]
        of_rx = [set() for _ in range(K)]
        for j, k in pairs:
            of_tx[j].add(k)
            of_rx[k].add(j)
        return cls(tuple(map(frozenset, of_tx)), tuple(map(frozenset, of_rx)))

    @classmethod
    def empty(cls, K: int) -> "Matching":
        return cls.from_pairs((), K)

    @property
    def K(self) -> int:
        return len(self.of_tx)

    def pairs(self) -> frozenset:
        return frozenset((j, k) for j, ks in enumerate(self.of_tx) for k in ks)

    def is_symmetric(self) -> bool:
        if len(self.of_tx) != len(self.of_rx):
            return False
        return self.pairs() == frozenset((j, k) for k, js in enumerate(self.of_rx) for j in js)

    def __str__(self):
        return "{" + ", ".join(f"(tx{j}, rx{k})" for j, k in sorted(self.pairs())) + "}"


@dataclass(frozen=True)
class SharingSet:
    """Links ``(j, k)`` whose channel is fed back to the transmitters. Always holds every ``(k, k)``."""

    pairs: frozenset
    K: int

    def __post_init__(self):
        pairs = frozenset((int(j), int(k)) for j, k in self.pairs)
        object.__setattr__(self, "pairs", pairs)
        for j, k in pairs:
            if not (0 <= j < self.K and 0 <= k < self.K):
                raise ValueError(f"link {(j, k)} out of range for K={self.K}")
        missing = [k for k in range(self.K) if (k, k) not in pairs]
        if missing:
            raise ValueError(f"direct links missing for receivers {missing}")

    @classmethod
    def minimal(cls, K: int) -> "SharingSet":
        return cls(frozenset((k, k) for k in range(K)), K)

    @classmethod
    def full(cls, K: int) -> "SharingSet":
        return cls(frozenset(itertools.product(range(K), repeat=2)), K)

    def __contains__(self, pair) -> bool:
        return pair in self.pairs

    def __len__(self) -> int:
        return len(self.pairs)

    def __iter__(self):
        return iter(sorted(self.pairs))


# ---------------------------------------------------------------------------
# utilities


def phi_rx(j: int | None, k: int, channels: ChannelSet, instance: NetworkInstance) -> float:
    """Receiver k's value for transmitter j: alignment of j's channel with the direct channel."""
    if j is None:
        return 0.0
    Hkk = channels.H[k][k]
    direct = np.linalg.norm(Hkk) ** 2
    if direct == 0.0:
        raise DegenerateChannelError(f"direct channel of link {k} is zero")
    cross = np.linalg.norm(channels.H[j][k].conj().T @ Hkk)
    return float(np.sqrt(instance.gamma[j, k]) * cross / (np.sqrt(instance.gamma[k, k]) * direct))


def phi_tx(
    j: int, k: int | None, channels: ChannelSet, instance: NetworkInstance, config: SystemConfig
) -> float:
    """Transmitter j's value for receiver k: received power per feedback antenna pair."""
    if k is None:
        return 0.0
    power = np.linalg.norm(channels.H[j][k]) ** 2
    return float(instance.gamma[j, k] * config.P[j] * power / (config.M[j] * config.N[k]))


def preference_table(
    channels: ChannelSet,
    instance: NetworkInstance,
    config: SystemConfig,
    reserve_direct: bool = True,
) -> PreferenceTable:
    K = config.K
    prx = np.array([[phi_rx(j, k, channels, instance) for j in range(K)] for k in range(K)])
    ptx = np.array([[phi_tx(j, k, channels, instance, config) for k in range(K)] for j in range(K)])
    return PreferenceTable(prx, ptx, reserve_direct=reserve_direct)


def choose(values: Iterable[tuple[Hashable, float]], quota: int) -> set:
    """Most preferred subset under an additive utility with a cardinality cap.

    Returns the ``min(quota, len(values))`` candidates with the largest values;
    equal values go to the lower candidate.
    """
    ranked = sorted(values, key=lambda cv: (-cv[1], cv[0]))
    return {c for c, _ in ranked[: max(quota, 0)]}


def _pick(values: Sequence[float], candidates: Iterable[int], quota: int) -> set:
    return choose(((c, values[c]) for c in candidates), quota)


# ---------------------------------------------------------------------------
# quotas from a target pre-log factor


def _symmetric_params(config: SystemConfig) -> tuple[int, int, int, int, int]:
    if not config.is_symmetric:
        raise UnsupportedConfigurationError("quota rule needs equal M, N and d across nodes")
    return config.K, config.M[0], config.N[0], config.d[0], config.T


def beta_bounds(config: SystemConfig) -> tuple[float, float]:
    """Pre-log factors ``(minimal sharing, full sharing)`` of a symmetric network.

    The first value is the larger one: minimal sharing only feeds back direct
    links.
    """
    K, M, N, d, T = _symmetric_params(config)
    minimal = (T - K * (2 * M + N + d)) / T
    full = (T - K * (K * M + M + N + d)) / T
    return minimal, full


# slack for beta_hat values that are a rounding error away from an exact quota boundary
_QUOTA_EPS = 1e-9


def compute_quota(config: SystemConfig, beta_hat: float) -> int:
    """Largest uniform quota whose saturated feedback keeps the pre-log at or above ``beta_hat``.

    The result is clamped to ``[1, K]``.
    """
    K, M, N, d, T = _symmetric_params(config)
    hi, lo = beta_bounds(config)
    if not lo - 1e-12 <= beta_hat <= hi + 1e-12:
        raise QuotaRangeError(f"beta_hat={beta_hat} outside [{lo}, {hi}]")
    bound = T * (1.0 - beta_hat) / (K * M) - 1.0 - (N + d) / M
    q = math.floor(bound + _QUOTA_EPS)
    return min(max(q, 1), K)


def alpha(snr: float, base: float = math.e) -> float:
    """SNR weight in ``[0, 1]`` that shifts the target pre-log towards full sharing."""
    if snr < 0:
        raise ValueError("snr must be non-negative (linear scale)")
    a = math.log1p(snr / (1.0 + snr)) if math.isfinite(snr) else math.log(2.0)
    a /= math.log(base)
    return min(max(a, 0.0), 1.0)


def target_prelog(config: SystemConfig, snr: float, base: float = math.e) -> float:
    """Desired pre-log factor, decreasing from the minimal-sharing value as SNR grows."""
    hi, lo = beta_bounds(config)
    a = alpha(snr, base)
    return a * lo + (1.0 - a) * hi


# ---------------------------------------------------------------------------
# deferred acceptance


def run_deferred_acceptance(
    prefs: PreferenceTable, quotas: QuotaConfig, trace: list | None = None
) -> tuple[Matching, int]:
    """Receiver-proposing deferred acceptance with round-synchronous messaging.

    Each round, every receiver applies to its top choices among transmitters that
    have not rejected it; each transmitter keeps its top choices among held and
    new applicants and rejects the rest. A receiver spends one symbol interval in
    a round where it sends at least one new application, a transmitter one symbol
    interval in a round where it has new applicants to answer.

    Returns the matching and the signalling overhead ``L_SM`` in symbol intervals.
    If ``trace`` is a list, one dict per round is appended with the held
    ``matching`` after that round and the round's ``applications``.
    """
    K = prefs.K
    if quotas.K != K:
        raise ValueError("quota and preference sizes differ")
    rx_vals = [prefs.rx_values(k) for k in range(K)]
    tx_vals = [prefs.tx_values(j) for j in range(K)]

    not_rejected = [set(range(K)) for _ in range(K)]
    applied = [set() for _ in range(K)]
    held = [set() for _ in range(K)]
    if prefs.reserve_direct:
        for k in range(K):
            applied[k].add(k)
            held[k].add(k)

    L_SM = 0
    while True:
        incoming = [set() for _ in range(K)]
        senders = 0
        for k in range(K):
            new = _pick(rx_vals[k], not_rejected[k], quotas.q_rx[k]) - applied[k]
            if new:
                senders += 1
                applied[k] |= new
                for j in new:
                    incoming[j].add(k)
        if not senders:
            break
        L_SM += senders

        for j in range(K):
            if not incoming[j]:
                continue
            pool = held[j] | incoming[j]
            keep = _pick(tx_vals[j], pool, quotas.q_tx[j])
            for k in pool - keep:
                not_rejected[k].discard(j)
            held[j] = keep
            L_SM += 1

        if trace is not None:
            snapshot = Matching.from_pairs(((j, k) for j in range(K) for k in held[j]), K)
            trace.append({"matching": snapshot, "applications": sum(map(len, incoming))})

    return Matching.from_pairs(((j, k) for j in range(K) for k in held[j]), K), L_SM


# ---------------------------------------------------------------------------
# stability


def _check(m: Matching, prefs: PreferenceTable, quotas: QuotaConfig):
    if not m.is_symmetric():
        raise InvalidMatchingError("matching is not symmetric between transmitters and receivers")
    if not m.K == prefs.K == quotas.K:
        raise ValueError("matching, preferences and quotas disagree on K")


def is_stable(m: Matching, prefs: PreferenceTable, quotas: QuotaConfig) -> bool:
    """Individually rational and free of blocking pairs."""
    _check(m, prefs, quotas)
    K = prefs.K
    rx_vals = [prefs.rx_values(k) for k in range(K)]
    tx_vals = [prefs.tx_values(j) for j in range(K)]

    for j in range(K):
        if _pick(tx_vals[j], m.of_tx[j], quotas.q_tx[j]) != m.of_tx[j]:
            return False
    for k in range(K):
        if _pick(rx_vals[k], m.of_rx[k], quotas.q_rx[k]) != m.of_rx[k]:
            return False

    for k in range(K):
        for j in range(K):
            if k in m.of_tx[j]:
                continue
            if (
                k in _pick(tx_vals[j], m.of_tx[j] | {k}, quotas.q_tx[j])
                and j in _pick(rx_vals[k], m.of_rx[k] | {j}, quotas.q_rx[k])
            ):
                return False
    return True


def brute_force_stable_matchings(prefs: PreferenceTable, quotas: QuotaConfig) -> set[Matching]:
    """Every stable matching, found by enumerating all quota-respecting matchings."""
    K = prefs.K
    if K > BRUTE_FORCE_MAX_K:
        raise SizeLimitError(f"enumeration limited to K <= {BRUTE_FORCE_MAX_K}, got {K}")
    per_tx = []
    for j in range(K):
        subsets = [
            frozenset(s)
            for r in range(quotas.q_tx[j] + 1)
            for s in itertools.combinations(range(K), r)
        ]
        per_tx.append(subsets)

    found = set()
    for rows in itertools.product(*per_tx):
        load = [0] * K
        for ks in rows:
            for k in ks:
                load[k] += 1
        if any(load[k] > quotas.q_rx[k] for k in range(K)):
            continue
        m = Matching.from_pairs(((j, k) for j, ks in enumerate(rows) for k in ks), K)
        if is_stable(m, prefs, quotas):
            found.add(m)
    return found


def matching_to_sharing_set(m: Matching) -> SharingSet:
    pairs = set(m.pairs()) | {(k, k) for k in range(m.K)}
    return SharingSet(frozenset(pairs), m.K)
