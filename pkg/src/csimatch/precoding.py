"""Transmit precoder design and per-link spectral efficiency.

Design works on a *design network* where every link outside the CSI-T sharing
set has a zero channel, since transmitters never learn those channels. Rates are
always evaluated on the true network.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .matching import SharingSet
from .network import ChannelSet, NetworkInstance, SystemConfig

__all__ = [
    "PrecoderSet",
    "RateVector",
    "eigen_precoders",
    "interference_covariance",
    "wmmse_precoders",
    "spectral_efficiency",
    "link_rates",
    "power_constrained_update",
]

# a looser stop costs objective value to first order and breaks WMMSE monotonicity at the 1e-9 level
POWER_RTOL = 1e-13
BISECTION_MAX_ITERS = 200
SINGULAR_REG = 1e-12


@dataclass(frozen=True, eq=False)
class PrecoderSet:
    V: tuple

    def __post_init__(self):
        object.__setattr__(self, "V", tuple(np.asarray(v, dtype=complex) for v in self.V))

    def powers(self) -> np.ndarray:
        return np.array([np.real(np.vdot(v, v)) for v in self.V])


@dataclass(frozen=True, eq=False)
class RateVector:
    R: np.ndarray
    beta: float

    @property
    def sum_rate(self) -> float:
        return float(np.sum(self.R))


def eigen_precoders(channels: ChannelSet, config: SystemConfig) -> PrecoderSet:
    """Equal-power beamforming along the dominant right singular vectors of each direct channel."""
    V = []
    for k in range(config.K):
        Hkk = channels.H[k][k]
        d = config.d[k]
        # full_matrices keeps an orthonormal basis, so rank-deficient channels are padded with null-space directions
        _, s, Vh = np.linalg.svd(Hkk, full_matrices=True)
        if np.count_nonzero(s > s.max(initial=0.0) * 1e-12) < d:
            warnings.warn(f"direct channel {k} has rank below {d} streams", RuntimeWarning)
        V.append(np.sqrt(config.P[k] / d) * Vh[:d].conj().T)
    return PrecoderSet(V)


def interference_covariance(
    k: int,
    channels: ChannelSet,
    instance: NetworkInstance,
    precoders: PrecoderSet,
    sigma2: float,
    restrict_to: SharingSet | None = None,
) -> np.ndarray:
    """Noise plus interference covariance at receiver k, optionally over shared links only."""
    N = channels.H[k][k].shape[0]
    Z = sigma2 * np.eye(N, dtype=complex)
    for j in range(channels.K):
        if j == k or (restrict_to is not None and (j, k) not in restrict_to):
            continue
        A = channels.H[j][k] @ precoders.V[j]
        Z += instance.gamma[j, k] * (A @ A.conj().T)
    return Z


def _logdet_ratio(Z: np.ndarray, S: np.ndarray) -> float:
    """``log2 |I + Z^-1 S|`` for Hermitian PD ``Z`` and PSD ``S``."""
    L = np.linalg.cholesky(Z + S)
    L0 = np.linalg.cholesky(Z)
    return 2.0 * float(np.sum(np.log2(np.abs(np.diag(L)))) - np.sum(np.log2(np.abs(np.diag(L0)))))


def link_rates(G: list, V: list, sigma2: float) -> np.ndarray:
    """Per-link ``log2 |I + Z_k^-1 S_k|`` for effective channels ``G[j][k]`` (``None`` means zero)."""
    K = len(V)
    rates = np.empty(K)
    for k in range(K):
        N = G[k][k].shape[0]
        Z = sigma2 * np.eye(N, dtype=complex)
        for j in range(K):
            if j != k and G[j][k] is not None:
                A = G[j][k] @ V[j]
                Z += A @ A.conj().T
        A = G[k][k] @ V[k]
        rates[k] = max(_logdet_ratio(Z, A @ A.conj().T), 0.0)
    return rates


def _effective_channels(channels, instance, sharing=None) -> list:
    K = channels.K
    return [
        [
            np.sqrt(instance.gamma[j, k]) * channels.H[j][k]
            if sharing is None or (j, k) in sharing
            else None
            for k in range(K)
        ]
        for j in range(K)
    ]


def power_constrained_update(A: np.ndarray, B: np.ndarray, P: float) -> tuple[np.ndarray, float]:
    """Minimise ``tr(V^H A V) - 2 Re tr(V^H B)`` subject to ``||V||_F^2 <= P``.

    The solution is ``V = (A + mu I)^-1 B`` with the smallest ``mu >= 0`` meeting
    the power budget; ``mu`` is found by bisection on the eigen-expansion of the
    transmit power. Returns ``(V, mu)``.
    """
    lam, Q = np.linalg.eigh(A)
    lam = np.clip(lam, 0.0, None)
    C = Q.conj().T @ B
    weight = np.sum(np.abs(C) ** 2, axis=1)
    tol = SINGULAR_REG * max(lam.max(initial=0.0), 1.0)

    def solve(mu):
        denom = lam + mu
        inv = np.where(denom > tol, 1.0 / np.maximum(denom, tol), 0.0)
        return Q @ (inv[:, None] * C)

    def power(mu):
        denom = lam + mu
        inv = np.where(denom > tol, 1.0 / np.maximum(denom, tol), 0.0)
        return float(np.sum(weight * inv**2))

    if power(0.0) <= P:
        return solve(0.0), 0.0

    lo, hi = 0.0, np.sqrt(weight.sum() / P)
    if power(hi) > P:
        # cannot happen for the bound above, kept as a guard against round-off
        return solve(0.0) * np.sqrt(P / power(0.0)), 0.0
    for _ in range(BISECTION_MAX_ITERS):
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi:
            break
        p = power(mid)
        if p > P:
            lo = mid
        else:
            hi = mid
            if P - p <= POWER_RTOL * P:
                break
    return solve(hi), hi


def wmmse_precoders(
    channels: ChannelSet,
    instance: NetworkInstance,
    config: SystemConfig,
    sharing: SharingSet,
    max_iters: int = 5,
    history: list | None = None,
) -> PrecoderSet:
    """Weighted-MMSE alternating optimisation over the shared links.

    Starts from :func:`eigen_precoders` and runs ``max_iters`` rounds of
    (MMSE receivers, MSE weights, power-constrained precoders). If ``history``
    is a list, the design-network sum rate is appended at the start and after
    every round.
    """
    if max_iters < 1:
        raise ValueError("max_iters must be >= 1")
    K, sigma2 = config.K, config.sigma2
    G = _effective_channels(channels, instance, sharing)
    V = list(eigen_precoders(channels, config).V)
    if history is not None:
        history.append(float(link_rates(G, V, sigma2).sum()))

    for _ in range(max_iters):
        U, W = [], []
        for k in range(K):
            Z = sigma2 * np.eye(G[k][k].shape[0], dtype=complex)
            for j in range(K):
                if G[j][k] is not None:
                    A = G[j][k] @ V[j]
                    Z += A @ A.conj().T
            Hv = G[k][k] @ V[k]
            Uk = np.linalg.solve(Z, Hv)
            E = np.eye(config.d[k]) - Uk.conj().T @ Hv
            E = 0.5 * (E + E.conj().T)
            try:
                Wk = np.linalg.inv(E)
            except np.linalg.LinAlgError:
                Wk = np.linalg.inv(E + SINGULAR_REG * np.eye(config.d[k]))
            U.append(Uk)
            W.append(0.5 * (Wk + Wk.conj().T))

        for j in range(K):
            A = np.zeros((config.M[j], config.M[j]), dtype=complex)
            for k in range(K):
                if G[j][k] is not None:
                    F = G[j][k].conj().T @ U[k]
                    A += F @ W[k] @ F.conj().T
            A = 0.5 * (A + A.conj().T)
            B = G[j][j].conj().T @ U[j] @ W[j]
            V[j], _ = power_constrained_update(A, B, config.P[j])

        if history is not None:
            history.append(float(link_rates(G, V, sigma2).sum()))

    return PrecoderSet(V)


def spectral_efficiency(
    channels: ChannelSet,
    instance: NetworkInstance,
    precoders: PrecoderSet,
    sigma2: float,
    beta: float,
) -> RateVector:
    """Per-link rates in bit/s/Hz on the true network, scaled by the pre-log ``beta``."""
    if not 0.0 <= beta <= 1.0:
        raise ValueError("beta must lie in [0, 1]")
    G = _effective_channels(channels, instance)
    return RateVector(beta * link_rates(G, list(precoders.V), sigma2), beta)
