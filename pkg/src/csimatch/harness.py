"""Monte Carlo comparison of CSI-T selection schemes over an SNR sweep.

Every deployment draws one geometry and one channel set, which are reused for
all schemes and SNR points. Deployments are independent and may run on worker
processes; results are reduced in deployment order, so the output depends only
on the seed.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import matching as mt
from .matching import PreferenceTable, QuotaConfig, SharingSet
from .network import (
    ChannelSet,
    NetworkInstance,
    SystemConfig,
    deployment_streams,
    draw_channels,
    generate_deployment,
    sigma2_for_snr,
)
from .overhead import OverheadReport, csi_overhead
from .precoding import RateVector, eigen_precoders, spectral_efficiency, wmmse_precoders

__all__ = [
    "SCHEMES",
    "SCHEME_LABELS",
    "CSV_HEADER",
    "ExperimentConfig",
    "ExperimentResult",
    "ResultRow",
    "run_scheme",
    "run_experiment",
    "greedy_centralized_selection",
]

SCHEMES = ("minimal", "full", "stable_matching", "stable_matching_no_overhead", "greedy_centralized")
SCHEME_LABELS = {s: s for s in SCHEMES}
# the greedy baseline is our own reconstruction, not a published algorithm
SCHEME_LABELS["greedy_centralized"] = "greedy_centralized(reconstructed)"

CSV_HEADER = (
    "scheme",
    "snr_db",
    "mean_sum_rate",
    "stderr_sum_rate",
    "mean_beta",
    "mean_L_csi",
    "mean_L_sm",
    "deployments",
    "seed",
)


def greedy_centralized_selection(prefs: PreferenceTable, quotas: QuotaConfig) -> SharingSet:
    """Central greedy pick of cross links by combined value, within both sides' quotas.

    Direct links are always present and count against the quotas.
    """
    K = prefs.K
    load_tx = [1] * K
    load_rx = [1] * K
    pairs = {(k, k) for k in range(K)}
    score = {
        (j, k): prefs.phi_tx[j, k] + prefs.phi_rx[k, j] for j in range(K) for k in range(K) if j != k
    }
    for j, k in sorted(score, key=lambda p: (-score[p], p)):
        if load_tx[j] < quotas.q_tx[j] and load_rx[k] < quotas.q_rx[k]:
            pairs.add((j, k))
            load_tx[j] += 1
            load_rx[k] += 1
    return SharingSet(frozenset(pairs), K)


def _design(scheme, channels, instance, config, snr, max_iters):
    """Sharing set, precoders and matching overhead for one scheme."""
    K = config.K
    if scheme == "minimal":
        return SharingSet.minimal(K), eigen_precoders(channels, config), 0
    if scheme == "full":
        sharing = SharingSet.full(K)
        return sharing, wmmse_precoders(channels, instance, config, sharing, max_iters), 0

    q = mt.compute_quota(config, mt.target_prelog(config, snr))
    quotas = QuotaConfig.uniform(K, q)
    prefs = mt.preference_table(channels, instance, config)
    if scheme in ("stable_matching", "stable_matching_no_overhead"):
        m, L_SM = mt.run_deferred_acceptance(prefs, quotas)
        sharing = mt.matching_to_sharing_set(m)
        if scheme == "stable_matching_no_overhead":
            L_SM = 0
    elif scheme == "greedy_centralized":
        sharing, L_SM = greedy_centralized_selection(prefs, quotas), 0
    else:
        raise ValueError(f"unknown scheme {scheme!r}")
    return sharing, wmmse_precoders(channels, instance, config, sharing, max_iters), L_SM


def run_scheme(
    scheme: str,
    channels: ChannelSet,
    instance: NetworkInstance,
    config: SystemConfig,
    snr: float,
    max_iters: int = 5,
) -> tuple[RateVector, OverheadReport]:
    """Design and evaluate one scheme at linear nominal SNR ``snr``.

    ``config.sigma2`` is ignored; the noise level follows from ``snr``.
    """
    config = replace(config, sigma2=sigma2_for_snr(config, snr))
    sharing, precoders, L_SM = _design(scheme, channels, instance, config, snr, max_iters)
    report = csi_overhead(sharing, config).with_prelog(L_SM, config.T)
    rates = spectral_efficiency(channels, instance, precoders, config.sigma2, report.beta)
    return rates, report


@dataclass(frozen=True)
class ExperimentConfig:
    system: SystemConfig = field(default_factory=SystemConfig)
    snr_grid: tuple[float, ...] = (-10.0, 0.0, 10.0, 20.0, 30.0)
    num_deployments: int = 200
    schemes: tuple[str, ...] = SCHEMES
    output_path: str | None = None
    max_iters: int = 5
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "snr_grid", tuple(float(s) for s in self.snr_grid))
        object.__setattr__(self, "schemes", tuple(self.schemes))
        if self.num_deployments < 1:
            raise ValueError("num_deployments must be >= 1")
        if not self.snr_grid:
            raise ValueError("snr_grid must not be empty")
        unknown = set(self.schemes) - set(SCHEMES)
        if unknown:
            raise ValueError(f"unknown schemes: {sorted(unknown)}")


@dataclass(frozen=True)
class ResultRow:
    scheme: str
    snr_db: float
    mean_sum_rate: float
    stderr_sum_rate: float
    mean_beta: float
    mean_L_csi: float
    mean_L_sm: float
    deployments: int
    seed: int

    def as_record(self) -> list[str]:
        return [
            SCHEME_LABELS[self.scheme],
            repr(self.snr_db),
            repr(self.mean_sum_rate),
            repr(self.stderr_sum_rate),
            repr(self.mean_beta),
            repr(self.mean_L_csi),
            repr(self.mean_L_sm),
            str(self.deployments),
            str(self.seed),
        ]


@dataclass
class ExperimentResult:
    """Aggregated rows plus the per-deployment samples behind them.

    ``samples[(scheme, snr_db)]`` maps ``sum_rate``, ``beta``, ``L_csi`` and
    ``L_sm`` to arrays ordered by deployment index.
    """

    rows: list[ResultRow]
    samples: dict

    def row(self, scheme: str, snr_db: float) -> ResultRow:
        for r in self.rows:
            if r.scheme == scheme and r.snr_db == snr_db:
                return r
        raise KeyError((scheme, snr_db))

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for r in self.rows:
            writer.writerow(r.as_record())
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", newline="") as fh:
                fh.write(text)
        return text


def _run_deployment(exp: ExperimentConfig, index: int) -> dict:
    cfg = exp.system
    geo_rng, fade_rng = deployment_streams(cfg.seed, index)
    instance = generate_deployment(cfg, geo_rng)
    channels = draw_channels(cfg, fade_rng)
    out = {}
    for snr_db in exp.snr_grid:
        snr = 10.0 ** (snr_db / 10.0)
        for scheme in exp.schemes:
            rates, report = run_scheme(scheme, channels, instance, cfg, snr, exp.max_iters)
            out[scheme, snr_db] = (rates.sum_rate, report.beta, report.L_CSI, report.L_SM)
    return out


def _run_chunk(exp, indices):
    return [_run_deployment(exp, i) for i in indices]


def run_experiment(exp: ExperimentConfig) -> ExperimentResult:
    n = exp.num_deployments
    if exp.workers <= 1:
        per_dep = [_run_deployment(exp, i) for i in range(n)]
    else:
        chunks = [list(range(w, n, exp.workers)) for w in range(exp.workers)]
        with ProcessPoolExecutor(max_workers=exp.workers) as pool:
            results = list(pool.map(_run_chunk, [exp] * len(chunks), chunks))
        per_dep = [None] * n
        for idx, res in zip(chunks, results):
            for i, r in zip(idx, res):
                per_dep[i] = r

    rows, samples = [], {}
    for scheme in exp.schemes:
        for snr_db in exp.snr_grid:
            arr = np.array([d[scheme, snr_db] for d in per_dep], dtype=float)
            s = {"sum_rate": arr[:, 0], "beta": arr[:, 1], "L_csi": arr[:, 2], "L_sm": arr[:, 3]}
            samples[scheme, snr_db] = s
            stderr = float(np.std(s["sum_rate"], ddof=1) / math.sqrt(n)) if n > 1 else 0.0
            rows.append(
                ResultRow(
                    scheme=scheme,
                    snr_db=snr_db,
                    mean_sum_rate=float(np.mean(s["sum_rate"])),
                    stderr_sum_rate=stderr,
                    mean_beta=float(np.mean(s["beta"])),
                    mean_L_csi=float(np.mean(s["L_csi"])),
                    mean_L_sm=float(np.mean(s["L_sm"])),
                    deployments=n,
                    seed=exp.system.seed,
                )
            )
    result = ExperimentResult(rows, samples)
    if exp.output_path:
        result.to_csv(exp.output_path)
    return result
