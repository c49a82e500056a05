"""Symbol-interval accounting for CSI acquisition and the resulting pre-log factor."""

from __future__ import annotations

from dataclasses import dataclass, replace

from .matching import SharingSet
from .network import SystemConfig

__all__ = ["InfeasibleCoherenceBlockError", "OverheadReport", "csi_overhead", "prelog"]


class InfeasibleCoherenceBlockError(ValueError):
    """Training, matching and feedback use up the whole coherence block."""


@dataclass(frozen=True)
class OverheadReport:
    """Overhead per acquisition phase.

    ``L_train1`` is up/downlink channel training, ``L_feedback`` analog CSI
    feedback and ``L_train2`` effective-channel training; ``L_SM`` counts the
    matching messages. ``beta`` stays ``None`` until :meth:`with_prelog`.
    """

    L_train1: int
    L_feedback: int
    L_train2: int
    L_SM: int = 0
    beta: float | None = None

    @property
    def L_CSI(self) -> int:
        return self.L_train1 + self.L_feedback + self.L_train2

    def with_prelog(self, L_SM: int, T: int) -> "OverheadReport":
        return replace(self, L_SM=int(L_SM), beta=prelog(self.L_CSI, L_SM, T))


def csi_overhead(sharing: SharingSet, config: SystemConfig) -> OverheadReport:
    if sharing.K != config.K:
        raise ValueError("sharing set and config disagree on K")
    K = config.K
    return OverheadReport(
        L_train1=sum(config.M[k] + config.N[k] for k in range(K)),
        L_feedback=sum(config.M[j] for j, _ in sharing.pairs),
        L_train2=sum(config.d),
    )


def prelog(L_CSI: int, L_SM: int, T: int) -> float:
    """Fraction of the coherence block left for data."""
    if T <= 0:
        raise ValueError("T must be positive")
    used = L_CSI + L_SM
    if used >= T:
        raise InfeasibleCoherenceBlockError(
            f"overhead of {used} symbol intervals leaves no data in a block of {T}"
        )
    # integer numerator keeps the value correctly rounded
    return (T - used) / T
