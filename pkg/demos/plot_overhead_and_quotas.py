"""
Overhead budget and matching quotas
===================================

How much of a coherence block goes to training and feedback, and how many
cross links each node may take on as the nominal SNR grows.
"""

import numpy as np
from matplotlib import pyplot as plt

from csimatch import SharingSet, SystemConfig, beta_bounds, compute_quota, csi_overhead, target_prelog

##############################################################################
# The 25-pair scenario
# --------------------
#
# With only the direct links fed back, a 5x5 network of 25 pairs loses 4.25 %
# of a 10^4 symbol block. Feeding back every cross link costs about a third.

cfg = SystemConfig()
for name, sharing in [("minimal", SharingSet.minimal(cfg.K)), ("full", SharingSet.full(cfg.K))]:
    rep = csi_overhead(sharing, cfg).with_prelog(0, cfg.T)
    print(f"{name:8s} L_CSI={rep.L_CSI:5d}  beta={rep.beta:.4f}")
print("bounds:", beta_bounds(cfg))

##############################################################################
# Target pre-log and quota along the SNR axis
# -------------------------------------------
#
# The target slides from the minimal-sharing value towards full sharing as
# SNR grows; the quota is the largest uniform number of partners that keeps
# the feedback within the remaining budget.

snr_db = np.linspace(-20, 40, 121)
beta_hat = np.array([target_prelog(cfg, 10 ** (s / 10)) for s in snr_db])
quota = np.array([compute_quota(cfg, b) for b in beta_hat])

fig, (ax1, ax2) = plt.subplots(2, 1, sharex=True, figsize=(6, 5))
ax1.plot(snr_db, beta_hat)
ax1.axhline(beta_bounds(cfg)[0], ls=":", c="k")
ax1.axhline(beta_bounds(cfg)[1], ls=":", c="k")
ax1.set_ylabel("target pre-log")
ax2.step(snr_db, quota, where="post")
ax2.set_ylabel("quota q")
ax2.set_xlabel("nominal SNR [dB]")
fig.tight_layout()
plt.show()
