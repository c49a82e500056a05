"""
Stable matching on one deployment
=================================

Draw a network, build both sides' preferences, run deferred acceptance and
look at the CSI-T sharing set it produces.
"""

import numpy as np
from matplotlib import pyplot as plt

from csimatch import (
    QuotaConfig,
    SystemConfig,
    deployment_streams,
    draw_channels,
    generate_deployment,
    greedy_centralized_selection,
    is_stable,
    matching_to_sharing_set,
    preference_table,
    run_deferred_acceptance,
)

cfg = SystemConfig(K=8, M=3, N=3, d=1, seed=3)
geo, fade = deployment_streams(cfg.seed, 0)
inst = generate_deployment(cfg, geo)
ch = draw_channels(cfg, fade)

##############################################################################
# Preferences
# -----------
#
# Receivers rank transmitters by how their interference lines up with the
# direct channel; transmitters rank receivers by interference power per
# antenna pair. Direct links are held from the start.

prefs = preference_table(ch, inst, cfg)
np.set_printoptions(precision=3, suppress=True)
print("receiver values (row = rx, col = tx):\n", prefs.phi_rx)

##############################################################################
# Deferred acceptance
# -------------------

quotas = QuotaConfig.uniform(cfg.K, 3)
trace = []
m, L_SM = run_deferred_acceptance(prefs, quotas, trace=trace)
print(f"{len(trace)} rounds, {L_SM} symbol intervals of signalling")
print("stable:", is_stable(m, prefs, quotas))
print("matching:", m)

sharing = matching_to_sharing_set(m)
greedy = greedy_centralized_selection(prefs, quotas)
print("links shared by both selections:", len(sharing.pairs & greedy.pairs), "of", len(sharing))

##############################################################################
# Geometry of the selected links
# ------------------------------

fig, ax = plt.subplots(figsize=(5, 5))
ax.scatter(*inst.tx_pos.T, marker="^", label="tx")
ax.scatter(*inst.rx_pos.T, marker="o", label="rx")
for j, k in sharing:
    style = "-" if j == k else "--"
    ax.plot(*zip(inst.tx_pos[j], inst.rx_pos[k]), style, c="gray", lw=0.8)
ax.set_aspect("equal")
ax.legend()
plt.show()
