"""Pure-numpy implementations of the hot kernels.

This module is the reference semantics for the compiled core in ``_core.pyx``;
both expose the same functions with identical signatures. Arrays are float64,
C-contiguous. Shapes follow the policy network layout: input -> 128 -> 128 ->
128 -> 128 -> 1 with ReLU on the hidden layers.
"""

import numpy as np

NAME = "numpy"


def mlp_forward(x, w1, b1, w2, b2, w3, b3, w4, b4, w5, b5):
    """Forward pass for a batch of rows.

    x: (rows, d). Returns (logits (rows,), h1, h2, h3, h4) where h* are the
    post-ReLU hidden activations kept for the backward pass.
    """
    h1 = np.maximum(x @ w1 + b1, 0.0)
    h2 = np.maximum(h1 @ w2 + b2, 0.0)
    h3 = np.maximum(h2 @ w3 + b3, 0.0)
    h4 = np.maximum(h3 @ w4 + b4, 0.0)
    logits = h4 @ w5 + b5
    return logits, h1, h2, h3, h4


def mlp_logits(x, w1, b1, w2, b2, w3, b3, w4, b4, w5, b5):
    """Forward pass returning logits only (no activation cache)."""
    h = np.maximum(x @ w1 + b1, 0.0)
    h = np.maximum(h @ w2 + b2, 0.0)
    h = np.maximum(h @ w3 + b3, 0.0)
    h = np.maximum(h @ w4 + b4, 0.0)
    return h @ w5 + b5


def mlp_backward(x, w2, w3, w4, w5, h1, h2, h3, h4, dlogits):
    """Backpropagate per-row logit gradients to parameter gradients.

    Returns (dw1, db1, dw2, db2, dw3, db3, dw4, db4, dw5, db5) summed over
    the batch. ReLU subgradient is 0 at 0 (h > 0 gate).
    """
    dw5 = h4.T @ dlogits
    db5 = float(dlogits.sum())
    dz4 = np.outer(dlogits, w5)
    dz4[h4 <= 0.0] = 0.0
    dw4 = h3.T @ dz4
    db4 = dz4.sum(axis=0)
    dz3 = dz4 @ w4.T
    dz3[h3 <= 0.0] = 0.0
    dw3 = h2.T @ dz3
    db3 = dz3.sum(axis=0)
    dz2 = dz3 @ w3.T
    dz2[h2 <= 0.0] = 0.0
    dw2 = h1.T @ dz2
    db2 = dz2.sum(axis=0)
    dz1 = dz2 @ w2.T
    dz1[h1 <= 0.0] = 0.0
    dw1 = x.T @ dz1
    db1 = dz1.sum(axis=0)
    return dw1, db1, dw2, db2, dw3, db3, dw4, db4, dw5, db5


def rsrp_field(
    cell_x,
    cell_y,
    site_x,
    site_y,
    azimuths_deg,
    tx_power_dbm,
    max_gain_dbi,
    downtilt_deg,
    antenna_height_m,
    h_beamwidth_deg,
    v_beamwidth_deg,
    sidelobe_floor_db,
    pl_ref_db,
    d_ref_m,
    pl_exponent,
    rsrp_offset_db,
):
    """Best-server RSRP (dBm) at each (cell_x, cell_y) point.

    Max over all site/sector pairs of tx + sector gain - log-distance
    pathloss of the 3D link (distances floored at d_ref_m).
    """
    dx = cell_x[:, None] - site_x[None, :]
    dy = cell_y[:, None] - site_y[None, :]
    dh = np.hypot(dx, dy)
    d3 = np.sqrt(dh * dh + antenna_height_m * antenna_height_m)
    pathloss = pl_ref_db + 10.0 * pl_exponent * np.log10(
        np.maximum(d3, d_ref_m) / d_ref_m
    )
    depression = np.degrees(np.arctan2(antenna_height_m, dh))
    psi = depression - downtilt_deg
    v_att = 12.0 * (psi / v_beamwidth_deg) ** 2
    bearing = np.degrees(np.arctan2(dx, dy))  # 0 deg = +y, clockwise
    best = np.full(cell_x.shape[0], -np.inf)
    for az in azimuths_deg:
        phi = (bearing - az + 180.0) % 360.0 - 180.0
        att = np.minimum(
            12.0 * (phi / h_beamwidth_deg) ** 2 + v_att, sidelobe_floor_db
        )
        rsrp = tx_power_dbm + (max_gain_dbi - att) - pathloss + rsrp_offset_db
        best = np.maximum(best, rsrp.max(axis=1))
    return best
