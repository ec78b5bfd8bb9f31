# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled implementations of the hot kernels.

Mirrors ``numpy_backend`` function-for-function; see that module for the
contracts. Small batches avoid numpy call overhead here, large batches are
usually better served by the BLAS-backed fallback (see benchmarks/).
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport atan2, fmax, fmin, fmod, hypot, log10, sqrt

cnp.import_array()

NAME = "cython"

DEF PI = 3.141592653589793


cdef void _dense_relu(double[:, ::1] x, double[:, ::1] w, double[::1] b,
                      double[:, ::1] out) noexcept nogil:
    # out = relu(x @ w + b); loops ordered for contiguous access over columns
    cdef Py_ssize_t rows = x.shape[0], din = x.shape[1], dout = w.shape[1]
    cdef Py_ssize_t i, f, j
    cdef double xv
    for i in range(rows):
        for j in range(dout):
            out[i, j] = b[j]
        for f in range(din):
            xv = x[i, f]
            if xv != 0.0:
                for j in range(dout):
                    out[i, j] += xv * w[f, j]
        for j in range(dout):
            if out[i, j] < 0.0:
                out[i, j] = 0.0


cdef void _head(double[:, ::1] h, double[::1] w5, double b5,
                double[::1] out) noexcept nogil:
    cdef Py_ssize_t rows = h.shape[0], d = h.shape[1]
    cdef Py_ssize_t i, j
    cdef double s
    for i in range(rows):
        s = b5
        for j in range(d):
            s += h[i, j] * w5[j]
        out[i] = s


def mlp_forward(double[:, ::1] x, double[:, ::1] w1, double[::1] b1,
                double[:, ::1] w2, double[::1] b2,
                double[:, ::1] w3, double[::1] b3,
                double[:, ::1] w4, double[::1] b4,
                double[::1] w5, double b5):
    cdef Py_ssize_t rows = x.shape[0]
    cdef Py_ssize_t hid = w1.shape[1]
    h1 = np.empty((rows, hid), dtype=np.float64)
    h2 = np.empty((rows, hid), dtype=np.float64)
    h3 = np.empty((rows, hid), dtype=np.float64)
    h4 = np.empty((rows, hid), dtype=np.float64)
    logits = np.empty(rows, dtype=np.float64)
    cdef double[:, ::1] v1 = h1, v2 = h2, v3 = h3, v4 = h4
    cdef double[::1] vl = logits
    with nogil:
        _dense_relu(x, w1, b1, v1)
        _dense_relu(v1, w2, b2, v2)
        _dense_relu(v2, w3, b3, v3)
        _dense_relu(v3, w4, b4, v4)
        _head(v4, w5, b5, vl)
    return logits, h1, h2, h3, h4


def mlp_logits(double[:, ::1] x, double[:, ::1] w1, double[::1] b1,
               double[:, ::1] w2, double[::1] b2,
               double[:, ::1] w3, double[::1] b3,
               double[:, ::1] w4, double[::1] b4,
               double[::1] w5, double b5):
    logits, _, _, _, _ = mlp_forward(x, w1, b1, w2, b2, w3, b3, w4, b4, w5, b5)
    return logits


cdef void _backprop_layer(double[:, ::1] dz_next, double[:, ::1] w_next,
                          double[:, ::1] h, double[:, ::1] dz) noexcept nogil:
    # dz = (dz_next @ w_next.T) gated by h > 0
    cdef Py_ssize_t rows = dz_next.shape[0]
    cdef Py_ssize_t dout = w_next.shape[1], din = w_next.shape[0]
    cdef Py_ssize_t i, j, f
    cdef double g
    for i in range(rows):
        for f in range(din):
            dz[i, f] = 0.0
        for j in range(dout):
            g = dz_next[i, j]
            if g != 0.0:
                for f in range(din):
                    dz[i, f] += g * w_next[f, j]
        for f in range(din):
            if h[i, f] <= 0.0:
                dz[i, f] = 0.0


cdef void _accum_grads(double[:, ::1] inp, double[:, ::1] dz,
                       double[:, ::1] dw, double[::1] db) noexcept nogil:
    # dw += inp.T @ dz; db += dz.sum(axis=0)
    cdef Py_ssize_t rows = inp.shape[0], din = inp.shape[1], dout = dz.shape[1]
    cdef Py_ssize_t i, f, j
    cdef double xv
    for i in range(rows):
        for f in range(din):
            xv = inp[i, f]
            if xv != 0.0:
                for j in range(dout):
                    dw[f, j] += xv * dz[i, j]
        for j in range(dout):
            db[j] += dz[i, j]


def mlp_backward(double[:, ::1] x,
                 double[:, ::1] w2, double[:, ::1] w3, double[:, ::1] w4,
                 double[::1] w5,
                 double[:, ::1] h1, double[:, ::1] h2,
                 double[:, ::1] h3, double[:, ::1] h4,
                 double[::1] dlogits):
    cdef Py_ssize_t rows = x.shape[0], din = x.shape[1], hid = h1.shape[1]
    cdef Py_ssize_t i, j
    dw1 = np.zeros((din, hid)); db1 = np.zeros(hid)
    dw2 = np.zeros((hid, hid)); db2 = np.zeros(hid)
    dw3 = np.zeros((hid, hid)); db3 = np.zeros(hid)
    dw4 = np.zeros((hid, hid)); db4 = np.zeros(hid)
    dw5 = np.zeros(hid)
    cdef double db5 = 0.0
    dz4 = np.empty((rows, hid)); dz3 = np.empty((rows, hid))
    dz2 = np.empty((rows, hid)); dz1 = np.empty((rows, hid))
    cdef double[:, ::1] vz4 = dz4, vz3 = dz3, vz2 = dz2, vz1 = dz1
    cdef double[:, ::1] vw1 = dw1, vw2 = dw2, vw3 = dw3, vw4 = dw4
    cdef double[::1] vb1 = db1, vb2 = db2, vb3 = db3, vb4 = db4, vw5 = dw5
    cdef double g
    with nogil:
        for i in range(rows):
            g = dlogits[i]
            db5 += g
            for j in range(hid):
                vw5[j] += h4[i, j] * g
                if h4[i, j] > 0.0:
                    vz4[i, j] = g * w5[j]
                else:
                    vz4[i, j] = 0.0
        _accum_grads(h3, vz4, vw4, vb4)
        _backprop_layer(vz4, w4, h3, vz3)
        _accum_grads(h2, vz3, vw3, vb3)
        _backprop_layer(vz3, w3, h2, vz2)
        _accum_grads(h1, vz2, vw2, vb2)
        _backprop_layer(vz2, w2, h1, vz1)
        _accum_grads(x, vz1, vw1, vb1)
    return dw1, db1, dw2, db2, dw3, db3, dw4, db4, dw5, float(db5)


def rsrp_field(double[::1] cell_x, double[::1] cell_y,
               double[::1] site_x, double[::1] site_y,
               double[::1] azimuths_deg,
               double tx_power_dbm, double max_gain_dbi,
               double downtilt_deg, double antenna_height_m,
               double h_beamwidth_deg, double v_beamwidth_deg,
               double sidelobe_floor_db, double pl_ref_db, double d_ref_m,
               double pl_exponent, double rsrp_offset_db):
    cdef Py_ssize_t n_cells = cell_x.shape[0]
    cdef Py_ssize_t n_sites = site_x.shape[0]
    cdef Py_ssize_t n_az = azimuths_deg.shape[0]
    out = np.empty(n_cells, dtype=np.float64)
    cdef double[::1] vout = out
    cdef Py_ssize_t c, s, a
    cdef double dx, dy, dh, d3, pl, depression, psi, v_att, bearing, phi
    cdef double att, rsrp, best
    cdef double deg = 180.0 / PI
    with nogil:
        for c in range(n_cells):
            best = -1e30
            for s in range(n_sites):
                dx = cell_x[c] - site_x[s]
                dy = cell_y[c] - site_y[s]
                dh = hypot(dx, dy)
                d3 = sqrt(dh * dh + antenna_height_m * antenna_height_m)
                pl = pl_ref_db + 10.0 * pl_exponent * log10(
                    fmax(d3, d_ref_m) / d_ref_m)
                depression = atan2(antenna_height_m, dh) * deg
                psi = (depression - downtilt_deg) / v_beamwidth_deg
                v_att = 12.0 * psi * psi
                bearing = atan2(dx, dy) * deg
                for a in range(n_az):
                    # wrap to [-180, 180) with Python modulo semantics
                    phi = fmod(bearing - azimuths_deg[a] + 180.0, 360.0)
                    if phi < 0.0:
                        phi += 360.0
                    phi = (phi - 180.0) / h_beamwidth_deg
                    att = fmin(12.0 * phi * phi + v_att, sidelobe_floor_db)
                    rsrp = (tx_power_dbm + (max_gain_dbi - att) - pl
                            + rsrp_offset_db)
                    if rsrp > best:
                        best = rsrp
            vout[c] = best
    return out
