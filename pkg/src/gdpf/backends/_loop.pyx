# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled sequential assignment loop for the planar constant-velocity model.

Mirrors backends.reference exactly for the (x, y, vx, vy) state observed
in position: same candidate order (rows are ascending by id), same score
arithmetic, same tie-breaking, same update equations.
"""

from libc.math cimport cos, exp, fabs, sin, sqrt

import numpy as np


cdef inline double _box_signed_distance(
    double px, double py, double cx, double cy,
    double hx, double hy, double heading,
) noexcept nogil:
    cdef double ch = cos(heading)
    cdef double sh = sin(heading)
    cdef double dx = px - cx
    cdef double dy = py - cy
    cdef double rx = ch * dx + sh * dy
    cdef double ry = -sh * dx + ch * dy
    cdef double qx = fabs(rx) - hx
    cdef double qy = fabs(ry) - hy
    cdef double ox = qx if qx > 0.0 else 0.0
    cdef double oy = qy if qy > 0.0 else 0.0
    cdef double inner = qx if qx > qy else qy
    if inner > 0.0:
        inner = 0.0
    return sqrt(ox * ox + oy * oy) + inner


def run(
    double[:, ::1] means,          # (cap, 4), rows [0, n_existing) filled
    double[:, :, ::1] covs,        # (cap, 4, 4)
    double[::1] counts,            # (cap,)
    double[::1] exist,             # (cap,)
    unsigned char[::1] frozen,     # (cap,)
    long long[::1] ids,            # (cap,)
    Py_ssize_t n_existing,
    double[:, ::1] meas_xy,        # (M, 2)
    double[::1] meas_w,            # (M,)
    double[:, ::1] extents,        # (M, 3) in bbox mode, else (0, 3)
    long long[:, ::1] cells,       # (M, 2) in grid mode, else (0, 2)
    int link_mode,                 # 0 none, 1 bbox, 2 grid
    double alpha, double link_floor, double link_scale,
    double a, double b, double new_like,
    double assoc_gain, double birth_exist,
    bint use_crp,
    double r00, double r01, double r10, double r11,
    double v_max,
    long long next_id,
    long long[::1] out_label,      # (M,) assigned cluster id, -2 if unassigned
    long long[::1] out_row,        # (M,) row index of that cluster, -1 if unassigned
    double[::1] out_post,          # (M,)
    unsigned char[::1] out_flag,   # (M,) 0 ok, 1 degenerate->NEW, 2 singular
):
    cdef Py_ssize_t M = meas_xy.shape[0]
    cdef Py_ssize_t K = n_existing
    cdef Py_ssize_t i, j, k, r, c, rr
    cdef long long processed = 0

    best_link_arr = np.empty(means.shape[0], dtype=np.float64)
    cdef double[::1] best_link = best_link_arr

    cdef double zx, zy, s, lp, dd, occ, lik, score, total, new_score
    cdef double best_score, best_count
    cdef Py_ssize_t best_k
    cdef long long dr, dc
    cdef double denom
    cdef double s00, s01, s10, s11, det, i00, i01, i10, i11
    cdef double ivx, ivy
    cdef double g[4][2]
    cdef double ap[4][4]
    cdef double np_[4][4]
    cdef double tmp

    for i in range(M):
        zx = meas_xy[i, 0]
        zy = meas_xy[i, 1]

        # Link factor: best same-frame link into each cluster row; the
        # floor applies only to rows with no same-frame member (-1 here).
        if link_mode != 0:
            for k in range(K):
                best_link[k] = -1.0
            for j in range(i):
                r = out_row[j]
                if r < 0:
                    continue
                if link_mode == 1:
                    s = _box_signed_distance(
                        zx, zy,
                        meas_xy[j, 0], meas_xy[j, 1],
                        extents[j, 0], extents[j, 1], extents[j, 2],
                    )
                    if s < 0.0:
                        s = 0.0
                    lp = exp(-s / link_scale)
                else:
                    dr = cells[i, 0] - cells[j, 0]
                    if dr < 0:
                        dr = -dr
                    dc = cells[i, 1] - cells[j, 1]
                    if dc < 0:
                        dc = -dc
                    lp = 1.0 if (dr <= 1 and dc <= 1) else 0.0
                if lp > best_link[r]:
                    best_link[r] = lp

        # Score every live row plus NEW; rows are ascending by id, so on
        # exact ties the earlier row (smaller id) wins unless out-counted.
        denom = processed + alpha
        total = 0.0
        best_score = -1.0
        best_count = 0.0
        best_k = -1
        for k in range(K):
            if frozen[k]:
                continue
            if link_mode == 0:
                dd = 1.0
            else:
                dd = best_link[k] if best_link[k] >= 0.0 else link_floor
            occ = counts[k] / denom if use_crp else 1.0
            tmp = means[k, 0] - zx
            lik = tmp * tmp / a
            tmp = means[k, 1] - zy
            lik += tmp * tmp / b
            score = dd * occ * exp(-lik)
            total += score
            if score > best_score or (score == best_score and counts[k] > best_count):
                best_score = score
                best_count = counts[k]
                best_k = k
        new_score = alpha * (alpha / denom if use_crp else 1.0) * new_like
        total += new_score

        if total <= 0.0:
            # Degenerate row: fall back to NEW with posterior 1.
            out_flag[i] = 1
            best_k = -1
            out_post[i] = 1.0
        elif new_score > best_score:
            best_k = -1
            out_post[i] = new_score / total
        else:
            out_post[i] = best_score / total

        if best_k < 0:
            # Birth: position from the measurement, velocity 0.
            means[K, 0] = zx
            means[K, 1] = zy
            means[K, 2] = 0.0
            means[K, 3] = 0.0
            for r in range(4):
                for c in range(4):
                    covs[K, r, c] = 0.0
            covs[K, 0, 0] = 4.0 * r00
            covs[K, 1, 1] = 4.0 * r11
            covs[K, 2, 2] = v_max * v_max / 3.0
            covs[K, 3, 3] = v_max * v_max / 3.0
            counts[K] = 1.0
            exist[K] = birth_exist
            frozen[K] = 0
            ids[K] = next_id
            out_label[i] = next_id
            out_row[i] = K
            next_id += 1
            K += 1
            processed += 1
            continue

        # Kalman correction of row best_k (C = [I2 0], Joseph form).
        k = best_k
        s00 = covs[k, 0, 0] + r00
        s01 = covs[k, 0, 1] + r01
        s10 = covs[k, 1, 0] + r10
        s11 = covs[k, 1, 1] + r11
        det = s00 * s11 - s01 * s10
        if not (det > 0.0 and det == det):
            out_flag[i] = 2
            out_label[i] = -2
            out_row[i] = -1
            continue
        i00 = s11 / det
        i01 = -s01 / det
        i10 = -s10 / det
        i11 = s00 / det
        for r in range(4):
            g[r][0] = covs[k, r, 0] * i00 + covs[k, r, 1] * i10
            g[r][1] = covs[k, r, 0] * i01 + covs[k, r, 1] * i11
        ivx = zx - means[k, 0]
        ivy = zy - means[k, 1]
        for r in range(4):
            means[k, r] += g[r][0] * ivx + g[r][1] * ivy
        # ap = (I - G C) P
        for r in range(4):
            for c in range(4):
                ap[r][c] = covs[k, r, c] - g[r][0] * covs[k, 0, c] - g[r][1] * covs[k, 1, c]
        # np_ = ap (I - G C)^T + G R G^T
        for r in range(4):
            for c in range(4):
                tmp = ap[r][c] - ap[r][0] * g[c][0] - ap[r][1] * g[c][1]
                tmp += g[r][0] * (r00 * g[c][0] + r01 * g[c][1])
                tmp += g[r][1] * (r10 * g[c][0] + r11 * g[c][1])
                np_[r][c] = tmp
        for r in range(4):
            for c in range(4):
                covs[k, r, c] = 0.5 * (np_[r][c] + np_[c][r])

        counts[k] += meas_w[i]
        exist[k] = exist[k] + (1.0 - exist[k]) * assoc_gain
        out_label[i] = ids[k]
        out_row[i] = k
        processed += 1

    return K, next_id
