"""Independent naive re-implementations used to cross-check the filter.

Nothing here imports scoring code from the package; the label oracle
re-derives the posterior argmax from scratch with plain loops so that a
bug in the production scoring path cannot hide itself.
"""

import math

NEW = -1


def oracle_box_distance(px, py, cx, cy, hx, hy, heading):
    """Signed distance to the nearest side of an oriented rectangle,
    computed via the corner-free rotate-and-clamp construction."""
    ch = math.cos(heading)
    sh = math.sin(heading)
    # rotate the offset into the box frame
    ox = ch * (px - cx) + sh * (py - cy)
    oy = -sh * (px - cx) + ch * (py - cy)
    ex = abs(ox) - hx
    ey = abs(oy) - hy
    if ex <= 0.0 and ey <= 0.0:
        return max(ex, ey)  # inside: distance to the closest side, negative
    cx_ = max(ex, 0.0)
    cy_ = max(ey, 0.0)
    return math.sqrt(cx_ * cx_ + cy_ * cy_)


def oracle_label(
    y_pos,
    y_extent,
    y_cell,
    cluster_rows,
    same_frame_members,
    processed_count,
    hyper,
    link_mode,
):
    """Greedy argmax over the association posterior, re-derived naively.

    cluster_rows: list of (id, mean_x, mean_y, assign_count).
    same_frame_members: list of (cluster_id, pos, extent, cell) for
    measurements already assigned this frame.
    link_mode: "none" | "bbox" | "grid".
    Returns (label, posterior).
    """
    alpha = hyper.alpha
    denom = processed_count + alpha

    scores = []
    for cid, mx, my, count in cluster_rows:
        if link_mode == "none":
            link = 1.0
        else:
            link = None
            for m_cid, m_pos, m_extent, m_cell in same_frame_members:
                if m_cid != cid:
                    continue
                if link_mode == "bbox":
                    d = oracle_box_distance(
                        y_pos[0], y_pos[1], m_pos[0], m_pos[1],
                        m_extent[0], m_extent[1], m_extent[2],
                    )
                    lp = math.exp(-max(d, 0.0) / hyper.link_scale)
                else:
                    lp = (
                        1.0
                        if abs(y_cell[0] - m_cell[0]) <= 1 and abs(y_cell[1] - m_cell[1]) <= 1
                        else 0.0
                    )
                if link is None or lp > link:
                    link = lp
            if link is None:
                link = hyper.link_floor
        occ = count / denom if hyper.use_crp_factor else 1.0
        dx = mx - y_pos[0]
        dy = my - y_pos[1]
        lik = math.exp(-(dx * dx / hyper.a + dy * dy / hyper.b))
        scores.append((cid, count, link * occ * lik))

    new_score = alpha * (alpha / denom if hyper.use_crp_factor else 1.0)
    new_score *= hyper.new_cluster_likelihood

    total = sum(s for _, _, s in scores) + new_score
    best_id, best_count, best_score = NEW, -1.0, -1.0
    for cid, count, s in sorted(scores):  # ascending id
        if s > best_score or (s == best_score and best_id != NEW and count > best_count):
            best_id, best_count, best_score = cid, count, s
    if new_score > best_score:
        best_id, best_score = NEW, new_score
    if total <= 0.0:
        return NEW, 1.0
    return best_id, best_score / total


def oracle_rmse(errors):
    return math.sqrt(sum(e * e for e in errors) / len(errors))
