import numpy as np
import pytest

from gdpf import Cluster, Hyperparameters, Measurement


@pytest.fixture
def hyper():
    return Hyperparameters()


def make_cluster(cid, x, y, vx=0.0, vy=0.0, count=1.0, existence=0.5, born=0):
    return Cluster(
        id=cid,
        state_mean=np.array([x, y, vx, vy], dtype=float),
        state_cov=np.diag([0.5, 0.5, 2.0, 2.0]),
        assign_count=count,
        existence=existence,
        born_frame=born,
        last_assigned_frame=born,
    )


def box_meas(frame, x, y, hx=2.0, hy=1.0, heading=0.0, weight=1.0):
    return Measurement(frame=frame, position=(x, y), extent=(hx, hy, heading), weight=weight)


def cell_meas(frame, row, col, cell=0.5, weight=1.0):
    return Measurement(
        frame=frame,
        position=((col + 0.5) * cell, (row + 0.5) * cell),
        cell_index=(row, col),
        weight=weight,
    )
