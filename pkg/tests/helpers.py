"""Shared test utilities: controlled sensor doubles and random cluster generation."""

import numpy as np

from lmbp.association import Cluster
from lmbp.rfs import Label


class StubSensor:
    """Sensor double returning prescribed detection probabilities and likelihoods.

    `pd` is aligned with the particle order of whatever set it is applied to;
    `lik` has one row per frame measurement.
    """

    def __init__(self, pd, lik=None):
        self.pd = np.asarray(pd, dtype=float)
        self.lik = None if lik is None else np.asarray(lik, dtype=float)

    def detection_prob(self, states):
        states = np.asarray(states, dtype=float)
        if states.ndim == 1:
            return self.pd[0]
        return self.pd[: states.shape[0]]

    def likelihood_table(self, frame, states):
        if self.lik is None:
            raise AssertionError("stub has no likelihood table")
        return self.lik[: len(frame)]


def random_cluster(rng, max_legacy=4, max_transfer=2, max_meas=4,
                   log10_lo=-6.0, log10_hi=2.0, time=5):
    """Random association problem with log-uniform weight entries."""
    n_legacy = int(rng.integers(1, max_legacy + 1))
    n_meas = int(rng.integers(0, max_meas + 1))
    n_transfer = int(rng.integers(0, min(max_transfer, n_meas) + 1)) if n_meas else 0

    def draw(shape):
        return 10.0 ** rng.uniform(log10_lo, log10_hi, shape)

    meas = tuple(range(1, n_meas + 1))
    legacy = tuple(Label(1, i + 1) for i in range(n_legacy))
    claimed = rng.choice(n_meas, size=n_transfer, replace=False) if n_transfer else []
    transfer = tuple(sorted(Label(time, int(meas[j])) for j in claimed))
    return Cluster(legacy, transfer, meas, draw(n_legacy),
                   draw((n_legacy, n_meas)), draw(n_meas))


def tv_distance(pmf_a, pmf_b):
    keys = set(pmf_a) | set(pmf_b)
    return 0.5 * sum(abs(pmf_a.get(k, 0.0) - pmf_b.get(k, 0.0)) for k in keys)


def max_label_tv(exact, approx):
    """Largest per-label total-variation distance between two marginal sets."""
    worst = 0.0
    for lab, pmf in exact.legacy.items():
        worst = max(worst, tv_distance(pmf, approx.legacy[lab]))
    for lab, pmf in exact.transfer.items():
        worst = max(worst, tv_distance(pmf, approx.transfer[lab]))
    return worst
