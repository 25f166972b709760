"""Two-stage approximate update: transfer selection, marginalized track update,
recycling, intensity update, and the full per-step recursion.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .association import (
    Cluster,
    DetectionHypothesis,
    MissHypothesis,
    NewComponent,
    bp_marginals,
    detection_hypotheses,
    enumeration_size,
    exact_marginals,
    miss_hypothesis,
    new_components,
    partition,
)
from .models import Models
from .rfs import (
    BernoulliTrack,
    FilterState,
    Label,
    Measurement,
    ParticleSet,
    PoissonPhd,
    resample,
)
from .prediction import predict_phd, predict_track


@dataclass(frozen=True)
class Thresholds:
    """The four decision thresholds of the recursion."""

    gamma_c: float = 1e-10    # clustering: plausibility cutoff on detection weights
    gamma_tr: float = 1e-2    # transfer unlabeled -> labeled (inclusive)
    gamma_leg: float = 1e-2   # keep legacy track in labeled part (inclusive)
    gamma_d: float = 0.5      # declare object detected (exclusive)

    def __post_init__(self):
        if self.gamma_c < 0:
            raise ValueError("gamma_c must be nonnegative")
        for name in ("gamma_tr", "gamma_leg", "gamma_d"):
            if not 0.0 < getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must be in (0, 1]")


@dataclass(frozen=True)
class FilterSettings:
    """Particle budgets and marginalization configuration."""

    track_particles: int = 1000
    phd_particles: int = 5000
    bp_iterations: int = 20
    marginals: str = "bp"          # "bp" or "exact" (exact falls back on big clusters)

    # exact enumeration is honored only below these bounds
    exact_degree_limit: int = 20
    exact_size_limit: float = 1e5

    def __post_init__(self):
        if self.marginals not in ("bp", "exact"):
            raise ValueError("marginals must be 'bp' or 'exact'")
        if self.bp_iterations < 1:
            raise ValueError("bp_iterations must be >= 1")


def select_transfers(components: Mapping[int, NewComponent], gamma_tr: float,
                     time: int) -> tuple[dict[Label, NewComponent], tuple[int, ...]]:
    """Split measurement components into transferred labels and the rest.

    Every index m whose component has existence >= gamma_tr (inclusive)
    becomes a labeled Bernoulli with label (time, m); the remaining indices
    are returned for the caller to absorb or prune.
    """
    transfers = {}
    remaining = []
    for m in sorted(components):
        if components[m].existence >= gamma_tr:
            transfers[Label(time, m)] = components[m]
        else:
            remaining.append(m)
    return transfers, tuple(remaining)


def _mix_particles(parts: list[tuple[float, ParticleSet]]) -> ParticleSet:
    states = np.concatenate([p.states for _, p in parts])
    weights = np.concatenate([p.weights * (w / p.total_weight) for w, p in parts])
    return ParticleSet(states, weights)


def update_legacy_track(label: Label, marginal: Mapping[int, float], miss: MissHypothesis,
                        detections: Mapping[int, DetectionHypothesis], particle_budget: int,
                        rng: np.random.Generator) -> BernoulliTrack:
    """Marginalized update of a legacy track.

    r = sum_a p(a) r(l,a); the pdf is the r(l,a)-weighted mixture of the
    per-hypothesis pdfs, realized by merging particle sets and resampling to
    the track budget. A track whose mixture mass vanishes comes back with
    r = 0 (the caller recycles it).
    """
    r = marginal.get(0, 0.0) * miss.existence
    parts = []
    if r > 0.0:
        parts.append((r, miss.pdf))
    for m, hyp in detections.items():
        p = marginal.get(m, 0.0) * hyp.existence
        if p > 0.0 and len(hyp.pdf):
            parts.append((p, hyp.pdf))
            r += p
    if r <= 0.0 or not parts:
        return BernoulliTrack(label, 0.0, ParticleSet.empty())
    mixture = _mix_particles([(w / r, pdf) for w, pdf in parts])
    return BernoulliTrack(label, min(r, 1.0), resample(mixture, particle_budget, rng))


def update_transferred_track(label: Label, p_claim: float, component: NewComponent,
                             particle_budget: int,
                             rng: np.random.Generator) -> BernoulliTrack:
    """Update of a freshly transferred track: r = p(claim) * existence, pdf kept."""
    r = p_claim * component.existence
    if len(component.pdf) == 0:
        return BernoulliTrack(label, 0.0, ParticleSet.empty())
    return BernoulliTrack(label, r, resample(component.pdf, particle_budget, rng))


def split_by_retention(tracks: Sequence[BernoulliTrack], gamma_leg: float,
                       time: int) -> tuple[list[BernoulliTrack], list[BernoulliTrack]]:
    """Keep likely tracks; recycle unlikely legacy ones.

    Tracks transferred this step (birth_time == time) are always kept;
    legacy tracks are kept iff r >= gamma_leg (inclusive).
    """
    kept, recycled = [], []
    for track in tracks:
        if track.label.birth_time == time or track.existence >= gamma_leg:
            kept.append(track)
        else:
            recycled.append(track)
    return kept, recycled


def update_phd(recycled: Sequence[BernoulliTrack], untransferred: Sequence[NewComponent],
               predicted_phd: PoissonPhd, sensor, particle_budget: int,
               rng: np.random.Generator) -> PoissonPhd:
    """Posterior intensity: recycled tracks + unclaimed residual components +
    undetected predicted intensity, reduced to the intensity budget.

    Total mass is r-sum + existence-sum + sum((1 - pD) w), preserved through
    the reduction.
    """
    parts: list[tuple[float, ParticleSet]] = []
    for track in recycled:
        if track.existence > 0.0 and len(track.pdf):
            parts.append((track.existence, track.pdf))
    for comp in untransferred:
        if comp.existence > 0.0 and len(comp.pdf):
            parts.append((comp.existence, comp.pdf))
    survivors = predicted_phd.particles
    if len(survivors):
        weights = survivors.weights * (1.0 - sensor.detection_prob(survivors.states))
        undetected = float(weights.sum())
        if undetected > 0.0:
            parts.append((undetected, ParticleSet(survivors.states, weights / undetected)))
    if not parts:
        return PoissonPhd.empty()
    union = _mix_particles(parts)
    return PoissonPhd(resample(union, particle_budget, rng))


def _cluster_problem(cluster_labels: tuple[Label, ...], meas_indices: tuple[int, ...],
                     misses: Mapping[Label, MissHypothesis],
                     detections: Mapping[Label, dict[int, DetectionHypothesis]],
                     components: Mapping[int, NewComponent],
                     transfers: Mapping[Label, NewComponent]) -> Cluster:
    miss_beta = np.array([misses[lab].beta for lab in cluster_labels])
    det_beta = np.array([[detections[lab][m].beta for m in meas_indices]
                         for lab in cluster_labels]).reshape(len(cluster_labels),
                                                             len(meas_indices))
    new_beta = np.array([components[m].beta for m in meas_indices])
    return Cluster(cluster_labels, tuple(sorted(transfers)), meas_indices,
                   miss_beta, det_beta, new_beta)


def _marginalize(cluster: Cluster, settings: FilterSettings):
    if settings.marginals == "exact":
        degrees = len(cluster.legacy_labels) * len(cluster.meas_indices)
        if (degrees <= settings.exact_degree_limit
                and enumeration_size(cluster) <= settings.exact_size_limit):
            return exact_marginals(cluster)
    return bp_marginals(cluster, settings.bp_iterations)


def lmbp_step(state: FilterState, frame: Sequence[Measurement], models: Models,
              thresholds: Thresholds, rng: np.random.Generator,
              prev_frame: Sequence[Measurement] = (),
              settings: FilterSettings = FilterSettings()) -> FilterState:
    """One full recursion step: predict, associate, update, transfer, recycle.

    `prev_frame` feeds the measurement-driven birth proposal (empty on the
    first step). Estimation is separate; see `lmbp.estimation`.
    """
    k = state.time + 1

    # prediction; tracks whose survival mass vanishes are dropped
    predicted = []
    for track in state.tracks:
        try:
            predicted.append(predict_track(track, models.motion, rng))
        except ValueError:
            continue
    birth = models.birth.sample_phd(prev_frame, models.motion, models.sensor, rng)
    predicted_phd = predict_phd(state.phd, birth, models.motion, rng)

    # association weights for every track/measurement pairing
    misses = {}
    detections: dict[Label, dict[int, DetectionHypothesis]] = {}
    for track in predicted:
        misses[track.label] = miss_hypothesis(track, models.sensor)
        hyps = detection_hypotheses(track, frame, models.sensor)
        detections[track.label] = {m + 1: hyp for m, hyp in enumerate(hyps)}
    components = {m + 1: comp for m, comp in
                  enumerate(new_components(predicted_phd, frame, models.sensor,
                                           models.clutter))}

    labels = [t.label for t in predicted]
    betas = np.array([[detections[lab][m].beta for m in range(1, len(frame) + 1)]
                      for lab in labels]).reshape(len(labels), len(frame))
    clusters, residual = partition(labels, betas, len(frame), thresholds.gamma_c)

    updated: list[BernoulliTrack] = []

    for cluster_labels, meas_indices in clusters:
        cluster_comps = {m: components[m] for m in meas_indices}
        transfers, _ = select_transfers(cluster_comps, thresholds.gamma_tr, k)
        problem = _cluster_problem(cluster_labels, meas_indices, misses, detections,
                                   components, transfers)
        marginal = _marginalize(problem, settings)
        for lab in cluster_labels:
            updated.append(update_legacy_track(
                lab, marginal.legacy[lab], misses[lab],
                {m: detections[lab][m] for m in meas_indices},
                settings.track_particles, rng))
        for lab in problem.transfer_labels:
            updated.append(update_transferred_track(
                lab, marginal.transfer[lab][1], transfers[lab],
                settings.track_particles, rng))

    residual_comps = {m: components[m] for m in residual}
    residual_transfers, unclaimed = select_transfers(residual_comps, thresholds.gamma_tr, k)
    for lab, comp in residual_transfers.items():
        updated.append(BernoulliTrack(lab, comp.existence,
                                      resample(comp.pdf, settings.track_particles, rng)))

    kept, recycled = split_by_retention(updated, thresholds.gamma_leg, k)
    phd = update_phd(recycled, [components[m] for m in unclaimed], predicted_phd,
                     models.sensor, settings.phd_particles, rng)
    kept.sort(key=lambda t: t.label)
    return FilterState(tuple(kept), phd, k)
