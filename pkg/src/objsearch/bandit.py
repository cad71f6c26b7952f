"""Generalized-linear contextual bandit with online Newton updates.

Scores are lower-confidence spotting probabilities sigma(theta.phi - eps)
with eps^2 = alpha * phi' M^-1 phi. Updates are per-signal second-order steps
on the logistic loss; an optional Mahalanobis slab projection keeps theta.phi
inside [-B, B] before each step.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .features import sigmoid

_REFRESH_EVERY = 512  # full re-inversion cadence to bound Sherman-Morrison drift


@dataclass(frozen=True)
class BanditHyper:
    eta: float = 1.0
    alpha: float = 0.1
    B: float = 1.0
    k: int = 25
    delta: float = 0.1
    sigmoid_scale: float = 1.0
    lcb_sign: float = -1.0  # -1 lower-confidence, +1 upper-confidence
    project: bool = False

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.alpha < 0 or self.eta <= 0 or self.B <= 0:
            raise ValueError("alpha must be >= 0; eta and B positive")
        if self.lcb_sign not in (-1.0, 1.0):
            raise ValueError("lcb_sign must be -1 or +1")


class BanditState:
    """Weight vector, precision matrix and update counter for one arm model."""

    def __init__(self, dim, hyper):
        self.dim = dim
        self.hyper = hyper
        self.theta = np.zeros(dim)
        self.M = hyper.k * np.eye(dim)
        self._Minv = np.eye(dim) / hyper.k
        self.c = 1
        self._since_refresh = 0

    def minv_dot(self, phi):
        return self._Minv @ phi

    def confidence(self, phi):
        """(delta_hat, eps): the score estimate and its confidence width."""
        phi = self._check(phi)
        theta = self.slab_project(phi) if self.hyper.project else self.theta
        delta_hat = float(theta @ phi)
        eps = math.sqrt(max(self.hyper.alpha * float(phi @ self._Minv @ phi), 0.0))
        return delta_hat, eps

    def lcb_score(self, phi):
        delta_hat, eps = self.confidence(phi)
        return sigmoid(delta_hat + self.hyper.lcb_sign * eps, self.hyper.sigmoid_scale)

    def lcb_scores(self, phi_matrix):
        """Vectorized lcb_score over the rows of ``phi_matrix``."""
        phi_matrix = np.asarray(phi_matrix, dtype=float)
        if self.hyper.project:
            return np.array([self.lcb_score(row) for row in phi_matrix])
        delta = phi_matrix @ self.theta
        quad = np.einsum("ij,ij->i", phi_matrix, phi_matrix @ self._Minv)
        eps = np.sqrt(np.maximum(self.hyper.alpha * quad, 0.0))
        return sigmoid(delta + self.hyper.lcb_sign * eps, self.hyper.sigmoid_scale)

    def slab_project(self, phi, B=None):
        """Closest theta under the M-metric with |theta.phi| <= B."""
        phi = self._check(phi)
        B = self.hyper.B if B is None else B
        if B <= 0:
            raise ValueError("B must be positive")
        proj = float(self.theta @ phi)
        if abs(proj) <= B:
            return self.theta.copy()
        minv_phi = self._Minv @ phi
        quad = float(phi @ minv_phi)
        if quad <= 0:
            raise ValueError("cannot project onto a zero feature direction")
        lam = (proj - math.copysign(B, proj)) / quad
        return self.theta - lam * minv_phi

    def update(self, features, signals):
        """Run one Newton step per (phi, signal in {+1,-1}) pair, in order."""
        if len(features) != len(signals):
            raise ValueError("features and signals must have equal length")
        s_scale = self.hyper.sigmoid_scale
        for phi, s in zip(features, signals):
            phi = self._check(phi)
            if s not in (1, -1):
                raise ValueError(f"signal must be +1 or -1, got {s}")
            theta = self.slab_project(phi) if self.hyper.project else self.theta
            self.M += np.outer(phi, phi)
            self._since_refresh += 1
            if self._since_refresh >= _REFRESH_EVERY:
                self._Minv = np.linalg.inv(self.M)
                self._since_refresh = 0
            else:
                mp = self._Minv @ phi
                self._Minv -= np.outer(mp, mp) / (1.0 + float(phi @ mp))
            margin = float(theta @ phi)
            grad = sigmoid(-s * margin, s_scale) * s
            self.theta = theta + self.hyper.eta * grad * (self._Minv @ phi)
            self.c += 1

    def _check(self, phi):
        phi = np.asarray(phi, dtype=float)
        if phi.shape != (self.dim,):
            raise ValueError(f"feature dimension {phi.shape} != ({self.dim},)")
        if not np.all(np.isfinite(phi)):
            raise ValueError("feature vector has non-finite entries")
        return phi

    def to_dict(self):
        return {
            "theta": self.theta.tolist(),
            "M": self.M.tolist(),
            "c": self.c,
        }

    @classmethod
    def from_dict(cls, data, hyper):
        theta = np.asarray(data["theta"], dtype=float)
        state = cls(theta.shape[0], hyper)
        state.theta = theta
        state.M = np.asarray(data["M"], dtype=float)
        state._Minv = np.linalg.inv(state.M)
        state.c = int(data["c"])
        return state


class GenLinBandit:
    """Per-object-class (disjoint) or shared generalized-linear bandit."""

    def __init__(self, dim, n_objects, hyper, disjoint=True):
        self.dim = dim
        self.n_objects = n_objects
        self.hyper = hyper
        self.disjoint = disjoint
        n_states = n_objects if disjoint else 1
        self.states = [BanditState(dim, hyper) for _ in range(n_states)]

    def state_for(self, i):
        if not 0 <= i < self.n_objects:
            raise ValueError(f"object id {i} out of range")
        return self.states[i if self.disjoint else 0]

    def lcb_score(self, i, phi):
        return self.state_for(i).lcb_score(phi)

    def update(self, i, features, signals):
        self.state_for(i).update(features, signals)

    def save(self, path):
        payload = {
            "version": 1,
            "dim": self.dim,
            "n_objects": self.n_objects,
            "disjoint": self.disjoint,
            "hyper": {
                "eta": self.hyper.eta,
                "alpha": self.hyper.alpha,
                "B": self.hyper.B,
                "k": self.hyper.k,
                "delta": self.hyper.delta,
                "sigmoid_scale": self.hyper.sigmoid_scale,
                "lcb_sign": self.hyper.lcb_sign,
                "project": self.hyper.project,
            },
            "states": [s.to_dict() for s in self.states],
        }
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(payload, fh)

    @classmethod
    def load(cls, path):
        with open(path, encoding="utf-8") as fh:
            payload = json.load(fh)
        if payload.get("version") != 1:
            raise ValueError(f"unsupported checkpoint version {payload.get('version')}")
        hyper = BanditHyper(**payload["hyper"])
        bandit = cls(payload["dim"], payload["n_objects"], hyper,
                     disjoint=payload["disjoint"])
        bandit.states = [
            BanditState.from_dict(d, hyper) for d in payload["states"]
        ]
        return bandit


def theoretical_alpha(k, D, T, delta, B, t, c_mult=1.0):
    """Exploration width from the regret analysis, up to the constant
    ``c_mult``. Monotone non-decreasing in t."""
    if not 0 < delta < 1.0 / math.e:
        raise ValueError("delta must lie in (0, 1/e)")
    if t > T:
        raise ValueError("t must not exceed the horizon T")
    c_sig = math.exp(B) / (1.0 + math.exp(B))
    c_sigp = math.exp(-B) / (1.0 + math.exp(-B)) ** 2
    ratio2 = (c_sig / c_sigp) ** 2
    term_dim = ratio2 * D * math.log(
        1.0 + (t * c_sig / (1.0 - c_sig) + math.log((t + 1) / delta)) / k
    )
    term_tail = (ratio2 + (1.0 + B) / c_sigp) * math.log(k * (t + 1) / delta)
    return c_mult * (k * B * B + term_dim + term_tail)


def cover_schedule_epsilon(k, t):
    """Cover radius schedule used by the analyzed algorithm variant."""
    if t < 1:
        raise ValueError("t must be >= 1")
    return k / math.sqrt(t)
