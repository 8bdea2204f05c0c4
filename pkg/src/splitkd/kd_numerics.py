"""Distillation loss on plain logit vectors.

The combined loss is the temperature-scaled form

    loss = kd_weight * T**2 * KL(softmax(t/T) || softmax(s/T))
           + (1 - kd_weight) * CE(label, softmax(s))

in nats. Nothing here trains anything; it is the numerical kernel only.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class DivergenceUndefined(ValueError):
    """KL(p || q) is infinite: ``q`` is zero somewhere ``p`` is not."""


@dataclass(frozen=True)
class KdLossConfig:
    temperature: float = 2.0
    kd_weight: float = 0.5

    def __post_init__(self) -> None:
        if not self.temperature > 0:
            raise ValueError(f"temperature must be > 0, got {self.temperature!r}")
        if not 0.0 <= self.kd_weight <= 1.0:
            raise ValueError(f"kd_weight must be in [0, 1], got {self.kd_weight!r}")


def _logits(z) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    if z.ndim != 1 or z.size < 2:
        raise ValueError("logits must be a 1-D vector with at least 2 entries")
    if not np.all(np.isfinite(z)):
        raise ValueError("logits must be finite")
    return z


def softmax_t(z, T: float = 1.0) -> np.ndarray:
    if not T > 0:
        raise ValueError(f"temperature must be > 0, got {T!r}")
    z = _logits(z) / T
    e = np.exp(z - z.max())
    return e / e.sum()


def _distribution(p, name: str) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if p.ndim != 1:
        raise ValueError(f"{name} must be 1-D")
    if not np.all(np.isfinite(p)) or np.any(p < 0):
        raise ValueError(f"{name} entries must be finite and >= 0")
    if abs(p.sum() - 1.0) > 1e-9:
        raise ValueError(f"{name} must sum to 1 (got {p.sum():.12g})")
    return p


def kl_div(p, q) -> float:
    p, q = _distribution(p, "p"), _distribution(q, "q")
    if p.shape != q.shape:
        raise ValueError("p and q must have the same length")
    support = p > 0
    if np.any(q[support] == 0):
        raise DivergenceUndefined("q is zero where p is positive")
    # p*log(p/q) - p + q is >= 0 term by term and sums to the same value for
    # normalised inputs, so rounding cannot push the total below zero
    ps, qs = p[support], q[support]
    terms = ps * np.log(ps / qs) - ps + qs
    return max(0.0, float(np.sum(terms) + np.sum(q[~support])))


def _check_pair(teacher_z, student_z, label: int) -> tuple[np.ndarray, np.ndarray]:
    t, s = _logits(teacher_z), _logits(student_z)
    if t.shape != s.shape:
        raise ValueError("teacher and student logits differ in length")
    if isinstance(label, bool) or not 0 <= int(label) < s.size or int(label) != label:
        raise ValueError(f"label {label!r} out of range for {s.size} classes")
    return t, s


def kd_loss(teacher_z, student_z, label: int, cfg: KdLossConfig = KdLossConfig()) -> float:
    t, s = _check_pair(teacher_z, student_z, label)
    T, lam = cfg.temperature, cfg.kd_weight
    kd = T * T * kl_div(softmax_t(t, T), softmax_t(s, T))
    # log-softmax directly, so tiny probabilities do not underflow to log(0)
    shifted = s - s.max()
    ce = -(shifted[int(label)] - np.log(np.exp(shifted).sum()))
    return float(lam * kd + (1.0 - lam) * ce)


def kd_loss_grad(teacher_z, student_z, label: int, cfg: KdLossConfig = KdLossConfig()) -> np.ndarray:
    """Gradient of :func:`kd_loss` with respect to the student logits."""
    t, s = _check_pair(teacher_z, student_z, label)
    T, lam = cfg.temperature, cfg.kd_weight
    onehot = np.zeros_like(s)
    onehot[int(label)] = 1.0
    return lam * T * (softmax_t(s, T) - softmax_t(t, T)) + (1.0 - lam) * (softmax_t(s, 1.0) - onehot)


def finite_difference_grad(teacher_z, student_z, label: int, cfg: KdLossConfig, h: float = 1e-5) -> np.ndarray:
    s = np.asarray(student_z, dtype=float)
    grad = np.empty_like(s)
    for i in range(s.size):
        up, down = s.copy(), s.copy()
        up[i] += h
        down[i] -= h
        grad[i] = (kd_loss(teacher_z, up, label, cfg) - kd_loss(teacher_z, down, label, cfg)) / (2 * h)
    return grad


def relative_error(a, b, floor: float = 1e-8) -> float:
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    return float(np.linalg.norm(a - b) / max(np.linalg.norm(a), np.linalg.norm(b), floor))


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def selftest(seed: int = 0, n_pairs: int = 1000, n_grad: int = 100) -> list[CheckResult]:
    """Randomised property checks behind ``splitkd kd-selftest``."""
    rng = np.random.default_rng(seed)
    results = []

    worst_kl = np.inf
    worst_self = 0.0
    worst_norm = 0.0
    for _ in range(n_pairs):
        k = int(rng.integers(2, 12))
        p = softmax_t(rng.normal(0, 3, k), float(rng.uniform(0.5, 5)))
        q = softmax_t(rng.normal(0, 3, k), float(rng.uniform(0.5, 5)))
        worst_kl = min(worst_kl, kl_div(p, q))
        worst_self = max(worst_self, abs(kl_div(p, p)))
        worst_norm = max(worst_norm, abs(p.sum() - 1.0), abs(q.sum() - 1.0))
    results.append(CheckResult("kl_nonnegative", worst_kl >= 0, f"min KL over {n_pairs} pairs = {worst_kl:.3e}"))
    results.append(CheckResult("kl_self_zero", worst_self <= 1e-12, f"max |KL(p,p)| = {worst_self:.3e}"))
    results.append(CheckResult("softmax_normalized", worst_norm <= 1e-12, f"max |sum-1| = {worst_norm:.3e}"))

    worst_grad = 0.0
    for _ in range(n_grad):
        k = int(rng.integers(2, 10))
        t, s = rng.normal(0, 2, k), rng.normal(0, 2, k)
        cfg = KdLossConfig(float(rng.uniform(0.5, 4)), float(rng.uniform(0, 1)))
        label = int(rng.integers(k))
        err = relative_error(kd_loss_grad(t, s, label, cfg), finite_difference_grad(t, s, label, cfg))
        worst_grad = max(worst_grad, err)
    results.append(CheckResult("gradient_vs_finite_differences", worst_grad <= 1e-5,
                               f"max relative error over {n_grad} instances = {worst_grad:.3e}"))
    return results
