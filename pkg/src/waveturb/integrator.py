"""Adaptive embedded Runge-Kutta integration with positivity preservation.

An explicit Dormand-Prince 5(4) stepper advances an autonomous system
``f' = rhs(f)``.  Step control is proportional on the weighted max-norm
``max_i |err_i| / (abs_tol + rel_tol * |f_i|)``.  Any trial state that
leaves the open positive orthant is rejected and retried at half the step,
so positivity never comes from clipping and linear conserved quantities
stay exact to roundoff.  Samples land on a fixed time grid (every
``sample_interval``) plus the terminal point; caller-supplied monitors
observe each emitted sample and must not mutate it.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from typing import Callable, Iterable

import numpy as np

# Dormand-Prince 5(4) tableau; the last stage row doubles as the 5th-order
# weights (first-same-as-last).
_STAGE_ROWS = (
    np.array([1 / 5]),
    np.array([3 / 40, 9 / 40]),
    np.array([44 / 45, -56 / 15, 32 / 9]),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
)
_PROPAGATE = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84])
_ERROR = np.array([71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40])

#: Steps below this fraction of t_end are reported as a stall, never accepted.
STALL_FRACTION = 1e-14


class TerminationReason(enum.Enum):
    REACHED_T_END = "reached_t_end"
    DIVERGED = "diverged"
    STALLED = "stalled"


@dataclass(frozen=True)
class IntegratorConfig:
    """Error control and sampling settings.

    The three optional step fields default, when left as None, to:
    ``max_step = t_end``, ``sample_interval = t_end / 100`` and
    ``initial_step = min(max_step, sample_interval) / 8``.
    """

    t_end: float
    rel_tol: float = 1e-8
    abs_tol: float = 1e-12
    max_step: float | None = None
    initial_step: float | None = None
    sample_interval: float | None = None
    divergence_ceiling: float = 1e9

    def __post_init__(self) -> None:
        if not self.t_end > 0:
            raise ValueError("t_end must be positive")
        if not 0 < self.rel_tol < 1:
            raise ValueError("rel_tol must lie in (0, 1)")
        if not self.abs_tol > 0:
            raise ValueError("abs_tol must be positive")
        if not self.divergence_ceiling > 0:
            raise ValueError("divergence_ceiling must be positive")
        for name in ("max_step", "initial_step", "sample_interval"):
            value = getattr(self, name)
            if value is not None and not value > 0:
                raise ValueError(f"{name} must be positive when given")
        if self.sample_interval is not None and self.sample_interval > self.t_end:
            raise ValueError("sample_interval must not exceed t_end")

    def resolved(self) -> "IntegratorConfig":
        """Copy with the optional step fields replaced by their defaults."""
        max_step = self.max_step if self.max_step is not None else self.t_end
        sample = self.sample_interval if self.sample_interval is not None else self.t_end / 100.0
        initial = self.initial_step if self.initial_step is not None else min(max_step, sample) / 8.0
        return replace(self, max_step=max_step, initial_step=initial, sample_interval=sample)


@dataclass
class TrajectorySample:
    """State snapshot with monitor values at an accepted sample time."""

    t: float
    state: np.ndarray
    lyapunov_log: float
    lyapunov_prod: float
    step_count: int
    energy: float | None = None
    momentum: np.ndarray | None = None


@dataclass
class IntegrationResult:
    """Sampled trajectory plus how and why the run ended."""

    samples: list[TrajectorySample]
    reason: TerminationReason
    steps_accepted: int
    steps_rejected: int

    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.samples])

    def states(self) -> np.ndarray:
        return np.vstack([s.state for s in self.samples])

    @property
    def final_state(self) -> np.ndarray:
        return self.samples[-1].state

    @property
    def t_final(self) -> float:
        return self.samples[-1].t


def integrate(
    rhs: Callable[[np.ndarray], np.ndarray],
    f0,
    config: IntegratorConfig,
    monitors: Iterable[Callable[[TrajectorySample], None]] = (),
    energy_weights=None,
    momentum_components=None,
) -> IntegrationResult:
    """Advance ``f' = rhs(f)`` from the strictly positive state ``f0``.

    Args:
        rhs: derivative callable taking and returning a length-n vector.
        f0: strictly positive initial state.
        config: IntegratorConfig (optional step fields get derived defaults).
        monitors: observation hooks invoked with each emitted sample.
        energy_weights: optional length-n vector; fills ``sample.energy``
            with its dot product against the state.
        momentum_components: optional (n, 3) array; fills ``sample.momentum``.

    Returns:
        IntegrationResult whose samples sit on the sampling grid plus the
        terminal point, with reason ``reached_t_end``, ``diverged`` (a
        component magnitude passed the ceiling) or ``stalled`` (the step
        size underflowed below STALL_FRACTION * t_end).
    """
    cfg = config.resolved()
    f = np.array(f0, dtype=float)
    if f.ndim != 1 or f.size == 0:
        raise ValueError("initial state must be a nonempty vector")
    if not np.all(np.isfinite(f)) or np.any(f <= 0.0):
        raise ValueError("initial state must be strictly positive and finite")
    hooks = tuple(monitors)
    weights = None if energy_weights is None else np.asarray(energy_weights, dtype=float)
    if weights is not None and weights.shape != f.shape:
        raise ValueError("energy_weights length does not match the state")
    pmat = None if momentum_components is None else np.asarray(momentum_components, dtype=float)
    if pmat is not None and pmat.shape != (f.size, 3):
        raise ValueError("momentum_components must have shape (n, 3)")

    samples: list[TrajectorySample] = []
    accepted = 0
    rejected = 0

    def emit(t: float, state: np.ndarray) -> None:
        sample = TrajectorySample(
            t=t,
            state=state.copy(),
            lyapunov_log=float(-np.log(state).sum()),
            lyapunov_prod=float(-np.prod(state)),
            step_count=accepted,
            energy=None if weights is None else float(weights @ state),
            momentum=None if pmat is None else pmat.T @ state,
        )
        samples.append(sample)
        for hook in hooks:
            hook(sample)

    emit(0.0, f)

    k1 = np.asarray(rhs(f), dtype=float)
    if k1.shape != f.shape:
        raise ValueError(f"rhs returned shape {k1.shape} for state of shape {f.shape}")

    stall_floor = STALL_FRACTION * cfg.t_end
    t = 0.0
    grid_index = 1
    next_sample = min(grid_index * cfg.sample_interval, cfg.t_end)
    h_control = min(cfg.initial_step, cfg.max_step)
    stages = np.empty((7, f.size))
    reason: TerminationReason | None = None

    while t < cfg.t_end:
        h = min(h_control, cfg.max_step, next_sample - t)
        if h < stall_floor:
            reason = TerminationReason.STALLED
            break
        hits_sample = h >= next_sample - t

        stages[0] = k1
        for i, row in enumerate(_STAGE_ROWS, start=1):
            stages[i] = rhs(f + h * (row @ stages[:i]))
        f_new = f + h * (_PROPAGATE @ stages[:6])

        if not np.all(np.isfinite(f_new)) or np.any(f_new <= 0.0):
            rejected += 1
            h_control = 0.5 * h
            continue

        stages[6] = rhs(f_new)
        err_vec = h * (_ERROR @ stages)
        scale = cfg.abs_tol + cfg.rel_tol * np.abs(f)
        err_norm = float(np.max(np.abs(err_vec) / scale))
        if not math.isfinite(err_norm):
            rejected += 1
            h_control = 0.5 * h
            continue
        if err_norm > 1.0:
            rejected += 1
            h_control = h * max(0.1, 0.9 * err_norm ** -0.2)
            continue

        accepted += 1
        t = next_sample if hits_sample else t + h
        f = f_new
        k1 = stages[6].copy()

        if hits_sample:
            emit(t, f)
            grid_index += 1
            next_sample = min(grid_index * cfg.sample_interval, cfg.t_end)

        if float(np.max(np.abs(f))) > cfg.divergence_ceiling:
            if samples[-1].t < t:
                emit(t, f)
            reason = TerminationReason.DIVERGED
            break

        growth = 5.0 if err_norm == 0.0 else min(5.0, max(0.2, 0.9 * err_norm ** -0.2))
        h_control = h * growth

    if reason is None:
        reason = TerminationReason.REACHED_T_END
    if samples[-1].t < t:
        emit(t, f)
    return IntegrationResult(samples, reason, accepted, rejected)
