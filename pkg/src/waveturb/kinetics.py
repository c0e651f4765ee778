"""Right-hand sides of the exact and broadened triad interaction systems.

Each triad (p1; p2, p3) moves density along its exchange direction
``e1 - e2 - e3`` at rate ``w * V * (f2*f3 - f1*(f2 + f3))``, where V is the
triad kernel and w = 2 for distinct decomposition partners, w = 1 for the
self-pairing p2 = p3.  Summing this tally over a triad list reproduces the
ordered double sums of the kinetic equations and makes the linear
conservation laws manifest: within a ray the exchange direction is
orthogonal to (1, ..., I), and on the full lattice it is orthogonal to each
momentum coordinate.

The evaluators are polynomial and accept any real state; positivity is the
integrator's responsibility, not the right-hand side's.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .lattice import LatticePoint, Ray, Triad, ray_triads, triad_kernel


@dataclass(frozen=True)
class KernelParams:
    """Coupling constant of the interaction kernel ``V = c * |p1| |p2| |p3|``."""

    lambda_coupling: float = 1.0

    def __post_init__(self) -> None:
        if not self.lambda_coupling > 0:
            raise ValueError(f"lambda_coupling must be positive, got {self.lambda_coupling}")


def kernel(
    p1: LatticePoint, p2: LatticePoint, p3: LatticePoint, params: KernelParams = KernelParams()
) -> float:
    """Symmetric interaction weight; zero when any argument is the origin."""
    if p1.is_zero() or p2.is_zero() or p3.is_zero():
        return 0.0
    return triad_kernel(p1, p2, p3, params.lambda_coupling)


class TriadTally:
    """Precompiled accumulator for one triad list over ``n_modes`` modes.

    ``rhs``, ``jacobian`` and ``dissipation_rate`` are pure functions of the
    state.  Accumulation follows the triad list order, so evaluation is
    deterministic, and a ray-grouped full-lattice list produces bit-identical
    results to the per-ray tallies on the ray coordinates.
    """

    def __init__(self, triads: Sequence[Triad], n_modes: int, params: KernelParams | None = None) -> None:
        n = int(n_modes)
        if n <= 0:
            raise ValueError("n_modes must be positive")
        self.n_modes = n
        self.i1 = np.array([t.i1 for t in triads], dtype=np.intp)
        self.i2 = np.array([t.i2 for t in triads], dtype=np.intp)
        self.i3 = np.array([t.i3 for t in triads], dtype=np.intp)
        for arr in (self.i1, self.i2, self.i3):
            if arr.size and (arr.min() < 0 or arr.max() >= n):
                raise ValueError("triad list inconsistent with state length")
        scale = 1.0 if params is None else params.lambda_coupling
        weight = np.array([1.0 if t.i2 == t.i3 else 2.0 for t in triads])
        kernels = np.array([t.kernel for t in triads])
        self.coeff = weight * kernels * scale

    def __len__(self) -> int:
        return int(self.i1.size)

    def _check(self, f) -> np.ndarray:
        f = np.asarray(f, dtype=float)
        if f.shape != (self.n_modes,):
            raise ValueError(f"state of shape {f.shape} does not match mode count {self.n_modes}")
        return f

    def rhs(self, f) -> np.ndarray:
        f = self._check(f)
        out = np.zeros(self.n_modes)
        if len(self) == 0:
            return out
        f1 = f[self.i1]
        f2 = f[self.i2]
        f3 = f[self.i3]
        flux = self.coeff * (f2 * f3 - f1 * (f2 + f3))
        np.add.at(out, self.i1, flux)
        np.subtract.at(out, self.i2, flux)
        np.subtract.at(out, self.i3, flux)
        return out

    def jacobian(self, f) -> np.ndarray:
        """Exact derivative matrix of ``rhs`` (entries are linear in f)."""
        f = self._check(f)
        J = np.zeros((self.n_modes, self.n_modes))
        for j in range(len(self)):
            a, b, c = int(self.i1[j]), int(self.i2[j]), int(self.i3[j])
            w = self.coeff[j]
            for col, g in ((a, -(f[b] + f[c])), (b, f[c] - f[a]), (c, f[b] - f[a])):
                v = w * g
                J[a, col] += v
                J[b, col] -= v
                J[c, col] -= v
        return J

    def dissipation_rate(self, f) -> float:
        """Rate of change of ``-sum(log f)`` along the flow.

        Never positive on positive states; zero exactly when every triad
        satisfies 1/f1 = 1/f2 + 1/f3.
        """
        f = self._check(f)
        if len(self) == 0:
            return 0.0
        f1 = f[self.i1]
        f2 = f[self.i2]
        f3 = f[self.i3]
        gap = 1.0 / f1 - 1.0 / f2 - 1.0 / f3
        return float(-(self.coeff * (f1 * f2 * f3) * gap * gap).sum())


@lru_cache(maxsize=None)
def _cached_ray_tally(generator: tuple[int, int, int], mode_count: int, coupling: float) -> TriadTally:
    ray = Ray(LatticePoint(*generator), mode_count)
    return TriadTally(ray_triads(ray), mode_count, KernelParams(coupling))


def ray_tally(ray: Ray, params: KernelParams = KernelParams()) -> TriadTally:
    """Cached tally of one ray's exact triads (states indexed by k - 1)."""
    return _cached_ray_tally(ray.generator.as_tuple(), ray.mode_count, params.lambda_coupling)


def rhs_exact_ray(f, ray: Ray, params: KernelParams = KernelParams()) -> np.ndarray:
    """Time derivative of one ray's mode densities.

    ``f`` has length ``ray.mode_count``; entry k-1 is the density of mode
    ``k * generator``.  A one-mode ray has no triads and a zero derivative.
    """
    return ray_tally(ray, params).rhs(f)


def _list_rhs(f, triads: Sequence[Triad], params: KernelParams | None) -> np.ndarray:
    f = np.asarray(f, dtype=float)
    if f.ndim != 1:
        raise ValueError("state must be a one-dimensional vector")
    return TriadTally(triads, f.shape[0], params).rhs(f)


def rhs_exact_full(f, triads: Sequence[Triad], params: KernelParams | None = None) -> np.ndarray:
    """Full-lattice exact derivative from a lattice-indexed exact triad list.

    ``triads`` should come from ``enumerate_exact_triads`` at its default
    coupling; ``params`` rescales the stored kernels.  By ray decoupling the
    result equals the per-ray derivatives on each ray's coordinates.
    """
    return _list_rhs(f, triads, params)


def rhs_near(f, triads: Sequence[Triad], params: KernelParams | None = None) -> np.ndarray:
    """Broadened-system derivative from a near triad list.

    Same tally form as the exact system, applied to the defect-filtered list
    from ``enumerate_near_triads``.  For a broadening below the smallest
    nonzero defect the triad set, and hence the derivative, coincides with
    the exact system's.
    """
    return _list_rhs(f, triads, params)
