"""Truncated integer wavevector lattice, rays, and interacting triads.

State indices for the whole library come from the lattice
``{p in Z^3 : 0 < |p| < R}``; the origin never carries density.  With the
acoustic frequency ``w(p) = |p|``, a sum triple ``p1 = p2 + p3`` is exactly
resonant precisely when ``p2`` and ``p3`` point the same way, so the exact
interaction graph splits into independent rays ``{k*g : k = 1..I}`` over
primitive directions ``g``.  Broadened triads admit a frequency defect up
to a threshold, which reconnects the rays.  Two lattice constants organize
the broadened regimes: the smallest nonzero defect (``lambda_star``) and
the smallest mode frequency (``lambda_star_upper``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from math import gcd
from typing import Iterable, Iterator, Sequence

#: Absolute slack used when a floating-point defect is compared against a
#: broadening threshold.  Collinear same-side triples are detected in integer
#: arithmetic and carry an exact zero defect instead.
DEFECT_TOLERANCE = 1e-12


class DegenerateLatticeError(ValueError):
    """Raised when no in-lattice sum triple has a nonzero defect."""


@dataclass(frozen=True, order=True)
class LatticePoint:
    """Integer wavevector; its frequency is the Euclidean norm."""

    ix: int
    iy: int
    iz: int

    @property
    def norm_sq(self) -> int:
        return self.ix * self.ix + self.iy * self.iy + self.iz * self.iz

    @property
    def norm(self) -> float:
        return math.sqrt(self.norm_sq)

    def as_tuple(self) -> tuple[int, int, int]:
        return (self.ix, self.iy, self.iz)

    def is_zero(self) -> bool:
        return self.ix == 0 and self.iy == 0 and self.iz == 0

    def __add__(self, other: "LatticePoint") -> "LatticePoint":
        return LatticePoint(self.ix + other.ix, self.iy + other.iy, self.iz + other.iz)

    def __neg__(self) -> "LatticePoint":
        return LatticePoint(-self.ix, -self.iy, -self.iz)

    def scaled(self, k: int) -> "LatticePoint":
        return LatticePoint(k * self.ix, k * self.iy, k * self.iz)

    def dot(self, other: "LatticePoint") -> int:
        return self.ix * other.ix + self.iy * other.iy + self.iz * other.iz

    def cross(self, other: "LatticePoint") -> tuple[int, int, int]:
        return (
            self.iy * other.iz - self.iz * other.iy,
            self.iz * other.ix - self.ix * other.iz,
            self.ix * other.iy - self.iy * other.ix,
        )


def same_ray(p2: LatticePoint, p3: LatticePoint) -> bool:
    """True when p2 and p3 are positive multiples of one primitive direction."""
    return p2.cross(p3) == (0, 0, 0) and p2.dot(p3) > 0


def triad_defect(p1: LatticePoint, p2: LatticePoint, p3: LatticePoint) -> float:
    """Frequency defect ||p1| - |p2| - |p3|| of a sum triple.

    Exactly zero iff the partners lie on the same ray (an integer condition),
    so exact resonance never depends on floating-point cancellation.
    """
    if same_ray(p2, p3):
        return 0.0
    return abs(p1.norm - p2.norm - p3.norm)


def triad_kernel(p1: LatticePoint, p2: LatticePoint, p3: LatticePoint, coupling: float = 1.0) -> float:
    """Interaction weight ``coupling * |p1| * |p2| * |p3|``.

    Norms are multiplied in ascending order, making the value exactly
    invariant under permutation of the arguments.
    """
    a, b, c = sorted((p1.norm, p2.norm, p3.norm))
    return coupling * (a * b) * c


@dataclass(frozen=True)
class Triad:
    """Sum triple p1 = p2 + p3 with its frequency defect and kernel weight.

    ``i1``, ``i2``, ``i3`` locate the members in the owning state vector:
    lattice order for full-lattice triads, ``k - 1`` for within-ray triads.
    """

    p1: LatticePoint
    p2: LatticePoint
    p3: LatticePoint
    defect: float
    kernel: float
    i1: int
    i2: int
    i3: int

    def __post_init__(self) -> None:
        if self.p2 + self.p3 != self.p1:
            raise ValueError(f"not a sum triple: {self.p2} + {self.p3} != {self.p1}")

    def unordered_key(self) -> tuple:
        """Identity of the triad with the partner pair treated as unordered."""
        lo, hi = sorted((self.p2.as_tuple(), self.p3.as_tuple()))
        return (self.p1.as_tuple(), lo, hi)

    def record(self) -> dict:
        """JSON-ready representation."""
        return {
            "p1": list(self.p1.as_tuple()),
            "p2": list(self.p2.as_tuple()),
            "p3": list(self.p3.as_tuple()),
            "defect": self.defect,
            "kernel": self.kernel,
        }


@dataclass(frozen=True)
class Ray:
    """Primitive lattice direction together with its in-lattice multiples."""

    generator: LatticePoint
    mode_count: int

    def __post_init__(self) -> None:
        if self.generator.is_zero():
            raise ValueError("ray generator must be nonzero")
        g = gcd(gcd(abs(self.generator.ix), abs(self.generator.iy)), abs(self.generator.iz))
        if g != 1:
            raise ValueError(f"ray generator must be primitive, got {self.generator}")
        if self.mode_count < 1:
            raise ValueError("mode_count must be at least 1")

    @property
    def mode_indices(self) -> range:
        return range(1, self.mode_count + 1)

    def point(self, k: int) -> LatticePoint:
        if not 1 <= k <= self.mode_count:
            raise ValueError(f"mode index {k} outside 1..{self.mode_count}")
        return self.generator.scaled(k)

    def points(self) -> list[LatticePoint]:
        return [self.point(k) for k in self.mode_indices]


class Lattice(Sequence[LatticePoint]):
    """Lexicographically ordered truncated lattice with O(1) lookup."""

    def __init__(self, points: Iterable[LatticePoint], radius: float, dimension: int) -> None:
        self._points = tuple(points)
        self._lookup = {p: i for i, p in enumerate(self._points)}
        self.radius = float(radius)
        self.dimension = int(dimension)

    def __len__(self) -> int:
        return len(self._points)

    def __getitem__(self, i):
        return self._points[i]

    def __contains__(self, p: object) -> bool:
        return p in self._lookup

    def index(self, p: LatticePoint) -> int:
        try:
            return self._lookup[p]
        except KeyError:
            raise ValueError(f"{p} is not a lattice point") from None

    def find(self, p: LatticePoint) -> int | None:
        """Index of ``p`` or None when outside the lattice."""
        return self._lookup.get(p)

    def __repr__(self) -> str:
        return f"Lattice(radius={self.radius}, dimension={self.dimension}, points={len(self)})"


def build_lattice(radius: float, dimension: int = 3) -> Lattice:
    """All integer points with 0 < |p| < radius, in lexicographic order.

    ``dimension=1`` restricts to the line ``{(k, 0, 0)}``, which is enough to
    drive the broadened blow-up mechanism cheaply.
    """
    if dimension not in (1, 3):
        raise ValueError(f"dimension must be 1 or 3, got {dimension}")
    if not radius > 1.0:
        raise ValueError(f"empty lattice: radius must exceed 1, got {radius}")
    limit = float(radius) * float(radius)
    reach = int(math.ceil(radius))
    points: list[LatticePoint] = []
    if dimension == 1:
        for k in range(-reach, reach + 1):
            if 0 < k * k < limit:
                points.append(LatticePoint(k, 0, 0))
    else:
        for ix in range(-reach, reach + 1):
            for iy in range(-reach, reach + 1):
                for iz in range(-reach, reach + 1):
                    n2 = ix * ix + iy * iy + iz * iz
                    if 0 < n2 < limit:
                        points.append(LatticePoint(ix, iy, iz))
    return Lattice(points, radius, dimension)


def primitive_direction(p: LatticePoint) -> tuple[LatticePoint, int]:
    """Primitive generator and positive multiplier with ``p = k * generator``."""
    g = gcd(gcd(abs(p.ix), abs(p.iy)), abs(p.iz))
    return LatticePoint(p.ix // g, p.iy // g, p.iz // g), g


def decompose_rays(lattice: Sequence[LatticePoint]) -> list[Ray]:
    """Partition the lattice into rays.

    Every point appears exactly once as ``k * generator`` with ``k >= 1``;
    rays come back sorted by generator.
    """
    if len(lattice) == 0:
        raise ValueError("cannot decompose an empty lattice")
    top: dict[LatticePoint, int] = {}
    for p in lattice:
        gen, k = primitive_direction(p)
        if k > top.get(gen, 0):
            top[gen] = k
    return [Ray(gen, k) for gen, k in sorted(top.items(), key=lambda item: item[0].as_tuple())]


def ray_partitions(mode_count: int) -> Iterator[tuple[int, int, int]]:
    """Within-ray sum triples (k1, k2, k3) with k2 + k3 = k1 and k2 <= k3.

    Canonical order: ascending k1, then ascending k2.
    """
    for k1 in range(2, mode_count + 1):
        for k2 in range(1, k1 // 2 + 1):
            yield k1, k2, k1 - k2


def ray_triads(ray: Ray, coupling: float = 1.0) -> list[Triad]:
    """Exact triads of one ray, indexed by mode position ``k - 1``.

    Leave ``coupling`` at 1 when the list feeds the rhs evaluators, which
    apply their own KernelParams scaling.
    """
    out: list[Triad] = []
    for k1, k2, k3 in ray_partitions(ray.mode_count):
        q1, q2, q3 = ray.point(k1), ray.point(k2), ray.point(k3)
        out.append(
            Triad(q1, q2, q3, 0.0, triad_kernel(q1, q2, q3, coupling), k1 - 1, k2 - 1, k3 - 1)
        )
    return out


def enumerate_exact_triads(lattice: Lattice, coupling: float = 1.0) -> list[Triad]:
    """Every defect-zero triad of the lattice, grouped by ray.

    Order: rays sorted by generator, then within-ray (k1, k2).  This grouping
    keeps full-lattice accumulation bit-identical to per-ray accumulation.
    """
    out: list[Triad] = []
    for ray in decompose_rays(lattice):
        for k1, k2, k3 in ray_partitions(ray.mode_count):
            q1, q2, q3 = ray.point(k1), ray.point(k2), ray.point(k3)
            out.append(
                Triad(
                    q1,
                    q2,
                    q3,
                    0.0,
                    triad_kernel(q1, q2, q3, coupling),
                    lattice.index(q1),
                    lattice.index(q2),
                    lattice.index(q3),
                )
            )
    return out


def enumerate_near_triads(lattice: Lattice, broadening: float, coupling: float = 1.0) -> list[Triad]:
    """Every sum triple whose frequency defect is at most ``broadening``.

    The comparison is inclusive (with DEFECT_TOLERANCE slack), so the result
    always contains the exact triads and, at the blow-up threshold, the
    ray-coupling triples that drive divergence.  Order: lexicographic by
    (p1, p2, p3) with the partner pair stored ascending.
    """
    if broadening < 0:
        raise ValueError(f"broadening must be nonnegative, got {broadening}")
    cutoff = broadening + DEFECT_TOLERANCE
    pts = list(lattice)
    out: list[Triad] = []
    for a, p2 in enumerate(pts):
        for b in range(a, len(pts)):
            p3 = pts[b]
            p1 = p2 + p3
            i1 = lattice.find(p1)
            if i1 is None:
                continue
            d = triad_defect(p1, p2, p3)
            if d <= cutoff:
                out.append(Triad(p1, p2, p3, d, triad_kernel(p1, p2, p3, coupling), i1, a, b))
    out.sort(key=lambda t: (t.p1.as_tuple(), t.p2.as_tuple(), t.p3.as_tuple()))
    return out


def lambda_star(lattice: Lattice) -> float:
    """Smallest nonzero frequency defect over in-lattice sum triples.

    Exhaustive over all unordered pairs (O(N^2)).  Raises
    DegenerateLatticeError when every admissible triple is exactly resonant
    (for example when no pairwise sum stays inside the lattice).
    """
    best = math.inf
    pts = list(lattice)
    for a, p2 in enumerate(pts):
        for b in range(a, len(pts)):
            p3 = pts[b]
            if p2 + p3 not in lattice:
                continue
            if same_ray(p2, p3):
                continue
            d = abs((p2 + p3).norm - p2.norm - p3.norm)
            if d < best:
                best = d
    if not math.isfinite(best):
        raise DegenerateLatticeError("undefined (degenerate lattice): no sum triple has a nonzero defect")
    return best


def lambda_star_upper(lattice: Lattice) -> float:
    """Smallest mode frequency: the minimum norm over lattice points."""
    if len(lattice) == 0:
        raise ValueError("empty lattice has no minimum norm")
    return min(p.norm for p in lattice)


@dataclass(frozen=True)
class Thresholds:
    """Broadening thresholds separating the dynamical regimes."""

    lambda_star: float
    lambda_star_upper: float
    two_lambda_star_upper: float

    def __post_init__(self) -> None:
        if not self.lambda_star > 0:
            raise ValueError("lambda_star must be positive")
        if not self.lambda_star_upper > 0:
            raise ValueError("lambda_star_upper must be positive")

    def to_dict(self) -> dict:
        return {
            "lambda_star": self.lambda_star,
            "lambda_star_upper": self.lambda_star_upper,
            "two_lambda_star_upper": self.two_lambda_star_upper,
        }


def compute_thresholds(lattice: Lattice) -> Thresholds:
    """Both thresholds of the lattice in one report."""
    upper = lambda_star_upper(lattice)
    return Thresholds(lambda_star(lattice), upper, 2.0 * upper)


def triad_records(triads: Iterable[Triad]) -> list[dict]:
    """JSON-ready triad list (fields p1, p2, p3, defect, kernel)."""
    return [t.record() for t in triads]
