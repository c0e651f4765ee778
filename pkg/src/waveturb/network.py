"""Mass-action reaction network equivalent of a ray's triad dynamics.

Each within-ray triad k2 + k3 = k1 becomes a small reaction motif whose
mass-action fluxes reproduce the triad tally exactly.  For distinct partners
(k2 != k3) the motif is three reactions, all at rate constant 2V:

    A_k2 + A_k3 -> A_k1
    A_k2 + A_k1 -> 2A_k2 + A_k3
    A_k3 + A_k1 -> 2A_k3 + A_k2

For the self-pairing 2k2 = k1 it is two reactions:

    2A_k2       -> A_k1          rate V
    A_k2 + A_k1 -> 3A_k2         rate 2V

Every change vector is +-(e_k1 - e_k2 - e_k3), so the k-weighted total is
conserved reaction by reaction.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .kinetics import KernelParams
from .lattice import Ray, ray_partitions, triad_kernel


@dataclass(frozen=True)
class Complex:
    """Formal nonnegative-integer combination of species.

    ``terms`` holds (species_index, coefficient) pairs, index-sorted, with
    zero coefficients dropped.
    """

    terms: tuple[tuple[int, int], ...]

    @classmethod
    def from_counts(cls, counts: Mapping[int, int]) -> "Complex":
        cleaned = sorted((int(i), int(c)) for i, c in counts.items() if c != 0)
        for i, c in cleaned:
            if i < 0 or c < 0:
                raise ValueError(f"invalid complex term ({i}, {c})")
        return cls(tuple(cleaned))

    @property
    def stoichiometry(self) -> dict[int, int]:
        return dict(self.terms)

    @property
    def size(self) -> int:
        return sum(c for _, c in self.terms)

    def vector(self, n_species: int) -> np.ndarray:
        v = np.zeros(n_species)
        for i, c in self.terms:
            v[i] = c
        return v

    def label(self, species: Sequence[str]) -> str:
        parts = []
        for i, c in self.terms:
            parts.append(species[i] if c == 1 else f"{c}{species[i]}")
        return " + ".join(parts)


@dataclass(frozen=True)
class Reaction:
    """Irreversible reaction with a positive mass-action rate constant."""

    reactant: Complex
    product: Complex
    rate_constant: float

    def __post_init__(self) -> None:
        if not self.rate_constant > 0:
            raise ValueError(f"rate constant must be positive, got {self.rate_constant}")
        if self.reactant == self.product:
            raise ValueError("reaction must change its complex")
        if self.reactant.size < 1 or self.product.size < 1:
            raise ValueError("reaction complexes must be nonempty")

    def change(self, n_species: int) -> np.ndarray:
        return self.product.vector(n_species) - self.reactant.vector(n_species)


@dataclass(frozen=True)
class ReactionNetwork:
    """Ordered species (A_1 ... A_I for a ray) and reactions."""

    species: tuple[str, ...]
    reactions: tuple[Reaction, ...]

    @property
    def n_species(self) -> int:
        return len(self.species)


def build_network(ray: Ray, params: KernelParams = KernelParams()) -> ReactionNetwork:
    """Reaction network whose mass-action dynamics equals the ray's tally.

    Species A_k track the densities of the modes k * generator; a one-mode
    ray yields an empty reaction list.  Reactions come out in within-ray
    triad order, motif by motif.
    """
    species = tuple(f"A_{k}" for k in ray.mode_indices)
    reactions: list[Reaction] = []
    for k1, k2, k3 in ray_partitions(ray.mode_count):
        v = triad_kernel(ray.point(k1), ray.point(k2), ray.point(k3), params.lambda_coupling)
        a1, a2, a3 = k1 - 1, k2 - 1, k3 - 1
        if k2 != k3:
            rate = 2.0 * v
            reactions.append(
                Reaction(Complex.from_counts({a2: 1, a3: 1}), Complex.from_counts({a1: 1}), rate)
            )
            reactions.append(
                Reaction(Complex.from_counts({a2: 1, a1: 1}), Complex.from_counts({a2: 2, a3: 1}), rate)
            )
            reactions.append(
                Reaction(Complex.from_counts({a3: 1, a1: 1}), Complex.from_counts({a3: 2, a2: 1}), rate)
            )
        else:
            reactions.append(
                Reaction(Complex.from_counts({a2: 2}), Complex.from_counts({a1: 1}), v)
            )
            reactions.append(
                Reaction(Complex.from_counts({a2: 1, a1: 1}), Complex.from_counts({a2: 3}), 2.0 * v)
            )
    return ReactionNetwork(species, tuple(reactions))


def mass_action_rhs(network: ReactionNetwork, concentrations) -> np.ndarray:
    """Mass-action derivative: sum of rate * X^reactant * (product - reactant).

    Accumulates in reaction order, so repeated evaluation is deterministic.
    """
    X = np.asarray(concentrations, dtype=float)
    if X.shape != (network.n_species,):
        raise ValueError(
            f"concentration vector of shape {X.shape} does not match {network.n_species} species"
        )
    xs = X.tolist()
    out = [0.0] * network.n_species
    for r in network.reactions:
        flux = r.rate_constant
        for i, c in r.reactant.terms:
            flux *= xs[i] ** c
        for i, c in r.reactant.terms:
            out[i] -= flux * c
        for i, c in r.product.terms:
            out[i] += flux * c
    return np.array(out)


def export_network(network: ReactionNetwork, fmt: str = "text") -> str:
    """Serialize a network.

    ``text``: one line per reaction, ``A_2 + A_3 -> A_1 ; rate = 12``.
    ``json``: species list plus reactions with name-keyed stoichiometry maps.
    Both round-trip through ``import_network``.
    """
    if fmt == "text":
        lines = [
            f"{r.reactant.label(network.species)} -> {r.product.label(network.species)}"
            f" ; rate = {format(r.rate_constant, '.17g')}"
            for r in network.reactions
        ]
        return "\n".join(lines) + ("\n" if lines else "")
    if fmt == "json":
        doc = {
            "species": list(network.species),
            "reactions": [
                {
                    "reactant": {network.species[i]: c for i, c in r.reactant.terms},
                    "product": {network.species[i]: c for i, c in r.product.terms},
                    "rate_constant": r.rate_constant,
                }
                for r in network.reactions
            ],
        }
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"
    raise ValueError(f"unknown format: {fmt!r}")


_TERM_RE = re.compile(r"^(\d*)\s*([A-Za-z]\w*)$")
_LINE_RE = re.compile(r"^(.*?)\s*->\s*(.*?)\s*;\s*rate\s*=\s*(\S+)$")


def _parse_side(side: str, index: dict[str, int]) -> dict[int, int]:
    counts: dict[int, int] = {}
    for raw in side.split("+"):
        m = _TERM_RE.match(raw.strip())
        if m is None:
            raise ValueError(f"cannot parse complex term {raw.strip()!r}")
        coeff = int(m.group(1)) if m.group(1) else 1
        name = m.group(2)
        if name not in index:
            raise ValueError(f"unknown species {name!r}")
        counts[index[name]] = counts.get(index[name], 0) + coeff
    return counts


def import_network(document: str, fmt: str = "text") -> ReactionNetwork:
    """Inverse of ``export_network``.

    The text format carries no standalone species list, so species are
    reconstructed as A_1 .. A_max from the indices that appear; reactionless
    trailing species are preserved only by the JSON format.
    """
    if fmt == "text":
        parsed: list[tuple[str, str, float]] = []
        max_index = 0
        for line in document.splitlines():
            if not line.strip():
                continue
            m = _LINE_RE.match(line.strip())
            if m is None:
                raise ValueError(f"cannot parse reaction line {line!r}")
            parsed.append((m.group(1), m.group(2), float(m.group(3))))
            for name in re.findall(r"A_(\d+)", line):
                max_index = max(max_index, int(name))
        species = tuple(f"A_{k}" for k in range(1, max_index + 1))
        index = {name: i for i, name in enumerate(species)}
        reactions = tuple(
            Reaction(
                Complex.from_counts(_parse_side(lhs, index)),
                Complex.from_counts(_parse_side(rhs, index)),
                rate,
            )
            for lhs, rhs, rate in parsed
        )
        return ReactionNetwork(species, reactions)
    if fmt == "json":
        doc = json.loads(document)
        species = tuple(doc["species"])
        index = {name: i for i, name in enumerate(species)}
        reactions = tuple(
            Reaction(
                Complex.from_counts({index[n]: c for n, c in r["reactant"].items()}),
                Complex.from_counts({index[n]: c for n, c in r["product"].items()}),
                float(r["rate_constant"]),
            )
            for r in doc["reactions"]
        )
        return ReactionNetwork(species, reactions)
    raise ValueError(f"unknown format: {fmt!r}")
