"""
Genome encoding of wire arrangements.

Variable designs: per wire, reals [l_1, l_2, ..., l_N] and categoricals
[d_2, ..., d_N] (the first relay point always sits on LINK_0). Constant
designs: M*D reals, row-major, and no categoricals. Reals live in [0, 1];
categoricals take values 0..D.
"""
from dataclasses import dataclass

import numpy as np
from django.core.exceptions import ValidationError

from .wires import CONSTANT, VARIABLE, RelayPoint, WireArrangement


class GenomeLengthError(ValueError):
    """The genome does not have the gene counts the design space expects."""


@dataclass(frozen=True)
class Genome:
    reals: tuple
    categoricals: tuple
    cardinality: int

    def __post_init__(self):
        reals = tuple(min(max(float(x), 0.0), 1.0) for x in self.reals)
        object.__setattr__(self, 'reals', reals)
        object.__setattr__(self, 'categoricals', tuple(int(c) for c in self.categoricals))
        if any(not 0 <= c < self.cardinality for c in self.categoricals):
            raise ValidationError(
                {'categoricals': f'Categorical genes must lie in 0..{self.cardinality - 1}.'}
            )

    @property
    def n_genes(self):
        return len(self.reals) + len(self.categoricals)

    def as_dict(self):
        return {'reals': list(self.reals), 'categoricals': list(self.categoricals)}


def genome_encode(design, n_joints):
    cardinality = n_joints + 1
    if design.kind == CONSTANT:
        return Genome(
            reals=tuple(r for row in design.arms for r in row),
            categoricals=(),
            cardinality=cardinality,
        )
    reals, categoricals = [], []
    for wire in design.wires:
        reals.extend(p.fraction for p in wire)
        categoricals.extend(p.link_id for p in wire[1:])
    return Genome(tuple(reals), tuple(categoricals), cardinality)


def genome_decode(genome, n_wires, n_relays, n_joints):
    """Rebuild a design; an empty categorical part denotes a constant-arm genome."""
    if not genome.categoricals:
        if len(genome.reals) != n_wires * n_joints:
            raise GenomeLengthError(
                f'Constant genome needs {n_wires * n_joints} reals, got {len(genome.reals)}.'
            )
        arms = np.reshape(genome.reals, (n_wires, n_joints))
        return WireArrangement.constant(arms.tolist())

    if len(genome.reals) != n_wires * n_relays or len(genome.categoricals) != n_wires * (n_relays - 1):
        raise GenomeLengthError(
            f'Variable genome needs {n_wires * n_relays} reals and {n_wires * (n_relays - 1)} '
            f'categoricals, got {len(genome.reals)} and {len(genome.categoricals)}.'
        )
    if any(c > n_joints for c in genome.categoricals):
        raise ValidationError({'categoricals': f'Link index exceeds LINK_{n_joints}.'})

    wires = []
    for m in range(n_wires):
        fractions = genome.reals[m * n_relays:(m + 1) * n_relays]
        links = (0,) + genome.categoricals[m * (n_relays - 1):(m + 1) * (n_relays - 1)]
        wires.append(tuple(RelayPoint(d, l) for d, l in zip(links, fractions)))
    return WireArrangement.variable(wires)


@dataclass(frozen=True)
class DesignSpace:
    kind: str
    n_wires: int
    n_relays: int
    n_joints: int

    def __post_init__(self):
        if self.kind not in (VARIABLE, CONSTANT):
            raise ValidationError({'kind': f'Unknown arrangement kind {self.kind!r}.'})
        if self.n_wires < 1 or self.n_joints < 1:
            raise ValidationError('A design space needs at least one wire and one joint.')
        if self.kind == VARIABLE and self.n_relays < 2:
            raise ValidationError({'n_relays': 'Variable wires need at least two relay points.'})

    @property
    def cardinality(self):
        return self.n_joints + 1

    @property
    def n_reals(self):
        if self.kind == CONSTANT:
            return self.n_wires * self.n_joints
        return self.n_wires * self.n_relays

    @property
    def n_categoricals(self):
        if self.kind == CONSTANT:
            return 0
        return self.n_wires * (self.n_relays - 1)

    @property
    def n_genes(self):
        return self.n_reals + self.n_categoricals

    def random_genome(self, rng):
        reals = rng.random(self.n_reals)
        categoricals = rng.integers(0, self.cardinality, size=self.n_categoricals)
        return Genome(tuple(reals.tolist()), tuple(categoricals.tolist()), self.cardinality)

    def encode(self, design):
        return genome_encode(design, self.n_joints)

    def decode(self, genome):
        return genome_decode(genome, self.n_wires, self.n_relays, self.n_joints)
