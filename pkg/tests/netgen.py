"""Random mass-action networks for property tests."""

from __future__ import annotations

import itertools
import random
from fractions import Fraction

from crnrob.model import ReactionNetwork


def random_network(rng: random.Random, n_species: int = 3, n_reactions: int = 4, max_coeff: int = 2) -> ReactionNetwork:
    """Arbitrary network (not necessarily conservative)."""
    names = [f"S{k}" for k in range(n_species)]
    seen = set()
    triples = []
    while len(triples) < n_reactions:
        reac = {n: rng.randint(0, max_coeff) for n in names if rng.random() < 0.5}
        prod = {n: rng.randint(0, max_coeff) for n in names if rng.random() < 0.5}
        reac = {k: v for k, v in reac.items() if v}
        prod = {k: v for k, v in prod.items() if v}
        key = (tuple(sorted(reac.items())), tuple(sorted(prod.items())))
        if key[0] == key[1] or key in seen:
            continue
        seen.add(key)
        triples.append((reac, prod, Fraction(rng.randint(1, 9), rng.randint(1, 4))))
    return ReactionNetwork.from_reactions(names, triples)


def conservative_network(rng: random.Random, n_species: int) -> ReactionNetwork:
    """Reversible network whose reactions all preserve a positive mass vector.

    Species get masses 1 or 2; complexes of at most two molecules are paired
    only when their masses agree, so the mass vector is a positive law. The
    reaction graph is connected through the first species so that the
    network is not a disjoint union.
    """
    names = [f"S{k}" for k in range(n_species)]
    mass = [1] + [rng.choice((1, 1, 2)) for _ in range(n_species - 1)]
    complexes = []
    for k in range(n_species):
        complexes.append(((k, 1),))
    for a, b in itertools.combinations_with_replacement(range(n_species), 2):
        complexes.append(((a, 2),) if a == b else ((a, 1), (b, 1)))

    def m(c):
        return sum(mass[k] * v for k, v in c)

    def species_of(c):
        return {k for k, _ in c}

    pairs = [(c1, c2) for c1, c2 in itertools.combinations(complexes, 2) if m(c1) == m(c2) and c1 != c2]
    rng.shuffle(pairs)
    chosen = []
    touched: set[int] = set()
    for c1, c2 in pairs:
        new = (species_of(c1) | species_of(c2)) - touched
        if new or len(chosen) < n_species:
            chosen.append((c1, c2))
            touched |= species_of(c1) | species_of(c2)
        if touched == set(range(n_species)) and len(chosen) >= n_species - 1:
            break
    triples = []
    for c1, c2 in chosen:
        for a, b in ((c1, c2), (c2, c1)):
            triples.append((
                {names[k]: v for k, v in a},
                {names[k]: v for k, v in b},
                Fraction(rng.randint(1, 5)),
            ))
    return ReactionNetwork.from_reactions(names, triples)
