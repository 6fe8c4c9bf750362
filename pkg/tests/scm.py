"""Exact discrete structural models for the test suite.

Given a mixed graph, ``DiscreteSCM.random`` attaches a fresh latent fork
behind every bidirected edge, draws positive conditional probability
tables for every node, and then answers two questions exactly, by full
enumeration: the observational joint over the observed nodes, and the
distribution of any observed nodes under a forced intervention.  The
package's identification and resampling code is tested against these.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np

from causalboot.graph import CausalGraph, _expand_bidirected, topological_order


@dataclass
class DiscreteSCM:
    observed: tuple[str, ...]          # observed nodes, in enumeration order
    order: tuple[str, ...]             # all nodes (latents included), topological
    domains: dict[str, int]
    parents: dict[str, tuple[str, ...]]
    cpts: dict[str, np.ndarray]        # node -> array[parent values..., node value]

    @classmethod
    def random(cls, rng: np.random.Generator, g: CausalGraph, cardinality: int = 2,
               floor: float = 0.1) -> "DiscreteSCM":
        gx = _expand_bidirected(g)
        order = topological_order(gx)
        domains = {n: cardinality for n in order}
        parents = {n: tuple(sorted(gx.parents(n))) for n in order}
        cpts = {}
        for node in order:
            shape = tuple(domains[p] for p in parents[node]) + (domains[node],)
            raw = floor + rng.random(shape)
            cpts[node] = raw / raw.sum(axis=-1, keepdims=True)
        observed = tuple(n for n in g.nodes if n not in g.latent)
        return cls(observed, order, domains, parents, cpts)

    def _prob(self, assignment: dict[str, int], skip: frozenset[str]) -> float:
        p = 1.0
        for node in self.order:
            if node in skip:
                continue
            idx = tuple(assignment[q] for q in self.parents[node]) + (assignment[node],)
            p *= self.cpts[node][idx]
        return p

    def _enumerate(self, fixed: dict[str, int], skip: frozenset[str]):
        free = [n for n in self.order if n not in fixed]
        for values in product(*(range(self.domains[n]) for n in free)):
            assignment = dict(fixed)
            assignment.update(zip(free, values))
            yield assignment, self._prob(assignment, skip)

    def observational_joint(self) -> tuple[tuple[str, ...], np.ndarray]:
        """Joint over the observed nodes, latents summed out exactly."""
        shape = tuple(self.domains[n] for n in self.observed)
        table = np.zeros(shape)
        for assignment, p in self._enumerate({}, frozenset()):
            table[tuple(assignment[n] for n in self.observed)] += p
        return self.observed, table

    def interventional(self, do: dict[str, int], outcome: tuple[str, ...]) -> np.ndarray:
        """P(outcome | do(...)) by forcing nodes and re-enumerating."""
        shape = tuple(self.domains[n] for n in outcome)
        table = np.zeros(shape)
        for assignment, p in self._enumerate(dict(do), frozenset(do)):
            table[tuple(assignment[n] for n in outcome)] += p
        return table
