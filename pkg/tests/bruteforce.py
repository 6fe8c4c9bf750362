"""Brute-force reference implementations used only by the test suite.

These are deliberately naive (exponential path enumeration, exhaustive
joint enumeration) so they are easy to audit; the package's fast
implementations are checked against them on small random inputs.
"""

from __future__ import annotations

from itertools import combinations, product

import numpy as np

from causalboot.graph import CausalGraph, _expand_bidirected


def dsep_by_path_enumeration(g: CausalGraph, a, b, given) -> bool:
    """d-separation decided by enumerating every acyclic undirected path.

    A path is active given Z when every collider on it has a descendant
    in Z (inclusive) and no other node on it is in Z.  The graph's
    bidirected edges are expanded exactly as the package does, so both
    routes see the same latent structure.
    """
    gx = _expand_bidirected(g)
    given = frozenset(given)

    desc: dict[str, set[str]] = {}

    def descendants(node: str) -> set[str]:
        if node not in desc:
            out = {node}
            stack = [node]
            while stack:
                cur = stack.pop()
                for child in gx.children(cur):
                    if child not in out:
                        out.add(child)
                        stack.append(child)
            desc[node] = out
        return desc[node]

    def neighbours(node: str):
        yield from gx.parents(node)
        yield from gx.children(node)

    def path_active(path: list[str]) -> bool:
        for i in range(1, len(path) - 1):
            prev, node, nxt = path[i - 1], path[i], path[i + 1]
            into_prev = (prev, node) in gx.directed
            into_next = (nxt, node) in gx.directed
            collider = into_prev and into_next
            if collider:
                if not (descendants(node) & given):
                    return False
            elif node in given:
                return False
        return True

    def any_active(start: str, goal: str) -> bool:
        stack = [[start]]
        while stack:
            path = stack.pop()
            node = path[-1]
            if node == goal:
                if path_active(path):
                    return True
                continue
            for nxt in neighbours(node):
                if nxt not in path:
                    stack.append(path + [nxt])
        return False

    for s in a:
        for t in b:
            if any_active(s, t):
                return False
    return True


def random_admg(rng: np.random.Generator, n_nodes: int,
                p_edge: float = 0.4, p_bi: float = 0.2) -> CausalGraph:
    """Random acyclic mixed graph over nodes N0..N{k-1}."""
    names = [f"N{i}" for i in range(n_nodes)]
    order = list(rng.permutation(n_nodes))
    directed = set()
    for i, j in combinations(range(n_nodes), 2):
        if rng.random() < p_edge:
            a, b = (i, j) if order.index(i) < order.index(j) else (j, i)
            directed.add((names[a], names[b]))
    bidirected = set()
    for i, j in combinations(range(n_nodes), 2):
        if rng.random() < p_bi:
            bidirected.add((names[i], names[j]))
    return CausalGraph(
        nodes=tuple(names),
        directed=frozenset(directed),
        bidirected=frozenset(bidirected),
    )


def random_disjoint_sets(rng: np.random.Generator, g: CausalGraph):
    """Pick non-empty disjoint (a, b, given) from g's nodes, given may be empty."""
    nodes = list(g.nodes)
    rng.shuffle(nodes)
    a = [nodes[0]]
    b = [nodes[1]]
    rest = nodes[2:]
    k = int(rng.integers(0, len(rest) + 1))
    return frozenset(a), frozenset(b), frozenset(rest[:k])
