"""Independent brute-force oracles used by the tests.

Everything here is deliberately written without reusing the package's own
algorithms: path enumeration by breadth-first walking, congruence closure
by exhaustive one-step rewriting, Adam as a plain textbook loop, and
restriction minimality by enumerating the whole subset lattice.
"""
from __future__ import annotations

import itertools

import numpy as np


def walk_paths(schema, src, dst, max_len):
    """All edge-name tuples src->dst with length <= max_len (BFS order)."""
    found = []
    frontier = [(src, ())]
    for _ in range(max_len + 1):
        next_frontier = []
        for at, edges in frontier:
            if at == dst:
                found.append(edges)
            for gen in schema.generators:
                if gen.src == at:
                    next_frontier.append((gen.dst, edges + (gen.name,)))
        frontier = next_frontier
    return found


def rewrite_closure(schema, max_len):
    """Partition of all bounded paths by exhaustive one-step rewriting.

    A path's vertex trail is recomputed locally; each equation side is
    replaced by the other wherever it occurs, in both directions, as long
    as the result still fits in the bound. Components are found by BFS.
    """
    gen_by_name = {g.name: g for g in schema.generators}

    def vertices(src, edges):
        trail = [src]
        for e in edges:
            trail.append(gen_by_name[e].dst)
        return trail

    universe = []
    for src in schema.objects:
        for dst in schema.objects:
            for edges in walk_paths(schema, src, dst, max_len):
                universe.append((src, dst, edges))
    universe_set = set(universe)

    rules = []
    for lhs, rhs in schema.equations:
        rules.append((lhs.src, lhs.edges, rhs.edges))
        rules.append((rhs.src, rhs.edges, lhs.edges))

    def neighbors(item):
        src, dst, edges = item
        trail = vertices(src, edges)
        for at_obj, old, new in rules:
            k = len(old)
            for i in range(len(edges) - k + 1):
                if trail[i] != at_obj or edges[i:i + k] != old:
                    continue
                out = edges[:i] + new + edges[i + k:]
                if len(out) <= max_len:
                    yield (src, dst, out)

    unseen = set(universe_set)
    components = []
    for start in universe:  # deterministic order
        if start not in unseen:
            continue
        comp = set()
        queue = [start]
        unseen.discard(start)
        while queue:
            item = queue.pop()
            comp.add(item)
            for nxt in neighbors(item):
                if nxt in unseen:
                    unseen.discard(nxt)
                    queue.append(nxt)
        components.append(frozenset(comp))
    return set(components)


def random_schema(rng, max_objects=3, max_gens=4, max_eqs=2, eq_side_len=2):
    """Random small schema text for oracle comparisons."""
    from schemalearn import parse_schema

    n_obj = int(rng.integers(1, max_objects + 1))
    objects = [f"O{i}" for i in range(n_obj)]
    n_gen = int(rng.integers(0, max_gens + 1))
    gens = []
    for i in range(n_gen):
        a = objects[rng.integers(0, n_obj)]
        b = objects[rng.integers(0, n_obj)]
        gens.append((f"e{i}", a, b))
    lines = [f"object {o}" for o in objects]
    lines += [f"gen {n} : {a} -> {b}" for n, a, b in gens]
    schema = parse_schema("\n".join(lines))

    def random_path(src=None):
        # random walk of length <= eq_side_len, possibly empty
        if src is None:
            src = objects[rng.integers(0, n_obj)]
        length = int(rng.integers(0, eq_side_len + 1))
        edges = []
        at = src
        for _ in range(length):
            options = [g for g in gens if g[1] == at]
            if not options:
                break
            g = options[rng.integers(0, len(options))]
            edges.append(g[0])
            at = g[2]
        return src, at, tuple(edges)

    eq_lines = []
    tries = 0
    while len(eq_lines) < max_eqs and tries < 40:
        tries += 1
        src1, dst1, edges1 = random_path()
        src2, dst2, edges2 = random_path(src1)
        if dst1 != dst2 or edges1 == edges2:
            continue
        fmt = lambda src, edges: f"id({src})" if not edges else ";".join(edges)
        eq_lines.append(f"eq {fmt(src1, edges1)} = {fmt(src2, edges2)}")
        if rng.random() < 0.4:
            break
    text = "\n".join(lines + eq_lines)
    return parse_schema(text)


def reference_adam(theta0, grad_fn, steps, lr, beta1, beta2, eps):
    """Textbook Adam on a flat numpy vector; returns the iterate list."""
    theta = np.asarray(theta0, dtype=np.float64).copy()
    m = np.zeros_like(theta)
    v = np.zeros_like(theta)
    trace = [theta.copy()]
    for t in range(1, steps + 1):
        g = grad_fn(theta)
        m = beta1 * m + (1 - beta1) * g
        v = beta2 * v + (1 - beta2) * g * g
        m_hat = m / (1 - beta1 ** t)
        v_hat = v / (1 - beta2 ** t)
        theta = theta - lr * m_hat / (np.sqrt(v_hat) + eps)
        trace.append(theta.copy())
    return trace


def minimal_closed_supersets(initial, universe, images):
    """Intersection of all generator-closed subsets of `universe` that
    contain `initial`, by enumerating the whole lattice.

    `initial` and `universe` are lists of hashable element keys per object;
    `images` maps (object, key) -> list of (object, key) one-step images.
    Returns the intersection as a dict object -> frozenset of keys.
    """
    objects = sorted(universe)
    flat = [(obj, key) for obj in objects for key in sorted(universe[obj])]
    required = {(obj, key) for obj in objects for key in initial[obj]}
    optional = [el for el in flat if el not in required]

    best = {obj: set(universe[obj]) for obj in objects}
    found_any = False
    for mask in itertools.product((False, True), repeat=len(optional)):
        subset = set(required)
        subset.update(el for el, keep in zip(optional, mask) if keep)
        closed = all(img in subset for el in subset for img in images.get(el, ()))
        if not closed:
            continue
        found_any = True
        for obj in objects:
            best[obj] &= {key for o, key in subset if o == obj}
    assert found_any, "universe itself should be closed"
    return {obj: frozenset(keys) for obj, keys in best.items()}
