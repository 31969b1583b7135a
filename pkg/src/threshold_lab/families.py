"""Generators for structured and random bounded families.

Subgraph families live on the edge set of the complete graph ``K_v``; edges
are indexed lexicographically over vertex pairs, ``(0,1), (0,2), ...``, and
recorded as labels ``"u-w"``.
"""

from __future__ import annotations

from itertools import combinations, permutations
from math import comb

from .caps import ValidationError
from .measure import STREAM_FAMILY, substream
from .sets import MAX_N, SetFamily, mask_of


def edge_index(v: int) -> dict[tuple[int, int], int]:
    if v < 2:
        raise ValidationError("need at least 2 vertices")
    if v * (v - 1) // 2 > MAX_N:
        raise ValidationError(f"K_{v} has more than {MAX_N} edges")
    return {e: i for i, e in enumerate(combinations(range(v), 2))}


def _edge_family(v, edge_sets) -> SetFamily:
    index = edge_index(v)
    labels = tuple(f"{a}-{b}" for a, b in index)
    members = [mask_of(index[tuple(sorted(e))] for e in es) for es in edge_sets]
    return SetFamily.from_sets(len(index), [], labels).with_members(members)


def clique_family(v: int, k: int) -> SetFamily:
    if not 2 <= k <= v:
        raise ValidationError(f"clique size must lie in [2, v], got k={k}, v={v}")
    edge_index(v)
    return _edge_family(v, (combinations(c, 2) for c in combinations(range(v), k)))


def _matchings(vertices):
    if not vertices:
        yield []
        return
    a = vertices[0]
    for j in range(1, len(vertices)):
        rest = vertices[1:j] + vertices[j + 1:]
        for m in _matchings(rest):
            yield [(a, vertices[j])] + m


def matching_family(v: int) -> SetFamily:
    if v % 2 or v < 2:
        raise ValidationError("perfect matchings need an even v >= 2")
    edge_index(v)
    return _edge_family(v, _matchings(list(range(v))))


def star_family(v: int, d: int) -> SetFamily:
    if not 1 <= d <= v - 1:
        raise ValidationError(f"star degree must lie in [1, v-1], got d={d}")
    edge_index(v)
    stars = []
    for c in range(v):
        others = [u for u in range(v) if u != c]
        stars.extend([(c, u) for u in leaves] for leaves in combinations(others, d))
    return _edge_family(v, stars)


def pattern_family(v: int, pattern_edges) -> SetFamily:
    """All copies in ``K_v`` of a small pattern graph, by brute-force embedding."""
    pattern_edges = [tuple(e) for e in pattern_edges]
    if not pattern_edges:
        raise ValidationError("pattern needs at least one edge")
    verts = sorted({x for e in pattern_edges for x in e})
    if len(verts) > v:
        raise ValidationError("pattern has more vertices than K_v")
    edge_index(v)
    copies = set()
    for image in permutations(range(v), len(verts)):
        phi = dict(zip(verts, image))
        copies.add(frozenset(tuple(sorted((phi[a], phi[b]))) for a, b in pattern_edges))
    return _edge_family(v, copies)


def gen_subgraph_family(model: str, *params) -> SetFamily:
    """``clique(v,k)``, ``perfect-matching(v)``, ``star(v,d)``, ``path(v,len)``, ``cycle(v,len)``."""
    if model == "clique":
        return clique_family(*params)
    if model in ("perfect-matching", "matching"):
        return matching_family(*params)
    if model == "star":
        return star_family(*params)
    if model == "path":
        v, length = params
        return pattern_family(v, [(i, i + 1) for i in range(length)])
    if model == "cycle":
        v, length = params
        if length < 3:
            raise ValidationError("cycles need length >= 3")
        return pattern_family(v, [(i, (i + 1) % length) for i in range(length)])
    raise ValidationError(f"unknown subgraph model {model!r}")


def gen_random_family(n: int, count: int, ell: int, seed: int) -> SetFamily:
    """``count`` distinct nonempty subsets of size at most ``ell``.

    Each draw picks a size uniformly from ``1..ell`` and then a uniform
    subset of that size; repeats are rejected.
    """
    if not 1 <= ell <= n <= MAX_N:
        raise ValidationError(f"need 1 <= ell <= n <= {MAX_N}")
    available = sum(comb(n, s) for s in range(1, ell + 1))
    if not 0 <= count <= available:
        raise ValidationError(f"only {available} subsets of size <= {ell} exist, asked for {count}")
    rng = substream(seed, STREAM_FAMILY, n, ell)
    chosen = []
    seen = set()
    per_size = [0] * (ell + 1)
    while len(chosen) < count:
        size = int(rng.integers(1, ell + 1))
        if per_size[size] == comb(n, size):
            continue
        m = mask_of(rng.choice(n, size=size, replace=False))
        if m not in seen:
            seen.add(m)
            per_size[size] += 1
            chosen.append(m)
    return SetFamily.from_sets(n, []).with_members(chosen)
