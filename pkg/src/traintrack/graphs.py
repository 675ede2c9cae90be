"""Finite graphs, edge paths, and tightening self-maps.

Oriented edges are nonzero integers: +e is the chosen orientation of edge e,
-e its reversal, mirroring the word encoding.  A path is a tuple of oriented
edges whose endpoints match up; tightening removes adjacent e, -e pairs.

A GraphMap sends vertices to vertices and edges to tight nonempty edge
paths.  Turns (unordered pairs of directions at a vertex) are classified as
legal or illegal by iterating the derivative map: a turn is illegal exactly
when some iterate pinches it onto a single direction.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

from .words import (
    Automorphism,
    Word,
    _reduce,
    least_rotation,
    letter_key,
    nielsen_inverse_search,
    invert_verify,
    compose,
    identity_automorphism,
    generator_name,
)


class Graph:
    """A finite connected graph with named vertices and edges.

    Every vertex must have valence at least two.  An optional marking
    assigns to each positive edge a word in a fixed free basis; reversed
    edges get inverse words.
    """

    def __init__(
        self,
        vertices: Sequence[str],
        edges: Sequence[tuple[str, str, str]],
        marking: dict[str, Sequence[int]] | None = None,
        marking_rank: int | None = None,
    ):
        if not vertices:
            raise ValueError("graph needs at least one vertex")
        if len(set(vertices)) != len(vertices):
            raise ValueError("duplicate vertex names")
        self.vertices = tuple(vertices)
        names = [e[0] for e in edges]
        if len(set(names)) != len(names):
            raise ValueError("duplicate edge names")
        self.edge_names = tuple(names)
        vset = set(vertices)
        self._origin: dict[int, str] = {}
        for idx, (name, o, t) in enumerate(edges, start=1):
            if o not in vset or t not in vset:
                raise ValueError(f"edge {name} references unknown vertex")
            self._origin[idx] = o
            self._origin[-idx] = t
        self._check_connected()
        self._check_valence()
        self.marking: dict[int, tuple[int, ...]] | None = None
        self.marking_rank: int | None = None
        if marking is not None:
            table: dict[int, tuple[int, ...]] = {}
            for name, letters in marking.items():
                table[self.edge_id(name)] = _reduce(tuple(letters))
            missing = [n for n in self.edge_names if self.edge_id(n) not in table]
            if missing:
                raise ValueError(f"marking missing edges: {missing}")
            self.marking = table
            if marking_rank is None:
                marking_rank = max(
                    (abs(x) for w in table.values() for x in w), default=0
                )
            self.marking_rank = marking_rank

    @property
    def edge_count(self) -> int:
        return len(self.edge_names)

    def edge_id(self, name: str) -> int:
        try:
            return self.edge_names.index(name) + 1
        except ValueError:
            raise ValueError(f"unknown edge {name!r}") from None

    def edge_name(self, d: int) -> str:
        name = self.edge_names[abs(d) - 1]
        return name if d > 0 else name + "^-1"

    def origin(self, d: int) -> str:
        return self._origin[d]

    def terminus(self, d: int) -> str:
        return self._origin[-d]

    def directions(self) -> list[int]:
        m = self.edge_count
        return [d for e in range(1, m + 1) for d in (e, -e)]

    def directions_at(self, v: str) -> list[int]:
        return [d for d in self.directions() if self.origin(d) == v]

    @property
    def rank(self) -> int:
        return self.edge_count - len(self.vertices) + 1

    def _check_connected(self):
        seen = {self.vertices[0]}
        frontier = [self.vertices[0]]
        while frontier:
            v = frontier.pop()
            for d in self._origin:
                if self._origin[d] == v:
                    w = self._origin[-d]
                    if w not in seen:
                        seen.add(w)
                        frontier.append(w)
        if len(seen) != len(self.vertices):
            raise ValueError("graph is not connected")

    def _check_valence(self):
        for v in self.vertices:
            if len(self.directions_at(v)) < 2:
                raise ValueError(f"vertex {v} has valence < 2")

    def marking_word(self, d: int) -> tuple[int, ...]:
        if self.marking is None:
            raise ValueError("graph has no marking")
        w = self.marking[abs(d)]
        return w if d > 0 else tuple(-x for x in reversed(w))

    def path_marking(self, edges: Iterable[int]) -> Word:
        out: list[int] = []
        for d in edges:
            for x in self.marking_word(d):
                if out and out[-1] == -x:
                    out.pop()
                else:
                    out.append(x)
        return Word(out)

    def spell_path(self, edges: Sequence[int]) -> str:
        if not edges:
            return "1"
        return " ".join(self.edge_name(d) for d in edges)

    def check_path(self, edges: Sequence[int]) -> None:
        """Validate that edges form a connected tight path."""
        for d in edges:
            if d == 0 or abs(d) > self.edge_count:
                raise ValueError(f"bad oriented edge {d}")
        for a, b in zip(edges, edges[1:]):
            if b == -a:
                raise ValueError("path is not tight")
            if self.terminus(a) != self.origin(b):
                raise ValueError(
                    f"edges {self.edge_name(a)} and {self.edge_name(b)} do not chain"
                )

    def __repr__(self) -> str:
        return f"Graph({len(self.vertices)} vertices, {self.edge_count} edges)"


def tighten(edges: Iterable[int]) -> tuple[int, ...]:
    """Remove adjacent cancelling pairs e, -e until none remain."""
    return _reduce(edges)


def cyclic_tighten(edges: Iterable[int]) -> tuple[int, ...]:
    w = _reduce(tuple(edges))
    i, j = 0, len(w)
    while j - i >= 2 and w[i] == -w[j - 1]:
        i += 1
        j -= 1
    return w[i:j]


class EdgePath:
    """A tight edge path with endpoints at vertices."""

    __slots__ = ("graph", "edges")

    def __init__(self, graph: Graph, edges: Iterable[int]):
        edges = tuple(edges)
        graph.check_path(edges)
        object.__setattr__(self, "graph", graph)
        object.__setattr__(self, "edges", edges)

    def __setattr__(self, name, value):
        raise AttributeError("EdgePath is immutable")

    @classmethod
    def _raw(cls, graph: Graph, edges: tuple[int, ...]) -> "EdgePath":
        p = cls.__new__(cls)
        object.__setattr__(p, "graph", graph)
        object.__setattr__(p, "edges", edges)
        return p

    def __len__(self) -> int:
        return len(self.edges)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, EdgePath)
            and self.graph is other.graph
            and self.edges == other.edges
        )

    def __hash__(self) -> int:
        return hash(("EdgePath", id(self.graph), self.edges))

    @property
    def origin(self) -> str:
        if not self.edges:
            raise ValueError("trivial path has no well-defined endpoints here")
        return self.graph.origin(self.edges[0])

    @property
    def terminus(self) -> str:
        if not self.edges:
            raise ValueError("trivial path has no well-defined endpoints here")
        return self.graph.terminus(self.edges[-1])

    def reverse(self) -> "EdgePath":
        return EdgePath._raw(self.graph, tuple(-d for d in reversed(self.edges)))

    def __repr__(self) -> str:
        return f"EdgePath({self.graph.spell_path(self.edges)})"


class Circuit:
    """A free homotopy class of loops: cyclically tight, canonical rotation."""

    __slots__ = ("graph", "edges")

    def __init__(self, graph: Graph, edges: Iterable[int]):
        edges = cyclic_tighten(edges)
        if edges:
            graph.check_path(edges)
            if graph.terminus(edges[-1]) != graph.origin(edges[0]):
                raise ValueError("circuit does not close up")
            if len(edges) >= 2 and edges[0] == -edges[-1]:
                raise ValueError("circuit is not cyclically tight")
            r = least_rotation(edges)
            edges = edges[r:] + edges[:r]
        object.__setattr__(self, "graph", graph)
        object.__setattr__(self, "edges", edges)

    def __setattr__(self, name, value):
        raise AttributeError("Circuit is immutable")

    def __len__(self) -> int:
        return len(self.edges)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Circuit)
            and self.graph is other.graph
            and self.edges == other.edges
        )

    def __hash__(self) -> int:
        return hash(("Circuit", id(self.graph), self.edges))

    def reverse(self) -> "Circuit":
        return Circuit(self.graph, tuple(-d for d in reversed(self.edges)))

    def __repr__(self) -> str:
        return f"Circuit({self.graph.spell_path(self.edges)})"


def make_turn(d1: int, d2: int) -> tuple[int, int]:
    """Unordered pair of directions, stored sorted by the letter order."""
    if letter_key(d1) <= letter_key(d2):
        return (d1, d2)
    return (d2, d1)


def is_degenerate(turn: tuple[int, int]) -> bool:
    return turn[0] == turn[1]


def turns_of_path(edges: Sequence[int]) -> list[tuple[int, int]]:
    """Turns taken at the interior vertices of a path."""
    return [make_turn(-a, b) for a, b in zip(edges, edges[1:])]


def turns_of_circuit(edges: Sequence[int]) -> list[tuple[int, int]]:
    if len(edges) < 1:
        return []
    pairs = list(zip(edges, edges[1:])) + [(edges[-1], edges[0])]
    return [make_turn(-a, b) for a, b in pairs]


class GraphMap:
    """A self-map of a graph sending edges to tight nonempty edge paths."""

    def __init__(
        self,
        graph: Graph,
        vertex_image: dict[str, str],
        edge_images: dict[str, Sequence[int]],
        label: str = "",
    ):
        self.graph = graph
        self.label = label
        vset = set(graph.vertices)
        if set(vertex_image) != vset or not set(vertex_image.values()) <= vset:
            raise ValueError("vertex image must map every vertex to a vertex")
        self.vertex_image = dict(vertex_image)
        self._images: dict[int, tuple[int, ...]] = {}
        for name in graph.edge_names:
            e = graph.edge_id(name)
            if name not in edge_images:
                raise ValueError(f"no image for edge {name}")
            img = tuple(edge_images[name])
            if not img:
                raise ValueError(f"image of edge {name} is empty")
            if tighten(img) != img:
                raise ValueError(f"image of edge {name} is not tight")
            graph.check_path(img)
            if graph.origin(img[0]) != vertex_image[graph.origin(e)]:
                raise ValueError(f"image of edge {name} starts at the wrong vertex")
            if graph.terminus(img[-1]) != vertex_image[graph.terminus(e)]:
                raise ValueError(f"image of edge {name} ends at the wrong vertex")
            self._images[e] = img
            self._images[-e] = tuple(-d for d in reversed(img))

    def edge_image(self, d: int) -> tuple[int, ...]:
        return self._images[d]

    def map_letters(self, edges: Sequence[int]) -> tuple[int, ...]:
        """Tightened image of an edge sequence."""
        out: list[int] = []
        images = self._images
        for d in edges:
            for y in images[d]:
                if out and out[-1] == -y:
                    out.pop()
                else:
                    out.append(y)
        return tuple(out)

    def map_path(self, p: EdgePath) -> EdgePath:
        return EdgePath._raw(self.graph, self.map_letters(p.edges))

    def map_circuit(self, c: Circuit) -> Circuit:
        return Circuit(self.graph, self.map_letters(c.edges))

    def iterate_path(self, p: EdgePath, k: int) -> EdgePath:
        if k < 0:
            raise ValueError("k must be >= 0")
        out = p
        for _ in range(k):
            out = self.map_path(out)
        return out

    def iterate_circuit(self, c: Circuit, k: int) -> Circuit:
        if k < 0:
            raise ValueError("k must be >= 0")
        out = c
        for _ in range(k):
            out = self.map_circuit(out)
        return out

    def iterate_letters(self, edges: Sequence[int], k: int) -> tuple[int, ...]:
        out = tuple(edges)
        for _ in range(k):
            out = self.map_letters(out)
        return out

    def derivative(self, d: int) -> int:
        """First oriented edge of the image of direction d."""
        return self._images[d][0]

    def turn_image(self, turn: tuple[int, int]) -> tuple[int, int]:
        return make_turn(self.derivative(turn[0]), self.derivative(turn[1]))

    def all_turns(self) -> list[tuple[int, int]]:
        """All nondegenerate turns of the graph, grouped by vertex."""
        turns = []
        for v in self.graph.vertices:
            dirs = sorted(self.graph.directions_at(v), key=letter_key)
            for i in range(len(dirs)):
                for j in range(i + 1, len(dirs)):
                    turns.append((dirs[i], dirs[j]))
        return turns

    def turn_orbit(self, turn: tuple[int, int]) -> tuple[str, int, list[tuple[int, int]]]:
        """Iterate the derivative on a turn until degeneracy or a repeat.

        Returns (verdict, steps, orbit).  The orbit always resolves within
        (number of turns + 1) steps.
        """
        orbit = [turn]
        seen = {turn}
        t = turn
        while True:
            t = self.turn_image(t)
            orbit.append(t)
            if is_degenerate(t):
                return "illegal", len(orbit) - 1, orbit
            if t in seen:
                return "legal", len(orbit) - 1, orbit
            seen.add(t)

    @cached_property
    def turn_classification(self) -> dict[tuple[int, int], str]:
        out = {}
        for t in self.all_turns():
            verdict, _, orbit = self.turn_orbit(t)
            # every nondegenerate turn along a non-degenerating orbit is legal
            for u in orbit[:-1] if verdict == "illegal" else orbit:
                if not is_degenerate(u) and u not in out:
                    out[u] = verdict if verdict == "illegal" else "legal"
            out[t] = verdict
        return out

    @cached_property
    def illegal_turns(self) -> frozenset[tuple[int, int]]:
        return frozenset(
            t for t, v in self.turn_classification.items() if v == "illegal"
        )

    def is_legal(self, edges: Sequence[int]) -> bool:
        illegal = self.illegal_turns
        return all(t not in illegal for t in turns_of_path(edges))

    def is_legal_circuit(self, edges: Sequence[int]) -> bool:
        illegal = self.illegal_turns
        return all(t not in illegal for t in turns_of_circuit(edges))

    def __repr__(self) -> str:
        ims = ", ".join(
            f"{n} -> {self.graph.spell_path(self._images[self.graph.edge_id(n)])}"
            for n in self.graph.edge_names
        )
        return f"GraphMap({ims})"


def path_is_r_legal(
    f: GraphMap, edges: Sequence[int], hr_edges: frozenset[int] | set[int],
    circuit: bool = False,
) -> bool:
    """True iff no illegal turn of the path involves an edge of the given stratum."""
    illegal = f.illegal_turns
    turns = turns_of_circuit(edges) if circuit else turns_of_path(edges)
    for t in turns:
        if t in illegal and (abs(t[0]) in hr_edges or abs(t[1]) in hr_edges):
            return False
    return True


def iter_tight_paths(
    graph: Graph,
    max_len: int,
    allowed_edges: frozenset[int] | set[int] | None = None,
    start_vertices: set[str] | None = None,
    prune=None,
):
    """Yield all nonempty tight edge paths with at most max_len edges.

    allowed_edges restricts to a subgraph (positive edge ids); prune, when
    given, is called on each partial path and a True result cuts the branch
    (the partial path itself is not yielded either).
    """
    if allowed_edges is None:
        allowed_edges = frozenset(range(1, graph.edge_count + 1))
    dirs = [d for d in graph.directions() if abs(d) in allowed_edges]
    by_vertex: dict[str, list[int]] = {}
    for d in dirs:
        by_vertex.setdefault(graph.origin(d), []).append(d)
    stack: list[tuple[int, ...]] = []
    for d in sorted(dirs, key=letter_key):
        if start_vertices is None or graph.origin(d) in start_vertices:
            stack.append((d,))
    stack.reverse()
    while stack:
        path = stack.pop()
        if prune is not None and prune(path):
            continue
        yield path
        if len(path) < max_len:
            v = graph.terminus(path[-1])
            for d in sorted(by_vertex.get(v, ()), key=letter_key, reverse=True):
                if d != -path[-1]:
                    stack.append(path + (d,))


def rose_of(phi: Automorphism, label: str | None = None) -> GraphMap:
    """The rose representative of an automorphism, identity marking."""
    names = [generator_name(i, phi.rank) for i in range(1, phi.rank + 1)]
    graph = Graph(
        ["v"],
        [(n, "v", "v") for n in names],
        marking={n: (i,) for i, n in enumerate(names, start=1)},
        marking_rank=phi.rank,
    )
    images = {
        names[i - 1]: phi.images[i - 1].letters for i in range(1, phi.rank + 1)
    }
    return GraphMap(graph, {"v": "v"}, images, label=label or phi.label)


def _spanning_tree(graph: Graph) -> tuple[dict[str, tuple[int, ...]], list[int]]:
    """BFS spanning tree from the first vertex.

    Returns (paths from base to each vertex, sorted non-tree positive edges).
    """
    base = graph.vertices[0]
    from_base: dict[str, tuple[int, ...]] = {base: ()}
    tree_edges: set[int] = set()
    frontier = [base]
    while frontier:
        nxt = []
        for v in frontier:
            for d in sorted(graph.directions_at(v), key=letter_key):
                w = graph.terminus(d)
                if w not in from_base:
                    from_base[w] = from_base[v] + (d,)
                    tree_edges.add(abs(d))
                    nxt.append(w)
        frontier = nxt
    non_tree = [e for e in range(1, graph.edge_count + 1) if e not in tree_edges]
    return from_base, non_tree


def induced_automorphism(
    f: GraphMap,
    inverse: Automorphism | Sequence[Word] | None = None,
    search_depth: int = 4,
) -> Automorphism:
    """Read off the outer automorphism that f induces on the marked fundamental group.

    Uses a spanning tree at the first vertex; the result is one representative
    of the outer class.  If `inverse` is given its images must invert the
    result (raises ValueError otherwise, which is the homotopy equivalence
    check); without it a bounded Nielsen search tries to find an inverse and
    the result may carry none.
    """
    graph = f.graph
    if graph.marking is None:
        raise ValueError("graph has no marking")
    base = graph.vertices[0]
    from_base, non_tree = _spanning_tree(graph)
    loop_index = {e: j for j, e in enumerate(non_tree, start=1)}
    k = len(non_tree)
    if graph.marking_rank != k:
        raise ValueError(
            f"marking rank {graph.marking_rank} != graph rank {k}"
        )

    def to_base(v: str) -> tuple[int, ...]:
        return tuple(-d for d in reversed(from_base[v]))

    def project(edges: Sequence[int]) -> tuple[int, ...]:
        out = []
        for d in edges:
            e = abs(d)
            if e in loop_index:
                out.append(loop_index[e] if d > 0 else -loop_index[e])
        return _reduce(tuple(out))

    fbase = f.vertex_image[base]
    closing = from_base[fbase]
    closing_back = tuple(-d for d in reversed(closing))

    psi_images = []
    loop_markings = []
    for e in non_tree:
        loop = from_base[graph.origin(e)] + (e,) + to_base(graph.terminus(e))
        img = f.map_letters(loop)
        closed = tighten(closing + img + closing_back)
        psi_images.append(Word(project(closed)))
        loop_markings.append(graph.path_marking(loop))
    psi = Automorphism(k, psi_images, label=(f.label + "#" if f.label else ""))

    if all(w.letters == (j,) for j, w in enumerate(loop_markings, start=1)):
        phi = psi
    else:
        m = Automorphism(k, loop_markings)
        m_full = nielsen_inverse_search(m, depth=search_depth)
        if m_full is None:
            raise ValueError("could not invert the marking; supply a simpler one")
        phi = compose(compose(m_full, psi), m_full.inverse())

    if inverse is not None:
        cand = inverse.images if isinstance(inverse, Automorphism) else tuple(inverse)
        if not invert_verify(phi, cand):
            raise ValueError(
                "induced endomorphism is not inverted by the supplied inverse; "
                "the map is not a homotopy equivalence realizing it"
            )
        return Automorphism(k, phi.images, cand, label=phi.label)
    found = nielsen_inverse_search(phi, depth=search_depth)
    if found is not None:
        return found
    return phi


def preimage_circuit(f: GraphMap, f_inv: GraphMap, c: Circuit, k: int) -> Circuit:
    """The class mapping onto c under k iterates of f, computed via f_inv.

    Verifies [f^k(result)] == c and raises ValueError if the two maps are
    not homotopy inverses on this class.
    """
    if k < 0:
        raise ValueError("k must be >= 0")
    out = c
    for _ in range(k):
        out = f_inv.map_circuit(out)
    if f.iterate_circuit(out, k) != c:
        raise ValueError(
            "preimage verification failed: the supplied maps are not inverse "
            "on this circuit"
        )
    # f_inv may live on its own copy of the graph; return on c's graph
    return Circuit(c.graph, out.edges)


def random_tight_path(graph: Graph, max_len: int, rng) -> tuple[int, ...]:
    """A uniform-ish random tight edge path with 1..max_len edges."""
    if max_len < 1:
        raise ValueError("max_len must be >= 1")
    v = rng.choice(list(graph.vertices))
    target = rng.randint(1, max_len)
    path: list[int] = []
    for _ in range(target):
        opts = [d for d in graph.directions_at(v) if not (path and d == -path[-1])]
        if not opts:
            break
        d = rng.choice(opts)
        path.append(d)
        v = graph.terminus(d)
    return tuple(path)


def random_circuit(graph: Graph, max_len: int, rng, attempts: int = 400) -> tuple[int, ...]:
    """A random cyclically tight circuit with at most max_len edges.

    Rejection sampling: closed tight walks that fail to close up tightly
    are discarded.  Raises after `attempts` misses (tiny max_len on a
    graph with no short circuit).
    """
    for _ in range(attempts):
        path = random_tight_path(graph, max_len, rng)
        if not path:
            continue
        if graph.terminus(path[-1]) != graph.origin(path[0]):
            continue
        if len(path) > 1 and path[-1] == -path[0]:
            continue
        if len(path) == 1 and graph.origin(path[0]) != graph.terminus(path[0]):
            continue
        return tuple(path)
    raise ValueError("could not sample a circuit within the length bound")
