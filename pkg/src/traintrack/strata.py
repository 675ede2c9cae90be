"""Filtrations, strata, transition matrices and train-track conditions.

A topological representative is organized by an increasing chain of
invariant subgraphs.  Each layer (stratum) carries a nonnegative integer
transition matrix whose Perron-Frobenius data drives everything else:
the stratum type, the eigenvector metric, and the expansion factor.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .graphs import Graph, GraphMap, iter_tight_paths, make_turn, tighten

__all__ = [
    "Stratum",
    "Filtration",
    "Metric",
    "compute_filtration",
    "transition_matrix",
    "is_irreducible",
    "pf_eigen",
    "assign_metric",
    "verify_rtt",
    "verify_improved",
    "RttReport",
    "ImprovedReport",
]


def _strongly_connected_components(adj: dict[int, set[int]]) -> list[list[int]]:
    """Tarjan's algorithm, iterative.  Returns components in reverse
    topological order (every edge leaves a later component)."""
    index: dict[int, int] = {}
    low: dict[int, int] = {}
    on_stack: set[int] = set()
    stack: list[int] = []
    components: list[list[int]] = []
    counter = 0
    for root in sorted(adj):
        if root in index:
            continue
        work = [(root, iter(sorted(adj[root])))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            node, it = work[-1]
            advanced = False
            for nxt in it:
                if nxt not in index:
                    index[nxt] = low[nxt] = counter
                    counter += 1
                    stack.append(nxt)
                    on_stack.add(nxt)
                    work.append((nxt, iter(sorted(adj[nxt]))))
                    advanced = True
                    break
                if nxt in on_stack:
                    low[node] = min(low[node], index[nxt])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[node])
            if low[node] == index[node]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.append(w)
                    if w == node:
                        break
                components.append(sorted(comp))
    return components


@dataclass(frozen=True)
class Stratum:
    """One layer of the filtration.

    edges holds positive edge ids, sorted.  kind is "zero", "polynomial"
    or "exponential"; pf_value and pf_vector are None unless the stratum
    is irreducible (pf_vector is indexed parallel to edges).
    """

    index: int
    edges: tuple[int, ...]
    matrix: tuple[tuple[int, ...], ...]
    kind: str
    pf_value: float | None = None
    pf_vector: tuple[float, ...] | None = None

    @property
    def is_exponential(self) -> bool:
        return self.kind == "exponential"


@dataclass(frozen=True)
class Filtration:
    graph_map: GraphMap
    strata: tuple[Stratum, ...]

    def stratum_of(self, edge: int) -> int:
        return self._edge_level[abs(edge)]

    @property
    def _edge_level(self) -> dict[int, int]:
        cached = self.__dict__.get("_edge_level_cache")
        if cached is None:
            cached = {}
            for s in self.strata:
                for e in s.edges:
                    cached[e] = s.index
            object.__setattr__(self, "_edge_level_cache", cached)
        return cached

    def edges_below(self, r: int) -> frozenset[int]:
        """Positive edges of G_{r-1}, i.e. all strata strictly below r."""
        return frozenset(
            e for s in self.strata if s.index < r for e in s.edges
        )

    def edges_through(self, r: int) -> frozenset[int]:
        """Positive edges of G_r."""
        return frozenset(
            e for s in self.strata if s.index <= r for e in s.edges
        )

    def exponential_strata(self) -> list[Stratum]:
        return [s for s in self.strata if s.kind == "exponential"]


def transition_matrix(f: GraphMap, edges: tuple[int, ...]) -> np.ndarray:
    """Integer matrix M with M[i, j] = number of times f(E_j) crosses E_i
    in either direction, rows and columns indexed by the given edges."""
    pos = {e: i for i, e in enumerate(edges)}
    m = np.zeros((len(edges), len(edges)), dtype=np.int64)
    for e in edges:
        for d in f.edge_image(e):
            i = pos.get(abs(d))
            if i is not None:
                m[i, pos[e]] += 1
    return m


def is_irreducible(matrix: np.ndarray) -> bool:
    """Whether the nonnegative matrix is irreducible (support digraph is
    strongly connected; a 1x1 zero matrix is not irreducible)."""
    m = np.asarray(matrix)
    n = m.shape[0]
    if n == 0:
        return False
    if n == 1:
        return bool(m[0, 0] > 0)
    support = m > 0
    for mat in (support, support.T):
        seen = np.zeros(n, dtype=bool)
        seen[0] = True
        frontier = [0]
        while frontier:
            i = frontier.pop()
            for j in np.nonzero(mat[i])[0]:
                if not seen[j]:
                    seen[j] = True
                    frontier.append(int(j))
        if not seen.all():
            return False
    return True


def _is_permutation_matrix(m: np.ndarray) -> bool:
    return bool(
        ((m == 0) | (m == 1)).all()
        and (m.sum(axis=0) == 1).all()
        and (m.sum(axis=1) == 1).all()
    )


def pf_eigen(
    matrix: np.ndarray, tol: float = 1e-12, max_iter: int = 1_000_000
) -> tuple[float, np.ndarray]:
    """Perron-Frobenius value and left eigenvector of an irreducible
    nonnegative matrix, eigenvector normalized to minimum entry 1.

    Power iteration runs on (M + I)^T, which is primitive whenever M is
    irreducible, so it converges even for periodic matrices.
    """
    m = np.asarray(matrix, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("matrix must be square")
    if (m < 0).any():
        raise ValueError("matrix must be nonnegative")
    if not is_irreducible(m):
        raise ValueError("matrix is not irreducible")
    n = m.shape[0]
    if n == 1:
        return float(m[0, 0]), np.array([1.0])
    a = (m + np.eye(n)).T
    v = np.full(n, 1.0 / n)
    lam = 0.0
    for _ in range(max_iter):
        w = a @ v
        w /= w.sum()
        lam = float(v @ m.T @ v / (v @ v))
        if np.abs(m.T @ w - lam * w).max() <= tol * max(lam, 1.0):
            v = w
            break
        v = w
    else:
        raise ArithmeticError("power iteration did not converge")
    lam = float(v @ m.T @ v / (v @ v))
    return lam, v / v.min()


def compute_filtration(f: GraphMap) -> Filtration:
    """Maximal invariant filtration of a graph self-map.

    Strata are the strongly connected components of the edge dependency
    digraph (E depends on every edge its image crosses), condensed and
    topologically ordered bottom-up.  Ties between independent components
    are broken by smallest edge id, so the result is deterministic.
    """
    g = f.graph
    edges = list(range(1, g.edge_count + 1))
    adj: dict[int, set[int]] = {e: set() for e in edges}
    for e in edges:
        for d in f.edge_image(e):
            if abs(d) != e:
                adj[e].add(abs(d))
    comps = _strongly_connected_components(adj)
    comp_of = {}
    for ci, comp in enumerate(comps):
        for e in comp:
            comp_of[e] = ci
    # Kahn ordering of the condensation; a component is ready once
    # everything its images cross is already placed.
    deps: list[set[int]] = [set() for _ in comps]
    for e in edges:
        for t in adj[e]:
            if comp_of[t] != comp_of[e]:
                deps[comp_of[e]].add(comp_of[t])
    placed: set[int] = set()
    order: list[int] = []
    remaining = set(range(len(comps)))
    while remaining:
        ready = [ci for ci in remaining if deps[ci] <= placed]
        if not ready:
            raise AssertionError("dependency cycle across components")
        ready.sort(key=lambda ci: comps[ci][0])
        ci = ready[0]
        order.append(ci)
        placed.add(ci)
        remaining.discard(ci)
    strata = []
    for r, ci in enumerate(order, start=1):
        comp = tuple(comps[ci])
        m = transition_matrix(f, comp)
        if not m.any():
            kind, lam, vec = "zero", None, None
        else:
            lam_f, v = pf_eigen(m)
            if _is_permutation_matrix(m):
                kind, lam, vec = "polynomial", 1.0, tuple(float(x) for x in v)
            else:
                kind, lam, vec = "exponential", lam_f, tuple(float(x) for x in v)
        strata.append(
            Stratum(index=r, edges=comp, matrix=tuple(map(tuple, m.tolist())),
                    kind=kind, pf_value=lam, pf_vector=vec)
        )
    filtration = Filtration(graph_map=f, strata=tuple(strata))
    for s in strata:
        below = filtration.edges_through(s.index)
        for e in s.edges:
            assert all(abs(d) in below for d in f.edge_image(e))
    return filtration


@dataclass(frozen=True)
class Metric:
    """Edge lengths making each exponential stratum expand by exactly its
    Perron-Frobenius factor; other edges get length 1."""

    lengths: dict[int, float]

    def edge_length(self, d: int) -> float:
        return self.lengths[abs(d)]

    def length(self, path) -> float:
        return float(sum(self.lengths[abs(d)] for d in path))

    def r_length(self, path, hr_edges) -> float:
        return float(
            sum(self.lengths[abs(d)] for d in path if abs(d) in hr_edges)
        )


def assign_metric(filtration: Filtration) -> Metric:
    lengths: dict[int, float] = {}
    for s in filtration.strata:
        if s.kind == "exponential":
            for e, v in zip(s.edges, s.pf_vector):
                lengths[e] = v
        else:
            for e in s.edges:
                lengths[e] = 1.0
    return Metric(lengths=lengths)


@dataclass
class RttReport:
    violations: list[dict] = field(default_factory=list)
    checked: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return not self.violations


def _subgraph_vertices(graph: Graph, edges) -> set[str]:
    out = set()
    for e in edges:
        out.add(graph.origin(e))
        out.add(graph.terminus(e))
    return out


def verify_rtt(
    f: GraphMap,
    filtration: Filtration | None = None,
    beta_len_bound: int = 12,
    legal_len_bound: int = 6,
) -> RttReport:
    """Check the three defining conditions of a relative train track map,
    for every exponential stratum.

    1. Images of stratum edges start and end with edges of the stratum.
    2. Connecting paths in the lower subgraph (nontrivial, endpoints on
       the stratum) have nontrivial tightened images.  Exhaustive up to
       beta_len_bound edges.
    3. Paths in G_r that cross the stratum only at legal turns keep that
       property after one application.  Exhaustive up to legal_len_bound.
    """
    if filtration is None:
        filtration = compute_filtration(f)
    g = f.graph
    report = RttReport()
    counts = {"strata": 0, "beta_paths": 0, "legal_paths": 0}
    illegal = f.illegal_turns
    for s in filtration.exponential_strata():
        counts["strata"] += 1
        r = s.index
        hr = frozenset(s.edges)
        lower = filtration.edges_below(r)
        for e in s.edges:
            img = f.edge_image(e)
            if abs(img[0]) not in hr or abs(img[-1]) not in hr:
                report.violations.append({
                    "condition": 1,
                    "stratum": r,
                    "edge": g.edge_name(e),
                    "detail": "image of %s leaves the stratum at %s" % (
                        g.edge_name(e),
                        g.edge_name(img[0]) if abs(img[0]) not in hr
                        else g.edge_name(img[-1]),
                    ),
                })
        if lower:
            anchors = _subgraph_vertices(g, lower) & _subgraph_vertices(g, hr)
            for beta in iter_tight_paths(
                g, beta_len_bound, allowed_edges=lower, start_vertices=anchors
            ):
                if g.terminus(beta[-1]) not in anchors:
                    continue
                counts["beta_paths"] += 1
                if not tighten(f.map_letters(beta)):
                    report.violations.append({
                        "condition": 2,
                        "stratum": r,
                        "path": g.spell_path(beta),
                        "detail": "connecting path has trivial image",
                    })
        gr = filtration.edges_through(r)

        def r_illegal_prefix(path, hr=hr):
            if len(path) < 2:
                return False
            t = make_turn(-path[-2], path[-1])
            return (
                (abs(t[0]) in hr or abs(t[1]) in hr) and t in illegal
            )

        for p in iter_tight_paths(
            g, legal_len_bound, allowed_edges=gr, prune=r_illegal_prefix
        ):
            if not any(abs(d) in hr for d in p):
                continue
            counts["legal_paths"] += 1
            image = tighten(f.map_letters(p))
            ok = True
            for a, b in zip(image, image[1:]):
                t = make_turn(-a, b)
                if (abs(t[0]) in hr or abs(t[1]) in hr) and t in illegal:
                    ok = False
                    break
            if not ok:
                report.violations.append({
                    "condition": 3,
                    "stratum": r,
                    "path": g.spell_path(p),
                    "detail": "image %s is not r-legal" % g.spell_path(image),
                })
    report.checked = counts
    return report


@dataclass
class ImprovedReport:
    violations: list[dict] = field(default_factory=list)
    checked: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return not self.violations


def _contractible_component_edges(graph: Graph, edges) -> set[int]:
    """Edges lying in tree components of the subgraph spanned by edges."""
    parent: dict[str, str] = {}

    def find(v):
        while parent.get(v, v) != v:
            parent[v] = parent.get(parent[v], parent[v])
            v = parent[v]
        return v

    comp_edges: dict[str, set[int]] = {}
    for v in _subgraph_vertices(graph, edges):
        parent[v] = v
    for e in edges:
        a, b = find(graph.origin(e)), find(graph.terminus(e))
        if a != b:
            parent[a] = b
    for e in edges:
        comp_edges.setdefault(find(graph.origin(e)), set()).add(e)
    comp_verts: dict[str, set[str]] = {}
    for v in list(parent):
        comp_verts.setdefault(find(v), set()).add(v)
    out: set[int] = set()
    for root, es in comp_edges.items():
        if len(es) == len(comp_verts[root]) - 1:
            out |= es
    return out


def verify_improved(
    f: GraphMap,
    filtration: Filtration | None = None,
    nielsen_len_bound: int = 6,
    nielsen_period_bound: int = 4,
) -> ImprovedReport:
    """Check structural properties enjoyed by improved representatives:
    fixed (not just periodic) Nielsen classes, zero strata exactly the
    contractible lower debris, zero strata capped by exponential ones,
    polynomial strata of the form E -> E u, and at most one indivisible
    Nielsen path per exponential stratum.
    """
    from .nielsen import find_nielsen_paths

    if filtration is None:
        filtration = compute_filtration(f)
    g = f.graph
    report = ImprovedReport()
    records = find_nielsen_paths(
        f,
        filtration=filtration,
        len_bound=nielsen_len_bound,
        period_bound=nielsen_period_bound,
    )
    for rec in records:
        if rec.period != 1:
            report.violations.append({
                "property": 1,
                "detail": "Nielsen path %s has period %d"
                % (g.spell_path(rec.path), rec.period),
            })
    for s in filtration.strata:
        r = s.index
        if s.kind == "zero":
            gr = filtration.edges_through(r)
            contractible = _contractible_component_edges(g, gr)
            if contractible != set(s.edges):
                report.violations.append({
                    "property": 2,
                    "stratum": r,
                    "detail": "zero stratum %s != contractible part %s" % (
                        sorted(g.edge_name(e) for e in s.edges),
                        sorted(g.edge_name(e) for e in contractible),
                    ),
                })
            nxt = next(
                (t for t in filtration.strata if t.index == r + 1), None
            )
            if nxt is None or nxt.kind != "exponential":
                report.violations.append({
                    "property": 3,
                    "stratum": r,
                    "detail": "zero stratum not followed by an exponential one",
                })
        elif s.kind == "polynomial":
            lower = filtration.edges_below(r)
            ok = len(s.edges) == 1
            if ok:
                e = s.edges[0]
                img = f.edge_image(e)
                ok = img[0] == e and all(abs(d) in lower for d in img[1:])
            if not ok:
                report.violations.append({
                    "property": 4,
                    "stratum": r,
                    "detail": "stratum is not of the form E -> E u with "
                    "u below",
                })
    by_stratum: dict[int, int] = {}
    for rec in records:
        # INPs: indivisible with an illegal turn (fixed edges don't count)
        if not rec.indivisible or rec.illegal_count == 0:
            continue
        top = max(filtration.stratum_of(d) for d in rec.path)
        by_stratum[top] = by_stratum.get(top, 0) + 1
    for s in filtration.exponential_strata():
        n = by_stratum.get(s.index, 0)
        if n > 1:
            report.violations.append({
                "property": 5,
                "stratum": s.index,
                "detail": "%d indivisible Nielsen paths meet the stratum" % n,
            })
    report.checked = {
        "nielsen_records": len(records),
        "strata": len(filtration.strata),
    }
    return report
