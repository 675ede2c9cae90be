"""Length and illegal-turn statistics, cancellation constants, and
executable validators for the growth estimates.

Conventions.  For a tight path p: L(p) is its metric length, i(p) the
number of illegal turns it contains, and script_L(p) the length of its
longest maximal legal segment.  The r-variants count only turns that
involve an edge of the exponential stratum H_r and measure only the
H_r part of the length.  Circuits use cyclic turns and segments.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .graphs import Circuit, GraphMap, iter_tight_paths, preimage_circuit, turns_of_circuit, turns_of_path
from .nielsen import is_pre_nielsen, split_basic_paths, verify_splitting
from .strata import Filtration, Metric, assign_metric, compute_filtration
from .words import letter_key

__all__ = [
    "PathStats",
    "CancellationData",
    "TrichotomyVerdict",
    "ValidatorReport",
    "DecompositionReport",
    "path_stats",
    "bcc_estimate",
    "validate_bw1",
    "validate_bw2",
    "validate_illen",
    "validate_illen2",
    "trichotomy_classify",
    "validate_backgrowth",
    "validate_bgrowth2",
    "growth_decomposition",
]

_SLACK = 1e-9


@dataclass(frozen=True)
class PathStats:
    L: float
    i: int
    script_L: float
    L_r: float | None = None
    i_r: int | None = None
    script_L_r: float | None = None


def _segments(edges, cut_flags, circuit):
    """Split a tuple of edges at flagged junctions.  cut_flags[j] refers
    to the junction after edge j (for circuits the last flag is the wrap
    junction).  A circuit with no cuts comes back as one cyclic piece."""
    edges = tuple(edges)
    n = len(edges)
    if not any(cut_flags):
        return [edges]
    if circuit:
        last_cut = max(j for j, c in enumerate(cut_flags) if c)
        shift = (last_cut + 1) % n
        edges = edges[shift:] + edges[:shift]
        flags = [cut_flags[(j + shift) % n] for j in range(n)]
        pieces = []
        prev = 0
        for j, c in enumerate(flags):
            if c:
                pieces.append(edges[prev : j + 1])
                prev = j + 1
        return pieces
    pieces = []
    prev = 0
    for j, c in enumerate(cut_flags):
        if c:
            pieces.append(edges[prev : j + 1])
            prev = j + 1
    pieces.append(edges[prev:])
    return [p for p in pieces if p]


def path_stats(
    p,
    filtration: Filtration,
    metric: Metric,
    r: int | None = None,
    circuit: bool = False,
) -> PathStats:
    """Exact turn counts and metric lengths of a tight path or circuit."""
    edges = tuple(p.edges) if isinstance(p, Circuit) else tuple(p)
    if not edges:
        raise ValueError("constant paths have no defined statistics")
    f = filtration.graph_map
    illegal = f.illegal_turns
    turns = turns_of_circuit(edges) if circuit else turns_of_path(edges)
    ill_flags = [t in illegal for t in turns]
    L = metric.length(edges)
    i = sum(ill_flags)
    script_L = (
        L
        if i == 0
        else max(metric.length(s) for s in _segments(edges, ill_flags, circuit))
    )
    out = {"L": L, "i": i, "script_L": script_L}
    if r is not None:
        gr = filtration.edges_through(r)
        if any(abs(d) not in gr for d in edges):
            raise ValueError(f"path is not contained in G_{r}")
        hr = frozenset(
            next(s for s in filtration.strata if s.index == r).edges
        )
        r_flags = [
            flag and (abs(t[0]) in hr or abs(t[1]) in hr)
            for flag, t in zip(ill_flags, turns)
        ]
        L_r = metric.r_length(edges, hr)
        i_r = sum(r_flags)
        script_L_r = (
            L_r
            if i_r == 0
            else max(
                metric.r_length(s, hr)
                for s in _segments(edges, r_flags, circuit)
            )
        )
        out.update(L_r=L_r, i_r=i_r, script_L_r=script_L_r)
    return PathStats(**out)


@dataclass(frozen=True)
class CancellationData:
    C_f: float
    window: int
    stable: bool
    critical: dict[int, float]

    def critical_length(self, r: int | None = None) -> float:
        if not self.critical:
            raise ValueError("no exponential stratum, no critical length")
        if r is None:
            if len(self.critical) != 1:
                raise ValueError("stratum index required")
            return next(iter(self.critical.values()))
        return self.critical[r]


def _iter_path_images(f: GraphMap, window: int):
    """All tight paths with at most window edges, as triples
    (first direction, last direction, tightened image)."""
    g = f.graph
    dirs = sorted(g.directions(), key=letter_key)
    by_vertex: dict[str, list[int]] = {}
    for d in dirs:
        by_vertex.setdefault(g.origin(d), []).append(d)
    img = {d: tuple(f.edge_image(d)) for d in dirs}
    stack = [((d,), img[d]) for d in reversed(dirs)]
    while stack:
        path, u = stack.pop()
        yield path[0], path[-1], u
        if len(path) < window:
            for d in by_vertex.get(g.terminus(path[-1]), ()):
                if d == -path[-1]:
                    continue
                w = img[d]
                i, j = len(u), 0
                while i > 0 and j < len(w) and u[i - 1] == -w[j]:
                    i -= 1
                    j += 1
                stack.append((path + (d,), u[:i] + w[j:]))


def _max_cancellation(f: GraphMap, metric: Metric, window: int) -> float:
    """Exact maximum of L([f a]) + L([f b]) - L([f(ab)]) over tight
    concatenations a.b with |a|, |b| <= window.

    Tightening u.w removes exactly twice the longest common prefix of
    the reduced words u^-1 and w, so the maximum is twice the heaviest
    common prefix between the set of inverted images of paths (grouped
    by last direction) and the set of images (grouped by first
    direction), over group pairs that meet tightly at a vertex.  In a
    lexicographic sort the heaviest cross-group prefix occurs between
    neighbors, so one sorted scan with per-group last-seen words covers
    every pair without the quadratic join.
    """
    g = f.graph
    dirs = sorted(g.directions(), key=letter_key)
    ndir = len(dirs)
    nkeys = 2 * g.edge_count
    len_by_key = [0.0] * nkeys
    for d in dirs:
        len_by_key[letter_key(d)] = metric.edge_length(d)
    max_edge = max(len_by_key)
    tag_a = {d: i for i, d in enumerate(dirs)}
    tag_b = {d: i + ndir for i, d in enumerate(dirs)}
    partners: list[tuple[int, ...]] = [()] * (2 * ndir)
    for d in dirs:
        mates = [
            tag_b[d2]
            for d2 in dirs
            if g.origin(d2) == g.terminus(d) and d2 != -d
        ]
        partners[tag_a[d]] = tuple(mates)
        for m in mates:
            partners[m] = partners[m] + (tag_a[d],)
    seen: list[set[bytes]] = [set() for _ in range(2 * ndir)]
    for first, last, u in _iter_path_images(f, window):
        if not u:
            continue
        word = bytes(letter_key(x) for x in u)
        seen[tag_b[first]].add(word)
        # letter_key(-x) == letter_key(x) ^ 1, so the inverse word is a
        # reversed bit-flip of the encoding
        seen[tag_a[last]].add(bytes(b ^ 1 for b in reversed(word)))
    entries = [(w, t) for t, bucket in enumerate(seen) for w in bucket]
    entries.sort()
    best = 0.0
    latest: list[bytes | None] = [None] * (2 * ndir)
    for w, t in entries:
        for p in partners[t]:
            v = latest[p]
            if v is None:
                continue
            n = min(len(w), len(v))
            k = 0
            while k < n and w[k] == v[k]:
                k += 1
            if k and 2.0 * k * max_edge > best:
                c = 2.0 * sum(len_by_key[b] for b in w[:k])
                if c > best:
                    best = c
        latest[t] = w
    return best


def bcc_estimate(
    f: GraphMap,
    pair_len_bound: int = 8,
    filtration: Filtration | None = None,
    metric: Metric | None = None,
) -> CancellationData:
    """Bounded cancellation constant by exhaustive windowed search.

    C_f bounds L([f(a)]) + L([f(b)]) - L([f(ab)]) over tight
    concatenations.  The cancelled segment only depends on a bounded
    terminal piece of a and initial piece of b, so the window W grows
    until the maximum stops changing and is short of the guaranteed
    surviving image length lambda_min (W-1) l_min; failing that within
    pair_len_bound, the result is flagged as a lower bound.
    """
    if pair_len_bound < 1:
        raise ValueError("pair_len_bound must be >= 1")
    if filtration is None:
        filtration = compute_filtration(f)
    if metric is None:
        metric = assign_metric(filtration)
    exp = filtration.exponential_strata()
    lam_min = min((s.pf_value for s in exp), default=1.0)
    l_min = min(metric.lengths.values())
    cur = _max_cancellation(f, metric, 1)
    window = 1
    stable = False
    while window < pair_len_bound:
        window += 1
        nxt = _max_cancellation(f, metric, window)
        if nxt == cur and nxt < lam_min * (window - 1) * l_min:
            stable = True
            break
        cur = nxt
    critical = {
        s.index: 2.0 * cur / (s.pf_value - 1.0) for s in exp
    }
    return CancellationData(C_f=cur, window=window, stable=stable, critical=critical)


@dataclass
class ValidatorReport:
    rows: list[dict] = field(default_factory=list)
    constants: dict = field(default_factory=dict)

    @property
    def all_pass(self) -> bool:
        return all(row["pass"] for row in self.rows)


def _require_absolute(filtration: Filtration) -> float:
    if len(filtration.strata) != 1 or filtration.strata[0].kind != "exponential":
        raise ValueError(
            "this validator needs an absolute train track map "
            "(a single exponential stratum)"
        )
    return filtration.strata[0].pf_value


def validate_bw1(
    f: GraphMap,
    f_inv: GraphMap,
    circuits,
    k_max: int = 5,
    filtration: Filtration | None = None,
    metric: Metric | None = None,
    cancellation: CancellationData | None = None,
) -> ValidatorReport:
    """Backward control of the longest legal segment: for every circuit
    and k <= k_max, script_L of the k-fold preimage stays below
    script_L / lambda^k + L_c, and below script_L + L_c (weaker form).
    """
    if filtration is None:
        filtration = compute_filtration(f)
    lam = _require_absolute(filtration)
    if metric is None:
        metric = assign_metric(filtration)
    if cancellation is None:
        cancellation = bcc_estimate(f, filtration=filtration, metric=metric)
    lc = cancellation.critical_length()
    r = filtration.strata[0].index
    report = ValidatorReport(
        constants={"lambda": lam, "C_f": cancellation.C_f, "L_c": lc}
    )
    g = f.graph
    for c in circuits:
        c = c if isinstance(c, Circuit) else Circuit(g, c)
        base = path_stats(c, filtration, metric, r=r, circuit=True)
        for k in range(1, k_max + 1):
            pre = preimage_circuit(f, f_inv, c, k)
            st = path_stats(pre, filtration, metric, r=r, circuit=True)
            bound = base.script_L / lam ** k + lc
            margin = bound - st.script_L
            weak_ok = st.script_L < base.script_L + lc + _SLACK * max(1.0, lc)
            report.rows.append({
                "circuit": g.spell_path(c.edges),
                "k": k,
                "L": st.L,
                "Lr": st.L_r,
                "i": st.i,
                "ir": st.i_r,
                "scriptL": st.script_L,
                "bound": bound,
                "margin": margin,
                "pass": bool(
                    margin > -_SLACK * max(1.0, abs(bound)) and weak_ok
                ),
            })
    return report


def validate_bw2(
    f: GraphMap,
    f_inv: GraphMap,
    circuits,
    k_max: int,
    r: int,
    filtration: Filtration | None = None,
    metric: Metric | None = None,
    cancellation: CancellationData | None = None,
) -> ValidatorReport:
    """Relative form of the backward segment bound, for circuits in G_r:
    script_L_r of the preimage stays below script_L_r + L_c_r."""
    if filtration is None:
        filtration = compute_filtration(f)
    if metric is None:
        metric = assign_metric(filtration)
    if cancellation is None:
        cancellation = bcc_estimate(f, filtration=filtration, metric=metric)
    lc = cancellation.critical_length(r)
    report = ValidatorReport(constants={"L_c_r": lc, "r": r})
    g = f.graph
    for c in circuits:
        c = c if isinstance(c, Circuit) else Circuit(g, c)
        base = path_stats(c, filtration, metric, r=r, circuit=True)
        for k in range(1, k_max + 1):
            pre = preimage_circuit(f, f_inv, c, k)
            st = path_stats(pre, filtration, metric, r=r, circuit=True)
            bound = base.script_L_r + lc
            margin = bound - st.script_L_r
            report.rows.append({
                "circuit": g.spell_path(c.edges),
                "k": k,
                "L": st.L,
                "Lr": st.L_r,
                "i": st.i,
                "ir": st.i_r,
                "scriptL": st.script_L_r,
                "bound": bound,
                "margin": margin,
                "pass": bool(margin > -_SLACK * max(1.0, abs(bound))),
            })
    return report


def validate_illen(
    sample,
    L: float,
    filtration: Filtration,
    metric: Metric | None = None,
    circuit: bool = False,
) -> float:
    """Least constant C with i/C <= metric length <= C i over the sample
    paths (filtered to 1 <= script_L <= L and i > 0)."""
    if metric is None:
        metric = assign_metric(filtration)
    best = None
    for p in sample:
        st = path_stats(p, filtration, metric, circuit=circuit)
        if st.i == 0 or not (1.0 - _SLACK <= st.script_L <= L + _SLACK):
            continue
        c = max(st.L / st.i, st.i / st.L)
        best = c if best is None else max(best, c)
    if best is None:
        raise ValueError("no sample path meets the preconditions")
    return best


def validate_illen2(
    sample,
    L: float,
    r: int,
    filtration: Filtration,
    metric: Metric | None = None,
    circuit: bool = False,
) -> float:
    """Relative variant of validate_illen, using r-quantities."""
    if metric is None:
        metric = assign_metric(filtration)
    best = None
    for p in sample:
        st = path_stats(p, filtration, metric, r=r, circuit=circuit)
        if st.i_r == 0 or not (1.0 - _SLACK <= st.script_L_r <= L + _SLACK):
            continue
        c = max(st.L_r / st.i_r, st.i_r / st.L_r)
        best = c if best is None else max(best, c)
    if best is None:
        raise ValueError("no sample path meets the preconditions")
    return best


@dataclass(frozen=True)
class TrichotomyVerdict:
    case: str
    witness: dict


def _splittable_into_pre_nielsen(
    f,
    filtration,
    edges,
    r: int | None,
    piece_cap: int,
    pre_steps: int,
) -> list[tuple[int, ...]] | None:
    """Try to split a path into pre-Nielsen pieces with one (r-)illegal
    turn each; in the relative case lower segments may sit in between.
    Returns the pieces, or None."""
    illegal = f.illegal_turns
    if r is not None:
        hr = frozenset(next(s for s in filtration.strata if s.index == r).edges)
        lower = filtration.edges_below(r)
    n = len(edges)

    def piece_ok(piece):
        if r is not None and all(abs(d) in lower for d in piece):
            return True
        turns = turns_of_path(piece)
        flags = [t in illegal for t in turns]
        if r is not None:
            flags = [
                fl and (abs(t[0]) in hr or abs(t[1]) in hr)
                for fl, t in zip(flags, turns)
            ]
        if sum(flags) != 1:
            return False
        verdict, _, _ = is_pre_nielsen(f, piece, max_steps=pre_steps)
        return verdict in ("nielsen", "pre-nielsen")

    parts: list[list[tuple[int, ...]] | None] = [None] * (n + 1)
    parts[n] = []
    for pos in range(n - 1, -1, -1):
        for nxt in range(pos + 1, min(pos + piece_cap, n) + 1):
            if parts[nxt] is None:
                continue
            piece = edges[pos:nxt]
            if piece_ok(piece):
                parts[pos] = [piece] + parts[nxt]
                break
    if parts[0] is None:
        return None
    ok, _ = verify_splitting(f, edges, parts[0], k_max=pre_steps)
    return parts[0] if ok else None


def trichotomy_classify(
    f: GraphMap,
    rho,
    M: int,
    L: float,
    r: int | None = None,
    filtration: Filtration | None = None,
    metric: Metric | None = None,
    piece_cap: int = 12,
    pre_steps: int = 8,
) -> TrichotomyVerdict:
    """Classify the behavior of a path under M iterations: a legal
    segment longer than L appears, or illegal turns drop, or the path
    itself decomposes around a core that splits into pre-Nielsen pieces
    (short, at most one illegal turn on each side trim).
    """
    if M < 1:
        raise ValueError("M must be >= 1")
    if filtration is None:
        filtration = compute_filtration(f)
    if metric is None:
        metric = assign_metric(filtration)
    rho = tuple(rho)
    base = path_stats(rho, filtration, metric, r=r)
    if r is not None and base.L_r < 1.0 - _SLACK:
        raise ValueError("relative classification needs L_r >= 1")
    image = f.iterate_letters(rho, M)
    img = path_stats(image, filtration, metric, r=r)
    seg = img.script_L if r is None else img.script_L_r
    if seg > L + _SLACK:
        return TrichotomyVerdict(
            case="long-legal-segment",
            witness={"segment_length": seg, "threshold": L, "M": M},
        )
    i_img = img.i if r is None else img.i_r
    i_base = base.i if r is None else base.i_r
    if i_img < i_base:
        return TrichotomyVerdict(
            case="fewer-illegal-turns",
            witness={"before": i_base, "after": i_img, "M": M},
        )
    n = len(rho)

    def trim_ok(piece):
        if not piece:
            return True
        st = path_stats(piece, filtration, metric, r=r)
        length = st.L if r is None else st.L_r
        turns = st.i if r is None else st.i_r
        return length <= 2 * L + _SLACK and turns <= 1

    for a in range(0, n):
        if not trim_ok(rho[:a]):
            break
        for b in range(n, a, -1):
            # suffixes only grow as b decreases, so the first failure ends it
            if not trim_ok(rho[b:]):
                break
            pieces = _splittable_into_pre_nielsen(
                f, filtration, rho[a:b], r, piece_cap, pre_steps
            )
            if pieces is not None:
                return TrichotomyVerdict(
                    case="pre-nielsen-splitting",
                    witness={
                        "tau1": rho[:a],
                        "tau2": rho[b:],
                        "pieces": pieces,
                    },
                )
    return TrichotomyVerdict(case="unresolved", witness={"M": M, "L": L})


def _qualifying_circuits(f, circuits, L0, i_min, r, filtration, metric):
    """Circuits meeting the preconditions: enough illegal turns, short
    legal segments."""
    g = f.graph
    keep = []
    for c in circuits:
        c = c if isinstance(c, Circuit) else Circuit(g, c)
        base = path_stats(c, filtration, metric, r=r, circuit=True)
        seg = base.script_L if r is None else base.script_L_r
        turns = base.i if r is None else base.i_r
        if turns >= i_min and seg <= L0 + _SLACK:
            keep.append((c, turns))
    return keep


def _backgrowth_rows(
    f, f_inv, qualified, M, n_max, ratio, r,
    filtration, metric,
):
    g = f.graph
    rows = []
    for c, turns in qualified:
        for n in range(1, n_max + 1):
            pre = preimage_circuit(f, f_inv, c, n * M)
            st = path_stats(pre, filtration, metric, r=r, circuit=True)
            val = st.i if r is None else st.i_r
            bound = ratio ** n * turns
            rows.append({
                "circuit": g.spell_path(c.edges),
                "k": n * M,
                "L": st.L,
                "Lr": st.L_r,
                "i": st.i,
                "ir": st.i_r,
                "scriptL": st.script_L if r is None else st.script_L_r,
                "bound": bound,
                "margin": val - bound,
                "pass": bool(val >= bound - _SLACK * max(1.0, bound)),
            })
    return rows


def _validate_backgrowth_common(
    f, f_inv, sample, L0, M, n_max, m_search_max, ratio, i_min, r,
    filtration, metric,
):
    if filtration is None:
        filtration = compute_filtration(f)
    if metric is None:
        metric = assign_metric(filtration)
    qualified = _qualifying_circuits(f, sample, L0, i_min, r, filtration, metric)
    if M is not None:
        rows = _backgrowth_rows(
            f, f_inv, qualified, M, n_max, ratio, r, filtration, metric
        )
        report = ValidatorReport(
            rows=rows,
            constants={"M": M, "ratio": ratio, "qualifying": len(qualified)},
        )
        report.constants["found"] = report.all_pass
        return report
    for m in range(1, m_search_max + 1):
        rows = _backgrowth_rows(
            f, f_inv, qualified, m, n_max, ratio, r, filtration, metric
        )
        if rows and all(row["pass"] for row in rows):
            return ValidatorReport(
                rows=rows,
                constants={"M": m, "ratio": ratio, "found": True,
                           "qualifying": len(qualified)},
            )
    return ValidatorReport(
        rows=[],
        constants={"M": None, "ratio": ratio, "found": False,
                   "qualifying": len(qualified), "searched": m_search_max},
    )


def validate_backgrowth(
    f: GraphMap,
    f_inv: GraphMap,
    sample,
    L0: float,
    M: int | None = None,
    n_max: int = 3,
    m_search_max: int = 12,
    filtration: Filtration | None = None,
    metric: Metric | None = None,
) -> ValidatorReport:
    """Backward growth of illegal turns: (8/7)^n i <= i of the nM-fold
    preimage, over sample circuits with script_L <= L0 and i >= 4.  When
    M is not supplied the least workable exponent <= m_search_max is
    searched for; absence is reported, not fatal."""
    return _validate_backgrowth_common(
        f, f_inv, sample, L0, M, n_max, m_search_max,
        ratio=8.0 / 7.0, i_min=4, r=None,
        filtration=filtration, metric=metric,
    )


def validate_bgrowth2(
    f: GraphMap,
    f_inv: GraphMap,
    sample,
    L0: float,
    r: int,
    M: int | None = None,
    n_max: int = 3,
    m_search_max: int = 12,
    filtration: Filtration | None = None,
    metric: Metric | None = None,
) -> ValidatorReport:
    """Relative backward growth: (10/9)^n i_r, over circuits in G_r with
    script_L_r <= L0 and i_r >= 5."""
    return _validate_backgrowth_common(
        f, f_inv, sample, L0, M, n_max, m_search_max,
        ratio=10.0 / 9.0, i_min=5, r=r,
        filtration=filtration, metric=metric,
    )


@dataclass(frozen=True)
class DecompositionReport:
    case: str
    pieces: list[tuple[int, ...]]
    fraction: float
    details: dict


def _longest_short_path(graph, metric: Metric, L0: float, budget: int = 2_000_000):
    """Length of the longest tight path of metric length strictly below
    L0 (endpoints at vertices).  Exhaustive; edge lengths are positive so
    pruning at L0 keeps the walk finite."""
    best = 0.0
    count = 0
    prune = lambda p: metric.length(p) >= L0 - _SLACK
    for p in iter_tight_paths(graph, max_len=10 ** 9, prune=prune):
        count += 1
        if count > budget:
            raise ArithmeticError("short-path enumeration budget exceeded")
        length = metric.length(p)
        if length > best:
            best = length
    return best


def growth_decomposition(
    sigma,
    L0: float,
    filtration: Filtration,
    metric: Metric | None = None,
) -> DecompositionReport:
    """Label a circuit with the case that governs its growth and return
    the witnessing collection of subpaths.

    Exponential top stratum: either the circuit is legal or long between
    illegal turns (case legal-or-sparse: keep maximal legal segments of
    length >= L0; their share is at least 1 - l/L0 where l is the
    longest vertex-to-vertex path shorter than L0), or it has at least 4
    illegal turns (case many-illegal-turns: strip legal runs longer than
    6 L0, keep leftover blocks with >= 4 illegal turns; share at least
    1/(6 L0)), or it is short (case short-circuit, length < 3 L0).  A
    polynomially growing top stratum is handled by basic-path splitting.
    """
    if metric is None:
        metric = assign_metric(filtration)
    f = filtration.graph_map
    g = f.graph
    c = sigma if isinstance(sigma, Circuit) else Circuit(g, sigma)
    edges = c.edges
    if not edges:
        raise ValueError("trivial circuit")
    top = max(filtration.stratum_of(d) for d in edges)
    stratum = next(s for s in filtration.strata if s.index == top)
    total = metric.length(edges)
    if stratum.kind == "polynomial":
        pieces = split_basic_paths(f, filtration, edges, top, circuit=True)
        return DecompositionReport(
            case="polynomial-top",
            pieces=pieces,
            fraction=1.0,
            details={"stratum": top},
        )
    st = path_stats(c, filtration, metric, circuit=True)
    if st.i == 0 or st.L / st.i >= L0 - _SLACK:
        if st.i == 0:
            return DecompositionReport(
                case="legal-or-sparse",
                pieces=[edges],
                fraction=1.0,
                details={"i": 0},
            )
        illegal = f.illegal_turns
        flags = [t in illegal for t in turns_of_circuit(edges)]
        segs = _segments(edges, flags, circuit=True)
        keep = [s for s in segs if metric.length(s) >= L0 - _SLACK]
        frac = sum(metric.length(s) for s in keep) / total
        short = _longest_short_path(g, metric, L0)
        lower = 1.0 - short / L0
        assert frac >= lower - _SLACK, (frac, lower)
        return DecompositionReport(
            case="legal-or-sparse",
            pieces=keep,
            fraction=frac,
            details={"lower_bound": lower, "l": short, "i": st.i},
        )
    if st.i >= 4:
        illegal = f.illegal_turns
        flags = [t in illegal for t in turns_of_circuit(edges)]
        segs = _segments(edges, flags, circuit=True)
        long_flags = [metric.length(s) > 6.0 * L0 + _SLACK for s in segs]
        if not any(long_flags):
            return DecompositionReport(
                case="many-illegal-turns",
                pieces=[edges],
                fraction=1.0,
                details={"i": st.i, "blocks": 1, "removed": 0},
            )
        m = len(segs)
        start = next(j for j, fl in enumerate(long_flags) if fl)
        order = [(start + j) % m for j in range(1, m + 1)]
        blocks: list[list[int]] = []
        cur: list[int] = []
        for j in order:
            if long_flags[j]:
                if cur:
                    blocks.append(cur)
                    cur = []
            else:
                cur.append(j)
        if cur:
            blocks.append(cur)
        pieces = []
        for blk in blocks:
            if len(blk) - 1 >= 4:
                pieces.append(tuple(d for j in blk for d in segs[j]))
        frac = sum(metric.length(p) for p in pieces) / total
        assert pieces, "no block with enough illegal turns survived"
        assert frac >= 1.0 / (6.0 * L0) - _SLACK, frac
        return DecompositionReport(
            case="many-illegal-turns",
            pieces=pieces,
            fraction=frac,
            details={
                "i": st.i,
                "blocks": len(blocks),
                "removed": sum(long_flags),
            },
        )
    assert st.L <= 3.0 * L0 + _SLACK
    return DecompositionReport(
        case="short-circuit",
        pieces=[edges],
        fraction=1.0,
        details={"i": st.i, "L": st.L},
    )
