"""Marked metric graphs, tight self-maps, and train-track analysis.

Oriented edges are nonzero integers with reversal = negation, so edge
paths reuse the word machinery.  The expansion factor is the dominant
eigenvalue of the edge-crossing matrix; the eigenmetric (edge lengths
from the positive eigenvector) is carried both as certified floats and as
exact elements of Q(lambda), which makes leg-length equalities and
cancellation bounds exact statements rather than float comparisons.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .algebraic import FieldElement, NumberField, dominant_root_field
from .words import Automorphism, Word, invert

Path = tuple[int, ...]


class GraphMapError(ValueError):
    pass


class MarkedMetricGraph:
    """Finite graph with oriented edges 1..m and reversal by negation."""

    __slots__ = ("vertices", "edge_count", "_iv", "_tv")

    def __init__(
        self,
        vertices: Sequence[str],
        init_vertex: Sequence[int],
        term_vertex: Sequence[int],
    ):
        self.vertices = tuple(vertices)
        if len(init_vertex) != len(term_vertex):
            raise GraphMapError("edge endpoint tables must have equal length")
        self.edge_count = len(init_vertex)
        self._iv = tuple(init_vertex)
        self._tv = tuple(term_vertex)
        if self.edge_count == 0:
            raise GraphMapError("graph needs at least one edge")

    @classmethod
    def rose(cls, k: int) -> "MarkedMetricGraph":
        return cls(("*",), (0,) * k, (0,) * k)

    def iv(self, e: int) -> int:
        return self._iv[e - 1] if e > 0 else self._tv[-e - 1]

    def tv(self, e: int) -> int:
        return self.iv(-e)

    def germs(self) -> list[int]:
        return [s * e for e in range(1, self.edge_count + 1) for s in (1, -1)]

    def germs_at(self, v: int) -> list[int]:
        return [g for g in self.germs() if self.iv(g) == v]

    def is_rose(self) -> bool:
        return len(self.vertices) == 1


def tighten_path(graph: MarkedMetricGraph, path: Iterable[int]) -> Path:
    """Remove backtracking; rejects non-composable edge sequences."""
    out: list[int] = []
    for e in path:
        if abs(e) < 1 or abs(e) > graph.edge_count:
            raise GraphMapError(f"edge {e} not in graph")
        if out:
            if graph.tv(out[-1]) != graph.iv(e):
                raise GraphMapError("edge sequence is not composable")
            if out[-1] == -e:
                out.pop()
                continue
        out.append(e)
    return tuple(out)


class GraphSelfMap:
    """Cellular self-map, linear on edges, with tight nonempty edge images."""

    def __init__(
        self,
        graph: MarkedMetricGraph,
        vertex_image: Sequence[int],
        edge_images: Sequence[Sequence[int]],
    ):
        self.graph = graph
        self.vertex_image = tuple(vertex_image)
        self.edge_images: tuple[Path, ...] = tuple(
            tuple(p) for p in edge_images
        )
        if len(self.edge_images) != graph.edge_count:
            raise GraphMapError("need one image path per edge")
        for e, p in enumerate(self.edge_images, start=1):
            if not p:
                raise GraphMapError(f"edge {e} maps to a point")
            if tighten_path(graph, p) != p:
                raise GraphMapError(f"image of edge {e} is not tight")
            if graph.iv(p[0]) != self.vertex_image[graph.iv(e)]:
                raise GraphMapError(f"image of edge {e} starts at wrong vertex")
            if graph.tv(p[-1]) != self.vertex_image[graph.tv(e)]:
                raise GraphMapError(f"image of edge {e} ends at wrong vertex")
        self._cache: dict[str, object] = {}

    @classmethod
    def rose_map(cls, aut: Automorphism) -> "GraphSelfMap":
        """The obvious self-map of the k-rose realizing the automorphism."""
        return cls(MarkedMetricGraph.rose(aut.rank), (0,), aut.images)

    def image_of_edge(self, e: int) -> Path:
        return self.edge_images[e - 1] if e > 0 else invert(self.edge_images[-e - 1])

    def image_of_path(self, path: Sequence[int]) -> Path:
        out: list[int] = []
        for e in path:
            out.extend(self.image_of_edge(e))
        return tighten_path(self.graph, out)

    def direction(self, germ: int) -> int:
        return self.image_of_edge(germ)[0]

    def power(self, n: int) -> "GraphSelfMap":
        if n < 1:
            raise GraphMapError("power requires n >= 1")
        out = self
        for _ in range(n - 1):
            vi = tuple(self.vertex_image[v] for v in out.vertex_image)
            ei = tuple(self.image_of_path(p) for p in out.edge_images)
            out = GraphSelfMap(self.graph, vi, ei)
        return out

    def __repr__(self) -> str:
        return f"GraphSelfMap(edges={self.edge_images})"


# -- transition matrix and eigenmetric ----------------------------------------


@dataclass
class TransitionData:
    matrix: list[list[int]]
    lam: float
    lam_bounds: tuple[float, float]
    pf_lengths: list[float]
    is_irreducible: bool
    converged: bool
    field: NumberField
    lam_exact: FieldElement
    lengths_exact: tuple[FieldElement, ...]


def _occurrence_matrix(sigma: GraphSelfMap) -> list[list[int]]:
    m = sigma.graph.edge_count
    M = [[0] * m for _ in range(m)]
    for i in range(m):
        for e in sigma.edge_images[i]:
            M[i][abs(e) - 1] += 1
    return M


def _strongly_connected(M: Sequence[Sequence[int]]) -> bool:
    n = len(M)
    adj = [[j for j in range(n) if M[i][j] > 0] for i in range(n)]
    radj = [[j for j in range(n) if M[j][i] > 0] for i in range(n)]
    for graph in (adj, radj):
        seen = {0}
        stack = [0]
        while stack:
            for j in graph[stack.pop()]:
                if j not in seen:
                    seen.add(j)
                    stack.append(j)
        if len(seen) != n:
            return False
    return True


def _exact_eigendata(
    M: Sequence[Sequence[int]], lam_float: float
) -> tuple[NumberField, FieldElement, tuple[FieldElement, ...]]:
    fld = dominant_root_field(M, lam_float)
    lam = fld.generator
    n = len(M)
    rows = [
        [fld.rational(M[i][j]) - (lam if i == j else fld.zero()) for j in range(n)]
        for i in range(n)
    ]
    # row reduce to find a kernel vector
    pivots: list[tuple[int, int]] = []
    r = 0
    for c in range(n):
        pr = next((i for i in range(r, n) if not rows[i][c].is_zero()), None)
        if pr is None:
            continue
        rows[r], rows[pr] = rows[pr], rows[r]
        inv = rows[r][c].inverse()
        rows[r] = [x * inv for x in rows[r]]
        for i in range(n):
            if i != r and not rows[i][c].is_zero():
                f = rows[i][c]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
        pivots.append((r, c))
        r += 1
        if r == n:
            break
    pivot_cols = {c for _, c in pivots}
    free = [c for c in range(n) if c not in pivot_cols]
    if not free:
        raise GraphMapError("transition matrix has no eigenvector for lambda")
    uniform = [fld.rational(Fraction(1, n))] * n
    if all(
        sum((fld.rational(M[i][j]) * uniform[j] for j in range(n)), fld.zero())
        == lam * uniform[i]
        for i in range(n)
    ):
        return fld, lam, tuple(uniform)
    vec = [fld.zero()] * n
    vec[free[-1]] = fld.one()
    for rr, c in reversed(pivots):
        s = fld.zero()
        for j in range(c + 1, n):
            if not rows[rr][j].is_zero():
                s = s + rows[rr][j] * vec[j]
        vec[c] = -s
    total = fld.zero()
    for x in vec:
        total = total + x
    if total.is_zero():
        raise GraphMapError("degenerate eigenvector normalization")
    vec = [x / total for x in vec]
    return fld, lam, tuple(vec)


def transition(sigma: GraphSelfMap, tol: float = 1e-12) -> TransitionData:
    """Edge-crossing counts, expansion factor, and the eigenmetric.

    The float eigenvalue comes from power iteration on M + I with
    Collatz-Wielandt enclosures (all-ones seed, deterministic); the exact
    eigenvalue and lengths live in its number field.  Reducible matrices
    are flagged; the dominant value is still reported.
    """
    if "transition" in sigma._cache:
        return sigma._cache["transition"]  # type: ignore[return-value]
    M = _occurrence_matrix(sigma)
    n = len(M)
    A = np.array(M, dtype=float) + np.eye(n)
    v = np.ones(n) / n
    lo = hi = float("nan")
    converged = False
    for _ in range(200000):
        w = A @ v
        ratios = w / v
        lo, hi = float(ratios.min()), float(ratios.max())
        v = w / w.sum()
        if hi - lo <= tol * hi:
            converged = True
            break
    irreducible = _strongly_connected(M)
    if converged:
        lam_float = (lo + hi) / 2 - 1.0
    else:
        lam_float = float(max(np.real(np.linalg.eigvals(np.array(M, dtype=float)))))
    fld, lam_exact, lengths_exact = _exact_eigendata(M, lam_float)
    # exact defining property of the eigenmetric
    for i in range(n):
        s = fld.zero()
        for j in range(n):
            if M[i][j]:
                s = s + fld.rational(M[i][j]) * lengths_exact[j]
        if s != lam_exact * lengths_exact[i]:
            raise GraphMapError("eigenmetric verification failed")
    data = TransitionData(
        matrix=M,
        lam=lam_exact.to_float(),
        lam_bounds=(lo - 1.0, hi - 1.0),
        pf_lengths=[x.to_float() for x in lengths_exact],
        is_irreducible=irreducible,
        converged=converged,
        field=fld,
        lam_exact=lam_exact,
        lengths_exact=lengths_exact,
    )
    sigma._cache["transition"] = data
    return data


def edge_length(sigma: GraphSelfMap, e: int) -> FieldElement:
    return transition(sigma).lengths_exact[abs(e) - 1]


def path_length(sigma: GraphSelfMap, path: Sequence[int]) -> FieldElement:
    data = transition(sigma)
    out = data.field.zero()
    for e in path:
        out = out + data.lengths_exact[abs(e) - 1]
    return out


# -- gates -----------------------------------------------------------------


@dataclass
class GateStructure:
    gates: dict[int, int]  # germ -> gate id
    illegal_turns: list[tuple[int, int]]

    def is_legal(self, x: int, y: int) -> bool:
        return self.gates[x] != self.gates[y]


def gates(sigma: GraphSelfMap) -> GateStructure:
    """Germs identified when some common iterate of the direction map agrees.

    The partition of germs into fibers of D^m stabilizes after at most
    #germs steps; turns inside one class are the illegal turns.
    """
    if "gates" in sigma._cache:
        return sigma._cache["gates"]  # type: ignore[return-value]
    germs = sigma.graph.germs()
    n = len(germs)
    image = {g: sigma.direction(g) for g in germs}
    eventual = dict(image)
    for _ in range(n - 1):
        eventual = {g: image[eventual[g]] for g in germs}
    classes: dict[tuple[int, int], list[int]] = {}
    for g in germs:
        classes.setdefault((sigma.graph.iv(g), eventual[g]), []).append(g)
    gate_of: dict[int, int] = {}
    for gate_id, members in enumerate(sorted(classes.values())):
        for g in members:
            gate_of[g] = gate_id
    illegal = [
        (x, y)
        for i, x in enumerate(germs)
        for y in germs[i + 1 :]
        if sigma.graph.iv(x) == sigma.graph.iv(y) and gate_of[x] == gate_of[y]
    ]
    structure = GateStructure(gate_of, illegal)
    sigma._cache["gates"] = structure
    return structure


def turns_crossed(graph: MarkedMetricGraph, path: Sequence[int]) -> list[tuple[int, int]]:
    return [(-path[i], path[i + 1]) for i in range(len(path) - 1)]


def is_train_track(sigma: GraphSelfMap) -> tuple[bool, tuple[int, tuple[int, int]] | None]:
    """True iff every turn crossed by every edge image is legal."""
    structure = gates(sigma)
    for e in range(1, sigma.graph.edge_count + 1):
        for turn in turns_crossed(sigma.graph, sigma.edge_images[e - 1]):
            if not structure.is_legal(*turn):
                return False, (e, turn)
    return True, None


def legal_continuations(sigma: GraphSelfMap, e: int) -> list[int]:
    """Edges z at tv(e) such that the path e.z is legal."""
    structure = gates(sigma)
    return [
        z
        for z in sigma.graph.germs_at(sigma.graph.tv(e))
        if structure.is_legal(-e, z)
    ]


# -- bounded cancellation ----------------------------------------------------


def bcc(sigma: GraphSelfMap, metric: TransitionData | None = None) -> FieldElement:
    """Optimal bounded cancellation constant in the eigenmetric, exact.

    Tightening the image of a legal concatenation alpha.beta cancels the
    common prefix of the images of the two legal rays leaving the turn.
    The supremum over ray extensions is the longest-path value of a finite
    agreement machine whose states are position pairs inside edge images;
    a cycle would mean unbounded cancellation and is reported as an error.

    ``metric`` lets an iterate be measured in the base map's eigenmetric
    (the iterate's own transition data would present the same lengths in a
    different number field).
    """
    cache_key = "bcc" if metric is None else None
    if cache_key and cache_key in sigma._cache:
        return sigma._cache[cache_key]  # type: ignore[return-value]
    ok, witness = is_train_track(sigma)
    if not ok:
        raise GraphMapError(f"bcc requires a train-track map, witness {witness}")
    data = metric if metric is not None else transition(sigma)
    fld = data.field
    images = {g: sigma.image_of_edge(g) for g in sigma.graph.germs()}
    lengths = {g: data.lengths_exact[abs(g) - 1] for g in sigma.graph.germs()}
    conts = {g: legal_continuations(sigma, g) for g in sigma.graph.germs()}

    memo: dict[tuple[int, int, int, int], FieldElement] = {}
    on_stack: set[tuple[int, int, int, int]] = set()

    def agree(a: int, i: int, b: int, j: int) -> FieldElement:
        key = (a, i, b, j)
        if key in memo:
            return memo[key]
        if key in on_stack:
            raise GraphMapError("unbounded cancellation: agreement machine has a cycle")
        on_stack.add(key)
        try:
            pa, pb = images[a], images[b]
            if i == len(pa) and j == len(pb):
                best = fld.zero()
                for z in conts[a]:
                    for w in conts[b]:
                        val = agree(z, 0, w, 0)
                        if val > best:
                            best = val
            elif i == len(pa):
                best = fld.zero()
                for z in conts[a]:
                    val = agree(z, 0, b, j)
                    if val > best:
                        best = val
            elif j == len(pb):
                best = fld.zero()
                for w in conts[b]:
                    val = agree(a, i, w, 0)
                    if val > best:
                        best = val
            elif pa[i] != pb[j]:
                best = fld.zero()
            else:
                best = lengths[pa[i]] + agree(a, i + 1, b, j + 1)
        finally:
            on_stack.discard(key)
        memo[key] = best
        return best

    best = fld.zero()
    germs = sigma.graph.germs()
    for i, x in enumerate(germs):
        for y in germs[i + 1 :]:
            if sigma.graph.iv(x) != sigma.graph.iv(y):
                continue
            val = agree(x, 0, y, 0)
            if val > best:
                best = val
    if cache_key:
        sigma._cache[cache_key] = best
    return best


def critical_constant(sigma: GraphSelfMap) -> FieldElement:
    data = transition(sigma)
    if data.lam_exact == 1:
        raise GraphMapError("critical constant undefined at expansion factor 1")
    return (bcc(sigma) * 2) / (data.lam_exact - 1)


# -- legality ratios ----------------------------------------------------------


def _illegal_turn_count(sigma: GraphSelfMap, path: Sequence[int]) -> int:
    structure = gates(sigma)
    return sum(
        1 for turn in turns_crossed(sigma.graph, path) if not structure.is_legal(*turn)
    )


def leg1(sigma: GraphSelfMap, path: Sequence[int]) -> float:
    """(length - 2 B I / lambda) / length; may be negative."""
    if not path:
        raise GraphMapError("legality of the empty path is undefined")
    if tighten_path(sigma.graph, path) != tuple(path):
        raise GraphMapError("legality ratios are defined for tight paths")
    data = transition(sigma)
    length = path_length(sigma, path).to_float()
    I = _illegal_turn_count(sigma, path)
    B = bcc(sigma).to_float()
    return (length - 2.0 * B * I / data.lam) / length

def leg2(sigma: GraphSelfMap, path: Sequence[int], C: float) -> float:
    """Fraction of length carried by legal segments of length >= C."""
    if not path:
        raise GraphMapError("legality of the empty path is undefined")
    structure = gates(sigma)
    data = transition(sigma)
    segments: list[float] = []
    cur = data.pf_lengths[abs(path[0]) - 1]
    for i in range(len(path) - 1):
        step = data.pf_lengths[abs(path[i + 1]) - 1]
        if structure.is_legal(-path[i], path[i + 1]):
            cur += step
        else:
            segments.append(cur)
            cur = step
    segments.append(cur)
    total = sum(segments)
    return sum(s for s in segments if s >= C) / total


# -- indivisible Nielsen paths -------------------------------------------------


@dataclass(frozen=True)
class Leg:
    """Legal path from the turn vertex, ending inside (or at the far end of)
    its final edge at an exact offset along that edge's direction."""

    edges: Path  # full edges before the final one
    last: int
    last_off: FieldElement  # 0 < last_off <= length(last)

    def sig(self) -> tuple:
        return (self.edges, self.last, self.last_off.coeffs)


@dataclass
class NielsenPath:
    period: int
    turn: tuple[int, int]
    legs: tuple[Leg, Leg]
    leg_length: FieldElement
    orbit_size: int

    def as_dict(self, rank_names=None) -> dict:
        return {
            "period": self.period,
            "turn": list(self.turn),
            "leg_edges": [
                list(self.legs[0].edges) + [self.legs[0].last],
                list(self.legs[1].edges) + [self.legs[1].last],
            ],
            "final_offsets": [
                self.legs[0].last_off.to_float(),
                self.legs[1].last_off.to_float(),
            ],
            "leg_length": self.leg_length.to_float(),
            "orbit_size": self.orbit_size,
        }


@dataclass
class InpSearchResult:
    orbits: list[NielsenPath]
    certified: bool
    period_bound: int
    length_bound: float
    required_bounds: dict[int, float]  # per period: certified completeness bound


def _leg_length(sigma: GraphSelfMap, leg: Leg) -> FieldElement:
    return path_length(sigma, leg.edges) + leg.last_off


def _image_of_leg(sigma_p: GraphSelfMap, base: GraphSelfMap, leg: Leg, lam_p: FieldElement) -> Leg:
    """Image of a leg under sigma_p, exact; images of legal legs are tight."""
    data = transition(base)
    full: list[int] = []
    for e in leg.edges:
        full.extend(sigma_p.image_of_edge(e))
    target = lam_p * leg.last_off
    pos = data.field.zero()
    image = sigma_p.image_of_edge(leg.last)
    for idx, e in enumerate(image):
        step = data.lengths_exact[abs(e) - 1]
        nxt = pos + step
        if target < nxt or target == nxt:
            if target == pos:
                raise GraphMapError("leg image endpoint landed on a vertex")
            return Leg(tuple(full) + image[:idx], e, target - pos)
        pos = nxt
    raise GraphMapError("image offset escaped its edge image")


def _vertex_marks(
    sigma: GraphSelfMap, leg: Leg, bound: FieldElement
) -> dict[FieldElement, int]:
    """Distance-from-endpoint of each vertex on the leg, with the germ
    leaving that vertex toward the endpoint."""
    data = transition(sigma)
    marks: dict[FieldElement, int] = {}
    L = leg.last_off
    if L <= bound:
        marks[L] = leg.last
    for e in reversed(leg.edges):
        L = L + data.lengths_exact[abs(e) - 1]
        if L <= bound:
            marks[L] = e
    return marks


def _leg_suffix(leg: Leg, germ: int, L: FieldElement, sigma: GraphSelfMap) -> Leg:
    """The terminal segment of the leg starting at the vertex mark (L, germ)."""
    if germ == leg.last:
        return Leg((), leg.last, leg.last_off)
    idx = None
    data = transition(sigma)
    acc = leg.last_off
    for i in range(len(leg.edges) - 1, -1, -1):
        acc = acc + data.lengths_exact[abs(leg.edges[i]) - 1]
        if acc == L:
            idx = i
            break
    if idx is None or leg.edges[idx] != germ:
        raise GraphMapError("inconsistent vertex mark")
    return Leg(leg.edges[idx:], leg.last, leg.last_off)


def _strip_terminal(image: Leg, leg: Leg) -> Path | None:
    """Full-edge prefix Z with image = Z . leg, or None."""
    if image.last != leg.last or image.last_off != leg.last_off:
        return None
    n = len(leg.edges)
    if n and image.edges[-n:] != leg.edges:
        return None
    return image.edges[: len(image.edges) - n]


@dataclass(frozen=True)
class _Anchor:
    """A periodic point usable as a leg endpoint, with an approach side."""

    kind: str  # "interior" or "vertex"
    edge: int  # containing edge (interior) or 0
    offset: tuple  # exact offset coeffs along the positive edge, or ()
    approach: int  # arriving germ data: final leg edge


def _interior_fixed_points(
    sigma_p: GraphSelfMap, base: GraphSelfMap, lam_p: FieldElement
) -> list[tuple[int, FieldElement]]:
    """Points inside edges fixed by sigma_p with preserved local directions.

    One candidate per forward crossing of an edge by its own image; the
    affine fixed point of that crossing is kept when strictly interior.
    """
    data = transition(base)
    fld = data.field
    out = []
    for e in range(1, base.graph.edge_count + 1):
        ell = data.lengths_exact[e - 1]
        pos = fld.zero()
        for crossed in sigma_p.image_of_edge(e):
            step = data.lengths_exact[abs(crossed) - 1]
            if crossed == e:
                s = pos / (lam_p - 1)
                if fld.zero() < s < ell:
                    out.append((e, s))
            pos = pos + step
    return out


def find_inps(
    sigma: GraphSelfMap,
    period_bound: int | None = None,
    length_bound: float | None = None,
) -> InpSearchResult:
    """All orbits of indivisible periodic Nielsen paths within the budget.

    Legs of a period-p path end at fixed points of the p-th iterate and are
    terminal segments of the backward-expanding legal rays anchored there;
    candidates are vertex positions at equal depth on two such rays joined
    by an illegal turn, and every candidate is certified by the exact
    fixed-path equation before being reported.  The search is complete once
    the length budget passes BCC(sigma^p)/(lambda^p - 1) for every period,
    so "none" below that bound is a certificate, not a timeout.
    """
    ok, witness = is_train_track(sigma)
    if not ok:
        raise GraphMapError(f"Nielsen search requires a train-track map: {witness}")
    data = transition(sigma)
    fld = data.field
    if data.lam_exact <= 1:
        raise GraphMapError("Nielsen search requires expansion factor > 1")
    if period_bound is None:
        period_bound = sigma.graph.edge_count
    structure = gates(sigma)

    default_bound = (critical_constant(sigma) * 2).to_float()
    certified = True
    required: dict[int, float] = {}
    found: dict[tuple, tuple[int, tuple[Leg, Leg], FieldElement]] = {}

    for p in range(1, period_bound + 1):
        sigma_p = sigma.power(p)
        if any(
            sigma_p.vertex_image[v] != v for v in range(len(sigma.graph.vertices))
        ):
            continue
        lam_p = data.lam_exact**p
        need = (bcc(sigma_p, metric=data) / (lam_p - 1)).to_float()
        required[p] = need
        bound_f = length_bound if length_bound is not None else max(default_bound, need)
        if bound_f < need:
            certified = False
        bound = _field_upper(fld, bound_f)

        rays: list[tuple[_Anchor, Leg]] = []
        for e, s in _interior_fixed_points(sigma_p, sigma, lam_p):
            ell = data.lengths_exact[e - 1]
            rays.append(
                (_Anchor("interior", e, s.coeffs, e), Leg((), e, s))
            )
            rays.append(
                (_Anchor("interior", e, s.coeffs, -e), Leg((), -e, ell - s))
            )
        dp_fixed = _fixed_germs(sigma_p)
        for g in dp_fixed:
            ell = data.lengths_exact[abs(g) - 1]
            rays.append((_Anchor("vertex", 0, (), -g), Leg((), -g, ell)))

        grown: list[tuple[_Anchor, Leg, dict[FieldElement, int]]] = []
        for anchor, leg in rays:
            while not (_leg_length(sigma, leg) > bound):
                leg = _image_of_leg(sigma_p, sigma, leg, lam_p)
            grown.append((anchor, leg, _vertex_marks(sigma, leg, bound)))

        for i in range(len(grown)):
            for j in range(i + 1, len(grown)):
                a1, leg1_, marks1 = grown[i]
                a2, leg2_, marks2 = grown[j]
                for L in set(marks1) & set(marks2):
                    x, y = marks1[L], marks2[L]
                    if x == y or sigma.graph.iv(x) != sigma.graph.iv(y):
                        continue
                    if structure.is_legal(x, y):
                        continue
                    P = _leg_suffix(leg1_, x, L, sigma)
                    Q = _leg_suffix(leg2_, y, L, sigma)
                    ZP = _strip_terminal(
                        _image_of_leg(sigma_p, sigma, P, lam_p), P
                    )
                    ZQ = _strip_terminal(
                        _image_of_leg(sigma_p, sigma, Q, lam_p), Q
                    )
                    if ZP is None or ZQ is None or ZP != ZQ:
                        continue
                    key = _candidate_key(P, Q)
                    if key not in found:
                        found[key] = (p, _ordered_legs(P, Q), L)

    orbits = _group_orbits(sigma, found)
    return InpSearchResult(
        orbits=orbits,
        certified=certified,
        period_bound=period_bound,
        length_bound=length_bound if length_bound is not None else default_bound,
        required_bounds=required,
    )


def _field_upper(fld: NumberField, x: float) -> FieldElement:
    return fld.rational(Fraction(x).limit_denominator(10**9) + Fraction(1, 10**6))


def _fixed_germs(sigma_p: GraphSelfMap) -> list[int]:
    return [g for g in sigma_p.graph.germs() if sigma_p.direction(g) == g]


def _ordered_legs(P: Leg, Q: Leg) -> tuple[Leg, Leg]:
    return (P, Q) if P.sig() <= Q.sig() else (Q, P)


def _candidate_key(P: Leg, Q: Leg) -> tuple:
    a, b = _ordered_legs(P, Q)
    return (a.sig(), b.sig())


def _step_candidate(
    sigma: GraphSelfMap, legs: tuple[Leg, Leg], lam: FieldElement
) -> tuple[Leg, Leg]:
    """One application of the base map to a certified Nielsen candidate."""
    imP = _image_of_leg(sigma, sigma, legs[0], lam)
    imQ = _image_of_leg(sigma, sigma, legs[1], lam)
    # cancel the common full-edge prefix; divergence is at a vertex
    i = 0
    while (
        i < len(imP.edges) and i < len(imQ.edges) and imP.edges[i] == imQ.edges[i]
    ):
        i += 1
    P = Leg(imP.edges[i:], imP.last, imP.last_off)
    Q = Leg(imQ.edges[i:], imQ.last, imQ.last_off)
    gP = P.edges[0] if P.edges else P.last
    gQ = Q.edges[0] if Q.edges else Q.last
    if gP == gQ:
        raise GraphMapError("Nielsen orbit step did not stop at a vertex turn")
    return _ordered_legs(P, Q)


def _group_orbits(
    sigma: GraphSelfMap,
    found: dict[tuple, tuple[int, tuple[Leg, Leg], FieldElement]],
) -> list[NielsenPath]:
    lam = transition(sigma).lam_exact
    remaining = dict(found)
    orbits: list[NielsenPath] = []
    while remaining:
        key = min(remaining)
        p, legs, L = remaining.pop(key)
        orbit_keys = {key}
        cur = legs
        for _ in range(p):
            cur = _step_candidate(sigma, cur, lam)
            k = (cur[0].sig(), cur[1].sig())
            orbit_keys.add(k)
            remaining.pop(k, None)
        if (cur[0].sig(), cur[1].sig()) != key:
            raise GraphMapError("Nielsen orbit failed to close up at its period")
        turn = (legs[0].edges[0] if legs[0].edges else legs[0].last,
                legs[1].edges[0] if legs[1].edges else legs[1].last)
        orbits.append(
            NielsenPath(
                period=p,
                turn=turn,
                legs=legs,
                leg_length=L,
                orbit_size=len(orbit_keys),
            )
        )
    return orbits


def classify_stable_tree(
    sigma: GraphSelfMap,
    period_bound: int | None = None,
    length_bound: float | None = None,
) -> tuple[str, InpSearchResult]:
    """geometric / nongeometric / inconclusive, from the Nielsen search.

    Full irreducibility is the caller's assertion; the necessary conditions
    checked here are irreducibility of the transition matrix of the map and
    of its square.
    """
    data = transition(sigma)
    if data.lam_exact == 1:
        raise GraphMapError("classification needs an expanding map")
    result = find_inps(sigma, period_bound, length_bound)
    if result.orbits:
        return "geometric", result
    if result.certified:
        return "nongeometric", result
    return "inconclusive", result


def irreducibility_warnings(sigma: GraphSelfMap) -> list[str]:
    out = []
    if not transition(sigma).is_irreducible:
        out.append("transition matrix is reducible")
    if not _strongly_connected(_occurrence_matrix(sigma.power(2))):
        out.append("transition matrix of the square is reducible")
    return out
