"""Straggler selection (random, greedy, exhaustive) and adversarial thresholds."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import _kernels
from .decoder import StragglerScenario, max_subsets
from .errors import EtaTooLarge, NotInClassC, TooLarge
from .gradcode import CodeKind, GradientCode, PlacementGraph, placement_graph

_MASK64 = (1 << 64) - 1
MAX_EXPANSION_VERTICES = 20
SPECTRAL_TOL = 1e-9


class SplitMix64:
    """SplitMix64 generator; the output stream is fixed by the seed alone."""

    def __init__(self, seed: int):
        self.state = seed & _MASK64

    def next(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & _MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def below(self, n: int) -> int:
        """Uniform integer in [0, n) by rejection sampling."""
        limit = ((1 << 64) // n) * n
        while True:
            x = self.next()
            if x < limit:
                return x % n


def random_stragglers(N: int, S: int, seed: int) -> StragglerScenario:
    """Uniform S-subset of workers via a partial Fisher-Yates shuffle."""
    if not 0 <= S < N:
        raise ValueError(f"S must lie in [0, {N})")
    rng = SplitMix64(seed)
    perm = list(range(N))
    for i in range(S):
        j = i + rng.below(N - i)
        perm[i], perm[j] = perm[j], perm[i]
    return StragglerScenario(N, tuple(perm[:S]))


def _covers(code: GradientCode) -> list[frozenset[int]]:
    return [frozenset(np.flatnonzero(code.E[i]).tolist()) for i in range(code.K)]


def wiped_gradients(code: GradientCode, stragglers) -> frozenset[int]:
    """Gradients none of whose workers survive."""
    dead = set(stragglers)
    return frozenset(i for i, cov in enumerate(_covers(code)) if cov <= dead)


def greedy_adversary(code: GradientCode, S: int) -> tuple[StragglerScenario, frozenset[int]]:
    """Budgeted cheapest-cover-first straggler selection.

    Repeatedly take the unwiped gradient with the fewest surviving workers
    (lowest index on ties) and straggle all of them while the budget
    allows. Leftover budget goes to the lowest-indexed surviving workers,
    which can only increase the error.
    """
    if not 0 <= S < code.N:
        raise ValueError(f"S must lie in [0, {code.N})")
    covers = _covers(code)
    dead: set[int] = set()
    budget = S
    while True:
        best = None
        for i, cov in enumerate(covers):
            cost = len(cov - dead)
            if cost == 0:
                continue
            if best is None or cost < best[0]:
                best = (cost, i)
        if best is None or best[0] > budget:
            break
        dead |= covers[best[1]]
        budget -= best[0]
    for j in range(code.N):
        if budget == 0:
            break
        if j not in dead:
            dead.add(j)
            budget -= 1
    return StragglerScenario(code.N, tuple(dead)), wiped_gradients(code, dead)


@dataclass(frozen=True)
class SpectralSummary:
    eigenvalues: tuple[float, ...]  # descending
    n_edges: int
    biregularity: tuple[int, int] | None
    n_components: int
    hoholdt_bound: float | None

    @property
    def lambda1(self) -> float:
        return self.eigenvalues[0]

    @property
    def lambda2(self) -> float:
        return self.eigenvalues[1]

    @property
    def connected(self) -> bool:
        return self.n_components == 1

    @property
    def meets_hoholdt(self) -> bool:
        return self.hoholdt_bound is not None and abs(self.lambda2 - self.hoholdt_bound) <= SPECTRAL_TOL


def hoholdt_bound(n_edges: int, L: int, R: int) -> float | None:
    """Lower bound ``sqrt((|E| - L R) / (|E|/L - 1))`` on lambda_2 of an
    (L, R)-biregular graph; None when undefined."""
    denom = n_edges / L - 1
    if denom <= 0:
        return None
    return math.sqrt(max(0.0, (n_edges - L * R) / denom))


def spectral_summary(graph: PlacementGraph) -> SpectralSummary:
    """Full adjacency spectrum of the placement graph.

    For symmetric-design codes the second eigenvalue must meet the
    Hoholdt bound with equality; a mismatch raises ``RuntimeError``.
    """
    A = graph.adjacency.astype(float)
    eig = np.linalg.eigvalsh(A)[::-1]
    bireg = graph.biregularity
    bound = hoholdt_bound(len(graph.edges), *bireg) if bireg else None
    summary = SpectralSummary(
        eigenvalues=tuple(float(x) for x in eig),
        n_edges=len(graph.edges),
        biregularity=bireg,
        n_components=graph.n_components,
        hoholdt_bound=bound,
    )
    if graph.kind is CodeKind.SYMMETRIC and not summary.meets_hoholdt:
        raise RuntimeError(
            f"symmetric-design graph has lambda2={summary.lambda2} != Hoholdt bound {bound}"
        )
    return summary


def in_class_c(code: GradientCode, graph: PlacementGraph | None = None) -> bool:
    """N == K and the placement graph is regular and connected."""
    graph = graph or placement_graph(code)
    bireg = graph.biregularity
    return code.N == code.K and bireg is not None and bireg[0] == bireg[1] and graph.connected


def threshold_lower_bound(code: GradientCode, eta: int, summary: SpectralSummary | None = None) -> float:
    """Spectral lower bound ``(3L - lambda2)/(L + lambda2) * eta`` on S*(eta)."""
    graph = placement_graph(code)
    if not in_class_c(code, graph):
        raise NotInClassC("needs N == K and a regular, connected placement graph")
    if eta > code.N / 4:
        raise EtaTooLarge(f"eta={eta} exceeds N/4 = {code.N / 4}")
    summary = summary or spectral_summary(graph)
    L, lam2 = code.L, summary.lambda2
    return (3 * L - lam2) / (L + lam2) * eta


@dataclass(frozen=True)
class ThresholdReport:
    eta: int
    S_star: int
    witness_T: tuple[int, ...]
    witness_neighbors: tuple[int, ...]
    lambda2: float
    hoholdt_bound: float | None
    S_star_lb: float | None
    lb_note: str | None = None

    def to_dict(self) -> dict:
        def g(x):
            return None if x is None else float(f"{x:.12g}")

        return {
            "eta": self.eta,
            "S_star": self.S_star,
            "S_star_lb": g(self.S_star_lb),
            "lambda2": g(self.lambda2),
            "hoholdt_bound": g(self.hoholdt_bound),
            "witness_T": list(self.witness_T),
            "witness_neighbors": list(self.witness_neighbors),
            "lb_note": self.lb_note,
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def adversarial_threshold(code: GradientCode, eta: int) -> ThresholdReport:
    """Exact S*(eta): fewest workers whose removal uncovers eta gradients."""
    if not 1 <= eta < code.K:
        raise ValueError(f"eta must lie in [1, {code.K})")
    count = math.comb(code.K, eta)
    if count > max_subsets():
        raise TooLarge(f"C({code.K},{eta}) = {count} exceeds the subset cap {max_subsets()}")
    masks = _kernels.pack_rows(code.E != 0)
    s_star, T = _kernels.min_neighborhood(masks, eta)
    neighbors = tuple(sorted(set().union(*(np.flatnonzero(code.E[i]).tolist() for i in T))))
    graph = placement_graph(code)
    summary = spectral_summary(graph)
    lb, note = None, None
    try:
        lb = threshold_lower_bound(code, eta, summary)
    except (NotInClassC, EtaTooLarge) as exc:
        note = f"{type(exc).__name__}: {exc}"
    return ThresholdReport(
        eta=eta,
        S_star=s_star,
        witness_T=T,
        witness_neighbors=neighbors,
        lambda2=summary.lambda2,
        hoholdt_bound=summary.hoholdt_bound,
        S_star_lb=lb,
        lb_note=note,
    )


def alon_bounds(degree: int, lambda2: float) -> tuple[float, float]:
    """``((d - lambda2)/2, sqrt(2 d (d - lambda2)))`` for a connected d-regular graph."""
    gap = degree - lambda2
    return gap / 2, math.sqrt(2 * degree * gap)


def expansion_constant(graph: PlacementGraph) -> Fraction:
    """Exact isoperimetric constant by enumerating vertex subsets.

    For connected regular graphs the result is checked against the
    spectral sandwich of :func:`alon_bounds`.
    """
    n = graph.n_vertices
    if n > MAX_EXPANSION_VERTICES:
        raise TooLarge(f"{n} vertices exceeds the exhaustive limit {MAX_EXPANSION_VERTICES}")
    if n < 2:
        raise ValueError("need at least two vertices")
    eu = np.array([j for j, _ in graph.edges], dtype=np.int64)
    ev = np.array([graph.n_workers + i for _, i in graph.edges], dtype=np.int64)
    num, den, _ = _kernels.min_expansion(eu, ev, n)
    h = Fraction(num, den)
    bireg = graph.biregularity
    if bireg and bireg[0] == bireg[1] and graph.connected:
        lo, hi = alon_bounds(bireg[0], spectral_summary(graph).lambda2)
        if not lo - SPECTRAL_TOL <= h <= hi + SPECTRAL_TOL:
            raise RuntimeError(f"h={h} outside the spectral sandwich [{lo}, {hi}]")
    return h


def graph_from_edges(n_left: int, n_right: int, edges) -> PlacementGraph:
    """Bipartite graph helper for tests and ad-hoc analysis."""
    return PlacementGraph(n_left, n_right, tuple(sorted(edges)))
