"""Gradient codes built from designs, plus the FRC and uncoded baselines."""
from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.sparse.csgraph import connected_components

from .designs import Design, Resolution, is_affine_resolvable, verify_resolution
from .errors import Indivisible, InvalidResolution, UnverifiedDesign


class CodeKind(str, enum.Enum):
    SYMMETRIC = "symmetric"
    DUAL = "dual"
    RESOLVABLE = "resolvable"
    FRC = "frc"
    UNCODED = "uncoded"
    CUSTOM = "custom"


@dataclass(frozen=True, eq=False)
class GradientCode:
    """Encoding matrix ``E`` (K x N): column j lists worker j's gradients.

    ``lam`` is the common column inner product of symmetric/dual codes,
    ``mu`` the cross-group inner product of affine resolvable codes, and
    ``groups`` the worker partition T_1..T_R (resolvable) or the FRC
    groups.
    """

    E: np.ndarray
    kind: CodeKind = CodeKind.CUSTOM
    lam: int | None = None
    mu: int | None = None
    groups: tuple[tuple[int, ...], ...] | None = None

    def __post_init__(self):
        E = np.array(self.E)
        if E.ndim != 2:
            raise ValueError("encoding matrix must be two-dimensional")
        E.setflags(write=False)
        object.__setattr__(self, "E", E)
        object.__setattr__(self, "kind", CodeKind(self.kind))

    @property
    def K(self) -> int:
        return self.E.shape[0]

    @property
    def N(self) -> int:
        return self.E.shape[1]

    @property
    def L(self) -> int:
        return int((self.E != 0).sum(axis=0).max())

    @property
    def R(self) -> int:
        return int((self.E != 0).sum(axis=1).min())

    @property
    def is_integer(self) -> bool:
        return np.issubdtype(self.E.dtype, np.integer) or bool(
            np.all(np.asarray(self.E, dtype=float) == np.round(np.asarray(self.E, dtype=float)))
        )

    def summary(self) -> str:
        return f"N={self.N} K={self.K} L={self.L} R={self.R} kind={self.kind.value}"

    def to_dict(self) -> dict:
        out = {
            "N": self.N,
            "K": self.K,
            "L": self.L,
            "R": self.R,
            "kind": self.kind.value,
            "E": ["".join(str(int(x)) for x in row) for row in self.E],
        }
        if self.lam is not None:
            out["lambda"] = self.lam
        if self.mu is not None:
            out["mu"] = self.mu
        if self.groups is not None:
            out["groups"] = [list(g) for g in self.groups]
        return out

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_dict(cls, data: dict) -> "GradientCode":
        E = np.array([[int(c) for c in row] for row in data["E"]], dtype=np.int64)
        groups = data.get("groups")
        return cls(
            E=E,
            kind=CodeKind(data["kind"]),
            lam=data.get("lambda"),
            mu=data.get("mu"),
            groups=tuple(tuple(g) for g in groups) if groups is not None else None,
        )


def code_from_design(
    design: Design,
    resolution: Resolution | None = None,
    dual: bool = False,
    kind: CodeKind | str | None = None,
) -> GradientCode:
    """Use the incidence matrix (or its transpose when ``dual``) as E.

    The kind is inferred: dual when ``dual`` is set, resolvable when a
    resolution is given, symmetric when v == b, custom otherwise. Passing
    ``kind='custom'`` demotes any design-based code so that only the
    generic least-squares decoder accepts it.
    """
    params = design.params
    if params is None:
        raise UnverifiedDesign("design has not passed verify_bibd")
    if kind is not None and CodeKind(kind) is not CodeKind.CUSTOM:
        raise ValueError("only an override to 'custom' is supported")
    M = design.incidence
    if dual:
        if resolution is not None:
            raise ValueError("a resolution cannot be combined with dual semantics")
        code = GradientCode(E=M.T.copy(), kind=CodeKind.DUAL, lam=params.lam)
    elif resolution is not None:
        verify_resolution(design, resolution)
        if not is_affine_resolvable(params):
            raise InvalidResolution(
                f"r={params.r} != k + lambda={params.k + params.lam}: not affine resolvable"
            )
        mu = Fraction(params.k**2, params.v)
        if mu.denominator != 1:
            raise InvalidResolution(f"k^2/v = {mu} is not an integer")
        code = GradientCode(
            E=M, kind=CodeKind.RESOLVABLE, mu=int(mu), groups=resolution.classes
        )
    elif params.symmetric:
        code = GradientCode(E=M, kind=CodeKind.SYMMETRIC, lam=params.lam)
    else:
        code = GradientCode(E=M, kind=CodeKind.CUSTOM)
    if kind is not None:
        code = GradientCode(E=code.E, kind=CodeKind.CUSTOM)
    return code


def frc_code(N: int, L: int) -> GradientCode:
    """Fractional repetition code with K = N and N/L groups of L workers."""
    if L < 1 or N % L:
        raise Indivisible(f"L={L} does not divide N={N}")
    idx = np.arange(N)
    E = (idx[:, None] // L == idx[None, :] // L).astype(np.int64)
    groups = tuple(tuple(range(g * L, (g + 1) * L)) for g in range(N // L))
    return GradientCode(E=E, kind=CodeKind.FRC, groups=groups)


def uncoded_code(N: int) -> GradientCode:
    if N < 1:
        raise ValueError("N must be positive")
    return GradientCode(E=np.eye(N, dtype=np.int64), kind=CodeKind.UNCODED)


def custom_code(E) -> GradientCode:
    return GradientCode(E=np.asarray(E), kind=CodeKind.CUSTOM)


@dataclass(frozen=True, eq=False)
class PlacementGraph:
    """Bipartite worker/gradient graph of a code.

    Vertices ``0..N-1`` are workers and ``N..N+K-1`` gradients.
    """

    n_workers: int
    n_gradients: int
    edges: tuple[tuple[int, int], ...]  # (worker j, gradient i)
    kind: CodeKind = CodeKind.CUSTOM

    @property
    def n_vertices(self) -> int:
        return self.n_workers + self.n_gradients

    @property
    def adjacency(self) -> np.ndarray:
        n = self.n_vertices
        A = np.zeros((n, n), dtype=np.int64)
        for j, i in self.edges:
            A[j, self.n_workers + i] = A[self.n_workers + i, j] = 1
        return A

    @property
    def degrees(self) -> tuple[np.ndarray, np.ndarray]:
        A = self.adjacency
        deg = A.sum(axis=1)
        return deg[: self.n_workers], deg[self.n_workers :]

    @property
    def biregularity(self) -> tuple[int, int] | None:
        """``(L, R)`` when all workers have degree L and all gradients degree R."""
        wdeg, gdeg = self.degrees
        if len(set(wdeg.tolist())) == 1 and len(set(gdeg.tolist())) == 1:
            return int(wdeg[0]), int(gdeg[0])
        return None

    @property
    def n_components(self) -> int:
        n, _ = connected_components(self.adjacency, directed=False)
        return int(n)

    @property
    def connected(self) -> bool:
        return self.n_components == 1


def placement_graph(code: GradientCode) -> PlacementGraph:
    rows, cols = np.nonzero(code.E)
    edges = tuple(sorted((int(j), int(i)) for i, j in zip(rows, cols)))
    return PlacementGraph(code.N, code.K, edges, code.kind)
