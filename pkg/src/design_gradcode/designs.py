"""Block designs: finite geometries, Paley designs, duals, derived/residual.

Every constructor returns a design that has already passed
:func:`verify_bibd`; the only exception is :func:`dual`, whose output is
generally not a BIBD (it is annotated when it happens to be one).
"""
from __future__ import annotations

import json
from dataclasses import dataclass, replace
from itertools import product
from typing import Sequence

import numpy as np

from .errors import (
    IndexOutOfRange,
    InvalidDimension,
    InvalidResolution,
    NotBalanced,
    NotSymmetric,
    NotUniform,
    UnsupportedOrder,
)
from .galois import Field, factor_prime_power


@dataclass(frozen=True)
class BIBDParams:
    v: int
    b: int
    k: int
    r: int
    lam: int

    def as_tuple(self) -> tuple[int, int, int, int, int]:
        return (self.v, self.b, self.k, self.r, self.lam)

    @property
    def symmetric(self) -> bool:
        return self.v == self.b


@dataclass(frozen=True, eq=False)
class Design:
    """Points ``0..v-1`` and ``b`` blocks, each a sorted tuple of points."""

    v: int
    blocks: tuple[tuple[int, ...], ...]
    params: BIBDParams | None = None

    def __post_init__(self):
        blocks = tuple(tuple(sorted(int(x) for x in blk)) for blk in self.blocks)
        for j, blk in enumerate(blocks):
            if not blk:
                raise ValueError(f"block {j} is empty")
            if blk[0] < 0 or blk[-1] >= self.v:
                raise ValueError(f"block {j} has points outside [0, {self.v})")
            if len(set(blk)) != len(blk):
                raise ValueError(f"block {j} repeats a point")
        object.__setattr__(self, "blocks", blocks)

    @property
    def b(self) -> int:
        return len(self.blocks)

    @property
    def incidence(self) -> np.ndarray:
        """v x b 0/1 matrix, ``M[i, j] = 1`` iff point i lies in block j."""
        M = np.zeros((self.v, self.b), dtype=np.int64)
        for j, blk in enumerate(self.blocks):
            M[list(blk), j] = 1
        return M

    def __eq__(self, other) -> bool:
        return isinstance(other, Design) and self.v == other.v and self.blocks == other.blocks

    def __hash__(self) -> int:
        return hash((self.v, self.blocks))

    @classmethod
    def from_incidence(cls, M: np.ndarray) -> "Design":
        M = np.asarray(M)
        blocks = tuple(tuple(np.flatnonzero(M[:, j]).tolist()) for j in range(M.shape[1]))
        return cls(v=M.shape[0], blocks=blocks)

    def to_dict(self) -> dict:
        out = {"v": self.v, "b": self.b, "blocks": [list(b) for b in self.blocks]}
        if self.params is not None:
            p = self.params
            out["params"] = {"v": p.v, "b": p.b, "k": p.k, "r": p.r, "lambda": p.lam}
        return out

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_dict(cls, data: dict) -> "Design":
        design = cls(v=int(data["v"]), blocks=tuple(tuple(b) for b in data["blocks"]))
        if "params" in data and data["params"] is not None:
            design = annotate(design)
        return design


@dataclass(frozen=True)
class Resolution:
    """Partition of the block indices into parallel classes."""

    classes: tuple[tuple[int, ...], ...]

    def __len__(self) -> int:
        return len(self.classes)


def verify_bibd(design: Design) -> BIBDParams:
    """Check the BIBD axioms and return ``(v, b, k, r, lambda)``.

    Raises NotUniform when block sizes or replication numbers vary and
    NotBalanced (with a witness pair) when point pairs are covered an
    unequal number of times.
    """
    if design.v < 2:
        raise NotUniform("a BIBD needs at least two points")
    M = design.incidence
    sizes = M.sum(axis=0)
    if np.any(sizes != sizes[0]):
        raise NotUniform(f"block sizes vary: {sorted(set(sizes.tolist()))}")
    reps = M.sum(axis=1)
    if np.any(reps != reps[0]):
        bad = int(np.flatnonzero(reps != reps[0])[0])
        raise NotUniform(
            f"replication varies: point 0 in {reps[0]} blocks, point {bad} in {reps[bad]}"
        )
    pairs = M @ M.T
    lam = int(pairs[0, 1])
    off = ~np.eye(design.v, dtype=bool)
    bad = np.argwhere(off & (pairs != lam))
    if len(bad):
        i, j = (int(x) for x in bad[0])
        raise NotBalanced(
            f"pair ({i}, {j}) lies in {pairs[i, j]} blocks, expected {lam}", pair=(i, j)
        )
    v, b, k, r = design.v, design.b, int(sizes[0]), int(reps[0])
    if v * r != b * k or r * (k - 1) != lam * (v - 1):
        raise NotBalanced("parameter identities vr = bk, r(k-1) = lambda(v-1) fail")
    return BIBDParams(v, b, k, r, lam)


def annotate(design: Design) -> Design:
    """Copy of ``design`` carrying its verified parameters."""
    return replace(design, params=verify_bibd(design))


def _sorted_design(v: int, blocks: Sequence[Sequence[int]]) -> tuple[Design, list[int]]:
    """Sort blocks by content; also return new position of each input block."""
    keyed = sorted(range(len(blocks)), key=lambda j: tuple(sorted(blocks[j])))
    where = [0] * len(blocks)
    for pos, j in enumerate(keyed):
        where[j] = pos
    return Design(v=v, blocks=tuple(tuple(blocks[j]) for j in keyed)), where


def _check_dim(m: int) -> None:
    if m < 2:
        raise InvalidDimension(f"dimension m must be >= 2, got {m}")


def _normalized_vectors(q: int, n: int) -> np.ndarray:
    """All vectors of GF(q)^n whose first nonzero entry is 1, in lex order."""
    rows = []
    for vec in product(range(q), repeat=n):
        lead = next((a for a in vec if a), 0)
        if lead == 1:
            rows.append(vec)
    return np.array(rows, dtype=np.int64)


def projective_geometry(m: int, q: int) -> Design:
    """Points and hyperplanes of PG(m, q) as a symmetric BIBD."""
    _check_dim(m)
    field = Field(q)
    pts = _normalized_vectors(q, m + 1)
    dots = field.dot_matrix(pts, pts)  # functional j applied to point i
    blocks = [np.flatnonzero(dots[:, j] == 0).tolist() for j in range(len(pts))]
    design, _ = _sorted_design(len(pts), blocks)
    return annotate(design)


def affine_geometry(m: int, q: int) -> tuple[Design, Resolution]:
    """Points and hyperplanes (all cosets) of AG(m, q), with its resolution.

    Each parallel class holds the q translates of one hyperplane through
    the origin.
    """
    _check_dim(m)
    field = Field(q)
    pts = np.array(list(product(range(q), repeat=m)), dtype=np.int64)
    dirs = _normalized_vectors(q, m)
    dots = field.dot_matrix(pts, dirs)
    blocks, raw_classes = [], []
    for j in range(len(dirs)):
        cls = []
        for c in range(q):
            cls.append(len(blocks))
            blocks.append(np.flatnonzero(dots[:, j] == c).tolist())
        raw_classes.append(cls)
    design, where = _sorted_design(len(pts), blocks)
    classes = sorted(tuple(sorted(where[j] for j in cls)) for cls in raw_classes)
    design = annotate(design)
    resolution = Resolution(tuple(classes))
    verify_resolution(design, resolution)
    return design, resolution


def hadamard_design(m: int) -> Design:
    """Paley (4m-1, 4m-1, 2m-1, 2m-1, m-1) design: translates of the squares."""
    q = 4 * m - 1
    try:
        factor_prime_power(q)
    except Exception:
        raise UnsupportedOrder(f"4m-1 = {q} is not a prime power") from None
    if m < 1 or q % 4 != 3:
        raise UnsupportedOrder(f"4m-1 = {q} is not congruent to 3 mod 4")
    field = Field(q)
    qr = sorted(field.squares)
    blocks = [[field.add(x, a) for x in qr] for a in range(q)]
    design, _ = _sorted_design(q, blocks)
    return annotate(design)


def dual(design: Design) -> Design:
    """Design whose incidence matrix is the transpose of ``design``'s.

    Block ``i`` of the result is the set of blocks of ``design`` that
    contain point ``i``; no reordering is done, so ``dual(dual(D)) == D``.
    """
    out = Design.from_incidence(design.incidence.T)
    try:
        return annotate(out)
    except (NotUniform, NotBalanced):
        return out


def derive_or_residual(design: Design, block_index: int, mode: str) -> Design:
    """Derived (``mode='derived'``) or residual design of a symmetric BIBD."""
    params = design.params or verify_bibd(design)
    if not params.symmetric:
        raise NotSymmetric(f"design has v={params.v} != b={params.b}")
    if not 0 <= block_index < design.b:
        raise IndexOutOfRange(f"block index {block_index} not in [0, {design.b})")
    if mode not in ("derived", "residual"):
        raise ValueError(f"mode must be 'derived' or 'residual', got {mode!r}")
    base = set(design.blocks[block_index])
    keep = sorted(base) if mode == "derived" else sorted(set(range(design.v)) - base)
    relabel = {x: i for i, x in enumerate(keep)}
    blocks = []
    for j, blk in enumerate(design.blocks):
        if j == block_index:
            continue
        blocks.append([relabel[x] for x in blk if x in relabel])
    out, _ = _sorted_design(len(keep), blocks)
    return annotate(out)


def verify_resolution(design: Design, resolution: Resolution) -> None:
    """Raise InvalidResolution unless every class partitions the points and
    the classes partition the blocks."""
    seen = sorted(j for cls in resolution.classes for j in cls)
    if seen != list(range(design.b)):
        raise InvalidResolution("parallel classes do not partition the block set")
    for i, cls in enumerate(resolution.classes):
        pts = [x for j in cls for x in design.blocks[j]]
        if sorted(pts) != list(range(design.v)):
            raise InvalidResolution(f"class {i} is not a partition of the point set")


def is_affine_resolvable(params: BIBDParams) -> bool:
    return params.r == params.k + params.lam
