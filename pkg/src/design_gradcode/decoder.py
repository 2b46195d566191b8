"""Optimal decoding vectors and approximation errors.

``err`` is always the *squared* residual ``||E_F v - 1_K||^2``. The
generic :func:`oracle_decode` solves the least-squares problem directly;
the ``decode_*`` functions evaluate the closed forms for design-based
codes and refuse any other kind of code.
"""
from __future__ import annotations

import itertools
import json
import math
import os
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from . import _rational
from .errors import MethodUnavailable, SingularUpdate, TooLarge, WrongKind
from .gradcode import CodeKind, GradientCode

EXACT_MAX_N = 64
DEFAULT_MAX_SUBSETS = 10**7


def max_subsets() -> int:
    """Cap on exhaustive enumerations; ``DESIGN_GRADCODE_MAX_SUBSETS`` overrides."""
    return int(os.environ.get("DESIGN_GRADCODE_MAX_SUBSETS", DEFAULT_MAX_SUBSETS))


@dataclass(frozen=True)
class StragglerScenario:
    N: int
    stragglers: tuple[int, ...]

    def __post_init__(self):
        st = tuple(sorted(set(int(j) for j in self.stragglers)))
        if len(st) != len(self.stragglers):
            raise ValueError("straggler indices repeat")
        if st and (st[0] < 0 or st[-1] >= self.N):
            raise ValueError(f"straggler indices must lie in [0, {self.N})")
        if len(st) >= self.N:
            raise ValueError("at least one worker must survive (S < N)")
        object.__setattr__(self, "stragglers", st)

    @property
    def S(self) -> int:
        return len(self.stragglers)

    @property
    def F(self) -> tuple[int, ...]:
        dead = set(self.stragglers)
        return tuple(j for j in range(self.N) if j not in dead)

    @classmethod
    def from_survivors(cls, N: int, F: Iterable[int]) -> "StragglerScenario":
        alive = set(F)
        return cls(N, tuple(j for j in range(N) if j not in alive))


@dataclass(frozen=True)
class StragglerProfile:
    """Per-group straggler counts of a resolvable code.

    ``survivors[i]`` is ``K/L - s_i``; ``offsets[i]`` is the number of
    survivors in groups before group i.
    """

    s: tuple[int, ...]
    survivors: tuple[int, ...]
    offsets: tuple[int, ...]

    @property
    def S(self) -> int:
        return sum(self.s)

    @classmethod
    def from_counts(cls, s: Sequence[int], group_size: int) -> "StragglerProfile":
        if any(not 0 <= x <= group_size for x in s):
            raise ValueError(f"profile entries must lie in [0, {group_size}]")
        n = tuple(group_size - x for x in s)
        offsets = tuple(itertools.accumulate((0,) + n[:-1]))
        return cls(tuple(s), n, offsets)


@dataclass(frozen=True)
class DecodeResult:
    """``v_opt`` is indexed like the sorted survivor list ``F``."""

    v_opt: tuple
    err: Fraction | float
    method: str
    S: int | None = None
    profile: tuple[int, ...] | None = None

    @property
    def exact(self) -> bool:
        return isinstance(self.err, Fraction)

    def to_dict(self) -> dict:
        out: dict = {"S": self.S, "method": self.method}
        if self.profile is not None:
            out["profile"] = list(self.profile)
        if self.exact:
            out["err"] = {"exact": f"{self.err.numerator}/{self.err.denominator}",
                          "float": float(self.err)}
        else:
            out["err"] = {"exact": None, "float": float(self.err)}
        out["v_opt"] = [float(x) for x in self.v_opt]
        return out

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def _as_matrix(E) -> np.ndarray:
    if isinstance(E, GradientCode):
        return E.E
    return np.asarray(E)


def _is_integer_matrix(E: np.ndarray) -> bool:
    if np.issubdtype(E.dtype, np.integer):
        return True
    if E.dtype == object:
        return all(isinstance(x, (int, np.integer)) or (isinstance(x, Fraction) and x.denominator == 1)
                   for x in E.ravel())
    with np.errstate(invalid="ignore"):
        return bool(np.all(np.isfinite(E)) and np.all(E == np.round(E)))


def oracle_decode(E, scenario: StragglerScenario, exact: bool | None = None) -> DecodeResult:
    """Least-squares decoding for an arbitrary encoding matrix.

    Integer matrices with N <= 64 are solved exactly over the rationals
    (minimum-norm solution when ``E_F`` is rank deficient); otherwise a
    float SVD-based solve is used. ``exact`` forces either path.
    """
    E = _as_matrix(E)
    K, N = E.shape
    if scenario.N != N:
        raise ValueError(f"scenario has N={scenario.N}, matrix has {N} columns")
    F = list(scenario.F)
    if exact is None:
        exact = N <= EXACT_MAX_N and _is_integer_matrix(E)
    if exact:
        if not _is_integer_matrix(E):
            raise ValueError("the exact path needs an integer matrix")
        EF = np.asarray(E[:, F], dtype=np.int64)
        G = _rational.to_fractions(EF.T @ EF)
        h = [Fraction(int(x)) for x in EF.sum(axis=0)]
        v = _rational.min_norm_normal(G, h)
        # ||E_F v - 1||^2 = K - 2 h.v + v.G.v, and G v = h at a minimizer
        hv = sum((a * b for a, b in zip(h, v)), Fraction(0))
        err = K - hv
        return DecodeResult(tuple(v), err, "oracle-exact", S=scenario.S)
    EF = np.asarray(E[:, F], dtype=float)
    ones = np.ones(K)
    v, *_ = np.linalg.lstsq(EF, ones, rcond=None)
    r = EF @ v - ones
    return DecodeResult(tuple(v.tolist()), float(r @ r), "oracle-float", S=scenario.S)


def residual(E, scenario: StragglerScenario, v: Sequence) -> list:
    """``E_F v - 1_K``; exact when ``v`` holds Fractions and E is integer."""
    EF = _as_matrix(E)[:, list(scenario.F)]
    if all(isinstance(x, Fraction) for x in v) and _is_integer_matrix(EF):
        return [sum((int(a) * x for a, x in zip(row, v)), Fraction(0)) - 1 for row in EF]
    return (np.asarray(EF, dtype=float) @ np.asarray(v, dtype=float) - 1).tolist()


def normal_residual(E, scenario: StragglerScenario, v: Sequence) -> list:
    """``E_F^T (E_F v - 1_K)``; all zero exactly when v minimizes the residual."""
    EF = _as_matrix(E)[:, list(scenario.F)]
    res = residual(E, scenario, v)
    if all(isinstance(x, Fraction) for x in res):
        return [sum((int(a) * x for a, x in zip(col, res)), Fraction(0)) for col in EF.T]
    return (np.asarray(EF, dtype=float).T @ np.asarray(res)).tolist()


def _symmetric_form(code: GradientCode, scenario: StragglerScenario, method: str) -> DecodeResult:
    N, K, L, lam = code.N, code.K, code.L, code.lam
    n = N - scenario.S
    denom = L + lam * (n - 1)
    coef = Fraction(L, denom)
    err = K - Fraction(L * L * n, denom)
    return DecodeResult((coef,) * n, err, method, S=scenario.S)


def decode_symmetric(code: GradientCode, scenario: StragglerScenario) -> DecodeResult:
    """Constant decoding vector ``L / (L + lam (N-S-1))`` for symmetric-design codes."""
    if code.kind is not CodeKind.SYMMETRIC:
        raise WrongKind(f"decode_symmetric needs a symmetric code, got {code.kind.value}")
    return _symmetric_form(code, scenario, "thm1")


def decode_dual(code: GradientCode, scenario: StragglerScenario) -> DecodeResult:
    if code.kind is not CodeKind.DUAL:
        raise WrongKind(f"decode_dual needs a dual-design code, got {code.kind.value}")
    return _symmetric_form(code, scenario, "thm2")


def _group_size(code: GradientCode) -> int:
    return code.K // code.L


def straggler_profile(code: GradientCode, scenario: StragglerScenario) -> StragglerProfile:
    if code.kind is not CodeKind.RESOLVABLE:
        raise WrongKind(f"straggler profiles need a resolvable code, got {code.kind.value}")
    dead = set(scenario.stragglers)
    s = [sum(1 for j in grp if j in dead) for grp in code.groups]
    return StragglerProfile.from_counts(s, _group_size(code))


def resolvable_coefficients(profile: StragglerProfile, L: int, mu: int) -> list[Fraction]:
    """Per-group decoding coefficient ``c_i`` when every ``s_i > 0``."""
    n = profile.survivors
    total = 1 + sum(Fraction(mu * ni, L - mu * ni) for ni in n)
    return [Fraction(L, L - mu * ni) / total for ni in n]


def resolvable_error(profile: StragglerProfile, K: int, L: int, mu: int) -> Fraction:
    """Approximation error of a resolvable code for a given straggler profile.

    Zero if some group is complete; otherwise
    ``K + sum_i L n_i c_i (c_i - 2) + sum_{i != j} mu n_i n_j c_i c_j``.
    """
    if any(x == 0 for x in profile.s):
        return Fraction(0)
    n = profile.survivors
    c = resolvable_coefficients(profile, L, mu)
    err = Fraction(K)
    err += sum((L * ni * ci * (ci - 2) for ni, ci in zip(n, c)), Fraction(0))
    weighted = [ni * ci for ni, ci in zip(n, c)]
    tot = sum(weighted, Fraction(0))
    # sum_{i != j} w_i w_j = (sum w)^2 - sum w^2
    err += mu * (tot * tot - sum((w * w for w in weighted), Fraction(0)))
    return err


def _resolvable_error_float(s, size: int, K: int, L: int, mu: int) -> float:
    if min(s) == 0:
        return 0.0
    n = [size - x for x in s]
    total = 1 + sum(mu * ni / (L - mu * ni) for ni in n)
    c = [L / (L - mu * ni) / total for ni in n]
    w = [ni * ci for ni, ci in zip(n, c)]
    tot = sum(w)
    return K + sum(L * ni * ci * (ci - 2) for ni, ci in zip(n, c)) + mu * (tot * tot - sum(x * x for x in w))


def decode_resolvable(code: GradientCode, scenario: StragglerScenario) -> DecodeResult:
    """Closed-form decoding for affine resolvable codes.

    If some group T_i lost nobody, the lowest such group is summed with
    weight 1 (zero error). Otherwise every survivor in group i gets the
    coefficient ``c_i`` of :func:`resolvable_coefficients`.
    """
    profile = straggler_profile(code, scenario)
    F = scenario.F
    group_of = {j: g for g, grp in enumerate(code.groups) for j in grp}
    complete = [g for g, x in enumerate(profile.s) if x == 0]
    if complete:
        g0 = complete[0]
        v = tuple(Fraction(int(group_of[j] == g0)) for j in F)
        return DecodeResult(v, Fraction(0), "thm3-case1", S=scenario.S, profile=profile.s)
    c = resolvable_coefficients(profile, code.L, code.mu)
    v = tuple(c[group_of[j]] for j in F)
    err = resolvable_error(profile, code.K, code.L, code.mu)
    return DecodeResult(v, err, "thm3-case2", S=scenario.S, profile=profile.s)


def closed_form_decode(code: GradientCode, scenario: StragglerScenario) -> DecodeResult:
    """Dispatch to the closed form matching ``code.kind``."""
    if code.kind is CodeKind.SYMMETRIC:
        return decode_symmetric(code, scenario)
    if code.kind is CodeKind.DUAL:
        return decode_dual(code, scenario)
    if code.kind is CodeKind.RESOLVABLE:
        return decode_resolvable(code, scenario)
    raise WrongKind(f"no closed-form decoder for kind {code.kind.value}")


def decode(code: GradientCode, scenario: StragglerScenario, decoder: str = "auto") -> DecodeResult:
    """``decoder`` is ``closed_form``, ``oracle``, or ``auto`` (closed form when available)."""
    if decoder == "oracle":
        return oracle_decode(code.E, scenario)
    if decoder == "closed_form":
        return closed_form_decode(code, scenario)
    if decoder == "auto":
        if code.kind in (CodeKind.SYMMETRIC, CodeKind.DUAL, CodeKind.RESOLVABLE):
            return closed_form_decode(code, scenario)
        return oracle_decode(code.E, scenario)
    raise ValueError(f"unknown decoder {decoder!r}")


def _profiles(R: int, total: int, cap: int):
    """Non-increasing integer sequences of length R, entries in [0, cap], summing to total."""

    def rec(remaining: int, slots: int, hi: int):
        if slots == 0:
            if remaining == 0:
                yield ()
            return
        for x in range(min(hi, remaining), -1, -1):
            if x * slots < remaining:
                break
            for rest in rec(remaining - x, slots - 1, x):
                yield (x,) + rest

    yield from rec(total, R, cap)


def _realize_profile(code: GradientCode, s: Sequence[int]) -> StragglerScenario:
    dead = [j for grp, k in zip(code.groups, s) for j in sorted(grp)[:k]]
    return StragglerScenario(code.N, tuple(dead))


def worst_case_error(code: GradientCode, S: int, method: str = "closed_form"):
    """Largest error over all straggler sets of size S, with a witness set.

    ``closed_form`` covers symmetric, dual and resolvable codes (the
    latter by maximizing over straggler profiles); ``exhaustive`` runs the
    oracle on every S-subset and returns the lexicographically first
    maximizer.
    """
    if not 0 <= S < code.N:
        raise ValueError(f"S must lie in [0, {code.N})")
    if method == "closed_form":
        if code.kind in (CodeKind.SYMMETRIC, CodeKind.DUAL):
            sc = StragglerScenario(code.N, tuple(range(S)))
            return closed_form_decode(code, sc).err, sc
        if code.kind is CodeKind.RESOLVABLE:
            size = _group_size(code)
            R = len(code.groups)
            profiles = list(_profiles(R, S, size))
            approx = [_resolvable_error_float(s, size, code.K, code.L, code.mu) for s in profiles]
            # exact evaluation only for the float near-maxima
            cut = max(approx) - 1e-9 * max(1.0, abs(max(approx)))
            best, best_s = Fraction(-1), None
            for s, a in zip(profiles, approx):
                if a < cut:
                    continue
                e = resolvable_error(StragglerProfile.from_counts(s, size), code.K, code.L, code.mu)
                if e > best:
                    best, best_s = e, s
            return best, _realize_profile(code, best_s)
        raise MethodUnavailable(f"no closed-form worst case for kind {code.kind.value}")
    if method == "exhaustive":
        count = math.comb(code.N, S)
        if count > max_subsets():
            raise TooLarge(f"C({code.N},{S}) = {count} exceeds the subset cap {max_subsets()}")
        best, witness = None, None
        for dead in itertools.combinations(range(code.N), S):
            sc = StragglerScenario(code.N, dead)
            e = oracle_decode(code.E, sc).err
            if best is None or e > best:
                best, witness = e, sc
        return best, witness
    raise ValueError(f"unknown method {method!r}")


def pg_error_formula(q: int, S: int) -> Fraction:
    """Worst-case error of the projective-plane code of order q with S stragglers."""
    if not 0 <= S < q * q + q + 1:
        raise ValueError(f"S must lie in [0, {q * q + q + 1})")
    return S / ((q + 1) + Fraction(q + 1 - S, q))


def rank_one_update_inverse(G_inv, H, tol: float = 1e-12) -> np.ndarray:
    """Inverse of ``G + H`` from ``G^{-1}`` when H has rank one."""
    G_inv = np.asarray(G_inv, dtype=float)
    H = np.asarray(H, dtype=float)
    t = float(np.trace(H @ G_inv))
    if abs(1 + t) <= tol * max(1.0, abs(t)):
        raise SingularUpdate("trace(H G^-1) = -1: G + H is singular")
    return G_inv - (G_inv @ H @ G_inv) / (1 + t)
