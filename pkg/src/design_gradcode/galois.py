"""Arithmetic in GF(q) for prime powers q.

Elements are integers in ``[0, q)`` whose base-``p`` digits are the
little-endian coefficient vector of a polynomial over GF(p), reduced
modulo the field's monic irreducible modulus. ``Field.coeffs`` and
``Field.element`` convert between the two views.
"""
from __future__ import annotations

from functools import cached_property
from itertools import product
from typing import Sequence

import numpy as np

from .errors import DivideByZero, NotPrimePower, ZeroVector

MAX_ORDER = 1 << 16
# Full q x q operation tables are built only up to this order.
TABLE_LIMIT = 1024


def factor_prime_power(q: int) -> tuple[int, int]:
    """Return ``(p, k)`` with ``q == p**k`` or raise NotPrimePower."""
    if q < 2:
        raise NotPrimePower(f"{q} is not a prime power")
    p = next(d for d in range(2, q + 1) if q % d == 0)
    k, rest = 0, q
    while rest % p == 0:
        rest //= p
        k += 1
    if rest != 1:
        raise NotPrimePower(f"{q} has at least two distinct prime factors")
    return p, k


def is_prime_power(q: int) -> bool:
    try:
        factor_prime_power(q)
    except NotPrimePower:
        return False
    return True


def _poly_rem(a: list[int], m: list[int], p: int) -> list[int]:
    """Remainder of ``a`` modulo monic ``m`` over GF(p); little-endian lists."""
    a = [c % p for c in a]
    dm = len(m) - 1
    for top in range(len(a) - 1, dm - 1, -1):
        c = a[top]
        if c:
            shift = top - dm
            for i, mc in enumerate(m):
                a[shift + i] = (a[shift + i] - c * mc) % p
    out = a[:dm] + [0] * max(0, dm - len(a))
    return out


def _monic_polys(p: int, deg: int):
    # Ordered as the integer sum(c_i * p**i) + p**deg, i.e. by the
    # coefficients read from the highest non-leading degree downwards.
    for low in product(range(p), repeat=deg):
        yield list(reversed(low)) + [1]


def is_irreducible(m: Sequence[int], p: int) -> bool:
    """Trial division by every monic polynomial of degree 1..deg(m)//2."""
    m = list(m)
    k = len(m) - 1
    for d in range(1, k // 2 + 1):
        for f in _monic_polys(p, d):
            if not any(_poly_rem(m, f, p)):
                return False
    return True


def smallest_irreducible(p: int, k: int) -> tuple[int, ...]:
    """Smallest monic irreducible polynomial of degree ``k`` over GF(p).

    Candidates ``x^k + c_{k-1} x^{k-1} + ... + c_0`` are compared by the
    tuple ``(c_{k-1}, ..., c_0)``, which is also their integer value at
    ``x = p``. For ``k == 1`` the answer is ``x``.
    """
    for m in _monic_polys(p, k):
        if is_irreducible(m, p):
            return tuple(m)
    raise AssertionError("no irreducible polynomial found")  # pragma: no cover


class Field:
    """The finite field GF(q), q = p**k <= 2**16.

    Immutable; all operations are pure, so one instance may be shared
    freely between threads.
    """

    def __init__(self, q: int):
        p, k = factor_prime_power(q)
        if q > MAX_ORDER:
            raise NotPrimePower(f"q={q} exceeds the supported maximum {MAX_ORDER}")
        self.p = p
        self.k = k
        self.q = q
        self.modulus = smallest_irreducible(p, k)
        self._powers = [p**i for i in range(k)]

    def __repr__(self) -> str:
        return f"Field(q={self.q})"

    def __eq__(self, other) -> bool:
        return isinstance(other, Field) and (self.q, self.modulus) == (other.q, other.modulus)

    def __hash__(self) -> int:
        return hash((self.q, self.modulus))

    # conversions ---------------------------------------------------------
    def coeffs(self, a: int) -> tuple[int, ...]:
        self._check(a)
        return tuple((a // pw) % self.p for pw in self._powers)

    def element(self, coeffs: Sequence[int]) -> int:
        if len(coeffs) != self.k or any(not 0 <= c < self.p for c in coeffs):
            raise ValueError(f"invalid coefficient vector {tuple(coeffs)} for GF({self.q})")
        return sum(c * pw for c, pw in zip(coeffs, self._powers))

    def _check(self, a: int) -> None:
        if not 0 <= a < self.q:
            raise ValueError(f"{a} is not an element of GF({self.q})")

    # scalar arithmetic ---------------------------------------------------
    def add(self, a: int, b: int) -> int:
        if self.k == 1:
            self._check(a)
            self._check(b)
            return (a + b) % self.p
        ca, cb = self.coeffs(a), self.coeffs(b)
        return self.element([(x + y) % self.p for x, y in zip(ca, cb)])

    def neg(self, a: int) -> int:
        return self.element([(-c) % self.p for c in self.coeffs(a)])

    def sub(self, a: int, b: int) -> int:
        return self.add(a, self.neg(b))

    def mul(self, a: int, b: int) -> int:
        if self.k == 1:
            self._check(a)
            self._check(b)
            return a * b % self.p
        ca, cb = self.coeffs(a), self.coeffs(b)
        prod = [0] * (2 * self.k - 1)
        for i, x in enumerate(ca):
            if x:
                for j, y in enumerate(cb):
                    prod[i + j] += x * y
        return self.element(_poly_rem(prod, list(self.modulus), self.p))

    def inv(self, a: int) -> int:
        self._check(a)
        if a == 0:
            raise DivideByZero(f"0 has no inverse in GF({self.q})")
        if self.q <= TABLE_LIMIT:
            return int(self.inv_table[a])
        # a^(q-2) by square-and-multiply
        result, base, e = 1, a, self.q - 2
        while e:
            if e & 1:
                result = self.mul(result, base)
            base = self.mul(base, base)
            e >>= 1
        return result

    def arith(self, op: str, a: int, b: int | None = None) -> int:
        """Dispatch ``op`` in {add, mul, neg, inv}; ``b`` only for binary ops."""
        if op in ("add", "mul"):
            if b is None:
                raise ValueError(f"{op} needs two operands")
            return getattr(self, op)(a, b)
        if op in ("neg", "inv"):
            return getattr(self, op)(a)
        raise ValueError(f"unknown field operation {op!r}")

    # tables --------------------------------------------------------------
    @cached_property
    def _digits(self) -> np.ndarray:
        idx = np.arange(self.q, dtype=np.int64)
        return (idx[:, None] // np.array(self._powers, dtype=np.int64)) % self.p

    def _encode(self, digits: np.ndarray) -> np.ndarray:
        return (digits * np.array(self._powers, dtype=np.int64)).sum(axis=-1)

    def _require_tables(self) -> None:
        if self.q > TABLE_LIMIT:
            raise ValueError(f"operation tables are not built for q > {TABLE_LIMIT}")

    @cached_property
    def add_table(self) -> np.ndarray:
        self._require_tables()
        d = self._digits
        return self._encode((d[:, None, :] + d[None, :, :]) % self.p)

    @cached_property
    def mul_table(self) -> np.ndarray:
        self._require_tables()
        p, k = self.p, self.k
        d = self._digits
        low = np.array(self.modulus[:k], dtype=np.int64)
        # xpow[i][b] = coefficient vector of x^i * b
        xpow = [d]
        for _ in range(1, k):
            prev = xpow[-1]
            top = prev[:, k - 1]
            shifted = np.zeros_like(prev)
            shifted[:, 1:] = prev[:, :-1]
            xpow.append((shifted - top[:, None] * low[None, :]) % p)
        stacked = np.stack(xpow)  # (k, q, k)
        prod = np.einsum("ai,ibj->abj", d, stacked) % p
        return self._encode(prod)

    @cached_property
    def neg_table(self) -> np.ndarray:
        return self._encode((-self._digits) % self.p)

    @cached_property
    def inv_table(self) -> np.ndarray:
        mt = self.mul_table
        inv = np.zeros(self.q, dtype=np.int64)
        inv[1:] = np.argmax(mt[1:] == 1, axis=1)
        return inv

    @cached_property
    def squares(self) -> frozenset[int]:
        """Nonzero squares of the field."""
        if self.q <= TABLE_LIMIT:
            diag = np.diagonal(self.mul_table)
            return frozenset(int(x) for x in diag[1:])
        return frozenset(self.mul(a, a) for a in range(1, self.q))

    def dot_matrix(self, A: np.ndarray, B: np.ndarray) -> np.ndarray:
        """Field matrix product ``A @ B.T`` for element arrays A (n x d), B (m x d)."""
        A = np.asarray(A, dtype=np.int64)
        B = np.asarray(B, dtype=np.int64)
        mt, at = self.mul_table, self.add_table
        out = np.zeros((A.shape[0], B.shape[0]), dtype=np.int64)
        for t in range(A.shape[1]):
            out = at[out, mt[A[:, t][:, None], B[:, t][None, :]]]
        return out


def field_new(q: int) -> Field:
    return Field(q)


def projective_normalize(field: Field, vec: Sequence[int]) -> tuple[int, ...]:
    """Scale ``vec`` so that its first nonzero coordinate is 1."""
    lead = next((a for a in vec if a != 0), None)
    if lead is None:
        raise ZeroVector("cannot normalize the zero vector")
    s = field.inv(lead)
    return tuple(field.mul(s, a) for a in vec)
