"""GF(2^m) arithmetic, binary BCH codes and per-class codebooks.

A codebook assigns every class a b-bit codeword taken from a binary BCH code
of length n = 2^m - 1. When b > n the codewords are padded with seeded random
bits; when no padded construction fits, a longer code is truncated to b bits
and its distance is measured again over the truncated words.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from typing import Iterator, List, Optional, Tuple

import numpy as np

from .constants import (
    EXHAUSTIVE_MAX_K,
    MAX_FIELD_DEGREE,
    MIN_FIELD_DEGREE,
    PRIMITIVE_POLYNOMIALS,
)
from .errors import DesignedDistanceTooLarge, TooManyClasses
from .hamming import BinaryCode, hamming_distance


@dataclass(frozen=True)
class GaloisField:
    """GF(2^m) in log/antilog representation.

    Attributes:
        m: Extension degree.
        primitive_poly: Bitmask of the reducing polynomial (bit i = x^i).
        log_table: ``log_table[x - 1]`` is the discrete log of nonzero ``x``.
        antilog_table: ``antilog_table[i]`` is alpha^i.
    """

    m: int
    primitive_poly: int
    log_table: Tuple[int, ...] = field(repr=False)
    antilog_table: Tuple[int, ...] = field(repr=False)

    @property
    def order(self) -> int:
        """Size of the multiplicative group, 2^m - 1."""
        return (1 << self.m) - 1

    @classmethod
    def build(cls, m: int, primitive_poly: Optional[int] = None) -> GaloisField:
        """Build the field from the standard primitive polynomial for ``m``.

        Raises:
            ValueError: if ``m`` is out of range or the polynomial does not
                generate a multiplicative group of order 2^m - 1.
        """
        if not MIN_FIELD_DEGREE <= m <= MAX_FIELD_DEGREE:
            raise ValueError(
                f"Field degree m={m} outside [{MIN_FIELD_DEGREE}, {MAX_FIELD_DEGREE}]"
            )
        poly = PRIMITIVE_POLYNOMIALS[m] if primitive_poly is None else primitive_poly
        if poly.bit_length() - 1 != m:
            raise ValueError(f"Polynomial {poly:#b} does not have degree {m}")

        order = (1 << m) - 1
        antilog = [0] * order
        log = [-1] * order
        x = 1
        for i in range(order):
            if log[x - 1] != -1:
                raise ValueError(f"Polynomial {poly:#b} is not primitive")
            antilog[i] = x
            log[x - 1] = i
            x <<= 1
            if x >> m:
                x ^= poly
        if x != 1:
            raise ValueError(f"Polynomial {poly:#b} is not primitive")
        return cls(m, poly, tuple(log), tuple(antilog))


def gf_mul(gf: GaloisField, x: int, y: int) -> int:
    """Multiply two elements of GF(2^m); zero absorbs."""
    if x == 0 or y == 0:
        return 0
    return gf.antilog_table[(gf.log_table[x - 1] + gf.log_table[y - 1]) % gf.order]


def gf_pow(gf: GaloisField, exponent: int) -> int:
    """Return alpha^exponent."""
    return gf.antilog_table[exponent % gf.order]


def gf_inv(gf: GaloisField, x: int) -> int:
    """Multiplicative inverse of a nonzero element."""
    if x == 0:
        raise ZeroDivisionError("0 has no inverse in GF(2^m)")
    return gf.antilog_table[(-gf.log_table[x - 1]) % gf.order]


@dataclass(frozen=True)
class BinaryPolynomial:
    """Polynomial over GF(2) stored as a bitmask (bit i = coefficient of x^i)."""

    mask: int

    @classmethod
    def from_coefficients(cls, coefficients) -> BinaryPolynomial:
        """Build from a coefficient sequence, lowest degree first."""
        mask = 0
        for i, c in enumerate(coefficients):
            if c & 1:
                mask |= 1 << i
        return cls(mask)

    @property
    def coefficients(self) -> Tuple[int, ...]:
        """Coefficients lowest degree first; ``(0,)`` for the zero polynomial."""
        if self.mask == 0:
            return (0,)
        return tuple((self.mask >> i) & 1 for i in range(self.degree + 1))

    @property
    def degree(self) -> int:
        """Degree; -1 for the zero polynomial."""
        return self.mask.bit_length() - 1

    def __mul__(self, other: BinaryPolynomial) -> BinaryPolynomial:
        a, b, product = self.mask, other.mask, 0
        while b:
            if b & 1:
                product ^= a
            a <<= 1
            b >>= 1
        return BinaryPolynomial(product)

    def __divmod__(self, other: BinaryPolynomial):
        if other.mask == 0:
            raise ZeroDivisionError("division by the zero polynomial")
        quotient, remainder = 0, self.mask
        dd = other.degree
        while remainder and remainder.bit_length() - 1 >= dd:
            shift = remainder.bit_length() - 1 - dd
            quotient |= 1 << shift
            remainder ^= other.mask << shift
        return BinaryPolynomial(quotient), BinaryPolynomial(remainder)

    def __mod__(self, other: BinaryPolynomial) -> BinaryPolynomial:
        return divmod(self, other)[1]

    def gcd(self, other: BinaryPolynomial) -> BinaryPolynomial:
        """Greatest common divisor (monic by construction over GF(2))."""
        a, b = self, other
        while b.mask:
            a, b = b, a % b
        return a

    def lcm(self, other: BinaryPolynomial) -> BinaryPolynomial:
        """Least common multiple."""
        quotient, _ = divmod(self * other, self.gcd(other))
        return quotient

    def __str__(self) -> str:
        if self.mask == 0:
            return "0"
        terms = []
        for i in range(self.degree, -1, -1):
            if (self.mask >> i) & 1:
                terms.append("1" if i == 0 else ("x" if i == 1 else f"x^{i}"))
        return " + ".join(terms)


def cyclotomic_coset(gf: GaloisField, exponent: int) -> Tuple[int, ...]:
    """Conjugacy class {exponent * 2^i mod (2^m - 1)} in ascending order."""
    coset = set()
    e = exponent % gf.order
    while e not in coset:
        coset.add(e)
        e = (2 * e) % gf.order
    return tuple(sorted(coset))


def minimal_polynomial(gf: GaloisField, exponent: int) -> BinaryPolynomial:
    """Minimal polynomial of alpha^exponent over GF(2).

    Expands the product of (x - alpha^j) over the conjugacy class of
    ``exponent``; the expansion has binary coefficients.
    """
    coeffs = [1]  # field-valued, lowest degree first
    for j in cyclotomic_coset(gf, exponent):
        root = gf_pow(gf, j)
        shifted = [0] + coeffs
        for i, c in enumerate(coeffs):
            shifted[i] ^= gf_mul(gf, root, c)
        coeffs = shifted
    if any(c not in (0, 1) for c in coeffs):
        raise ArithmeticError(f"Minimal polynomial of alpha^{exponent} is not binary")
    return BinaryPolynomial.from_coefficients(coeffs)


@dataclass(frozen=True)
class BCHCode:
    """Narrow-sense primitive binary BCH code.

    Attributes:
        n: Codeword length 2^m - 1.
        k: Message length.
        designed_t: Designed error-correction capability.
        generator: Generator polynomial of degree n - k.
    """

    n: int
    k: int
    designed_t: int
    generator: BinaryPolynomial

    @property
    def designed_distance(self) -> int:
        return 2 * self.designed_t + 1

    def encode(self, message: int) -> int:
        """Systematically encode ``message`` (k bits) into an n-bit mask.

        Bit ``n - 1 - i`` of the result is codeword position ``i``; the
        message occupies the high-order (leading) positions.
        """
        if not 0 <= message < (1 << self.k):
            raise ValueError(f"Message {message} does not fit in k={self.k} bits")
        shifted = BinaryPolynomial(message << (self.n - self.k))
        return shifted.mask ^ (shifted % self.generator).mask

    def codeword(self, message: int) -> BinaryCode:
        """Encode ``message`` as an n-bit BinaryCode (position 0 = x^(n-1))."""
        cw = self.encode(message)
        return BinaryCode.from_bits(
            [(cw >> (self.n - 1 - i)) & 1 for i in range(self.n)]
        )

    def minimum_distance(self) -> int:
        """Exact minimum distance for k <= 16, designed distance otherwise."""
        if self.k > EXHAUSTIVE_MAX_K:
            return self.designed_distance
        basis = [self.encode(1 << i) for i in range(self.k)]
        best = self.n
        word = 0
        # Gray-code walk visits every nonzero codeword once.
        for step in range(1, 1 << self.k):
            word ^= basis[(step & -step).bit_length() - 1]
            best = min(best, word.bit_count())
        return best


def build_bch(gf: GaloisField, designed_t: int) -> BCHCode:
    """Build the BCH code whose generator is lcm of minpolys of alpha^1..alpha^2t.

    Raises:
        ValueError: if ``designed_t`` < 1.
        DesignedDistanceTooLarge: if the generator degree reaches n.
    """
    if designed_t < 1:
        raise ValueError(f"designed_t must be >= 1, got {designed_t}")
    n = gf.order
    generator = BinaryPolynomial(1)
    seen = set()
    for exponent in range(1, 2 * designed_t + 1):
        leader = cyclotomic_coset(gf, exponent)[0]
        if leader in seen:
            continue
        seen.add(leader)
        generator = generator.lcm(minimal_polynomial(gf, exponent))
        if generator.degree >= n:
            raise DesignedDistanceTooLarge(
                f"t={designed_t} leaves no message bits at n={n}"
            )
    return BCHCode(n=n, k=n - generator.degree, designed_t=designed_t, generator=generator)


@dataclass(frozen=True)
class Codebook:
    """Per-class target codewords.

    Attributes:
        b: Code width in bits.
        num_classes: Number of classes C.
        codewords: One b-bit code per class.
        bch_length: BCH length n the codewords were built from.
        min_distance: Guaranteed pairwise distance D over the first
            ``min(n, b)`` bits.
        radius: floor((D - 1) / 2).
        pad_seed: Seed used for padding bits.
    """

    b: int
    num_classes: int
    codewords: Tuple[BinaryCode, ...]
    bch_length: int
    min_distance: int
    radius: int
    pad_seed: int

    def __post_init__(self):
        if len(self.codewords) != self.num_classes:
            raise ValueError(
                f"Expected {self.num_classes} codewords, got {len(self.codewords)}"
            )
        if any(cw.width != self.b for cw in self.codewords):
            raise ValueError(f"Every codeword must have width {self.b}")

    @cached_property
    def bit_matrix(self) -> np.ndarray:
        """Codewords as a read-only (C, b) uint8 array."""
        matrix = np.stack([cw.to_bits() for cw in self.codewords])
        matrix.setflags(write=False)
        return matrix

    @property
    def default_eta(self) -> int:
        """Termination threshold floor(R / 2)."""
        return self.radius // 2


def _largest_t_code(gf: GaloisField, min_k: int) -> Optional[BCHCode]:
    """Binary-search the largest t whose BCH code still has k >= min_k."""

    def attempt(t: int) -> Optional[BCHCode]:
        try:
            code = build_bch(gf, t)
        except DesignedDistanceTooLarge:
            return None
        return code if code.k >= min_k else None

    lo, hi = 1, max(1, gf.order // 2)
    best = attempt(lo)
    if best is None:
        return None
    while lo < hi:
        mid = (lo + hi + 1) // 2
        code = attempt(mid)
        if code is None:
            hi = mid - 1
        else:
            best, lo = code, mid
    return best


def _candidate_codes(width: int, min_k: int) -> Iterator[Tuple[int, BCHCode]]:
    """Yield (m, code): the padded choice first, then the shortest truncated one."""
    pad_m = (width + 1).bit_length() - 1
    if pad_m >= MIN_FIELD_DEGREE:
        code = _largest_t_code(GaloisField.build(min(pad_m, MAX_FIELD_DEGREE)), min_k)
        if code is not None:
            yield pad_m, code
    for m in range(max(MIN_FIELD_DEGREE, pad_m + 1), MAX_FIELD_DEGREE + 1):
        code = _largest_t_code(GaloisField.build(m), min_k)
        if code is not None:
            yield m, code
            return


def _padding_bits(num_classes: int, count: int, seed: int) -> np.ndarray:
    """Seeded (C, count) padding; a column shared by every class is redrawn."""
    rng = np.random.default_rng(seed)
    padding = rng.integers(0, 2, size=(num_classes, count))
    constant = np.flatnonzero((padding == padding[0]).all(axis=0))
    while constant.size:
        padding[:, constant] = rng.integers(0, 2, size=(num_classes, constant.size))
        constant = np.flatnonzero((padding == padding[0]).all(axis=0))
    return padding


def _min_pairwise_distance(codes: List[BinaryCode]) -> int:
    return min(hamming_distance(a, x) for a, x in combinations(codes, 2))


def build_codebook(num_classes: int, width: int, seed: int = 0) -> Codebook:
    """Assign each of ``num_classes`` classes a large-margin ``width``-bit codeword.

    Class i is encoded from message i. Padded codewords keep the BCH
    distance; truncated codewords have their distance recomputed over the
    kept bits and are rejected when it falls below 3 (no error radius).

    Raises:
        ValueError: if ``num_classes`` < 2 or ``width`` < 4.
        TooManyClasses: if no BCH construction separates the classes.
    """
    if num_classes < 2:
        raise ValueError(f"Need at least 2 classes, got {num_classes}")
    if width < 4:
        raise ValueError(f"Code width must be >= 4, got {width}")

    min_k = max(1, (num_classes - 1).bit_length())
    for _, code in _candidate_codes(width, min_k):
        base = [code.codeword(i).to_bits() for i in range(num_classes)]
        if code.n <= width:
            padding = _padding_bits(num_classes, width - code.n, seed)
            codewords = [
                BinaryCode.from_bits(np.concatenate([bits, pad]))
                for bits, pad in zip(base, padding)
            ]
            distance = code.minimum_distance()
        else:
            codewords = [BinaryCode.from_bits(bits[:width]) for bits in base]
            distance = _min_pairwise_distance(codewords)
            if distance < 3:
                continue
        return Codebook(
            b=width,
            num_classes=num_classes,
            codewords=tuple(codewords),
            bch_length=code.n,
            min_distance=distance,
            radius=(distance - 1) // 2,
            pad_seed=seed,
        )
    raise TooManyClasses(
        f"No BCH code of width {width} separates {num_classes} classes with margin"
    )


__all__ = [
    "BCHCode",
    "BinaryPolynomial",
    "Codebook",
    "GaloisField",
    "build_bch",
    "build_codebook",
    "cyclotomic_coset",
    "gf_inv",
    "gf_mul",
    "gf_pow",
    "minimal_polynomial",
]
