"""
Pairing backend over BLS12-381.

The BSW construction is written for a symmetric pairing; this backend realises
it on the type-3 curve BLS12-381 with a fixed side assignment:

    group one (48-byte compressed points): g1, h, C, C_y, D_j'
    group two (96-byte compressed points): g2, g^alpha, D, D_j, C_y', H(att)

Elements use multiplicative notation: ``a * b`` is the group operation,
``a / b`` multiplies by the inverse and ``a ** x`` exponentiates by a scalar.
"""

import hashlib
import logging
import re
import secrets
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Callable, Optional, Tuple

from py_ecc.bls.hash_to_curve import hash_to_G2
from py_ecc.bls.point_compression import (
    compress_G1,
    compress_G2,
    decompress_G1,
    decompress_G2,
)
from py_ecc.optimized_bls12_381 import (
    FQ12,
    G1,
    G2,
    add,
    curve_order,
    eq,
    field_modulus,
    is_inf,
    multiply,
    neg,
    pairing,
)

import config
from errors import (
    InvalidAttributeToken,
    InvalidGroupElement,
    RandomnessUnavailable,
    UnsupportedSecurityLevel,
)

logger = logging.getLogger(__name__)

SUPPORTED_SECURITY_LEVELS = {128: "BLS12-381"}

SCALAR_BYTES = 32
FIELD_BYTES = 48
G1_BYTES = FIELD_BYTES
G2_BYTES = 2 * FIELD_BYTES
GT_BYTES = 12 * FIELD_BYTES

ATTRIBUTE_PATTERN = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")
# policy keywords, in any letter case
RESERVED_WORDS = frozenset({"and", "or", "of"})

# Draws an integer uniformly from [0, n); secrets.randbelow or random.Random(seed).randrange
RandomSource = Callable[[int], int]


def validate_attribute(attribute: str) -> str:
    if not isinstance(attribute, str) or not ATTRIBUTE_PATTERN.match(attribute):
        raise InvalidAttributeToken(f"invalid attribute token: {attribute!r}")
    if attribute.lower() in RESERVED_WORDS:
        raise InvalidAttributeToken(f"{attribute!r} is a reserved policy keyword")
    return attribute


def _as_int(value) -> int:
    if isinstance(value, Scalar):
        return value.value
    if isinstance(value, int):
        return value
    raise TypeError(f"expected Scalar or int, got {type(value).__name__}")


@dataclass(frozen=True)
class Scalar:
    """An element of Z_p, p being the prime group order."""

    value: int

    def __post_init__(self):
        if not 0 <= self.value < curve_order:
            raise ValueError("scalar out of range [0, p)")

    @classmethod
    def of(cls, value: int) -> "Scalar":
        return cls(_as_int(value) % curve_order)

    def __add__(self, other):
        return Scalar.of(self.value + _as_int(other))

    __radd__ = __add__

    def __sub__(self, other):
        return Scalar.of(self.value - _as_int(other))

    def __rsub__(self, other):
        return Scalar.of(_as_int(other) - self.value)

    def __mul__(self, other):
        return Scalar.of(self.value * _as_int(other))

    __rmul__ = __mul__

    def __neg__(self):
        return Scalar.of(-self.value)

    def __truediv__(self, other):
        return self * Scalar.of(_as_int(other)).inverse()

    def __int__(self):
        return self.value

    def is_zero(self) -> bool:
        return self.value == 0

    def inverse(self) -> "Scalar":
        if self.value == 0:
            raise ZeroDivisionError("zero has no inverse modulo p")
        return Scalar(pow(self.value, -1, curve_order))

    def to_bytes(self) -> bytes:
        return self.value.to_bytes(SCALAR_BYTES, "big")

    @classmethod
    def from_bytes(cls, data: bytes) -> "Scalar":
        if len(data) != SCALAR_BYTES:
            raise InvalidGroupElement(f"scalar encoding must be {SCALAR_BYTES} bytes")
        value = int.from_bytes(data, "big")
        if value >= curve_order:
            raise InvalidGroupElement("scalar encoding not reduced modulo p")
        return cls(value)


class SourceElement:
    """A point of one of the two source groups."""

    __slots__ = ("point",)
    encoded_size = 0

    def __init__(self, point):
        self.point = point

    def _check(self, other):
        if type(other) is not type(self):
            raise TypeError(f"cannot combine {type(self).__name__} with {type(other).__name__}")

    def __mul__(self, other):
        self._check(other)
        return type(self)(add(self.point, other.point))

    def __truediv__(self, other):
        self._check(other)
        return type(self)(add(self.point, neg(other.point)))

    def __pow__(self, exponent):
        return type(self)(multiply(self.point, _as_int(exponent) % curve_order))

    def __eq__(self, other):
        return type(other) is type(self) and eq(self.point, other.point)

    def __hash__(self):
        return hash(self.to_bytes())

    def __repr__(self):
        return f"{type(self).__name__}({self.to_bytes().hex()[:16]}…)"

    def is_identity(self) -> bool:
        return is_inf(self.point)

    def in_subgroup(self) -> bool:
        return is_inf(self.point) or is_inf(multiply(self.point, curve_order))

    def to_bytes(self) -> bytes:
        raise NotImplementedError

    @classmethod
    def _decompress(cls, data: bytes):
        raise NotImplementedError

    @classmethod
    def from_bytes(cls, data: bytes):
        """Decode a compressed point, rejecting non-canonical, off-curve and out-of-subgroup input."""
        if len(data) != cls.encoded_size:
            raise InvalidGroupElement(
                f"{cls.__name__} encoding must be {cls.encoded_size} bytes, got {len(data)}"
            )
        try:
            element = cls(cls._decompress(bytes(data)))
        except (ValueError, AssertionError, ZeroDivisionError) as exc:
            raise InvalidGroupElement(f"invalid {cls.__name__} encoding: {exc}") from exc
        if element.to_bytes() != bytes(data):
            raise InvalidGroupElement(f"non-canonical {cls.__name__} encoding")
        if not element.in_subgroup():
            raise InvalidGroupElement(f"{cls.__name__} not in the prime-order subgroup")
        return element


class G1Element(SourceElement):
    __slots__ = ()
    encoded_size = G1_BYTES

    def to_bytes(self) -> bytes:
        return int(compress_G1(self.point)).to_bytes(G1_BYTES, "big")

    @classmethod
    def _decompress(cls, data: bytes):
        return decompress_G1(int.from_bytes(data, "big"))


class G2Element(SourceElement):
    __slots__ = ()
    encoded_size = G2_BYTES

    def to_bytes(self) -> bytes:
        z1, z2 = compress_G2(self.point)
        return int(z1).to_bytes(FIELD_BYTES, "big") + int(z2).to_bytes(FIELD_BYTES, "big")

    @classmethod
    def _decompress(cls, data: bytes):
        z1 = int.from_bytes(data[:FIELD_BYTES], "big")
        z2 = int.from_bytes(data[FIELD_BYTES:], "big")
        return decompress_G2((z1, z2))


def _coefficient(value) -> int:
    return value if isinstance(value, int) else value.n


class TargetElement:
    """An element of the order-p subgroup of GT = F_q^12."""

    __slots__ = ("value",)

    def __init__(self, value):
        self.value = value

    def _check(self, other):
        if not isinstance(other, TargetElement):
            raise TypeError(f"cannot combine TargetElement with {type(other).__name__}")

    def __mul__(self, other):
        self._check(other)
        return TargetElement(self.value * other.value)

    def __truediv__(self, other):
        self._check(other)
        return TargetElement(self.value * other.value.inv())

    def __pow__(self, exponent):
        n = _as_int(exponent) % curve_order
        if n == 0:
            return TargetElement(FQ12.one())
        return TargetElement(self.value ** n)

    def __eq__(self, other):
        return isinstance(other, TargetElement) and self.value == other.value

    def __hash__(self):
        return hash(self.to_bytes())

    def __repr__(self):
        return f"TargetElement({self.to_bytes().hex()[:16]}…)"

    @classmethod
    def identity(cls) -> "TargetElement":
        return cls(FQ12.one())

    def is_identity(self) -> bool:
        return self.value == FQ12.one()

    def to_bytes(self) -> bytes:
        return b"".join(
            _coefficient(c).to_bytes(FIELD_BYTES, "big") for c in self.value.coeffs
        )

    @classmethod
    def from_bytes(cls, data: bytes) -> "TargetElement":
        if len(data) != GT_BYTES:
            raise InvalidGroupElement(f"TargetElement encoding must be {GT_BYTES} bytes")
        coeffs = [
            int.from_bytes(data[i:i + FIELD_BYTES], "big")
            for i in range(0, GT_BYTES, FIELD_BYTES)
        ]
        if any(c >= field_modulus for c in coeffs):
            raise InvalidGroupElement("TargetElement coefficient not reduced")
        if not any(coeffs):
            raise InvalidGroupElement("zero is not a TargetElement")
        value = FQ12(coeffs)
        if value ** curve_order != FQ12.one():
            raise InvalidGroupElement("TargetElement not in the order-p subgroup")
        return cls(value)


@dataclass(frozen=True)
class GroupContext:
    group_id: str
    order: int
    g1: G1Element
    g2: G2Element

    @property
    def g(self) -> Tuple[G1Element, G2Element]:
        """The generator "g", one per pairing side."""
        return self.g1, self.g2

    @cached_property
    def gt(self) -> TargetElement:
        """pair(g1, g2), computed once per context."""
        return pair(self.g1, self.g2)

    def to_bytes(self) -> bytes:
        return (
            self.group_id.encode("ascii")
            + self.order.to_bytes(SCALAR_BYTES, "big")
            + self.g1.to_bytes()
            + self.g2.to_bytes()
        )


@lru_cache(maxsize=None)
def group_setup(security_level: int = config.SECURITY_LEVEL) -> GroupContext:
    if security_level not in SUPPORTED_SECURITY_LEVELS:
        raise UnsupportedSecurityLevel(
            f"unsupported security level {security_level}; supported: {sorted(SUPPORTED_SECURITY_LEVELS)}"
        )
    logger.debug("group context %s ready", SUPPORTED_SECURITY_LEVELS[security_level])
    return GroupContext(
        group_id=SUPPORTED_SECURITY_LEVELS[security_level],
        order=curve_order,
        g1=G1Element(G1),
        g2=G2Element(G2),
    )


@lru_cache(maxsize=4096)
def _hash_attribute(attribute: str) -> G2Element:
    return G2Element(hash_to_G2(attribute.encode("utf-8"), config.ATTRIBUTE_DST, hashlib.sha256))


def hash_to_group(ctx: GroupContext, attribute: str) -> G2Element:
    """H: attribute token -> group two, via the standard hash-to-curve suite with tag CPABE-ATTR-V1."""
    validate_attribute(attribute)
    return _hash_attribute(attribute)


def pair(a: G1Element, b: G2Element) -> TargetElement:
    if not isinstance(a, G1Element) or not isinstance(b, G2Element):
        raise TypeError("pair expects (G1Element, G2Element)")
    return TargetElement(pairing(b.point, a.point))


def random_scalar(ctx: GroupContext, rng: Optional[RandomSource] = None) -> Scalar:
    source = rng or secrets.randbelow
    try:
        value = source(ctx.order)
    except (OSError, NotImplementedError) as exc:
        raise RandomnessUnavailable(f"entropy source failed: {exc}") from exc
    return Scalar(value)


def random_nonzero_scalar(ctx: GroupContext, rng: Optional[RandomSource] = None) -> Scalar:
    while True:
        value = random_scalar(ctx, rng)
        if not value.is_zero():
            return value


