"""Semirings with exact arithmetic, total orders and a value codec.

Every semiring is a :class:`SemiringDef` instance. Values are plain Python
objects: ``bool`` for the Boolean semiring, ``int`` for the naturals and the
integers, :class:`fractions.Fraction` for the rationals and the max-tropical
semiring, :class:`Infinity` tags for the extended carriers and ``frozenset``
of symbols for powerset semirings. Nothing is ever stored as a float.
"""

import re
from abc import ABC, abstractmethod
from enum import Enum
from fractions import Fraction
from functools import reduce
from typing import Dict, FrozenSet, Iterable, Optional, Tuple, Union

from ac_solve.exceptions import (
    CarrierMismatchError,
    UnknownSemiringError,
    UnsupportedOperationError,
    ValueParseError,
)


class Infinity(Enum):
    """Explicit infinity tags for the extended carriers."""

    POS = "inf"
    NEG = "-inf"

    def __str__(self) -> str:
        return self.value


class Carrier(str, Enum):
    """Kind of carrier set a semiring is defined over."""

    BOOLEAN = "boolean"
    INTEGER = "integer"
    RATIONAL = "rational"
    EXTENDED = "extended-rational"
    FINITE_SET = "finite-set"


class Operation(str, Enum):
    """The two semiring operations."""

    ADD = "add"
    MUL = "mul"


Value = Union[bool, int, Fraction, Infinity, FrozenSet[str]]
Term = Union[str, int, Fraction, Infinity, FrozenSet[str]]

COMPARATORS: Tuple[str, ...] = (">", ">=", "=", "<=", "<", "!>", "!>=", "!=", "!<=", "!<")

# Bound on the growth of printed values under one operation.
ENCODING_SLACK = 3

_NUMBER_RE = re.compile(r"^-?\d+(/\d+)?$")
_SYMBOL_RE = re.compile(r"^[a-z][A-Za-z0-9_]*$")
_SWAPPED = {
    ">": "<", ">=": "<=", "=": "=", "<=": ">=", "<": ">",
    "!>": "!<", "!>=": "!<=", "!=": "!=", "!<=": "!>=", "!<": "!>",
}


def parse_number(text: str) -> Union[int, Fraction, Infinity]:
    """Parse an integer, ``p/q`` rational or ``inf``/``-inf`` literal.

    Args:
        text: The literal text.

    Returns:
        An ``int`` when the value is integral, otherwise a normalized Fraction
        or an Infinity tag.

    Raises:
        ValueParseError: If the text is not a numeric literal.
    """
    text = text.strip()
    if text == "inf":
        return Infinity.POS
    if text == "-inf":
        return Infinity.NEG
    if not _NUMBER_RE.match(text):
        raise ValueParseError(f"malformed numeric literal: {text!r}")
    if "/" in text:
        numerator, denominator = text.split("/")
        if int(denominator) == 0:
            raise ValueParseError(f"zero denominator in literal: {text!r}")
        return to_term(Fraction(int(numerator), int(denominator)))
    return int(text)


def parse_literal(text: str) -> Term:
    """Parse any value literal, including ``{a,b}`` set literals."""
    text = text.strip()
    if text.startswith("{") and text.endswith("}"):
        inner = text[1:-1].strip()
        if not inner:
            return frozenset()
        members = [member.strip() for member in inner.split(",")]
        if not all(_SYMBOL_RE.match(member) for member in members):
            raise ValueParseError(f"malformed set literal: {text!r}")
        return frozenset(members)
    return parse_number(text)


def to_term(value: Value) -> Term:
    """Normalize a semiring value into a ground term usable as an atom argument."""
    if isinstance(value, bool):
        return int(value)
    if isinstance(value, Fraction) and value.denominator == 1:
        return int(value)
    if isinstance(value, set):
        return frozenset(value)
    return value


def format_term(term) -> str:
    """Render a ground term in program syntax."""
    if isinstance(term, bool):
        return "1" if term else "0"
    if isinstance(term, Fraction):
        if term.denominator == 1:
            return str(term.numerator)
        return f"{term.numerator}/{term.denominator}"
    if isinstance(term, Infinity):
        return term.value
    if isinstance(term, (set, frozenset)):
        return "{" + ",".join(sorted(term)) + "}"
    return str(term)


def term_sort_key(term) -> tuple:
    """Total, deterministic sort key over ground terms of mixed kinds."""
    if isinstance(term, str):
        return (0, 0, term)
    if isinstance(term, Infinity):
        return (1, 0 if term is Infinity.NEG else 2, 0)
    if isinstance(term, (int, Fraction)):
        return (1, 1, Fraction(term))
    if isinstance(term, (set, frozenset)):
        return (2, len(term), tuple(sorted(term)))
    return (3, 0, repr(term))


def _as_rational(term) -> Optional[Fraction]:
    if isinstance(term, (int, Fraction)):
        return Fraction(term)
    return None


class SemiringDef(ABC):
    """A named, ordered semiring.

    Subclasses provide the carrier membership test (:meth:`coerce`), the two
    operations, the identities and an order key. The flags describe which
    optional operations exist.
    """

    name: str = ""
    carrier: Carrier = Carrier.INTEGER
    family: str = "numeric"
    has_add_inverse: bool = False
    has_mul_inverse: bool = False
    mul_commutative: bool = True
    idempotent_add: bool = False

    @property
    @abstractmethod
    def zero(self) -> Value:
        """The additive identity e⊕."""

    @property
    @abstractmethod
    def one(self) -> Value:
        """The multiplicative identity e⊗."""

    @abstractmethod
    def add(self, a: Value, b: Value) -> Value:
        """Return a ⊕ b for carrier values."""

    @abstractmethod
    def mul(self, a: Value, b: Value) -> Value:
        """Return a ⊗ b for carrier values."""

    @abstractmethod
    def coerce(self, term) -> Optional[Value]:
        """Return the carrier value denoted by ``term``, or None if it is not one."""

    @abstractmethod
    def key(self, value: Value) -> tuple:
        """Sort key realising the semiring's strict total order."""

    def neg(self, a: Value) -> Value:
        raise UnsupportedOperationError(f"semiring {self.name} has no additive inverse")

    def inv(self, a: Value) -> Value:
        raise UnsupportedOperationError(f"semiring {self.name} has no multiplicative inverse")

    @property
    def signature(self) -> str:
        """The name used in program text, e.g. ``nat`` or ``pset:a,b``."""
        return self.name

    def require(self, value) -> Value:
        """Coerce ``value`` into the carrier or raise CarrierMismatchError."""
        coerced = self.coerce(value)
        if coerced is None:
            raise CarrierMismatchError(
                f"{format_term(value)} is not an element of semiring {self.signature}"
            )
        return coerced

    def contains(self, term) -> bool:
        return self.coerce(term) is not None

    def equal(self, a: Value, b: Value) -> bool:
        return self.key(a) == self.key(b)

    def parse(self, text: str) -> Value:
        value = self.coerce(parse_literal(text))
        if value is None:
            raise ValueParseError(f"{text.strip()!r} is outside the carrier of {self.signature}")
        return value

    def format(self, value: Value) -> str:
        return format_term(to_term(value))

    @property
    def value_sort(self) -> str:
        """Semirings with the same value sort may share a variable."""
        return self.family

    def __eq__(self, other) -> bool:
        return isinstance(other, SemiringDef) and self.signature == other.signature

    def __hash__(self) -> int:
        return hash(self.signature)

    def __repr__(self) -> str:
        return f"<semiring {self.signature}>"


class BooleanSemiring(SemiringDef):
    """𝔹 = ({0,1}, ∨, ∧, 0, 1)."""

    name = "bool"
    carrier = Carrier.BOOLEAN
    idempotent_add = True

    @property
    def zero(self) -> bool:
        return False

    @property
    def one(self) -> bool:
        return True

    def add(self, a, b):
        return a or b

    def mul(self, a, b):
        return a and b

    def coerce(self, term):
        if isinstance(term, bool):
            return term
        rational = _as_rational(term)
        if rational is not None and rational in (0, 1):
            return rational == 1
        return None

    def key(self, value):
        return (int(value),)


class NaturalSemiring(SemiringDef):
    """ℕ with ordinary addition and multiplication."""

    name = "nat"
    carrier = Carrier.INTEGER

    @property
    def zero(self) -> int:
        return 0

    @property
    def one(self) -> int:
        return 1

    def add(self, a, b):
        return a + b

    def mul(self, a, b):
        return a * b

    def coerce(self, term):
        rational = _as_rational(term)
        if rational is None or rational.denominator != 1 or rational < 0:
            return None
        return int(rational)

    def key(self, value):
        return (value,)


class IntegerSemiring(NaturalSemiring):
    """ℤ, the naturals extended with additive inverses."""

    name = "int"
    has_add_inverse = True

    def neg(self, a):
        return -a

    def coerce(self, term):
        rational = _as_rational(term)
        if rational is None or rational.denominator != 1:
            return None
        return int(rational)


class RationalSemiring(SemiringDef):
    """ℚ, a field: both inverses exist (with 0⁻¹ read as 0)."""

    name = "rat"
    carrier = Carrier.RATIONAL
    has_add_inverse = True
    has_mul_inverse = True

    @property
    def zero(self) -> Fraction:
        return Fraction(0)

    @property
    def one(self) -> Fraction:
        return Fraction(1)

    def add(self, a, b):
        return a + b

    def mul(self, a, b):
        return a * b

    def neg(self, a):
        return -a

    def inv(self, a):
        if a == 0:
            return Fraction(0)
        return 1 / a

    def coerce(self, term):
        return _as_rational(term)

    def key(self, value):
        return (value,)


class ExtendedNaturalSemiring(SemiringDef):
    """ℕ∞: naturals plus ∞, with ∞ + n = ∞ and ∞ · m = ∞ for m ≠ 0."""

    name = "nat-inf"
    carrier = Carrier.EXTENDED

    @property
    def zero(self) -> int:
        return 0

    @property
    def one(self) -> int:
        return 1

    def add(self, a, b):
        if a is Infinity.POS or b is Infinity.POS:
            return Infinity.POS
        return a + b

    def mul(self, a, b):
        if a == 0 or b == 0:
            return 0
        if a is Infinity.POS or b is Infinity.POS:
            return Infinity.POS
        return a * b

    def coerce(self, term):
        if term is Infinity.POS:
            return term
        return NAT.coerce(term)

    def key(self, value):
        if value is Infinity.POS:
            return (1, 0)
        return (0, value)


class MaxTropicalSemiring(SemiringDef):
    """𝓡_max = (ℚ ∪ {±∞}, max, +, −∞, 0).

    −∞ annihilates under ⊗ even against +∞. The multiplicative inverse is
    negation; −∞ maps to itself and +∞ has none.
    """

    name = "maxtrop"
    carrier = Carrier.EXTENDED
    has_mul_inverse = True
    idempotent_add = True

    @property
    def zero(self):
        return Infinity.NEG

    @property
    def one(self):
        return Fraction(0)

    def add(self, a, b):
        return a if self.key(a) >= self.key(b) else b

    def mul(self, a, b):
        if a is Infinity.NEG or b is Infinity.NEG:
            return Infinity.NEG
        if a is Infinity.POS or b is Infinity.POS:
            return Infinity.POS
        return a + b

    def inv(self, a):
        if a is Infinity.NEG:
            return Infinity.NEG
        if a is Infinity.POS:
            raise UnsupportedOperationError("+inf has no inverse in maxtrop")
        return -a

    def coerce(self, term):
        if isinstance(term, Infinity):
            return term
        return _as_rational(term)

    def key(self, value):
        if value is Infinity.NEG:
            return (0, 0)
        if value is Infinity.POS:
            return (2, 0)
        return (1, value)


class PowersetSemiring(SemiringDef):
    """2^A = (subsets of A, ∪, ∩, ∅, A) over a finite universe of symbols.

    Sets are ordered by cardinality, ties broken lexicographically on the
    sorted members.
    """

    name = "pset"
    carrier = Carrier.FINITE_SET
    family = "set"
    idempotent_add = True

    def __init__(self, universe: Iterable[str]):
        self.universe: FrozenSet[str] = frozenset(universe)

    @property
    def signature(self) -> str:
        return "pset:" + ",".join(sorted(self.universe))

    @property
    def value_sort(self) -> str:
        return self.signature

    @property
    def zero(self):
        return frozenset()

    @property
    def one(self):
        return self.universe

    def add(self, a, b):
        return a | b

    def mul(self, a, b):
        return a & b

    def coerce(self, term):
        if isinstance(term, (set, frozenset)) and all(isinstance(m, str) for m in term):
            members = frozenset(term)
            if members <= self.universe:
                return members
        return None

    def key(self, value):
        return (len(value), tuple(sorted(value)))


BOOL = BooleanSemiring()
NAT = NaturalSemiring()
INT = IntegerSemiring()
RAT = RationalSemiring()
NAT_INF = ExtendedNaturalSemiring()
MAXTROP = MaxTropicalSemiring()

BUILTIN_SEMIRINGS: Dict[str, SemiringDef] = {
    s.name: s for s in (BOOL, NAT, INT, RAT, NAT_INF, MAXTROP)
}


def get_semiring(name: str, universe: Optional[Iterable[str]] = None) -> SemiringDef:
    """Resolve a semiring by its program-text name.

    Args:
        name: A built-in name, ``pset`` or ``pset:a,b,c``.
        universe: Universe for ``pset`` when not given inline.

    Returns:
        The semiring definition.

    Raises:
        UnknownSemiringError: If the name does not denote a built-in semiring.
    """
    name = name.strip()
    if name in BUILTIN_SEMIRINGS:
        return BUILTIN_SEMIRINGS[name]
    if name == "pset" or name.startswith("pset:"):
        members = [m for m in name[5:].split(",") if m] if ":" in name else []
        members.extend(universe or ())
        if not all(_SYMBOL_RE.match(member) for member in members):
            raise UnknownSemiringError(f"malformed powerset universe in {name!r}")
        return PowersetSemiring(members)
    raise UnknownSemiringError(f"unknown semiring {name!r}")


def combine(s: SemiringDef, op: Union[Operation, str], a, b) -> Value:
    """Return ``a ⊕ b`` or ``a ⊗ b`` in semiring ``s``.

    Raises:
        CarrierMismatchError: If an operand is not a carrier value.
    """
    a, b = s.require(a), s.require(b)
    if Operation(op) is Operation.ADD:
        return s.add(a, b)
    return s.mul(a, b)


def invert(s: SemiringDef, op: Union[Operation, str], a) -> Value:
    """Return ``−a`` or ``a⁻¹``; the inverse of e⊕ under ⊗ is e⊕.

    Raises:
        UnsupportedOperationError: If ``s`` lacks the requested inverse.
    """
    a = s.require(a)
    if Operation(op) is Operation.ADD:
        if not s.has_add_inverse:
            raise UnsupportedOperationError(f"semiring {s.signature} has no additive inverse")
        return s.neg(a)
    if not s.has_mul_inverse:
        raise UnsupportedOperationError(f"semiring {s.signature} has no multiplicative inverse")
    if s.equal(a, s.zero):
        return s.zero
    return s.inv(a)


def compare(s: SemiringDef, a, b) -> int:
    """Three-way comparison under the semiring's order: -1, 0 or 1."""
    ka, kb = s.key(s.require(a)), s.key(s.require(b))
    return (ka > kb) - (ka < kb)


def holds(s: SemiringDef, cmp: str, k, value) -> bool:
    """Decide ``k cmp value`` for one of the ten comparators."""
    c = compare(s, k, value)
    negated = cmp.startswith("!")
    base = cmp[1:] if negated else cmp
    if base == "=":
        result = c == 0
    elif base == ">":
        result = c > 0
    elif base == ">=":
        result = c >= 0
    elif base == "<":
        result = c < 0
    elif base == "<=":
        result = c <= 0
    else:
        raise ValueError(f"unknown comparator {cmp!r}")
    return not result if negated else result


def swap_comparator(cmp: str) -> str:
    """Comparator ``c'`` with ``a c b`` iff ``b c' a``."""
    return _SWAPPED[cmp]


def parse_value(s: SemiringDef, text: str) -> Value:
    """Parse a value literal of semiring ``s``."""
    return s.parse(text)


def format_value(s: SemiringDef, value) -> str:
    return s.format(s.require(value))


def encoding_length(s: SemiringDef, value) -> int:
    """Length of the printed encoding of ``value``."""
    return len(format_value(s, value))


def sum_values(s: SemiringDef, values: Iterable) -> Value:
    return reduce(s.add, (s.require(v) for v in values), s.zero)


def product_values(s: SemiringDef, values: Iterable) -> Value:
    return reduce(s.mul, (s.require(v) for v in values), s.one)
