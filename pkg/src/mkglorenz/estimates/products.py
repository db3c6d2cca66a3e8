"""Decision procedure for product exponent matrices.

An exponent matrix ``(s0, s1, s2; b0, b1, b2)`` is a *product* when the
bilinear estimate

    ||u v||_{H^{-s0,-b0}} <= C ||u||_{H^{s1,b1}} ||v||_{H^{s2,b2}}

holds for all Schwartz functions on ``R^{1+3}``. Products are closed under
column permutations. For matrices with ``b0 = 0`` a sufficient set of ten
inequalities and seven exception clauses decides the question; this module
evaluates them in exact rational arithmetic, trying every column permutation
that moves a zero ``b`` entry into slot 0.

Condition identifiers
---------------------
``C1`` ... ``C10`` are the ten inequalities, ``X1a``, ``X1b``, ``X2a``,
``X2b``, ``X3``, ``X4``, ``X5`` the exception clauses. Each carries a
human-readable statement in :data:`CONDITION_TEXT`.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable

from ..errors import FixtureParseError

__all__ = [
    "ExponentMatrix",
    "ConditionResult",
    "CheckReport",
    "CONDITION_TEXT",
    "is_product",
    "evaluate_conditions",
    "parse_matrix",
    "parse_fixture_text",
    "load_fixture",
    "FixtureEntry",
    "bundled_fixture",
    "all_column_orders",
]

HALF = Fraction(1, 2)

CONDITION_TEXT = {
    "C1": "b1 > 0 and b2 > 0",
    "C2": "b1 + b2 >= 1/2",
    "C3": "s0 + s1 + s2 >= 2 - (b1 + b2)",
    "C4": "s0 + s1 + s2 >= 3/2 - b1",
    "C5": "s0 + s1 + s2 >= 3/2 - b2",
    "C6": "s0 + s1 + s2 >= 1",
    "C7": "s0 + 2(s1 + s2) >= 3/2",
    "C8": "s1 + s2 >= 0",
    "C9": "s0 + s2 >= 0",
    "C10": "s0 + s1 >= 0",
    "X1a": "if b1 = 1/2 then C3 and C5 are strict",
    "X1b": "if b1 = 1/2 then C4 and C6 are strict",
    "X2a": "if b2 = 1/2 then C3 and C4 are strict",
    "X2b": "if b2 = 1/2 then C5 and C6 are strict",
    "X3": "if b1 + b2 = 1 then C3 and C6 are strict",
    "X4": "C7 is strict if s0 is one of 1/2, 3/2, 3/2 - 2 b1, 3/2 - 2 b2, 5/2 - 2(b1 + b2)",
    "X5": "if one of C3-C6 is an equality then C8-C10 are strict",
}


def _frac(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        # floats are accepted only through their shortest decimal representation
        return Fraction(repr(value))
    return Fraction(value)


@dataclass(frozen=True)
class ExponentMatrix:
    """Exponent matrix ``(s0 s1 s2 ; b0 b1 b2)`` with exact rational entries.

    Column ``j`` is the pair ``(s_j, b_j)``; column 0 belongs to the product
    ``uv`` and columns 1, 2 to the factors. Entries are converted to
    :class:`fractions.Fraction`; strings such as ``"3/2"`` are accepted.
    """

    s0: Fraction
    s1: Fraction
    s2: Fraction
    b0: Fraction
    b1: Fraction
    b2: Fraction

    def __post_init__(self):
        for name in ("s0", "s1", "s2", "b0", "b1", "b2"):
            object.__setattr__(self, name, _frac(getattr(self, name)))

    @classmethod
    def from_columns(cls, columns) -> "ExponentMatrix":
        """Build from three ``(s, b)`` pairs."""
        (s0, b0), (s1, b1), (s2, b2) = columns
        return cls(s0, s1, s2, b0, b1, b2)

    @property
    def columns(self) -> tuple[tuple[Fraction, Fraction], ...]:
        return ((self.s0, self.b0), (self.s1, self.b1), (self.s2, self.b2))

    def permuted(self, order) -> "ExponentMatrix":
        """Matrix whose column ``j`` is column ``order[j]`` of this one."""
        cols = self.columns
        return ExponentMatrix.from_columns([cols[i] for i in order])

    def as_tuple(self) -> tuple[Fraction, ...]:
        return (self.s0, self.s1, self.s2, self.b0, self.b1, self.b2)

    def __str__(self) -> str:
        return " ".join(str(v) for v in self.as_tuple())


@dataclass(frozen=True)
class ConditionResult:
    """Outcome of one inequality or exception clause.

    Attributes
    ----------
    id : str
        Condition identifier (see :data:`CONDITION_TEXT`).
    satisfied : bool
    note : str
        ``"equality"``, ``"strict"``, ``"violated"``, ``"not applicable"`` or
        ``"strict required"`` (exceptions that apply and hold).
    """

    id: str
    satisfied: bool
    note: str

    @property
    def text(self) -> str:
        return CONDITION_TEXT[self.id]


@dataclass
class CheckReport:
    """Verdict of :func:`is_product`.

    Attributes
    ----------
    verdict : str
        ``"product"``, ``"rejected"`` or ``"out_of_scope"``.
    conditions : list of ConditionResult
        Results for the permutation reported in ``permutation_used`` (the
        accepting one, or the one with fewest violations). Empty when out of
        scope.
    permutation_used : tuple of int or None
        Column order: slot ``j`` holds input column ``permutation_used[j]``.
    """

    verdict: str
    conditions: list[ConditionResult] = field(default_factory=list)
    permutation_used: tuple[int, int, int] | None = None

    @property
    def violated(self) -> list[str]:
        """Identifiers of the conditions that fail."""
        return [c.id for c in self.conditions if not c.satisfied]

    @property
    def accepted(self) -> bool:
        return self.verdict == "product"


def _ineq(cid: str, lhs: Fraction, rhs: Fraction) -> ConditionResult:
    if lhs > rhs:
        return ConditionResult(cid, True, "strict")
    if lhs == rhs:
        return ConditionResult(cid, True, "equality")
    return ConditionResult(cid, False, "violated")


def _exception(cid: str, applies: bool, required: Iterable[ConditionResult]) -> ConditionResult:
    if not applies:
        return ConditionResult(cid, True, "not applicable")
    ok = all(r.note == "strict" for r in required)
    return ConditionResult(cid, ok, "strict required" if ok else "violated")


def evaluate_conditions(M: ExponentMatrix) -> list[ConditionResult]:
    """Evaluate all seventeen clauses for ``M`` taken as is (``b0`` ignored).

    Parameters
    ----------
    M : ExponentMatrix
        Matrix in the normalized orientation, i.e. ``b0 = 0`` is assumed.

    Returns
    -------
    list of ConditionResult
        ``C1`` ... ``C10`` followed by the exception clauses.
    """
    s0, s1, s2, _, b1, b2 = M.as_tuple()
    S = s0 + s1 + s2
    c = {}
    c["C1"] = ConditionResult("C1", b1 > 0 and b2 > 0, "strict" if b1 > 0 and b2 > 0 else "violated")
    c["C2"] = _ineq("C2", b1 + b2, HALF)
    c["C3"] = _ineq("C3", S, 2 - (b1 + b2))
    c["C4"] = _ineq("C4", S, Fraction(3, 2) - b1)
    c["C5"] = _ineq("C5", S, Fraction(3, 2) - b2)
    c["C6"] = _ineq("C6", S, Fraction(1))
    c["C7"] = _ineq("C7", s0 + 2 * (s1 + s2), Fraction(3, 2))
    c["C8"] = _ineq("C8", s1 + s2, Fraction(0))
    c["C9"] = _ineq("C9", s0 + s2, Fraction(0))
    c["C10"] = _ineq("C10", s0 + s1, Fraction(0))
    exceptional_s0 = {
        HALF,
        Fraction(3, 2),
        Fraction(3, 2) - 2 * b1,
        Fraction(3, 2) - 2 * b2,
        Fraction(5, 2) - 2 * (b1 + b2),
    }
    boundary = any(c[k].note == "equality" for k in ("C3", "C4", "C5", "C6"))
    x = [
        _exception("X1a", b1 == HALF, (c["C3"], c["C5"])),
        _exception("X1b", b1 == HALF, (c["C4"], c["C6"])),
        _exception("X2a", b2 == HALF, (c["C3"], c["C4"])),
        _exception("X2b", b2 == HALF, (c["C5"], c["C6"])),
        _exception("X3", b1 + b2 == 1, (c["C3"], c["C6"])),
        _exception("X4", s0 in exceptional_s0, (c["C7"],)),
        _exception("X5", boundary, (c["C8"], c["C9"], c["C10"])),
    ]
    return list(c.values()) + x


def _candidate_orders(M: ExponentMatrix) -> list[tuple[int, int, int]]:
    orders = []
    for j, (_, b) in enumerate(M.columns):
        if b == 0:
            rest = [i for i in range(3) if i != j]
            orders.append((j, rest[0], rest[1]))
            orders.append((j, rest[1], rest[0]))
    return orders


def is_product(M: ExponentMatrix) -> CheckReport:
    """Decide whether ``M`` is a product by the sufficient conditions.

    Every column permutation that puts a zero ``b`` entry in slot 0 is tried,
    identity-like orders first. The verdict is ``"product"`` if some
    permutation satisfies all clauses, ``"rejected"`` if none does, and
    ``"out_of_scope"`` if no ``b`` entry vanishes.

    Examples
    --------
    >>> from fractions import Fraction as F
    >>> is_product(ExponentMatrix(0, 0, 0, 0, F(3, 5), F(3, 5))).violated
    ['C6']
    """
    orders = _candidate_orders(M)
    if not orders:
        return CheckReport("out_of_scope")
    best = None
    for order in orders:
        conds = evaluate_conditions(M.permuted(order))
        failures = sum(not c.satisfied for c in conds)
        if failures == 0:
            return CheckReport("product", conds, order)
        if best is None or failures < best[0]:
            best = (failures, conds, order)
    return CheckReport("rejected", best[1], best[2])


# ---------------------------------------------------------------- fixtures


@dataclass(frozen=True)
class FixtureEntry:
    """One parsed fixture line.

    Attributes
    ----------
    matrix : ExponentMatrix
    line : int
        1-based line number in the source.
    comment : str
        Trailing ``#`` comment, stripped (empty when absent).
    """

    matrix: ExponentMatrix
    line: int
    comment: str = ""

    @property
    def expected(self) -> str | None:
        """Condition id named by an ``expect=<id>`` token in the comment."""
        for token in self.comment.split():
            if token.startswith("expect="):
                return token.split("=", 1)[1]
        return None


def parse_matrix(text: str, line: int | None = None) -> ExponentMatrix:
    """Parse six whitespace-separated rationals ``s0 s1 s2 b0 b1 b2``.

    Raises
    ------
    FixtureParseError
        On a wrong token count or a token that is not a rational.
    """
    tokens = text.split()
    if len(tokens) != 6:
        raise FixtureParseError(f"expected 6 rationals, found {len(tokens)}", line)
    values = []
    for tok in tokens:
        try:
            values.append(Fraction(tok))
        except (ValueError, ZeroDivisionError):
            raise FixtureParseError(f"not a rational: {tok!r}", line) from None
    return ExponentMatrix(*values)


def parse_fixture_text(text: str) -> list[FixtureEntry]:
    """Parse fixture text: one matrix per line, ``#`` starts a comment."""
    entries = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body, _, comment = raw.partition("#")
        if not body.strip():
            continue
        entries.append(FixtureEntry(parse_matrix(body, lineno), lineno, comment.strip()))
    return entries


def load_fixture(path) -> list[FixtureEntry]:
    """Read and parse a fixture file."""
    return parse_fixture_text(Path(path).read_text())


def bundled_fixture(name: str) -> Path:
    """Path of a fixture shipped with the package (``known_products`` or ``mutations``)."""
    path = Path(__file__).parent / "data" / f"{name}.txt"
    if not path.exists():
        raise FileNotFoundError(path)
    return path


def all_column_orders() -> list[tuple[int, int, int]]:
    """The six column permutations, identity first."""
    return list(itertools.permutations(range(3)))
