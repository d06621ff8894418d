"""Built-in lattice value types for replica reconciliation.

Four variants, each with an associative/commutative/idempotent merge and the
matching partial order:

* ``GSet``   -- grow-only set of scalar values, merge = union
* ``MaxInt`` -- integer, merge = max
* ``BoolOr`` -- boolean, merge = or
* ``TwoPSet`` -- pair of grow-only sets (added, tombstoned); an element that
  has ever been tombstoned is permanently hidden from the visible view

Lattice values may appear as fact arguments in persisted relations only.
When a derived fact matches an existing fact on every non-lattice column,
the stored fact is replaced by the column-wise merge (see transducer).

Textual literals used in fixtures and programs::

    gset{a, b}    maxint(5)    boolor(true)    2p{added:{a, b}, tomb:{b}}
"""

from __future__ import annotations

from dataclasses import dataclass

from .values import value_sort_key


class LatticeTypeError(TypeError):
    """merge/leq applied across different lattice variants."""


@dataclass(frozen=True, slots=True)
class GSet:
    elems: frozenset

    def sort_key(self):
        return (4, "gset", tuple(sorted((value_sort_key(e) for e in self.elems))))

    def __str__(self) -> str:
        inner = ", ".join(str(e) for e in sorted(self.elems, key=value_sort_key))
        return "gset{%s}" % inner


@dataclass(frozen=True, slots=True)
class MaxInt:
    value: int

    def sort_key(self):
        return (4, "maxint", (self.value,))

    def __str__(self) -> str:
        return f"maxint({self.value})"


@dataclass(frozen=True, slots=True)
class BoolOr:
    value: bool

    def sort_key(self):
        return (4, "boolor", (self.value,))

    def __str__(self) -> str:
        return "boolor(%s)" % ("true" if self.value else "false")


@dataclass(frozen=True, slots=True)
class TwoPSet:
    added: frozenset
    tombstoned: frozenset

    def sort_key(self):
        return (
            4,
            "2p",
            (
                tuple(sorted(value_sort_key(e) for e in self.added)),
                tuple(sorted(value_sort_key(e) for e in self.tombstoned)),
            ),
        )

    def __str__(self) -> str:
        a = ", ".join(str(e) for e in sorted(self.added, key=value_sort_key))
        t = ", ".join(str(e) for e in sorted(self.tombstoned, key=value_sort_key))
        return "2p{added:{%s}, tomb:{%s}}" % (a, t)


LatticeValue = GSet | MaxInt | BoolOr | TwoPSet

VARIANT_NAMES = {GSet: "gset", MaxInt: "maxint", BoolOr: "boolor", TwoPSet: "2p"}
VARIANT_BY_NAME = {v: k for k, v in VARIANT_NAMES.items()}


def is_lattice(v) -> bool:
    return isinstance(v, (GSet, MaxInt, BoolOr, TwoPSet))


def variant_name(v) -> str:
    return VARIANT_NAMES[type(v)]


def _require_same_variant(a, b) -> None:
    if type(a) is not type(b):
        raise LatticeTypeError(
            f"cannot combine lattice variants {variant_name(a)} and {variant_name(b)}"
        )


def merge(a: LatticeValue, b: LatticeValue) -> LatticeValue:
    """Least upper bound of two lattice values of the same variant."""
    _require_same_variant(a, b)
    if isinstance(a, GSet):
        return GSet(a.elems | b.elems)
    if isinstance(a, MaxInt):
        return MaxInt(max(a.value, b.value))
    if isinstance(a, BoolOr):
        return BoolOr(a.value or b.value)
    return TwoPSet(a.added | b.added, a.tombstoned | b.tombstoned)


def leq(a: LatticeValue, b: LatticeValue) -> bool:
    """True iff ``a`` is below-or-equal ``b`` in the variant's partial order."""
    _require_same_variant(a, b)
    if isinstance(a, GSet):
        return a.elems <= b.elems
    if isinstance(a, MaxInt):
        return a.value <= b.value
    if isinstance(a, BoolOr):
        return (not a.value) or b.value
    return a.added <= b.added and a.tombstoned <= b.tombstoned


def twopset_visible(s: TwoPSet) -> GSet:
    """Elements added and never tombstoned. Tombstoning is permanent."""
    return GSet(s.added - s.tombstoned)
