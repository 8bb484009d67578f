"""Domain model for daycare markets with sibling applicants.

A market consists of families (each an ordered list of children plus a
strict preference list over *tuples* of daycares, one slot per child),
and daycares (each a quota plus a strict priority list over the children
it finds acceptable).  The reserved daycare id ``d0`` is the dummy that
represents being unmatched: it has unlimited quota, accepts every child,
and must exist in every instance.

Preference semantics, used by every other module:

* an earlier tuple in a family's list is strictly preferred to a later one;
* every listed tuple is strictly preferred to the all-dummy tuple;
* the all-dummy tuple is strictly preferred to any unlisted tuple
  (unlisted tuples are never produced by algorithms).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Mapping

DUMMY_ID = "d0"

__all__ = [
    "DUMMY_ID",
    "Daycare",
    "Family",
    "Instance",
    "InstanceError",
    "Matching",
    "MatchingError",
    "dump_instance",
    "dump_matching",
    "family_assignment",
    "is_feasible",
    "is_individually_rational",
    "load_instance",
    "load_matching",
]


class InstanceError(ValueError):
    """Instance data violates the schema or a model invariant."""


class MatchingError(ValueError):
    """Matching data is not a total, well-referenced assignment."""


@dataclass(frozen=True)
class Family:
    """A family: ordered sibling list plus preferences over daycare tuples.

    ``children`` is the predefined sibling order; position ``i`` of every
    preference tuple names the daycare requested for ``children[i]``.
    """

    id: str
    children: tuple[str, ...]
    preferences: tuple[tuple[str, ...], ...]

    @property
    def size(self) -> int:
        return len(self.children)

    @property
    def all_dummy(self) -> tuple[str, ...]:
        """The tuple meaning every child of this family is unmatched."""
        return (DUMMY_ID,) * len(self.children)

    def tuple_rank(self, tup: tuple[str, ...]) -> int:
        """Rank of ``tup`` in this family's preference order, lower is better.

        Listed tuples rank by position; the all-dummy tuple ranks just
        below the last listed tuple; anything else ranks below that.
        """
        try:
            return self.preferences.index(tuple(tup))
        except ValueError:
            n = len(self.preferences)
            return n if tuple(tup) == self.all_dummy else n + 1

    def prefers(self, a: tuple[str, ...], b: tuple[str, ...]) -> bool:
        """True if this family strictly prefers tuple ``a`` to tuple ``b``."""
        return self.tuple_rank(a) < self.tuple_rank(b)


@dataclass(frozen=True)
class Daycare:
    """A daycare: quota plus a strict priority list of acceptable children.

    ``quota`` is ``None`` only for the dummy daycare (unlimited).  A child
    absent from ``priority`` is unacceptable; the dummy accepts everyone.
    """

    id: str
    quota: int | None
    priority: tuple[str, ...]

    @property
    def unlimited(self) -> bool:
        return self.quota is None


class Instance:
    """A validated daycare market.

    Construction checks every model invariant and precomputes the lookup
    tables used by the stability predicates and the algorithms: family and
    daycare indexes, the child-to-family map, and per-daycare priority
    rank maps.  Instances are immutable by convention; all contained
    collections are tuples.
    """

    def __init__(
        self,
        families: Iterable[Family],
        daycares: Iterable[Daycare],
        meta: Mapping | None = None,
    ):
        self.families: tuple[Family, ...] = tuple(families)
        self.daycares: tuple[Daycare, ...] = tuple(daycares)
        self.meta: dict = dict(meta) if meta else {}

        self.families_by_id: dict[str, Family] = {}
        for fam in self.families:
            if fam.id in self.families_by_id:
                raise InstanceError(f"families: duplicate family id {fam.id!r}")
            self.families_by_id[fam.id] = fam

        self.daycares_by_id: dict[str, Daycare] = {}
        for dc in self.daycares:
            if dc.id in self.daycares_by_id:
                raise InstanceError(f"daycares: duplicate daycare id {dc.id!r}")
            self.daycares_by_id[dc.id] = dc

        if DUMMY_ID not in self.daycares_by_id:
            raise InstanceError(f"daycares: missing dummy daycare {DUMMY_ID!r}")

        self.family_of: dict[str, str] = {}
        children: list[tuple[str, str]] = []
        for fam in self.families:
            if not fam.children:
                raise InstanceError(f"families[{fam.id}].children: empty")
            for child in fam.children:
                if child in self.family_of:
                    raise InstanceError(
                        f"families[{fam.id}].children: child {child!r} "
                        "already belongs to another family"
                    )
                self.family_of[child] = fam.id
                children.append((child, fam.id))
        self.children: tuple[tuple[str, str], ...] = tuple(children)

        for fam in self.families:
            seen: set[tuple[str, ...]] = set()
            for j, tup in enumerate(fam.preferences):
                path = f"families[{fam.id}].preferences[{j}]"
                if len(tup) != len(fam.children):
                    raise InstanceError(
                        f"{path}: tuple length {len(tup)} != "
                        f"family size {len(fam.children)}"
                    )
                if tup in seen:
                    raise InstanceError(f"{path}: duplicate tuple {tup!r}")
                seen.add(tup)
                for d in tup:
                    if d not in self.daycares_by_id:
                        raise InstanceError(f"{path}: unknown daycare {d!r}")

        self.rank: dict[str, dict[str, int]] = {}
        for dc in self.daycares:
            path = f"daycares[{dc.id}]"
            if dc.unlimited and dc.id != DUMMY_ID:
                raise InstanceError(f"{path}.quota: only {DUMMY_ID!r} may be unlimited")
            if dc.quota is not None and dc.quota < 0:
                raise InstanceError(f"{path}.quota: negative quota {dc.quota}")
            ranks: dict[str, int] = {}
            for i, child in enumerate(dc.priority):
                if child in ranks:
                    raise InstanceError(f"{path}.priority: duplicate child {child!r}")
                if child not in self.family_of:
                    raise InstanceError(f"{path}.priority: unknown child {child!r}")
                ranks[child] = i
            self.rank[dc.id] = ranks

        # F^S / F^O partition, in family-id order (the canonical scan order).
        self.sibling_families: tuple[str, ...] = tuple(
            sorted(f.id for f in self.families if f.size > 1)
        )
        self.singleton_families: tuple[str, ...] = tuple(
            sorted(f.id for f in self.families if f.size == 1)
        )
        self.families_in_id_order: tuple[Family, ...] = tuple(
            self.families_by_id[fid] for fid in sorted(self.families_by_id)
        )
        self.family_members: dict[str, frozenset[str]] = {
            f.id: frozenset(f.children) for f in self.families
        }
        self.quota: dict[str, int | None] = {d.id: d.quota for d in self.daycares}

    @property
    def num_children(self) -> int:
        return len(self.children)

    @property
    def num_daycares(self) -> int:
        return len(self.daycares)

    @property
    def dummy(self) -> Daycare:
        return self.daycares_by_id[DUMMY_ID]

    def is_acceptable(self, daycare_id: str, child: str) -> bool:
        """True if the daycare ranks the child (the dummy accepts all)."""
        if daycare_id == DUMMY_ID:
            return True
        return child in self.rank[daycare_id]

    def __repr__(self) -> str:
        return (
            f"Instance({len(self.families)} families, "
            f"{len(self.children)} children, {len(self.daycares)} daycares)"
        )


class Matching:
    """A total assignment of children to daycares.

    Unmatched children are assigned the dummy daycare, so the map is
    total by construction.  The daycare-side view is derived and kept
    consistent: ``child in roster(d)`` iff ``assignment[child] == d``.
    Value semantics: equality compares assignments only.
    """

    def __init__(self, instance: Instance, assignment: Mapping[str, str]):
        known = instance.family_of
        for child, d in assignment.items():
            if child not in known:
                raise MatchingError(f"assignment: unknown child {child!r}")
            if d not in instance.daycares_by_id:
                raise MatchingError(f"assignment[{child}]: unknown daycare {d!r}")
        missing = [c for c, _ in instance.children if c not in assignment]
        if missing:
            raise MatchingError(f"assignment: missing children {missing}")
        self._assignment: dict[str, str] = {
            child: assignment[child] for child, _ in instance.children
        }
        self._rosters: dict[str, frozenset[str]] | None = None

    @classmethod
    def all_unmatched(cls, instance: Instance) -> "Matching":
        return cls(instance, {c: DUMMY_ID for c, _ in instance.children})

    @property
    def assignment(self) -> dict[str, str]:
        return dict(self._assignment)

    def __getitem__(self, child: str) -> str:
        return self._assignment[child]

    def roster(self, daycare_id: str) -> frozenset[str]:
        """Children assigned to a daycare (empty for unknown ids)."""
        if self._rosters is None:
            rosters: dict[str, set[str]] = {}
            for child, d in self._assignment.items():
                rosters.setdefault(d, set()).add(child)
            self._rosters = {d: frozenset(cs) for d, cs in rosters.items()}
        return self._rosters.get(daycare_id, frozenset())

    def family_tuple(self, family: Family) -> tuple[str, ...]:
        """Assigned daycares in the family's sibling order."""
        return tuple(self._assignment[c] for c in family.children)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Matching):
            return NotImplemented
        return self._assignment == other._assignment

    def __repr__(self) -> str:
        matched = sum(1 for d in self._assignment.values() if d != DUMMY_ID)
        return f"Matching({matched}/{len(self._assignment)} matched)"


def family_assignment(matching: Matching, family: Family) -> tuple[str, ...]:
    """The tuple of daycares assigned to a family, in sibling order."""
    return matching.family_tuple(family)


def is_feasible(instance: Instance, matching: Matching) -> bool:
    """True iff no daycare exceeds its quota (unlimited never can)."""
    for dc in instance.daycares:
        if dc.quota is not None and len(matching.roster(dc.id)) > dc.quota:
            return False
    return True


def is_individually_rational(instance: Instance, matching: Matching) -> bool:
    """True iff every family holds a listed tuple or is fully unmatched,
    and no daycare hosts a child absent from its priority list."""
    for fam in instance.families:
        tup = matching.family_tuple(fam)
        if tup != fam.all_dummy and tup not in fam.preferences:
            return False
    for child, d in matching._assignment.items():
        if d != DUMMY_ID and not instance.is_acceptable(d, child):
            return False
    return True


# ---------------------------------------------------------------------------
# JSON serialisation.
#
# Instance schema:
#   {"families": [{"id": str, "children": [str, ...],
#                  "preferences": [[str, ...], ...]}, ...],
#    "daycares": [{"id": str, "quota": int | null, "priority": [str, ...]}, ...],
#    "meta": {...}}
# quota null means unlimited and is permitted only for "d0".
#
# Matching schema: {"assignment": {child: daycare, ...}}
# ---------------------------------------------------------------------------


def _expect(cond: bool, path: str, msg: str) -> None:
    if not cond:
        raise InstanceError(f"{path}: {msg}")


def load_instance(data: bytes | str | Mapping) -> Instance:
    """Parse and validate an instance from JSON text or a parsed mapping.

    Raises :class:`InstanceError` naming the offending path on schema
    violations, dangling references, duplicate ids, or a missing dummy.
    """
    if isinstance(data, (bytes, str)):
        try:
            data = json.loads(data)
        except json.JSONDecodeError as exc:
            raise InstanceError(f"$: invalid JSON ({exc})") from exc
    _expect(isinstance(data, Mapping), "$", "expected a JSON object")
    _expect("families" in data, "$", "missing key 'families'")
    _expect("daycares" in data, "$", "missing key 'daycares'")

    families = []
    for idx, raw in enumerate(data["families"]):
        path = f"families[{idx}]"
        _expect(isinstance(raw, Mapping), path, "expected an object")
        for key in ("id", "children", "preferences"):
            _expect(key in raw, path, f"missing key {key!r}")
        children = raw["children"]
        _expect(
            isinstance(children, list) and all(isinstance(c, str) for c in children),
            f"{path}.children",
            "expected a list of strings",
        )
        prefs = raw["preferences"]
        _expect(isinstance(prefs, list), f"{path}.preferences", "expected a list")
        tuples = []
        for j, tup in enumerate(prefs):
            _expect(
                isinstance(tup, list) and all(isinstance(d, str) for d in tup),
                f"{path}.preferences[{j}]",
                "expected a list of daycare ids",
            )
            tuples.append(tuple(tup))
        families.append(
            Family(id=raw["id"], children=tuple(children), preferences=tuple(tuples))
        )

    daycares = []
    for idx, raw in enumerate(data["daycares"]):
        path = f"daycares[{idx}]"
        _expect(isinstance(raw, Mapping), path, "expected an object")
        for key in ("id", "quota", "priority"):
            _expect(key in raw, path, f"missing key {key!r}")
        quota = raw["quota"]
        _expect(
            quota is None or (isinstance(quota, int) and not isinstance(quota, bool)),
            f"{path}.quota",
            "expected an integer or null",
        )
        priority = raw["priority"]
        _expect(
            isinstance(priority, list) and all(isinstance(c, str) for c in priority),
            f"{path}.priority",
            "expected a list of strings",
        )
        daycares.append(Daycare(id=raw["id"], quota=quota, priority=tuple(priority)))

    return Instance(families, daycares, meta=data.get("meta") or {})


def instance_to_dict(instance: Instance) -> dict:
    return {
        "families": [
            {
                "id": f.id,
                "children": list(f.children),
                "preferences": [list(t) for t in f.preferences],
            }
            for f in instance.families
        ],
        "daycares": [
            {"id": d.id, "quota": d.quota, "priority": list(d.priority)}
            for d in instance.daycares
        ],
        "meta": instance.meta,
    }


def dump_instance(instance: Instance) -> str:
    """Canonical JSON text; byte-identical for equal instances."""
    return json.dumps(instance_to_dict(instance), sort_keys=True, indent=None)


def load_matching(data: bytes | str | Mapping, instance: Instance) -> Matching:
    if isinstance(data, (bytes, str)):
        try:
            data = json.loads(data)
        except json.JSONDecodeError as exc:
            raise MatchingError(f"$: invalid JSON ({exc})") from exc
    if not isinstance(data, Mapping) or "assignment" not in data:
        raise MatchingError("$: expected an object with key 'assignment'")
    return Matching(instance, data["assignment"])


def dump_matching(matching: Matching) -> str:
    return json.dumps({"assignment": matching.assignment}, sort_keys=True)
