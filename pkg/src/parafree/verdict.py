"""Three-valued determinations and aggregated verdicts."""

from dataclasses import dataclass, field
from enum import Enum

from .errors import InvariantViolation


class Tri(Enum):
    YES = "yes"
    NO = "no"
    UNKNOWN = "unknown"

    def __and__(self, other: "Tri") -> "Tri":
        if Tri.NO in (self, other):
            return Tri.NO
        if Tri.UNKNOWN in (self, other):
            return Tri.UNKNOWN
        return Tri.YES

    def __or__(self, other: "Tri") -> "Tri":
        if Tri.YES in (self, other):
            return Tri.YES
        if Tri.UNKNOWN in (self, other):
            return Tri.UNKNOWN
        return Tri.NO


def tri_all(values) -> Tri:
    out = Tri.YES
    for v in values:
        out &= v
    return out


def tri_any(values) -> Tri:
    out = Tri.NO
    for v in values:
        out |= v
    return out


@dataclass(frozen=True)
class Determination:
    value: Tri
    evidence: dict = field(default_factory=dict)

    @classmethod
    def yes(cls, **evidence):
        return cls(Tri.YES, evidence)

    @classmethod
    def no(cls, **evidence):
        return cls(Tri.NO, evidence)

    @classmethod
    def unknown(cls, **evidence):
        return cls(Tri.UNKNOWN, evidence)

    def to_json(self) -> dict:
        return {"value": self.value.value, "evidence": self.evidence}


def combine(dets, how: str, **evidence) -> Determination:
    """AND/OR of determinations, keeping the parts as evidence."""
    dets = list(dets)
    value = (tri_all if how == "and" else tri_any)(d.value for d in dets)
    return Determination(value, {how: [d.to_json() for d in dets], **evidence})


class Status(Enum):
    PARAFREE = "parafree"
    NOT_PARAFREE = "not_parafree"
    UNKNOWN = "unknown"

    @classmethod
    def from_tri(cls, t: Tri) -> "Status":
        return {Tri.YES: cls.PARAFREE, Tri.NO: cls.NOT_PARAFREE, Tri.UNKNOWN: cls.UNKNOWN}[t]


@dataclass(frozen=True)
class Verdict:
    status: Status
    conditions: dict  # condition id -> Determination
    certificate: dict = field(default_factory=dict)

    @classmethod
    def aggregate(cls, conditions: dict, certificate: dict | None = None) -> "Verdict":
        v = cls(Status.from_tri(tri_all(d.value for d in conditions.values())),
                dict(conditions), certificate or {})
        v.check()
        return v

    def check(self):
        values = [d.value for d in self.conditions.values()]
        ok = {
            Status.PARAFREE: all(x is Tri.YES for x in values),
            Status.NOT_PARAFREE: Tri.NO in values,
            Status.UNKNOWN: Tri.NO not in values and Tri.UNKNOWN in values,
        }[self.status]
        if not ok:
            raise InvariantViolation(f"verdict {self.status.value} inconsistent with its conditions")

    def to_json(self) -> dict:
        return {
            "verdict": self.status.value,
            "conditions": {k: d.value.value for k, d in self.conditions.items()},
            "certificate": {
                **self.certificate,
                "evidence": {k: d.evidence for k, d in self.conditions.items()},
            },
        }
