"""Discourse-role discriminators: coverage, ordering, and the fallback role labeler."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

from coopnet import text as textmod
from coopnet.corpus import CandidateSummary, DiscourseRole
from coopnet.discriminators.scores import DiscriminatorScore, EmptyRoles, clamped_log

BG = DiscourseRole.BACKGROUND
METHOD = DiscourseRole.METHOD
OBJECTIVE = DiscourseRole.OBJECTIVE
RESULT = DiscourseRole.RESULT
OTHER = DiscourseRole.OTHER

N_ROLES = len(DiscourseRole)

# successor -> roles allowed directly before it; unlisted transitions score -1
VALID_PREDECESSORS: dict[DiscourseRole, frozenset[DiscourseRole]] = {
    BG: frozenset({BG}),
    METHOD: frozenset({BG, METHOD, OBJECTIVE}),
    OBJECTIVE: frozenset({BG, OBJECTIVE, METHOD}),
    RESULT: frozenset({OBJECTIVE, METHOD, OTHER}),
}
FIRST_ROLE = BG
LAST_ROLE = RESULT


@dataclass(frozen=True)
class NormalizationSpec:
    max_sentences: int = 10

    def __post_init__(self) -> None:
        if self.max_sentences < 1:
            raise ValueError("max_sentences must be >= 1")

    @property
    def o_max(self) -> int:
        """Scorable orderings at full length: adjacent pairs plus the two endpoint rules."""
        return (self.max_sentences - 1) + 2


class OutOfRange(ValueError):
    pass


def f_n(s: int, o_max: int) -> Fraction:
    """Affine map of an ordering sum from ``[-o_max, o_max]`` onto ``[0, 1]``."""
    if o_max < 1:
        raise OutOfRange(f"o_max must be >= 1, got {o_max}")
    if not -o_max <= s <= o_max:
        raise OutOfRange(f"ordering sum {s} outside [-{o_max}, {o_max}]")
    return Fraction(s + o_max, 2 * o_max)


def _roles(roles: Sequence[Union[DiscourseRole, str]]) -> list[DiscourseRole]:
    out = [r if isinstance(r, DiscourseRole) else DiscourseRole.parse(r) for r in roles]
    if not out:
        raise EmptyRoles("role sequence is empty")
    return out


def score_coverage(roles: Sequence[Union[DiscourseRole, str]]) -> DiscriminatorScore:
    seq = _roles(roles)
    present = set(seq)
    missing = [r.value for r in DiscourseRole if r not in present]
    value = clamped_log(len(present) / N_ROLES)
    return DiscriminatorScore("coverage", value, {"unique_roles": len(present), "missing": missing})


def transition_score(prev: DiscourseRole, cur: DiscourseRole) -> int:
    return 1 if prev in VALID_PREDECESSORS.get(cur, ()) else -1


def ordering_sum(roles: Sequence[DiscourseRole]) -> int:
    s = sum(transition_score(a, b) for a, b in zip(roles, roles[1:]))
    s += 1 if roles[0] == FIRST_ROLE else -1
    s += 1 if roles[-1] == LAST_ROLE else -1
    return s


def score_ordering(
    roles: Sequence[Union[DiscourseRole, str]], spec: NormalizationSpec = NormalizationSpec()
) -> DiscriminatorScore:
    seq = _roles(roles)
    truncated = len(seq) > spec.max_sentences
    seq = seq[: spec.max_sentences]
    s = ordering_sum(seq)
    norm = f_n(s, spec.o_max)
    flags = frozenset({"truncated"}) if truncated else frozenset()
    detail = {"sum": s, "o_max": spec.o_max, "f_n": float(norm), "sentences_scored": len(seq)}
    return DiscriminatorScore("ordering", clamped_log(norm), detail, flags)


# ---------------------------------------------------------------------------
# Fallback role labeler


@dataclass(frozen=True)
class RoleRules:
    """Cue phrases per role, in priority order."""

    rules: tuple[tuple[DiscourseRole, tuple[tuple[str, ...], ...]], ...]

    @classmethod
    def parse(cls, lines: Iterable[str]) -> "RoleRules":
        order: list[DiscourseRole] = []
        cues: dict[DiscourseRole, list[tuple[str, ...]]] = {}
        for raw in lines:
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            role_name, _, cue = line.partition("\t")
            if not cue.strip():
                raise ValueError(f"role rule without cue: {raw!r}")
            role = DiscourseRole.parse(role_name)
            if role not in cues:
                order.append(role)
                cues[role] = []
            cues[role].append(tuple(textmod.normalize_phrase(cue).split(" ")))
        return cls(tuple((r, tuple(cues[r])) for r in order))

    @classmethod
    def load(cls, path: Union[str, Path, None] = None) -> "RoleRules":
        if path is None:
            data = resources.files("coopnet").joinpath("data", "role_rules.tsv").read_text(encoding="utf-8")
            return cls.parse(data.splitlines())
        with open(path, encoding="utf-8") as f:
            return cls.parse(f)


_default_rules: Optional[RoleRules] = None


def default_rules() -> RoleRules:
    global _default_rules
    if _default_rules is None:
        _default_rules = RoleRules.load()
    return _default_rules


def _contains(seq: Sequence[str], cue: tuple[str, ...]) -> bool:
    k = len(cue)
    return any(tuple(seq[i : i + k]) == cue for i in range(len(seq) - k + 1))


def label_sentence(tokens: Sequence[textmod.TokenLike], position: int, rules: RoleRules) -> DiscourseRole:
    surf = [textmod.surface(t) for t in tokens]
    for role, cues in rules.rules:
        if any(_contains(surf, cue) for cue in cues):
            return role
    return BG if position == 0 else OTHER


def label_roles_heuristic(candidate: CandidateSummary, rules: Optional[RoleRules] = None) -> list[DiscourseRole]:
    rules = rules or default_rules()
    return [label_sentence(sent, i, rules) for i, sent in enumerate(candidate.split.sentences)]
