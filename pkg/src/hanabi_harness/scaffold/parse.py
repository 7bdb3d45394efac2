"""Parsing and serialising agent responses."""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from typing import Any, Mapping

from ..beliefs import DeductionBlock, block_from_dict, block_to_dict
from .render import ScaffoldKind


class ResponseParseError(ValueError):
    """Base class for unusable agent output."""


class MissingAction(ResponseParseError):
    pass


class InvalidAction(ResponseParseError):
    pass


class InvalidRatings(ResponseParseError):
    pass


@dataclass(frozen=True)
class AgentDecision:
    action: int
    ratings: tuple[tuple[int, float], ...] = ()
    reason: str = ""
    deduction: DeductionBlock | None = field(default=None, compare=True)
    rating_issues: tuple[str, ...] = ()

    @property
    def ratings_valid(self) -> bool:
        return not self.rating_issues

    def ratings_dict(self) -> dict[int, float]:
        return dict(self.ratings)

    def to_dict(self) -> dict:
        return {
            "action": self.action,
            "ratings": [[a, r] for a, r in self.ratings],
            "reason": self.reason,
            "deduction": block_to_dict(self.deduction) if self.deduction is not None else None,
            "rating_issues": list(self.rating_issues),
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "AgentDecision":
        deduction = d.get("deduction")
        return cls(
            action=d["action"],
            ratings=tuple((int(a), float(r)) for a, r in d.get("ratings", [])),
            reason=d.get("reason", ""),
            deduction=block_from_dict(deduction) if deduction else None,
            rating_issues=tuple(d.get("rating_issues", [])),
        )


# ---------------------------------------------------------------------------
# JSON extraction
# ---------------------------------------------------------------------------

def _balanced_spans(text: str):
    """Yield (start, end) of every brace-balanced ``{...}`` span, string-aware."""
    for start in (i for i, ch in enumerate(text) if ch == "{"):
        depth = 0
        in_str = False
        esc = False
        for j in range(start, len(text)):
            ch = text[j]
            if in_str:
                if esc:
                    esc = False
                elif ch == "\\":
                    esc = True
                elif ch == '"':
                    in_str = False
                continue
            if ch == '"':
                in_str = True
            elif ch == "{":
                depth += 1
            elif ch == "}":
                depth -= 1
                if depth == 0:
                    yield start, j + 1
                    break


def extract_json_object(text: str) -> dict | None:
    """Longest brace-balanced substring that parses as a JSON object."""
    best: dict | None = None
    best_len = -1
    for s, e in _balanced_spans(text):
        if e - s <= best_len:
            continue
        try:
            obj = json.loads(text[s:e])
        except json.JSONDecodeError:
            continue
        if isinstance(obj, dict):
            best, best_len = obj, e - s
    return best


# ---------------------------------------------------------------------------
# Field extraction
# ---------------------------------------------------------------------------

_CHOSEN = re.compile(r"Chosen\s+Move\s+Number\W*?(-?\d+)", re.IGNORECASE)
_TEXT_RATING = re.compile(r"Move\s+(\d+)[^:\n,]*:\s*([-+]?\d+(?:\.\d+)?)", re.IGNORECASE)
_REASON = re.compile(
    r"Reasoning\s*:\s*(.*?)(?=\n\s*(?:Move Ratings|Chosen Move Number)\b|\Z)",
    re.IGNORECASE | re.DOTALL,
)


def _as_int(value: Any) -> int | None:
    if isinstance(value, bool):
        return None
    if isinstance(value, int):
        return value
    if isinstance(value, float) and value.is_integer():
        return int(value)
    if isinstance(value, str) and re.fullmatch(r"\s*-?\d+\s*", value):
        return int(value)
    return None


def _json_ratings(raw: Any) -> list[tuple[int, float]] | None:
    pairs: list[tuple[int, float]] = []
    if isinstance(raw, list):
        for item in raw:
            if not isinstance(item, Mapping):
                return None
            a = _as_int(item.get("action"))
            r = item.get("rating")
            if a is None or isinstance(r, bool) or not isinstance(r, (int, float, str)):
                return None
            try:
                pairs.append((a, float(r)))
            except ValueError:
                return None
    elif isinstance(raw, Mapping):
        for k, r in raw.items():
            a = _as_int(k)
            if a is None:
                return None
            try:
                pairs.append((a, float(r)))
            except (TypeError, ValueError):
                return None
    else:
        return None
    return pairs


def _validate_ratings(
    pairs: list[tuple[int, float]], n_legal: int, strict: bool
) -> tuple[tuple[tuple[int, float], ...], tuple[str, ...]]:
    issues: list[str] = []
    seen: dict[int, float] = {}
    for a, r in pairs:
        if not 0 <= a < n_legal:
            issues.append(f"rating for unknown action {a}")
            continue
        if a in seen:
            issues.append(f"duplicate rating for action {a}")
            continue
        if math.isnan(r):
            issues.append(f"rating for action {a} is NaN")
            r = 0.0
        elif not -1.0 <= r <= 1.0:
            issues.append(f"rating {r} for action {a} clamped to [-1, 1]")
            r = max(-1.0, min(1.0, r))
        seen[a] = r
    missing = [a for a in range(n_legal) if a not in seen]
    if missing:
        issues.append(f"missing ratings for actions {missing}")
    if strict and issues:
        raise InvalidRatings("; ".join(issues))
    return tuple(sorted(seen.items())), tuple(issues)


def parse_agent_response(
    kind: ScaffoldKind | str, text: str, n_legal: int, *, strict: bool = False
) -> AgentDecision:
    """Turn raw agent output into an :class:`AgentDecision`.

    JSON output is preferred; the Watson text format (``Chosen Move Number``
    plus ``Move N: x`` rating lines) is the fallback. Out-of-range ratings
    are clamped and reported in ``rating_issues`` unless ``strict``.
    """
    kind = ScaffoldKind(kind)
    obj = extract_json_object(text)
    action: int | None = None
    pairs: list[tuple[int, float]] | None = None
    reason = ""
    deduction = None
    issues: list[str] = []

    if obj is not None:
        action = _as_int(obj.get("action"))
        if "move_ratings" in obj:
            pairs = _json_ratings(obj["move_ratings"])
            if pairs is None:
                issues.append("move_ratings is malformed")
        if isinstance(obj.get("reason"), str):
            reason = obj["reason"].strip()
        if kind is ScaffoldKind.MYCROFT:
            raw = obj.get("deduction")
            if isinstance(raw, Mapping):
                try:
                    deduction = block_from_dict(raw)
                except (KeyError, ValueError, TypeError) as exc:
                    issues.append(f"deduction unreadable: {exc}")
            else:
                issues.append("deduction missing")

    if action is None:
        found = _CHOSEN.findall(text)
        if found:
            action = int(found[-1])
    if pairs is None:
        text_pairs = [(int(a), float(r)) for a, r in _TEXT_RATING.findall(text)]
        if text_pairs:
            pairs = text_pairs
    if not reason:
        m = _REASON.search(text)
        if m:
            reason = m.group(1).strip()

    if action is None:
        raise MissingAction("no action found in response")
    if not 0 <= action < n_legal:
        raise InvalidAction(f"action {action} outside 0..{n_legal - 1}")
    ratings, rating_issues = _validate_ratings(pairs or [], n_legal, strict)
    if strict and issues:
        raise InvalidRatings("; ".join(issues))
    return AgentDecision(
        action=action,
        ratings=ratings,
        reason=reason,
        deduction=deduction,
        rating_issues=tuple(issues) + rating_issues,
    )


def format_response(kind: ScaffoldKind | str, decision: AgentDecision, descriptions=None) -> str:
    """Serialise a decision in the response shape the scaffold asks for."""
    kind = ScaffoldKind(kind)
    if kind is ScaffoldKind.WATSON:
        lines = ["Reasoning:", decision.reason, "", "Move Ratings:"]
        for a, r in decision.ratings:
            label = f" {descriptions[a]}" if descriptions else ""
            lines.append(f"Move {a}{label}: {r!r}")
        lines += ["", f"Chosen Move Number: {decision.action}"]
        return "\n".join(lines)
    obj: dict[str, Any] = {
        "move_ratings": [{"action": a, "rating": r} for a, r in decision.ratings],
    }
    if kind is ScaffoldKind.MYCROFT:
        obj["deduction"] = block_to_dict(decision.deduction or {})
    obj["reason"] = decision.reason
    obj["action"] = decision.action
    return json.dumps(obj, indent=2, ensure_ascii=False)
