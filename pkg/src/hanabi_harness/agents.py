"""Agents: an HTTP chat-completions client, scripted baselines, Best-of-K and MoA."""

from __future__ import annotations

import os
import random
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Callable, Mapping, NamedTuple, Sequence

import httpx

from . import beliefs
from .engine import (
    Discard,
    GameState,
    Move,
    MoveOutcome,
    Play,
    RevealColor,
    RevealRank,
    describe,
    legal_moves,
)
from .scaffold import (
    AgentDecision,
    Prompt,
    ResponseParseError,
    RoleKind,
    ScaffoldKind,
    format_response,
    parse_agent_response,
    render_aggregator_prompt,
    render_selection_prompt,
    render_specialist_prompt,
    specialist_roles,
)


class AgentKind(str, Enum):
    LLM = "Llm"
    RANDOM_LEGAL = "RandomLegal"
    SCRIPTED_GREEDY = "ScriptedGreedy"


class Fallback(str, Enum):
    SAFEST_DISCARD = "SafestDiscard"
    ABORT_GAME = "AbortGame"


class AgentUnavailable(RuntimeError):
    """The transport kept failing after every retry."""


class GameAborted(RuntimeError):
    """Raised when retries are exhausted and the fallback is AbortGame."""

    def __init__(self, message: str, raw_responses: Sequence[str] = ()):
        super().__init__(message)
        self.raw_responses = list(raw_responses)


class TransportError(RuntimeError):
    pass


ENV_ENDPOINT = "HANABI_ENDPOINT"
ENV_MODEL = "HANABI_MODEL"


@dataclass(frozen=True)
class AgentSpec:
    kind: AgentKind = AgentKind.SCRIPTED_GREEDY
    endpoint: str | None = None
    model_name: str | None = None
    temperature: float | None = None
    reasoning_effort: str | None = None
    max_retries: int = 3
    fallback: Fallback = Fallback.SAFEST_DISCARD
    # Provider-specific request fields, sent as-is.
    extras: Mapping = field(default_factory=dict, compare=False, hash=False)
    api_key_env: str = "HANABI_API_KEY"
    timeout_s: float = 120.0
    backoff_s: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "kind", AgentKind(self.kind))
        object.__setattr__(self, "fallback", Fallback(self.fallback))
        if self.kind is AgentKind.LLM:
            if not self.endpoint or not self.model_name:
                raise ValueError("an Llm agent needs endpoint and model_name")
        elif self.endpoint or self.model_name:
            raise ValueError(f"{self.kind.value} agents take no endpoint or model_name")
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")

    @property
    def label(self) -> str:
        return self.model_name if self.kind is AgentKind.LLM else self.kind.value

    def to_dict(self) -> dict:
        d = {"kind": self.kind.value}
        if self.kind is AgentKind.LLM:
            d.update(endpoint=self.endpoint, model_name=self.model_name)
            if self.temperature is not None:
                d["temperature"] = self.temperature
            if self.reasoning_effort is not None:
                d["reasoning_effort"] = self.reasoning_effort
            if self.extras:
                d["extras"] = dict(self.extras)
        d.update(max_retries=self.max_retries, fallback=self.fallback.value)
        return d

    @classmethod
    def from_dict(cls, d: Mapping, environ: Mapping[str, str] | None = None) -> "AgentSpec":
        """Build from config; for Llm agents the environment overrides endpoint and model."""
        d = dict(d)
        env = os.environ if environ is None else environ
        if AgentKind(d.get("kind", "ScriptedGreedy")) is AgentKind.LLM:
            d["endpoint"] = env.get(ENV_ENDPOINT) or d.get("endpoint")
            d["model_name"] = env.get(ENV_MODEL) or d.get("model_name")
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown agent fields: {sorted(unknown)}")
        return cls(**d)


RANDOM_LEGAL = AgentSpec(AgentKind.RANDOM_LEGAL)
SCRIPTED_GREEDY = AgentSpec(AgentKind.SCRIPTED_GREEDY)


# ---------------------------------------------------------------------------
# Transport
# ---------------------------------------------------------------------------

Transport = Callable[[AgentSpec, list], str]


class HttpTransport:
    """OpenAI-style ``/chat/completions`` client; safe to share across threads."""

    def __init__(self, client: httpx.Client | None = None):
        self._client = client or httpx.Client()

    def __call__(self, agent: AgentSpec, messages: list) -> str:
        body = {"model": agent.model_name, "messages": messages}
        if agent.temperature is not None:
            body["temperature"] = agent.temperature
        if agent.reasoning_effort is not None:
            body["reasoning_effort"] = agent.reasoning_effort
        body.update(agent.extras)
        headers = {}
        key = os.environ.get(agent.api_key_env)
        if key:
            headers["Authorization"] = f"Bearer {key}"
        try:
            resp = self._client.post(agent.endpoint, json=body, headers=headers, timeout=agent.timeout_s)
            resp.raise_for_status()
            return resp.json()["choices"][0]["message"]["content"]
        except (httpx.HTTPError, KeyError, IndexError, TypeError, ValueError) as exc:
            raise TransportError(str(exc)) from exc


_default_transport: HttpTransport | None = None


def default_transport() -> HttpTransport:
    global _default_transport
    if _default_transport is None:
        _default_transport = HttpTransport()
    return _default_transport


def _call_with_retries(agent: AgentSpec, messages: list, transport: Transport, attempts_left: int):
    """One successful transport call; returns (text, calls_made)."""
    last: Exception | None = None
    for i in range(attempts_left):
        try:
            return transport(agent, messages), i + 1
        except TransportError as exc:
            last = exc
            if agent.backoff_s and i + 1 < attempts_left:
                time.sleep(agent.backoff_s * 2**i)
    raise AgentUnavailable(f"{agent.label}: transport failed {attempts_left} times: {last}")


# ---------------------------------------------------------------------------
# Scripted agents
# ---------------------------------------------------------------------------

def _own_dists(state: GameState, viewer: int):
    counts = beliefs.remaining_counts(state, viewer)
    return [beliefs.card_probability(k, counts) for k in state.knowledge[viewer]]


def _pins_playable(state: GameState, move: Move, target: int) -> bool:
    """Does the clue leave some truly playable card certain-to-play for its holder?"""
    hand = state.hands[target]
    if isinstance(move, RevealColor):
        touched = [i for i, c in enumerate(hand) if c.color == move.color]
        clue = move.color
    else:
        touched = [i for i, c in enumerate(hand) if c.rank == move.rank]
        clue = move.rank
    before = state.knowledge[target]
    after = beliefs.apply_clue(before, touched, clue)
    counts = beliefs.remaining_counts(state, target)
    for i in touched:
        card = hand[i]
        if card.rank != state.fireworks[card.color.index] + 1:
            continue
        p_before = beliefs.playability_probability(beliefs.card_probability(before[i], counts), state.fireworks)
        p_after = beliefs.playability_probability(beliefs.card_probability(after[i], counts), state.fireworks)
        if p_after == 1 and p_before != 1:
            return True
    return False


def scripted_greedy(state: GameState, knowledge=None) -> Move:
    """Deterministic baseline.

    Certain play, else a clue that makes a playable card certain, else a
    discard (dead card, then unhinted card, then slot 0), else any clue.
    """
    me = state.current_player
    if knowledge is not None and list(knowledge) != list(state.knowledge[me]):
        state = replace(state, knowledge=tuple(
            tuple(knowledge) if p == me else k for p, k in enumerate(state.knowledge)
        ))
    legal = [m for _, m in legal_moves(state)]
    dists = _own_dists(state, me)
    for slot, dist in enumerate(dists):
        if beliefs.playability_probability(dist, state.fireworks) == 1:
            return Play(slot)
    reveals = [m for m in legal if isinstance(m, (RevealColor, RevealRank))]
    for m in reveals:
        if _pins_playable(state, m, state.player_at(me, m.offset)):
            return m
    if any(isinstance(m, Discard) for m in legal):
        dead = beliefs.dead_card_types(state.fireworks, state.discards)
        for slot, dist in enumerate(dists):
            if all(card in dead for card in dist):
                return Discard(slot)
        for slot, k in enumerate(state.knowledge[me]):
            if k.hinted_color is None and k.hinted_rank is None:
                return Discard(slot)
        return Discard(0)
    return reveals[0]


def _index_of(state: GameState, move: Move) -> int:
    for i, m in legal_moves(state):
        if m == move:
            return i
    raise AssertionError(f"{describe(move)} is not legal")


def scripted_response(
    agent: AgentSpec, state: GameState, kind: ScaffoldKind, rng: random.Random
) -> tuple[AgentDecision, str]:
    """A scripted agent's decision rendered in the scaffold's response format."""
    moves = legal_moves(state)
    if agent.kind is AgentKind.RANDOM_LEGAL:
        action = rng.randrange(len(moves))
        reason = "Random legal move."
    else:
        move = scripted_greedy(state)
        action = _index_of(state, move)
        reason = f"Greedy baseline chose {describe(move)}."
    ratings = tuple((i, 1.0 if i == action else 0.0) for i, _ in moves)
    kind = ScaffoldKind(kind)
    deduction = (
        beliefs.viewer_block(state, state.current_player) if kind is ScaffoldKind.MYCROFT else None
    )
    decision = AgentDecision(action=action, ratings=ratings, reason=reason, deduction=deduction)
    raw = format_response(kind, decision, [describe(m) for _, m in moves])
    # Round-trip so the stored decision is exactly what the text parses to.
    return parse_agent_response(kind, raw, len(moves), strict=True), raw


# ---------------------------------------------------------------------------
# decide
# ---------------------------------------------------------------------------

class Decision(NamedTuple):
    decision: AgentDecision
    raw: str
    attempts: int
    fallback_used: bool = False


def _as_prompt(prompt: Prompt | str) -> Prompt:
    return prompt if isinstance(prompt, Prompt) else Prompt(user=prompt)


def safest_fallback_action(state: GameState) -> int:
    """Lowest-index legal discard, else legal move 0."""
    for i, m in legal_moves(state):
        if isinstance(m, Discard):
            return i
    return 0


def decide(
    agent: AgentSpec,
    prompt: Prompt | str,
    n_legal: int,
    rng: random.Random,
    *,
    state: GameState,
    kind: ScaffoldKind,
    transport: Transport | None = None,
) -> Decision:
    """Ask ``agent`` for a move.

    LLM replies that fail to parse are retried; ``max_retries`` counts calls
    after the first. Once retries run out the fallback applies.
    """
    if agent.kind is not AgentKind.LLM:
        decision, raw = scripted_response(agent, state, kind, rng)
        return Decision(decision, raw, 1)
    transport = transport or default_transport()
    messages = _as_prompt(prompt).messages()
    budget = agent.max_retries + 1
    attempts = 0
    raws: list[str] = []
    errors: list[str] = []
    while attempts < budget:
        text, calls = _call_with_retries(agent, messages, transport, budget - attempts)
        attempts += calls
        raws.append(text)
        try:
            return Decision(parse_agent_response(kind, text, n_legal), text, attempts)
        except ResponseParseError as exc:
            errors.append(f"{type(exc).__name__}: {exc}")
    if agent.fallback is Fallback.ABORT_GAME:
        raise GameAborted(f"{agent.label}: no valid response in {attempts} attempts", raws)
    action = safest_fallback_action(state)
    decision = AgentDecision(
        action=action,
        reason="fallback: " + "; ".join(errors),
        rating_issues=("no ratings: fallback move",),
    )
    return Decision(decision, raws[-1] if raws else "", attempts, True)


# ---------------------------------------------------------------------------
# Best-of-K and Mixture of Agents
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CallLog:
    role: str
    prompt: str
    response: str
    attempts: int


class PipelineResult(NamedTuple):
    decision: AgentDecision
    raw: str
    attempts: int
    calls: tuple[CallLog, ...]
    fallback_used: bool = False


def _child_rngs(rng: random.Random, n: int) -> list[random.Random]:
    return [random.Random(rng.getrandbits(64)) for _ in range(n)]


def best_of_k(
    agent: AgentSpec,
    prompt: Prompt | str,
    k: int,
    n_legal: int,
    rng: random.Random,
    *,
    state: GameState,
    kind: ScaffoldKind,
    transport: Transport | None = None,
    strict: bool = False,
    parallel: bool = False,
) -> PipelineResult:
    """k samples, then a selection call unless every sample agrees (or ``strict``)."""
    if k < 1:
        raise ValueError("k must be >= 1")
    prompt = _as_prompt(prompt)
    rngs = _child_rngs(rng, k + 1)

    def sample(i: int) -> Decision:
        return decide(agent, prompt, n_legal, rngs[i], state=state, kind=kind, transport=transport)

    if parallel and k > 1:
        with ThreadPoolExecutor(max_workers=k) as pool:
            samples = list(pool.map(sample, range(k)))
    else:
        samples = [sample(i) for i in range(k)]
    calls = [CallLog(f"sample{i + 1}", prompt.text, s.raw, s.attempts) for i, s in enumerate(samples)]
    attempts = sum(s.attempts for s in samples)
    if k == 1 or (not strict and len({s.decision.action for s in samples}) == 1):
        first = samples[0]
        return PipelineResult(first.decision, first.raw, attempts, tuple(calls), first.fallback_used)
    selection = render_selection_prompt(prompt, [s.raw for s in samples])
    chosen = decide(agent, selection, n_legal, rngs[k], state=state, kind=kind, transport=transport)
    calls.append(CallLog("selector", selection.text, chosen.raw, chosen.attempts))
    return PipelineResult(
        chosen.decision, chosen.raw, attempts + chosen.attempts, tuple(calls), chosen.fallback_used
    )


def _specialist_text(
    agent: AgentSpec,
    prompt: Prompt,
    rng: random.Random,
    state: GameState,
    kind: ScaffoldKind,
    transport: Transport | None,
) -> tuple[str | None, int]:
    if agent.kind is not AgentKind.LLM:
        return scripted_response(agent, state, kind, rng)[1], 1
    try:
        return _call_with_retries(agent, prompt.messages(), transport or default_transport(),
                                  agent.max_retries + 1)
    except AgentUnavailable:
        return None, agent.max_retries + 1


def mixture_of_agents(
    roles: Sequence[tuple[RoleKind, AgentSpec]],
    state: GameState,
    viewer: int,
    rng: random.Random,
    *,
    kind: ScaffoldKind,
    history: Sequence[MoveOutcome] = (),
    transport: Transport | None = None,
    max_workers: int | None = None,
) -> PipelineResult:
    """Specialists run concurrently; the aggregator sees their reports in role order."""
    kind = ScaffoldKind(kind)
    by_role = {RoleKind(r): a for r, a in roles}
    aggregators = [r for r, _ in roles if RoleKind(r) is RoleKind.AGGREGATOR]
    expected = specialist_roles(state.n_players)
    if len(aggregators) != 1:
        raise ValueError("a mixture needs exactly one Aggregator")
    if sorted(r.value for r in by_role if r is not RoleKind.AGGREGATOR) != sorted(r.value for r in expected):
        raise ValueError(f"specialists must be exactly {[r.value for r in expected]}")
    if len(roles) != len(expected) + 1:
        raise ValueError("each role may appear only once")
    prompts = {r: render_specialist_prompt(kind, r, state, viewer, history) for r in expected}
    rngs = dict(zip(expected + [RoleKind.AGGREGATOR], _child_rngs(rng, len(expected) + 1)))

    def run(role: RoleKind):
        return _specialist_text(by_role[role], prompts[role], rngs[role], state, kind, transport)

    with ThreadPoolExecutor(max_workers=max_workers or len(expected)) as pool:
        results = dict(zip(expected, pool.map(run, expected)))
    reports = {r: text for r, (text, _) in results.items()}
    calls = [CallLog(r.value, prompts[r].text, results[r][0] or "", results[r][1]) for r in expected]
    agg_prompt = render_aggregator_prompt(kind, state, viewer, history, reports)
    n_legal = len(legal_moves(state))
    final = decide(by_role[RoleKind.AGGREGATOR], agg_prompt, n_legal, rngs[RoleKind.AGGREGATOR],
                   state=state, kind=kind, transport=transport)
    calls.append(CallLog(RoleKind.AGGREGATOR.value, agg_prompt.text, final.raw, final.attempts))
    attempts = sum(c.attempts for c in calls)
    return PipelineResult(final.decision, final.raw, attempts, tuple(calls), final.fallback_used)


def uniform_roster_roles(agent: AgentSpec, n_players: int) -> list[tuple[RoleKind, AgentSpec]]:
    """Every MoA role played by the same agent."""
    return [(r, agent) for r in specialist_roles(n_players)] + [(RoleKind.AGGREGATOR, agent)]
