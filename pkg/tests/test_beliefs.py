import random
from collections import Counter
from fractions import Fraction
from itertools import permutations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hanabi_harness import beliefs
from hanabi_harness.beliefs import (
    UNKNOWN,
    CardKnowledge,
    ContradictionError,
    IllegalClueError,
    apply_clue,
    block_from_dict,
    block_to_dict,
    card_probability,
    dead_card_types,
    format_knowledge,
    full_counts,
    parse_knowledge,
    playability_probability,
    remaining_counts,
    shift_on_removal,
    subtract_seen,
)
from hanabi_harness.cards import COLORS, RANKS, Card, Color, canonical_deck, parse_card
from hanabi_harness.engine import GameConfig, apply_move, legal_moves, new_game

R, Y, G, W, B = COLORS


def cards(*names):
    return [parse_card(n) for n in names]


def touched_by(hand, clue):
    return [i for i, c in enumerate(hand) if (c.color if isinstance(clue, Color) else c.rank) == clue]


# --- clue updates -------------------------------------------------------------

def test_rank_clue_positive_and_negative():
    hand = cards("R2", "B4", "W2")
    know = apply_clue([UNKNOWN] * 3, touched_by(hand, 2), 2)
    assert [format_knowledge(k) for k in know] == [
        "color could be R, Y, G, W, B; rank is 2",
        "color could be R, Y, G, W, B; rank could be 1, 3, 4, 5",
        "color could be R, Y, G, W, B; rank is 2",
    ]


def test_color_clue_excludes_untouched():
    know = apply_clue([UNKNOWN] * 4, [1], B)
    assert know[1].hinted_color is B and know[1].colors == {B}
    assert all(B not in k.colors for i, k in enumerate(know) if i != 1)
    assert know[0].ranks == set(RANKS)


def test_clue_touching_nothing_is_illegal():
    with pytest.raises(IllegalClueError):
        apply_clue([UNKNOWN] * 4, [], R)


def test_shift_keeps_older_knowledge_in_order():
    before = [parse_knowledge(t) for t in (
        "color could be R, Y, G, W, B; rank is 2",
        "color is Blue; rank could be 3, 4",
        "color could be R, Y, G, W, B; rank is 5",
        "color could be Y, G, W, B; rank could be 1, 2, 3, 4, 5",
    )]
    after = shift_on_removal(before, 1, drew_new=True)
    assert block_to_dict({"player+1": after})["player+1"] == {
        "card0": "color could be R, Y, G, W, B; rank is 2",
        "card1": "color could be R, Y, G, W, B; rank is 5",
        "card2": "color could be Y, G, W, B; rank could be 1, 2, 3, 4, 5",
        "card3": "color could be R, Y, G, W, B; rank could be 1, 2, 3, 4, 5",
    }


def test_shift_without_draw_shrinks_hand():
    assert len(shift_on_removal([UNKNOWN] * 4, 0, drew_new=False)) == 3
    with pytest.raises(IndexError):
        shift_on_removal([UNKNOWN] * 4, 4, drew_new=True)


hands = st.lists(st.sampled_from(canonical_deck()), min_size=4, max_size=5)


@settings(max_examples=200, deadline=None)
@given(hand=hands, color=st.sampled_from(COLORS), rank=st.sampled_from(RANKS))
def test_color_and_rank_clues_commute(hand, color, rank):
    tc, tr = touched_by(hand, color), touched_by(hand, rank)
    if not tc or not tr:
        return
    start = [UNKNOWN] * len(hand)
    a = apply_clue(apply_clue(start, tc, color), tr, rank)
    b = apply_clue(apply_clue(start, tr, rank), tc, color)
    assert a == b


@settings(max_examples=200, deadline=None)
@given(hand=hands, clues=st.lists(st.one_of(st.sampled_from(COLORS), st.sampled_from(RANKS)), max_size=6))
def test_true_card_always_admitted(hand, clues):
    know = [UNKNOWN] * len(hand)
    for clue in clues:
        t = touched_by(hand, clue)
        if t:
            know = apply_clue(know, t, clue)
    assert all(k.admits(c) for k, c in zip(know, hand))


# --- counts and probabilities -------------------------------------------------

def test_fresh_two_player_counts():
    s = new_game(GameConfig(n_players=2, seed=1))
    counts = remaining_counts(s, 0)
    assert sum(counts.values()) == 45
    assert sum(counts.values()) + len(s.hands[1]) == 50


def fresh_without_fives():
    for seed in range(100):
        s = new_game(GameConfig(n_players=2, seed=seed))
        if all(c.rank != 5 for c in s.hands[1]):
            return s
    raise AssertionError("no seed without a visible five")


def test_rank_five_anchor():
    s = fresh_without_fives()
    counts = remaining_counts(s, 0)
    assert sum(n for c, n in counts.items() if c.rank == 5) == 5
    dist = card_probability(UNKNOWN, counts)
    assert sum(p for c, p in dist.items() if c.rank == 5) == Fraction(5, 45)


def test_playability_examples():
    one = CardKnowledge(ranks=frozenset({1}), hinted_rank=1)
    assert playability_probability(card_probability(one, full_counts()), (0,) * 5) == 1
    assert playability_probability(card_probability(UNKNOWN, full_counts()), (5,) * 5) == 0
    assert playability_probability(card_probability(UNKNOWN, full_counts()), (0,) * 5) == Fraction(3, 10)
    as_map = {c: 0 for c in COLORS}
    assert playability_probability(card_probability(UNKNOWN, full_counts()), as_map) == Fraction(3, 10)


def test_probability_contradiction():
    k = CardKnowledge(frozenset({R}), frozenset({5}), R, 5)
    counts = full_counts()
    counts[Card(R, 5)] = 0
    with pytest.raises(ContradictionError):
        card_probability(k, counts)


def test_subtract_seen_refuses_overdraw():
    with pytest.raises(ContradictionError):
        subtract_seen(full_counts(), cards("R5", "R5"))


def test_dead_cards_follow_discard_closure():
    dead = dead_card_types((2, 0, 0, 0, 0), cards("Y2", "Y2"))
    assert {Card(R, 1), Card(R, 2)} <= dead and Card(R, 3) not in dead
    assert {Card(Y, 2), Card(Y, 3), Card(Y, 4), Card(Y, 5)} <= dead
    assert Card(Y, 1) not in dead


def test_remaining_counts_ignore_own_hand():
    s = new_game(GameConfig(n_players=3, seed=2))
    counts = remaining_counts(s, 1)
    seen = Counter(s.hands[0]) + Counter(s.hands[2])
    for card, n in full_counts().items():
        assert counts[card] == n - seen[card]


# --- reduced-deck enumeration oracle -----------------------------------------

SMALL_MULT = {1: 3, 2: 2, 3: 2}
SMALL_COLORS = (R, Y)
SMALL_FULL = {Card(c, r): m for c in SMALL_COLORS for r, m in SMALL_MULT.items()}
SMALL_HAND = 3


def small_deck(rng):
    deck = [card for card, m in SMALL_FULL.items() for _ in range(m)]
    rng.shuffle(deck)
    return deck


def small_reachable_states(rng, count):
    """Random two-player positions of the reduced game, each as
    (viewer's true hand, viewer's knowledge, the visible cards, the hidden pool)."""
    out = []
    while len(out) < count:
        deck = small_deck(rng)
        hands = [deck[:SMALL_HAND], deck[SMALL_HAND:2 * SMALL_HAND]]
        deck = deck[2 * SMALL_HAND:]
        know = [[UNKNOWN] * SMALL_HAND for _ in range(2)]
        stacks = {c: 0 for c in SMALL_COLORS}
        discards = []
        me = 0
        for _ in range(rng.randint(0, 12)):
            action = rng.choice(["play", "discard", "clue"])
            if action == "clue":
                other = 1 - me
                card = rng.choice(hands[other])
                clue = rng.choice([card.color, card.rank])
                know[other] = apply_clue(know[other], touched_by(hands[other], clue), clue)
            else:
                if not hands[me]:
                    break
                slot = rng.randrange(len(hands[me]))
                card = hands[me].pop(slot)
                if action == "play" and stacks[card.color] == card.rank - 1:
                    stacks[card.color] += 1
                else:
                    discards.append(card)
                drew = bool(deck)
                if drew:
                    hands[me].append(deck.pop(0))
                know[me] = shift_on_removal(know[me], slot, drew)
            me = 1 - me
        viewer = me
        if not hands[viewer]:
            continue
        visible = list(hands[1 - viewer]) + discards
        visible += [Card(c, r) for c, h in stacks.items() for r in range(1, h + 1)]
        hidden = list(hands[viewer]) + deck
        out.append((hands[viewer], know[viewer], visible, hidden))
    return out


def enumerate_slot(hidden, know, slot):
    """Brute force: every ordered deal of physical hidden copies into the
    viewer's slots, conditioned on that slot's own knowledge."""
    tally = Counter()
    for deal in permutations(range(len(hidden)), len(know)):
        card = hidden[deal[slot]]
        if know[slot].admits(card):
            tally[card] += 1
    total = sum(tally.values())
    return {card: Fraction(n, total) for card, n in tally.items()}


def test_card_probability_matches_enumeration_on_reduced_deck():
    rng = random.Random(2024)
    for true_hand, know, visible, hidden in small_reachable_states(rng, 500):
        counts = subtract_seen(SMALL_FULL, visible)
        assert sum(counts.values()) == len(hidden)
        for slot in range(len(know)):
            assert card_probability(know[slot], counts) == enumerate_slot(hidden, know, slot)


# --- text forms ---------------------------------------------------------------

@settings(max_examples=300, deadline=None)
@given(
    colors=st.sets(st.sampled_from(COLORS), min_size=1),
    ranks=st.sets(st.sampled_from(RANKS), min_size=1),
    style=st.sampled_from(["compact", "verbose"]),
)
def test_format_parse_round_trip(colors, ranks, style):
    hc = next(iter(colors)) if len(colors) == 1 else None
    hr = next(iter(ranks)) if len(ranks) == 1 else None
    k = CardKnowledge(frozenset(colors), frozenset(ranks), hc, hr)
    assert parse_knowledge(format_knowledge(k, style)) == k


def test_verbose_format():
    k = apply_clue([UNKNOWN, UNKNOWN], [0], 2)[1]
    k = apply_clue([k, UNKNOWN], [1], R)[0]
    assert format_knowledge(k, "verbose") == (
        "color could be Yellow, Green, White, Blue; color cannot be Red; "
        "rank could be 1, 3, 4, 5; rank cannot be 2"
    )


def test_block_dict_round_trip_and_key_order():
    block = {"player+2": [UNKNOWN], "you": [UNKNOWN, UNKNOWN], "player+1": [UNKNOWN]}
    parsed = block_from_dict(block_to_dict(block))
    assert list(parsed) == ["you", "player+1", "player+2"]
    with pytest.raises(KeyError):
        block_from_dict({"partner": {"card0": "unknown"}})


def test_engine_hints_agree_with_knowledge():
    rng = random.Random(5)
    s = new_game(GameConfig(n_players=3, seed=5))
    while s.terminal is None:
        s, _ = apply_move(s, rng.choice(legal_moves(s))[1])
        for hand, know, hints in zip(s.hands, s.knowledge, s.explicit_hints):
            for card, k, (hc, hr) in zip(hand, know, hints):
                assert k.admits(card)
                assert hc in (None, card.color) and hr in (None, card.rank)


def test_probability_format():
    assert beliefs.format_probability(Fraction(5, 45)) == "0.111"
