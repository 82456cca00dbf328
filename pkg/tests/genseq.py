"""Random sentence/stream generators and grammar-breaking mutators.

The mutators only apply edits that cannot produce a *different* valid stream:
every mutation either breaks the grammar (parse must error) or happens to be
a no-op (parse must return the original structure). Value-level edits such as
swapping one prosody bin for another are deliberately excluded because they
form different, equally valid streams.
"""

from __future__ import annotations

import random

from prosotok.quantizer import N_BINS
from prosotok.sequence import SEP1, SEP2, SIL, SentenceItem, SentenceSequence

_WORDS = (
    "time moves forward whether we are ready or not the past is always part "
    "of present every path leads somewhere nineteen ninety six"
).split()

_TEXTS = (
    "Time moves forward.",
    "Not every question has a simple answer!",
    "How are you?",
    "“Some things are understood,” he said.",
    "In 1996 the river froze early.",
)


def random_sentence(rng: random.Random, with_global: bool) -> SentenceSequence:
    items = []
    for _ in range(rng.randint(1, 6)):
        if rng.random() < 0.15:
            tokens = None
        else:
            tokens = tuple(rng.randrange(N_BINS) for _ in range(5))
        items.append(
            SentenceItem(
                silence_token=rng.randrange(N_BINS),
                word=rng.choice(_WORDS),
                tokens=tokens,
            )
        )
    return SentenceSequence(
        text=rng.choice(_TEXTS),
        items=tuple(items),
        global_token=rng.randrange(N_BINS) if with_global else None,
    )


def random_sentences(rng: random.Random, with_global: bool) -> list[SentenceSequence]:
    return [random_sentence(rng, with_global) for _ in range(rng.randint(1, 3))]


def _sentence_spans(stream: list[str]) -> list[tuple[int, int]]:
    spans = []
    start = 0
    for i, token in enumerate(stream):
        if token == SEP2:
            spans.append((start, i + 1))
            start = i + 1
    return spans


def mutate_stream(stream: list[str], rng: random.Random) -> list[str]:
    """Return a structurally mutated copy of a valid stream."""
    mutated = list(stream)
    choice = rng.randrange(8)
    if choice == 0:  # drop a separator
        seps = [i for i, t in enumerate(mutated) if t in (SEP1, SEP2)]
        del mutated[rng.choice(seps)]
    elif choice == 1:  # drop a <SIL> (if any; else drop a separator)
        sils = [i for i, t in enumerate(mutated) if t == SIL]
        if sils:
            del mutated[rng.choice(sils)]
        else:
            del mutated[mutated.index(SEP1)]
    elif choice == 2:  # drop one token of a five-token prosody group
        groups = _five_token_groups(mutated)
        if groups:
            del mutated[rng.choice(groups) + rng.randrange(5)]
        else:
            del mutated[-1]
    elif choice == 3:  # duplicate one prosody token (group becomes six)
        groups = _five_token_groups(mutated)
        if groups:
            i = rng.choice(groups)
            mutated.insert(i, mutated[i])
        else:
            mutated.insert(mutated.index(SEP1), SEP1)
    elif choice == 4:  # replace a word with a reserved token
        words = _word_positions(mutated)
        if words:
            mutated[rng.choice(words)] = rng.choice((SEP1, SEP2, SIL))
        else:
            mutated[0] = SEP2
    elif choice == 5:  # out-of-range or garbage prosody surface
        pros = [i for i, t in enumerate(mutated) if t.startswith("<P") and t.endswith(">")]
        target = rng.choice(pros) if pros else 0
        mutated[target] = rng.choice(("<P512>", "<P999>", "<Pxx>"))
    elif choice == 6:  # truncate strictly inside a sentence
        start, end = rng.choice(_sentence_spans(mutated))
        cut = rng.randrange(start + 1, end)
        mutated = mutated[:cut]
    else:  # insert a stray <SIL> right before <SEP1>
        mutated.insert(mutated.index(SEP1), SIL)
    return mutated


def _five_token_groups(stream: list[str]) -> list[int]:
    """Start indices of five-prosody-token groups (word tokens, not silences)."""
    groups = []
    i = 0
    while i < len(stream):
        if stream[i] == SIL and i + 2 < len(stream):
            j = i + 3  # skip <SIL>, duration token, word
            run = 0
            while j + run < len(stream) and _is_prosody(stream[j + run]):
                run += 1
            if run == 5:
                groups.append(j)
            i = j + run
        else:
            i += 1
    return groups


def _word_positions(stream: list[str]) -> list[int]:
    positions = []
    for i in range(2, len(stream)):
        if stream[i - 2] == SIL and _is_prosody(stream[i - 1]) and not stream[i].startswith("<"):
            positions.append(i)
    return positions


def _is_prosody(token: str) -> bool:
    return (
        len(token) == 6
        and token.startswith("<P")
        and token.endswith(">")
        and token[2:5].isdigit()
        and int(token[2:5]) < N_BINS
    )
