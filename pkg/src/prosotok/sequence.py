"""Serializer and single-pass parser for the sentence token-sequence grammar.

One sentence renders as

    <raw text> <SEP1> [<Pggg>] ( <SIL> <Pdur> <word> (<P1>..<P5> | <PINV>) )+ <SEP2>

where the optional global token appears only in global mode, each word is
preceded by exactly one silence-duration token, and an invalid word's five
prosody tokens collapse to a single ``<PINV>`` marker. Prosody tokens render
as ``<P000>``..``<P511>``. The raw text and each normalized word occupy one
stream element each; text is opaque to this layer.

The grammar is LL(1) given the global flag: the parser never backtracks, and
malformed streams raise ParseError carrying the offending position.
"""

from __future__ import annotations

import random
import re
import shlex
from dataclasses import dataclass
from typing import Sequence

from .errors import ProsotokError
from .quantizer import N_BINS, ProsodyToken

SEP1 = "<SEP1>"
SEP2 = "<SEP2>"
SIL = "<SIL>"
PINV = "<PINV>"

TokenStream = list[str]

_PROSODY_RE = re.compile(r"^<P(\d{3})>$")
_MARKUP_RE = re.compile(r"^<[^<>]*>$")

# The instruction paraphrase pool used for training-sequence prefixes.
INSTRUCTION_POOL = (
    "Create a story",
    "Spin a narrative",
    "Keep the narrative going",
    "Compose an audiobook",
    "Let this inspire your audiobook",
)


class ParseError(ProsotokError):
    """A token stream violates the sequence grammar."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at token {position})")
        self.position = position


def render_prosody(token: ProsodyToken) -> str:
    if not 0 <= token < N_BINS:
        raise ValueError(f"bin out of range: {token}")
    return f"<P{token:03d}>"


def prosody_bin(surface: str) -> int | None:
    """Bin index of a ``<Pnnn>`` surface token, or None if not prosody-shaped.

    Raises ParseError-free ValueError for prosody-shaped tokens whose index
    is out of range, so they can never be mistaken for words.
    """
    match = _PROSODY_RE.match(surface)
    if match is None:
        return None
    value = int(match.group(1))
    if value >= N_BINS:
        raise ValueError(f"prosody token out of range: {surface}")
    return value


def is_reserved(surface: str) -> bool:
    """True for the special tokens and anything angle-bracket shaped; words
    and sentence text must never look like markup."""
    return surface in (SEP1, SEP2, SIL, PINV) or bool(_MARKUP_RE.match(surface))


@dataclass(frozen=True)
class SentenceItem:
    """One word slot: its preceding-silence token, the normalized word, and
    the five prosody tokens in dimension order (None marks an invalid word)."""

    silence_token: ProsodyToken
    word: str
    tokens: tuple[int, int, int, int, int] | None

    def __post_init__(self):
        if not 0 <= self.silence_token < N_BINS:
            raise ValueError(f"silence bin out of range: {self.silence_token}")
        if not self.word or is_reserved(self.word):
            raise ValueError(f"invalid word surface: {self.word!r}")
        if self.tokens is not None:
            if len(self.tokens) != 5 or any(not 0 <= t < N_BINS for t in self.tokens):
                raise ValueError(f"invalid prosody tokens: {self.tokens!r}")

    @property
    def valid(self) -> bool:
        return self.tokens is not None


@dataclass(frozen=True)
class SentenceSequence:
    """Parsed form of one ``[Text] <SEP1> [Prosody] <SEP2>`` sentence."""

    text: str
    items: tuple[SentenceItem, ...]
    global_token: ProsodyToken | None = None

    def __post_init__(self):
        if not self.text or is_reserved(self.text):
            raise ValueError(f"invalid sentence text: {self.text!r}")
        if self.global_token is not None and not 0 <= self.global_token < N_BINS:
            raise ValueError(f"global bin out of range: {self.global_token}")

    def prosody_tokens(self) -> list[ProsodyToken]:
        """Every prosody token in the prosody section, silence tokens
        included, ``<PINV>`` and the global token excluded."""
        out: list[ProsodyToken] = []
        for item in self.items:
            out.append(item.silence_token)
            if item.tokens is not None:
                out.extend(item.tokens)
        return out


def serialize_sentence(sentence: SentenceSequence, include_global: bool = False) -> TokenStream:
    """Render one sentence; the global token is emitted right after <SEP1>
    when ``include_global`` is set (and must be present on the sentence)."""
    stream: TokenStream = [sentence.text, SEP1]
    if include_global:
        if sentence.global_token is None:
            raise ValueError("include_global set but sentence has no global token")
        stream.append(render_prosody(sentence.global_token))
    for item in sentence.items:
        stream.append(SIL)
        stream.append(render_prosody(item.silence_token))
        stream.append(item.word)
        if item.tokens is None:
            stream.append(PINV)
        else:
            stream.extend(render_prosody(t) for t in item.tokens)
    stream.append(SEP2)
    return stream


def serialize_sequences(
    sentences: Sequence[SentenceSequence], include_global: bool = False
) -> TokenStream:
    stream: TokenStream = []
    for sentence in sentences:
        stream.extend(serialize_sentence(sentence, include_global))
    return stream


def parse_sequence(stream: Sequence[str], include_global: bool = False) -> list[SentenceSequence]:
    """Inverse of serialize: a single pass over the stream, raising ParseError
    with the offending position for any grammar violation."""

    def bin_at(pos: int) -> int | None:
        try:
            return prosody_bin(stream[pos])
        except ValueError as exc:
            raise ParseError(str(exc), pos) from None

    sentences: list[SentenceSequence] = []
    pos = 0
    n = len(stream)
    while pos < n:
        text = stream[pos]
        if bin_at(pos) is not None or is_reserved(text):
            raise ParseError(f"expected sentence text, got {text!r}", pos)
        pos += 1
        if pos >= n or stream[pos] != SEP1:
            raise ParseError("expected <SEP1> after sentence text", pos)
        pos += 1

        global_token: int | None = None
        if include_global:
            if pos >= n or bin_at(pos) is None:
                raise ParseError("expected global prosody token after <SEP1>", pos)
            global_token = bin_at(pos)
            pos += 1
        elif pos < n and bin_at(pos) is not None:
            raise ParseError("global token present but global mode is off", pos)

        items: list[SentenceItem] = []
        while True:
            if pos >= n:
                raise ParseError("unterminated prosody section (missing <SEP2>)", pos)
            if stream[pos] == SEP2:
                pos += 1
                break
            if stream[pos] != SIL:
                raise ParseError(f"expected <SIL> or <SEP2>, got {stream[pos]!r}", pos)
            pos += 1
            if pos >= n or bin_at(pos) is None:
                raise ParseError("expected a duration token after <SIL>", pos)
            silence_token = bin_at(pos)
            pos += 1
            if pos >= n or is_reserved(stream[pos]):
                raise ParseError("expected a word after the silence entry", pos)
            word = stream[pos]
            pos += 1
            if pos < n and stream[pos] == PINV:
                items.append(SentenceItem(silence_token=silence_token, word=word, tokens=None))
                pos += 1
                continue
            tokens: list[int] = []
            while len(tokens) < 5 and pos < n and bin_at(pos) is not None:
                tokens.append(bin_at(pos))
                pos += 1
            if len(tokens) != 5:
                raise ParseError(
                    f"expected 5 prosody tokens after {word!r}, got {len(tokens)}", pos
                )
            if pos < n and bin_at(pos) is not None:
                raise ParseError(f"more than 5 prosody tokens after {word!r}", pos)
            items.append(
                SentenceItem(silence_token=silence_token, word=word, tokens=tuple(tokens))
            )
        sentences.append(
            SentenceSequence(text=text, items=tuple(items), global_token=global_token)
        )
    return sentences


# ---------------------------------------------------------------------------
# Prompt and training-sequence layouts
# ---------------------------------------------------------------------------


def choose_instruction(
    seed: int | None = None,
    rng: random.Random | None = None,
    pool: Sequence[str] = INSTRUCTION_POOL,
) -> str:
    """Seeded random pick from the instruction paraphrase pool."""
    if not pool:
        raise ValueError("empty instruction pool")
    if rng is None:
        rng = random.Random(seed)
    return rng.choice(list(pool))


def _prefix(instruction: str, spk_token: ProsodyToken) -> TokenStream:
    if not instruction or is_reserved(instruction):
        raise ValueError(f"invalid instruction: {instruction!r}")
    return [instruction, render_prosody(spk_token)]


def build_training_sequence(
    sentences: Sequence[SentenceSequence],
    instruction: str,
    spk_token: ProsodyToken,
    include_global: bool = False,
) -> TokenStream:
    """Instruction, speaker-F0 token, then every sentence serialized in order."""
    if not sentences:
        raise ValueError("empty sentence list")
    return _prefix(instruction, spk_token) + serialize_sequences(sentences, include_global)


def build_tts_prompt(
    text_sentences: Sequence[str],
    instruction: str,
    spk_token: ProsodyToken,
) -> TokenStream:
    """Prompt that ends exactly at <SEP1>: the model generates the prosody
    section next. Only the first sentence is included; subsequent sentences
    are appended by the caller as generation proceeds."""
    if not text_sentences or not text_sentences[0]:
        raise ValueError("empty input text")
    first = text_sentences[0]
    if is_reserved(first):
        raise ValueError(f"invalid sentence text: {first!r}")
    return _prefix(instruction, spk_token) + [first, SEP1]


def build_continuation_prompt(
    reference: Sequence[SentenceSequence],
    instruction: str,
    spk_token: ProsodyToken,
    include_global: bool = False,
) -> TokenStream:
    """Prompt holding fully tokenized reference speech, ending after the last
    <SEP2> so the model continues with a new sentence."""
    if not reference:
        raise ValueError("empty reference")
    for sentence in reference:
        if not sentence.items:
            raise ValueError(f"reference sentence missing prosody section: {sentence.text!r}")
    return _prefix(instruction, spk_token) + serialize_sequences(reference, include_global)


# ---------------------------------------------------------------------------
# Plain-text surface form and sentence segmentation
# ---------------------------------------------------------------------------


def _quote_token(token: str) -> str:
    if token and not any(c.isspace() for c in token) and not any(c in token for c in "\"'\\"):
        return token
    escaped = token.replace("\\", "\\\\").replace('"', '\\"')
    return f'"{escaped}"'


def stream_to_text(stream: Sequence[str]) -> str:
    """Space-joined inspection form; only elements containing whitespace or
    quote characters are quoted, and the line round-trips through
    text_to_stream."""
    return " ".join(_quote_token(t) for t in stream)


def text_to_stream(line: str) -> TokenStream:
    return shlex.split(line)


_SENTENCE_RE = re.compile(r"[^.!?]*[.!?]+[\"'”’)\]]*\s*", re.DOTALL)


def segment_sentences(text: str) -> list[str]:
    """Split raw text on terminal punctuation (plus closing quotes); trailing
    text without a terminator becomes a final sentence."""
    sentences = []
    pos = 0
    for match in _SENTENCE_RE.finditer(text):
        if match.start() != pos:
            break
        chunk = match.group().strip()
        if chunk:
            sentences.append(chunk)
        pos = match.end()
    tail = text[pos:].strip()
    if tail:
        sentences.append(tail)
    return sentences
