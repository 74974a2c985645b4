"""Majority-vote prominence extraction from a tagged hypothesis.

Every tagged character votes for its word's level; unanimous or
majority wins, ties and vote-free words come out Unassigned.
"""

from promdec.corpus import TaggingMode
from promdec.prominence import extract_level, extract_sequence, segment_words
from promdec.vocab import parse_reference, render_tokens


def main():
    hypothesis = "|d0 i0 e0 |w0 a2 r0 e0 n0 |a2 l2 l0 e0 |m i t |"
    tokens = parse_reference(hypothesis, TaggingMode.TAG012)
    print("hypothesis:", hypothesis)

    for segment in segment_words(tokens):
        word = render_tokens(segment.tokens)
        level = extract_level(segment)
        shown = f"PL{level.value}" if level is not None else "Unassigned"
        print(f"  {word:<14} votes={segment.tag_string or '(none)':<6} -> {shown}")

    levels = extract_sequence(tokens)
    print("sequence  :", [f"PL{l.value}" if l is not None else None for l in levels])


if __name__ == "__main__":
    main()
