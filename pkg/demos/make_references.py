"""Render training references for one utterance in every tagging mode.

Detector modes reduce each prosodic word to its prominence digit; the
ASR modes spell words out as characters, suffixing the digit onto every
character of words whose level the mode tags.
"""

from promdec import ProminenceLevel, ProsodicWord, TaggingMode, Utterance
from promdec.corpus import asr_reference, detector_reference


def build(words):
    return Utterance(
        id="001M002F_0000",
        conversation_id="001M002F",
        speaker_id="001M",
        prosodic_words=tuple(
            ProsodicWord(tokens=tuple(tokens), level=level) for tokens, level in words
        ),
    )


def main():
    calm = build(
        [
            (("die",), ProminenceLevel.PL0),
            (("waren",), ProminenceLevel.PL0),
            (("alle",), ProminenceLevel.PL2),
        ]
    )
    lively = build(
        [
            (("wah",), ProminenceLevel.PL0),
            (("voll",), ProminenceLevel.PL2),
            (("nett",), ProminenceLevel.PL1),
        ]
    )
    fused = build(
        [
            (("sie", "hat"), ProminenceLevel.PL0),
            (("erzählt",), ProminenceLevel.PL2),
        ]
    )

    print("utterance: die(0) waren(0) alle(2)")
    for mode in [
        TaggingMode.BASELINE,
        TaggingMode.TAG0,
        TaggingMode.TAG2,
        TaggingMode.TAG02,
        TaggingMode.TAG012,
    ]:
        print(f"  {mode.value:<9} {asr_reference(calm, mode)}")

    print("\nutterance: wah(0) voll(2) nett(1)")
    print(f"  {'tag012':<9} {asr_reference(lively, TaggingMode.TAG012)}")
    print(f"  {'det012':<9} {detector_reference(lively, TaggingMode.DET012)}")

    print("\ntwo orthographic tokens forming one prosodic word: 'sie hat'(0) erzählt(2)")
    print(f"  {'det02':<9} {detector_reference(fused, TaggingMode.DET02)}")


if __name__ == "__main__":
    main()
