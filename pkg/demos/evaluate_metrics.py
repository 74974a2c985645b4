"""Alignment-gated scoring on a constructed two-utterance example.

Utterances whose hypothesis length disagrees with the reference are
gated out of accuracy; unassigned predictions stay in the denominator
but can never match.
"""

from promdec import ProminenceLevel
from promdec.metrics import (
    aligned_accuracy,
    mean_std,
    per,
    percent_aligned,
    render_table,
    wer,
)

PL0 = ProminenceLevel.PL0
PL1 = ProminenceLevel.PL1
PL2 = ProminenceLevel.PL2


def main():
    refs = [[PL0, PL0, PL2], [PL2, PL1, PL0]]
    hyps = [[PL0, PL0, PL2], [PL0, PL1, None]]

    print("word error rate  :", wer([["die", "waren", "alle"]], [["die", "waren", "alte"]]))
    print("level error rate :", per(refs, hyps))
    print("percent aligned  :", percent_aligned([True, True, False, True]))

    result = aligned_accuracy(refs, hyps)
    print("accuracy         :", round(result.accuracy, 2))
    print("recall           :", {k: round(v, 2) for k, v in result.recall.items()})
    print("f1               :", {k: round(v, 2) for k, v in result.f1.items()})
    print("confusion rows (ref PL0/PL1/PL2 x hyp PL0/PL1/PL2):")
    for i, level in enumerate(("PL0", "PL1", "PL2")):
        row = result.confusion.counts[i]
        print(f"  {level}: {row}  unassigned={result.confusion.unassigned[i]}")

    mean, std = mean_std([20.0, 30.0])
    print("\nfold aggregation of [20, 30] ->", f"{mean}±{round(std, 4)}")
    print()
    print(
        render_table(
            [
                {"type": "detector:det02", "test_set": "dev", "per": 5.0,
                 "percent_aligned": 100.0, "accuracy": None},
                {"type": "asr:tag02", "test_set": "test", "per": per(refs, hyps),
                 "percent_aligned": 66.67, "accuracy": result.accuracy},
            ]
        )
    )


if __name__ == "__main__":
    main()
