"""Train a word n-gram model, round-trip it through its text format, and
query a few probabilities.

Smoothing follows modified Kneser-Ney with discounts estimated from the
count-of-count statistics; degenerate corpora fall back to an explicit
fixed discount.
"""

import tempfile
from pathlib import Path

from promdec import train_lm
from promdec.lm import read_arpa, score, sentence_logprob, write_arpa

SENTENCES = [
    "die waren alle nett".split(),
    "die waren wirklich nett".split(),
    "alle waren nett".split(),
    "die waren alle da".split(),
    "wirklich alle waren da".split(),
]


def main():
    model = train_lm(SENTENCES, order=3, fixed_discount=0.5)
    print(f"trained order-{model.order} model over {len(model.vocab)} words")

    for context, word in [(("die",), "waren"), (("waren",), "alle"), ((), "nett")]:
        shown = " ".join(context) or "(empty)"
        print(f"  log10 p({word} | {shown}) = {score(model, context, word):+.4f}")

    queries = ["die waren alle nett", "nett alle waren die"]
    for q in queries:
        print(f"  sentence log10 p[{q}] = {sentence_logprob(model, q.split()):+.4f}")

    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "model.arpa"
        write_arpa(model, path)
        back = read_arpa(path)
        same = score(back, ("die",), "waren") == score(model, ("die",), "waren")
        print(f"text round trip preserves scores: {same}")


if __name__ == "__main__":
    main()
