"""Prominence-aware CTC decoding and evaluation toolkit.

The pipeline downstream of a CTC acoustic model for word-level prosodic
prominence: reference generation over prominence-tagged character
alphabets, greedy and lexicon/LM-constrained decoding, majority-vote
prominence extraction, and alignment-gated evaluation with k-fold
aggregation.
"""

from .corpus import (
    Corpus,
    ProminenceLevel,
    ProsodicWord,
    TaggingMode,
    Utterance,
    asr_reference,
    collapse_level,
    detector_reference,
    filter_corpus,
    load_corpus,
    normalize_text,
    project_annotations,
    save_corpus,
)
from .decoder import (
    DecodeConfig,
    DecodeMode,
    Hypothesis,
    beam_decode,
    ctc_collapse,
    ctc_score,
    decode_lexfree_tagged,
    exhaustive_decode,
    greedy_decode,
)
from .emissions import (
    EmissionMatrix,
    marginalize_tags,
    read_emissions,
    synth_emissions,
    write_emissions,
)
from .errors import (
    ArpaParseError,
    CorpusError,
    DecodeError,
    DegenerateCountsError,
    EmissionFormatError,
    HarnessError,
    LMError,
    MetricError,
    PromdecError,
    VocabError,
)
from .harness import (
    FoldPlan,
    RunConfig,
    crossval,
    make_folds,
    run_asr_eval,
    run_detector_eval,
)
from .lm import (
    CountTable,
    NGramModel,
    count_ngrams,
    estimate_mkn,
    read_arpa,
    score,
    sentence_logprob,
    train_lm,
    write_arpa,
)
from .metrics import (
    ConfusionMatrix,
    EditCounts,
    EvalReport,
    aggregate_folds,
    aligned_accuracy,
    align_gate,
    edit_distance,
    per,
    percent_aligned,
    wer,
)
from .prominence import (
    WordSegment,
    extract_level,
    extract_sequence,
    segment_words,
)
from .vocab import (
    Lexicon,
    LexiconTrie,
    Token,
    TokenKind,
    TokenSet,
    build_lexicon,
    build_trie,
    build_vocab,
    parse_reference,
    strip_tag,
)

__version__ = "0.1.0"
