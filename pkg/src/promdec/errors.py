"""Exception hierarchy shared by all promdec modules.

Everything raised on bad *data* (as opposed to programming errors) derives
from :class:`PromdecError`, which the CLI maps to exit status 2.
"""


class PromdecError(Exception):
    """Base class for all promdec data and usage errors."""


class CorpusError(PromdecError):
    """Invalid corpus content: bad annotation values, duplicate ids, etc."""


class VocabError(PromdecError):
    """Malformed reference token or inconsistent token set."""


class EmissionFormatError(PromdecError):
    """Emission file violates the binary format or its row constraints."""


class LMError(PromdecError):
    """Language-model training or query failure."""


class DegenerateCountsError(LMError):
    """Count-of-counts too sparse for modified Kneser-Ney discounts."""


class ArpaParseError(LMError):
    """Malformed ARPA file; message carries the offending line number."""


class DecodeError(PromdecError):
    """Decoder misuse: tagged emissions where base ones are required, etc."""


class MetricError(PromdecError):
    """Inconsistent metric inputs (count mismatches, ungated utterances)."""


class HarnessError(PromdecError):
    """Experiment configuration or orchestration failure."""
