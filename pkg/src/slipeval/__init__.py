"""Speech-error-aware evaluation of word-timestamped ASR transcripts.

The pipeline: load an annotated error corpus (``corpus``), load machine
transcripts with word timestamps (``transcript``), locate each error's
token span by fuzzy matching (``align``), classify what the recognizer did
with it (``classify``: Corrected / Faithful / Incorrect), analyze outcome
distributions across linguistic conditions (``analyze``), and build biased
recognition lattices over error and intended words (``lattice``). The
``synth`` module generates seeded fixtures with planted outcomes, and
``cli`` exposes everything as the ``slipeval`` command.
"""

from .align import (
    AlignConfig,
    AlignedSpan,
    align_all,
    align_error,
    levenshtein,
    similarity,
    token_levenshtein,
)
from .analyze import (
    CONDITION_NAMES,
    ChiSquareResult,
    ConditionBreakdown,
    ContingencyTable,
    breakdown,
    chi_square,
    chi_square_survival,
    step_sample,
    tabulate,
    write_reports,
)
from .classify import (
    ClassifiedError,
    Diagnostic,
    Outcome,
    accuracy,
    classify,
    classify_all,
)
from .corpus import (
    ErrorClass,
    ErrorRecord,
    SoundErrorKind,
    SyllablePosition,
    WordPosition,
    dump_corpus,
    load_corpus,
)
from .errors import (
    ConfigError,
    CorpusError,
    DegenerateTable,
    EmptyInput,
    FixtureSpecError,
    InvalidProbability,
    MalformedNotation,
    NoPath,
    NonMonotonicTimestamps,
    RowError,
    SchemaError,
    SlipevalError,
    UnknownCondition,
    UnknownRecord,
)
from .lattice import (
    Arc,
    BiasConfig,
    Lattice,
    PathClass,
    best_path,
    build_error_lattice,
    export,
    reweight,
)
from .notation import (
    ParsedAnnotation,
    parse_notation,
    render_notation,
    strip_context,
    strip_notation,
)
from .synth import FixtureCell, FixtureSpec, generate_fixture, load_fixture_spec, write_fixture
from .transcript import Transcript, WordToken, load_transcript, normalize, tokens_in_window

__version__ = "0.1.0"
