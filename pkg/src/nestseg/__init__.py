"""Rule-cascade sentence segmentation producing nested sentence trees."""

from .model import (Decision, NodeKind, SentenceNode, SentenceTree, Span, Token, TokenKind,
                    TraceEvent, flatten, validate)
from .tokenizer import TokenizerConfig, resolve_ambiguous_quotes, tokenize
from .lexicon import IndicatorEntry, Lexicon, default_lexicon, load_lexicon, match_indicator
from .cascade import CascadeConfig, Mode, decompose, segment, segment_text
from .corpus_io import CorpusDocument, emit_annotated, parse_annotated, read_corpus

__version__ = "0.1.0"
