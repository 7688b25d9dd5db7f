"""Character-level Bangla text-to-IPA transcription."""
from banipa._kernels import COMPILED
from banipa.corpus import CorpusStats, Sample, SplitSpec, WordPair
from banipa.model import ModelConfig
from banipa.pipeline import IpaDictionary, ModelContext, PipelineConfig, preset, transcribe_text
from banipa.segmenter import Token, TokenKind, segment

__version__ = "0.1.0"

__all__ = [
    "COMPILED",
    "CorpusStats",
    "IpaDictionary",
    "ModelConfig",
    "ModelContext",
    "PipelineConfig",
    "Sample",
    "SplitSpec",
    "Token",
    "TokenKind",
    "WordPair",
    "preset",
    "segment",
    "transcribe_text",
]
