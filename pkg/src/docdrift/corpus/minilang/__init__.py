from . import lang
from .adapter import MiniLangAdapter, SOURCE_SUFFIX, TEST_FILE_NAME

__all__ = ["MiniLangAdapter", "SOURCE_SUFFIX", "TEST_FILE_NAME", "lang"]
