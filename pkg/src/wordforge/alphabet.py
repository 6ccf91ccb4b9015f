"""Character set shared by the renderer, encoders and network heads.

Class ids: 0-9 are the digits, 10-35 the letters a-z, 36 the null marker
used by the character-sequence encoding for positions past the end of a
word.
"""

import re

ALPHABET = "0123456789abcdefghijklmnopqrstuvwxyz"
NULL_CLASS = len(ALPHABET)  # 36
NUM_CHAR_CLASSES = len(ALPHABET) + 1  # 37
MAX_WORD_LEN = 23

CHAR_TO_CLASS = {c: i for i, c in enumerate(ALPHABET)}

WORD_RE = re.compile(r"[a-z0-9]{1,%d}" % MAX_WORD_LEN)


def is_valid_word(word: str) -> bool:
    return WORD_RE.fullmatch(word) is not None


def char_class(ch: str) -> int:
    try:
        return CHAR_TO_CLASS[ch]
    except KeyError:
        raise ValueError(f"character {ch!r} outside alphabet [a-z0-9]") from None


def class_char(cls: int) -> str:
    if cls == NULL_CLASS:
        return ""
    return ALPHABET[cls]
