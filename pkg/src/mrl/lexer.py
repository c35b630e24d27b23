"""Tokenizer for mrl source text.

The parser drives it one token at a time and may jump ``pos`` around to read
raw text (string templates, literals and character classes in syntax
definitions), so the lexer keeps no lookahead buffer of its own.
"""

from dataclasses import dataclass

from .values import KEYWORDS

OPERATORS = sorted("""
    !:= := <- => == != <= >= && || += -= *= /= &= ::
    + - * / % < > = ! ( ) [ ] { } , ; : . ? | & # @ ' $
""".split(), key=len, reverse=True)


@dataclass
class Token:
    kind: str        # id | kw | int | op | str | eof | err
    text: str
    pos: int
    end: int
    ws_before: bool

    def is_op(self, *texts):
        return self.kind == "op" and self.text in texts

    def is_kw(self, *texts):
        return self.kind == "kw" and self.text in texts

    def __str__(self):
        return "end of input" if self.kind == "eof" else repr(self.text)


def _ident_char(ch):
    return ch.isalnum() or ch == "_"


class Lexer:
    def __init__(self, src):
        self.src = src
        self.pos = 0

    def skip_space(self):
        """Skip whitespace and comments; report whether anything was skipped."""
        src, i, n = self.src, self.pos, len(self.src)
        start = i
        while i < n:
            ch = src[i]
            if ch in " \t\r\n":
                i += 1
            elif src.startswith("//", i):
                j = src.find("\n", i)
                i = n if j < 0 else j + 1
            elif src.startswith("/*", i):
                j = src.find("*/", i + 2)
                i = n if j < 0 else j + 2
            else:
                break
        self.pos = i
        return i > start

    def next(self):
        ws = self.skip_space()
        src, i = self.src, self.pos
        if i >= len(src):
            return Token("eof", "", i, i, ws)
        ch = src[i]
        if ch == '"':
            self.pos = i + 1
            return Token("str", '"', i, i + 1, ws)
        if ch.isdigit() and ch.isascii():
            j = i
            while j < len(src) and src[j].isdigit() and src[j].isascii():
                j += 1
            self.pos = j
            return Token("int", src[i:j], i, j, ws)
        if ch == "\\" and i + 1 < len(src) and (src[i + 1].isalpha() or src[i + 1] == "_"):
            j = i + 1
            while j < len(src) and _ident_char(src[j]):
                j += 1
            self.pos = j
            return Token("id", src[i + 1:j], i, j, ws)
        if ch.isalpha() or ch == "_":
            j = i
            while j < len(src) and _ident_char(src[j]):
                j += 1
            word = src[i:j]
            for head, tail in (("top", "-down"), ("bottom", "-up")):
                if word == head and src.startswith(tail, j) and not (
                        j + len(tail) < len(src) and _ident_char(src[j + len(tail)])):
                    j += len(tail)
                    word += tail
            self.pos = j
            return Token("kw" if word in KEYWORDS else "id", word, i, j, ws)
        for op in OPERATORS:
            if src.startswith(op, i):
                self.pos = i + len(op)
                return Token("op", op, i, i + len(op), ws)
        self.pos = i + 1
        return Token("err", ch, i, i + 1, ws)
