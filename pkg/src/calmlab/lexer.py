"""Tokenizer shared by the program parser and the fact-file reader."""

from __future__ import annotations

from dataclasses import dataclass


class LexError(Exception):
    def __init__(self, message: str, line: int, col: int, filename: str = "<input>"):
        self.message = message
        self.line = line
        self.col = col
        self.filename = filename
        super().__init__(f"{filename}:{line}:{col}: {message}")


@dataclass(frozen=True, slots=True)
class Token:
    kind: str  # IDENT VAR INT STRING ADDR WILD op-kinds EOF
    text: str
    line: int
    col: int


_PUNCT = [
    # longest first
    (":-", "ARROW"),
    ("!=", "NEQ"),
    ("<=", "LE"),
    ("(", "LPAREN"),
    (")", "RPAREN"),
    ("{", "LBRACE"),
    ("}", "RBRACE"),
    ("[", "LBRACKET"),
    ("]", "RBRACKET"),
    (",", "COMMA"),
    (".", "DOT"),
    (":", "COLON"),
    ("<", "LT"),
    (">", "GT"),
    ("=", "EQ"),
    ("!", "BANG"),
]


def _is_ident_start(c: str) -> bool:
    return c.isalpha() or c == "_"


def _is_ident_char(c: str) -> bool:
    return c.isalnum() or c == "_"


def tokenize(text: str, filename: str = "<input>") -> list[Token]:
    toks: list[Token] = []
    line, col = 1, 1
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if c in " \t\r":
            i += 1
            col += 1
            continue
        if c == "#":
            while i < n and text[i] != "\n":
                i += 1
            continue
        start_line, start_col = line, col
        # '2p' names the two-phase-set variant and must not lex as INT+IDENT
        if text.startswith("2p", i) and (i + 2 >= n or not _is_ident_char(text[i + 2])):
            toks.append(Token("IDENT", "2p", start_line, start_col))
            i += 2
            col += 2
            continue
        if c.isdigit() or (c == "-" and i + 1 < n and text[i + 1].isdigit()):
            j = i + 1
            while j < n and text[j].isdigit():
                j += 1
            toks.append(Token("INT", text[i:j], start_line, start_col))
            col += j - i
            i = j
            continue
        if c == "@":
            j = i + 1
            if j >= n or not _is_ident_start(text[j]):
                raise LexError("expected machine name after '@'", line, col, filename)
            while j < n and _is_ident_char(text[j]):
                j += 1
            toks.append(Token("ADDR", text[i + 1 : j], start_line, start_col))
            col += j - i
            i = j
            continue
        if c == '"':
            j = i + 1
            buf: list[str] = []
            while j < n and text[j] != '"':
                if text[j] == "\n":
                    raise LexError("unterminated string", start_line, start_col, filename)
                if text[j] == "\\" and j + 1 < n:
                    esc = text[j + 1]
                    if esc == "n":
                        buf.append("\n")
                    elif esc == "t":
                        buf.append("\t")
                    elif esc in ('"', "\\"):
                        buf.append(esc)
                    else:
                        raise LexError(f"bad escape '\\{esc}'", line, col, filename)
                    j += 2
                else:
                    buf.append(text[j])
                    j += 1
            if j >= n:
                raise LexError("unterminated string", start_line, start_col, filename)
            toks.append(Token("STRING", "".join(buf), start_line, start_col))
            col += j + 1 - i
            i = j + 1
            continue
        if _is_ident_start(c):
            j = i + 1
            while j < n and _is_ident_char(text[j]):
                j += 1
            word = text[i:j]
            if word == "_":
                kind = "WILD"
            elif word[0].isupper():
                kind = "VAR"
            else:
                kind = "IDENT"
            toks.append(Token(kind, word, start_line, start_col))
            col += j - i
            i = j
            continue
        for sym, kind in _PUNCT:
            if text.startswith(sym, i):
                toks.append(Token(kind, sym, start_line, start_col))
                i += len(sym)
                col += len(sym)
                break
        else:
            raise LexError(f"unexpected character {c!r}", line, col, filename)
    toks.append(Token("EOF", "", line, col))
    return toks
