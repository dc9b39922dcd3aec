"""Tokenizer for the graph query language, with line/column tracking."""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import QuerySyntaxError

# Multi-character punctuation first so "<=" never lexes as "<" "=".
_PUNCT = ("<=", ">=", "<>", "..", "->", "<-", "(", ")", "[", "]", "{", "}",
          ",", ":", ".", "-", "<", ">", "=", "*")


@dataclass(frozen=True)
class Token:
    kind: str  # IDENT | INT | FLOAT | STRING | PUNCT | EOF
    value: str | int | float
    line: int
    column: int

    def is_punct(self, text: str) -> bool:
        return self.kind == "PUNCT" and self.value == text

    def is_keyword(self, word: str) -> bool:
        return self.kind == "IDENT" and str(self.value).upper() == word


_ESCAPES = {"\\": "\\", "'": "'", '"': '"', "n": "\n", "t": "\t"}


def tokenize_query(text: str) -> list[Token]:
    tokens: list[Token] = []
    i = 0
    line, col = 1, 1
    n = len(text)

    def error(message: str) -> QuerySyntaxError:
        return QuerySyntaxError(message, line, col)

    while i < n:
        ch = text[i]
        if ch == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue

        start_line, start_col = line, col

        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(Token("IDENT", text[i:j], start_line, start_col))
            col += j - i
            i = j
            continue

        if ch.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            # A '.' continues the number only when followed by a digit;
            # "1..2" must lex as INT, "..", INT.
            if j < n and text[j] == "." and j + 1 < n and text[j + 1].isdigit():
                j += 1
                while j < n and text[j].isdigit():
                    j += 1
                tokens.append(Token("FLOAT", float(text[i:j]), start_line, start_col))
            else:
                tokens.append(Token("INT", int(text[i:j]), start_line, start_col))
            col += j - i
            i = j
            continue

        if ch in "'\"":
            quote = ch
            j = i + 1
            buf: list[str] = []
            while True:
                if j >= n:
                    raise error("unterminated string literal")
                c = text[j]
                if c == "\n":
                    raise error("unterminated string literal")
                if c == "\\":
                    if j + 1 >= n or text[j + 1] not in _ESCAPES:
                        raise error("invalid string escape")
                    buf.append(_ESCAPES[text[j + 1]])
                    j += 2
                    continue
                if c == quote:
                    j += 1
                    break
                buf.append(c)
                j += 1
            tokens.append(Token("STRING", "".join(buf), start_line, start_col))
            col += j - i
            i = j
            continue

        for punct in _PUNCT:
            if text.startswith(punct, i):
                # "<-" is an arrow only when an edge body or sugar dash
                # follows; "a.x<-1" must lex as "<" then "-1".
                if punct == "<-" and not text.startswith(("[", "-"), i + 2):
                    punct = "<"
                tokens.append(Token("PUNCT", punct, start_line, start_col))
                i += len(punct)
                col += len(punct)
                break
        else:
            raise error(f"unexpected character {ch!r}")

    tokens.append(Token("EOF", "", line, col))
    return tokens
