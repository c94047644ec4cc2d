"""
Tokenizer for Lagrangian and equation-of-motion source text.

Unicode spellings are folded onto their ASCII names before matching
(ψ -> psi, ħ -> hbar, ẋ -> d(x,t) ...), so the parser only ever sees
one alphabet. Line and column always refer to the original text.
"""
import re
from dataclasses import dataclass

from lagrange_ca.errors import LagrangianSyntaxError

TOKEN_TYPES = [
    ("NUMBER", r"\d+(?:\.\d+)?(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?"),
    ("IDENT", r"[A-Za-z_][A-Za-z_0-9]*"),
    ("CARET", r"\^|\*\*"),
    ("PLUS", r"\+"),
    ("MINUS", r"-"),
    ("STAR", r"\*"),
    ("SLASH", r"/"),
    ("LPAREN", r"\("),
    ("RPAREN", r"\)"),
    ("COMMA", r","),
    ("EQUALS", r"="),
    ("NEWLINE", r"\n"),
    ("WHITESPACE", r"[ \t\r]+"),
    ("MISMATCH", r"."),
]

token_pattern = re.compile("|".join(f"(?P<{name}>{pattern})" for name, pattern in TOKEN_TYPES))

# Longest spellings first so ψ₀ wins over ψ.
UNICODE_ALIASES = [
    ("ψ₀", "psi0"),
    ("ψ", "psi"),
    ("ħ", "hbar"),
    ("ν", "nu"),
    ("π", "pi"),
    ("ẍ", "d2(x,t)"),
    ("ẋ", "d(x,t)"),
    ("·", "*"),
    ("×", "*"),
    ("−", "-"),
    ("²", "^2"),
]


@dataclass
class Token:
    type: str
    value: str
    line: int = 1
    column: int = 1

    def __repr__(self):
        return f"{self.type}:{self.value}@{self.line}:{self.column}"


def _fold_unicode(source: str) -> tuple[str, list[tuple[int, int]]]:
    """Replace aliases and keep, per output character, its source (line, column)."""
    out: list[str] = []
    origin: list[tuple[int, int]] = []
    line, column = 1, 1
    i = 0
    while i < len(source):
        for alias, ascii_name in UNICODE_ALIASES:
            if source.startswith(alias, i):
                out.append(ascii_name)
                origin.extend([(line, column)] * len(ascii_name))
                i += len(alias)
                column += len(alias)
                break
        else:
            ch = source[i]
            out.append(ch)
            origin.append((line, column))
            i += 1
            if ch == "\n":
                line, column = line + 1, 1
            else:
                column += 1
    origin.append((line, column))
    return "".join(out), origin


def tokenize(source: str) -> list[Token]:
    """Split source into tokens, dropping whitespace and # comments; ends with EOF."""
    text, origin = _fold_unicode(source)
    text = re.sub(r"#[^\n]*", lambda m: " " * len(m.group()), text)

    tokens: list[Token] = []
    for match in token_pattern.finditer(text):
        kind = match.lastgroup
        value = match.group()
        line, column = origin[match.start()]
        if kind in ("WHITESPACE", "NEWLINE"):
            continue
        if kind == "MISMATCH":
            raise LagrangianSyntaxError(f"unexpected character {value!r}", line, column)
        tokens.append(Token(kind, value, line, column))

    line, column = origin[-1]
    tokens.append(Token("EOF", "", line, column))
    return tokens
