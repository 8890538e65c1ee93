"""S-expression reader for the SMT-LIB 2 subset this solver accepts."""

from __future__ import annotations


class SexprError(ValueError):
    pass


def tokenize(text: str) -> list[str]:
    out: list[str] = []
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c in " \t\r\n":
            i += 1
        elif c == ";":
            while i < n and text[i] != "\n":
                i += 1
        elif c in "()":
            out.append(c)
            i += 1
        elif c == "|":
            j = text.find("|", i + 1)
            if j < 0:
                raise SexprError("unterminated |symbol|")
            out.append(text[i : j + 1])
            i = j + 1
        elif c == '"':
            j = i + 1
            while j < n and text[j] != '"':
                j += 1
            if j >= n:
                raise SexprError("unterminated string")
            out.append(text[i : j + 1])
            i = j + 1
        else:
            j = i
            while j < n and text[j] not in " \t\r\n();|":
                j += 1
            out.append(text[i:j])
            i = j
    return out


def parse_all(text: str) -> list:
    tokens = tokenize(text)
    pos = 0
    forms = []
    while pos < len(tokens):
        form, pos = _parse(tokens, pos)
        forms.append(form)
    return forms


def _parse(tokens: list[str], pos: int):
    if pos >= len(tokens):
        raise SexprError("unexpected end of input")
    tok = tokens[pos]
    if tok == "(":
        pos += 1
        items = []
        while pos < len(tokens) and tokens[pos] != ")":
            item, pos = _parse(tokens, pos)
            items.append(item)
        if pos >= len(tokens):
            raise SexprError("missing )")
        return items, pos + 1
    if tok == ")":
        raise SexprError("unexpected )")
    return _atom(tok), pos + 1


def _atom(tok: str):
    if tok.startswith("|") and tok.endswith("|"):
        return tok[1:-1]
    if tok.lstrip("-").isdigit() and tok not in ("-",):
        return int(tok)
    return tok


def unparse(x) -> str:
    if isinstance(x, list):
        return "(" + " ".join(unparse(i) for i in x) + ")"
    if isinstance(x, int) and not isinstance(x, bool):
        return str(x)
    return str(x)
