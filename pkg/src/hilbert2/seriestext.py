"""Text format for series: sums of terms `c*T^i*pi^j`.

Grammar (whitespace-insensitive)::

    series  :=  ['-'] term (('+'|'-') term)*
    term    :=  factor ('*' factor)*
    factor  :=  coeff | 'T' ['^' int] | 'pi' ['^' int]
    coeff   :=  int ['/' int]          # denominator must be a power of p

Exponents default to 1.  Examples: ``1 + pi``, ``3*T^-1*pi^2 - 1/3*pi^5``.
Coefficients are prime-subring integers; rings with f > 1 have no text
form (build those with SeriesRing.from_terms).
"""

from __future__ import annotations

import re

from .errors import ParseError
from .laurent import Series, SeriesRing

_TOKEN = re.compile(r"\s*(?:(?P<num>\d+)|(?P<name>pi|T)|(?P<op>[-+*/^()]))")


def _tokenize(text: str):
    pos = 0
    out = []
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            if text[pos:].strip() == "":
                break
            raise ParseError(f"unexpected character {text[pos]!r}", pos=pos)
        if m.lastgroup == "num":
            out.append(("num", int(m.group("num")), pos))
        elif m.group("name"):
            out.append(("name", m.group("name"), pos))
        elif m.group("op"):
            out.append(("op", m.group("op"), pos))
        pos = m.end()
    return out


def parse_series(ring: SeriesRing, text: str) -> Series:
    """Parse the documented term grammar into a normalized Series."""
    if ring.f != 1:
        raise ParseError("the text format only covers prime-subring coefficients (f = 1)")
    toks = _tokenize(text)
    if not toks:
        raise ParseError("empty series text", pos=0, expected="a term")
    idx = 0
    terms: dict[tuple[int, int], int] = {}
    max_e = 0
    parsed: list[tuple[int, int, int, int, int]] = []  # sign*num, den_e, i, j

    def peek():
        return toks[idx] if idx < len(toks) else ("end", None, len(text))

    def take():
        nonlocal idx
        t = peek()
        idx += 1
        return t

    sign = 1
    kind, val, pos = peek()
    if kind == "op" and val in "+-":
        take()
        sign = -1 if val == "-" else 1
    while True:
        num, den_e, i_exp, j_exp = _parse_term(ring, take, peek, text)
        parsed.append((sign * num, den_e, i_exp, j_exp, 0))
        kind, val, pos = peek()
        if kind == "end":
            break
        if kind != "op" or val not in "+-":
            raise ParseError("expected '+' or '-' between terms", pos=pos, expected="+ or -")
        take()
        sign = -1 if val == "-" else 1
    max_e = max(d for _, d, _, _, _ in parsed) if parsed else 0
    for num, den_e, i, j, _ in parsed:
        key = (i, j)
        terms[key] = terms.get(key, 0) + num * ring.p ** (max_e - den_e)
    return ring.from_terms(terms, e=max_e)


def _parse_term(ring, take, peek, text):
    num = 1
    den_e = 0
    i_exp = 0
    j_exp = 0
    saw_factor = False
    while True:
        kind, val, pos = peek()
        if kind == "num":
            take()
            num *= val
            kind2, val2, pos2 = peek()
            if kind2 == "op" and val2 == "/":
                take()
                kd, vd, pd = take()
                if kd != "num":
                    raise ParseError("expected a denominator", pos=pd, expected="integer")
                e = 0
                d = vd
                while d % ring.p == 0:
                    d //= ring.p
                    e += 1
                if d != 1 or e == 0:
                    raise ParseError(
                        f"denominator {vd} is not a positive power of p={ring.p}", pos=pd)
                den_e += e
            saw_factor = True
        elif kind == "name":
            take()
            exp = 1
            kind2, val2, _ = peek()
            if kind2 == "op" and val2 == "^":
                take()
                ks, vs, ps = peek()
                neg = False
                if ks == "op" and vs == "-":
                    take()
                    neg = True
                ke, ve, pe = take()
                if ke != "num":
                    raise ParseError("expected an integer exponent", pos=pe, expected="integer")
                exp = -ve if neg else ve
            if val == "T":
                i_exp += exp
            else:
                j_exp += exp
            saw_factor = True
        else:
            raise ParseError("expected a coefficient or variable", pos=pos,
                             expected="integer, T or pi")
        kind, val, pos = peek()
        if kind == "op" and val == "*":
            take()
            continue
        break
    if not saw_factor:
        raise ParseError("empty term", pos=peek()[2])
    return num, den_e, i_exp, j_exp


def format_series(s: Series, max_terms: int | None = None) -> str:
    """Canonical text form; parse(format(s)) reproduces s exactly."""
    if s.ring.f != 1:
        raise ValueError("the text format only covers f = 1 rings")
    mod = s.ring.mod
    items = sorted(s.terms().items(), key=lambda kv: (kv[0][1], kv[0][0]))
    if not items:
        return "0"
    if max_terms is not None and len(items) > max_terms:
        items = items[:max_terms]
        truncated = True
    else:
        truncated = False
    parts = []
    for (i, j), c in items:
        num = c.mant[0] % mod
        if num > mod // 2:
            num -= mod
        body = []
        if num < 0:
            sign = "-"
            num = -num
        else:
            sign = "+"
        coeff_txt = str(num)
        if c.e:
            coeff_txt += f"/{s.ring.p**c.e}"
        if i == 0 and j == 0:
            body.append(coeff_txt)
        else:
            if coeff_txt != "1":
                body.append(coeff_txt)
            if i:
                body.append("T" if i == 1 else f"T^{i}")
            if j:
                body.append("pi" if j == 1 else f"pi^{j}")
        parts.append((sign, "*".join(body)))
    first_sign, first_body = parts[0]
    out = ("-" if first_sign == "-" else "") + first_body
    for sign, body in parts[1:]:
        out += f" {sign} {body}"
    if truncated:
        out += " + ..."
    return out
