"""Line-oriented scene files describing a weak-contraction IFS.

Example (the middle-third Cantor set)::

    space 1 euclidean box [0] [1]
    map L similarity 0.3333333333333333 [0] alpha const 0.3333333333333333
    map R similarity 0.3333333333333333 [0.6666666666666666] alpha const 0.3333333333333333
    set seed 7

Grammar::

    line        := space_decl | map_decl | option_decl | comment
    space_decl  := "space" INT metric "box" num_list num_list ["diameter" NUM]
    map_decl    := "map" IDENT body "alpha" alpha_spec
    body        := "similarity" NUM num_list ["rotate" NUM]
                 | "affine" num_matrix num_list
                 | "expr" STRING+            (one formula in x1..xd per coordinate)
    alpha_spec  := "const" NUM | "piecewise" pair+ | "expr" STRING   (formula in t)
    pair        := NUM ":" NUM               (breakpoint:value; the first breakpoint is 0)
    option_decl := "set" IDENT (NUM | STRING | IDENT)

Lists are bracketed with comma or blank separators, e.g. ``[0, 0.5]`` or
``[[0.5 0] [0 0.5]]``.  ``#`` starts a comment.
"""
from __future__ import annotations

import hashlib
import math
import re
from dataclasses import dataclass, field

from .coeff import DEFAULT_SAMPLES, CoefficientFunction, envelope
from .errors import (
    CoefficientOutOfRange,
    DuplicateMapName,
    EvaluatesOutsideUnit,
    ExpressionSyntaxError,
    FewerThanTwoMaps,
    GridTooCoarse,
    InvalidCoefficient,
    SceneSyntaxError,
)
from .expr import parse_expression, to_source
from .ifs import METRICS, AffineMap, ExpressionMap, IFSystem, MetricDomain, SimilarityMap, WeakContraction

OPTION_TYPES = {
    "seed": int,
    "points": int,
    "burn_in": int,
    "pairs": int,
    "alpha_samples": int,
    "t_points": int,
    "box_base": float,
    "box_ratio": float,
    "box_kmin": int,
    "box_kmax": int,
    "bound_tolerance": float,
    "slack": float,
    "output": str,
}

_TOKEN = re.compile(
    r"""(?P<ws>\s+)
      | (?P<comment>\#.*)
      | (?P<string>"(?:[^"\\]|\\.)*")
      | (?P<num>[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)(?![A-Za-z_])
      | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
      | (?P<punct>[\[\],:])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    col: int


def _tokenize_line(text: str, lineno: int) -> list[Token]:
    toks = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            ch = text[pos]
            what = "unterminated string" if ch == '"' else f"unexpected character {ch!r}"
            raise SceneSyntaxError(what, lineno, pos + 1)
        kind = m.lastgroup
        if kind == "comment":
            break
        if kind != "ws":
            toks.append(Token(kind, m.group(), lineno, pos + 1))
        pos = m.end()
    return toks


class _Line:
    """Cursor over the tokens of one line."""

    def __init__(self, toks: list[Token], lineno: int, length: int):
        self.toks = toks
        self.i = 0
        self.lineno = lineno
        self.length = length

    def error(self, msg: str, tok: Token | None = None, cls=SceneSyntaxError):
        col = tok.col if tok is not None else self.length + 1
        return cls(msg, self.lineno, col)

    def peek(self) -> Token | None:
        return self.toks[self.i] if self.i < len(self.toks) else None

    def take(self, what: str) -> Token:
        tok = self.peek()
        if tok is None:
            raise self.error(f"expected {what}, found end of line")
        self.i += 1
        return tok

    def keyword(self, *words: str) -> str:
        tok = self.take(" or ".join(repr(w) for w in words))
        if tok.kind != "ident" or tok.text not in words:
            raise self.error(f"expected {' or '.join(repr(w) for w in words)}, found {tok.text!r}", tok)
        return tok.text

    def at(self, word: str) -> bool:
        tok = self.peek()
        return tok is not None and tok.kind == "ident" and tok.text == word

    def ident(self) -> Token:
        tok = self.take("a name")
        if tok.kind != "ident":
            raise self.error(f"expected a name, found {tok.text!r}", tok)
        return tok

    def number(self) -> tuple[float, Token]:
        tok = self.take("a number")
        if tok.kind != "num":
            raise self.error(f"expected a number, found {tok.text!r}", tok)
        value = float(tok.text)
        if not math.isfinite(value):
            raise self.error(f"number {tok.text} is not finite", tok)
        return value, tok

    def integer(self) -> tuple[int, Token]:
        tok = self.take("an integer")
        if tok.kind != "num" or not re.fullmatch(r"[+-]?\d+", tok.text):
            raise self.error(f"expected an integer, found {tok.text!r}", tok)
        return int(tok.text), tok

    def string(self) -> tuple[str, Token]:
        tok = self.take("a quoted string")
        if tok.kind != "string":
            raise self.error(f"expected a quoted string, found {tok.text!r}", tok)
        return re.sub(r"\\(.)", r"\1", tok.text[1:-1]), tok

    def punct(self, ch: str) -> Token:
        tok = self.take(repr(ch))
        if tok.text != ch:
            raise self.error(f"expected {ch!r}, found {tok.text!r}", tok)
        return tok

    def num_list(self) -> tuple[list[float], Token]:
        start = self.punct("[")
        out = []
        while True:
            tok = self.peek()
            if tok is not None and tok.text == "]":
                self.i += 1
                break
            if out and tok is not None and tok.text == ",":
                self.i += 1
            out.append(self.number()[0])
        if not out:
            raise self.error("empty list", start)
        return out, start

    def num_matrix(self) -> tuple[list[list[float]], Token]:
        start = self.punct("[")
        rows = []
        while True:
            tok = self.peek()
            if tok is not None and tok.text == "]":
                self.i += 1
                break
            if rows and tok is not None and tok.text == ",":
                self.i += 1
            rows.append(self.num_list()[0])
        if not rows:
            raise self.error("empty matrix", start)
        return rows, start

    def end(self):
        tok = self.peek()
        if tok is not None:
            raise self.error(f"unexpected {tok.text!r}", tok)


@dataclass
class SceneConfig:
    domain: MetricDomain
    system: IFSystem
    options: dict = field(default_factory=dict)

    def option(self, name: str, default=None):
        return self.options.get(name, default)


def _parse_space(line: _Line):
    dim, dtok = line.integer()
    if dim < 1:
        raise line.error("dimension must be at least 1", dtok)
    mtok = line.ident()
    if mtok.text not in METRICS:
        raise line.error(f"unknown metric {mtok.text!r}; use one of {', '.join(METRICS)}", mtok)
    line.keyword("box")
    lo, lo_tok = line.num_list()
    hi, hi_tok = line.num_list()
    for vec, tok in ((lo, lo_tok), (hi, hi_tok)):
        if len(vec) != dim:
            raise line.error(f"box corner needs {dim} coordinates", tok)
    if any(not a < b for a, b in zip(lo, hi)):
        raise line.error("box needs lo < hi in every coordinate", lo_tok)
    diameter = None
    if line.peek() is not None:
        line.keyword("diameter")
        diameter, tok = line.number()
        if diameter <= 0:
            raise line.error("diameter must be positive", tok)
    line.end()
    try:
        dom = MetricDomain(dim, mtok.text, tuple(lo), tuple(hi), diameter)
    except ValueError as exc:
        raise line.error(str(exc), lo_tok) from None
    if not math.isfinite(4.0 * dom.diameter_bound):
        raise line.error("box or diameter too large to represent", lo_tok)
    return dom


def _parse_map(line: _Line):
    """Return (name token, body, coefficient) with positions kept for later checks."""
    name = line.ident()
    kind = line.keyword("similarity", "affine", "expr")
    if kind == "similarity":
        ratio, rtok = line.number()
        if not 0 < ratio < 1:
            raise line.error("similarity ratio must lie in (0, 1)", rtok)
        trans, ttok = line.num_list()
        angle = 0.0
        if line.at("rotate"):
            line.keyword("rotate")
            angle, _ = line.number()
        body = ("similarity", ratio, trans, angle, ttok)
    elif kind == "affine":
        matrix, mtok = line.num_matrix()
        trans, ttok = line.num_list()
        body = ("affine", matrix, trans, mtok, ttok)
    else:
        texts = []
        while line.peek() is not None and line.peek().kind == "string":
            texts.append(line.peek())
            line.i += 1
        if not texts:
            raise line.error("expected at least one quoted formula", line.peek())
        body = ("expr", texts)
    line.keyword("alpha")
    akind = line.keyword("const", "piecewise", "expr")
    if akind == "const":
        value, tok = line.number()
        alpha = ("const", [(value, tok)])
    elif akind == "piecewise":
        pairs = []
        while line.peek() is not None:
            bp, btok = line.number()
            line.punct(":")
            val, vtok = line.number()
            pairs.append((bp, btok, val, vtok))
        if not pairs:
            raise line.error("piecewise coefficient needs at least one breakpoint:value pair")
        alpha = ("piecewise", pairs)
    else:
        alpha = ("expr", line.take("a quoted string"))
        if alpha[1].kind != "string":
            raise line.error(f"expected a quoted string, found {alpha[1].text!r}", alpha[1])
    line.end()
    return name, body, alpha


def _check_unit(value: float, tok: Token, lineno: int):
    if not 0 <= value < 1:
        raise CoefficientOutOfRange(f"coefficient {tok.text} is outside [0, 1)", lineno, tok.col)


def _build_coefficient(alpha, lineno: int, D: float, samples: int) -> CoefficientFunction:
    kind = alpha[0]
    if kind == "const":
        (value, tok), = alpha[1]
        _check_unit(value, tok, lineno)
        return CoefficientFunction.constant(value)
    if kind == "piecewise":
        pairs = alpha[1]
        if pairs[0][0] != 0:
            raise SceneSyntaxError("the first piecewise breakpoint must be 0", lineno, pairs[0][1].col)
        for i, (bp, btok, val, vtok) in enumerate(pairs):
            _check_unit(val, vtok, lineno)
            if i and bp <= pairs[i - 1][0]:
                raise SceneSyntaxError("breakpoints must be strictly increasing", lineno, btok.col)
        return CoefficientFunction.piecewise([p[0] for p in pairs[1:]], [p[2] for p in pairs])
    tok = alpha[1]
    text = re.sub(r"\\(.)", r"\1", tok.text[1:-1])
    try:
        e = parse_expression(text, {"t"})
    except ExpressionSyntaxError as exc:
        raise SceneSyntaxError(str(exc), lineno, tok.col + exc.column) from None
    f = CoefficientFunction.expression(e, t_max=4.0 * D, samples=samples)
    try:
        envelope(f)
    except (EvaluatesOutsideUnit, InvalidCoefficient) as exc:
        raise CoefficientOutOfRange(str(exc), lineno, tok.col) from None
    except GridTooCoarse as exc:
        raise SceneSyntaxError(str(exc), lineno, tok.col) from None
    return f


def _build_map(body, lineno: int, dim: int):
    kind = body[0]
    if kind == "similarity":
        _, ratio, trans, angle, ttok = body
        if len(trans) != dim:
            raise SceneSyntaxError(f"translation needs {dim} coordinates", lineno, ttok.col)
        if angle != 0 and dim != 2:
            raise SceneSyntaxError("rotate is only supported in the plane", lineno, ttok.col)
        return SimilarityMap(ratio, tuple(trans), angle)
    if kind == "affine":
        _, matrix, trans, mtok, ttok = body
        if len(matrix) != dim or any(len(row) != dim for row in matrix):
            raise SceneSyntaxError(f"matrix must be {dim}x{dim}", lineno, mtok.col)
        if len(trans) != dim:
            raise SceneSyntaxError(f"translation needs {dim} coordinates", lineno, ttok.col)
        return AffineMap(tuple(map(tuple, matrix)), tuple(trans))
    texts = body[1]
    if len(texts) != dim:
        raise SceneSyntaxError(f"expr map needs {dim} formulas, got {len(texts)}", lineno, texts[0].col)
    variables = {f"x{i + 1}" for i in range(dim)}
    comps = []
    for tok in texts:
        text = re.sub(r"\\(.)", r"\1", tok.text[1:-1])
        try:
            comps.append(parse_expression(text, variables))
        except ExpressionSyntaxError as exc:
            raise SceneSyntaxError(str(exc), lineno, tok.col + exc.column) from None
    return ExpressionMap(tuple(comps))


def _parse_option(line: _Line):
    name = line.ident()
    if name.text not in OPTION_TYPES:
        raise line.error(f"unknown option {name.text!r}", name)
    want = OPTION_TYPES[name.text]
    if want is int:
        value, _ = line.integer()
    elif want is float:
        value, _ = line.number()
    else:
        tok = line.peek()
        if tok is not None and tok.kind == "ident":
            line.i += 1
            value = tok.text
        else:
            value, _ = line.string()
    line.end()
    return name, value


def parse_scene(text: str) -> SceneConfig:
    """Parse scene text; every error carries a 1-based line and column."""
    lines = text.splitlines()
    space = None
    raw_maps = []
    names: dict[str, int] = {}
    options: dict = {}
    for lineno, raw in enumerate(lines, start=1):
        toks = _tokenize_line(raw, lineno)
        if not toks:
            continue
        line = _Line(toks, lineno, len(raw))
        head = line.ident()
        if head.text == "space":
            if space is not None:
                raise line.error(f"second space declaration (first on line {space[1]})", head)
            space = (_parse_space(line), lineno)
        elif head.text == "map":
            name, body, alpha = _parse_map(line)
            if name.text in names:
                raise DuplicateMapName(
                    f"map {name.text!r} already defined on line {names[name.text]}", lineno, name.col
                )
            names[name.text] = lineno
            raw_maps.append((name.text, body, alpha, lineno))
        elif head.text == "set":
            name, value = _parse_option(line)
            if name.text in options:
                raise line.error(f"option {name.text!r} set twice", name)
            options[name.text] = value
        else:
            raise line.error(f"expected 'space', 'map' or 'set', found {head.text!r}", head)
    last = max(len(lines), 1)
    if space is None:
        raise SceneSyntaxError("missing space declaration", last, 1)
    if len(raw_maps) < 2:
        raise FewerThanTwoMaps(f"an IFS needs at least two maps, found {len(raw_maps)}", last, 1)
    domain = space[0]
    samples = options.get("alpha_samples", DEFAULT_SAMPLES)
    if samples < 2:
        raise SceneSyntaxError("alpha_samples must be at least 2", last, 1)
    maps = []
    for name, body, alpha, lineno in raw_maps:
        pmap = _build_map(body, lineno, domain.dimension)
        coeff = _build_coefficient(alpha, lineno, domain.diameter_bound, samples)
        maps.append(WeakContraction(pmap, coeff, name))
    return SceneConfig(domain, IFSystem(domain, tuple(maps)), options)


def load_scene(path) -> SceneConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_scene(fh.read())


def scene_digest(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


# --- pretty printer -------------------------------------------------------------


def _num(x: float) -> str:
    return repr(float(x))


def _vec(v) -> str:
    return "[" + ", ".join(_num(x) for x in v) + "]"


def _quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _format_coefficient(f: CoefficientFunction) -> str:
    if f.kind == "constant":
        return f"const {_num(f.values[0])}"
    if f.kind == "piecewise":
        bps = (0.0,) + tuple(f.breakpoints)
        return "piecewise " + " ".join(f"{_num(b)}:{_num(v)}" for b, v in zip(bps, f.values))
    return f"expr {_quote(to_source(f.expr.tree))}"


def _format_map(w: WeakContraction) -> str:
    m = w.map
    if isinstance(m, SimilarityMap):
        body = f"similarity {_num(m.ratio)} {_vec(m.translation)}"
        if m.angle:
            body += f" rotate {_num(m.angle)}"
    elif isinstance(m, AffineMap):
        body = "affine [" + " ".join(_vec(r) for r in m.matrix) + f"] {_vec(m.translation)}"
    else:
        body = "expr " + " ".join(_quote(to_source(e.tree)) for e in m.components)
    return f"map {w.name} {body} alpha {_format_coefficient(w.coefficient)}"


def format_scene(cfg: SceneConfig) -> str:
    dom = cfg.domain
    out = [
        f"space {dom.dimension} {dom.metric} box {_vec(dom.lo)} {_vec(dom.hi)} diameter {_num(dom.diameter_bound)}"
    ]
    out += [_format_map(w) for w in cfg.system.maps]
    for key, value in cfg.options.items():
        if isinstance(value, str):
            text = value if re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", value) else _quote(value)
        elif isinstance(value, int):
            text = str(value)
        else:
            text = _num(value)
        out.append(f"set {key} {text}")
    return "\n".join(out) + "\n"
