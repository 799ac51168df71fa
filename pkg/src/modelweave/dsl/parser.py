"""Recursive-descent parsers for the four textual model kinds.

Keywords are contextual: a word is only a keyword where the grammar expects
one, so element names may freely reuse words such as ``end`` or ``class``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import PurePath
from typing import Callable, Generic, Optional, TypeVar, Union

from ..aspect_model import (
    AddPayload,
    Advice,
    AdviceKind,
    AdviceType,
    AspectModel,
    AspectRequirement,
    DEFAULT_PRIORITY,
    DeletePayload,
    NamePattern,
    Pointcut,
    PointcutKind,
    UpdatePayload,
    WILDCARD,
    inert_aspects,
    validate_aspect,
)
from ..core_model import (
    AssociationDecl,
    AssociationEnd,
    AttributeDecl,
    ClassDecl,
    CoreModel,
    MethodDecl,
    Multiplicity,
    ONE,
    Parameter,
    QualifiedName,
    Violation,
    validate_core,
)
from ..requirements import (
    Connector,
    DecompositionGraph,
    NodeKind,
    Op,
    RequirementNode,
    validate_graph,
)
from ..weaving_model import (
    AspectRef,
    ElementRef,
    LinkKind,
    ModelRef,
    WeaveLink,
    WeavingKind,
    WeavingModel,
    structural_violations,
)
from .diagnostics import DslSyntaxError, ParseDiagnostic, Severity, SourceSpan
from .lexer import Token, check_braces, tokenize

T = TypeVar("T")

_BOM = b"\xef\xbb\xbf"


@dataclass(frozen=True)
class ParseResult(Generic[T]):
    model: Optional[T]
    diagnostics: tuple[ParseDiagnostic, ...] = ()
    spans: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def ok(self) -> bool:
        return self.model is not None

    @property
    def errors(self) -> tuple[ParseDiagnostic, ...]:
        return tuple(d for d in self.diagnostics if d.severity is Severity.ERROR)

    @property
    def warnings(self) -> tuple[ParseDiagnostic, ...]:
        return tuple(d for d in self.diagnostics if d.severity is Severity.WARNING)


def stem_name(source: str) -> str:
    """Identifier derived from a file name, used to name empty models."""
    stem = PurePath(source).stem or "model"
    stem = re.sub(r"[^A-Za-z0-9_]", "_", stem)
    return "_" + stem if stem[0].isdigit() else stem


def decode_source(data: Union[str, bytes], source: str) -> str:
    """Strict UTF-8 decode (BOM tolerated) with line endings folded to LF."""
    if isinstance(data, bytes):
        if data.startswith(_BOM):
            data = data[len(_BOM):]
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            good = data[: exc.start].decode("utf-8")
            line = good.count("\n") + 1
            col = len(good) - (good.rfind("\n") + 1) + 1
            raise DslSyntaxError(
                f"invalid UTF-8 byte sequence at offset {exc.start}",
                SourceSpan(source, line, col, line, col + 1),
            ) from None
    return data.replace("\r\n", "\n").replace("\r", "\n")


class _Parser:
    def __init__(self, tokens: list[Token], source: str) -> None:
        self.tokens = tokens
        self.pos = 0
        self.source = source
        self.spans: dict[str, SourceSpan] = {}

    # -- token helpers ---------------------------------------------------

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def error(self, message: str, tok: Optional[Token] = None) -> DslSyntaxError:
        tok = tok or self.tok
        found = "end of input" if tok.kind == "eof" else repr(tok.text)
        return DslSyntaxError(f"{message}, found {found}", tok.span(self.source))

    def at_word(self, *words: str) -> bool:
        return self.tok.kind == "ident" and self.tok.text in words

    def at_punct(self, text: str) -> bool:
        return self.tok.kind == "punct" and self.tok.text == text

    def next(self) -> Token:
        tok = self.tok
        self.pos += 1
        return tok

    def word(self, *words: str) -> Token:
        if not self.at_word(*words):
            expected = " or ".join(repr(w) for w in words)
            raise self.error(f"expected {expected}")
        return self.next()

    def ident(self, what: str = "identifier") -> Token:
        if self.tok.kind != "ident":
            raise self.error(f"expected {what}")
        return self.next()

    def punct(self, text: str) -> Token:
        if not self.at_punct(text):
            raise self.error(f"expected {text!r}")
        return self.next()

    def string(self, what: str = "string literal") -> str:
        if self.tok.kind != "string":
            raise self.error(f"expected {what}")
        return self.next().value or ""

    def expect_eof(self) -> None:
        if self.tok.kind != "eof":
            raise self.error("expected end of input")

    def mark(self, key, start: Token) -> None:
        end = self.tokens[self.pos - 1]
        self.spans[str(key)] = SourceSpan(self.source, start.line, start.col, end.end_line, end.end_col)

    def comma_list(self, item: Callable[[], T], close: str = ")") -> list[T]:
        items: list[T] = []
        if self.at_punct(close):
            return items
        items.append(item())
        while self.at_punct(","):
            self.next()
            items.append(item())
        return items

    # -- shared productions ------------------------------------------------

    def multiplicity(self) -> Multiplicity:
        if self.tok.kind != "number":
            return ONE
        lower = self._int(self.next())
        if self.tok.kind != "range":
            raise self.error("expected '..' in multiplicity")
        self.next()
        if self.at_punct("*"):
            self.next()
            return Multiplicity(lower, None)
        if self.tok.kind != "number":
            raise self.error("expected upper bound or '*'")
        return Multiplicity(lower, self._int(self.next()))

    def _int(self, tok: Token) -> int:
        if not tok.text.isdigit():
            raise DslSyntaxError(f"expected an integer bound, found {tok.text!r}", tok.span(self.source))
        return int(tok.text)

    def qualified_name(self, what: str = "qualified name") -> QualifiedName:
        segs = [self.ident(what).text]
        while self.at_punct("."):
            self.next()
            segs.append(self.ident(what).text)
        return QualifiedName(tuple(segs))

    def attribute(self, owner: QualifiedName) -> AttributeDecl:
        start = self.word("attr")
        name = self.ident("attribute name").text
        self.punct(":")
        type_name = self.ident("type name").text
        mult = self.multiplicity()
        self.punct(";")
        self.mark(owner.child(name), start)
        return AttributeDecl(name, type_name, mult)

    def parameter(self) -> Parameter:
        name = self.ident("parameter name").text
        self.punct(":")
        return Parameter(name, self.ident("type name").text)

    def method(self, owner: QualifiedName) -> MethodDecl:
        start = self.word("op")
        name = self.ident("operation name").text
        self.punct("(")
        params = self.comma_list(self.parameter)
        self.punct(")")
        return_type = None
        if self.at_punct(":"):
            self.next()
            return_type = self.ident("return type").text
        self.punct(";")
        self.mark(owner.child(name), start)
        return MethodDecl(name, tuple(params), return_type)

    def class_decl(self) -> ClassDecl:
        start = self.word("class")
        name = self.ident("class name").text
        assoc_of = None
        if self.at_word("associationClassOf"):
            self.next()
            assoc_of = self.ident("association name").text
        qn = QualifiedName.of(name)
        self.punct("{")
        attrs: list[AttributeDecl] = []
        methods: list[MethodDecl] = []
        while not self.at_punct("}"):
            if self.at_word("attr"):
                attrs.append(self.attribute(qn))
            elif self.at_word("op"):
                methods.append(self.method(qn))
            else:
                raise self.error("expected 'attr', 'op' or '}'")
        self.punct("}")
        self.mark(qn, start)
        return ClassDecl(name, tuple(attrs), tuple(methods), assoc_of)

    def association_end(self, owner: QualifiedName) -> AssociationEnd:
        start = self.word("end")
        role = self.ident("role name").text
        self.punct(":")
        class_name = self.ident("class name").text
        navigable = False
        if self.at_word("navigable"):
            self.next()
            navigable = True
        mult = self.multiplicity()
        self.punct(";")
        self.mark(owner.child(role), start)
        return AssociationEnd(role, class_name, navigable, mult)

    def association(self) -> AssociationDecl:
        start = self.word("association")
        name = self.ident("association name").text
        qn = QualifiedName.of("assoc", name)
        open_brace = self.punct("{")
        ends: list[AssociationEnd] = []
        while not self.at_punct("}"):
            if not self.at_word("end"):
                raise self.error("expected 'end' or '}'")
            ends.append(self.association_end(qn))
        close = self.punct("}")
        if len(ends) != 2:
            span = SourceSpan(self.source, open_brace.line, open_brace.col, close.end_line, close.end_col)
            raise DslSyntaxError(f"association {name!r} must declare exactly two ends, found {len(ends)}", span)
        self.mark(qn, start)
        return AssociationDecl(name, ends[0], ends[1])

    # -- core ------------------------------------------------------------

    def core_model(self, default_name: str) -> CoreModel:
        if self.tok.kind == "eof":
            return CoreModel(default_name)
        start = self.word("model")
        name = self.ident("model name").text
        self.punct("{")
        classes: list[ClassDecl] = []
        assocs: list[AssociationDecl] = []
        while not self.at_punct("}"):
            if self.at_word("class"):
                classes.append(self.class_decl())
            elif self.at_word("association"):
                assocs.append(self.association())
            else:
                raise self.error("expected 'class', 'association' or '}'")
        self.punct("}")
        self.mark("", start)
        self.expect_eof()
        return CoreModel(name, tuple(classes), tuple(assocs))

    # -- aspects -----------------------------------------------------------

    def pattern(self) -> NamePattern:
        def seg() -> str:
            if self.at_punct("*"):
                self.next()
                return WILDCARD
            return self.ident("pattern segment").text

        segs = [seg()]
        while self.at_punct("."):
            self.next()
            segs.append(seg())
        return NamePattern(tuple(segs))

    def pointcut(self, owner: QualifiedName) -> Pointcut:
        start = self.word("pointcut")
        name = self.ident("pointcut name").text
        self.punct(":")
        kind = PointcutKind(self.word("call", "structural").text)
        self.word("on")
        pattern = self.pattern()
        self.punct(";")
        self.mark(owner.child(name), start)
        return Pointcut(name, kind, pattern)

    def advice(self, owner: QualifiedName) -> Advice:
        start = self.word("advice")
        name = self.ident("advice name").text
        self.punct(":")
        advice_type = AdviceType(self.word("before", "after").text)
        kind = AdviceKind(self.word("addelt", "update", "deleteelt").text)
        self.word("bind")
        bound = self.ident("pointcut name").text
        qn = owner.child(name)
        self.punct("{")

        element = None
        new_name = new_type = None
        body: Optional[str] = None
        while not self.at_punct("}"):
            stmt = self.tok
            if self.at_word("body"):
                if body is not None:
                    raise self.error("duplicate 'body'")
                self.next()
                body = self.string("body text")
                self.punct(";")
            elif kind is AdviceKind.ADD and self.at_word("attr", "op", "class", "association"):
                if element is not None:
                    raise self.error("an addelt advice adds exactly one element")
                if stmt.text == "attr":
                    element = self.attribute(qn)
                elif stmt.text == "op":
                    element = self.method(qn)
                elif stmt.text == "class":
                    element = self.class_decl()
                else:
                    element = self.association()
            elif kind is AdviceKind.UPDATE and self.at_word("rename", "retype"):
                self.next()
                label = self.ident("new name" if stmt.text == "rename" else "new type").text
                self.punct(";")
                if stmt.text == "rename":
                    if new_name is not None:
                        raise DslSyntaxError("duplicate 'rename'", stmt.span(self.source))
                    new_name = label
                else:
                    if new_type is not None:
                        raise DslSyntaxError("duplicate 'retype'", stmt.span(self.source))
                    new_type = label
            else:
                expected = {
                    AdviceKind.ADD: "'attr', 'op', 'class', 'association' or 'body'",
                    AdviceKind.UPDATE: "'rename', 'retype' or 'body'",
                    AdviceKind.DELETE: "'body'",
                }[kind]
                raise self.error(f"expected {expected}")
        close = self.punct("}")

        if kind is AdviceKind.ADD:
            if element is None:
                raise DslSyntaxError("addelt advice declares no element", close.span(self.source))
            payload = AddPayload(element)
        elif kind is AdviceKind.UPDATE:
            if new_name is None and new_type is None:
                raise DslSyntaxError("update advice needs 'rename' or 'retype'", close.span(self.source))
            payload = UpdatePayload(new_name, new_type)
        else:
            payload = DeletePayload()
        self.mark(qn, start)
        return Advice(name, advice_type, kind, bound, payload, body or "")

    def aspect(self) -> AspectRequirement:
        start = self.word("aspect")
        name = self.ident("aspect name").text
        priority = DEFAULT_PRIORITY
        if self.at_word("priority"):
            self.next()
            if self.tok.kind != "number":
                raise self.error("expected priority value")
            priority = Fraction(self.next().text)
        qn = QualifiedName.of(name)
        self.punct("{")
        pointcuts: list[Pointcut] = []
        advices: list[Advice] = []
        while not self.at_punct("}"):
            if self.at_word("pointcut"):
                pointcuts.append(self.pointcut(qn))
            elif self.at_word("advice"):
                advices.append(self.advice(qn))
            else:
                raise self.error("expected 'pointcut', 'advice' or '}'")
        self.punct("}")
        self.mark(qn, start)
        return AspectRequirement(name, priority, tuple(pointcuts), tuple(advices))

    def aspect_model(self, default_name: str) -> AspectModel:
        if self.tok.kind == "eof":
            return AspectModel(default_name)
        start = self.word("aspectmodel")
        name = self.ident("model name").text
        self.punct("{")
        aspects: list[AspectRequirement] = []
        while not self.at_punct("}"):
            if not self.at_word("aspect"):
                raise self.error("expected 'aspect' or '}'")
            aspects.append(self.aspect())
        self.punct("}")
        self.mark("", start)
        self.expect_eof()
        return AspectModel(name, tuple(aspects))

    # -- weavings ------------------------------------------------------------

    def model_ref(self) -> ModelRef:
        name = self.ident("logical model name").text
        self.word("at")
        path = self.string("model path")
        digest = None
        if self.at_word("digest"):
            self.next()
            digest = self.string("digest")
        self.punct(";")
        return ModelRef(name, path, digest)

    def link(self, kind: WeavingKind, left: str, right: str, owner: QualifiedName) -> WeaveLink:
        start = self.word("link")
        name = self.ident("link name").text
        self.punct(":")
        kind_tok = self.ident("link kind")
        try:
            link_kind = LinkKind(kind_tok.text)
        except ValueError:
            choices = ", ".join(k.value for k in LinkKind)
            raise DslSyntaxError(f"unknown link kind {kind_tok.text!r} (expected one of {choices})",
                                 kind_tok.span(self.source)) from None
        left_end = ElementRef(left, self.qualified_name("left end"))
        if self.tok.kind != "arrow":
            raise self.error("a link needs two ends joined by '<->'")
        self.next()
        target = self.qualified_name("right end")
        if kind is WeavingKind.CORE_ASPECT:
            if len(target.segments) > 2:
                raise DslSyntaxError("aspect reference is Aspect or Aspect.Pointcut",
                                     self.tokens[self.pos - 1].span(self.source))
            segs = target.segments
            right_end: Union[ElementRef, AspectRef] = AspectRef(right, segs[0], segs[1] if len(segs) > 1 else None)
        else:
            right_end = ElementRef(right, target)
        self.punct(";")
        self.mark(owner.child(name), start)
        return WeaveLink(name, left_end, right_end, link_kind)

    def weaving_model(self) -> WeavingModel:
        start = self.word("weaving")
        name = self.ident("weaving name").text
        self.punct(":")
        kind = WeavingKind(self.word("coreaspect", "coreadditional").text)
        self.punct("{")
        left = right = None
        links: list[WeaveLink] = []
        while not self.at_punct("}"):
            if self.at_word("left", "right"):
                side = self.next()
                if links:
                    raise DslSyntaxError(f"'{side.text}' must precede all links", side.span(self.source))
                ref = self.model_ref()
                if side.text == "left":
                    if left is not None:
                        raise DslSyntaxError("duplicate 'left'", side.span(self.source))
                    left = ref
                else:
                    if right is not None:
                        raise DslSyntaxError("duplicate 'right'", side.span(self.source))
                    right = ref
            elif self.at_word("link"):
                if left is None or right is None:
                    raise self.error("declare 'left' and 'right' before links")
                links.append(self.link(kind, left.logical_name, right.logical_name, QualifiedName.of(name)))
            else:
                raise self.error("expected 'left', 'right', 'link' or '}'")
        close = self.punct("}")
        if left is None or right is None:
            raise DslSyntaxError("weaving needs both 'left' and 'right' models", close.span(self.source))
        self.mark("", start)
        self.expect_eof()
        return WeavingModel(name, kind, left, right, tuple(links))

    # -- requirement graphs --------------------------------------------------

    def linked_aspects(self) -> tuple[str, ...]:
        if not self.at_word("aspects"):
            return ()
        self.next()
        self.punct("(")
        names = self.comma_list(lambda: self.ident("aspect name").text)
        self.punct(")")
        return tuple(names)

    def requirements(self, default_name: str) -> DecompositionGraph:
        if self.tok.kind == "eof":
            return DecompositionGraph(default_name)
        start = self.word("requirements")
        name = self.ident("graph name").text
        self.punct("{")
        nodes: list[RequirementNode] = []
        connectors: list[Connector] = []
        while not self.at_punct("}"):
            head = self.word("cr", "er", "ar")
            node_id = self.ident("requirement id").text
            text = self.string("requirement text")
            kind = NodeKind(head.text)
            source_system = None
            if kind is NodeKind.CR:
                self.punct("=")
                op = Op(self.word("and", "or").text)
                self.punct("(")
                children = self.comma_list(lambda: self.ident("requirement id").text)
                self.punct(")")
                if not children:
                    raise self.error("a connector needs at least one child", self.tokens[self.pos - 1])
                connectors.append(Connector(node_id, op, tuple(children)))
            elif kind is NodeKind.ER and self.at_word("from"):
                self.next()
                source_system = self.ident("system name").text
            aspects = self.linked_aspects()
            self.punct(";")
            self.mark(node_id, head)
            nodes.append(RequirementNode(node_id, kind, text, source_system, aspects))
        self.punct("}")
        self.mark("", start)
        self.expect_eof()
        return DecompositionGraph(name, tuple(nodes), tuple(connectors))


def span_for(path: Optional[QualifiedName], spans: dict[str, SourceSpan], source: str) -> SourceSpan:
    """Span of the longest marked prefix of ``path``, else the whole document."""
    segs = path.segments if path is not None else ()
    for n in range(len(segs), 0, -1):
        key = ".".join(segs[:n])
        if key in spans:
            return spans[key]
    return spans.get("", SourceSpan(source, 1, 1, 1, 1))


def _run(
    data: Union[str, bytes],
    source: str,
    produce: Callable[[_Parser], T],
    check: Optional[Callable[[T], list[Violation]]],
    extra: Optional[Callable[[T, _Parser], list[ParseDiagnostic]]] = None,
) -> ParseResult[T]:
    try:
        text = decode_source(data, source)
        tokens = tokenize(text, source)
        check_braces(tokens, source)
        parser = _Parser(tokens, source)
        model = produce(parser)
    except DslSyntaxError as exc:
        return ParseResult(None, (exc.diagnostic(),))
    diags: list[ParseDiagnostic] = []
    if check is not None:
        for v in check(model):
            diags.append(ParseDiagnostic(Severity.ERROR, span_for(v.path, parser.spans, source), str(v)))
    if extra is not None:
        diags.extend(extra(model, parser))
    failed = any(d.severity is Severity.ERROR for d in diags)
    return ParseResult(None if failed else model, tuple(diags), parser.spans)


def parse_core(data: Union[str, bytes], source: str = "<input>.core", *, validate: bool = True) -> ParseResult[CoreModel]:
    """Parse a ``.core`` document.

    With ``validate`` set, conformance violations become Error diagnostics
    and no model is returned; otherwise only syntax is checked.
    """
    return _run(data, source, lambda p: p.core_model(stem_name(source)), validate_core if validate else None)


def _inert_warnings(model: AspectModel, parser: _Parser) -> list[ParseDiagnostic]:
    return [
        ParseDiagnostic(
            Severity.WARNING,
            span_for(QualifiedName.of(name), parser.spans, parser.source),
            f"aspect {name!r} declares no advice and is inert",
        )
        for name in inert_aspects(model)
    ]


def parse_aspect(data: Union[str, bytes], source: str = "<input>.aspect", *, validate: bool = True) -> ParseResult[AspectModel]:
    return _run(
        data,
        source,
        lambda p: p.aspect_model(stem_name(source)),
        validate_aspect if validate else None,
        _inert_warnings,
    )


def parse_weaving(data: Union[str, bytes], source: str = "<input>.weave", *, validate: bool = True) -> ParseResult[WeavingModel]:
    """Parse a ``.weave`` document.

    Only the weaving's own invariants are checked here; whether link ends
    resolve is decided by :func:`modelweave.weaving_model.validate_weaving`.
    """
    return _run(data, source, lambda p: p.weaving_model(), structural_violations if validate else None)


def parse_requirements(
    data: Union[str, bytes], source: str = "<input>.reqs", *, validate: bool = True
) -> ParseResult[DecompositionGraph]:
    return _run(data, source, lambda p: p.requirements(stem_name(source)), validate_graph if validate else None)
