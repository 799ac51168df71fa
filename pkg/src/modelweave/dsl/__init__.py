"""Textual syntax for core, aspect, weaving and requirement models."""

from .diagnostics import DslSyntaxError, ParseDiagnostic, Severity, SourceSpan
from .export import (
    StructuredFormatError,
    dumps_structured,
    export_diagram,
    export_structured,
    import_structured,
)
from .parser import (
    ParseResult,
    parse_aspect,
    parse_core,
    parse_requirements,
    parse_weaving,
    stem_name,
)
from .printer import print_aspect, print_core, print_requirements, print_weaving
from .woven import parse_woven, print_woven

__all__ = [
    "DslSyntaxError",
    "ParseDiagnostic",
    "ParseResult",
    "Severity",
    "SourceSpan",
    "StructuredFormatError",
    "dumps_structured",
    "export_diagram",
    "export_structured",
    "import_structured",
    "parse_aspect",
    "parse_core",
    "parse_requirements",
    "parse_weaving",
    "parse_woven",
    "print_aspect",
    "print_core",
    "print_requirements",
    "print_weaving",
    "print_woven",
    "stem_name",
]
