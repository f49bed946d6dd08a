"""Exception hierarchy shared by the parser, compiler, and engine."""


class XcspError(Exception):
    """Base class for all toolchain errors."""


class XmlError(XcspError):
    """Malformed XML; carries line/column when the underlying parser knows them."""

    def __init__(self, message, line=None, column=None):
        if line is not None:
            message = "%s (line %d, column %d)" % (message, line, column or 0)
        super().__init__(message)
        self.line = line
        self.column = column


class StructuralError(XcspError):
    """Well-formed XML that violates the XCSP document structure."""


class FormatError(XcspError):
    """Bad micro-syntax inside a tag (integer sets, tuple lists, expressions)."""


class ResolutionError(XcspError):
    """A by-name reference does not resolve, or resolves inconsistently."""


class UnsupportedExtensionError(XcspError):
    """WCSP / QCSP content: detected and refused, never silently ignored."""


class CompileError(XcspError):
    """A resolved constraint cannot be lowered to propagators."""


class EvalError(XcspError):
    """Expression evaluation failed (division by zero, overflow, bad pow)."""
