"""Exception hierarchy shared across the toolkit.

Two broad classes matter to callers (and to the CLI exit codes):

- ValidationError: the request itself is unusable (missing file, bad flag
  value). Nothing was parsed yet.
- DataError: an input file or in-memory structure violates a contract
  (duplicate ids, grade out of range, unknown doc_id). The message always
  names the offending file, line, or id.
"""

from __future__ import annotations


class ToolkitError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(ToolkitError):
    """Unusable request: bad parameters or missing inputs."""


class DataError(ToolkitError):
    """Input content violates a documented contract."""


class ParseError(DataError):
    """Malformed line in an input file; carries path and line number."""

    def __init__(self, path: str, line_no: int, message: str):
        super().__init__(f"{path}:{line_no}: {message}")
        self.path = str(path)
        self.line_no = line_no
