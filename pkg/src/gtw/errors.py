"""Exception taxonomy shared by the whole workbench.

Every error the library raises deliberately derives from GtwError so callers
(and the CLI exit-code mapping) can distinguish usage errors, property
failures, and size guards without string matching.
"""

from __future__ import annotations


class GtwError(Exception):
    """Base class for all deliberate workbench errors."""


class CycleError(GtwError):
    """An order specification violates antisymmetry (a cycle of length >= 2)."""

    def __init__(self, a: int, b: int):
        self.a = a
        self.b = b
        super().__init__(f"order cycle: {a} <= {b} and {b} <= {a} with {a} != {b}")


class SizeGuard(GtwError):
    """A computation would exceed a configured size cap."""

    def __init__(self, what: str, required: int, cap: int):
        self.what = what
        self.required = required
        self.cap = cap
        super().__init__(f"{what}: needs {required}, cap is {cap}")


class FrameConditionError(GtwError):
    """A frame violates its kind's structural condition.

    `condition` names the violated law; `witness` is a tuple of states (and,
    where relevant, sets) that exhibits the violation.
    """

    def __init__(self, condition: str, witness: tuple, detail: str = ""):
        self.condition = condition
        self.witness = witness
        msg = f"frame condition violated: {condition}; witness {witness}"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)


class ParseError(GtwError):
    """Formula text could not be parsed; `pos` is a 0-based character offset."""

    def __init__(self, message: str, pos: int):
        self.pos = pos
        super().__init__(f"{message} (at position {pos})")


class SignatureError(GtwError):
    """A modal operator was used outside its signature."""


class MissingLetterError(GtwError):
    """A valuation or assignment does not cover a letter of the formula."""

    def __init__(self, letter: str):
        self.letter = letter
        super().__init__(f"no value for letter {letter!r}")


class KindMismatch(GtwError):
    """Two objects of different frame/algebra kinds were combined."""


class KindError(GtwError):
    """The operation is undefined for this kind (e.g. dual_frame on si)."""


class FormatError(GtwError):
    """A JSON document is malformed; `path` locates the offending field."""

    def __init__(self, message: str, path: str = "$"):
        self.path = path
        super().__init__(f"{message} (at {path})")
