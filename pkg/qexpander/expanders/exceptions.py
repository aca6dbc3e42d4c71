"""Exceptions raised by the expander library.

Every error derives from `ExpanderError`. Errors caused by malformed user input also derive
from `InputError`, which the command line maps to exit status 2; `CertificateViolated` maps
to exit status 1.
"""

from typing import Optional


class ExpanderError(Exception):
    """Base class for all library errors."""


class InputError(ExpanderError):
    """The caller supplied data that does not satisfy an operation's preconditions."""


class ParseError(InputError):
    """A file or command-line value could not be parsed."""


# Linear algebra


class NumericsError(ExpanderError):
    pass


class NotHermitian(NumericsError, InputError):
    pass


class NotPSD(NumericsError, InputError):
    pass


# Classical graphs


class GraphError(ExpanderError):
    pass


class InvalidGraph(GraphError, InputError):
    """Loops, duplicate edges or out-of-range vertices."""


class TooLarge(GraphError, InputError):
    """Brute-force search refused; only spectral bounds are available."""


class NotRegular(GraphError, InputError):
    pass


class NotConnected(GraphError, InputError):
    pass


class NotSymmetric(GraphError, InputError):
    pass


class ContainsIdentity(GraphError, InputError):
    pass


class DecompositionFailed(GraphError):
    def __init__(self, stage: str, message: Optional[str] = None):
        self.stage = stage
        super().__init__(message or f"cycle cover decomposition failed at stage '{stage}'")


# Groups and representations


class GroupError(ExpanderError):
    pass


class ClosureTooLarge(GroupError, InputError):
    pass


class SplitFailed(GroupError):
    pass


class NotGenerating(GroupError, InputError):
    pass


class NotASubgroup(GroupError, InputError):
    pass


class TrivialRep(GroupError, InputError):
    pass


# Channels


class ChannelError(ExpanderError):
    pass


class NotUndirected(ChannelError, InputError):
    pass


class NotUnitaryBlock(ChannelError, InputError):
    pass


class NotFaithfulState(ChannelError, InputError):
    pass


class NotAState(ChannelError, InputError):
    pass


# Quantum groups


class QuantumGroupError(ExpanderError):
    pass


class ContainsTrivial(QuantumGroupError, InputError):
    pass


class NotInvariant(QuantumGroupError):
    pass


class NotExactFactorization(QuantumGroupError, InputError):
    pass


class NotAPVM(QuantumGroupError, InputError):
    pass


class CertificateViolated(ExpanderError):
    """An asserted inequality failed: either a bug or an invalid user-supplied certificate."""

    def __init__(self, name: str, lhs: float, rhs: float):
        self.name = name
        self.lhs = lhs
        self.rhs = rhs
        super().__init__(f"{name}: {lhs!r} exceeds {rhs!r}")
