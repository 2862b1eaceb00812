"""Exception hierarchy shared by every finstate module."""


class FinStateError(Exception):
    """Base class for all errors raised by finstate."""


class InvalidArgument(FinStateError, ValueError):
    """An argument is outside the domain of the operation."""


class InvalidState(InvalidArgument):
    """Block data does not describe a density operator."""


class InvalidChannel(InvalidArgument):
    """Choi data does not describe a CPTP map."""


class DomainMismatch(FinStateError, ValueError):
    """Systems of composed or applied objects do not line up."""


class PreconditionViolated(FinStateError):
    """A checker was handed an instance outside its scope.

    Raised, for example, when a positivity check receives a channel that
    fails the pure-to-pure test. Campaigns record this as a failure.
    """
