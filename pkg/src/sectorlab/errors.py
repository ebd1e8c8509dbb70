"""Exception hierarchy shared by every engine."""


class SectorLabError(Exception):
    """Base class for all package errors."""


class InvalidInput(SectorLabError, ValueError):
    pass


class CharacterTableFailure(SectorLabError):
    pass


class NotCovariant(SectorLabError):
    pass


class NotHCovariant(SectorLabError):
    pass


class InvalidSection(SectorLabError, ValueError):
    pass


class NotInK(SectorLabError):
    """The state is not a mixture of the reference Gibbs states."""


class NoExtension(SectorLabError):
    """No signed measure on the grid reproduces the state on the subspace."""


class NotAnInstrumentCoupling(SectorLabError):
    pass


class ZeroProbabilityOutcome(SectorLabError):
    pass


class EngineAssertion(SectorLabError):
    """Internal structural check failed; signals a bug or a violated theorem."""


class InternalInconsistency(EngineAssertion):
    pass


class PropositionViolated(EngineAssertion):
    pass
