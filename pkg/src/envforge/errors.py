"""Exception hierarchy shared across the framework."""


class EnvForgeError(Exception):
    """Base class for all framework errors."""


class RunnerError(EnvForgeError):
    """Base class for environment-runner failures."""


class LaunchFailure(RunnerError):
    """The environment program could not be started."""


class LimitViolation(RunnerError):
    """The environment exceeded a resource cap."""


class CallTimeout(LimitViolation):
    """A protocol call exceeded the wall-clock cap. Timeouts are a limit
    violation, so launch-time sleeps surface with a timeout cause."""


class EnvCrash(RunnerError):
    """The environment process died or raised mid-call."""


class ProtocolError(RunnerError):
    """The environment sent a malformed or contract-violating response."""


class RenderUnavailable(EnvForgeError):
    """Neither the environment nor the generic serializer could render the
    reference as a correct response."""


class ExtractionFailure(EnvForgeError):
    """No generator body / prompt template could be located for embedding."""


class CalibrationAborted(EnvForgeError):
    """Every calibration instance failed to generate (m_effective = 0)."""


class MissingAccuracy(EnvForgeError):
    """Level-5 reward requested without an empirical accuracy."""


class DuplicateId(EnvForgeError):
    """An env_id was inserted twice into a registry that forbids it."""


class EmptyPool(EnvForgeError):
    """A sample was requested from an empty population."""


class ReviewerUnavailable(EnvForgeError):
    """The reviewer client could not be reached; the candidate is held."""


class OracleUnavailable(EnvForgeError):
    """The scripted solver could not obtain a correct-response rendering."""


class SinkUnavailable(EnvForgeError):
    """The batch sink could not be written."""


class CorruptLedger(EnvForgeError):
    """The ledger file could not be parsed."""
