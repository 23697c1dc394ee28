"""Exception hierarchy shared by every cdcroadm module."""


class RoadmError(Exception):
    """Base class for all toolkit errors."""


class InvalidArgumentError(RoadmError, ValueError):
    pass


class UnsupportedSignalError(RoadmError, ValueError):
    pass


class EmptyPlanError(RoadmError, ValueError):
    pass


class SlotOverflowError(RoadmError, ValueError):
    pass


class BandUnsupportedError(RoadmError):
    pass


class ContentionError(RoadmError):
    pass


class ClientBusyError(RoadmError):
    pass


class InsufficientPortsError(RoadmError):
    pass


class OverSubscriptionError(RoadmError):
    pass


class MisplugError(RoadmError):
    """Transceiver band does not match the client port it was plugged into."""


class BlockedError(RoadmError):
    """Provisioning request could not be satisfied. Reported, not fatal."""


class SpectrumBlockedError(BlockedError):
    pass


class PortBlockedError(BlockedError):
    pass


class BandBlockedError(BlockedError):
    pass


class SignalLostError(RoadmError):
    pass


class SaturatedPenaltyError(RoadmError):
    pass


class ConfigError(RoadmError):
    pass


class ConfigParseError(ConfigError):
    pass


class UnresolvedReferenceError(ConfigError):
    def __init__(self, kind, name):
        self.kind = kind
        self.name = name
        super().__init__(f"unresolved {kind} reference: {name!r}")
