"""Exception types shared across the package."""

from __future__ import annotations


class OrbifoldKitError(Exception):
    """Base class for all library errors."""


class NotInFragment(OrbifoldKitError):
    """An operation would leave the class of exact piecewise signed-power maps."""


class OutOfDomain(OrbifoldKitError):
    def __init__(self, x, domain):
        super().__init__(f"{x} is not in {domain}")
        self.x = x
        self.domain = domain


class NotInjective(OrbifoldKitError):
    def __init__(self, x, y):
        super().__init__(f"not injective: f({x}) = f({y})")
        self.x = x
        self.y = y


class NotStableError(OrbifoldKitError):
    pass


class NoMatch(OrbifoldKitError):
    pass


class InvalidAtlas(OrbifoldKitError):
    pass


class DepthCapped(OrbifoldKitError):
    def __init__(self, limit: int):
        super().__init__(f"saturation did not close within word length {limit}")
        self.limit = limit


class MalformedInput(OrbifoldKitError):
    pass


class RangeFamilyNotContained(OrbifoldKitError):
    pass


class ImageNotContained(OrbifoldKitError):
    pass


class NotLocalDiffeo(OrbifoldKitError):
    def __init__(self, index, point=None):
        super().__init__(f"lift {index!r} is not a local diffeomorphism (at {point})")
        self.index = index
        self.point = point


class AtlasMismatch(OrbifoldKitError):
    pass


class AtlasChainMismatch(OrbifoldKitError):
    pass


class RefinementFailed(OrbifoldKitError):
    pass


class ParseError(OrbifoldKitError):
    def __init__(self, line: int, expected: str, text: str = ""):
        super().__init__(f"line {line}: expected {expected}" + (f", got {text!r}" if text else ""))
        self.line = line
        self.expected = expected


class UnknownId(OrbifoldKitError):
    pass


class CommandError(OrbifoldKitError):
    pass
