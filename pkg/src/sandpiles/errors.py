"""Exception types shared across the package."""


class SandpileError(Exception):
    """Base class for every error this package raises deliberately."""


class GeometryError(SandpileError, ValueError):
    """Invalid lattice geometry: empty dims, non-positive box sides,
    duplicate or malformed site coordinates."""


class DomainError(SandpileError, ValueError):
    """An argument lies outside the operation's domain (negative mass,
    unstable input where a stable one is required, amount outside [0, 1),
    mismatched shapes)."""


class CapacityError(SandpileError, RuntimeError):
    """An exact enumeration or brute-force check was asked to exceed the
    size it is designed for."""
