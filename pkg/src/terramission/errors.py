"""Exception types shared across the package.

Exit-code mapping used by the CLI: InputError subclasses map to exit 1,
RuntimeFailure subclasses to exit 2.
"""


class MissionError(Exception):
    """Base class for all errors raised by this package."""


class InputError(MissionError, ValueError):
    """Invalid argument, file, or configuration supplied by the caller."""


class ParseError(InputError):
    """A file or document failed to parse.

    Carries the byte offset (for binary/text files) or the JSON path
    (for structured documents) of the offending content.
    """

    def __init__(self, message, *, offset=None, json_path=None):
        detail = message
        if offset is not None:
            detail = f"{detail} (byte offset {offset})"
        if json_path is not None:
            detail = f"{detail} (at {json_path})"
        super().__init__(detail)
        self.offset = offset
        self.json_path = json_path


class ConfigError(InputError):
    """A configuration key is unknown, missing, or out of range."""

    def __init__(self, key, message):
        super().__init__(f"config key '{key}': {message}")
        self.key = key


class PlanEmpty(InputError):
    """The region polygon cannot fit a single coverage row."""


class RuntimeFailure(MissionError):
    """A mission-level failure occurring after inputs validated."""


class NoTerrainFound(RuntimeFailure):
    """No cloud point found under a waypoint within the tolerance cap."""

    def __init__(self, x, y, tol_max, drone_id=None, waypoint_index=None):
        where = f"xy=({x:.3f}, {y:.3f})"
        if drone_id is not None:
            where = f"drone {drone_id!r} waypoint {waypoint_index} at {where}"
        super().__init__(f"no terrain found for {where} within tol_max={tol_max:g} m")
        self.x = x
        self.y = y
        self.tol_max = tol_max
        self.drone_id = drone_id
        self.waypoint_index = waypoint_index


class NoTargetFound(RuntimeFailure):
    """Hemisphere search exhausted the radius cap without a view target."""

    def __init__(self, x, y, z, r_max):
        super().__init__(
            f"no view target below waypoint ({x:.3f}, {y:.3f}, {z:.3f}) "
            f"within r_max={r_max:g} m"
        )
        self.x = x
        self.y = y
        self.z = z
        self.r_max = r_max


class StandoffUnresolved(RuntimeFailure):
    """Lateral standoff displacement could not clear the structure."""

    def __init__(self, x, y, z):
        super().__init__(
            f"lateral standoff unresolved at waypoint ({x:.3f}, {y:.3f}, {z:.3f})"
        )
        self.x = x
        self.y = y
        self.z = z
