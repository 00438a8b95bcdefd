"""Exception types shared across the planning engine."""


class PlanningError(Exception):
    """Base class for planner failures."""


class ConfigError(PlanningError):
    """Bad or missing configuration input; the message names the offending field."""


class PlacementBudgetExhausted(PlanningError):
    """Rejection sampling could not place every user within the attempt cap."""


class DegenerateGeometry(PlanningError):
    """Two nodes coincide where a direction or angle is required."""


class UnassignedLink(PlanningError):
    """Queried a (user, uav, subcarrier) triple that is not in the plan."""


class UnassignedUser(PlanningError):
    """Queried a user with no reflector cluster or subcarrier assignment."""


class InsufficientElements(PlanningError):
    """Fewer reflector elements than users that need a cluster."""


class EmptyZone(PlanningError):
    """Clustering requested over an empty user set."""


class InvalidAlpha(PlanningError):
    """The closed-form loss bound is only valid for a squared-distance exponent."""


class NoSubcarriersForUser(PlanningError):
    """A zone user would receive zero subcarriers under the current split."""


class NotAchievable(PlanningError):
    """Search cap reached without meeting the target."""
