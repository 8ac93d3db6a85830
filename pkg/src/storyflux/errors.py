"""Exception hierarchy.

Every error carries a short machine-readable ``code`` used by the CLI when it
writes its error record, and an ``exit_code`` following the CLI convention
(2 input error, 3 empty result, 4 internal invariant violation).
"""


class StoryfluxError(Exception):
    code = "error"
    exit_code = 4


class InputError(StoryfluxError):
    code = "input_error"
    exit_code = 2


class MalformedUrl(InputError):
    code = "malformed_url"


class EmptyHost(MalformedUrl):
    code = "empty_host"


class ResolverError(InputError):
    code = "resolver_error"


class ResolverTimeout(ResolverError):
    code = "resolver_timeout"


class ResolverLoop(ResolverError):
    code = "resolver_loop"


class UnreadableInput(InputError):
    code = "unreadable_input"


class MissingInput(InputError):
    code = "missing_input"


class ConfigError(InputError):
    code = "config_error"


class UnknownCommunity(InputError):
    code = "unknown_community"


class OutOfRangeScore(InputError):
    code = "out_of_range_score"


class DegenerateTable(InputError):
    code = "degenerate_table"


class InconsistentTotal(InputError):
    code = "inconsistent_total"


class UnassignedNode(InputError):
    code = "unassigned_node"


class EventOutsideWindow(InputError):
    code = "event_outside_window"


class InvalidPriors(InputError):
    code = "invalid_priors"


class SupercriticalModel(InputError):
    code = "supercritical_model"


class MissingArtifact(InputError):
    code = "missing_artifact"


class EmptyResult(StoryfluxError):
    code = "empty_result"
    exit_code = 3


class EmptyCommunity(EmptyResult):
    code = "empty_community"


class EmptySeries(EmptyResult):
    code = "empty_series"


class EmptyGraph(EmptyResult):
    code = "empty_graph"


class EmptyEvents(EmptyResult):
    code = "empty_events"


class NoPopularStories(EmptyResult):
    code = "no_popular_stories"


class InvariantViolation(StoryfluxError):
    code = "invariant_violation"
    exit_code = 4
