"""Exception hierarchy shared by all bergelab modules.

Every error carries enough context (module, operation, offending input)
to be surfaced verbatim by the CLI.
"""


class BergelabError(Exception):
    """Base class for all package errors."""


class IndeterminateForm(BergelabError):
    """Raised on (+inf) + (-inf) and similar undefined extended-real forms."""


class UnboundVariable(BergelabError):
    """Expression references a variable missing from the environment."""


class ExactModeUnsupported(BergelabError):
    """Operation not representable in the a + b*sqrt(2) exact field, or a
    rationality test attempted in float mode."""


class EvaluationError(BergelabError):
    """Generic typed failure while evaluating an expression."""


class ValidationError(BergelabError):
    """Structural validation failure (schemas, invariants, domains)."""


class NoGuardMatched(BergelabError):
    """No piece of a guarded multifunction or piecewise matched the input."""


class EmptyNotAllowed(BergelabError):
    """Multifunction produced an empty value where empties are disallowed."""


class PreconditionFailed(BergelabError):
    """An operation's stated precondition does not hold at the working
    resolution."""


class EmptyDomainNeighborhood(BergelabError):
    """No sampled points of Dom(phi) near the base point of a checker run."""


class UnknownFixture(BergelabError):
    """Corpus fixture name not in the registry."""


class InfeasibleOrder(BergelabError):
    """Inventory order outside the feasible interval for the state."""


class InfeasibleAction(BergelabError):
    """Minimax action outside the feasible set."""


class StateOutOfRange(BergelabError):
    """Inventory state outside the model's state space."""


class GridCoverageError(BergelabError):
    """A reachable state falls outside the value-table grid."""


class InterpolationRangeError(BergelabError):
    """Interpolation queried outside the supporting grid."""


class ConfigError(BergelabError):
    """CLI / file configuration error."""


class ComputeError(BergelabError):
    """Wrapper carrying module/op context for errors raised mid-computation."""

    def __init__(self, module: str, op: str, detail: str):
        self.module = module
        self.op = op
        self.detail = detail
        super().__init__(f"[{module}.{op}] {detail}")
