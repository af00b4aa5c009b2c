"""Exception types shared across the package."""


class ValidationError(ValueError):
    """An input violates a documented precondition or invariant."""


class CoincidentSitesError(ValidationError):
    """Two sites (or the query and a site) coincide within tolerance."""


class DomainError(ValidationError):
    """A point lies outside the domain of the active divergence generator."""


class OutsideCellError(ValidationError):
    """A walk state or start point is not inside the cell."""


class BoxExcludesPointError(ValidationError):
    """The bounding box does not contain the query point."""


class MalformedVectorError(ValidationError):
    """Affinity entries are negative or do not sum to one."""


class EmptyCellError(RuntimeError):
    """No probe points fell inside the influence cell."""


class UnboundedChordError(RuntimeError):
    """A chord escaped to infinity; box faces should make this impossible."""


class ParseError(ValueError):
    """CSV ingestion failure, annotated with the offending line."""
