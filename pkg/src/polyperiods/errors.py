"""Exception types shared across the package."""


class MeshError(ValueError):
    """Invalid mesh input. ``line`` is the 1-based source line when known."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class TopologyError(ValueError):
    """Cellular data does not describe a closed oriented connected surface."""


class DelaunayViolation(ValueError):
    """One or more edges have a non-positive conformal weight.

    ``edges`` lists ``(edge_index, tail, head, rho)`` for every offending edge.
    """

    def __init__(self, edges, scheme=None):
        self.edges = list(edges)
        self.scheme = scheme
        head = ", ".join(f"{t}-{h} (rho={r:.3g})" for _, t, h, r in self.edges[:10])
        more = "" if len(self.edges) <= 10 else f" and {len(self.edges) - 10} more"
        super().__init__(f"{len(self.edges)} non-Delaunay edge(s): {head}{more}")


class SolverError(RuntimeError):
    """A linear solve failed to reach the requested residual."""

    def __init__(self, message, residual=None):
        self.residual = residual
        super().__init__(message)


class NormalizationError(RuntimeError):
    """The a-period normalization system is singular or ill-conditioned."""
