"""Exception hierarchy shared by all modules."""


class PolyDendriteError(Exception):
    """Base class for every error raised by the package."""


class GeometryError(PolyDendriteError):
    pass


class DegenerateSource(GeometryError):
    pass


class NotContracting(GeometryError):
    pass


class InvalidPolygon(GeometryError):
    pass


class NotIncident(GeometryError):
    pass


class SizeLimit(PolyDendriteError):
    """Requested enumeration would exceed the configured cap."""


class InvalidSystem(PolyDendriteError):
    pass


class D2Violated(PolyDendriteError):
    """Two pieces meet in something other than a single common vertex."""

    def __init__(self, pair, description):
        self.pair = pair
        self.description = description
        super().__init__(f"pieces {pair} violate D2: {description}")


class NotContractible(PolyDendriteError):
    pass


class NotATree(PolyDendriteError):
    def __init__(self, cycle=None):
        self.cycle = cycle
        super().__init__(f"piece graph has a cycle: {cycle}")


class NotConnected(PolyDendriteError):
    pass


class NotCertified(PolyDendriteError):
    pass


class NotAVertex(PolyDendriteError):
    pass


class PreconditionFailed(PolyDendriteError):
    pass


class InfiniteSuspected(PolyDendriteError):
    pass


class CapExceeded(PolyDendriteError):
    pass


class Unsubordinated(PolyDendriteError):
    def __init__(self, point):
        self.point = point
        super().__init__(f"no route to a cyclic vertex found for {point}")


class PhiUndefined(PolyDendriteError):
    pass


class InconsistentSpec(PolyDendriteError):
    def __init__(self, k, vertex, error):
        self.k = k
        self.vertex = vertex
        self.error = error
        super().__init__(
            f"displaced vertices of piece {k} are not a similar image of P' "
            f"(vertex {vertex}, mismatch {error:.3g})")


class NotBijective(PolyDendriteError):
    pass


class AssumptionViolated(PolyDendriteError):
    def __init__(self, which, detail=""):
        self.which = which
        super().__init__(f"standing assumption violated: {which} {detail}".strip())


class BoundViolated(PolyDendriteError):
    def __init__(self, k, which, value, bound):
        self.k = k
        self.which = which
        super().__init__(f"map {k}: {which} = {value!r} exceeds bound {bound!r}")


class RouteMismatch(PolyDendriteError):
    def __init__(self, point, routes, spread):
        self.point = point
        self.routes = routes
        self.spread = spread
        super().__init__(f"routes {routes} to {point} disagree by {spread:.3g}")


class HolderViolated(PolyDendriteError):
    pass


class StripsOverlap(PolyDendriteError):
    pass
