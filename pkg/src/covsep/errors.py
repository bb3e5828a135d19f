class InvariantError(ValueError):
    """A value violates a type invariant.

    ``invariant`` names the violated condition and ``residual`` is the
    measured deviation (``None`` when not numeric).
    """

    def __init__(self, invariant, residual=None, detail=""):
        self.invariant = invariant
        self.residual = residual
        msg = f"invariant violated: {invariant}"
        if residual is not None:
            msg += f" (residual {residual:.3e})"
        if detail:
            msg += f"; {detail}"
        super().__init__(msg)


class InternalConsistencyError(ArithmeticError):
    """An identity that must hold by construction failed numerically."""


class DegenerateObservable(ValueError):
    def __init__(self, side, gap):
        self.side = side
        self.gap = gap
        super().__init__(
            f"observable {side} is degenerate (eigenvalue gap {gap:.3e}); the induced "
            "outcome table needs two distinct values per side, as required by the "
            "binary independence theorem"
        )


class PivotSingular(ZeroDivisionError):
    def __init__(self, pivot, coefficient):
        self.pivot = pivot
        self.coefficient = coefficient
        super().__init__(f"pivot {pivot!r} has coefficient {coefficient:.3e}")


class GeneratorError(RuntimeError):
    pass


class CounterexampleError(AssertionError):
    pass
