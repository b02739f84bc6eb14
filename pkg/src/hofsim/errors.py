"""Exceptions shared between the compiled and pure-Python kernels."""


class StiffIntegrationError(RuntimeError):
    """Adaptive step size underflowed; carries the time where it happened."""

    def __init__(self, t: float):
        super().__init__(f"step size underflow at t = {t:.6e} s")
        self.t = t
