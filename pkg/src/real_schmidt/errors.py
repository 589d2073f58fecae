"""Exceptions raised by the reduction pipeline."""


class ZeroVector(ValueError):
    pass


class NonFinite(ValueError):
    pass


class NotInS05(ValueError):
    def __init__(self, u1, u4):
        self.u1 = u1
        self.u4 = u4
        super().__init__(f"state is not in S0^5: |u_001|={abs(u1):.3e}, |u_100|={abs(u4):.3e}")


class ReductionFailed(RuntimeError):
    pass


class StepSizeUnderflow(RuntimeError):
    pass


class SolveFailed(RuntimeError):
    pass


class DegenerateRecovery(RuntimeWarning):
    """Both arguments of the theta1 recovery vanished at the chosen root."""


class NormalFormFailed(RuntimeError):
    def __init__(self, best_residual, path):
        self.best_residual = best_residual
        self.path = path
        super().__init__(f"normal form not reached (path={path}, best residual={best_residual:.3e})")
