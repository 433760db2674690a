"""Exception hierarchy."""


class EvoflowError(Exception):
    """Base class for all evoflow errors."""


class InvalidArgument(EvoflowError, ValueError):
    pass


class ShapeError(EvoflowError, ValueError):
    pass


class ConfigurationError(EvoflowError, ValueError):
    """Invalid module tree, hyperparameters or experiment config."""

    def __init__(self, message: str, field: str | None = None):
        self.field = field
        super().__init__(f"{field}: {message}" if field else message)


class PathNotFound(EvoflowError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else ""


class ContractViolation(EvoflowError):
    """A module broke the ask/evaluate/tell contract."""

    def __init__(self, message: str, module: str | None = None):
        self.module = module
        super().__init__(f"[{module}] {message}" if module else message)


class NumericalDegeneracy(EvoflowError, ArithmeticError):
    def __init__(self, message: str, iteration: int | None = None):
        self.iteration = iteration
        super().__init__(message if iteration is None else f"{message} (iteration {iteration})")


class BudgetExhausted(EvoflowError):
    """Raised by ``Workflow.step`` once ``t == t_max``."""


class WorkerError(EvoflowError):
    def __init__(self, worker_id: int, cause: BaseException):
        self.worker_id = worker_id
        self.cause = cause
        super().__init__(f"worker {worker_id} failed: {cause!r}")


class ProtocolError(EvoflowError):
    pass


class HandshakeError(ProtocolError):
    pass


class AllGatherTimeout(ProtocolError, TimeoutError):
    def __init__(self, missing: list[int], iteration: int):
        self.missing = list(missing)
        self.iteration = iteration
        super().__init__(f"all-gather timed out at iteration {iteration}; missing nodes {self.missing}")
