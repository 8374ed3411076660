"""
Custom exceptions for the toolkit
"""

from typing import Optional, Any, Dict

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_STAGE = 3
EXIT_ACCEPTANCE = 4


class ToolkitError(Exception):
    """Base custom exception"""

    def __init__(
        self,
        message: str,
        details: Optional[Dict[str, Any]] = None,
        exit_code: int = EXIT_STAGE
    ):
        self.message = message
        self.details = details or {}
        self.exit_code = exit_code
        super().__init__(message)

    def to_dict(self) -> Dict[str, Any]:
        return {"message": self.message, **self.details}


class ValidationError(ToolkitError):
    """Invalid parameters or configuration"""

    def __init__(self, message: str, field: Optional[str] = None):
        details = {"error_type": "validation_error"}
        if field:
            details["field"] = field
        super().__init__(message, details, exit_code=EXIT_VALIDATION)


class NoConvergenceError(ToolkitError):
    """Newton iteration did not reach tolerance"""

    def __init__(self, message: str = "Newton iteration did not converge", residuals=None):
        details = {"error_type": "no_convergence"}
        if residuals is not None:
            details["residuals"] = [float(r) for r in residuals]
        super().__init__(message, details)


class SingularJacobianError(ToolkitError):
    """Newton matrix conditioning beyond threshold"""

    def __init__(self, condition: float):
        super().__init__(
            f"Newton matrix is numerically singular (cond={condition:.3e})",
            {"error_type": "singular_jacobian", "condition": float(condition)}
        )


class TruncationTooSmallError(ToolkitError):
    """Requested Fourier truncation cannot hold the wave"""

    def __init__(self, requested: int, required: int):
        super().__init__(
            f"Truncation M={requested} is smaller than the wave truncation M={required}",
            {"error_type": "truncation_too_small", "requested": requested, "required": required}
        )


class EigensolverFailure(ToolkitError):
    """Dense eigensolver failed"""

    def __init__(self, xi: float, reason: str):
        super().__init__(
            f"Eigensolve failed at xi={xi:.6g}: {reason}",
            {"error_type": "eigensolver_failure", "xi": float(xi)}
        )


class BranchCrossingError(ToolkitError):
    """Critical branch continuation became ambiguous"""

    def __init__(self, xi: float, overlap: float):
        super().__init__(
            f"Critical branch ambiguous at xi={xi:.6g} (overlap {overlap:.3f})",
            {"error_type": "branch_crossing", "xi": float(xi), "overlap": float(overlap)}
        )


class SingularShiftError(ToolkitError):
    """Resolvent requested at a point of the spectrum"""

    def __init__(self, mu: float, sigma_min: float):
        super().__init__(
            f"i*mu with mu={mu:.6g} lies on the spectrum (sigma_min={sigma_min:.3e})",
            {"error_type": "singular_shift", "mu": float(mu)}
        )


class IllConditionedExponentialError(ToolkitError):
    """Neither exponential path passed its conditioning check"""

    def __init__(self, xi: float, condition: float):
        super().__init__(
            f"Matrix exponential unreliable at xi={xi:.6g} (eigenvector cond={condition:.3e})",
            {"error_type": "ill_conditioned_exponential", "xi": float(xi)}
        )


class GridMismatchError(ToolkitError):
    """Field grid incompatible with the lattice"""

    def __init__(self, message: str):
        super().__init__(message, {"error_type": "grid_mismatch"}, exit_code=EXIT_VALIDATION)


class WindowLeakError(ToolkitError):
    """Windowed field reaches the window boundary"""

    def __init__(self, leak: float, t: Optional[float] = None):
        where = "initial data" if t is None else f"t={t:.6g}"
        super().__init__(
            f"Window leak {leak:.3e} at {where}",
            {"error_type": "window_leak", "leak": float(leak), "t": t}
        )


class DegenerateFitError(ToolkitError):
    """Decay data unsuitable for a fit"""

    def __init__(self, message: str = "Norms span too little for a decay fit"):
        super().__init__(message, {"error_type": "degenerate_fit"})


class StageFailure(ToolkitError):
    """Pipeline stage failed"""

    def __init__(self, stage: str, message: str, details: Optional[Dict[str, Any]] = None):
        self.stage = stage
        payload = {"error_type": "stage_failure", "stage": stage}
        payload.update(details or {})
        super().__init__(f"Stage '{stage}' failed: {message}", payload, exit_code=EXIT_STAGE)


class HashMismatchError(StageFailure):
    """Recorded artifact no longer matches its manifest hash"""

    def __init__(self, stage: str, path: str, expected: str, actual: str):
        super().__init__(
            stage,
            f"hash mismatch for {path}",
            {"error_type": "hash_mismatch", "path": path, "expected": expected, "actual": actual}
        )


class AcceptanceFailure(ToolkitError):
    """One or more acceptance checks failed"""

    def __init__(self, failed: Dict[str, str]):
        super().__init__(
            f"{len(failed)} acceptance check(s) failed",
            {"error_type": "acceptance_failure", "failed": failed},
            exit_code=EXIT_ACCEPTANCE
        )
