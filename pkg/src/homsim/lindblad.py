"""Dense Lindblad master-equation engine for small Hilbert spaces.

Density matrices live in dimension 2 or 3 here, so everything is dense and
exact: superoperators are built as d^2 x d^2 matrices acting on column-stacked
density matrices, propagation uses the scaling-and-squaring matrix
exponential, and two-time correlators follow from the quantum regression
theorem.

Stacking convention
-------------------
Density matrices are vectorised column-major (Fortran order),
``vec(rho)[i + d*j] = rho[i, j]``, so that ``vec(A rho B) = kron(B.T, A) vec(rho)``.
Superoperator matrices built here are portable to any code using the same
convention.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from .errors import SteadyStateError, ValidationError

HERMITICITY_TOL = 1e-12
TRACE_TOL = 1e-12
POSITIVITY_TOL = 1e-10
# Negative eigenvalues above this floor are silent roundoff; between the floor
# and POSITIVITY_TOL we clamp and warn; beyond POSITIVITY_TOL we raise.
POSITIVITY_SILENT = 1e-13


def _vec(mat: np.ndarray) -> np.ndarray:
    return np.asarray(mat, dtype=complex).flatten(order="F")


def _unvec(v: np.ndarray, dim: int) -> np.ndarray:
    return np.asarray(v, dtype=complex).reshape((dim, dim), order="F")


@dataclass(frozen=True)
class DensityMatrix:
    """Trace-one Hermitian positive matrix state.

    Use :meth:`from_array` to validate/clamp raw arrays; the plain constructor
    trusts its input.
    """

    entries: np.ndarray

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @classmethod
    def from_array(cls, arr: np.ndarray) -> "DensityMatrix":
        """Validate a raw matrix as a physical state.

        Raises ValidationError if the trace deviates from one by more than
        1e-12, Hermiticity is violated entrywise beyond 1e-12, or an
        eigenvalue lies below -1e-10.  Small negative eigenvalues within
        tolerance are clamped to zero (with a warning outside the silent
        roundoff floor).
        """
        arr = np.asarray(arr, dtype=complex)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ValidationError(f"density matrix must be square, got shape {arr.shape}")
        tr = np.trace(arr)
        if abs(tr - 1.0) > TRACE_TOL:
            raise ValidationError(f"trace(rho) = {tr}, expected 1 within {TRACE_TOL}")
        if np.max(np.abs(arr - arr.conj().T)) > HERMITICITY_TOL:
            raise ValidationError("density matrix is not Hermitian within 1e-12")
        evals, evecs = np.linalg.eigh((arr + arr.conj().T) / 2.0)
        min_ev = evals.min()
        if min_ev < -POSITIVITY_TOL:
            raise ValidationError(
                f"negative eigenvalue {min_ev:.3e} below positivity tolerance {POSITIVITY_TOL}"
            )
        if min_ev < 0.0:
            if min_ev < -POSITIVITY_SILENT:
                warnings.warn(
                    f"clamping negative eigenvalue {min_ev:.3e} to zero",
                    RuntimeWarning,
                    stacklevel=2,
                )
            evals = np.clip(evals, 0.0, None)
            arr = (evecs * evals) @ evecs.conj().T
            arr = arr / np.trace(arr).real
        return cls(entries=arr)

    @classmethod
    def pure(cls, dim: int, index: int) -> "DensityMatrix":
        """Basis projector |index><index| in dimension ``dim``."""
        arr = np.zeros((dim, dim), dtype=complex)
        arr[index, index] = 1.0
        return cls(entries=arr)

    def expectation(self, op: np.ndarray) -> complex:
        return complex(np.trace(np.asarray(op) @ self.entries))

    def populations(self) -> np.ndarray:
        return np.real(np.diag(self.entries))


@dataclass(frozen=True)
class LiouvillianSpec:
    """Hamiltonian plus a list of (collapse operator, rate) dissipators.

    The Hamiltonian is in angular frequency units (rad/s) and rates in 1/s,
    so the generated superoperator has units of 1/s throughout.
    """

    dim: int
    hamiltonian: np.ndarray
    dissipators: list[tuple[np.ndarray, float]] = field(default_factory=list)

    def validate(self) -> None:
        h = np.asarray(self.hamiltonian)
        if h.shape != (self.dim, self.dim):
            raise ValidationError(f"hamiltonian shape {h.shape} does not match dim {self.dim}")
        if np.max(np.abs(h - h.conj().T)) > HERMITICITY_TOL * max(1.0, np.max(np.abs(h))):
            raise ValidationError("hamiltonian is not Hermitian within 1e-12")
        for i, (op, rate) in enumerate(self.dissipators):
            if np.asarray(op).shape != (self.dim, self.dim):
                raise ValidationError(f"dissipator {i} has wrong shape")
            if rate < 0:
                raise ValidationError(f"dissipator {i} has negative rate {rate}")


@dataclass(frozen=True)
class Superoperator:
    """Matrix form of a Lindblad generator on column-stacked states."""

    dim: int
    matrix: np.ndarray

    def __post_init__(self):
        d2 = self.dim * self.dim
        if self.matrix.shape != (d2, d2):
            raise ValidationError(f"superoperator must be {d2}x{d2}")

    def apply(self, rho: np.ndarray) -> np.ndarray:
        """Return L[rho] as a d x d matrix."""
        return _unvec(self.matrix @ _vec(rho), self.dim)

    def rate_scale(self) -> float:
        """Magnitude scale of the generator, used for relative tolerances."""
        scale = np.max(np.abs(self.matrix))
        return float(scale) if scale > 0 else 1.0


def build_superoperator(spec: LiouvillianSpec) -> Superoperator:
    """Compile a LiouvillianSpec into its d^2 x d^2 matrix.

    The action is -i[H, rho] + sum_k rate_k (X rho X^dag - {X^dag X, rho}/2).
    """
    spec.validate()
    d = spec.dim
    eye = np.eye(d, dtype=complex)
    h = np.asarray(spec.hamiltonian, dtype=complex)
    mat = -1j * (np.kron(eye, h) - np.kron(h.T, eye))
    for op, rate in spec.dissipators:
        x = np.asarray(op, dtype=complex)
        xdx = x.conj().T @ x
        mat = mat + rate * (
            np.kron(x.conj(), x)
            - 0.5 * np.kron(eye, xdx)
            - 0.5 * np.kron(xdx.T, eye)
        )
    return Superoperator(dim=d, matrix=mat)


def propagate(liouvillian: Superoperator, rho0: DensityMatrix, t: float) -> DensityMatrix:
    """Evolve rho0 for a time t >= 0 under exp(L t).

    Uses the dense scaling-and-squaring matrix exponential; trace and
    Hermiticity are preserved to roundoff for any valid generator.
    """
    if t < 0:
        raise ValueError(f"propagation time must be nonnegative, got {t}")
    if rho0.dim != liouvillian.dim:
        raise ValidationError("state dimension does not match superoperator")
    if t == 0:
        return rho0
    v = expm(liouvillian.matrix * t) @ _vec(rho0.entries)
    rho = _unvec(v, liouvillian.dim)
    # Re-Hermitize before validation: exp(Lt) keeps rho Hermitian only to roundoff.
    rho = (rho + rho.conj().T) / 2.0
    return DensityMatrix.from_array(rho)


def steady_state(liouvillian: Superoperator) -> DensityMatrix:
    """Solve L[rho_ss] = 0 with trace one.

    The kernel is found from a bordered linear system (L stacked with the
    trace-one row) rather than eigen-iteration, which stays well behaved
    when the generator is already diagonal (for example with zero driving).
    Raises SteadyStateError when the kernel dimension is not one.
    """
    d = liouvillian.dim
    d2 = d * d
    scale = liouvillian.rate_scale()
    m = liouvillian.matrix / scale
    svals = np.linalg.svd(m, compute_uv=False)
    kernel_dim = int(np.sum(svals < 1e-10))
    if kernel_dim != 1:
        raise SteadyStateError(
            f"superoperator kernel has dimension {kernel_dim}, need exactly 1"
        )
    trace_row = np.zeros(d2, dtype=complex)
    trace_row[[i * (d + 1) for i in range(d)]] = 1.0
    a = np.vstack([m, trace_row])
    b = np.zeros(d2 + 1, dtype=complex)
    b[-1] = 1.0
    v, *_ = np.linalg.lstsq(a, b, rcond=None)
    residual = np.linalg.norm(m @ v)
    if residual > 1e-10:
        raise SteadyStateError(f"steady-state residual {residual:.3e} exceeds 1e-10")
    rho = _unvec(v, d)
    rho = (rho + rho.conj().T) / 2.0
    rho = rho / np.trace(rho).real
    return DensityMatrix.from_array(rho)


class _Propagator:
    """Cheap exp(L t) @ v evaluation for many times.

    Diagonalises the generator once when the eigenbasis is well conditioned;
    otherwise falls back to a fresh matrix exponential per call.  Only used
    internally by the correlator machinery; the public ``propagate`` keeps
    the scaling-and-squaring path.
    """

    def __init__(self, matrix: np.ndarray):
        self.matrix = matrix
        self._diagonal = False
        evals, evecs = np.linalg.eig(matrix)
        cond = np.linalg.cond(evecs)
        if np.isfinite(cond) and cond < 1e8:
            self._diagonal = True
            self._evals = evals
            self._evecs = evecs
            self._inv = np.linalg.inv(evecs)

    def apply(self, t: float, v: np.ndarray) -> np.ndarray:
        if self._diagonal:
            return self._evecs @ (np.exp(self._evals * t) * (self._inv @ v))
        return expm(self.matrix * t) @ v

    def apply_grid(self, times: np.ndarray, v: np.ndarray) -> np.ndarray:
        """exp(L t) @ v for every t; returns shape (len(times), d^2)."""
        times = np.asarray(times, dtype=float)
        if self._diagonal:
            # (n, d2) = exp(outer(t, lambda)) scaled by the eigen-coordinates of v.
            coeff = self._inv @ v
            return np.exp(np.outer(times, self._evals)) * coeff @ self._evecs.T
        out = np.empty((times.size, v.size), dtype=complex)
        uniform = times.size > 1 and np.allclose(
            np.diff(times), times[1] - times[0], rtol=1e-9, atol=0.0
        )
        if uniform:
            step = expm(self.matrix * (times[1] - times[0]))
            cur = expm(self.matrix * times[0]) @ v if times[0] != 0 else v.copy()
            for i in range(times.size):
                out[i] = cur
                if i + 1 < times.size:
                    cur = step @ cur
        else:
            for i, t in enumerate(times):
                out[i] = self.apply(t, v)
        return out


def two_time_correlator(
    liouvillian: Superoperator,
    rho: DensityMatrix,
    left: np.ndarray,
    mid: np.ndarray,
    right: np.ndarray,
    tau_grid: np.ndarray,
) -> np.ndarray:
    """Quantum-regression correlator Tr[left exp(L tau) (mid rho right)].

    With (left, mid, right) = (sigma^dag, sigma, identity) this is the
    first-order correlation g1(tau); with (sigma^dag sigma, sigma, sigma^dag)
    the intensity correlation g2(tau).  tau values must be nonnegative.
    """
    d = liouvillian.dim
    tau_grid = np.asarray(tau_grid, dtype=float)
    if np.any(tau_grid < 0):
        raise ValueError("tau grid must be nonnegative")
    for name, op in (("left", left), ("mid", mid), ("right", right)):
        if np.asarray(op).shape != (d, d):
            raise ValidationError(f"operator '{name}' has wrong dimension")
    if rho.dim != d:
        raise ValidationError("state dimension does not match superoperator")
    v0 = _vec(np.asarray(mid, dtype=complex) @ rho.entries @ np.asarray(right, dtype=complex))
    w = np.asarray(left, dtype=complex).T.flatten(order="F")
    prop = _Propagator(liouvillian.matrix)
    return prop.apply_grid(tau_grid, v0) @ w
