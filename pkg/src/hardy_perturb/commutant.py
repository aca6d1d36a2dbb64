"""Commutants of shifts on truncated tridiagonal kernel spaces.

Every operator commuting with such a shift is ``T_phi + N`` for a bounded
symbol ``phi``: the Toeplitz part carries the Taylor coefficients of the
symbol down its diagonals and the correction ``N`` is supported in the
first ``n`` columns.  Symbols here are polynomials, the dense finitely
representable test class.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .core import (
    DEFAULT_TOL,
    OperatorMatrix,
    Subspace,
    ToleranceConfig,
    band_spread,
    invariance_residual,
    krylov_closure,
    TruncatedVector,
)
from .errors import HardyPerturbError, PreconditionError
from .inner import Polynomial
from .shifts import NShift, TridiagonalKernel, f_basis_matrix, shift_from_kernel

__all__ = [
    "CommutantElement",
    "commutant_element",
    "hyperinvariance_check",
    "irreducibility_probe",
    "toeplitz_matrix",
    "verify_commutation",
]


@dataclass(frozen=True)
class CommutantElement:
    """A commutant member ``X = T + N`` with its polynomial symbol."""

    symbol: Polynomial
    X: OperatorMatrix
    T: OperatorMatrix
    N: OperatorMatrix

    @property
    def working_order(self) -> int:
        return self.X.working_order


def toeplitz_matrix(symbol: Polynomial, working_order: int) -> np.ndarray:
    """Lower-triangular Toeplitz matrix of multiplication by a polynomial."""
    col = np.zeros(working_order, dtype=np.complex128)
    c = symbol.coeffs
    col[: min(c.size, working_order)] = c[:working_order]
    row = np.zeros(working_order, dtype=np.complex128)
    row[0] = col[0]
    return scipy.linalg.toeplitz(col, row)


def commutant_element(
    symbol: Polynomial,
    kernel: TridiagonalKernel,
    working_order: int,
    tol: ToleranceConfig | None = None,
    shift: NShift | None = None,
) -> CommutantElement:
    """Build the commutant member with a given polynomial symbol.

    The multiplication matrix in f-basis coordinates comes from the same
    triangular change-of-basis solve as the shift construction; relabeling
    to the monomial basis gives ``X``, the Toeplitz part is read off the
    symbol directly, and ``N = X - T``.  The structural invariants
    (``N`` supported in the first ``n`` columns, ``X`` commuting with the
    shift) are verified before returning; a violation signals a
    construction bug, not bad input.
    """
    tol = tol or DEFAULT_TOL
    if symbol.degree >= working_order - kernel.n - 2:
        raise PreconditionError("symbol degree too close to the working order")
    g = f_basis_matrix(kernel, working_order)
    t_mat = toeplitz_matrix(symbol, working_order)
    x = scipy.linalg.solve_triangular(g, t_mat @ g, lower=True)
    x[np.abs(x) < 1e-14 * max(1.0, float(np.abs(x).max()))] = 0.0
    n_mat = x - t_mat
    scale = max(1.0, float(np.abs(x).max()))
    if kernel.n < working_order:
        spill = float(np.abs(n_mat[:, kernel.n :]).max())
        if spill > tol.tau_res * scale:
            raise HardyPerturbError(
                f"internal consistency: N has column support beyond n "
                f"(max magnitude {spill:.3e})"
            )
    if shift is None:
        shift = shift_from_kernel(kernel, working_order, tol)
    element = CommutantElement(
        symbol,
        OperatorMatrix(x, "monomial"),
        OperatorMatrix(t_mat, "monomial"),
        OperatorMatrix(n_mat, "monomial", ("zero", working_order, kernel.n)),
    )
    resid = verify_commutation(element.X, shift, tol)
    if resid > tol.tau_res * scale:
        raise HardyPerturbError(
            f"internal consistency: commutation residual {resid:.3e}"
        )
    return element


def verify_commutation(X, shift: NShift, tol: ToleranceConfig | None = None) -> float:
    """Max-norm of ``XS - SX`` away from the truncation boundary."""
    x = X.entries if isinstance(X, OperatorMatrix) else np.asarray(X, dtype=np.complex128)
    s = shift.S.entries
    if x.shape != s.shape:
        raise PreconditionError("operator and shift working orders differ")
    nw = s.shape[0]
    guard = max(band_spread(x)[0], band_spread(s)[0], 1) + 1
    comm = x @ s - s @ x
    r = nw - guard
    return float(np.abs(comm[:r, :r]).max()) if r > 0 else 0.0


def _random_symbol(rng: np.random.Generator, max_degree: int) -> Polynomial:
    deg = int(rng.integers(1, max_degree + 1))
    radii = np.sqrt(rng.uniform(0.0, 1.0, deg + 1))
    phases = rng.uniform(0.0, 2 * np.pi, deg + 1)
    coeffs = radii * np.exp(1j * phases)
    return Polynomial(coeffs)


def hyperinvariance_check(
    M: Subspace,
    shift: NShift,
    kernel: TridiagonalKernel,
    trials: int,
    tol: ToleranceConfig | None = None,
    seed: int = 0,
    max_degree: int = 8,
) -> dict:
    """Check that every sampled commutant member maps ``M`` into itself.

    Random polynomial symbols with coefficients uniform in the unit disc
    (seeded for reproducibility) are turned into commutant members; the
    report carries the largest escape residual of ``M`` under them and
    passes when it stays below ``tau_res``.
    """
    tol = tol or DEFAULT_TOL
    if not M.invariant_certified:
        resid = invariance_residual(M, shift)
        if resid > 10 * tol.tau_res:
            raise PreconditionError(
                f"subspace is not invariant at truncation (residual {resid:.3e})"
            )
    rng = np.random.default_rng(seed)
    worst = 0.0
    degrees = []
    for _ in range(trials):
        symbol = _random_symbol(rng, max_degree)
        degrees.append(symbol.degree)
        element = commutant_element(symbol, kernel, M.working_order, tol, shift)
        worst = max(worst, invariance_residual(M, element.X))
    return {
        "trials": trials,
        "seed": seed,
        "max_symbol_degree": max(degrees, default=0),
        "max_residual": worst,
        "passed": worst < tol.tau_res,
    }


def irreducibility_probe(
    shift: NShift,
    kernel: TridiagonalKernel,
    tol: ToleranceConfig | None = None,
    subspaces=None,
    seed: int = 0,
) -> dict:
    """Check that no sampled nontrivial invariant subspace is reducing.

    A reducing subspace would also be invariant under the adjoint; for each
    sampled invariant subspace the probe records the adjoint escape
    ``norm((I - P) S* P)``, which must stay above ``tau_res`` away from the
    trivial subspaces.
    """
    tol = tol or DEFAULT_TOL
    nw = shift.working_order
    if subspaces is None:
        rng = np.random.default_rng(seed)
        subspaces = []
        depth = min((nw - 2) // max(band_spread(shift.S.entries)[0], 1), nw // 2)
        for _ in range(3):
            deg = int(rng.integers(1, 5))
            coeffs = rng.standard_normal(deg + 1) + 1j * rng.standard_normal(deg + 1)
            seed_vec = TruncatedVector.from_coefficients(coeffs, nw)
            subspaces.append(krylov_closure(shift, seed_vec, depth, tol))
    samples = []
    reducing_found = False
    adjoint = shift.S.entries.conj().T
    for M in subspaces:
        if M.dim == 0 or M.dim == nw:
            samples.append({"dimension": M.dim, "skipped": "trivial"})
            continue
        rows = M.frontier if M.frontier is not None else M.trusted_order
        rows = max(1, rows - band_spread(shift.S.entries)[0] - 1)
        escape = invariance_residual(M, adjoint, rows=rows)
        is_reducing = escape <= tol.tau_res
        reducing_found = reducing_found or is_reducing
        samples.append({
            "dimension": M.dim,
            "adjoint_escape": escape,
            "reducing": is_reducing,
        })
    return {
        "samples": samples,
        "nontrivial_reducing_found": reducing_found,
        "passed": not reducing_found,
    }
