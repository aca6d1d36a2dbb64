"""Truncated Hardy-space linear algebra.

Functions on the truncated space work with plain complex ``numpy`` arrays
wrapped in three small value types:

* :class:`TruncatedVector` holds the monomial coefficients of a function up
  to a working order, together with a trusted order marking the prefix that
  is exact for the modeled infinite object.
* :class:`OperatorMatrix` holds a dense matrix in a declared orthonormal
  basis (column ``m`` is the image of the ``m``-th basis vector).
* :class:`Subspace` holds an orthonormal basis of a finite-dimensional
  approximation of a closed subspace.

All types are immutable after construction and all operations are pure
functions, so everything here is safe to evaluate concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import (
    DimensionMismatchError,
    NotLeftInvertibleError,
    TruncationError,
)

__all__ = [
    "ToleranceConfig",
    "DEFAULT_TOL",
    "TruncatedVector",
    "OperatorMatrix",
    "Subspace",
    "as_matrix",
    "band_spread",
    "inner_product",
    "invariance_residual",
    "krylov_closure",
    "left_inverse",
    "mul_by_z",
    "multiplication_by_z_matrix",
    "numerical_rank",
    "orthonormalize",
    "poly_apply",
    "principal_angles",
    "rank_report",
    "subspace_difference",
    "subspaces_equal",
]


@dataclass(frozen=True)
class ToleranceConfig:
    """Numerical thresholds shared by every rank/residual decision.

    Attributes
    ----------
    tau_rank : float
        Relative singular-value cutoff for rank decisions.
    tau_orth : float
        Allowed deviation of an orthonormal basis from ``B*B = I``.
    tau_res : float
        Residual threshold for membership and invariance tests.
    tau_angle : float
        Principal-angle threshold for subspace equality.
    """

    tau_rank: float = 1e-8
    tau_orth: float = 1e-10
    tau_res: float = 1e-8
    tau_angle: float = 1e-6

    def __post_init__(self):
        for name in ("tau_rank", "tau_orth", "tau_res", "tau_angle"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"{name} must be strictly positive")
        if self.tau_rank >= 1.0:
            raise ValueError("tau_rank must be < 1")

    def to_dict(self) -> dict:
        return {
            "tau_rank": self.tau_rank,
            "tau_orth": self.tau_orth,
            "tau_res": self.tau_res,
            "tau_angle": self.tau_angle,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ToleranceConfig":
        known = {k: float(v) for k, v in d.items()}
        return cls(**known)


DEFAULT_TOL = ToleranceConfig()


def _frozen_array(a) -> np.ndarray:
    arr = np.array(a, dtype=np.complex128, copy=True, order="C")
    if not np.isfinite(arr).all():
        raise ValueError("entries must be finite")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class TruncatedVector:
    """A Hardy-space element as monomial coefficients up to a working order.

    ``coeffs[j]`` is the coefficient of ``z**j``.  Indices below
    ``trusted_order`` are exact for the modeled infinite object; indices at
    or above it may carry truncation error.
    """

    coeffs: np.ndarray
    trusted_order: int

    def __post_init__(self):
        arr = _frozen_array(self.coeffs)
        if arr.ndim != 1:
            raise DimensionMismatchError("coefficients must form a 1-d array")
        object.__setattr__(self, "coeffs", arr)
        if not 0 <= self.trusted_order <= arr.shape[0]:
            raise ValueError("trusted_order must lie in [0, working_order]")

    @property
    def working_order(self) -> int:
        return self.coeffs.shape[0]

    def norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))

    def valuation(self, cutoff: float = 0.0) -> int:
        """Index of the first coefficient with magnitude above ``cutoff``.

        Returns ``working_order`` for the (numerically) zero vector.
        """
        idx = np.flatnonzero(np.abs(self.coeffs) > cutoff)
        return int(idx[0]) if idx.size else self.working_order

    @classmethod
    def from_coefficients(
        cls,
        coeffs: Sequence[complex],
        working_order: int,
        trusted_order: int | None = None,
    ) -> "TruncatedVector":
        """Build a vector from a (possibly shorter) coefficient sequence.

        The sequence is zero-padded to ``working_order``; anything beyond is
        an error.  ``trusted_order`` defaults to the full working order,
        which is the right marker for exactly known (e.g. polynomial) data.
        """
        c = np.asarray(coeffs, dtype=np.complex128)
        if c.shape[0] > working_order:
            raise DimensionMismatchError(
                f"{c.shape[0]} coefficients exceed working order {working_order}"
            )
        full = np.zeros(working_order, dtype=np.complex128)
        full[: c.shape[0]] = c
        t = working_order if trusted_order is None else trusted_order
        return cls(full, t)

    @classmethod
    def monomial(cls, k: int, working_order: int) -> "TruncatedVector":
        if not 0 <= k < working_order:
            raise DimensionMismatchError("monomial degree outside working order")
        c = np.zeros(working_order, dtype=np.complex128)
        c[k] = 1.0
        return cls(c, working_order)

    @classmethod
    def zero(cls, working_order: int) -> "TruncatedVector":
        return cls(np.zeros(working_order, dtype=np.complex128), working_order)


def band_spread(a: np.ndarray, rel_tol: float = 1e-12) -> tuple[int, int]:
    """Index spread of a matrix band around the diagonal.

    Returns ``(below, above)`` where ``below`` is the largest ``i - j`` and
    ``above`` the largest ``j - i`` over entries with magnitude exceeding
    ``rel_tol`` times the largest magnitude.  ``below`` measures how far an
    operator raises degree; ``above`` how far it lowers it.  Both are 0 for
    the zero matrix.
    """
    a = np.asarray(a)
    mags = np.abs(a)
    top = mags.max() if mags.size else 0.0
    if top == 0.0:
        return 0, 0
    rows, cols = np.nonzero(mags > rel_tol * top)
    if rows.size == 0:
        return 0, 0
    below = int(max(0, (rows - cols).max()))
    above = int(max(0, (cols - rows).max()))
    return below, above


@dataclass(frozen=True)
class OperatorMatrix:
    """Dense matrix of an operator in a declared orthonormal basis.

    Column ``m`` holds the image of the ``m``-th basis vector.  The basis is
    either the monomial basis of the truncated Hardy space or the ``f``-basis
    of a truncated tridiagonal kernel space.  ``finite_support`` optionally
    declares ``(background, rows, cols)`` outside which the entries agree
    with the named background pattern ("zero" or the plain forward "shift").
    """

    entries: np.ndarray
    basis_tag: str = "monomial"
    finite_support: tuple[str, int, int] | None = None

    def __post_init__(self):
        arr = _frozen_array(self.entries)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise DimensionMismatchError("operator matrix must be square")
        object.__setattr__(self, "entries", arr)
        if self.basis_tag not in ("monomial", "f-basis"):
            raise ValueError("basis_tag must be 'monomial' or 'f-basis'")

    @property
    def working_order(self) -> int:
        return self.entries.shape[0]

    def spread(self) -> tuple[int, int]:
        return band_spread(self.entries)

    def apply(self, f: TruncatedVector) -> TruncatedVector:
        """Apply the operator to a vector.

        The trusted order of the result shrinks by the band spread of the
        matrix (maximum of the degree-raising and degree-lowering reach),
        floored at zero.  The map is linear in ``f``.
        """
        if f.working_order != self.working_order:
            raise DimensionMismatchError("operator and vector working orders differ")
        below, above = self.spread()
        loss = max(below, above)
        trusted = max(0, f.trusted_order - loss)
        return TruncatedVector(self.entries @ f.coeffs, trusted)

    def check_finite_support(self, rel_tol: float = 1e-13) -> bool:
        """Scan whether entries outside the declared support match the background."""
        if self.finite_support is None:
            return True
        background, rows, cols = self.finite_support
        n = self.working_order
        ref = np.zeros((n, n), dtype=np.complex128)
        if background == "shift":
            ref += multiplication_by_z_matrix(n)
        diff = np.abs(self.entries - ref)
        scale = max(1.0, float(np.abs(self.entries).max()))
        mask = np.ones((n, n), dtype=bool)
        mask[:rows, :cols] = False
        return bool((diff[mask] <= rel_tol * scale).all())


def multiplication_by_z_matrix(working_order: int) -> np.ndarray:
    """Matrix of multiplication by ``z`` in the monomial basis (top row lost)."""
    m = np.zeros((working_order, working_order), dtype=np.complex128)
    idx = np.arange(working_order - 1)
    m[idx + 1, idx] = 1.0
    return m


def as_matrix(op) -> np.ndarray:
    """Coerce an OperatorMatrix, an n-shift, or a raw array to its ndarray."""
    if isinstance(op, OperatorMatrix):
        return op.entries
    inner = getattr(op, "S", None)
    if isinstance(inner, OperatorMatrix):
        return inner.entries
    return np.asarray(op, dtype=np.complex128)


@dataclass(frozen=True)
class Subspace:
    """Orthonormal basis of a (truncated) closed subspace.

    ``frontier`` records the largest valuation reached by the generators the
    subspace was built from.  Rows beyond the frontier are generator-depth
    artifacts; residual checks restrict to rows below it.  ``None`` means the
    subspace is not generator-truncated.

    ``invariant_certified`` marks subspaces whose invariance under the
    operator they were built from holds by construction (a cyclic closure
    maps each generator to the next one).  Such spaces skip norm-based
    invariance preconditions, which a depth-truncated generator set cannot
    meet near its frontier.
    """

    basis: np.ndarray
    trusted_order: int
    frontier: int | None = None
    invariant_certified: bool = False

    def __post_init__(self):
        arr = _frozen_array(self.basis)
        if arr.ndim != 2:
            raise DimensionMismatchError("basis must be a 2-d array")
        object.__setattr__(self, "basis", arr)
        if not 0 <= self.trusted_order <= arr.shape[0]:
            raise ValueError("trusted_order must lie in [0, working_order]")
        if arr.shape[1] > arr.shape[0]:
            raise DimensionMismatchError("subspace dimension exceeds working order")
        if arr.shape[1]:
            gram = arr.conj().T @ arr
            if np.abs(gram - np.eye(arr.shape[1])).max() > 1e-7:
                raise ValueError("basis columns are not orthonormal")

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    @property
    def working_order(self) -> int:
        return self.basis.shape[0]

    @classmethod
    def full(cls, working_order: int) -> "Subspace":
        return cls(np.eye(working_order, dtype=np.complex128), working_order)

    def vector(self, i: int = 0) -> TruncatedVector:
        return TruncatedVector(self.basis[:, i], self.trusted_order)


def inner_product(f: TruncatedVector, g: TruncatedVector) -> complex:
    """Hardy-space pairing ``<f, g> = sum_j f_j * conj(g_j)``."""
    if f.working_order != g.working_order:
        raise DimensionMismatchError("working orders differ")
    return complex(np.vdot(g.coeffs, f.coeffs))


def mul_by_z(f: TruncatedVector, k: int = 1) -> TruncatedVector:
    """Multiply by ``z**k``: shift coefficients up, dropping overflow.

    By the truncation contract the trusted order is reduced by ``k``
    (floored at 0); the working order is preserved.
    """
    if k < 0:
        raise ValueError("k must be nonnegative")
    n = f.working_order
    out = np.zeros(n, dtype=np.complex128)
    if k < n:
        out[k:] = f.coeffs[: n - k]
    return TruncatedVector(out, max(0, f.trusted_order - k))


def poly_apply(p: Sequence[complex], T, f: TruncatedVector) -> TruncatedVector:
    """Evaluate ``p(T) f`` for a polynomial ``p`` given by its coefficients.

    The trusted order of the result drops by ``deg(p)`` times the band
    spread of ``T``; exhausting the trusted region raises
    :class:`TruncationError`.
    """
    coeffs = np.asarray(getattr(p, "coeffs", p), dtype=np.complex128)
    if coeffs.ndim != 1 or coeffs.size == 0:
        raise ValueError("polynomial coefficients must form a nonempty sequence")
    mat = as_matrix(T)
    if mat.shape[0] != f.working_order:
        raise DimensionMismatchError("operator and vector working orders differ")
    deg = int(np.flatnonzero(coeffs)[-1]) if np.any(coeffs) else 0
    below, above = band_spread(mat)
    loss = deg * max(below, above)
    if f.trusted_order - loss <= 0 and deg > 0:
        raise TruncationError(
            f"polynomial degree {deg} exhausts trusted order {f.trusted_order}"
        )
    acc = coeffs[0] * f.coeffs
    power = f.coeffs
    for k in range(1, deg + 1):
        power = mat @ power
        if coeffs[k] != 0:
            acc = acc + coeffs[k] * power
    return TruncatedVector(acc, max(0, f.trusted_order - loss))


def _stack(vectors) -> tuple[np.ndarray, int]:
    """Stack vectors (TruncatedVector or arrays) into columns, tracking trust."""
    cols = []
    trusted = None
    for v in vectors:
        if isinstance(v, TruncatedVector):
            cols.append(v.coeffs)
            trusted = v.trusted_order if trusted is None else min(trusted, v.trusted_order)
        else:
            arr = np.asarray(v, dtype=np.complex128)
            cols.append(arr)
            trusted = arr.shape[0] if trusted is None else min(trusted, arr.shape[0])
    a = np.column_stack(cols)
    return a, int(trusted)


def orthonormalize(
    vectors,
    tol: ToleranceConfig | None = None,
    trusted_order: int | None = None,
    frontier: int | None = None,
    invariant_certified: bool = False,
) -> Subspace:
    """Orthonormal basis of the numerical span of the given vectors.

    Directions whose singular value falls below ``tau_rank`` times the
    largest are discarded, so the output dimension equals the numerical
    rank of the input.  An all-zero input yields the legal empty subspace
    (dimension 0), never an error.
    """
    tol = tol or DEFAULT_TOL
    if isinstance(vectors, np.ndarray):
        a = np.asarray(vectors, dtype=np.complex128)
        if a.ndim == 1:
            a = a[:, None]
        inferred = a.shape[0]
    else:
        vectors = list(vectors)
        if not vectors:
            raise ValueError("need at least one vector")
        a, inferred = _stack(vectors)
    trusted = inferred if trusted_order is None else trusted_order
    u, s, _ = np.linalg.svd(a, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        basis = np.zeros((a.shape[0], 0), dtype=np.complex128)
        return Subspace(basis, trusted, frontier, invariant_certified)
    r = int(np.count_nonzero(s > tol.tau_rank * s[0]))
    return Subspace(u[:, :r], trusted, frontier, invariant_certified)


def numerical_rank(a, tol: ToleranceConfig | None = None) -> int:
    """Count of singular values above ``tau_rank`` times the largest."""
    tol = tol or DEFAULT_TOL
    if isinstance(a, Subspace):
        mat = a.basis
    else:
        mat = as_matrix(a)
    if mat.size == 0:
        return 0
    s = np.linalg.svd(mat, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.count_nonzero(s > tol.tau_rank * s[0]))


def rank_report(a, tol: ToleranceConfig | None = None) -> dict:
    """Rank plus diagnostics about the singular-value gap at the cutoff.

    Ties near the cutoff are never silently rounded; the report carries the
    singular values bracketing the cutoff and their ratio.
    """
    tol = tol or DEFAULT_TOL
    mat = a.basis if isinstance(a, Subspace) else as_matrix(a)
    s = np.linalg.svd(mat, compute_uv=False) if mat.size else np.zeros(0)
    if s.size == 0 or s[0] == 0.0:
        return {"rank": 0, "sigma_max": 0.0, "sigma_at_cut": None,
                "sigma_below_cut": None, "gap_ratio": None}
    cut = tol.tau_rank * s[0]
    rank = int(np.count_nonzero(s > cut))
    above = float(s[rank - 1]) if rank > 0 else None
    below = float(s[rank]) if rank < s.size else None
    gap = (above / below) if (above and below) else None
    return {"rank": rank, "sigma_max": float(s[0]), "sigma_at_cut": above,
            "sigma_below_cut": below, "gap_ratio": gap}


def subspace_difference(M: Subspace, T, tol: ToleranceConfig | None = None) -> Subspace:
    """Orthonormal basis of ``M`` minus ``T M`` (the wandering directions).

    The columns of ``T M`` are projected back into ``M``, orthonormalized
    there, and complemented within ``M``, so the result always lies inside
    ``M`` and is orthogonal to the projected image.
    """
    tol = tol or DEFAULT_TOL
    if M.dim == 0:
        raise ValueError("subspace must be nonzero")
    mat = as_matrix(T)
    if mat.shape[0] != M.working_order:
        raise DimensionMismatchError("operator and subspace working orders differ")
    if M.trusted_order <= 0:
        raise TruncationError("trusted order exhausted")
    coords = M.basis.conj().T @ (mat @ M.basis)
    u, s, _ = np.linalg.svd(coords)
    if s.size and s[0] > 0.0:
        r = int(np.count_nonzero(s > tol.tau_rank * s[0]))
    else:
        r = 0
    comp = u[:, r:]
    below, above = band_spread(mat)
    trusted = max(0, M.trusted_order - above)
    return Subspace(M.basis @ comp, trusted, M.frontier)


def krylov_closure(
    T,
    f: TruncatedVector,
    depth: int,
    tol: ToleranceConfig | None = None,
) -> Subspace:
    """Orthonormalize ``{f, Tf, ..., T^depth f}``.

    Approximates the cyclic subspace generated by ``f`` on the trusted
    block.  Requires ``depth * band_spread(T) < trusted_order`` so that the
    iterates stay inside the representable range.
    """
    tol = tol or DEFAULT_TOL
    mat = as_matrix(T)
    if mat.shape[0] != f.working_order:
        raise DimensionMismatchError("operator and vector working orders differ")
    if depth < 0:
        raise ValueError("depth must be nonnegative")
    below, above = band_spread(mat)
    if depth * max(below, above) >= max(1, f.trusted_order):
        raise TruncationError(
            f"depth {depth} times band spread {max(below, above)} exceeds "
            f"trusted order {f.trusted_order}"
        )
    iterates = np.empty((f.working_order, depth + 1), dtype=np.complex128)
    vec = f.coeffs.copy()
    iterates[:, 0] = vec
    for k in range(1, depth + 1):
        vec = mat @ vec
        iterates[:, k] = vec
    # Strictly banded-below operators keep every stored row exact, so the
    # trusted order only shrinks by the upward reach of the band.
    trusted = max(0, f.trusted_order - depth * above)
    frontier = min(f.working_order, f.valuation(1e-14 * max(1.0, f.norm())) + depth)
    # Invariance holds by construction: T maps each iterate to the next.
    return orthonormalize(
        iterates, tol, trusted_order=trusted, frontier=frontier,
        invariant_certified=True,
    )


def principal_angles(M1: Subspace, M2: Subspace, rows: int | None = None) -> np.ndarray:
    """Principal angles between two subspaces, in radians, ascending.

    The singular values of ``B1* B2`` are clamped to ``[0, 1]`` and turned
    into angles.  Comparison is restricted to rows below the common trusted
    order (or an explicit ``rows``); bases restricted that way are
    re-orthonormalized before the angles are taken.
    """
    if M1.working_order != M2.working_order:
        raise DimensionMismatchError("working orders differ")
    r = min(M1.trusted_order, M2.trusted_order) if rows is None else rows
    a, b = M1.basis, M2.basis
    if r < M1.working_order:
        a = _reorthonormalize(a[:r, :])
        b = _reorthonormalize(b[:r, :])
    if a.shape[1] == 0 or b.shape[1] == 0:
        return np.zeros(0)
    s = np.linalg.svd(a.conj().T @ b, compute_uv=False)
    s = np.clip(s, 0.0, 1.0)
    return np.sort(np.arccos(s))


def _reorthonormalize(a: np.ndarray, rel_cut: float = 1e-10) -> np.ndarray:
    if a.shape[1] == 0:
        return a
    u, s, _ = np.linalg.svd(a, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return a[:, :0]
    r = int(np.count_nonzero(s > rel_cut * s[0]))
    return u[:, :r]


def subspaces_equal(
    M1: Subspace,
    M2: Subspace,
    tol: ToleranceConfig | None = None,
    rows: int | None = None,
) -> bool:
    """Equality at truncation: equal dimensions and all angles below tau_angle."""
    tol = tol or DEFAULT_TOL
    if M1.dim != M2.dim:
        return False
    angles = principal_angles(M1, M2, rows=rows)
    return bool(angles.size == min(M1.dim, M2.dim)) and bool(
        (angles < tol.tau_angle).all()
    )


def invariance_residual(M: Subspace, T, rows: int | None = None) -> float:
    """Spectral norm of ``(I - P_M) T P_M`` restricted to rows below ``rows``.

    ``rows`` defaults to the subspace frontier (generator-truncated spaces)
    or its trusted order.  Content the operator pushes past the frontier is
    a depth artifact of the truncation, not an invariance defect, and is
    excluded by the row restriction.
    """
    mat = as_matrix(T)
    if rows is None:
        rows = M.frontier if M.frontier is not None else M.trusted_order
    image = mat @ M.basis
    resid = image - M.basis @ (M.basis.conj().T @ image)
    resid = resid[:rows, :]
    if resid.size == 0:
        return 0.0
    return float(np.linalg.norm(resid, 2))


def left_inverse(S, tol: ToleranceConfig | None = None) -> OperatorMatrix:
    """Left inverse ``(S*S)^{-1} S*`` of a left-invertible banded operator.

    ``S*S`` must equal the identity outside a finite top-left block; the
    block is detected by scanning away from the truncation boundary and
    inverted exactly, which avoids the spurious singularity the truncated
    Gram matrix has in its bottom-right corner.
    """
    tol = tol or DEFAULT_TOL
    mat = as_matrix(S)
    n = mat.shape[0]
    below, above = band_spread(mat)
    safe = n - below - 1
    if safe <= 0:
        raise TruncationError("working order too small for band spread")
    gram = mat.conj().T @ mat
    dev = np.abs(gram[:safe, :safe] - np.eye(safe))
    hits = np.nonzero(dev > 1e-13 * max(1.0, float(np.abs(gram).max())))
    block = int(max(hits[0].max(), hits[1].max())) + 1 if hits[0].size else 0
    if block + below > n:
        raise TruncationError("perturbation block reaches the truncation boundary")
    if block == 0:
        return OperatorMatrix(mat.conj().T)
    g = gram[:block, :block]
    eigvals = np.linalg.eigvalsh((g + g.conj().T) / 2.0)
    if eigvals[0] <= 1e-12 * max(1.0, eigvals[-1]):
        raise NotLeftInvertibleError(
            f"Gram block of size {block} is not positive definite "
            f"(min eigenvalue {eigvals[0]:.3e})"
        )
    inv = np.eye(n, dtype=np.complex128)
    inv[:block, :block] = np.linalg.inv(g)
    return OperatorMatrix(inv @ mat.conj().T)
