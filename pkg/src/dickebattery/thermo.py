"""Partial traces, mean energies, passive states and ergotropy."""
from __future__ import annotations

import numpy as np

from .operators import DimensionError, HilbertSpace, Operator

HERMITIAN_ATOL = 1e-10
TRACE_ATOL = 1e-8
NEGATIVITY_ATOL = 1e-8


class NumericalConsistencyError(ArithmeticError):
    """A quantity that must be real, positive or normalised is not."""


class DensityMatrix(Operator):
    """Operator that additionally carries density-matrix invariants.

    Construction does not validate; call :meth:`check` (thermo entry points
    do so on their inputs).
    """

    __slots__ = ()

    def check(self, herm_atol=HERMITIAN_ATOL, trace_atol=TRACE_ATOL, neg_atol=NEGATIVITY_ATOL):
        check_density_matrix(self.data, herm_atol, trace_atol, neg_atol)
        return self

    def purity(self) -> float:
        return purity(self.data)


def check_density_matrix(rho, herm_atol=HERMITIAN_ATOL, trace_atol=TRACE_ATOL,
                         neg_atol=NEGATIVITY_ATOL):
    rho = np.asarray(rho)
    herm = np.max(np.abs(rho - rho.conj().T), initial=0.0)
    if herm > herm_atol:
        raise NumericalConsistencyError(f"state is not Hermitian (max deviation {herm:.3e})")
    tr = np.trace(rho)
    if abs(tr - 1) > trace_atol:
        raise NumericalConsistencyError(f"state trace is {tr.real:.12g}, expected 1")
    lo = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))[0]
    if lo < -neg_atol:
        raise NumericalConsistencyError(f"state has negative eigenvalue {lo:.3e}")


def _data(x) -> np.ndarray:
    return x.data if isinstance(x, Operator) else np.asarray(x, dtype=complex)


def _match(rho, H):
    r, h = _data(rho), _data(H)
    if r.shape != h.shape:
        raise DimensionError(f"state shape {r.shape} does not match Hamiltonian {h.shape}")
    if isinstance(rho, Operator) and isinstance(H, Operator) and rho.space != H.space:
        raise DimensionError(f"space mismatch: {rho.dims} vs {H.dims}")
    return r, h


def partial_trace(rho, keep: int, dims=None) -> DensityMatrix:
    """Reduced state of factor ``keep`` of a two-factor state.

    ``dims`` is taken from ``rho`` when it is an :class:`Operator`.
    """
    if dims is None:
        if not isinstance(rho, Operator):
            raise DimensionError("dims are required for a bare array")
        dims = rho.dims
    dims = tuple(dims)
    if len(dims) != 2:
        raise DimensionError(f"partial_trace supports two-factor spaces only, got {dims}")
    if keep not in (0, 1):
        raise DimensionError(f"keep must be 0 or 1, got {keep}")
    r = _data(rho).reshape(dims[0], dims[1], dims[0], dims[1])
    red = np.einsum("ajbj->ab", r) if keep == 0 else np.einsum("jajb->ab", r)
    return DensityMatrix(red, HilbertSpace((dims[keep],)))


def mean_energy(rho, H) -> float:
    r, h = _match(rho, H)
    e = np.einsum("ij,ji->", r, h)
    if abs(e.imag) > 1e-10:
        raise NumericalConsistencyError(f"energy has imaginary part {e.imag:.3e}")
    return float(e.real)


def _populations(r: np.ndarray):
    """Eigen-decomposition with benign negative noise clipped.

    Eigenvalues in ``[-1e-8, 0)`` are set to zero and the spectrum is
    renormalised; anything more negative is an error.
    """
    w, v = np.linalg.eigh(0.5 * (r + r.conj().T))
    if w[0] < -NEGATIVITY_ATOL:
        raise NumericalConsistencyError(f"state has negative eigenvalue {w[0]:.3e}")
    w = np.clip(w, 0.0, None)
    return w / w.sum(), v


def passive_state(rho, H) -> DensityMatrix:
    """Passive state of ``rho`` with respect to ``H``.

    The eigenvalues of ``rho`` in decreasing order are placed on the
    eigenvectors of ``H`` in increasing energy order. Ties in ``rho`` keep
    the solver order; energy is unaffected.
    """
    r, h = _match(rho, H)
    p, _ = _populations(r)
    _, u = np.linalg.eigh(h)
    p_desc = p[::-1]  # eigh returns ascending
    data = (u * p_desc) @ u.conj().T
    space = rho.space if isinstance(rho, Operator) else None
    return DensityMatrix(data, space)


def passive_energy(rho, H) -> float:
    r, h = _match(rho, H)
    p, _ = _populations(r)
    e = np.linalg.eigvalsh(h)
    return float(np.dot(p[::-1], e))


def ergotropy(rho, H) -> float:
    """Maximal unitarily extractable energy, ``Tr(rho H) - Tr(rho_p H)``.

    Both energies use the clipped spectrum, so benign negative noise in
    ``rho`` cannot produce a spurious negative result.
    """
    r, h = _match(rho, H)
    active = mean_energy(r, h)
    lam = np.linalg.eigvalsh(0.5 * (r + r.conj().T))
    if lam[0] < 0:
        # clipping changes the state; take both energies from the clipped one
        p, v = _populations(r)
        active = float(np.real(np.einsum("k,ik,ij,jk->", p, v.conj(), h, v)))
    else:
        p = lam / lam.sum()
    w = active - float(np.dot(p[::-1], np.linalg.eigvalsh(h)))
    if w < -1e-10:
        raise NumericalConsistencyError(f"negative ergotropy {w:.3e}")
    return max(w, 0.0)


def gibbs_state(H, beta: float) -> DensityMatrix:
    h = _data(H)
    e, u = np.linalg.eigh(h)
    p = np.exp(-beta * (e - e[0]))
    p /= p.sum()
    space = H.space if isinstance(H, Operator) else None
    return DensityMatrix((u * p) @ u.conj().T, space)


def trace_distance(rho, sigma) -> float:
    d = _data(rho) - _data(sigma)
    return float(0.5 * np.sum(np.abs(np.linalg.eigvalsh(0.5 * (d + d.conj().T)))))


def purity(rho) -> float:
    r = _data(rho)
    return float(np.real(np.vdot(r.conj().T, r)))
