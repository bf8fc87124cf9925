"""Biorthogonal eigensystems of complex 2x2 matrices.

A non-Hermitian matrix H has distinct right and left eigenvectors,

    H r_n = E_n r_n,        H^dag l_n = conj(E_n) l_n,

which can be normalized pairwise, <l_n|r_m> = delta_nm.  The closure
sum_n |r_n><l_n| = 1 then resolves the identity and H = sum_n E_n |r_n><l_n|.
Everything here is closed form: eigenvalues from the quadratic characteristic
polynomial, eigenvectors from the adjugate rows, no iterative solver.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateSpectrum

__all__ = ["BiorthoBasis", "eigensystem_2x2", "reconstruct", "closure_defect"]


@dataclass(frozen=True)
class BiorthoBasis:
    """Eigenvalues with paired right and left eigenvectors of a 2x2 matrix.

    Attributes
    ----------
    values : ndarray, shape (2,)
        Eigenvalues.
    right : ndarray, shape (2, 2)
        ``right[n]`` is the right eigenvector for ``values[n]``, unit
        Euclidean norm, largest-magnitude component real-positive.
    left : ndarray, shape (2, 2)
        ``left[n]`` is the corresponding left eigenvector, stored as a ket
        of the adjoint matrix and scaled so that ``vdot(left[n], right[m])``
        equals ``delta_nm``.
    """

    values: np.ndarray
    right: np.ndarray
    left: np.ndarray

    def __post_init__(self):
        for name in ("values", "right", "left"):
            getattr(self, name).setflags(write=False)


def _fix_gauge(v):
    """Normalize and rotate the phase so the largest component is real-positive."""
    v = v / np.linalg.norm(v)
    k = int(np.argmax(np.abs(v)))
    v = v * (np.conj(v[k]) / np.abs(v[k]))
    return v


def _null_vector(m11, m12, m21, m22):
    """Best-conditioned null vector of the singular matrix [[m11, m12], [m21, m22]].

    Both rows of the adjugate span the null space; take the one with the
    larger norm so a structural zero in one row cannot wipe out the result.
    """
    va = np.array([-m12, m11])
    vb = np.array([-m22, m21])
    v = va if np.linalg.norm(va) >= np.linalg.norm(vb) else vb
    n = np.linalg.norm(v)
    if n == 0.0:
        raise DegenerateSpectrum("eigenvector undetermined (defective matrix)")
    return v


def eigensystem_2x2(h, tol: float = 1e-9) -> BiorthoBasis:
    """Closed-form biorthogonal eigendecomposition of a complex 2x2 matrix.

    Eigenvalues are the roots of the characteristic quadratic,

        E_pm = tr(H)/2 +- sqrt(((h11 - h22)/2)^2 + h12 h21),

    with the principal square root; ``values[0]`` carries the plus sign.
    Right vectors solve (H - E) r = 0, left vectors solve the adjoint
    problem (H^dag - conj(E)) l = 0, and the pair is rescaled to
    <l_n|r_m> = delta_nm.

    Parameters
    ----------
    h : array_like, shape (2, 2)
        Complex matrix to decompose.
    tol : float
        Degeneracy guard: requires |E_1 - E_2| > tol * max(1, ||H||_F).

    Raises
    ------
    DegenerateSpectrum
        If the eigenvalue splitting is below tolerance or the matrix is
        defective (left and right vectors self-orthogonal), as happens at
        an exceptional point.
    """
    h = np.asarray(h, dtype=complex)
    if h.shape != (2, 2):
        raise ValueError(f"expected a 2x2 matrix, got shape {h.shape}")
    if not np.all(np.isfinite(h)):
        raise ValueError("matrix has non-finite entries")

    half_tr = 0.5 * (h[0, 0] + h[1, 1])
    sq = np.sqrt((0.5 * (h[0, 0] - h[1, 1])) ** 2 + h[0, 1] * h[1, 0])
    values = np.array([half_tr + sq, half_tr - sq])

    scale = max(1.0, np.linalg.norm(h))
    if abs(values[0] - values[1]) <= tol * scale:
        raise DegenerateSpectrum(
            f"eigenvalue splitting {abs(values[0] - values[1]):.3e} below "
            f"tolerance {tol:.3e} * {scale:.3e}"
        )

    hd = h.conj().T
    right = np.empty((2, 2), dtype=complex)
    left = np.empty((2, 2), dtype=complex)
    for n, e in enumerate(values):
        r = _fix_gauge(_null_vector(h[0, 0] - e, h[0, 1], h[1, 0], h[1, 1] - e))
        ec = np.conj(e)
        l = _null_vector(hd[0, 0] - ec, hd[0, 1], hd[1, 0], hd[1, 1] - ec)
        ov = np.vdot(l, r)
        if abs(ov) <= tol * np.linalg.norm(l):
            raise DegenerateSpectrum("left/right pair nearly self-orthogonal")
        right[n] = r
        left[n] = l / np.conj(ov)
    return BiorthoBasis(values=values, right=right, left=left)


def reconstruct(basis: BiorthoBasis) -> np.ndarray:
    """Rebuild the matrix from its spectral data, sum_n E_n |r_n><l_n|."""
    return sum(
        basis.values[n] * np.outer(basis.right[n], basis.left[n].conj())
        for n in range(2)
    )


def closure_defect(basis: BiorthoBasis) -> float:
    """Frobenius norm of sum_n |r_n><l_n| - 1; zero for a true biorthogonal pair."""
    acc = sum(np.outer(basis.right[n], basis.left[n].conj()) for n in range(2))
    return float(np.linalg.norm(acc - np.eye(2)))
