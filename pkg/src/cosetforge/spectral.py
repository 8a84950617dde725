"""Algebra (spectral) norm of functions on finite groups.

The norm of ``f`` is the trace norm of ``g -> f * g`` acting on ``L_2(G)``.
In the point-mass basis that operator has matrix ``M[x, z] = f(x z^-1) / n``.
Rescaling the inner product to ``L_2(m_G)`` multiplies every basis vector
by the same constant, so the singular values do not depend on that choice.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import AdditivityViolation, NotExplicitlyAbelian, NumericalFailure
from .functions import FLOAT, GroupFunction, project_to_subgroup
from .groups import FiniteGroup, Subgroup

ADDITIVITY_TOL = 1e-7
DROP_RTOL = 1e-12


@dataclass(frozen=True, eq=False)
class ConvOperator:
    group: FiniteGroup = field(repr=False)
    matrix: np.ndarray
    source: GroupFunction = field(repr=False)

    def apply(self, g: GroupFunction) -> GroupFunction:
        return GroupFunction(self.group, self.matrix @ g.as_complex(), FLOAT)


def conv_operator(f: GroupFunction) -> ConvOperator:
    G = f.group
    return ConvOperator(G, f.as_complex()[G.div_table] / G.order, f)


def singular_values(f: GroupFunction) -> np.ndarray:
    M = conv_operator(f).matrix
    try:
        return np.linalg.svd(M, compute_uv=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"SVD did not converge: {exc}",
                               max_abs_entry=float(np.abs(M).max()),
                               finite=bool(np.isfinite(M).all()))


def algebra_norm(f: GroupFunction) -> float:
    """``||f||_{A(G)}``: sum of the singular values of ``g -> f * g``."""
    return float(singular_values(f).sum())


def linf_norm(f: GroupFunction) -> float:
    return float(np.abs(f.as_complex()).max())


def character(G: FiniteGroup, freq) -> GroupFunction:
    """The character ``x -> exp(2 pi i sum_j freq_j x_j / m_j)`` of a product of cyclic groups."""
    if G.factors is None:
        raise NotExplicitlyAbelian(f"{G.name} was not built from cyclic factors")
    coords = np.indices(G.factors).reshape(len(G.factors), -1)
    phase = sum(f * c / m for f, c, m in zip(freq, coords, G.factors))
    return GroupFunction(G, np.exp(2j * np.pi * phase), FLOAT)


def fourier_coefficients(f: GroupFunction) -> np.ndarray:
    """``f^(gamma) = E_x f(x) conj(gamma(x))`` indexed like :func:`character` frequencies."""
    G = f.group
    if G.factors is None:
        raise NotExplicitlyAbelian(f"{G.name} was not built from cyclic factors; "
                                   "the Fourier oracle needs explicit characters")
    return np.fft.fftn(f.as_complex().reshape(G.factors)) / G.order


def fourier_l1_abelian(f: GroupFunction) -> float:
    """``sum_gamma |f^(gamma)|`` over the dual group."""
    return float(np.abs(fourier_coefficients(f)).sum())


def fourier_l1_array(values, factors: tuple[int, ...]) -> float:
    """The same oracle on a raw mixed-radix value array, without building a Cayley table."""
    arr = np.asarray(values, dtype=np.complex128).reshape(factors)
    return float(np.abs(np.fft.fftn(arr)).sum() / arr.size)


@dataclass(frozen=True)
class SplitResult:
    projection: GroupFunction = field(repr=False)      # f * m_H
    remainder: GroupFunction = field(repr=False)       # f - f * m_H
    norm: float
    projection_norm: float
    remainder_norm: float

    @property
    def additivity_error(self) -> float:
        return abs(self.norm - self.projection_norm - self.remainder_norm)


def split(f: GroupFunction, H: Subgroup, tol: float = ADDITIVITY_TOL,
          certify: bool = True) -> SplitResult:
    """Split ``f`` into ``f * m_H`` and ``f - f * m_H`` and certify that their norms add up.

    Additivity is exact when ``H`` is normal.  For a non-normal ``H`` in a
    non-abelian group only ``||f|| <= ||f - f*m_H|| + ||f*m_H||`` is
    guaranteed, so the certificate usually fails there; pass
    ``certify=False`` to get the parts and norms without the check.
    """
    proj = project_to_subgroup(f, H)
    rest = f - proj
    res = SplitResult(proj, rest, algebra_norm(f), algebra_norm(proj), algebra_norm(rest))
    if certify and res.additivity_error > tol * max(1.0, res.norm):
        raise AdditivityViolation(
            f"||f|| = {res.norm} but parts sum to {res.projection_norm + res.remainder_norm}",
            error=res.additivity_error, subgroup=list(H.elements),
            normal=H.is_normal)
    return res


@dataclass(frozen=True, eq=False)
class BGFactorization:
    """``f = M' E_omega[ h_omega~ * g_omega ]`` with unit ``L_2(m_G)`` factors.

    ``h`` and ``g`` are stacked as rows (``h[omega]`` is ``h_omega``); the
    representation form uses ``pi = rho`` on ``L_2(m_G)^Omega`` with
    ``v = (sqrt(lambda_omega) g_omega)`` and ``w = (sqrt(lambda_omega) h_omega)``.
    """

    group: FiniteGroup = field(repr=False)
    constant: float
    weights: np.ndarray
    h: np.ndarray
    g: np.ndarray
    singular_values: np.ndarray

    @property
    def size(self) -> int:
        return len(self.weights)

    def reconstruct(self) -> np.ndarray:
        G = self.group
        n = G.order
        # mean convolution (h~ * g)(x) = E_y h~(x y^-1) g(y), one row per omega
        h_tilde = np.conj(self.h[:, G.inverses])
        conv = np.einsum("wxy,wy->wx", h_tilde[:, G.div_table], self.g) / n
        return self.constant * (self.weights @ conv)

    # -- representation form ---------------------------------------------
    @property
    def dimension(self) -> int:
        return self.size * self.group.order

    def _coords(self, stacked: np.ndarray) -> np.ndarray:
        # orthonormal coordinates of L_2(m_G): divide by sqrt(n)
        scale = np.sqrt(self.singular_values)[:, None] / np.sqrt(self.group.order)
        return (scale * stacked).reshape(-1)

    @property
    def v(self) -> np.ndarray:
        return self._coords(self.g)

    @property
    def w(self) -> np.ndarray:
        return self._coords(self.h)

    def representation(self, x: int) -> np.ndarray:
        """Matrix of ``pi(x)``: the right regular action repeated on each summand."""
        G = self.group
        n = G.order
        perm = np.zeros((n, n))
        perm[np.arange(n), G.table[:, x]] = 1.0          # (rho_x u)(t) = u(t x)
        return np.kron(np.eye(self.size), perm)

    def matrix_coefficient(self, x: int) -> complex:
        """``<pi(x) v, w>`` evaluated without forming ``pi(x)``."""
        G = self.group
        gv = self.v.reshape(self.size, G.order)[:, G.table[:, x]]
        return complex(np.vdot(self.w, gv.reshape(-1)))


def bg_factorize(f: GroupFunction, drop_rtol: float = DROP_RTOL) -> BGFactorization:
    """Factor ``f`` through the singular value decomposition of its convolution operator.

    With ``f * v_omega = lambda_omega w_omega`` (orthonormal in ``L_2(m_G)``),
    ``h_omega = w_omega~`` and ``g_omega(t) = <rho_t(u), v_omega>`` where
    ``u = n 1_{e}``; the latter simplifies to ``v_omega~``.
    """
    G = f.group
    n = G.order
    M = conv_operator(f).matrix
    try:
        U, s, Vh = np.linalg.svd(M)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"SVD did not converge: {exc}")
    if s.size == 0 or s[0] == 0:
        raise NumericalFailure("f is identically zero; no factorisation exists")
    keep = s >= drop_rtol * s[0]
    s = s[keep]
    W = np.sqrt(n) * U[:, keep].T                 # rows w_omega
    V = np.sqrt(n) * np.conj(Vh[keep, :])         # rows v_omega
    h = np.conj(W[:, G.inverses])                 # h = w~
    g = np.conj(V[:, G.inverses])                 # g = v~
    norm = float(s.sum())
    return BGFactorization(G, norm, s / norm, h, g, s)


