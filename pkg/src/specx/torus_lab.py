"""Finite-group model of the crossed-product calculus on ``Z_M``.

On a cyclic group both the translations ``U_x`` and the modulations
``V_k`` are finite matrices, so averaging over characters, the twisted
Fourier transform and its inversion become exact finite sums.

Conventions: ``(U_x f)(y) = f(y + x)`` and ``(V_k f)(y) = e^{2 pi i k y / M} f(y)``,
so that ``U_x V_k = e^{2 pi i k x / M} V_k U_x``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .eig import operator_norm


@dataclass(frozen=True)
class CyclicGroupOperator:
    """Dense complex matrix acting on functions on ``Z_M``."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {m.shape}")
        object.__setattr__(self, "matrix", m)

    @property
    def M(self) -> int:
        return self.matrix.shape[0]

    @property
    def hermitian(self) -> bool:
        return bool(np.allclose(self.matrix, self.matrix.conj().T, rtol=0, atol=1e-14))

    def __matmul__(self, other: "CyclicGroupOperator") -> "CyclicGroupOperator":
        return CyclicGroupOperator(self.matrix @ _mat(other))

    def __add__(self, other):
        return CyclicGroupOperator(self.matrix + _mat(other))

    def __sub__(self, other):
        return CyclicGroupOperator(self.matrix - _mat(other))

    def adjoint(self) -> "CyclicGroupOperator":
        return CyclicGroupOperator(self.matrix.conj().T)

    def norm(self) -> float:
        return operator_norm(self.matrix)


def _mat(t) -> np.ndarray:
    return t.matrix if isinstance(t, CyclicGroupOperator) else np.asarray(t, dtype=complex)


def _op(t) -> CyclicGroupOperator:
    return t if isinstance(t, CyclicGroupOperator) else CyclicGroupOperator(t)


# ---------------------------------------------------------------------------
# Weyl pair

def shift(M: int, x: int) -> CyclicGroupOperator:
    """``U_x``: the permutation matrix with ``(U_x)[y, y + x] = 1``."""
    y = np.arange(M)
    m = np.zeros((M, M), dtype=complex)
    m[y, (y + x) % M] = 1.0
    return CyclicGroupOperator(m)


def _root(M: int, n) -> np.ndarray:
    """``e^{2 pi i n / M}`` with ``n`` reduced mod ``M`` first (keeps phases accurate)."""
    return np.exp(2j * np.pi * (np.asarray(n, dtype=np.int64) % M) / M)


def character(M: int, k: int) -> np.ndarray:
    return _root(M, k * np.arange(M))


def modulation(M: int, k: int) -> CyclicGroupOperator:
    """``V_k = diag(e^{2 pi i k y / M})``."""
    return CyclicGroupOperator(np.diag(character(M, k)))


def multiplication(phi) -> CyclicGroupOperator:
    """``phi(Q)``."""
    return CyclicGroupOperator(np.diag(np.asarray(phi, dtype=complex)))


def dft(M: int) -> np.ndarray:
    """Unitary DFT ``F[j, y] = e^{-2 pi i j y / M} / sqrt(M)``."""
    y = np.arange(M)
    return _root(M, -np.outer(y, y)) / np.sqrt(M)


def fourier_multiplier(psi) -> CyclicGroupOperator:
    """``psi(P) = F^* diag(psi) F``; ``psi[j]`` is the value at dual element ``j``."""
    psi = np.asarray(psi, dtype=complex)
    F = dft(len(psi))
    return CyclicGroupOperator(F.conj().T @ (psi[:, None] * F))


def weyl_residual(M: int, x: int, k: int) -> float:
    """Max entry of ``U_x V_k - k(x) V_k U_x``."""
    u, v = shift(M, x).matrix, modulation(M, k).matrix
    kx = _root(M, k * x)
    return float(np.max(np.abs(u @ v - kx * (v @ u))))


# ---------------------------------------------------------------------------
# averaging and Fourier calculus

def average_over_characters(T) -> CyclicGroupOperator:
    """``(1/M) sum_k V_k^* T V_k``, evaluated as an explicit character sum."""
    t = _mat(T)
    M = t.shape[0]
    chars = _root(M, np.outer(np.arange(M), np.arange(M)))  # [k, y]
    # entry (y, z) of V_k^* T V_k is conj(chi_k(y)) T[y, z] chi_k(z)
    weight = (chars.conj().T @ chars) / M  # [y, z] = (1/M) sum_k conj(chi_k(y)) chi_k(z)
    return CyclicGroupOperator(t * weight)


def diagonal_part(T) -> CyclicGroupOperator:
    t = _mat(T)
    return CyclicGroupOperator(np.diag(np.diag(t)))


def twisted_fourier(T, x: int) -> CyclicGroupOperator:
    """``T~(x) = I(T U_x^*)``: diagonal holding ``T[y, y + x]``."""
    t = _mat(T)
    return average_over_characters(t @ shift(t.shape[0], x).matrix.conj().T)


def fourier_inversion(T) -> CyclicGroupOperator:
    """``sum_x T~(x) U_x`` over the whole group."""
    t = _mat(T)
    M = t.shape[0]
    out = np.zeros((M, M), dtype=complex)
    for x in range(M):
        out += twisted_fourier(t, x).matrix @ shift(M, x).matrix
    return CyclicGroupOperator(out)


def inversion_error(T) -> float:
    return float(np.max(np.abs(fourier_inversion(T).matrix - _mat(T))))


# ---------------------------------------------------------------------------
# Landstad and compactness diagnostics

@dataclass(frozen=True)
class LandstadProfile:
    """``k -> ||[T, V_k]||`` and ``x -> ||(U_x - 1) T||`` over the whole group."""

    commutator: np.ndarray
    translation: np.ndarray

    @property
    def M(self) -> int:
        return len(self.commutator)

    @property
    def smallest(self) -> tuple[float, float]:
        """Values at the smallest nonzero arguments ``k = 1`` and ``x = 1``."""
        return float(self.commutator[1]), float(self.translation[1])

    def monotone_toward_origin(self, tol: float = 1e-8) -> bool:
        """True when ``k -> ||[T, V_k]||`` is non-decreasing in cyclic ``|k|``.

        ``tol`` absorbs the accuracy of the iterative norm on plateaus.
        """
        c = self.commutator
        h = self.M // 2
        scale = max(1.0, float(np.max(c)))
        up = np.diff(c[: h + 1])
        # k = 0, M-1, M-2, ... toward M/2
        down = np.diff(np.concatenate([[c[0]], c[::-1][: h]]))
        return bool(np.all(up >= -tol * scale) and np.all(down >= -tol * scale))

    def to_dict(self) -> dict:
        return {"M": self.M, "commutator": self.commutator.tolist(),
                "translation": self.translation.tolist(),
                "smallest": list(self.smallest)}


def landstad_profile(T) -> LandstadProfile:
    t = _mat(T)
    M = t.shape[0]
    eye = np.eye(M)
    comm = np.empty(M)
    trans = np.empty(M)
    for k in range(M):
        chi = character(M, k)
        # [T, V_k] = T V_k - V_k T, with V_k diagonal
        comm[k] = operator_norm(t * chi[None, :] - chi[:, None] * t)
        trans[k] = operator_norm((shift(M, k).matrix - eye) @ t)
    return LandstadProfile(comm, trans)


def cyclic_distance(M: int) -> np.ndarray:
    y = np.arange(M)
    return np.minimum(y, M - y)


def tail_set(M: int, radius: float | None = None) -> np.ndarray:
    """Indicator of ``F = {y : cyclic |y| > radius}`` (default ``M / 4``)."""
    r = M / 4 if radius is None else radius
    return cyclic_distance(M) > r


@dataclass(frozen=True)
class CompactnessDefect:
    """Tail norms ``||1_F(Q) T||``, ``||1_F(P) T||`` and small-argument profiles."""

    tail_position: float
    tail_momentum: float
    shift_defect: float
    modulation_defect: float

    @property
    def value(self) -> float:
        return max(self.tail_position, self.tail_momentum)

    def to_dict(self) -> dict:
        return {"value": self.value, "tail_position": self.tail_position,
                "tail_momentum": self.tail_momentum, "shift_defect": self.shift_defect,
                "modulation_defect": self.modulation_defect}


def compactness_report(T, radius: float | None = None) -> CompactnessDefect:
    """Riesz-Kolmogorov diagnostics of ``T`` on ``Z_M``.

    The scalar defect is the larger tail norm, with ``F`` the complement
    of the cyclic ball of radius ``M / 4`` in position and in momentum.
    ``||(U_1 - 1) T||`` and ``||(V_1 - 1) T||`` are reported alongside;
    they are not part of the scalar because on ``Z_M`` a vector cannot
    make both small at once (their product is bounded below by about
    ``pi / M``).
    """
    t = _mat(T)
    M = t.shape[0]
    if M < 8:
        raise ValueError("compactness diagnostics need M >= 8")
    f = tail_set(M, radius).astype(float)
    F = dft(M)
    tail_q = operator_norm(f[:, None] * t)
    tail_p = operator_norm(f[:, None] * (F @ t))  # ||1_F(P) T|| = ||1_F F T||
    eye = np.eye(M)
    sh = operator_norm((shift(M, 1).matrix - eye) @ t)
    md = operator_norm((modulation(M, 1).matrix - eye) @ t)
    return CompactnessDefect(tail_q, tail_p, sh, md)


def compactness_defect(T, radius: float | None = None) -> float:
    return compactness_report(T, radius).value


# ---------------------------------------------------------------------------
# reference operators

def gaussian_state(M: int, width: float | None = None) -> np.ndarray:
    """Normalized periodic Gaussian centred at 0 (default width ``sqrt(M / 2 pi)``)."""
    s = np.sqrt(M / (2 * np.pi)) if width is None else width
    d = cyclic_distance(M)
    v = np.exp(-0.5 * (d / s) ** 2)
    return v / np.linalg.norm(v)


def localized_projector(M: int, width: float | None = None) -> CyclicGroupOperator:
    v = gaussian_state(M, width)
    return CyclicGroupOperator(np.outer(v, v.conj()))


def dual_bump(M: int, width: float = 0.5) -> np.ndarray:
    """Smooth bump ``exp(-(omega / width)^2)`` on the dual circle, ``omega = 2 pi j / M``."""
    omega = 2 * np.pi * cyclic_distance(M) / M
    return np.exp(-((omega / width) ** 2))


def position_momentum_product(M: int, width: float = 0.5) -> CyclicGroupOperator:
    """``phi(Q) psi(P)`` with ``phi(y) = 1 + cos(2 pi y / M) / 2`` and ``psi`` a dual bump."""
    phi = 1.0 + 0.5 * np.cos(2 * np.pi * np.arange(M) / M)
    return multiplication(phi) @ fourier_multiplier(dual_bump(M, width))


def commutator_bound(M: int, width: float = 0.5) -> np.ndarray:
    """``||phi||_inf * max_j |psi(j + k) - psi(j)|`` for each ``k``."""
    psi = dual_bump(M, width)
    return np.array([1.5 * np.max(np.abs(np.roll(psi, -k) - psi)) for k in range(M)])
