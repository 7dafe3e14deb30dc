"""Numerical checks of the OQAM-OFDM (linear) and WCP-COQAM (circular) orthogonality conditions.

Every condition is a cross-ambiguity sum of the form

    X(m, v) = sum_n p[n + s1] * g_v[n] * conj(p[n + s2]),   g_v[n] = exp(j 2 pi v (n - alpha/2) / K)

with ``(s1, s2)`` one of ``(-mK, 0)``, ``(K/2 - mK, K/2)``, ``(K/2 - mK, 0)`` and
``(-mK, K/2)``.  Linear sums treat the pulse as zero outside ``0..N-1``;
circular sums take indices modulo ``N``.  All ``K`` values of ``v`` are obtained
at once by folding the product modulo ``K`` and taking one FFT.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from coqam.frame import FrameParams
from coqam.pulses import Pulse

DEFAULT_TOL = 1e-10

# (label, target is delta, pre-factor, take real part) as printed for each condition
_LINEAR_FORMS = {
    4: (1.0, "re", True),
    5: (1j, "im", True),
    6: (1j, "re", False),
    7: (1.0, "im", False),
}
_CIRCULAR_FORMS = {
    8: (1.0, "re", True),
    9: (1.0, "re", True),
    10: (1j, "re", False),
    11: (1j, "re", False),
}


@dataclass(frozen=True)
class OrthReport:
    """Residuals ``|achieved - target|`` indexed ``[condition, m, v]``."""

    family: str
    conditions: tuple[int, ...]
    m_values: np.ndarray
    residuals: np.ndarray
    tol: float

    @property
    def max_residual(self) -> float:
        return float(self.residuals.max())

    @property
    def passed(self) -> bool:
        return self.max_residual <= self.tol

    def worst(self) -> tuple[int, int, int, float]:
        c, i, v = np.unravel_index(np.argmax(self.residuals), self.residuals.shape)
        return self.conditions[c], int(self.m_values[i]), int(v), float(self.residuals[c, i, v])

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["condition", "m", "v", "residual"])
        for c, cond in enumerate(self.conditions):
            for i, m in enumerate(self.m_values):
                for v in range(self.residuals.shape[2]):
                    w.writerow([cond, int(m), v, repr(float(self.residuals[c, i, v]))])
        buf.write(f"# family={self.family} max_residual={self.max_residual!r} tol={self.tol!r} pass={self.passed}\n")
        return buf.getvalue()


def _validate(p: Pulse, params: FrameParams) -> np.ndarray:
    taps = np.asarray(p.taps if isinstance(p, Pulse) else p)
    if taps.shape != (params.N,):
        raise ValueError(f"pulse must have length {params.N}, got shape {taps.shape}")
    if np.iscomplexobj(taps) and np.any(taps.imag != 0):
        raise ValueError("orthogonality checks require a real pulse")
    return taps.real.astype(float)


def _modulated_sums(f: np.ndarray, n0: int, params: FrameParams) -> np.ndarray:
    """``sum_n f[..., n] g_v[n]`` for all v, where ``f[..., i]`` sits at ``n = n0 + i``; needs ``n0 % K == 0``."""
    K = params.K
    folded = f.reshape(f.shape[:-1] + (-1, K)).sum(axis=-2)
    v = np.arange(K)
    return np.exp(-1j * np.pi * v * params.alpha / K) * K * np.fft.ifft(folded, axis=-1)


def linear_corr(taps: np.ndarray, s1: np.ndarray, s2: int, params: FrameParams) -> np.ndarray:
    """Linear ``sum_n p[n + s1] g_v[n] conj(p[n + s2])`` for each shift in ``s1``; shape ``(len(s1), K)``."""
    N, K = params.N, params.K
    s1 = np.atleast_1d(s1)
    reach = int(max(np.max(np.abs(s1)), abs(s2))) + K
    n0 = -((reach + K - 1) // K) * K
    length = N - 2 * n0
    n = n0 + np.arange(length)
    padded = np.zeros(length + 2 * reach + N, dtype=taps.dtype)
    off = reach - n0  # padded[i + off] == p[i] for i in 0..N-1 (the zero margin covers the rest)
    padded[off : off + N] = taps
    first = padded[(n[None, :] + s1[:, None]) + off]
    second = np.conj(padded[n + s2 + off])
    return _modulated_sums(first * second[None, :], n0, params)


def circular_corr(taps: np.ndarray, s1: np.ndarray, s2: int, params: FrameParams) -> np.ndarray:
    """Circular ``sum_{n<N} p[(n + s1)_N] g_v[n] conj(p[(n + s2)_N])``; shape ``(len(s1), K)``."""
    N = params.N
    s1 = np.atleast_1d(s1)
    n = np.arange(N)
    first = taps[(n[None, :] + s1[:, None]) % N]
    second = np.conj(taps[(n + s2) % N])
    return _modulated_sums(first * second[None, :], 0, params)


def _shift_pairs(cond: int, m: np.ndarray, params: FrameParams):
    K, h = params.K, params.half
    return {
        4: (-m * K, 0), 8: (-m * K, 0),
        5: (h - m * K, h), 9: (h - m * K, h),
        6: (h - m * K, 0), 10: (h - m * K, 0),
        7: (-m * K, h), 11: (-m * K, h),
    }[cond]


def _evaluate(taps, params, m_values, forms, corr, tol, family, periodic) -> OrthReport:
    v = np.arange(params.K)
    rows = []
    for cond, (factor, part, is_delta) in forms.items():
        s1, s2 = _shift_pairs(cond, m_values, params)
        x = factor * corr(taps, s1, s2, params)
        achieved = x.real if part == "re" else x.imag
        target = np.zeros_like(achieved)
        if is_delta:
            m_hit = (m_values % params.M == 0) if periodic else (m_values == 0)
            target[np.ix_(m_hit, v == 0)] = 1.0
        rows.append(np.abs(achieved - target))
    return OrthReport(family, tuple(forms), np.asarray(m_values), np.stack(rows), tol)


def check_oqam_ofdm(p: Pulse, params: FrameParams, tol: float = DEFAULT_TOL) -> OrthReport:
    """Linear-convolution conditions for ``|m| <= M`` and ``v = 0..K-1``."""
    taps = _validate(p, params)
    m = np.arange(-params.M, params.M + 1)
    return _evaluate(taps, params, m, _LINEAR_FORMS, linear_corr, tol, "oqam-ofdm", periodic=False)


def check_wcp_coqam(p: Pulse, params: FrameParams, tol: float = DEFAULT_TOL) -> OrthReport:
    """Circular conditions for ``m = 0..M-1`` and ``v = 0..K-1``."""
    taps = _validate(p, params)
    m = np.arange(params.M)
    return _evaluate(taps, params, m, _CIRCULAR_FORMS, circular_corr, tol, "wcp-coqam", periodic=True)


def s_beta_gamma(p: Pulse, m: int, v: int, beta: int, gamma: int, params: FrameParams) -> complex:
    """Circular cross-ambiguity ``sum_n p[(n - mK + beta)_N] g_v[n] conj(p[(n + gamma)_N])``."""
    if beta not in (0, params.half) or gamma not in (0, params.half):
        raise ValueError("beta and gamma must each be 0 or K/2")
    taps = np.asarray(p.taps if isinstance(p, Pulse) else p)
    return complex(circular_corr(taps, np.array([beta - m * params.K]), gamma, params)[0, v % params.K])


def appendix_b_cases(params: FrameParams):
    """``(beta, gamma, m range)`` combinations on which the circular sum splits into two linear ones."""
    h, M = params.half, params.M
    tail = np.arange(1, M + 1)
    return [(0, 0, tail), (h, h, tail), (h, 0, tail), (0, h, np.arange(M))]


def verify_appendix_b_identity(p: Pulse, params: FrameParams) -> float:
    """Max ``|circular - (linear at m - M) - (linear at m)|`` over all admissible cases.

    An algebraic identity: holds for any length-N pulse, orthogonal or not.
    """
    taps = np.asarray(p.taps if isinstance(p, Pulse) else p)
    if taps.shape != (params.N,):
        raise ValueError(f"pulse must have length {params.N}, got shape {taps.shape}")
    K, M = params.K, params.M
    worst = 0.0
    for beta, gamma, m in appendix_b_cases(params):
        lhs = circular_corr(taps, beta - m * K, gamma, params)
        wrapped = linear_corr(taps, (M - m) * K + beta, gamma, params)
        direct = linear_corr(taps, beta - m * K, gamma, params)
        worst = max(worst, float(np.max(np.abs(lhs - wrapped - direct))))
    return worst


def wcp_basis(p: Pulse, params: FrameParams) -> np.ndarray:
    """All ``2MK`` transmit basis vectors, rows ordered like a flattened ``(K, 2M)`` real grid."""
    taps = np.asarray(p.taps if isinstance(p, Pulse) else p)
    K, M, N, h = params.K, params.M, params.N, params.half
    n = np.arange(N)
    basis = np.empty((K, 2 * M, N), dtype=complex)
    for k in range(K):
        gk = np.exp(2j * np.pi * k * (n - params.alpha / 2) / K)
        for slot in range(2 * M):
            if slot % 2 == 0:
                basis[k, slot] = gk * taps[(n - (slot // 2) * K) % N]
            else:
                mq = (slot + 1) // 2 % M
                basis[k, slot] = 1j * gk * taps[(n + h - mq * K) % N]
    return basis.reshape(2 * M * K, N)


def gram_oracle(p: Pulse, params: FrameParams) -> np.ndarray:
    """Real Gram matrix ``G[a, b] = Re <basis_a, basis_b>`` of the WCP-COQAM basis."""
    if params.N > 4096:
        raise ValueError("gram_oracle builds a dense (2N x 2N) matrix; use a small lattice")
    B = wcp_basis(p, params)
    return np.real(B @ B.conj().T)
