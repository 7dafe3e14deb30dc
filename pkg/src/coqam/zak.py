"""Discrete Zak transform and Zak-domain OQAM pulse orthogonalization."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from coqam.frame import FrameParams
from coqam.pulses import Pulse, normalize_energy

log = logging.getLogger(__name__)

SINGULAR_RTOL = 1e-12
IMAG_ENERGY_TOL = 1e-10


class OrthogonalizationError(ValueError):
    """Raised when a pulse cannot be orthogonalized by Zak-domain scaling."""


@dataclass(frozen=True)
class ZakMatrix:
    coeffs: np.ndarray  # (K, M): time offset u, modulation index v
    K: int
    M: int


def dzt(x, params: FrameParams) -> ZakMatrix:
    """``Z[u, v] = sum_m x[u + m K] exp(-j 2 pi v m / M)``."""
    x = np.asarray(x)
    if x.shape != (params.N,):
        raise ValueError(f"signal must have length {params.N}, got shape {x.shape}")
    poly = x.reshape(params.M, params.K).T
    return ZakMatrix(np.fft.fft(poly, axis=1), params.K, params.M)


def idzt(z: ZakMatrix) -> np.ndarray:
    coeffs = np.asarray(z.coeffs)
    if coeffs.shape != (z.K, z.M):
        raise ValueError(f"Zak coefficients must have shape {(z.K, z.M)}, got {coeffs.shape}")
    return np.fft.ifft(coeffs, axis=1).T.reshape(-1)


def half_shift_power(z: ZakMatrix) -> np.ndarray:
    """``|Z[u, v]|^2 + |Z[u + K/2, v]|^2`` (the Zak magnitude is K-periodic in u)."""
    power = np.abs(z.coeffs) ** 2
    return power + np.roll(power, -z.K // 2, axis=0)


def _is_symmetric(taps: np.ndarray) -> bool:
    scale = np.max(np.abs(taps))
    return scale > 0 and np.max(np.abs(taps - taps[::-1])) <= 1e-9 * scale


class _PairSolver:
    """Minimum-norm Newton iteration that makes a polyphase pair power complementary.

    For pulse taps ``a_m = p[u + mK]`` and ``b_m = p[u + K/2 + mK]`` the target is
    ``sum_m a_m a_{m+l} + b_m b_{m+l} = c * delta[l]`` for ``l = 0..M-1``.
    """

    def __init__(self, M: int, target: float):
        self.M = M
        self.target = target
        i = np.arange(M)[None, :]
        lag = np.arange(M)[:, None]
        self.fwd = i + lag
        self.bwd = i - lag
        self.fwd_ok = self.fwd < M
        self.bwd_ok = self.bwd >= 0
        self.fwd = np.where(self.fwd_ok, self.fwd, 0)
        self.bwd = np.where(self.bwd_ok, self.bwd, 0)

    def residual(self, a, b):
        M = self.M
        r = np.array([a[: M - l] @ a[l:] + b[: M - l] @ b[l:] for l in range(M)])
        r[0] -= self.target
        return r

    def _jac(self, a):
        return np.where(self.fwd_ok, a[self.fwd], 0.0) + np.where(self.bwd_ok, a[self.bwd], 0.0)

    def solve(self, a, b, tol=1e-16, max_iter=50):
        x = np.concatenate([a, b]).astype(float)
        M = self.M
        for _ in range(max_iter):
            F = self.residual(x[:M], x[M:])
            if np.max(np.abs(F)) <= tol:
                break
            J = np.hstack([self._jac(x[:M]), self._jac(x[M:])])
            x = x + np.linalg.lstsq(J, -F, rcond=None)[0]
        F = self.residual(x[:M], x[M:])
        if np.max(np.abs(F)) > 1e3 * tol:
            raise OrthogonalizationError(f"polyphase refinement did not converge (residual {np.max(np.abs(F)):.3e})")
        return x[:M], x[M:]


def refine_finite_support(taps: np.ndarray, params: FrameParams) -> np.ndarray:
    """Make every ``(u, u + K/2)`` polyphase pair of a length-N pulse power complementary.

    Zak scaling on the M-point grid only enforces this at M frequencies, which
    is enough for circularly shifted pulses but aliases the linear
    correlations at lags ``m`` and ``m - M``.  Enforcing it for all frequencies
    keeps the finite support and yields orthogonality without wrap-around.
    Even symmetry is kept by solving one pair per mirror couple.
    """
    K, M = params.K, params.M
    q = np.array(taps, dtype=float)
    solver = _PairSolver(M, 2.0 / K * float(q @ q))
    half = K // 2
    if _is_symmetric(q):
        if K % 4:
            # the self-mirrored pair would have to collapse to a single tap
            log.info("K=%d is not a multiple of 4; skipping finite-support refinement", K)
            return q
        for u in range(K // 4):
            a, b = solver.solve(q[u::K], q[u + half :: K])
            mirror = half - 1 - u
            q[u::K], q[u + half :: K] = a, b
            q[mirror::K], q[mirror + half :: K] = b[::-1], a[::-1]
    else:
        for u in range(half):
            q[u::K], q[u + half :: K] = solver.solve(q[u::K], q[u + half :: K])
    return q


def orthogonalize_oqam(p: Pulse, params: FrameParams, finite_support: bool = True) -> Pulse:
    """Orthogonalize ``p`` for OQAM transmission on the ``(K/2, 1/K)`` lattice.

    Scales the Zak transform by ``sqrt(2 / S)`` with ``S`` the half-shift power
    from :func:`half_shift_power`, inverts, and normalizes energy.  With
    ``finite_support`` the result is further refined so the linear (not just
    circular) orthogonality conditions hold; see :func:`refine_finite_support`.
    """
    taps = np.asarray(p.taps)
    if taps.shape != (params.N,):
        raise ValueError(f"pulse must have length {params.N}, got {taps.shape}")
    if np.iscomplexobj(taps) and np.max(np.abs(taps.imag)) > 0:
        raise ValueError("pulse must be real")
    z = dzt(taps.real.astype(float), params)
    S = half_shift_power(z)
    if S.min() < SINGULAR_RTOL * S.max():
        raise OrthogonalizationError(
            f"Zak-domain power nearly vanishes (min/max = {S.min() / S.max():.3e}); "
            "pulse cannot be orthogonalized by scaling"
        )
    q = idzt(ZakMatrix(z.coeffs * np.sqrt(2.0 / S), params.K, params.M))
    imag_energy = float(np.sum(q.imag**2))
    total = float(np.sum(np.abs(q) ** 2))
    if imag_energy > IMAG_ENERGY_TOL * total:
        raise OrthogonalizationError(f"orthogonalized pulse is not real (imaginary energy ratio {imag_energy / total:.3e})")
    q = q.real / np.sqrt(np.sum(q.real**2))
    if finite_support:
        q = refine_finite_support(q, params)
    name = p.name if p.name.startswith("dzt-") else f"dzt-{p.name}"
    return normalize_energy(Pulse(q, name, p.param, {**p.meta, "orthogonalized": True}))
