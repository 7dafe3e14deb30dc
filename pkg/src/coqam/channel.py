"""AWGN channel, the theoretical QPSK curve and the Monte-Carlo SER harness."""

from __future__ import annotations

import io
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np
from scipy import signal
from scipy.special import erfc

from coqam.frame import FrameParams, qpsk_decide, random_qpsk, stagger, destagger, split_real_imag
from coqam.modem import (
    Waveform,
    add_cp,
    mf_receive_wcp,
    ofdm_baseline_rx,
    ofdm_baseline_tx,
    remove_cp,
    synth_wcp_staggered,
)
from coqam.pulses import Pulse, make_pulse
from coqam.zak import orthogonalize_oqam

log = logging.getLogger(__name__)

RNG_ALGORITHM = "numpy PCG64, SeedSequence([seed, snr_index, frame_index]) per frame"
SYSTEMS = ("wcp-coqam", "ofdm")


def noise_variance(es_n0_db: float, symbol_energy: float = 1.0) -> float:
    """Complex per-sample noise variance ``N0`` for the given ``Es/N0``.

    The synthesizers use unit-norm basis vectors, so ``N0`` in the sample
    domain is also the noise variance on each matched-filter output.
    """
    return symbol_energy / 10.0 ** (es_n0_db / 10.0)


def _complex_noise(rng: np.random.Generator, shape) -> np.ndarray:
    z = rng.standard_normal((2,) + tuple(np.atleast_1d(shape)))
    return (z[0] + 1j * z[1]) / np.sqrt(2.0)


def awgn(w: Waveform, es_n0_db: float, rng: np.random.Generator, symbol_energy: float = 1.0) -> Waveform:
    """Add circularly-symmetric complex Gaussian noise of variance :func:`noise_variance`."""
    x = np.asarray(w.samples)
    if not np.all(np.isfinite(x)):
        raise ValueError("waveform contains non-finite samples")
    sigma = np.sqrt(noise_variance(es_n0_db, symbol_energy))
    return Waveform(x + sigma * _complex_noise(rng, x.shape), w.params, w.cp, w.origin)


def q_function(x):
    return 0.5 * erfc(np.asarray(x) / np.sqrt(2.0))


def theoretical_qpsk_ser(es_n0_db):
    """Gray-coded QPSK over AWGN: ``2Q(sqrt(g)) - Q(sqrt(g))^2`` with ``g = Es/N0``."""
    q = q_function(np.sqrt(10.0 ** (np.asarray(es_n0_db, dtype=float) / 10.0)))
    out = 2.0 * q - q * q
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class PulseSpec:
    gen: str = "gaussian"
    param: float | None = 0.1
    orthogonalize: bool = True

    def build(self, params: FrameParams) -> Pulse:
        p = make_pulse(params, self.gen, self.param)
        return orthogonalize_oqam(p, params) if self.orthogonalize else p

    def describe(self) -> str:
        prefix = "dzt-" if self.orthogonalize else ""
        return f"{prefix}{self.gen}({self.param})"


@dataclass(frozen=True)
class SimConfig:
    params: FrameParams
    snr_db: tuple[float, ...]
    system: str = "wcp-coqam"
    pulse: PulseSpec | Pulse = PulseSpec()
    target_frame_errors: int = 100
    max_frames: int = 1_000_000
    seed: int = 0
    batch: int = 64

    def __post_init__(self):
        object.__setattr__(self, "snr_db", tuple(float(s) for s in self.snr_db))
        if not self.snr_db:
            raise ValueError("SNR grid is empty")
        if self.target_frame_errors < 1:
            raise ValueError("target_frame_errors must be >= 1")
        if self.max_frames < 1:
            raise ValueError("max_frames must be >= 1")
        if self.system not in SYSTEMS:
            raise ValueError(f"system must be one of {SYSTEMS}, got {self.system!r}")

    def pulse_description(self) -> str:
        if self.system == "ofdm":
            return "rect (plain OFDM)"
        if isinstance(self.pulse, Pulse):
            return f"{self.pulse.name}({self.pulse.param})"
        return self.pulse.describe()


@dataclass(frozen=True)
class SerPoint:
    es_n0_db: float
    frames: int
    symbols: int
    symbol_errors: int
    frame_errors: int
    capped: bool = False

    @property
    def ser(self) -> float:
        return self.symbol_errors / self.symbols

    @property
    def fer(self) -> float:
        return self.frame_errors / self.frames

    @property
    def ser_sigma(self) -> float:
        """Binomial standard deviation of the SER estimate (plug-in)."""
        return binomial_sigma(self.ser, self.symbols)


def binomial_sigma(p: float, n: int) -> float:
    return float(np.sqrt(max(p * (1.0 - p), 0.0) / n))


@dataclass(frozen=True)
class SweepResult:
    points: tuple[SerPoint, ...]
    metadata: dict = field(default_factory=dict)

    @property
    def ser(self) -> np.ndarray:
        return np.array([pt.ser for pt in self.points])

    def to_csv(self) -> str:
        buf = io.StringIO()
        for key, value in self.metadata.items():
            buf.write(f"# {key}: {value}\n")
        capped = [pt.es_n0_db for pt in self.points if pt.capped]
        buf.write(f"# capped: {','.join(repr(c) for c in capped) if capped else 'none'}\n")
        buf.write("es_n0_db,frames,symbols,symbol_errors,frame_errors,ser,fer\n")
        for pt in self.points:
            buf.write(
                f"{pt.es_n0_db!r},{pt.frames},{pt.symbols},{pt.symbol_errors},"
                f"{pt.frame_errors},{pt.ser!r},{pt.fer!r}\n"
            )
        return buf.getvalue()


def _frame_rng(seed: int, snr_index: int, frame_index: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, snr_index, frame_index])))


class _Link:
    """One transmit/receive chain; processes a batch of frames at once."""

    def __init__(self, cfg: SimConfig):
        self.cfg = cfg
        self.params = cfg.params
        if cfg.system == "wcp-coqam":
            self.pulse = cfg.pulse if isinstance(cfg.pulse, Pulse) else cfg.pulse.build(cfg.params)
        else:
            self.pulse = None
        self.frame_len = cfg.params.N + cfg.params.cp_len

    def transmit(self, grids: np.ndarray) -> Waveform:
        if self.pulse is None:
            body = ofdm_baseline_tx(grids, self.params)
        else:
            body = synth_wcp_staggered(stagger_batch(grids, self.params), self.pulse, self.params)
        return add_cp(body)

    def receive(self, w: Waveform) -> np.ndarray:
        body = remove_cp(w)
        if self.pulse is None:
            return ofdm_baseline_rx(body, self.params)
        return destagger_batch(mf_receive_wcp(body, self.pulse, self.params), self.params)


def stagger_batch(grids: np.ndarray, params: FrameParams) -> np.ndarray:
    if grids.ndim == 2:
        return stagger(grids, params)
    return np.stack([stagger(g, params) for g in grids])


def destagger_batch(rgs: np.ndarray, params: FrameParams) -> np.ndarray:
    if rgs.ndim == 2:
        return destagger(rgs, params)
    d_re, d_im = split_real_imag(rgs, params)
    return d_re + 1j * d_im


def _run_point(link: _Link, snr_index: int, es_n0_db: float) -> SerPoint:
    cfg, params = link.cfg, link.params
    sigma = np.sqrt(noise_variance(es_n0_db))
    frames = symbol_errors = frame_errors = 0
    per_frame = params.K * params.M
    while frames < cfg.max_frames and frame_errors < cfg.target_frame_errors:
        count = min(cfg.batch, cfg.max_frames - frames)
        grids = np.empty((count, params.K, params.M), dtype=complex)
        noise = np.empty((count, link.frame_len), dtype=complex)
        for i in range(count):
            rng = _frame_rng(cfg.seed, snr_index, frames + i)
            grids[i] = random_qpsk(rng, (params.K, params.M))
            noise[i] = _complex_noise(rng, link.frame_len)
        tx = link.transmit(grids)
        rx = Waveform(tx.samples + sigma * noise, params, tx.cp, tx.origin)
        errors = np.sum(qpsk_decide(link.receive(rx)) != grids, axis=(-2, -1))
        # consume frames in order so the stop point does not depend on batch size
        for e in errors:
            frames += 1
            symbol_errors += int(e)
            frame_errors += int(e > 0)
            if frame_errors >= cfg.target_frame_errors:
                break
    capped = frame_errors < cfg.target_frame_errors
    if capped:
        log.info("SNR %.2f dB hit the %d-frame cap with %d frame errors", es_n0_db, cfg.max_frames, frame_errors)
    return SerPoint(es_n0_db, frames, frames * per_frame, symbol_errors, frame_errors, capped)


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get("COQAM_THREADS", "1")))
    except ValueError:
        return 1


def run_ser(cfg: SimConfig, workers: int | None = None) -> SweepResult:
    """Monte-Carlo SER/FER sweep; deterministic for a given config regardless of ``workers``."""
    link = _Link(cfg)
    workers = default_workers() if workers is None else max(1, workers)
    jobs = list(enumerate(cfg.snr_db))
    if workers == 1:
        points = [_run_point(link, i, s) for i, s in jobs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            points = list(pool.map(lambda job: _run_point(link, *job), jobs))
    params = cfg.params
    metadata = {
        "system": cfg.system,
        "pulse": cfg.pulse_description(),
        "params": f"K={params.K} M={params.M} cp_len={params.cp_len}",
        "seed": cfg.seed,
        "rng": RNG_ALGORITHM,
        "target_frame_errors": cfg.target_frame_errors,
        "max_frames": cfg.max_frames,
        "snr": "Es/N0 per QPSK symbol [dB]",
    }
    return SweepResult(tuple(points), metadata)


def psd_estimate(waveforms: Iterable[Waveform | np.ndarray], nfft: int, allow_zero: bool = False) -> np.ndarray:
    """Averaged (Welch, Hann, 50% overlap) periodogram over a stream of waveforms.

    Bins are in FFT order (DC first) and normalized to unit sum.
    """
    if nfft < 1 or nfft & (nfft - 1):
        raise ValueError(f"nfft must be a power of two, got {nfft}")
    total = np.zeros(nfft)
    count = 0
    for w in waveforms:
        x = np.asarray(w.samples if isinstance(w, Waveform) else w).reshape(-1, np.shape(getattr(w, "samples", w))[-1])
        for row in x:
            if len(row) < nfft:
                row = np.concatenate([row, np.zeros(nfft - len(row), dtype=row.dtype)])
            _, pxx = signal.welch(row, nperseg=nfft, return_onesided=False, detrend=False)
            total += pxx
            count += 1
    if count == 0:
        raise ValueError("no waveforms given")
    s = total.sum()
    if s == 0:
        if allow_zero:
            return total
        raise ValueError("input has zero power")
    return total / s
