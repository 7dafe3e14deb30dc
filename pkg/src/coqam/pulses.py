"""Prototype filters of length ``N = M*K``.

All generated pulses are real, unit energy and even-symmetric about the
half-sample point ``(N - 1)/2``, i.e. ``p[n] == p[N - 1 - n]``.  That centre
is not cosmetic: with the ``alpha = K/2 - 1`` modulation offset, real-part
orthogonality relies on every cross-ambiguity term landing on the imaginary
axis, and that only happens for this symmetry.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from coqam.frame import FrameParams


@dataclass(frozen=True)
class Pulse:
    taps: np.ndarray
    name: str = "custom"
    param: float | None = None
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        taps = np.asarray(self.taps)
        if taps.ndim != 1:
            raise ValueError("pulse taps must be one-dimensional")
        if not np.all(np.isfinite(taps)):
            raise ValueError("pulse taps must be finite")
        taps = taps.copy()
        taps.setflags(write=False)
        object.__setattr__(self, "taps", taps)

    def __len__(self) -> int:
        return len(self.taps)

    @property
    def energy(self) -> float:
        return float(np.sum(np.abs(self.taps) ** 2))

    def with_taps(self, taps: np.ndarray, **meta) -> "Pulse":
        return Pulse(taps, self.name, self.param, {**self.meta, **meta})


def pulse_center(params: FrameParams) -> float:
    return (params.N - 1) / 2.0


def normalize_energy(p: Pulse) -> Pulse:
    e = p.energy
    if e <= 0.0:
        raise ValueError("cannot normalize an all-zero pulse")
    return p.with_taps(p.taps / np.sqrt(e))


def gen_gaussian(params: FrameParams, beta: float) -> Pulse:
    """Sampled Gaussian ``exp(-pi^2 (n - c)^2 / (beta^2 N^2))``, unit energy.

    ``beta`` scales the time spread: the standard deviation is
    ``beta * N / (pi * sqrt(2))`` samples.
    """
    if not beta > 0:
        raise ValueError(f"beta must be positive, got {beta}")
    t = np.arange(params.N) - pulse_center(params)
    taps = np.exp(-(np.pi**2) * t**2 / (beta**2 * params.N**2))
    return normalize_energy(Pulse(taps, "gaussian", float(beta)))


def raised_cosine_response(t: np.ndarray, rolloff: float) -> np.ndarray:
    """Raised-cosine impulse response at ``t`` measured in symbol periods."""
    t = np.asarray(t, dtype=float)
    h = np.sinc(t)
    if rolloff == 0:
        return h
    den = 1.0 - (2.0 * rolloff * t) ** 2
    singular = np.isclose(den, 0.0, atol=1e-12)
    safe = np.where(singular, 1.0, den)
    h = h * np.cos(np.pi * rolloff * t) / safe
    # removable singularity at |t| = 1/(2 rolloff)
    return np.where(singular, np.pi / 4.0 * np.sinc(1.0 / (2.0 * rolloff)), h)


def gen_raised_cosine(params: FrameParams, rolloff: float) -> Pulse:
    """Raised-cosine spectrum pulse with symbol period ``K`` samples, truncated to ``N``."""
    if not 0.0 <= rolloff <= 1.0:
        raise ValueError(f"rolloff must lie in [0, 1], got {rolloff}")
    t = (np.arange(params.N) - pulse_center(params)) / params.K
    return normalize_energy(Pulse(raised_cosine_response(t, rolloff), "rc", float(rolloff)))


def gen_rectangular(params: FrameParams) -> Pulse:
    taps = np.zeros(params.N)
    taps[: params.K] = 1.0 / np.sqrt(params.K)
    return Pulse(taps, "rect", None)


GENERATORS = {
    "gaussian": lambda params, x: gen_gaussian(params, x),
    "rc": lambda params, x: gen_raised_cosine(params, x),
    "rect": lambda params, x: gen_rectangular(params),
}


def make_pulse(params: FrameParams, gen: str, param: float | None = None) -> Pulse:
    try:
        factory = GENERATORS[gen]
    except KeyError:
        raise ValueError(f"unknown pulse generator {gen!r}") from None
    if gen != "rect" and param is None:
        raise ValueError(f"generator {gen!r} needs a parameter")
    return factory(params, param)


def format_pulse(p: Pulse, params: FrameParams) -> str:
    param = "none" if p.param is None else repr(float(p.param))
    lines = [f"# pulse K={params.K} M={params.M} gen={p.name} param={param}"]
    lines.extend(repr(float(x)) for x in p.taps)
    return "\n".join(lines) + "\n"


def parse_pulse(text: str) -> tuple[Pulse, FrameParams]:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("# pulse"):
        raise ValueError("missing '# pulse' header line")
    fields = dict(tok.split("=", 1) for tok in lines[0][len("# pulse"):].split())
    try:
        params = FrameParams(int(fields["K"]), int(fields["M"]))
        name = fields["gen"]
        param = None if fields["param"] == "none" else float(fields["param"])
    except KeyError as exc:
        raise ValueError(f"pulse header lacks field {exc}") from None
    taps = np.array([float(x) for x in lines[1:]])
    if len(taps) != params.N:
        raise ValueError(f"pulse file holds {len(taps)} taps, header implies {params.N}")
    return Pulse(taps, name, param), params


def write_pulse(path: str | Path, p: Pulse, params: FrameParams) -> None:
    Path(path).write_text(format_pulse(p, params))


def read_pulse(path: str | Path) -> tuple[Pulse, FrameParams]:
    return parse_pulse(Path(path).read_text())
