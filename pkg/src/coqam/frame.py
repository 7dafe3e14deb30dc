"""Frame geometry, QPSK grids and the OQAM staggering index map.

Grids are plain numpy arrays indexed ``[subcarrier, slot]``:

* a QAM grid is complex with shape ``(K, M)``;
* a real (staggered) grid is real with shape ``(K, 2M)``.

Staggering puts ``Re d[k, m]`` on slot ``2m`` and ``Im d[k, m]`` on slot
``2m - 1`` taken modulo ``2M``, so the imaginary part of slot 0 lands on the
last real slot.  This is the wrap that makes the phase-term synthesizer and
the staggered synthesizer produce identical waveforms.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np

QPSK_AMPLITUDE = 1.0 / np.sqrt(2.0)


@dataclass(frozen=True)
class FrameParams:
    """Lattice geometry of one frame: ``K`` subcarriers by ``M`` slots."""

    K: int
    M: int
    cp_len: int = 0

    def __post_init__(self):
        if not isinstance(self.K, (int, np.integer)) or not isinstance(self.M, (int, np.integer)):
            raise TypeError("K and M must be integers")
        if self.K < 4 or self.K % 2:
            raise ValueError(f"K must be even and >= 4, got {self.K}")
        if self.M < 2:
            raise ValueError(f"M must be >= 2, got {self.M}")
        if not 0 <= self.cp_len < self.K * self.M:
            raise ValueError(f"cp_len must lie in [0, {self.K * self.M}), got {self.cp_len}")

    @property
    def N(self) -> int:
        return self.K * self.M

    @property
    def alpha(self) -> int:
        return self.K // 2 - 1

    @property
    def D(self) -> int:
        return self.N - 1

    @property
    def half(self) -> int:
        return self.K // 2


def make_frame_params(K: int, M: int, cp_len: int = 0) -> FrameParams:
    return FrameParams(int(K), int(M), int(cp_len))


def _odd_slot_source(M: int) -> np.ndarray:
    # real slot 2m+1 carries Im of QAM slot (m+1) mod M
    return (np.arange(M) + 1) % M


def _check_shape(arr: np.ndarray, shape: tuple[int, int], what: str) -> None:
    if arr.shape != shape:
        raise ValueError(f"{what} must have shape {shape}, got {arr.shape}")


def stagger(grid: np.ndarray, params: FrameParams) -> np.ndarray:
    """Split a ``(K, M)`` complex grid into the ``(K, 2M)`` real grid."""
    grid = np.asarray(grid)
    _check_shape(grid, (params.K, params.M), "QAM grid")
    out = np.empty((params.K, 2 * params.M))
    out[:, 0::2] = grid.real
    out[:, 1::2] = grid.imag[:, _odd_slot_source(params.M)]
    return out


def destagger(rg: np.ndarray, params: FrameParams) -> np.ndarray:
    """Inverse of :func:`stagger`."""
    rg = np.asarray(rg)
    _check_shape(rg, (params.K, 2 * params.M), "real grid")
    imag = np.empty((params.K, params.M))
    imag[:, _odd_slot_source(params.M)] = rg[:, 1::2]
    return rg[:, 0::2] + 1j * imag


def split_real_imag(rg: np.ndarray, params: FrameParams) -> tuple[np.ndarray, np.ndarray]:
    """Return the ``(K, M)`` in-phase and quadrature symbol planes of a real grid.

    Works on arrays with extra leading batch axes.
    """
    rg = np.asarray(rg)
    if rg.shape[-2:] != (params.K, 2 * params.M):
        raise ValueError(f"real grid must end in shape {(params.K, 2 * params.M)}, got {rg.shape}")
    d_re = rg[..., 0::2]
    d_im = np.empty_like(d_re)
    d_im[..., _odd_slot_source(params.M)] = rg[..., 1::2]
    return d_re, d_im


def merge_real_imag(d_re: np.ndarray, d_im: np.ndarray, params: FrameParams) -> np.ndarray:
    """Inverse of :func:`split_real_imag`."""
    shape = d_re.shape[:-2] + (params.K, 2 * params.M)
    out = np.empty(shape)
    out[..., 0::2] = d_re
    out[..., 1::2] = d_im[..., _odd_slot_source(params.M)]
    return out


def phase_term(k: int, m: int, M: int) -> complex:
    """Phase factor ``exp(j*pi*k*(M - 1/2))`` times 1 (even ``m``) or j (odd ``m``)."""
    base = np.exp(1j * np.pi * k * (M - 0.5))
    return complex(base * (1j if m % 2 else 1.0))


def random_qpsk(rng: np.random.Generator, shape) -> np.ndarray:
    """Unit-energy QPSK symbols ``(+-1 +- j)/sqrt(2)``."""
    bits = rng.integers(0, 2, size=(2,) + tuple(np.atleast_1d(shape)))
    return QPSK_AMPLITUDE * ((1 - 2 * bits[0]) + 1j * (1 - 2 * bits[1]))


def qpsk_decide(values: np.ndarray) -> np.ndarray:
    """Hard QPSK decision on the sign of each quadrature."""
    re = np.where(values.real >= 0, 1.0, -1.0)
    im = np.where(values.imag >= 0, 1.0, -1.0)
    return QPSK_AMPLITUDE * (re + 1j * im)


def _fmt_complex(z: complex) -> str:
    return f"{z.real!r}{z.imag:+.17g}j"


def grid_to_csv(grid: np.ndarray) -> str:
    """Serialize a grid, one row per subcarrier; complex entries as ``re+imj``."""
    grid = np.asarray(grid)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    for row in grid:
        if np.iscomplexobj(grid):
            writer.writerow(_fmt_complex(complex(z)) for z in row)
        else:
            writer.writerow(repr(float(x)) for x in row)
    return buf.getvalue()


def grid_from_csv(text: str) -> np.ndarray:
    rows = [r for r in csv.reader(io.StringIO(text)) if r]
    if any("j" in cell for row in rows for cell in row):
        return np.array([[complex(c) for c in row] for row in rows])
    return np.array([[float(c) for c in row] for row in rows])


def write_grid(path: str | Path, grid: np.ndarray) -> None:
    Path(path).write_text(grid_to_csv(grid))


def read_grid(path: str | Path) -> np.ndarray:
    return grid_from_csv(Path(path).read_text())
