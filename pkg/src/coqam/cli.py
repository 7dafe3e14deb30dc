"""Command-line front end.

Exit codes: 0 success / pass, 1 verification failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from coqam.channel import PulseSpec, SimConfig, default_workers, run_ser
from coqam.frame import FrameParams, phase_term, random_qpsk, stagger
from coqam.modem import synth_wcp_phase, synth_wcp_staggered
from coqam.orthogonality import DEFAULT_TOL, check_oqam_ofdm, check_wcp_coqam, verify_appendix_b_identity
from coqam.pulses import Pulse, gen_gaussian, gen_raised_cosine, make_pulse, read_pulse, write_pulse
from coqam.zak import OrthogonalizationError, orthogonalize_oqam

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

DEFAULT_LATTICES = ((4, 2), (8, 4), (128, 9))
APPENDIX_A_TOL = 1e-12
APPENDIX_B_TOL = 1e-10


class UsageError(Exception):
    pass


def _params(args) -> FrameParams:
    try:
        return FrameParams(args.K, args.M, getattr(args, "cp_len", 0))
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from None


def _gen_param(args) -> float | None:
    if args.gen == "gaussian":
        return args.beta
    if args.gen == "rc":
        return args.rolloff
    return None


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_design_pulse(args) -> int:
    params = _params(args)
    try:
        p = make_pulse(params, args.gen, _gen_param(args))
        if args.orthogonalize:
            p = orthogonalize_oqam(p, params)
    except OrthogonalizationError as exc:
        print(f"orthogonalization failed: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    write_pulse(args.out, p, params)
    print(f"wrote {len(p)} taps to {args.out}", file=sys.stderr)
    return EXIT_OK


def _load_pulse(args) -> tuple[Pulse, FrameParams]:
    path = Path(args.pulse)
    if not path.is_file():
        raise UsageError(f"pulse file not found: {path}")
    try:
        p, params = read_pulse(path)
    except ValueError as exc:
        raise UsageError(f"bad pulse file {path}: {exc}") from None
    for name in ("K", "M"):
        given = getattr(args, name, None)
        if given is not None and given != getattr(params, name):
            raise UsageError(f"--{name} {given} disagrees with pulse file ({getattr(params, name)})")
    return p, params


def cmd_check(args) -> int:
    p, params = _load_pulse(args)
    reports = []
    if args.family in ("oqam-ofdm", "both"):
        reports.append(check_oqam_ofdm(p, params, args.tol))
    if args.family in ("wcp-coqam", "both"):
        reports.append(check_wcp_coqam(p, params, args.tol))
    _emit("".join(r.to_csv() for r in reports), args.out)
    for r in reports:
        cond, m, v, res = r.worst()
        verdict = "PASS" if r.passed else "FAIL"
        print(f"{r.family}: {verdict} max_residual={r.max_residual:.3e} (condition {cond}, m={m}, v={v})", file=sys.stderr)
    return EXIT_OK if all(r.passed for r in reports) else EXIT_FAIL


def _snr_grid(args) -> tuple[float, ...]:
    if args.snr_step <= 0 or args.snr_stop < args.snr_start:
        raise UsageError("empty SNR grid: need --snr-step > 0 and --snr-stop >= --snr-start")
    grid = np.arange(args.snr_start, args.snr_stop + args.snr_step / 2, args.snr_step)
    return tuple(round(float(s), 10) for s in grid)


def cmd_simulate(args) -> int:
    snr = _snr_grid(args)
    if args.pulse:
        pulse, params = _load_pulse(args)
        params = FrameParams(params.K, params.M, args.cp_len)
    else:
        if args.K is None or args.M is None:
            raise UsageError("--K and --M are required unless --pulse is given")
        params = _params(args)
        pulse = PulseSpec(args.gen, _gen_param(args), args.orthogonalize)
    try:
        cfg = SimConfig(
            params,
            snr,
            system=args.system,
            pulse=pulse,
            target_frame_errors=args.target_frame_errors,
            max_frames=args.max_frames,
            seed=args.seed,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    try:
        result = run_ser(cfg, workers=default_workers())
    except OrthogonalizationError as exc:
        print(f"orthogonalization failed: {exc}", file=sys.stderr)
        return EXIT_FAIL
    _emit(result.to_csv(), args.out)
    return EXIT_OK


def _corrupted_phase(k: int, m: int, M: int) -> complex:
    # wrong odd-slot factor: -j instead of j
    return phase_term(k, m, M) * (-1.0 if m % 2 else 1.0)


def verify_lattice(params: FrameParams, trials: int, rng: np.random.Generator, corrupt_phase: bool = False) -> dict:
    """Run the equivalence, identity and implication checks on one lattice; returns max residuals."""
    phase = _corrupted_phase if corrupt_phase else phase_term
    ref = orthogonalize_oqam(gen_gaussian(params, 0.5 if params.N < 64 else 0.1), params)

    eq = 0.0
    for _ in range(trials):
        rg = stagger(random_qpsk(rng, (params.K, params.M)), params)
        a = synth_wcp_phase(rg, ref, params, phase=phase).samples
        b = synth_wcp_staggered(rg, ref, params).samples
        eq = max(eq, float(np.max(np.abs(a - b))))

    ident = 0.0
    for _ in range(trials):
        ident = max(ident, verify_appendix_b_identity(Pulse(rng.standard_normal(params.N)), params))

    implication_ok, oqam_passes = True, 0
    for i in range(trials):
        if i % 2:
            p = gen_raised_cosine(params, float(rng.uniform(0.05, 1.0)))
        else:
            p = gen_gaussian(params, float(rng.uniform(0.2, 1.0)))
        try:
            q = orthogonalize_oqam(p, params)
        except OrthogonalizationError:
            continue
        if check_oqam_ofdm(q, params).passed:
            oqam_passes += 1
            implication_ok &= check_wcp_coqam(q, params).passed
    return {
        "appendix_a_max_diff": eq,
        "appendix_b_max_residual": ident,
        "implication_holds": implication_ok,
        "oqam_passing_pulses": oqam_passes,
    }


def cmd_verify_paper(args) -> int:
    if args.K is not None or args.M is not None:
        if args.K is None or args.M is None:
            raise UsageError("give both --K and --M, or neither")
        lattices = ((args.K, args.M),)
    else:
        lattices = DEFAULT_LATTICES
    rng = np.random.default_rng(args.seed)
    ok = True
    for K, M in lattices:
        try:
            params = FrameParams(K, M)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        res = verify_lattice(params, args.trials, rng, args.corrupt_phase)
        a_ok = res["appendix_a_max_diff"] <= APPENDIX_A_TOL
        b_ok = res["appendix_b_max_residual"] <= APPENDIX_B_TOL
        ok &= a_ok and b_ok and res["implication_holds"]
        print(
            f"K={K} M={M}: appendix-A max|diff|={res['appendix_a_max_diff']:.3e} [{'ok' if a_ok else 'FAIL'}]  "
            f"appendix-B max residual={res['appendix_b_max_residual']:.3e} [{'ok' if b_ok else 'FAIL'}]  "
            f"oqam=>wcp {'holds' if res['implication_holds'] else 'VIOLATED'} "
            f"({res['oqam_passing_pulses']} pulses passed oqam-ofdm)"
        )
    return EXIT_OK if ok else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="coqam", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def pulse_flags(p, required_gen=False):
        p.add_argument("--gen", choices=("gaussian", "rc", "rect"), required=required_gen, default=None if required_gen else "gaussian")
        p.add_argument("--beta", type=float, default=0.1)
        p.add_argument("--rolloff", type=float, default=0.3)
        p.add_argument("--orthogonalize", action="store_true")

    d = sub.add_parser("design-pulse", help="generate (and optionally orthogonalize) a prototype pulse")
    d.add_argument("--K", type=int, required=True)
    d.add_argument("--M", type=int, required=True)
    pulse_flags(d, required_gen=True)
    d.add_argument("--out", required=True)
    d.set_defaults(func=cmd_design_pulse)

    c = sub.add_parser("check", help="check a pulse file against the orthogonality conditions")
    c.add_argument("--pulse", required=True)
    c.add_argument("--K", type=int)
    c.add_argument("--M", type=int)
    c.add_argument("--tol", type=float, default=DEFAULT_TOL)
    c.add_argument("--family", choices=("oqam-ofdm", "wcp-coqam", "both"), default="both")
    c.add_argument("--out")
    c.set_defaults(func=cmd_check)

    s = sub.add_parser("simulate", help="Monte-Carlo SER sweep over AWGN")
    s.add_argument("--system", choices=("ofdm", "wcp-coqam"), default="wcp-coqam")
    s.add_argument("--pulse", help="pulse file; overrides --gen and fixes K, M")
    s.add_argument("--K", type=int)
    s.add_argument("--M", type=int)
    s.add_argument("--cp-len", type=int, default=0)
    pulse_flags(s)
    s.add_argument("--snr-start", type=float, default=0.0)
    s.add_argument("--snr-stop", type=float, default=12.0)
    s.add_argument("--snr-step", type=float, default=2.0)
    s.add_argument("--target-frame-errors", type=int, default=100)
    s.add_argument("--max-frames", type=int, default=1_000_000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out")
    s.set_defaults(func=cmd_simulate)

    v = sub.add_parser("verify-paper", help="numerical checks of the waveform equivalence and orthogonality transfer")
    v.add_argument("--K", type=int)
    v.add_argument("--M", type=int)
    v.add_argument("--trials", type=int, default=20)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--corrupt-phase", action="store_true", help=argparse.SUPPRESS)
    v.set_defaults(func=cmd_verify_paper)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
