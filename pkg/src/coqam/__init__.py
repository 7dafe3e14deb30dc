"""OQAM-OFDM / WCP-COQAM modem with Zak-domain pulse orthogonalization."""

from coqam.frame import (
    FrameParams,
    destagger,
    make_frame_params,
    phase_term,
    qpsk_decide,
    random_qpsk,
    stagger,
)
from coqam.pulses import (
    Pulse,
    gen_gaussian,
    gen_raised_cosine,
    gen_rectangular,
    normalize_energy,
)
from coqam.zak import ZakMatrix, dzt, idzt, orthogonalize_oqam
from coqam.orthogonality import (
    OrthReport,
    check_oqam_ofdm,
    check_wcp_coqam,
    gram_oracle,
    s_beta_gamma,
    verify_appendix_b_identity,
)
from coqam.modem import (
    Waveform,
    add_cp,
    mf_receive_wcp,
    ofdm_baseline_rx,
    ofdm_baseline_tx,
    remove_cp,
    synth_oqam_ofdm,
    synth_wcp_phase,
    synth_wcp_staggered,
)
from coqam.channel import (
    PulseSpec,
    SimConfig,
    SweepResult,
    awgn,
    psd_estimate,
    run_ser,
    theoretical_qpsk_ser,
)

__version__ = "0.1.0"
