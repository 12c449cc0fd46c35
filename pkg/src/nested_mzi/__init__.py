"""Coherent-state simulation of a nested Mach-Zehnder interferometer with vibrating mirrors."""
from .optics import (
    BSMatrix,
    CoherentAmp,
    EulerAngles,
    InvalidInputError,
    MirrorSpec,
    apply_bs_coherent,
    bs_matrix,
    mirror_matrix,
)
from .fock import (
    CapacityError,
    FockVector,
    TruncationError,
    coherent_fock_expand,
    fock_bs_output,
    oracle_compare,
)
from .network import (
    ConfigurationError,
    InterferometerConfig,
    Mode,
    Network,
    NetworkError,
    build_network,
    build_setup1,
    build_setup2,
    closed_form_beta,
    closed_form_states,
    phase_relation_residual,
    physical_mismatch,
    propagate,
    verify_phase_relation,
)
from .spectrum import (
    RangeError,
    Spectrum,
    TimeSeries,
    analytic_lines,
    classical_mixture_spectrum,
    peak_report,
    psd,
    quantum_psd_lines,
    sample_detector,
)
from .config import RunConfig

__version__ = "0.1.0"
