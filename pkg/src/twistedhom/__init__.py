"""Hong-Ou-Mandel imaging with twisted photon pairs."""

__version__ = "0.1.0"

from ._backend import available as available_backends, use_backend
from .core_math import QuadratureRule, bessel_j, gauss_legendre, integrate_2d_polar
from .errors import (
    ConfigError,
    ContractError,
    DomainError,
    EvaluationError,
    FormatError,
    TwistedHomError,
    UnsupportedConfigurationError,
    WindowError,
)
from .hom import (
    DipScan,
    HomProbabilities,
    KGrid,
    hom_dip_scan,
    hom_probabilities_analytic,
    hom_probabilities_masked,
    hom_probabilities_numeric,
)
from .imaging import (
    ImagingState,
    OverlapIntegrals,
    ScalarImage,
    SensorGrid,
    coincidence_port_c,
    coincidence_port_d,
    density_port_d,
    encryption_roundtrip,
    mach_zehnder_density,
    overlap_integrals,
    rescaled_signal,
    snr_coherent,
    snr_two_photon,
)
from .masks import PhaseMask
from .states import (
    DEFAULT_ENVELOPE,
    BesselGaussEnvelope,
    Family,
    TwistedMode,
    TwoPhotonState,
    coherence_area,
    eta_tilde_closed,
    eta_tilde_quadrature,
    reflect_mode,
    reflect_position,
    saf_envelope,
    transverse_profile,
    xi_cd,
)
