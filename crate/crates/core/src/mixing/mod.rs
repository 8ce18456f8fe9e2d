//! Six-wave-mixing conversion: energy and phase matching, the closed-form
//! efficiency, linear response of the medium, two-mode propagation, spectra
//! and bandwidth analysis.

pub mod analytic;
pub mod bandwidth;
pub mod matching;
pub mod propagate;
pub mod response;
pub mod spectra;

pub use analytic::{alpha_bar, coupling_constants, equivalent_coefficients, eta_qe_analytic, MixingConfig};
pub use bandwidth::{extract_bandwidth, Bandwidth, SpectrumShape};
pub use matching::{phase_mismatch, signal_frequency};
pub use propagate::{
    coupled_mode_propagate, coupled_mode_propagate_with, ConversionResult, Mat2, Method, PropagateOptions,
};
pub use response::{linear_response_coefficients, linear_response_with, LinearResponse};
pub use spectra::{
    conversion_efficiency, nonlinear_response_curve, nonlinear_response_point, probe_transmission, signal_spectrum,
    thz_intensity, transmission_spectrum, Abscissa, Medium, Ordinate, ResponsePoint, SpectrumTrace,
};
