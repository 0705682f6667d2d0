use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("empty reservoir")]
    EmptyReservoir,
    #[error("invalid population: {0}")]
    InvalidPopulation(String),
    #[error("invalid altitude: {0}")]
    InvalidAltitude(f64),
    #[error("invalid ring: {0}")]
    InvalidRing(String),
    #[error("invalid altitude order: eps_l = {eps_l} must be below eps_h = {eps_h}")]
    InvalidAltitudeOrder { eps_l: f64, eps_h: f64 },
    #[error("degenerate occupancy (infinite |β|): n = {n}, N = {total}")]
    DegenerateOccupancy { n: u64, total: u64 },
    #[error("invalid occupation: n = {n} outside 0..={total}")]
    InvalidOccupation { n: u64, total: u64 },
    #[error("infinite cold temperature (β_l = 0)")]
    InfiniteColdTemperature,
    #[error("non-finite inverse temperature")]
    NonFiniteBeta,
    #[error("empty ensemble")]
    EmptyEnsemble,
    #[error("spec/stats mismatch: {0}")]
    Mismatch(String),
    #[error("infeasible or budget too small: {0}")]
    Infeasible(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

impl Error {
    /// Stable machine-readable tag used by the command-line front end.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::EmptyReservoir => "empty_reservoir",
            Error::InvalidPopulation(_) => "invalid_population",
            Error::InvalidAltitude(_) => "invalid_altitude",
            Error::InvalidRing(_) => "invalid_ring",
            Error::InvalidAltitudeOrder { .. } => "invalid_altitude_order",
            Error::DegenerateOccupancy { .. } => "degenerate_occupancy",
            Error::InvalidOccupation { .. } => "invalid_occupation",
            Error::InfiniteColdTemperature => "infinite_cold_temperature",
            Error::NonFiniteBeta => "non_finite_beta",
            Error::EmptyEnsemble => "empty_ensemble",
            Error::Mismatch(_) => "mismatch",
            Error::Infeasible(_) => "infeasible",
            Error::InvalidParameter(_) => "invalid_parameter",
        }
    }
}
