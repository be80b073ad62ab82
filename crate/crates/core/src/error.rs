use alloc::string::String;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid frequency: {0}")]
    InvalidFrequency(String),
    #[error("coupling must be positive, got {0}")]
    NonPositiveCoupling(f64),
    #[error("coupling must lie in (0, 1), got {0}")]
    CouplingOutOfRange(f64),
    #[error("energy {z} is within {dist:e} of the spectrum")]
    NearSpectrum { z: f64, dist: f64 },
    #[error("energy {z} is not inside an open gap")]
    NotInGap { z: f64 },
    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),
    #[error("u*v + beta is near singular (condition estimate {0:e})")]
    NearSingular(f64),
    #[error("gap index {j} outside 1..={max}")]
    GapIndex { j: i64, max: i64 },
    #[error("label ({m}, {n}) is not realizable at {p}/{q}")]
    LabelNotRealizable { m: i64, n: i64, p: u64, q: u64 },
    #[error("root finding failed on [{lo}, {hi}]: {reason}")]
    RootFinding { lo: f64, hi: f64, reason: &'static str },
    #[error("Chambers decomposition residual {0:e} exceeds tolerance")]
    ChambersResidual(f64),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn check_positive(beta: f64) -> Result<()> {
    if beta > 0.0 && beta.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPositiveCoupling(beta))
    }
}

pub(crate) fn check_subcritical(beta: f64) -> Result<()> {
    if beta > 0.0 && beta < 1.0 {
        Ok(())
    } else {
        Err(Error::CouplingOutOfRange(beta))
    }
}
