use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("quadrature did not converge: estimated error {achieved:.3e} > target {target:.3e}")]
    Quadrature { achieved: f64, target: f64 },

    #[error("field is in the {found:?} frame, expected {expected:?}")]
    FrameMismatch {
        expected: crate::model::Frame,
        found: crate::model::Frame,
    },

    #[error("{what} = {value} outside the available range [{lo}, {hi}]")]
    OutOfRange {
        what: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("CFL condition violated: c*dt = {c_dt:.6e} > dz = {dz:.6e}")]
    Cfl { c_dt: f64, dz: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
