pub mod goursat;
pub mod maxwell_bloch;

pub use goursat::{solve_goursat, GoursatScheme, SchemeOrder};
pub use maxwell_bloch::{project_to_polaritons, solve_maxwell_bloch, MaxwellBlochRun, MaxwellBlochState, MbConfig, MbMedium};
