//! Small numerical building blocks shared by the physics modules.

mod linalg;
mod lm;
mod quad;
mod roots;

pub use linalg::{solve_complex, solve_real, Mat3};
pub use lm::{fit_lorentzians, LorentzFit, Lorentzian};
pub use quad::{adaptive_simpson, trapezoid, Quadrable, Tolerance};
pub use roots::complex_secant;
