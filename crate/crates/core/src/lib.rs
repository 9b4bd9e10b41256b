//! Scattering and resonances of one-dimensional Schrodinger operators
//! `-d^2/dx^2 + V` with steplike potentials (`V = V-` far left, `V = V+` far
//! right, `V+ < V-`).
//!
//! Coefficients live on the four-sheeted surface where both `(z - V+)^(1/2)`
//! and `(z - V-)^(1/2)` are single valued; see [`riemann`].

pub mod asymptotics;
pub mod inverse;
pub mod potential;
pub mod resonances;
pub mod riemann;
pub mod scaled;
pub mod scattering;

pub use num_complex::Complex64;
