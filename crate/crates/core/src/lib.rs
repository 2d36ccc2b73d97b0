//! Positive radial solutions of gradient-dependent elliptic systems on an annulus.
//!
//! The system
//!
//! ```text
//! -Δu = f1(|x|, u, v, |∇u|, |∇v|),   -Δv = f2(|x|, u, v, |∇u|, |∇v|)   in R0 < |x| < R1
//! u = 0 on both spheres,  v = 0 on |x| = R0,  ∂v/∂r = 0 on |x| = R1
//! ```
//!
//! is pulled back to `[0, 1]` ([`geometry`]), written as a fixed-point problem
//! for a Hammerstein operator built on two Green's kernels ([`kernels`],
//! [`operator`]), screened against the cone-compression/expansion
//! conditions ([`hypothesis`]), and solved numerically by damped fixed-point
//! iteration ([`solver`]).

pub mod cli;
pub mod config;
pub mod expr;
pub mod format;
pub mod geometry;
pub mod hypothesis;
pub mod kernels;
pub mod operator;
pub mod presets;
pub mod quadrature;
pub mod scan;
pub mod solver;

pub use expr::{Expr, Point};
pub use geometry::{AnnulusDomain, Extremum};
pub use kernels::{ConeWindow, KernelConstants, KernelKind};
pub use operator::{GridFunction, ReducedSystem};
