//! Identification of the time-dependent potential `p(t)` in
//!
//! ```text
//! u_t = u_xx - p(t) u + f(x, t),   0 < x < l,  0 < t <= T,
//! u(x, 0) = φ(x),   u(0, t) = u(l, t) = 0,
//! ∫_0^l u(x, t) ω(x) dx = g(t),
//! ```
//!
//! by a Crank–Nicolson forward solver combined with either a pointwise
//! reconstruction formula ([`integration`]) or a per-level Newton–Raphson
//! solve ([`newton`]).
//!
//! The numerics are generic over [`Scalar`] (`f32`/`f64`); the `*64` and `*32`
//! aliases below name the common instantiations. File I/O and the benchmark
//! drivers in [`bundle`], [`report`] and [`bench`] work in `f64`.

pub mod bench;
pub mod bundle;
pub mod error;
pub mod forward;
pub mod integration;
pub mod metrics;
pub mod model;
pub mod newton;
pub mod noise;
pub mod quadrature;
pub mod report;
pub mod scalar;
pub mod tridiag;

pub use error::{Error, Result};
pub use forward::{assemble_step, solve_forward, step, CrankNicolson};
pub use integration::{reconstruct_p, run_integration};
pub use metrics::{error_report, measured_order, ErrorReport};
pub use model::{make_grid, manufactured_problem, CoefficientTrace, Field, Grid, Manufactured, ProblemData};
pub use newton::{
    newton_step_solve, residual, residual_derivative, run_newton, run_newton_partial, sensitivity_step, NewtonConfig,
    NewtonRun, NewtonStep,
};
pub use noise::{perturb, smooth, NoiseKind, NoiseSpec};
pub use quadrature::weighted_integral;
pub use scalar::Scalar;
pub use tridiag::{thomas_solve, TridiagonalMatrix, TridiagonalSystem};

pub type Grid64 = Grid<f64>;
pub type Field64 = Field<f64>;
pub type Trace64 = CoefficientTrace<f64>;
pub type Problem64 = ProblemData<f64>;
pub type Report64 = ErrorReport<f64>;

pub type Grid32 = Grid<f32>;
pub type Field32 = Field<f32>;
pub type Trace32 = CoefficientTrace<f32>;
pub type Problem32 = ProblemData<f32>;
pub type Report32 = ErrorReport<f32>;

/// Version string written into every CSV header.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
