//! Simulation and analysis of field reconstruction from dense networks of
//! one-bit sensors with randomized thresholds.
//!
//! The system model: a bounded scalar field `s_t(x)` lives on the unit cube
//! `G = [0,1]^d` and is sampled at snapshots `t = 1..T` by `N` cheap sensors.
//! Sensor `i` at position `x_i` observes `Y_it = s_t(x_i) + Z_it`, where the
//! noise `Z_it` is zero-mean with `|Z| <= b` but otherwise unknown, and emits
//! the single bit `B_it = 1(Y_it > R_it)` against its own uniform random
//! threshold `R_it ~ Unif[-c, c]`, `c = a + b`, where `a` bounds the field.
//! The threshold randomization makes the bit unbiased in a distribution-free
//! sense: `E[B_it] = (s_t(x_i) + c) / (2c)` for every feasible noise law.
//!
//! The cube is partitioned into `L = l^d` supercells, each into `M = m^d`
//! subcells, with `n = N/(LM)` sensors per subcell. Subcells inside a
//! supercell take turns: at snapshot `t` only subcell `((t-1) mod M) + 1`
//! reports, so each sensor transmits `T/M` bits. A fusion center averages
//! the `n` bits it holds for supercell `j` at snapshot `t` and inverts the
//! affine bit mean, `S_hat_tj = 2c * mean - c`, yielding a piecewise-constant
//! field estimate whose pointwise mean squared error obeys
//!
//! ```text
//! MSE(x, t) <= omega_t(sqrt(d) / L^(1/d), x)^2  +  L*M*c^2 / N
//! ```
//!
//! where `omega_t` is the field's local modulus of continuity over `G`. The
//! bias term is spatial variability inside one supercell; the variance term
//! is quantization noise beaten down by averaging. Balancing the two in `L`
//! gives vanishing MSE whenever `N/L -> inf` and `L -> inf`.
//!
//! Module map:
//!
//! * [`fields`]: field models on the unit cube and their moduli of continuity.
//! * [`geometry`]: cube partitioning, sensor deployment, empirical types and
//!   the large-deviation bound for near-uniform occupancy.
//! * [`sensing`]: noise models, threshold models, observation, the one-bit
//!   quantizers (threshold and bit-expansion forms) and their equivalence.
//! * [`coding`]: the subcell schedule, sensor message wire format, batch
//!   files and overhead accounting.
//! * [`reconstruction`]: bit-mean inversion per supercell, the full
//!   sensing-to-estimate pipeline, and the known-dither generalization.
//! * [`analysis`]: MSE bounds, Monte Carlo experiments, scaling-law fits,
//!   normality and convergence checks, and the Cramer-Rao converse.
//! * [`config`], [`manifest`], [`reports`]: the flat key-value experiment
//!   config format, reproducibility manifests, and CSV artifact writers
//!   shared by the `dfrs` command-line tool.

pub mod analysis;
pub mod coding;
pub mod config;
pub mod error;
pub mod fields;
pub mod geometry;
pub mod manifest;
pub mod reconstruction;
pub mod reports;
pub mod seeds;
pub mod sensing;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
