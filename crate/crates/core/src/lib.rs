//! Markov-generator entropy games.
//!
//! Builds f-divergences between continuous-time Markov generators, weighted
//! information centroids over the π-reversible generators, and the
//! Chebyshev center of a finite family, computed as the mixed equilibrium of
//! a two-person zero-sum game by projected subgradient ascent on the dual.
//!
//! ```
//! use entgame::{Distribution, Generator, GeneratorFamily, DivergenceSpec, SolveOptions};
//!
//! let pi = Distribution::uniform(2).unwrap();
//! let a = Generator::from_rows(&[vec![-1.0, 1.0], vec![3.0, -3.0]], 1e-12).unwrap();
//! let b = Generator::from_rows(&[vec![-2.0, 2.0], vec![1.0, -1.0]], 1e-12).unwrap();
//! let family = GeneratorFamily::new(vec![a, b]).unwrap();
//! let report = entgame::solve_game(&DivergenceSpec::Kl, &family, &pi, &SolveOptions::with_iters(2000)).unwrap();
//! assert!(report.gap < 1e-2);
//! assert!(report.weights_avg.get(0) > 0.9);
//! ```

pub mod centroid;
pub mod divergence;
pub mod error;
pub mod generator;
pub mod oracle;
pub mod solver;

pub use centroid::{
    f_projection, f_projection_result, pythagorean_residual, weighted_centroid,
    weighted_centroid_closed, weighted_centroid_generic, CentroidResult, FlatInterval,
    GenericOptions, WeightVector,
};
pub use divergence::{conjugate_duality_check, divergence, DivergenceSpec, ExtNonneg, TvScale};
pub use error::{Error, Result};
pub use generator::{
    detailed_balance_residual, is_reversible, permutation_family, pi_dual,
    power_mean_reversiblization, uniformizable_basis, uniformizable_weights, validate_generator,
    Distribution, Generator, GeneratorFamily, PowerExponent, DEFAULT_TOL,
};
pub use oracle::{oracle_dual_max, oracle_edge_scan, oracle_pure_values, GridSpec};
pub use solver::{
    chebyshev_radius, dual_objective, estimate_b, pure_nash_check, regret_check, simplex_project,
    solve_game, subgradient, tv_centroid_convergence_probe, DualObjectiveState, EquilibriumReport,
    PureNashOutcome, SolveOptions, PURE_NASH_TOL,
};
