//! Length–twist spectra of hyperbolic surfaces and the exact machinery
//! around them: geodesic weights and total weights, almost-conjugacy,
//! primitive discrepancies with their minimal-length and forced-growth
//! identities, the necklace family of equal-weight solutions, truncated
//! spectral Dirichlet series, flat torus quotient spectra, and a word
//! enumerator producing spectra from matrix generators.

#![allow(clippy::result_large_err)]

pub mod arith;
pub mod dirichlet;
pub mod discrepancy;
pub mod flat;
pub mod hyperbolic;
pub mod io;
pub mod length;
pub mod scenario;
pub mod spectrum;

pub use discrepancy::{
    discrepancy, forced_growth, lemma1_residual, odd_prime_multiples, support_sets,
    DiscrepancyError, DiscrepancyTable, ForcedGrowth, SupportSets,
};
pub use length::{LengthValue, Weight, DEFAULT_EPSILON};
pub use scenario::{
    asymptotic_ratio, build_scenario, mobius, necklace_count, necklace_count_oracle,
    verify_constraint, ScenarioError, ScenarioSolution,
};
pub use spectrum::{
    almost_conjugate, compare_weights, pgt_jump_report, weight, CountingFunction, GeodesicEntry,
    LengthTwistSpectrum, Orientation, SpectrumError,
};
