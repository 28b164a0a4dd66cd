//! Numerical tolerances shared by the solver, geometry and partition code.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Primal feasibility.
    pub feas: f64,
    /// Dual feasibility (reduced costs).
    pub dual: f64,
    /// Complementary slackness products.
    pub comp: f64,
    /// Objective agreement.
    pub obj: f64,
    /// Base factor for classifying a variable as zero; scaled by `max(1, ‖b‖∞)`.
    pub zero: f64,
    /// Minimum region radius as a fraction of the search-box diameter.
    pub radius: f64,
    /// Work-list pop cap for the partition loop.
    pub max_pops: usize,
    /// Simplex iteration cap.
    pub max_iter: usize,
    /// Intermediate row cap for Fourier–Motzkin elimination.
    pub fm_rows: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            feas: 1e-8,
            dual: 1e-8,
            comp: 1e-8,
            obj: 1e-7,
            zero: 1e-9,
            radius: 1e-7,
            max_pops: 50_000,
            max_iter: 50_000,
            fm_rows: 20_000,
        }
    }
}

impl Tolerances {
    /// Zero threshold for a right-hand side `b`.
    pub fn zero_for(&self, b: &[f64]) -> f64 {
        let bmax = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        self.zero * bmax.max(1.0)
    }
}
