//! Single-site reduced density matrix and its von Neumann entropy.
//!
//! Charge and spin conservation forbid coherences between the four local
//! states (empty, up, down, doubly occupied), so the reduced matrix is
//! diagonal and fully described by four populations. The exact-
//! diagonalization tests verify the off-diagonal vanishing independently.

use crate::error::{Error, Result};
use crate::special::entropy_term;

/// Diagonal one-site density matrix: populations of the four local states.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LocalDensityMatrix {
    /// Probability of an empty site.
    pub empty: f64,
    /// Probability of a lone up spin.
    pub up: f64,
    /// Probability of a lone down spin.
    pub down: f64,
    /// Probability of double occupancy.
    pub double: f64,
}

impl LocalDensityMatrix {
    /// Build from the four populations, which must already lie in [0, 1]
    /// and sum to one within 1e-12.
    pub fn new(empty: f64, up: f64, down: f64, double: f64) -> Result<Self> {
        const TOL: f64 = 1e-12;
        for (name, p) in [
            ("empty", empty),
            ("up", up),
            ("down", down),
            ("double", double),
        ] {
            if !(p >= -TOL && p <= 1.0 + TOL) {
                return Err(Error::domain(format!(
                    "population `{name}` = {p} outside [0, 1]"
                )));
            }
        }
        let sum = empty + up + down + double;
        if (sum - 1.0).abs() > TOL {
            return Err(Error::domain(format!("populations sum to {sum}, not 1")));
        }
        Ok(LocalDensityMatrix {
            empty: empty.clamp(0.0, 1.0),
            up: up.clamp(0.0, 1.0),
            down: down.clamp(0.0, 1.0),
            double: double.clamp(0.0, 1.0),
        })
    }

    /// Build from the measured double occupancy and the two spin densities:
    /// u+ = <n_up> - w, u- = <n_down> - w, z = 1 - u+ - u- - w.
    ///
    /// Violations beyond 1e-9 signal an upstream solver bug and are
    /// rejected; smaller ones are floating-point noise and get clamped,
    /// then the four entries are renormalized to unit sum.
    pub fn from_populations(double_occ: f64, density_up: f64, density_down: f64) -> Result<Self> {
        const TOL: f64 = 1e-9;
        for (name, v) in [
            ("double occupancy", double_occ),
            ("up density", density_up),
            ("down density", density_down),
        ] {
            if !(v >= -TOL && v <= 1.0 + TOL) {
                return Err(Error::domain(format!("{name} = {v} outside [0, 1]")));
            }
        }
        if double_occ > density_up.min(density_down) + TOL {
            return Err(Error::domain(format!(
                "double occupancy {double_occ} exceeds a spin density \
                 ({density_up}, {density_down})"
            )));
        }
        if density_up + density_down - double_occ > 1.0 + TOL {
            return Err(Error::domain(format!(
                "densities ({density_up}, {density_down}) minus double occupancy \
                 {double_occ} exceed one electron per site"
            )));
        }
        let up = (density_up - double_occ).clamp(0.0, 1.0);
        let down = (density_down - double_occ).clamp(0.0, 1.0);
        let empty = (1.0 - density_up - density_down + double_occ).clamp(0.0, 1.0);
        let double = double_occ.clamp(0.0, 1.0);
        let sum = empty + up + down + double;
        Ok(LocalDensityMatrix {
            empty: empty / sum,
            up: up / sum,
            down: down / sum,
            double: double / sum,
        })
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.empty, self.up, self.down, self.double]
    }
}

/// Von Neumann entropy of the diagonal density matrix, in bits.
///
/// Always in [0, 2]; 2 bits is the maximally mixed four-state limit.
pub fn von_neumann_entropy(rho: &LocalDensityMatrix) -> f64 {
    rho.as_array()
        .iter()
        .map(|&p| entropy_term(p).expect("populations are in [0, 1] by construction"))
        .sum()
}

/// Closed-form entanglement at infinite coupling versus filling n in [0, 1]:
/// -(1-n) log2(1-n) - n log2(n/2), maximal at n = 2/3 with value log2(3).
///
/// Fillings above one are reached through the mirror relation
/// E_v(n) = E_v(2-n) by the caller.
pub fn infinite_u_filling_curve(filling: f64) -> Result<f64> {
    const SLACK: f64 = 1e-12;
    if !(filling >= -SLACK && filling <= 1.0 + SLACK) {
        return Err(Error::domain(format!(
            "infinite-coupling curve needs filling in [0, 1], got {filling}"
        )));
    }
    let n = filling.clamp(0.0, 1.0);
    // -n log2(n/2) = -n log2(n) + n
    Ok(entropy_term(1.0 - n)? + entropy_term(n)? + n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn populations_direct_arithmetic() {
        let rho = LocalDensityMatrix::from_populations(0.1, 0.5, 0.5).unwrap();
        assert!((rho.empty - 0.1).abs() < 1e-15);
        assert!((rho.up - 0.4).abs() < 1e-15);
        assert!((rho.down - 0.4).abs() < 1e-15);
        assert!((rho.double - 0.1).abs() < 1e-15);
        let sum: f64 = rho.as_array().iter().sum();
        assert!((sum - 1.0).abs() < 1e-15);
    }

    #[test]
    fn populations_saturated_and_paired_limits() {
        // saturated magnetization at half filling
        let rho = LocalDensityMatrix::from_populations(0.0, 1.0, 0.0).unwrap();
        assert_eq!(rho.as_array(), [0.0, 1.0, 0.0, 0.0]);
        assert_eq!(von_neumann_entropy(&rho), 0.0);
        // strongly attractive limit: half empty, half doubly occupied
        let rho = LocalDensityMatrix::from_populations(0.5, 0.5, 0.5).unwrap();
        assert_eq!(rho.as_array(), [0.5, 0.0, 0.0, 0.5]);
        assert!((von_neumann_entropy(&rho) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn populations_reject_inconsistent_inputs() {
        assert!(LocalDensityMatrix::from_populations(0.3, 0.2, 0.5).is_err());
        assert!(LocalDensityMatrix::from_populations(-0.1, 0.5, 0.5).is_err());
        assert!(LocalDensityMatrix::from_populations(0.4, 0.9, 0.9).is_err());
        // tiny negative excursions are noise, not errors
        assert!(LocalDensityMatrix::from_populations(-1e-12, 0.5, 0.5).is_ok());
    }

    #[test]
    fn entropy_anchor_values() {
        let max = LocalDensityMatrix::new(0.25, 0.25, 0.25, 0.25).unwrap();
        assert_eq!(von_neumann_entropy(&max), 2.0);
        let mott = LocalDensityMatrix::new(0.0, 0.5, 0.5, 0.0).unwrap();
        assert!((von_neumann_entropy(&mott) - 1.0).abs() < 1e-15);
        let pure = LocalDensityMatrix::new(1.0, 0.0, 0.0, 0.0).unwrap();
        assert_eq!(von_neumann_entropy(&pure), 0.0);
    }

    #[test]
    fn entropy_spin_swap_symmetry() {
        let a = LocalDensityMatrix::new(0.15, 0.55, 0.2, 0.1).unwrap();
        let b = LocalDensityMatrix::new(0.15, 0.2, 0.55, 0.1).unwrap();
        assert_eq!(von_neumann_entropy(&a), von_neumann_entropy(&b));
    }

    #[test]
    fn zero_entropy_iff_one_population_dominates() {
        // the 1e-12 entropy cut and the 1 - 1e-12 population cut cross over
        // between deviations of ~2e-14 and ~1e-12; sampling stays clear of
        // that sliver on both sides
        let pure_side = [0.0, 1e-16, 1e-15];
        let mixed_side = [1e-10, 1e-6, 1e-2, 0.25];
        for &eps in pure_side.iter().chain(&mixed_side) {
            let rho =
                LocalDensityMatrix::new(1.0 - 3.0 * eps, eps, eps, eps).unwrap();
            let tiny_entropy = von_neumann_entropy(&rho) < 1e-12;
            let dominated = rho
                .as_array()
                .iter()
                .filter(|&&p| p > 1.0 - 1e-12)
                .count()
                == 1;
            assert_eq!(tiny_entropy, dominated, "eps = {eps}");
            assert_eq!(tiny_entropy, pure_side.contains(&eps));
        }
    }

    #[test]
    fn infinite_u_curve_anchors() {
        assert_eq!(infinite_u_filling_curve(0.0).unwrap(), 0.0);
        assert!((infinite_u_filling_curve(1.0).unwrap() - 1.0).abs() < 1e-15);
        let peak = infinite_u_filling_curve(2.0 / 3.0).unwrap();
        assert!((peak - 3.0f64.log2()).abs() < 1e-14);
        assert!(infinite_u_filling_curve(1.5).is_err());
        assert!(infinite_u_filling_curve(-0.5).is_err());
    }

    #[test]
    fn infinite_u_curve_stationary_at_two_thirds() {
        // unique interior stationary point, located by the sign change of a
        // central difference
        let h = 1e-6;
        let slope = |n: f64| {
            (infinite_u_filling_curve(n + h).unwrap() - infinite_u_filling_curve(n - h).unwrap())
                / (2.0 * h)
        };
        assert!(slope(2.0 / 3.0 - 1e-3) > 0.0);
        assert!(slope(2.0 / 3.0 + 1e-3) < 0.0);
        // no other sign change on a coarse sweep
        let mut changes = 0;
        let mut prev = slope(0.05);
        for i in 1..=90 {
            let n = 0.05 + 0.01 * i as f64;
            let s = slope(n);
            if s.signum() != prev.signum() {
                changes += 1;
            }
            prev = s;
        }
        assert_eq!(changes, 1);
    }
}
