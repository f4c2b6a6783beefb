//! Closed-form thermodynamic-limit quantities at half filling.
//!
//! The double occupancy is the semi-infinite oscillatory integral
//!
//! ```text
//! w(U) = ∫_0^∞ J0(ω) J1(ω) / (1 + cosh(Uω/2)) dω
//! ```
//!
//! evaluated by fixed-order Gauss-Legendre on panels delimited by the zeros
//! of J1, with the exponentially decaying tail bounded analytically. The
//! entanglement follows as E_v = -2w log2(w) - 2(1/2-w) log2(1/2-w), and the
//! strong- and weak-coupling series are implemented exactly as printed.

use crate::error::{Error, Result};
use crate::special::{
    bessel_j0_raw, bessel_j1_raw, bessel_j1_zero, entropy_term, gauss_legendre, gl_panel,
    zeta_constant, QuadratureSpec,
};
use std::f64::consts::{LN_2, PI};

/// Below this coupling the weak series is used instead of the integral: the
/// exponential cutoff scale 2/U would need tens of thousands of panels while
/// the series error is already far below any practical tolerance.
const WEAK_SERIES_CUTOFF: f64 = 1e-3;

/// Validity window for the truncated series (chosen so the neglected next
/// term stays below 1e-3; the expansions themselves carry no window).
const STRONG_COUPLING_MIN: f64 = 8.0;
const WEAK_COUPLING_MAX: f64 = 1.0;

/// Which truncated expansion to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SeriesRegime {
    /// Valid for U >= 8.
    StrongCoupling,
    /// Valid for |U| <= 1.
    WeakCoupling,
}

/// 1 / (1 + cosh t) = sech²(t/2) / 2, overflow-free for any t.
fn coth_kernel(t: f64) -> f64 {
    let e = (-0.5 * t.abs()).exp();
    let sech = 2.0 * e / (1.0 + e * e);
    0.5 * sech * sech
}

fn integrand(omega: f64, coupling: f64) -> f64 {
    bessel_j0_raw(omega) * bessel_j1_raw(omega) * coth_kernel(coupling * omega / 2.0)
}

/// Bound on the remaining tail beyond `omega`: |J0 J1| <= 1.02 * 2/(πω) and
/// 1/(1+cosh) <= 2 e^{-Uω/2}, integrated in closed form.
fn tail_bound(coupling: f64, omega: f64) -> f64 {
    let decay = coupling * omega / 2.0;
    if decay > 700.0 {
        return 0.0;
    }
    (8.2 / PI) * (-decay).exp() / (coupling * omega)
}

/// Ground-state double occupancy at half filling, Hellmann-Feynman form.
///
/// Negative couplings are always routed through the exact symmetry
/// w(-U) = 1/2 - w(U) so both signs share one code path.
pub fn double_occupancy_integral(coupling: f64, spec: &QuadratureSpec) -> Result<f64> {
    spec.validate()?;
    if !coupling.is_finite() {
        return Err(Error::domain(format!(
            "double occupancy integral: non-finite coupling {coupling}"
        )));
    }
    if coupling < 0.0 {
        return Ok(0.5 - double_occupancy_integral(-coupling, spec)?);
    }
    if coupling < WEAK_SERIES_CUTOFF {
        return series_double_occupancy(coupling, SeriesRegime::WeakCoupling);
    }

    let (nodes, weights) = gauss_legendre(spec.panel_order);
    let f = |omega: f64| integrand(omega, coupling);

    // Panel boundaries: a geometric ladder below the first J1 zero resolves
    // the e^{-Uω/2} scale when it is much narrower than the zero spacing,
    // then consecutive zeros of J1 delimit one envelope arch each.
    let first_zero = bessel_j1_zero(1);
    let mut cuts: Vec<f64> = Vec::new();
    if coupling > 2.0 {
        let mut t = 0.5 / coupling;
        while t < 0.75 * first_zero {
            cuts.push(t);
            t *= 2.0;
        }
    }
    cuts.push(first_zero);

    let mut sum = 0.0;
    let mut kahan = 0.0;
    let add = |sum: &mut f64, kahan: &mut f64, v: f64| {
        let y = v - *kahan;
        let t = *sum + y;
        *kahan = (t - *sum) - y;
        *sum = t;
    };

    let mut lower = 0.0;
    let mut zero_index = 1;
    let mut panel_value = f64::INFINITY;
    for panel in 0..spec.max_panels {
        let upper = if let Some(&c) = cuts.get(panel) {
            c
        } else {
            zero_index += 1;
            bessel_j1_zero(zero_index)
        };
        panel_value = gl_panel(&f, lower, upper, &nodes, &weights);
        add(&mut sum, &mut kahan, panel_value);
        lower = upper;
        let tail = tail_bound(coupling, upper);
        if panel_value.abs() < 0.5 * spec.abs_tol && tail < 0.5 * spec.abs_tol {
            return Ok(sum);
        }
    }
    Err(Error::QuadratureNonConvergence {
        panels: spec.max_panels,
        partial: sum,
        estimate: panel_value.abs() + tail_bound(coupling, lower),
    })
}

/// Local entanglement at half filling:
/// E_v = -2w log2(w) - 2(1/2 - w) log2(1/2 - w), in bits.
///
/// The spin densities are both 1/2 in the zero-field singlet, so the four
/// populations are (w, 1/2-w, 1/2-w, w) and E_v lies in [1, 2].
pub fn local_entanglement_half_filling(coupling: f64, spec: &QuadratureSpec) -> Result<f64> {
    let w = double_occupancy_integral(coupling, spec)?;
    Ok(2.0 * (entropy_term(w)? + entropy_term(0.5 - w)?))
}

/// Truncated series for the double occupancy, exactly as printed:
///
/// * strong coupling: 4 ln2 / U² - 27 ζ(3) / U⁴ + 375 ζ(5) / U⁶
/// * weak coupling:   1/4 - 7 ζ(3) U / (8π³) - 93 ζ(5) U³ / (2⁹ π⁵)
pub fn series_double_occupancy(coupling: f64, regime: SeriesRegime) -> Result<f64> {
    let z3 = zeta_constant(3)?;
    let z5 = zeta_constant(5)?;
    match regime {
        SeriesRegime::StrongCoupling => {
            if !(coupling >= STRONG_COUPLING_MIN) {
                return Err(Error::domain(format!(
                    "strong-coupling series needs U >= {STRONG_COUPLING_MIN}, got {coupling}"
                )));
            }
            let u2 = coupling * coupling;
            Ok(4.0 * LN_2 / u2 - 27.0 * z3 / (u2 * u2) + 375.0 * z5 / (u2 * u2 * u2))
        }
        SeriesRegime::WeakCoupling => {
            if !(coupling.abs() <= WEAK_COUPLING_MAX) {
                return Err(Error::domain(format!(
                    "weak-coupling series needs |U| <= {WEAK_COUPLING_MAX}, got {coupling}"
                )));
            }
            let pi3 = PI.powi(3);
            let pi5 = PI.powi(5);
            Ok(0.25 - 7.0 * z3 * coupling / (8.0 * pi3)
                - 93.0 * z5 * coupling.powi(3) / (512.0 * pi5))
        }
    }
}

/// Truncated series for the entanglement, exactly as printed:
///
/// * strong coupling: 1 + 16 ln(U) / U²
/// * weak coupling:   2 - (1/ln2) (7 ζ(3) U / (2π³))²
pub fn series_entanglement(coupling: f64, regime: SeriesRegime) -> Result<f64> {
    match regime {
        SeriesRegime::StrongCoupling => {
            if !(coupling >= STRONG_COUPLING_MIN) {
                return Err(Error::domain(format!(
                    "strong-coupling series needs U >= {STRONG_COUPLING_MIN}, got {coupling}"
                )));
            }
            Ok(1.0 + 16.0 * coupling.ln() / (coupling * coupling))
        }
        SeriesRegime::WeakCoupling => {
            if !(coupling.abs() <= WEAK_COUPLING_MAX) {
                return Err(Error::domain(format!(
                    "weak-coupling series needs |U| <= {WEAK_COUPLING_MAX}, got {coupling}"
                )));
            }
            let z3 = zeta_constant(3)?;
            let q = 7.0 * z3 * coupling / (2.0 * PI.powi(3));
            Ok(2.0 - q * q / LN_2)
        }
    }
}

/// Entanglement from the series double occupancy pushed through the exact
/// half-filling formula. In the strong-coupling regime this curve tracks
/// the integral much more closely than the printed asymptote, whose
/// subleading constant is absorbed into the dots.
pub fn series_entanglement_from_occupancy(coupling: f64, regime: SeriesRegime) -> Result<f64> {
    let w = series_double_occupancy(coupling, regime)?;
    Ok(2.0 * (entropy_term(w)? + entropy_term(0.5 - w)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    #[test]
    fn free_point_is_one_quarter() {
        // denominator is 2 and ∫ J0 J1 dω = 1/2
        let w = double_occupancy_integral(0.0, &spec()).unwrap();
        assert!((w - 0.25).abs() < 1e-12);
        let ev = local_entanglement_half_filling(0.0, &spec()).unwrap();
        assert!((ev - 2.0).abs() < 1e-12);
    }

    #[test]
    fn strong_coupling_kills_double_occupancy() {
        let w = double_occupancy_integral(1e4, &spec()).unwrap();
        assert!(w.abs() < 1e-7);
        assert!(w >= 0.0);
        let ev = local_entanglement_half_filling(1e4, &spec()).unwrap();
        assert!((ev - 1.0).abs() < 1e-4);
    }

    #[test]
    fn negative_coupling_symmetry_is_exact() {
        let w_pos = double_occupancy_integral(4.0, &spec()).unwrap();
        let w_neg = double_occupancy_integral(-4.0, &spec()).unwrap();
        assert_eq!(w_neg, 0.5 - w_pos);
        let ev_pos = local_entanglement_half_filling(6.0, &spec()).unwrap();
        let ev_neg = local_entanglement_half_filling(-6.0, &spec()).unwrap();
        assert!((ev_pos - ev_neg).abs() < 1e-10);
    }

    #[test]
    fn attractive_limit_entanglement() {
        let ev = local_entanglement_half_filling(-200.0, &spec()).unwrap();
        assert!((ev - 1.0).abs() < 5e-3);
    }

    #[test]
    fn series_window_enforcement() {
        assert!(series_double_occupancy(20.0, SeriesRegime::WeakCoupling).is_err());
        assert!(series_double_occupancy(4.0, SeriesRegime::StrongCoupling).is_err());
        assert!(series_entanglement(f64::NAN, SeriesRegime::StrongCoupling).is_err());
    }

    #[test]
    fn series_anchor_values() {
        // arithmetic on the printed strong series with the zeta constants
        let w20 = series_double_occupancy(20.0, SeriesRegime::StrongCoupling).unwrap();
        let by_hand = 4.0 * LN_2 / 400.0 - 27.0 * 1.2020569031595943 / 160_000.0
            + 375.0 * 1.0369277551433699 / 6.4e7;
        assert_eq!(w20, by_hand);
        assert!((w20 - 6.7347e-3).abs() < 1e-6);

        assert_eq!(
            series_double_occupancy(0.0, SeriesRegime::WeakCoupling).unwrap(),
            0.25
        );
        assert_eq!(
            series_entanglement(0.0, SeriesRegime::WeakCoupling).unwrap(),
            2.0
        );

        // arithmetic on the printed weak entanglement series at U = 0.2
        let ev = series_entanglement(0.2, SeriesRegime::WeakCoupling).unwrap();
        let q = 7.0 * 1.2020569031595943 * 0.2 / (2.0 * PI.powi(3));
        assert_eq!(ev, 2.0 - q * q / LN_2);
        assert!((ev - (2.0 - 1.0625e-3)).abs() < 1e-7);

        // strong entanglement series recovers the infinite-coupling limit
        let ev_large = series_entanglement(1e6, SeriesRegime::StrongCoupling).unwrap();
        assert!((ev_large - 1.0).abs() < 1e-9);
    }

    #[test]
    fn convergence_error_carries_partial_sum() {
        let tight = QuadratureSpec::new(1e-10, 20, 3).unwrap();
        match double_occupancy_integral(4.0, &tight) {
            Err(Error::QuadratureNonConvergence {
                panels,
                partial,
                estimate,
            }) => {
                assert_eq!(panels, 3);
                assert!(partial.is_finite());
                assert!(estimate > 0.0);
            }
            other => panic!("expected convergence error, got {other:?}"),
        }
    }

    #[test]
    fn entanglement_matches_entropy_of_populations() {
        use crate::entanglement::{von_neumann_entropy, LocalDensityMatrix};
        for &u in &[0.5, 2.0, 4.0, 12.0, -3.0] {
            let w = double_occupancy_integral(u, &spec()).unwrap();
            let ev = local_entanglement_half_filling(u, &spec()).unwrap();
            let rho = LocalDensityMatrix::new(w, 0.5 - w, 0.5 - w, w).unwrap();
            assert!((ev - von_neumann_entropy(&rho)).abs() < 1e-14);
        }
    }
}
