//! Regime classification from the signs of (b11, b22, θ) and the
//! per-coordinate growth of E(Z_t).

use super::DriftParams;

/// Regime tag, determined solely by the signs of (b11, b22, θ).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegimeTag {
    /// b11 > 0, b22 > 0, θ > 0: E(Z_t) converges.
    Subcritical,
    /// min(b11, b22, θ) = 0, all ≥ 0: polynomial growth.
    Critical,
    /// min(b11, b22, θ) < 0: exponential growth.
    Supercritical,
}

impl std::fmt::Display for RegimeTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RegimeTag::Subcritical => write!(f, "subcritical"),
            RegimeTag::Critical => write!(f, "critical"),
            RegimeTag::Supercritical => write!(f, "supercritical"),
        }
    }
}

/// Asymptotic growth of one coordinate of E(Z_t).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CoordGrowth {
    /// Converges to a finite limit (possibly 0).
    Bounded,
    /// Grows like `t^degree`, degree in {1, 2, 3}.
    Polynomial(u32),
    /// Grows like `e^{rate·t}`, rate > 0.
    Exponential(f64),
}

impl CoordGrowth {
    pub fn polynomial_degree(&self) -> Option<u32> {
        match self {
            CoordGrowth::Polynomial(k) => Some(*k),
            _ => None,
        }
    }

    pub fn exponential_rate(&self) -> Option<f64> {
        match self {
            CoordGrowth::Exponential(r) => Some(*r),
            _ => None,
        }
    }
}

/// Per-coordinate growth of E(Z_t) = (E Y1, E Y2, E X).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthDescriptor {
    pub y1: CoordGrowth,
    pub y2: CoordGrowth,
    pub x: CoordGrowth,
}

impl GrowthDescriptor {
    pub fn coords(&self) -> [CoordGrowth; 3] {
        [self.y1, self.y2, self.x]
    }

    /// Index of the fastest-growing coordinate (exponential beats polynomial
    /// beats bounded; ties broken by the first coordinate).
    pub fn dominant_coordinate(&self) -> usize {
        let rank = |g: &CoordGrowth| match g {
            CoordGrowth::Bounded => (0u8, 0.0),
            CoordGrowth::Polynomial(k) => (1, *k as f64),
            CoordGrowth::Exponential(r) => (2, *r),
        };
        let coords = self.coords();
        let mut best = 0;
        for i in 1..3 {
            let (ci, vi) = rank(&coords[i]);
            let (cb, vb) = rank(&coords[best]);
            if (ci, vi) > (cb, vb) {
                best = i;
            }
        }
        best
    }
}

/// Regime tag plus the growth descriptor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeLabel {
    pub tag: RegimeTag,
    pub growth: GrowthDescriptor,
}

/// Internal asymptotic scale of a mean coordinate or of a forcing term.
///
/// `Limit(c)` means convergence to the finite value `c`; `c = NaN` encodes a
/// finite limit that depends on the (unknown) initial mean and is generically
/// nonzero. NaN compares `!= 0.0`, which is exactly the wanted behavior when
/// deciding whether a limiting forcing term keeps pushing a zero-decay
/// coordinate.
#[derive(Debug, Clone, Copy)]
enum Scale {
    Exp(f64),
    Poly(u32),
    Limit(f64),
}

/// Scale of the solution of dE/dt = f(t) − γE given the forcing scale.
///
/// Composition rules, one decay constant at a time:
/// * γ > 0: the degree/rate of the forcing transfers unchanged
///   (∫₀ᵗ e^{−γ(t−s)} s^k ds ~ t^k/γ by the Kronecker lemma; a limiting
///   forcing gives limit f∞/γ);
/// * γ = 0: plain integration bumps a polynomial degree by one (Cesàro), a
///   nonzero limiting forcing gives linear growth, and an integrable forcing
///   leaves a finite, initial-value-dependent limit;
/// * γ < 0: the homogeneous mode e^{−γt} explodes; an exponential forcing can
///   only raise the rate, so the rate is max(−γ, forcing rate).
fn evolve(gamma: f64, forcing: Scale) -> Scale {
    if gamma > 0.0 {
        match forcing {
            Scale::Exp(r) => {
                if r > 0.0 {
                    Scale::Exp(r)
                } else {
                    Scale::Limit(0.0)
                }
            }
            Scale::Poly(k) => Scale::Poly(k),
            Scale::Limit(c) => Scale::Limit(c / gamma),
        }
    } else if gamma == 0.0 {
        match forcing {
            Scale::Exp(r) => Scale::Exp(r),
            Scale::Poly(k) => Scale::Poly(k + 1),
            Scale::Limit(c) => {
                if c != 0.0 {
                    // NaN (generic nonzero) lands here too.
                    Scale::Poly(1)
                } else {
                    Scale::Limit(f64::NAN)
                }
            }
        }
    } else {
        let own = -gamma;
        match forcing {
            Scale::Exp(r) => Scale::Exp(own.max(r)),
            _ => Scale::Exp(own),
        }
    }
}

/// Dominance combination of forcing terms. `terms` are (coefficient, scale)
/// pairs; zero-coefficient terms are dropped. Coefficients of limits are
/// multiplied through so exact cancellations of the limiting part are
/// detected; same-order polynomial or exponential coefficients are assumed
/// generic (no exact cancellation across coordinates).
fn combine(terms: &[(f64, Scale)]) -> Scale {
    let mut best_exp: Option<f64> = None;
    let mut best_poly: Option<u32> = None;
    let mut limit_sum = 0.0f64;
    for &(coeff, scale) in terms {
        if coeff == 0.0 {
            continue;
        }
        match scale {
            Scale::Exp(r) => {
                best_exp = Some(best_exp.map_or(r, |b| b.max(r)));
            }
            Scale::Poly(k) => {
                best_poly = Some(best_poly.map_or(k, |b| b.max(k)));
            }
            Scale::Limit(c) => limit_sum += coeff * c,
        }
    }
    if let Some(r) = best_exp {
        Scale::Exp(r)
    } else if let Some(k) = best_poly {
        Scale::Poly(k)
    } else {
        Scale::Limit(limit_sum)
    }
}

fn to_growth(scale: Scale) -> CoordGrowth {
    match scale {
        Scale::Exp(r) => CoordGrowth::Exponential(r),
        Scale::Poly(k) => CoordGrowth::Polynomial(k.min(3)),
        Scale::Limit(_) => CoordGrowth::Bounded,
    }
}

/// Classify the regime of the drift and derive the per-coordinate growth of
/// E(Z_t). The tag depends only on the signs of (b11, b22, θ); the growth
/// descriptor is computed symbolically by cascading the composition rules
/// through the triangular mean ODE
///
/// ```text
/// dE[Y1]/dt = a1 − b11 E[Y1]
/// dE[Y2]/dt = a2 − b21 E[Y1] − b22 E[Y2]
/// dE[X]/dt  = m − κ1 E[Y1] − κ2 E[Y2] − θ E[X]
/// ```
///
/// never by fitting.
pub fn classify(drift: &DriftParams) -> RegimeLabel {
    let tag = if drift.b11 > 0.0 && drift.b22 > 0.0 && drift.theta > 0.0 {
        RegimeTag::Subcritical
    } else if drift.b11 >= 0.0 && drift.b22 >= 0.0 && drift.theta >= 0.0 {
        RegimeTag::Critical
    } else {
        RegimeTag::Supercritical
    };

    // Coordinate 1: forcing is the constant a1. P(Y1_0 > 0) = 1, so the
    // homogeneous coefficient is positive in the supercritical branch.
    let s1 = if drift.b11 < 0.0 {
        Scale::Exp(-drift.b11)
    } else {
        evolve(drift.b11, Scale::Limit(drift.a1))
    };
    // A vanishing forcing with b11 = 0 leaves E[Y1] pinned at its (positive)
    // initial mean rather than at zero.
    let s1 = match (drift.b11 == 0.0, s1) {
        (true, Scale::Limit(0.0)) => Scale::Limit(f64::NAN),
        (_, s) => s,
    };

    // Coordinate 2: forcing a2 − b21·E[Y1]; both parts are non-negative
    // (a2 ≥ 0, b21 ≤ 0, Y1 ≥ 0), so dominance combination is exact.
    let f2 = combine(&[(1.0, Scale::Limit(drift.a2)), (-drift.b21, s1)]);
    let s2 = if drift.b22 < 0.0 {
        evolve(drift.b22, f2)
    } else {
        let s = evolve(drift.b22, f2);
        match (drift.b22 == 0.0, s) {
            (true, Scale::Limit(0.0)) => Scale::Limit(f64::NAN),
            (_, s) => s,
        }
    };

    // Coordinate 3: forcing m − κ1 E[Y1] − κ2 E[Y2]; κ and m are signed, so
    // only the limiting parts can cancel exactly, and `combine` tracks them.
    let f3 = combine(&[
        (1.0, Scale::Limit(drift.m)),
        (-drift.kappa1, s1),
        (-drift.kappa2, s2),
    ]);
    let s3 = evolve(drift.theta, f3);

    RegimeLabel {
        tag,
        growth: GrowthDescriptor {
            y1: to_growth(s1),
            y2: to_growth(s2),
            x: to_growth(s3),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::reference_model;
    use proptest::prelude::*;

    fn with_bs(b11: f64, b22: f64, theta: f64) -> DriftParams {
        let mut d = reference_model().drift;
        d.b11 = b11;
        d.b22 = b22;
        d.theta = theta;
        d
    }

    #[test]
    fn subcritical_reference_set_is_bounded() {
        let label = classify(&with_bs(1.0, 3.0, 2.0));
        assert_eq!(label.tag, RegimeTag::Subcritical);
        assert_eq!(label.growth.y1, CoordGrowth::Bounded);
        assert_eq!(label.growth.y2, CoordGrowth::Bounded);
        assert_eq!(label.growth.x, CoordGrowth::Bounded);
    }

    #[test]
    fn fully_critical_gives_degrees_1_2_3() {
        let label = classify(&with_bs(0.0, 0.0, 0.0));
        assert_eq!(label.tag, RegimeTag::Critical);
        assert_eq!(label.growth.y1, CoordGrowth::Polynomial(1));
        assert_eq!(label.growth.y2, CoordGrowth::Polynomial(2));
        assert_eq!(label.growth.x, CoordGrowth::Polynomial(3));
        assert_eq!(label.growth.dominant_coordinate(), 2);
    }

    #[test]
    fn single_zero_critical_cascade() {
        // b11 = 0 with positive b22, θ: linear growth transfers through the
        // positive decay constants without degree bumps.
        let label = classify(&with_bs(0.0, 3.0, 2.0));
        assert_eq!(label.tag, RegimeTag::Critical);
        assert_eq!(label.growth.y1, CoordGrowth::Polynomial(1));
        assert_eq!(label.growth.y2, CoordGrowth::Polynomial(1));
        assert_eq!(label.growth.x, CoordGrowth::Polynomial(1));
    }

    #[test]
    fn double_zero_critical_cascade() {
        let label = classify(&with_bs(0.0, 0.0, 2.0));
        assert_eq!(label.tag, RegimeTag::Critical);
        assert_eq!(label.growth.y1, CoordGrowth::Polynomial(1));
        assert_eq!(label.growth.y2, CoordGrowth::Polynomial(2));
        assert_eq!(label.growth.x, CoordGrowth::Polynomial(2));
        assert_eq!(label.growth.dominant_coordinate(), 1);
    }

    #[test]
    fn supercritical_rate_is_negated_parameter() {
        let label = classify(&with_bs(-0.2, 3.0, 2.0));
        assert_eq!(label.tag, RegimeTag::Supercritical);
        assert_eq!(label.growth.y1, CoordGrowth::Exponential(0.2));
        // The cross-feed and leverage propagate the rate downstream.
        assert_eq!(label.growth.y2, CoordGrowth::Exponential(0.2));
        assert_eq!(label.growth.x, CoordGrowth::Exponential(0.2));
    }

    #[test]
    fn supercritical_dominating_rate() {
        // θ < 0 explodes on its own even with stable variance factors.
        let label = classify(&with_bs(1.0, 3.0, -0.7));
        assert_eq!(label.tag, RegimeTag::Supercritical);
        assert_eq!(label.growth.y1, CoordGrowth::Bounded);
        assert_eq!(label.growth.x, CoordGrowth::Exponential(0.7));
        // Two negative rates: the larger one dominates the price coordinate.
        let label = classify(&with_bs(-1.5, 3.0, -0.7));
        assert_eq!(label.growth.x, CoordGrowth::Exponential(1.5));
    }

    #[test]
    fn degenerate_couplings_stay_bounded() {
        // a1 = 0 and b11 = 0: E[Y1] is frozen at its initial mean, which is
        // finite, so a positive b22/θ keeps everything bounded.
        let mut d = with_bs(0.0, 3.0, 2.0);
        d.a1 = 0.0;
        let label = classify(&d);
        assert_eq!(label.tag, RegimeTag::Critical);
        assert_eq!(label.growth.y1, CoordGrowth::Bounded);
        assert_eq!(label.growth.y2, CoordGrowth::Bounded);
        assert_eq!(label.growth.x, CoordGrowth::Bounded);
    }

    /// The declared growth descriptor agrees with a late-window fit of the
    /// analytic mean trajectory: log-log slope for polynomial coordinates,
    /// semi-log slope for exponential ones, within 10%.
    #[test]
    fn growth_descriptor_consistent_with_mean_trajectory() {
        use crate::model::{mean_trajectory, validate, State};
        use crate::numerics::linear_fit;
        use crate::sim::TimeGrid;

        let cases = [
            ((0.0, 3.0, 2.0), 600.0),
            ((0.0, 0.0, 2.0), 600.0),
            ((0.0, 0.0, 0.0), 600.0),
            ((-0.2, 3.0, 2.0), 80.0),
            ((1.0, 3.0, -0.5), 80.0),
        ];
        for ((b11, b22, theta), t_max) in cases {
            let drift = with_bs(b11, b22, theta);
            let model = validate(drift, reference_model().diffusion).unwrap();
            let label = classify(&drift);
            let grid = TimeGrid::new(t_max, 0.5).unwrap();
            let traj = mean_trajectory(&model, State::new(0.5, 0.5, 0.0), &grid);
            for (coord, growth) in label.growth.coords().into_iter().enumerate() {
                let mut xs = Vec::new();
                let mut ys = Vec::new();
                for i in 0..=grid.n_steps {
                    let t = grid.time(i);
                    let v = traj[i][coord].abs();
                    if t < t_max / 2.0 || v < 1e-12 {
                        continue;
                    }
                    match growth {
                        CoordGrowth::Polynomial(_) => {
                            xs.push(t.ln());
                            ys.push(v.ln());
                        }
                        CoordGrowth::Exponential(_) => {
                            xs.push(t);
                            ys.push(v.ln());
                        }
                        CoordGrowth::Bounded => {}
                    }
                }
                match growth {
                    CoordGrowth::Polynomial(k) => {
                        let (slope, _) = linear_fit(&xs, &ys);
                        assert!(
                            (slope - k as f64).abs() < 0.1 * k as f64,
                            "({b11},{b22},{theta}) coord {coord}: fitted {slope} vs degree {k}"
                        );
                    }
                    CoordGrowth::Exponential(r) => {
                        let (slope, _) = linear_fit(&xs, &ys);
                        assert!(
                            (slope - r).abs() < 0.1 * r,
                            "({b11},{b22},{theta}) coord {coord}: fitted {slope} vs rate {r}"
                        );
                    }
                    CoordGrowth::Bounded => {}
                }
            }
        }
    }

    proptest! {
        /// The tag is scale-invariant in (a, m, κ, σ): it only reads the
        /// signs of b11, b22, θ.
        #[test]
        fn tag_scale_invariant(
            scale_a in 1e-3..1e3f64,
            scale_m in 1e-3..1e3f64,
            scale_k in 1e-3..1e3f64,
            b11 in -2.0..2.0f64,
            b22 in -2.0..2.0f64,
            theta in -2.0..2.0f64,
        ) {
            let base = with_bs(b11, b22, theta);
            let mut scaled = base;
            scaled.a1 *= scale_a;
            scaled.a2 *= scale_a;
            scaled.m *= scale_m;
            scaled.kappa1 *= scale_k;
            scaled.kappa2 *= scale_k;
            prop_assert_eq!(classify(&base).tag, classify(&scaled).tag);
        }
    }
}
