//! Inversion of the one-step link map g_N that connects the tilde parameters
//! of the discrete CLSE to the drift parameters: exponentials invert through
//! logarithms and the 1/N-integral factors are evaluated in closed form,
//! branching on coincident exponents.

use super::EstimateError;
use crate::numerics::{ramp, ramp0_divdiff, ramp0_divdiff2};

/// Apply g_N⁻¹ to a tilde vector in canonical order, recovering
/// τ̌ = (ǎ1, b̌11, ǎ2, b̌21, b̌22, m̌, κ̌1, κ̌2, θ̌).
///
/// The reversion speeds invert as b̌ = −N·log(1 − b̃); the remaining
/// coordinates divide out integral factors of the form ∫₀^{1/N} e^{…u} du,
/// which are elementary but need divided-difference branches when two
/// exponents coincide (tolerance 1e-12 and below is treated as confluent by
/// the evaluation of the divided differences).
pub fn clse_invert_link(tilde: &[f64; 9], n_per_unit: f64) -> Result<[f64; 9], EstimateError> {
    assert!(n_per_unit > 0.0);
    let h = 1.0 / n_per_unit;
    let [ta1, tb11, ta2, tb21, tb22, tm, tk1, tk2, tth] = *tilde;

    let invert_speed = |tv: f64, name: &'static str| -> Result<f64, EstimateError> {
        let arg = 1.0 - tv;
        if arg <= 0.0 {
            return Err(EstimateError::LinkOutOfDomain { name, value: tv });
        }
        Ok(-n_per_unit * arg.ln())
    };
    let b11 = invert_speed(tb11, "b11~")?;
    let b22 = invert_speed(tb22, "b22~")?;
    let theta = invert_speed(tth, "theta~")?;

    // ǎ1 = ã1 / ∫₀ʰ e^{−b11·u} du
    let a1 = ta1 / ramp(0, -b11, h);

    // b̌21 = b̃21 / ∫₀ʰ e^{b22(u−h)} e^{−b11 u} du
    let j = (-b22 * h).exp() * ramp(0, b22 - b11, h);
    let b21 = tb21 / j;

    // ǎ2 = (ã2 + ǎ1·b̌21·D(b11, b22)) / ∫₀ʰ e^{−b22 u} du with
    // D(γ, β) = ∫₀ʰ e^{β(u−h)} ∫₀ᵘ e^{−γw} dw du.
    let dscal = |gamma: f64, beta: f64| (-beta * h).exp() * ramp0_divdiff(beta, beta - gamma, h);
    let a2 = (ta2 + a1 * b21 * dscal(b11, b22)) / ramp(0, -b22, h);

    // κ̌ᵀ = κ̃ᵀ·M⁻¹ with M = ∫₀ʰ e^{θ(u−h)} e^{−b̌u} du, lower triangular:
    let decay = (-theta * h).exp();
    let m11 = decay * ramp(0, theta - b11, h);
    let m22 = decay * ramp(0, theta - b22, h);
    let m21 = -b21 * decay * ramp0_divdiff(theta - b11, theta - b22, h);
    let kappa2 = tk2 / m22;
    let kappa1 = (tk1 - kappa2 * m21) / m11;

    // m̌ = (m̃ + κ̌ᵀ·Dmat·ǎ) / ∫₀ʰ e^{−θu} du with Dmat the matrix analogue
    // of D; its lower-left entry is a second divided difference.
    let d11 = dscal(b11, theta);
    let d22 = dscal(b22, theta);
    let d21 = -b21 * decay * ramp0_divdiff2(theta, theta - b11, theta - b22, h);
    let ka = kappa1 * (d11 * a1) + kappa2 * (d21 * a1 + d22 * a2);
    let m = (tm + ka) / ramp(0, -theta, h);

    Ok([a1, b11, a2, b21, b22, m, kappa1, kappa2, theta])
}
