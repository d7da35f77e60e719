//! Two-parameter Mittag-Leffler function on the real line.
//!
//! E_{α,β}(z) = Σ_k z^k / Γ(αk + β), with E_α := E_{α,1}.
//!
//! The power series is only usable where its terms stay moderate. On the
//! negative axis the evaluation switches to
//!
//! * the algebraic asymptotic expansion E_{α,β}(z) ~ -Σ_{k≥1} z^{-k} / Γ(β - αk)
//!   for large |z| and α < 1, and
//! * the inverse Laplace transform of s^{α-β} / (s^α - z) folded onto the
//!   negative real axis (plus the pole residues when 1 < α ≤ 2) in between.
//!
//! α = 1 has no branch cut contribution and is handled by the Beta-integral
//! form of E_{1,β}.

mod gamma;

pub use gamma::{gamma, ln_gamma, rgamma, GAMMA_MAX_ARG};

use crate::quad;
use crate::real::Real;

/// Failures of the special-function layer.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MlError {
    #[error("gamma is only defined here for x > 0, got {0}")]
    GammaDomain(f64),
    #[error("gamma overflows for x = {0}")]
    GammaOverflow(f64),
    #[error("invalid Mittag-Leffler parameter {name} = {value}")]
    InvalidParameter { name: &'static str, value: f64 },
    #[error("E_(alpha,beta)(z) overflows at alpha = {alpha}, z = {z}")]
    Overflow { alpha: f64, z: f64 },
    #[error("Mittag-Leffler evaluation did not converge (alpha = {alpha}, beta = {beta}, z = {z}, {regime})")]
    NoConvergence {
        alpha: f64,
        beta: f64,
        z: f64,
        regime: &'static str,
    },
}

/// A validated argument triple for [`ml_eval`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MlQuery<T> {
    alpha: T,
    beta: T,
    z: T,
}

impl<T: Real> MlQuery<T> {
    /// Requires `0 < alpha ≤ 2`, `beta > 0` and a finite `z`.
    pub fn new(alpha: T, beta: T, z: T) -> Result<Self, MlError> {
        if !(alpha > T::zero() && alpha <= T::lit(2.0)) {
            return Err(MlError::InvalidParameter {
                name: "alpha",
                value: alpha.as_f64(),
            });
        }
        if !(beta > T::zero()) || !beta.is_finite() {
            return Err(MlError::InvalidParameter {
                name: "beta",
                value: beta.as_f64(),
            });
        }
        if !z.is_finite() {
            return Err(MlError::InvalidParameter {
                name: "z",
                value: z.as_f64(),
            });
        }
        Ok(Self { alpha, beta, z })
    }

    pub fn alpha(&self) -> T {
        self.alpha
    }

    pub fn beta(&self) -> T {
        self.beta
    }

    pub fn z(&self) -> T {
        self.z
    }
}

/// Which representation [`ml_eval`] uses for a query.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Series,
    Asymptotic,
    /// Branch-cut integral (with residues for α > 1) or the α = 1 Beta integral.
    Integral,
}

const SERIES_TERM_CAP: usize = 500;
const POSITIVE_SERIES_TERM_CAP: usize = 20_000;
/// The negative-axis series is used while the largest term, about e^{|z|^{1/α}}, stays below e^3.
const SERIES_SAFE_EXPONENT: f64 = 3.0;
const QUAD_ABS_TOL: f64 = 1e-15;
const QUAD_REL_TOL: f64 = 1e-13;
const QUAD_MAX_INTERVALS: usize = 4000;

/// E_{α,β}(z).
pub fn ml_eval<T: Real>(q: &MlQuery<T>) -> Result<T, MlError> {
    let MlQuery { alpha, beta, z } = *q;
    if z == T::zero() {
        return Ok(rgamma(beta));
    }
    match regime(q) {
        Regime::Series => {
            if z > T::zero() {
                positive_series(alpha, beta, z)
            } else {
                series(alpha, beta, z, SERIES_TERM_CAP)
            }
        }
        Regime::Asymptotic => Ok(asymptotic(alpha, beta, z).0),
        Regime::Integral => {
            if alpha == T::one() {
                alpha_one(beta, z)
            } else {
                cut_with_recurrence(alpha, beta, -z)
            }
        }
    }
}

/// Shorthand for `ml_eval(&MlQuery::new(alpha, beta, z)?)`.
pub fn mittag_leffler<T: Real>(alpha: T, beta: T, z: T) -> Result<T, MlError> {
    ml_eval(&MlQuery::new(alpha, beta, z)?)
}

/// E_α(-γ t^α), the relaxation profile of D^α y = -γ y.
pub fn ml_decay<T: Real>(alpha: T, gamma: T, t: T) -> Result<T, MlError> {
    if !(alpha > T::zero() && alpha < T::one()) {
        return Err(MlError::InvalidParameter {
            name: "alpha",
            value: alpha.as_f64(),
        });
    }
    if !(gamma > T::zero()) {
        return Err(MlError::InvalidParameter {
            name: "gamma",
            value: gamma.as_f64(),
        });
    }
    if !(t >= T::zero()) {
        return Err(MlError::InvalidParameter {
            name: "t",
            value: t.as_f64(),
        });
    }
    mittag_leffler(alpha, T::one(), -gamma * t.powf(alpha))
}

/// The representation used for `q`.
pub fn regime<T: Real>(q: &MlQuery<T>) -> Regime {
    let MlQuery { alpha, beta, z } = *q;
    if z >= T::zero() {
        return Regime::Series;
    }
    let x = -z;
    if x.powf(alpha.recip()) <= T::lit(SERIES_SAFE_EXPONENT) {
        return Regime::Series;
    }
    if alpha < T::one() && x >= z_big(alpha) {
        let (sum, omitted) = asymptotic(alpha, beta, z);
        if omitted <= T::tol(1e-13) * sum.abs() {
            return Regime::Asymptotic;
        }
    }
    Regime::Integral
}

/// Threshold max(10, 10·5^α) beyond which the asymptotic expansion is tried.
fn z_big<T: Real>(alpha: T) -> T {
    T::lit(10.0).max(T::lit(10.0) * T::lit(5.0).powf(alpha))
}

/// Neumaier-compensated running sum.
#[derive(Default)]
struct Compensated<T> {
    sum: T,
    carry: T,
}

impl<T: Real> Compensated<T> {
    fn add(&mut self, v: T) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.carry = self.carry + ((self.sum - t) + v);
        } else {
            self.carry = self.carry + ((v - t) + self.sum);
        }
        self.sum = t;
    }

    fn value(&self) -> T {
        self.sum + self.carry
    }
}

fn series<T: Real>(alpha: T, beta: T, z: T, cap: usize) -> Result<T, MlError> {
    let mut acc = Compensated::default();
    let mut zk = T::one();
    let stop = T::tol(1e-16);
    for k in 0..cap {
        let arg = alpha * T::from_usize_exact(k) + beta;
        let term = zk * rgamma(arg);
        acc.add(term);
        if k > 2 && term.abs() <= stop * acc.value().abs() {
            return Ok(acc.value());
        }
        zk = zk * z;
        if !zk.is_finite() {
            break;
        }
    }
    Err(MlError::NoConvergence {
        alpha: alpha.as_f64(),
        beta: beta.as_f64(),
        z: z.as_f64(),
        regime: "series",
    })
}

/// Series with all terms positive, evaluated in log space so that large
/// powers and large Gamma values never overflow separately.
fn positive_series<T: Real>(alpha: T, beta: T, z: T) -> Result<T, MlError> {
    if z == T::zero() {
        return Ok(rgamma(beta));
    }
    let limit = T::max_value().ln() - T::lit(5.0);
    if z.powf(alpha.recip()) > limit {
        return Err(MlError::Overflow {
            alpha: alpha.as_f64(),
            z: z.as_f64(),
        });
    }
    if z <= T::lit(5.0) {
        if let Ok(v) = series(alpha, beta, z, SERIES_TERM_CAP) {
            return Ok(v);
        }
    }
    let lnz = z.ln();
    let stop = T::tol(1e-17);
    let mut acc = Compensated::default();
    let mut past_peak = false;
    let mut prev = T::zero();
    for k in 0..POSITIVE_SERIES_TERM_CAP {
        let kf = T::from_usize_exact(k);
        let arg = alpha * kf + beta;
        let term = (kf * lnz - ln_gamma(arg)).exp();
        acc.add(term);
        if term < prev {
            past_peak = true;
        }
        prev = term;
        if past_peak && term <= stop * acc.value() {
            let v = acc.value();
            return if v.is_finite() {
                Ok(v)
            } else {
                Err(MlError::Overflow {
                    alpha: alpha.as_f64(),
                    z: z.as_f64(),
                })
            };
        }
    }
    Err(MlError::NoConvergence {
        alpha: alpha.as_f64(),
        beta: beta.as_f64(),
        z: z.as_f64(),
        regime: "positive series",
    })
}

/// Truncated asymptotic sum with K = floor(10/α) terms, and the magnitude
/// of the first omitted term.
fn asymptotic<T: Real>(alpha: T, beta: T, z: T) -> (T, T) {
    let k_max = (T::lit(10.0) / alpha).floor().to_usize().unwrap_or(1).max(1);
    let zinv = z.recip();
    let mut zk = T::one();
    let mut acc = Compensated::default();
    for k in 1..=k_max {
        zk = zk * zinv;
        acc.add(-zk * rgamma(beta - alpha * T::from_usize_exact(k)));
    }
    zk = zk * zinv;
    let omitted = (zk * rgamma(beta - alpha * T::from_usize_exact(k_max + 1))).abs();
    (acc.value(), omitted)
}

/// E_{α,β}(-x) for β ≥ 1 + α reduced through E_{α,β}(z) = (E_{α,β-α}(z) - 1/Γ(β-α)) / z.
fn cut_with_recurrence<T: Real>(alpha: T, beta: T, x: T) -> Result<T, MlError> {
    if beta >= T::one() + alpha {
        let lower = cut_with_recurrence(alpha, beta - alpha, x)?;
        return Ok((lower - rgamma(beta - alpha)) / (-x));
    }
    let cut = branch_cut(alpha, beta, x)?;
    Ok(cut + pole_residues(alpha, beta, x))
}

/// (1/(απ)) ∫_0^∞ χ^p e^{-χ^{1/α}} (χ sin πβ - x sin π(α-β)) / (χ² + 2xχ cos πα + x²) dχ,
/// p = (1-β)/α, valid for β < 1 + α.
fn branch_cut<T: Real>(alpha: T, beta: T, x: T) -> Result<T, MlError> {
    let pi = T::PI();
    let inv_alpha = alpha.recip();
    let p = (T::one() - beta) * inv_alpha;
    let sin_b = (pi * beta).sin();
    let sin_ab = (pi * (alpha - beta)).sin();
    let cos_a = (pi * alpha).cos();
    let kernel = |chi: T| -> T {
        let num = chi * sin_b - x * sin_ab;
        let den = chi * chi + T::lit(2.0) * x * chi * cos_a + x * x;
        (-chi.powf(inv_alpha)).exp() * num / den
    };
    let chi_max = T::lit(80.0).powf(alpha);
    let mut breaks = vec![T::zero()];
    for b in [x * cos_a.abs(), x, T::one()] {
        if b > T::zero() && b < chi_max {
            breaks.push(b);
        }
    }
    breaks.push(chi_max);
    breaks.sort_by(|a, b| a.partial_cmp(b).expect("finite breakpoints"));
    breaks.dedup();

    let fail = || MlError::NoConvergence {
        alpha: alpha.as_f64(),
        beta: beta.as_f64(),
        z: (-x).as_f64(),
        regime: "branch-cut integral",
    };
    let abs_tol = T::tol(QUAD_ABS_TOL);
    let rel_tol = T::tol(QUAD_REL_TOL);
    let mut total = T::zero();
    for (i, w) in breaks.windows(2).enumerate() {
        let (a, b) = (w[0], w[1]);
        let part = if i == 0 && p < T::zero() {
            // χ = v^{1/(1+p)} removes the integrable χ^p endpoint singularity
            let q = T::one() + p;
            quad::integrate(
                |v: T| kernel(v.powf(q.recip())) / q,
                T::zero(),
                b.powf(q),
                abs_tol,
                rel_tol,
                QUAD_MAX_INTERVALS,
            )
        } else {
            quad::integrate(|c: T| c.powf(p) * kernel(c), a, b, abs_tol, rel_tol, QUAD_MAX_INTERVALS)
        }
        .map_err(|_| fail())?;
        total = total + part;
    }
    Ok(total / (alpha * pi))
}

/// Residues of e^s s^{α-β}/(s^α + x) at s = x^{1/α} e^{±iπ/α}, present for α > 1.
fn pole_residues<T: Real>(alpha: T, beta: T, x: T) -> T {
    if alpha <= T::one() {
        return T::zero();
    }
    let rho = x.powf(alpha.recip());
    let phi = T::PI() / alpha;
    let one_minus_beta = T::one() - beta;
    T::lit(2.0) / alpha
        * rho.powf(one_minus_beta)
        * (rho * phi.cos()).exp()
        * (rho * phi.sin() + one_minus_beta * phi).cos()
}

/// E_{1,β}(z) for z < 0.
fn alpha_one<T: Real>(beta: T, z: T) -> Result<T, MlError> {
    if beta == T::one() {
        return Ok(z.exp());
    }
    if beta < T::one() {
        return Ok(rgamma(beta) + z * alpha_one(beta + T::one(), z)?);
    }
    // E_{1,β}(z) = (1/Γ(β-1)) ∫_0^1 e^{zt} (1-t)^{β-2} dt, with t = 1 - u^{1/(β-1)}
    let q = beta - T::one();
    let inv_q = q.recip();
    let integral = quad::integrate(
        |u: T| (z * (T::one() - u.powf(inv_q))).exp(),
        T::zero(),
        T::one(),
        T::tol(QUAD_ABS_TOL) * T::lit(1e-3),
        T::tol(QUAD_REL_TOL),
        QUAD_MAX_INTERVALS,
    )
    .map_err(|_| MlError::NoConvergence {
        alpha: 1.0,
        beta: beta.as_f64(),
        z: z.as_f64(),
        regime: "alpha = 1 integral",
    })?;
    // 1/(q Γ(q)) = 1/Γ(β)
    Ok(integral * rgamma(beta))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ml(alpha: f64, beta: f64, z: f64) -> f64 {
        mittag_leffler(alpha, beta, z).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn closed_forms() {
        assert!(close(ml(1.0, 1.0, 1.0), std::f64::consts::E, 1e-14));
        assert_eq!(ml(0.5, 1.0, 0.0), 1.0);
        assert!(close(ml(2.0, 1.0, 1.0), 1.0f64.cosh(), 1e-14));
        assert!(close(ml(0.5, 1.0, -1.0), 0.427_583_576_155_807, 1e-12));
        assert!(close(ml(2.0, 1.0, -20.0), 20f64.sqrt().cos(), 1e-10));
        assert!(close(ml(2.0, 2.0, -30.0), 30f64.sqrt().sin() / 30f64.sqrt(), 1e-10));
        assert!(close(ml(1.0, 2.0, -7.0), ((-7.0f64).exp() - 1.0) / -7.0, 1e-12));
    }

    #[test]
    fn decay_profile_examples() {
        assert_eq!(ml_decay(0.5, 1.0, 0.0).unwrap(), 1.0);
        assert!(close(ml_decay(0.5, 1.0, 1.0).unwrap(), 0.427_583_576_155_807, 1e-12));
    }

    #[test]
    fn invalid_queries_are_rejected() {
        assert!(MlQuery::new(0.0, 1.0, 1.0).is_err());
        assert!(MlQuery::new(2.5, 1.0, 1.0).is_err());
        assert!(MlQuery::new(0.5, 0.0, 1.0).is_err());
        assert!(MlQuery::new(0.5, 1.0, f64::NAN).is_err());
        assert!(ml_decay(1.0, 1.0, 1.0).is_err());
        assert!(ml_decay(0.5, -1.0, 1.0).is_err());
    }

    #[test]
    fn overflow_is_reported() {
        assert!(matches!(mittag_leffler(0.1, 1.0, 10.0), Err(MlError::Overflow { .. })));
    }

    #[test]
    fn regimes_are_selected() {
        let q = |a, z| regime(&MlQuery::new(a, 1.0, z).unwrap());
        assert_eq!(q(0.5, -1.0), Regime::Series);
        assert_eq!(q(0.5, 3.0), Regime::Series);
        assert_eq!(q(0.5, -5.0), Regime::Integral);
        assert_eq!(q(0.5, -100.0), Regime::Asymptotic);
        assert_eq!(q(1.5, -100.0), Regime::Integral);
    }
}
