//! Gamma function via the Lanczos approximation (g = 7, nine coefficients).

use crate::real::Real;

use super::MlError;

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Largest argument accepted by [`gamma`]; Γ(171) already exceeds `f64::MAX`.
pub const GAMMA_MAX_ARG: f64 = 170.0;

/// Γ(x) for x ≥ 1/2. The power is split in two halves so that the
/// intermediate t^(x-1/2) does not overflow before e^(-t) is applied.
fn lanczos<T: Real>(x: T) -> T {
    let xm = x - T::one();
    let mut acc = T::lit(LANCZOS[0]);
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        acc = acc + T::lit(c) / (xm + T::from_usize_exact(i));
    }
    let half = T::lit(0.5);
    let t = xm + T::lit(LANCZOS_G) + half;
    let p = t.powf((xm + half) * half);
    (T::TAU()).sqrt() * p * ((-t).exp() * p) * acc
}

/// (n-1)! for integral 1 ≤ x ≤ 30, exact up to 23.
fn small_factorial<T: Real>(x: T) -> Option<T> {
    if x >= T::one() && x <= T::lit(30.0) && x == x.floor() {
        let n = x.to_usize()?;
        Some((1..n).fold(T::one(), |acc, k| acc * T::from_usize_exact(k)))
    } else {
        None
    }
}

fn gamma_unchecked<T: Real>(x: T) -> T {
    if let Some(f) = small_factorial(x) {
        return f;
    }
    if x < T::lit(0.5) {
        T::PI() / ((T::PI() * x).sin() * lanczos(T::one() - x))
    } else {
        lanczos(x)
    }
}

/// Γ(x) for `0 < x ≤ 170`.
pub fn gamma<T: Real>(x: T) -> Result<T, MlError> {
    if !(x > T::zero()) {
        return Err(MlError::GammaDomain(x.as_f64()));
    }
    if x > T::lit(GAMMA_MAX_ARG) {
        return Err(MlError::GammaOverflow(x.as_f64()));
    }
    let g = gamma_unchecked(x);
    if g.is_finite() {
        Ok(g)
    } else {
        Err(MlError::GammaOverflow(x.as_f64()))
    }
}

/// 1/Γ(x) on the whole real line; zero at the poles 0, -1, -2, ...
pub fn rgamma<T: Real>(x: T) -> T {
    if x <= T::zero() && x == x.floor() {
        return T::zero();
    }
    if x < T::lit(0.5) {
        // reflection: 1/Γ(x) = sin(πx) Γ(1-x) / π
        let g = lanczos(T::one() - x);
        (T::PI() * x).sin() * g / T::PI()
    } else {
        let g = gamma_unchecked(x);
        if g.is_finite() {
            T::one() / g
        } else {
            T::zero()
        }
    }
}

/// ln Γ(x) for x > 0.
pub fn ln_gamma<T: Real>(x: T) -> T {
    if x < T::lit(0.5) {
        return (T::PI() / ((T::PI() * x).sin() * lanczos(T::one() - x))).ln();
    }
    let xm = x - T::one();
    let mut acc = T::lit(LANCZOS[0]);
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        acc = acc + T::lit(c) / (xm + T::from_usize_exact(i));
    }
    let half = T::lit(0.5);
    let t = xm + T::lit(LANCZOS_G) + half;
    half * T::TAU().ln() + (xm + half) * t.ln() - t + acc.ln()
}
