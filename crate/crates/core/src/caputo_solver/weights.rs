//! Product-integration weights for the kernel (t - s)^{α-1} on a uniform grid.
//!
//! All differences of powers are written as k^p · expm1(p · ln1p(±1/k)) so
//! that the weights keep their relative accuracy for k in the millions.

use crate::real::Real;

/// (1 + u)^p - 1.
#[inline]
fn pow1p_m1<T: Real>(u: T, p: T) -> T {
    (p * u.ln_1p()).exp_m1()
}

/// Rectangle (predictor) weight: (k+1)^α - k^α.
pub(crate) fn rect<T: Real>(alpha: T, k: usize) -> T {
    if k == 0 {
        return T::one();
    }
    let kf = T::from_usize_exact(k);
    kf.powf(alpha) * pow1p_m1(kf.recip(), alpha)
}

/// Interior trapezoidal weight: (k+2)^{α+1} - 2(k+1)^{α+1} + k^{α+1}.
pub(crate) fn trap_interior<T: Real>(alpha: T, k: usize) -> T {
    let p = alpha + T::one();
    if k == 0 {
        return T::lit(2.0).powf(p) - T::lit(2.0);
    }
    let kf = T::from_usize_exact(k);
    let inv = kf.recip();
    kf.powf(p) * (pow1p_m1(inv + inv, p) - T::lit(2.0) * pow1p_m1(inv, p))
}

/// Weight of the initial node for the target node n ≥ 1:
/// (n-1)^{α+1} - (n-1-α) n^α.
pub(crate) fn trap_start<T: Real>(alpha: T, n: usize) -> T {
    debug_assert!(n >= 1);
    let nf = T::from_usize_exact(n);
    let m = nf - T::one();
    // (n-1)^{α+1} = m n^α (1 - 1/n)^α
    let r = pow1p_m1(-nf.recip(), alpha);
    nf.powf(alpha) * (m * r + alpha)
}

/// Weight of the right node of the last panel when the target lies u ≥ 1
/// panels beyond it: (α+1)u(u^α - (u-1)^α) - α(u^{α+1} - (u-1)^{α+1}).
pub(crate) fn trap_end<T: Real>(alpha: T, u: usize) -> T {
    debug_assert!(u >= 1);
    let p = alpha + T::one();
    let uf = T::from_usize_exact(u);
    let minus = -uf.recip();
    let d1 = -uf.powf(alpha) * pow1p_m1(minus, alpha);
    let d2 = -uf.powf(p) * pow1p_m1(minus, p);
    p * uf * d1 - alpha * d2
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_rect(a: f64, k: f64) -> f64 {
        (k + 1.0).powf(a) - k.powf(a)
    }
    fn naive_interior(a: f64, k: f64) -> f64 {
        let p = a + 1.0;
        (k + 2.0).powf(p) - 2.0 * (k + 1.0).powf(p) + k.powf(p)
    }
    fn naive_start(a: f64, n: f64) -> f64 {
        (n - 1.0).powf(a + 1.0) - (n - 1.0 - a) * n.powf(a)
    }
    fn naive_end(a: f64, u: f64) -> f64 {
        let p = a + 1.0;
        p * u * (u.powf(a) - (u - 1.0).powf(a)) - a * (u.powf(p) - (u - 1.0).powf(p))
    }

    #[test]
    fn agree_with_direct_formulas_for_small_indices() {
        for &a in &[0.1, 0.3, 0.5, 0.9] {
            for k in 0..50usize {
                let kf = k as f64;
                assert!((rect(a, k) - naive_rect(a, kf)).abs() < 1e-13);
                assert!((trap_interior(a, k) - naive_interior(a, kf)).abs() < 1e-12);
                if k >= 1 {
                    assert!((trap_start(a, k) - naive_start(a, kf)).abs() < 1e-12, "start {a} {k}");
                    assert!((trap_end(a, k) - naive_end(a, kf)).abs() < 1e-12, "end {a} {k}");
                }
            }
        }
    }

    #[test]
    fn boundary_values() {
        // first step: the start weight is α, the end weight of a one-panel rule is 1
        assert!((trap_start(0.4, 1) - 0.4f64).abs() < 1e-15);
        assert!((trap_end(0.4, 1) - 1.0f64).abs() < 1e-15);
    }

    #[test]
    fn large_index_asymptotics() {
        // c_k ~ α(α+1) k^{α-1}, b_k ~ α k^{α-1}
        let a = 0.5f64;
        let k = 1_000_000usize;
        let kf = k as f64;
        assert!((rect(a, k) / (a * kf.powf(a - 1.0)) - 1.0).abs() < 1e-6);
        assert!((trap_interior(a, k) / (a * (a + 1.0) * kf.powf(a - 1.0)) - 1.0).abs() < 1e-5);
    }

    #[test]
    fn trapezoid_weights_integrate_constants_exactly() {
        // Σ weights · Γ-normalisation must reproduce ∫_0^{t_n} (t_n - s)^{α-1} ds = t_n^α / α
        let a = 0.35f64;
        for n in 1..40usize {
            let mut sum = trap_start(a, n) + 1.0;
            for k in 0..n - 1 {
                sum += trap_interior(a, k);
            }
            let exact = (n as f64).powf(a) * (a + 1.0);
            assert!((sum - exact).abs() < 1e-11 * exact, "n = {n}");
        }
    }
}
