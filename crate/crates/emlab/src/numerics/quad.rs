//! Adaptive Simpson quadrature with mandatory breakpoints.
//!
//! Integrands here are smooth except at declared breakpoints (coefficient
//! jumps and kinks). The range is split at every declared breakpoint and
//! each smooth piece is integrated adaptively. Endpoint samples adjacent
//! to a breakpoint are nudged inward by a relative 1e-12 so the rule sees
//! the one-sided limit rather than the (arbitrary) value at the jump; the
//! nudge perturbs the integral by less than the tolerance budget.

/// Maximum recursion depth. Reaching it means an undeclared jump; the
/// current Simpson/trapezoid estimate is accepted as a fallback.
const MAX_DEPTH: u32 = 48;

/// Adaptive Simpson on a smooth interval with Richardson correction.
pub(crate) fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = (b - a) * (fa + 4.0 * fm + fb) / 6.0;
    simpson_step(f, a, m, b, fa, fm, fb, whole, tol, MAX_DEPTH)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    m: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) * (fa + 4.0 * flm + fm) / 6.0;
    let right = (b - m) * (fm + 4.0 * frm + fb) / 6.0;
    let delta = left + right - whole;
    // Interval too narrow to split further: accept the refined estimate.
    if depth == 0 || delta.abs() <= 15.0 * tol || lm <= a || rm >= b {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, lm, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_step(f, m, rm, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Integrate `f` over `[a, b]` (a < b), splitting at every breakpoint that
/// falls strictly inside the range. Pieces touching a breakpoint sample the
/// one-sided limit via an inward nudge.
pub(crate) fn integrate_with_breakpoints<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    breakpoints: &[f64],
    tol: f64,
) -> f64 {
    debug_assert!(a <= b);
    if a == b {
        return 0.0;
    }
    let mut cuts: Vec<f64> = breakpoints
        .iter()
        .copied()
        .filter(|&p| p > a && p < b)
        .collect();
    cuts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    cuts.dedup();

    let mut total = 0.0;
    let mut lo = a;
    let mut lo_is_cut = false;
    for cut in cuts.into_iter().chain(std::iter::once(b)) {
        let hi = cut;
        let hi_is_cut = hi != b;
        let width = hi - lo;
        if width > 0.0 {
            let nudge = 1e-12 * width;
            let lo_s = if lo_is_cut { lo + nudge } else { lo };
            let hi_s = if hi_is_cut { hi - nudge } else { hi };
            total += adaptive_simpson(f, lo_s, hi_s, tol);
        }
        lo = hi;
        lo_is_cut = true;
    }
    total
}

/// Fixed-order composite Simpson with `2 * panels` subintervals. Used where
/// a cheap deterministic rule on a short smooth segment is enough.
pub(crate) fn simpson_fixed<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, panels: usize) -> f64 {
    if a == b {
        return 0.0;
    }
    let n = 2 * panels.max(1);
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + i as f64 * h);
    }
    acc * h / 3.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let f = |x: f64| 3.0 * x * x - 2.0 * x + 1.0;
        let got = adaptive_simpson(&f, -1.0, 2.0, 1e-12);
        // Antiderivative x^3 - x^2 + x.
        let want = (8.0 - 4.0 + 2.0) - (-1.0 - 1.0 - 1.0);
        assert!((got - want).abs() < 1e-12);
    }

    #[test]
    fn oscillatory_integrand_converges() {
        let f = |x: f64| (10.0 * x).sin();
        let got = adaptive_simpson(&f, 0.0, 1.0, 1e-12);
        let want = (1.0 - (10.0f64).cos()) / 10.0;
        assert!((got - want).abs() < 1e-10);
    }

    #[test]
    fn breakpoint_split_handles_a_jump() {
        // Unit step at 0: integral over [-1, 2] is 2.
        let f = |x: f64| if x >= 0.0 { 1.0 } else { 0.0 };
        let got = integrate_with_breakpoints(&f, -1.0, 2.0, &[0.0], 1e-12);
        assert!((got - 2.0).abs() < 1e-10, "got {got}");
    }

    #[test]
    fn declared_kinks_keep_full_accuracy() {
        let f = |x: f64| x.abs().min(1.0);
        let got = integrate_with_breakpoints(&f, -2.0, 2.0, &[-1.0, 0.0, 1.0], 1e-12);
        assert!((got - 3.0).abs() < 1e-11);
    }

    #[test]
    fn fixed_simpson_matches_on_smooth_data() {
        let f = |x: f64| x.exp();
        let got = simpson_fixed(&f, 0.0, 1.0, 64);
        assert!((got - (1f64.exp() - 1.0)).abs() < 1e-10);
    }
}
