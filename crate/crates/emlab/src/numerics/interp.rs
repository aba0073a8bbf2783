//! Monotone piecewise-cubic interpolation (Fritsch–Carlson derivatives).
//!
//! Used for the drift-removal map, whose tabulated values are strictly
//! increasing; the limiter guarantees the interpolant is monotone too, so
//! it can be inverted by bracketed bisection.

pub(crate) struct MonotoneCubic {
    x: Vec<f64>,
    y: Vec<f64>,
    /// Node derivatives after the monotonicity limiter.
    d: Vec<f64>,
}

impl MonotoneCubic {
    /// Build from strictly increasing `x` and strictly increasing `y`.
    pub(crate) fn new(x: Vec<f64>, y: Vec<f64>) -> Self {
        assert_eq!(x.len(), y.len());
        assert!(x.len() >= 2);
        let n = x.len();
        let mut secant = vec![0.0; n - 1];
        for i in 0..n - 1 {
            secant[i] = (y[i + 1] - y[i]) / (x[i + 1] - x[i]);
        }
        let mut d = vec![0.0; n];
        d[0] = secant[0];
        d[n - 1] = secant[n - 2];
        for i in 1..n - 1 {
            let (s0, s1) = (secant[i - 1], secant[i]);
            if s0 * s1 <= 0.0 {
                d[i] = 0.0;
            } else {
                // Weighted harmonic mean; stays within 3x of both secants,
                // which is the Fritsch-Carlson monotonicity box.
                let h0 = x[i] - x[i - 1];
                let h1 = x[i + 1] - x[i];
                let w0 = 2.0 * h1 + h0;
                let w1 = h1 + 2.0 * h0;
                d[i] = (w0 + w1) / (w0 / s0 + w1 / s1);
            }
        }
        Self { x, y, d }
    }

    pub(crate) fn x_min(&self) -> f64 {
        self.x[0]
    }

    pub(crate) fn x_max(&self) -> f64 {
        *self.x.last().unwrap()
    }

    pub(crate) fn y_min(&self) -> f64 {
        self.y[0]
    }

    pub(crate) fn y_max(&self) -> f64 {
        *self.y.last().unwrap()
    }

    fn segment_of_x(&self, x: f64) -> usize {
        let i = self.x.partition_point(|&t| t <= x);
        i.clamp(1, self.x.len() - 1) - 1
    }

    /// Evaluate at `x` inside the tabulated range (exact at nodes).
    pub(crate) fn eval(&self, x: f64) -> f64 {
        let i = self.segment_of_x(x);
        if x == self.x[i] {
            return self.y[i];
        }
        let h = self.x[i + 1] - self.x[i];
        let t = (x - self.x[i]) / h;
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * self.y[i] + h10 * h * self.d[i] + h01 * self.y[i + 1] + h11 * h * self.d[i + 1]
    }

    /// Invert the (monotone) interpolant: find `x` with `eval(x) = target`
    /// to within `value_tol` in the ordinate.
    pub(crate) fn inverse(&self, target: f64, value_tol: f64) -> f64 {
        let j = self.y.partition_point(|&v| v <= target);
        let i = j.clamp(1, self.y.len() - 1) - 1;
        if target == self.y[i] {
            return self.x[i];
        }
        let (mut lo, mut hi) = (self.x[i], self.x[i + 1]);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let v = self.eval(mid);
            if (v - target).abs() <= 0.5 * value_tol {
                return mid;
            }
            if v < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(f: impl Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> MonotoneCubic {
        let x: Vec<f64> = (0..=n)
            .map(|i| lo + (hi - lo) * i as f64 / n as f64)
            .collect();
        let y: Vec<f64> = x.iter().map(|&t| f(t)).collect();
        MonotoneCubic::new(x, y)
    }

    #[test]
    fn reproduces_nodes_exactly() {
        let c = table(|x| x.exp(), -1.0, 1.0, 16);
        assert_eq!(c.eval(-1.0), (-1.0f64).exp());
        assert_eq!(c.eval(0.875), (0.875f64).exp());
    }

    #[test]
    fn interpolates_smooth_monotone_data_accurately() {
        let c = table(|x| x.exp(), -1.0, 1.0, 512);
        for k in 0..100 {
            let x = -1.0 + 2.0 * (k as f64 + 0.32) / 100.0;
            assert!((c.eval(x) - x.exp()).abs() < 1e-9, "x={x}");
        }
    }

    #[test]
    fn interpolant_is_monotone_between_nodes() {
        let c = table(|x| x + 0.5 * (3.0 * x).sin().abs(), 0.0, 4.0, 64);
        let mut prev = c.eval(0.0);
        for k in 1..=4000 {
            let v = c.eval(4.0 * k as f64 / 4000.0);
            assert!(v >= prev - 1e-14);
            prev = v;
        }
    }

    #[test]
    fn inverse_round_trips() {
        let c = table(|x| x.exp(), -1.0, 1.0, 128);
        for k in 0..50 {
            let z = c.y_min() + (c.y_max() - c.y_min()) * (k as f64 + 0.4) / 50.0;
            let x = c.inverse(z, 1e-12);
            assert!((c.eval(x) - z).abs() <= 1e-12);
        }
    }
}
