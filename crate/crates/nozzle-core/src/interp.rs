//! Interpolation helpers: cubic Lagrange on uniform grids (exact on cubics),
//! its 2-D tensor version, and monotone (Fritsch-Carlson) cubic Hermite
//! interpolation for invertible sampled maps.

use crate::field::Field;

/// Cubic Lagrange interpolation of uniformly spaced samples `values` with
/// spacing `h`, node 0 at coordinate 0. The 4-point stencil is clamped at the
/// ends, so mild extrapolation past the first/last node is permitted.
pub fn cubic_uniform(values: &[f64], h: f64, x: f64) -> f64 {
    let n = values.len();
    assert!(n >= 2, "need at least two samples");
    if n < 4 {
        // fall back to linear on degenerate sample counts
        let t = (x / h).clamp(0.0, (n - 1) as f64);
        let k = (t.floor() as usize).min(n - 2);
        let s = t - k as f64;
        return values[k] * (1.0 - s) + values[k + 1] * s;
    }
    let t = x / h;
    let k = ((t.floor() as isize) - 1).clamp(0, (n - 4) as isize) as usize;
    let s = t - k as f64; // position relative to the stencil start, in units of h
    let w0 = -(s - 1.0) * (s - 2.0) * (s - 3.0) / 6.0;
    let w1 = s * (s - 2.0) * (s - 3.0) / 2.0;
    let w2 = -s * (s - 1.0) * (s - 3.0) / 2.0;
    let w3 = s * (s - 1.0) * (s - 2.0) / 6.0;
    w0 * values[k] + w1 * values[k + 1] + w2 * values[k + 2] + w3 * values[k + 3]
}

/// Tensor cubic Lagrange on a [`Field`]: interpolates along each of the four
/// nearest columns, then across columns. `x` in units of hx from column 0,
/// `y` in units of hy from row 0 (both in physical-coordinate lengths).
pub fn bicubic(field: &Field, hx: f64, hy: f64, x: f64, y: f64) -> f64 {
    let nx = field.nx();
    if nx < 4 {
        // degenerate in x: interpolate the nearest column pair linearly
        let t = (x / hx).clamp(0.0, nx as f64);
        let i = (t.floor() as usize).min(nx.saturating_sub(1));
        let s = t - i as f64;
        let a = cubic_uniform(field.column(i), hy, y);
        let b = cubic_uniform(field.column((i + 1).min(nx)), hy, y);
        return a * (1.0 - s) + b * s;
    }
    let t = x / hx;
    let k = ((t.floor() as isize) - 1).clamp(0, (nx - 3) as isize) as usize;
    let vals = [
        cubic_uniform(field.column(k), hy, y),
        cubic_uniform(field.column(k + 1), hy, y),
        cubic_uniform(field.column(k + 2), hy, y),
        cubic_uniform(field.column(k + 3), hy, y),
    ];
    cubic_uniform(&vals, hx, x - k as f64 * hx)
}

/// Shape-preserving cubic Hermite interpolant (Fritsch-Carlson slopes).
/// Knots must be strictly increasing; evaluation clamps to the knot range.
#[derive(Debug, Clone)]
pub struct MonotoneCubic {
    x: Vec<f64>,
    y: Vec<f64>,
    d: Vec<f64>,
}

impl MonotoneCubic {
    /// Like [`MonotoneCubic::new`] but reports non-increasing knots instead
    /// of panicking (fields read from disk may be arbitrary).
    pub fn try_new(x: Vec<f64>, y: Vec<f64>) -> Result<Self, &'static str> {
        if x.len() < 2 || y.len() != x.len() {
            return Err("need matching knot and value samples, at least two");
        }
        for w in x.windows(2) {
            if w[1] <= w[0] {
                return Err("knots must be strictly increasing");
            }
        }
        Ok(Self::new(x, y))
    }

    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Self {
        let n = x.len();
        assert!(n >= 2 && y.len() == n);
        for w in x.windows(2) {
            assert!(w[1] > w[0], "knots must be strictly increasing");
        }
        let mut delta = vec![0.0; n - 1];
        for i in 0..n - 1 {
            delta[i] = (y[i + 1] - y[i]) / (x[i + 1] - x[i]);
        }
        let mut d = vec![0.0; n];
        if n == 2 {
            d[0] = delta[0];
            d[1] = delta[0];
        } else {
            d[0] = end_slope(x[1] - x[0], x[2] - x[1], delta[0], delta[1]);
            d[n - 1] = end_slope(
                x[n - 1] - x[n - 2],
                x[n - 2] - x[n - 3],
                delta[n - 2],
                delta[n - 3],
            );
            for i in 1..n - 1 {
                if delta[i - 1] * delta[i] <= 0.0 {
                    d[i] = 0.0;
                } else {
                    let h0 = x[i] - x[i - 1];
                    let h1 = x[i + 1] - x[i];
                    let w1 = 2.0 * h1 + h0;
                    let w2 = h1 + 2.0 * h0;
                    d[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
                }
            }
        }
        MonotoneCubic { x, y, d }
    }

    pub fn eval(&self, t: f64) -> f64 {
        let n = self.x.len();
        let t = t.clamp(self.x[0], self.x[n - 1]);
        // binary search for the interval
        let mut lo = 0;
        let mut hi = n - 1;
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if self.x[mid] <= t {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let h = self.x[lo + 1] - self.x[lo];
        let s = (t - self.x[lo]) / h;
        let (y0, y1) = (self.y[lo], self.y[lo + 1]);
        let (d0, d1) = (self.d[lo], self.d[lo + 1]);
        let h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
        let h10 = s * (1.0 - s) * (1.0 - s);
        let h01 = s * s * (3.0 - 2.0 * s);
        let h11 = s * s * (s - 1.0);
        h00 * y0 + h10 * h * d0 + h01 * y1 + h11 * h * d1
    }

    pub fn range(&self) -> (f64, f64) {
        (self.x[0], *self.x.last().unwrap())
    }
}

/// Three-point end-slope formula with the usual shape-preserving clamp.
fn end_slope(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
    let s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if s * d0 <= 0.0 {
        0.0
    } else if d0 * d1 <= 0.0 && s.abs() > 3.0 * d0.abs() {
        3.0 * d0
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn cubic_reproduces_cubics() {
        let h = 0.1;
        let poly = |x: f64| 2.0 - x + 3.0 * x * x - 0.5 * x * x * x;
        let values: Vec<f64> = (0..20).map(|k| poly(k as f64 * h)).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let x = rng.gen_range(0.0..1.9);
            let got = cubic_uniform(&values, h, x);
            assert!((got - poly(x)).abs() < 1e-12, "at {x}: {got} vs {}", poly(x));
        }
        // mild extrapolation stays cubic-exact
        assert!((cubic_uniform(&values, h, -0.05) - poly(-0.05)).abs() < 1e-12);
    }

    #[test]
    fn bicubic_reproduces_biquadratics() {
        let (hx, hy) = (0.25, 0.125);
        let poly = |x: f64, y: f64| 1.0 + x * y + x * x - 2.0 * y * y + 0.3 * x * x * y;
        let f = Field::from_fn(16, 8, |i, j| poly(i as f64 * hx, j as f64 * hy));
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..200 {
            let x = rng.gen_range(0.0..16.0 * hx);
            let y = rng.gen_range(0.0..8.0 * hy);
            let got = bicubic(&f, hx, hy, x, y);
            assert!((got - poly(x, y)).abs() < 1e-11);
        }
    }

    #[test]
    fn monotone_cubic_linear_exact() {
        let x: Vec<f64> = (0..10).map(|k| k as f64 * 0.3).collect();
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v - 1.0).collect();
        let m = MonotoneCubic::new(x, y);
        for k in 0..100 {
            let t = k as f64 * 0.027;
            assert!((m.eval(t) - (2.0 * t - 1.0)).abs() < 1e-13);
        }
    }

    #[test]
    fn monotone_cubic_preserves_monotonicity() {
        let x: Vec<f64> = (0..12).map(|k| k as f64).collect();
        let y = vec![0.0, 0.1, 0.2, 1.8, 2.0, 2.05, 2.1, 3.0, 3.1, 3.15, 4.0, 4.5];
        let m = MonotoneCubic::new(x, y);
        let mut prev = m.eval(0.0);
        for k in 1..=1100 {
            let v = m.eval(k as f64 * 0.01);
            assert!(v >= prev - 1e-12, "interpolant must be nondecreasing");
            prev = v;
        }
    }
}
