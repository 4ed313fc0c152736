//! Periodic cubic splines and monotone (Fritsch-Carlson) cubic interpolation.

/// Solves a cyclic tridiagonal system. `sub[i]` multiplies `x[i-1]`
/// (with `sub[0]` multiplying `x[n-1]`), `sup[i]` multiplies `x[i+1]`
/// (with `sup[n-1]` multiplying `x[0]`).
fn solve_cyclic(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let alpha = sup[n - 1];
    let beta = sub[0];
    let gamma = -diag[0];
    let mut bb = diag.to_vec();
    bb[0] -= gamma;
    bb[n - 1] -= alpha * beta / gamma;
    let x = solve_tridiagonal(sub, &bb, sup, rhs);
    let mut u = vec![0.0; n];
    u[0] = gamma;
    u[n - 1] = alpha;
    let z = solve_tridiagonal(sub, &bb, sup, &u);
    let fact = (x[0] + beta * x[n - 1] / gamma) / (1.0 + z[0] + beta * z[n - 1] / gamma);
    x.iter().zip(&z).map(|(xi, zi)| xi - fact * zi).collect()
}

fn solve_tridiagonal(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    c[0] = sup[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let m = diag[i] - sub[i] * c[i - 1];
        c[i] = sup[i] / m;
        d[i] = (rhs[i] - sub[i] * d[i - 1]) / m;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    x
}

/// Interpolating C² periodic cubic spline of vector-valued data on
/// non-uniform knots.
#[derive(Clone, Debug)]
pub struct PeriodicSpline {
    dim: usize,
    knots: Vec<f64>,
    period: f64,
    values: Vec<f64>,
    moments: Vec<f64>,
}

impl PeriodicSpline {
    /// `knots` strictly increasing with `knots[last] < knots[0] + period`;
    /// `values` interleaved, `knots.len() * dim` long.
    pub fn new(knots: Vec<f64>, period: f64, values: Vec<f64>, dim: usize) -> Self {
        let m = knots.len();
        assert!(m >= 3 && values.len() == m * dim);
        let h: Vec<f64> = (0..m)
            .map(|k| if k + 1 < m { knots[k + 1] - knots[k] } else { knots[0] + period - knots[k] })
            .collect();
        let hprev = |k: usize| h[(k + m - 1) % m];
        let sub: Vec<f64> = (0..m).map(hprev).collect();
        let diag: Vec<f64> = (0..m).map(|k| 2.0 * (hprev(k) + h[k])).collect();
        let sup = h.clone();
        let mut moments = vec![0.0; m * dim];
        for d in 0..dim {
            let y = |k: usize| values[(k % m) * dim + d];
            let rhs: Vec<f64> = (0..m)
                .map(|k| {
                    let km = (k + m - 1) % m;
                    6.0 * ((y(k + 1) - y(k)) / h[k] - (y(k) - y(km)) / h[km])
                })
                .collect();
            let sol = solve_cyclic(&sub, &diag, &sup, &rhs);
            for k in 0..m {
                moments[k * dim + d] = sol[k];
            }
        }
        PeriodicSpline { dim, knots, period, values, moments }
    }

    pub fn segments(&self) -> usize {
        self.knots.len()
    }

    /// Parameter interval `[start, end)` of segment `k`.
    pub fn segment_bounds(&self, k: usize) -> (f64, f64) {
        let m = self.knots.len();
        let end = if k + 1 < m { self.knots[k + 1] } else { self.knots[0] + self.period };
        (self.knots[k], end)
    }

    fn coeffs(&self, k: usize, x: f64) -> (f64, f64, f64, usize) {
        let (a, b) = self.segment_bounds(k);
        (b - a, x - a, b - x, (k + 1) % self.knots.len())
    }

    /// Position on segment `k` at parameter `x` (not reduced modulo the period).
    pub fn eval(&self, k: usize, x: f64, out: &mut [f64]) {
        let (h, l, r, k1) = self.coeffs(k, x);
        for d in 0..self.dim {
            let m0 = self.moments[k * self.dim + d];
            let m1 = self.moments[k1 * self.dim + d];
            let y0 = self.values[k * self.dim + d];
            let y1 = self.values[k1 * self.dim + d];
            out[d] = m0 * r * r * r / (6.0 * h)
                + m1 * l * l * l / (6.0 * h)
                + (y0 / h - m0 * h / 6.0) * r
                + (y1 / h - m1 * h / 6.0) * l;
        }
    }

    /// First derivative on segment `k` at parameter `x`.
    pub fn deriv(&self, k: usize, x: f64, out: &mut [f64]) {
        let (h, l, r, k1) = self.coeffs(k, x);
        for d in 0..self.dim {
            let m0 = self.moments[k * self.dim + d];
            let m1 = self.moments[k1 * self.dim + d];
            let y0 = self.values[k * self.dim + d];
            let y1 = self.values[k1 * self.dim + d];
            out[d] = -m0 * r * r / (2.0 * h) + m1 * l * l / (2.0 * h) - (y0 / h - m0 * h / 6.0)
                + (y1 / h - m1 * h / 6.0);
        }
    }

    /// Speed |S'(x)| on segment `k`.
    pub fn speed(&self, k: usize, x: f64, scratch: &mut [f64]) -> f64 {
        self.deriv(k, x, scratch);
        scratch.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// Monotone piecewise-cubic Hermite interpolant (Fritsch-Carlson slopes).
#[derive(Clone, Debug)]
pub struct MonotoneCubic {
    x: Vec<f64>,
    y: Vec<f64>,
    slopes: Vec<f64>,
}

impl MonotoneCubic {
    /// `x` strictly increasing, `y` monotone non-decreasing.
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Self {
        let n = x.len();
        assert!(n >= 2 && y.len() == n);
        let delta: Vec<f64> = (0..n - 1).map(|k| (y[k + 1] - y[k]) / (x[k + 1] - x[k])).collect();
        let mut slopes = vec![0.0; n];
        slopes[0] = delta[0];
        slopes[n - 1] = delta[n - 2];
        for k in 1..n - 1 {
            if delta[k - 1] * delta[k] <= 0.0 {
                slopes[k] = 0.0;
            } else {
                let h0 = x[k] - x[k - 1];
                let h1 = x[k + 1] - x[k];
                let w1 = 2.0 * h1 + h0;
                let w2 = h1 + 2.0 * h0;
                slopes[k] = (w1 + w2) / (w1 / delta[k - 1] + w2 / delta[k]);
            }
        }
        MonotoneCubic { x, y, slopes }
    }

    pub fn eval(&self, t: f64) -> f64 {
        let n = self.x.len();
        let k = match self.x.partition_point(|&v| v <= t) {
            0 => 0,
            p if p >= n => n - 2,
            p => p - 1,
        };
        let h = self.x[k + 1] - self.x[k];
        let s = (t - self.x[k]) / h;
        let s2 = s * s;
        let s3 = s2 * s;
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        h00 * self.y[k] + h10 * h * self.slopes[k] + h01 * self.y[k + 1] + h11 * h * self.slopes[k + 1]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn periodic_spline_interpolates_and_is_accurate() {
        let m = 64;
        let knots: Vec<f64> = (0..m).map(|k| 2.0 * PI * (k as f64 + 0.3 * (k % 2) as f64) / m as f64).collect();
        let values: Vec<f64> = knots.iter().flat_map(|&t| [t.cos(), t.sin()]).collect();
        let s = PeriodicSpline::new(knots.clone(), 2.0 * PI, values, 2);
        let mut out = [0.0; 2];
        for k in 0..m {
            let (a, b) = s.segment_bounds(k);
            s.eval(k, a, &mut out);
            assert!((out[0] - a.cos()).abs() < 1e-14);
            let mid = 0.5 * (a + b);
            s.eval(k, mid, &mut out);
            assert!((out[0] - mid.cos()).abs() < 1e-5);
            assert!((out[1] - mid.sin()).abs() < 1e-5);
            s.deriv(k, mid, &mut out);
            assert!((out[0] + mid.sin()).abs() < 1e-4);
        }
    }

    #[test]
    fn monotone_cubic_preserves_monotonicity() {
        let x = vec![0.0, 1.0, 2.0, 3.0, 4.0];
        let y = vec![0.0, 0.0, 0.1, 5.0, 5.0];
        let p = MonotoneCubic::new(x, y);
        let mut prev = f64::NEG_INFINITY;
        for i in 0..=400 {
            let v = p.eval(i as f64 / 100.0);
            assert!(v >= prev - 1e-15);
            prev = v;
        }
        assert_eq!(p.eval(3.0), 5.0);
    }
}
