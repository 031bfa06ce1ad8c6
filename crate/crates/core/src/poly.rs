//! Dense univariate polynomials in monomial form and robust real root search on an interval.

#[derive(Debug, Clone, PartialEq)]
pub struct Poly {
    /// Ascending coefficients c_0 + c_1 s + ...
    pub coeffs: Vec<f64>,
}

impl Poly {
    pub fn new(coeffs: Vec<f64>) -> Self {
        let mut p = Self { coeffs };
        if p.coeffs.is_empty() {
            p.coeffs.push(0.0);
        }
        p
    }

    /// Linear combination Σ a_i p_i of polynomials.
    pub fn combination(polys: &[Vec<f64>], weights: &[f64]) -> Self {
        let len = polys.iter().map(Vec::len).max().unwrap_or(1);
        let mut c = vec![0.0; len];
        for (p, &w) in polys.iter().zip(weights) {
            for (k, &pk) in p.iter().enumerate() {
                c[k] += w * pk;
            }
        }
        Self::new(c)
    }

    pub fn eval(&self, s: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * s + c)
    }

    pub fn eval_with_deriv(&self, s: f64) -> (f64, f64) {
        let mut p = 0.0;
        let mut d = 0.0;
        for &c in self.coeffs.iter().rev() {
            d = d * s + p;
            p = p * s + c;
        }
        (p, d)
    }

    pub fn derivative(&self) -> Poly {
        if self.coeffs.len() <= 1 {
            return Poly::new(vec![0.0]);
        }
        Poly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| k as f64 * c)
                .collect(),
        )
    }

    fn scale(&self) -> f64 {
        self.coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()))
    }

    /// Degree after discarding leading coefficients negligible against the largest one.
    pub fn effective_degree(&self) -> usize {
        let s = self.scale();
        if s == 0.0 {
            return 0;
        }
        let mut d = self.coeffs.len() - 1;
        while d > 0 && self.coeffs[d].abs() <= 1e-15 * s {
            d -= 1;
        }
        d
    }

    /// Minimum and maximum on [a, b].
    pub fn range_on(&self, a: f64, b: f64) -> (f64, f64) {
        let mut lo = self.eval(a).min(self.eval(b));
        let mut hi = self.eval(a).max(self.eval(b));
        for c in self.derivative().roots_in(a, b) {
            let v = self.eval(c);
            lo = lo.min(v);
            hi = hi.max(v);
        }
        (lo, hi)
    }

    /// All real roots in [a, b], ascending, including tangential ones.
    pub fn roots_in(&self, a: f64, b: f64) -> Vec<f64> {
        let deg = self.effective_degree();
        let scale = self.scale();
        if scale == 0.0 || deg == 0 {
            return Vec::new();
        }
        let c = &self.coeffs;
        let mut roots = match deg {
            1 => vec![-c[0] / c[1]],
            2 => quadratic_roots(c[0], c[1], c[2]),
            _ => self.roots_general(a, b, deg, scale),
        };
        roots.retain(|r| r.is_finite() && *r >= a - 1e-14 && *r <= b + 1e-14);
        for r in roots.iter_mut() {
            *r = r.clamp(a, b);
        }
        roots.sort_by(|x, y| x.partial_cmp(y).unwrap());
        roots.dedup_by(|x, y| (*x - *y).abs() <= 1e-12 * (b - a).max(1e-300));
        roots
    }

    fn roots_general(&self, a: f64, b: f64, deg: usize, scale: f64) -> Vec<f64> {
        let crit = self.derivative().roots_in(a, b);
        let m = 8 * deg;
        let mut grid: Vec<f64> = (0..=m)
            .map(|j| {
                let th = std::f64::consts::PI * j as f64 / m as f64;
                0.5 * (a + b) - 0.5 * (b - a) * th.cos()
            })
            .collect();
        grid.extend_from_slice(&crit);
        grid.sort_by(|x, y| x.partial_cmp(y).unwrap());
        let vtol = 1e-13 * scale;
        let mut roots = Vec::new();
        let vals: Vec<f64> = grid.iter().map(|&s| self.eval(s)).collect();
        for (j, (&s, &v)) in grid.iter().zip(&vals).enumerate() {
            if v == 0.0 {
                roots.push(s);
            }
            if j + 1 < grid.len() {
                let v1 = vals[j + 1];
                if v * v1 < 0.0 {
                    roots.push(self.refine(grid[j], grid[j + 1], v));
                }
            }
        }
        for &s in &crit {
            if self.eval(s).abs() <= vtol {
                roots.push(s);
            }
        }
        roots
    }

    /// Safeguarded Newton on a bracket [lo, hi] with a sign change.
    fn refine(&self, mut lo: f64, mut hi: f64, flo: f64) -> f64 {
        let sign_lo = flo.signum();
        let mut x = 0.5 * (lo + hi);
        for _ in 0..100 {
            let (f, d) = self.eval_with_deriv(x);
            if f == 0.0 {
                return x;
            }
            if f.signum() == sign_lo {
                lo = x;
            } else {
                hi = x;
            }
            let mut xn = if d != 0.0 { x - f / d } else { f64::NAN };
            if !(xn > lo && xn < hi) {
                xn = 0.5 * (lo + hi);
            }
            if (xn - x).abs() < 1e-13 * (1.0 + x.abs()) || (hi - lo) < 1e-13 {
                return xn;
            }
            x = xn;
        }
        x
    }
}

fn quadratic_roots(c: f64, b: f64, a: f64) -> Vec<f64> {
    let disc = b * b - 4.0 * a * c;
    let tol = 1e-14 * (b * b).max((4.0 * a * c).abs()).max(f64::MIN_POSITIVE);
    if disc < -tol {
        return Vec::new();
    }
    if disc.abs() <= tol {
        return vec![-b / (2.0 * a)];
    }
    let sgn = if b >= 0.0 { 1.0 } else { -1.0 };
    let q = -0.5 * (b + sgn * disc.sqrt());
    let (r1, r2) = if q != 0.0 { (q / a, c / q) } else { (0.0, 0.0) };
    vec![r1.min(r2), r1.max(r2)]
}
