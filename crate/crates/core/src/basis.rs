//! One-dimensional quadrature rules and Lagrange bases on the reference interval [0, 1].

/// Gauss-Legendre rule with `n` points on [0, 1].
#[derive(Debug, Clone)]
pub struct GaussRule {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss rule needs at least one point");
        let mut points = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, z);
                dp = d;
                let dz = p / d;
                z -= dz;
                if dz.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, z);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - z * z) * dp * dp);
            points[i] = 0.5 * (1.0 - z);
            points[n - 1 - i] = 0.5 * (1.0 + z);
            weights[i] = 0.5 * w;
            weights[n - 1 - i] = 0.5 * w;
        }
        Self { points, weights }
    }

    /// Rule with the fewest points integrating polynomials of degree `exactness` exactly.
    pub fn with_exactness(exactness: usize) -> Self {
        Self::new(exactness / 2 + 1)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Points and weights mapped to [a, b].
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let l = b - a;
        self.points
            .iter()
            .zip(&self.weights)
            .map(move |(&p, &w)| (a + l * p, l * w))
    }
}

/// Legendre polynomial P_n and its derivative at z in [-1, 1].
fn legendre(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Gauss-Lobatto points of order `k` (k + 1 points including both endpoints) on [0, 1].
pub fn gauss_lobatto_points(k: usize) -> Vec<f64> {
    match k {
        0 => vec![0.5],
        1 => vec![0.0, 1.0],
        _ => {
            let mut pts = vec![0.0; k + 1];
            pts[k] = 1.0;
            // interior points are the roots of P_k'
            for i in 1..k {
                let mut z = -(std::f64::consts::PI * i as f64 / k as f64).cos();
                for _ in 0..100 {
                    let (p, d) = legendre(k, z);
                    // P_k'' from the Legendre ODE
                    let d2 = (2.0 * z * d - (k * (k + 1)) as f64 * p) / (1.0 - z * z);
                    let dz = d / d2;
                    z -= dz;
                    if dz.abs() < 1e-16 {
                        break;
                    }
                }
                pts[i] = 0.5 * (1.0 + z);
            }
            pts
        }
    }
}

/// Lagrange basis on a fixed node set.
#[derive(Debug, Clone)]
pub struct Lagrange1D {
    nodes: Vec<f64>,
    inv_denom: Vec<f64>,
}

impl Lagrange1D {
    pub fn new(nodes: Vec<f64>) -> Self {
        let n = nodes.len();
        let inv_denom = (0..n)
            .map(|i| {
                let d: f64 = (0..n)
                    .filter(|&j| j != i)
                    .map(|j| nodes[i] - nodes[j])
                    .product();
                1.0 / d
            })
            .collect();
        Self { nodes, inv_denom }
    }

    pub fn gauss_lobatto(k: usize) -> Self {
        Self::new(gauss_lobatto_points(k))
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn eval(&self, x: f64, vals: &mut [f64]) {
        let n = self.nodes.len();
        for i in 0..n {
            let mut p = 1.0;
            for j in 0..n {
                if j != i {
                    p *= x - self.nodes[j];
                }
            }
            vals[i] = p * self.inv_denom[i];
        }
    }

    pub fn eval_with_deriv(&self, x: f64, vals: &mut [f64], ders: &mut [f64]) {
        let n = self.nodes.len();
        for i in 0..n {
            let mut p = 1.0;
            let mut d = 0.0;
            for j in 0..n {
                if j != i {
                    let f = x - self.nodes[j];
                    d = d * f + p;
                    p *= f;
                }
            }
            vals[i] = p * self.inv_denom[i];
            ders[i] = d * self.inv_denom[i];
        }
    }

    pub fn values(&self, x: f64) -> Vec<f64> {
        let mut v = vec![0.0; self.len()];
        self.eval(x, &mut v);
        v
    }

    /// Monomial coefficients (ascending) of each basis polynomial.
    pub fn monomial_coeffs(&self) -> Vec<Vec<f64>> {
        let n = self.nodes.len();
        (0..n)
            .map(|i| {
                let mut c = vec![self.inv_denom[i]];
                for j in 0..n {
                    if j == i {
                        continue;
                    }
                    let mut next = vec![0.0; c.len() + 1];
                    for (k, &ck) in c.iter().enumerate() {
                        next[k + 1] += ck;
                        next[k] -= ck * self.nodes[j];
                    }
                    c = next;
                }
                c
            })
            .collect()
    }
}
