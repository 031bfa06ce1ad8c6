//! Problem description and the per-slab tensor-product discrete level set.

use crate::basis::Lagrange1D;
use crate::error::{Error, Result};
use crate::fe::SpatialSpace;
use crate::mesh::{BackgroundMesh, TimeSlabbing};
use crate::poly::Poly;

pub type SpaceTimeFn = Box<dyn Fn(f64, f64) -> f64 + Send + Sync>;
pub type SpaceFn = Box<dyn Fn(f64) -> f64 + Send + Sync>;
pub type BoundaryFn = Box<dyn Fn(f64) -> Vec<f64> + Send + Sync>;

/// Analytic problem data. The physical domain at time t is {x : phi(x, t) < 0}.
pub struct ProblemDefinition {
    pub name: String,
    pub domain: (f64, f64),
    pub t_end: f64,
    pub phi: SpaceTimeFn,
    pub w: SpaceTimeFn,
    pub f: SpaceTimeFn,
    pub u_exact: Option<SpaceTimeFn>,
    pub u0: SpaceFn,
    /// Initial time derivative, needed by methods with C^1 time continuity.
    pub u0_dt: Option<SpaceFn>,
    /// Bound on |w| over the background domain and the time interval.
    pub w_inf: f64,
    /// Exact boundary points at time t.
    pub boundary: Option<BoundaryFn>,
}

impl std::fmt::Debug for ProblemDefinition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ProblemDefinition")
            .field("name", &self.name)
            .field("domain", &self.domain)
            .field("t_end", &self.t_end)
            .field("w_inf", &self.w_inf)
            .finish_non_exhaustive()
    }
}

/// phi_h(x, t) = Σ_i ℓ_i(t) φ_h^i(x) on one slab.
#[derive(Debug, Clone)]
pub struct LevelSetSlab {
    pub slab_index: usize,
    pub q_s: usize,
    pub q_t: usize,
    pub t0: f64,
    pub t1: f64,
    pub mesh: BackgroundMesh,
    pub space: SpatialSpace,
    pub temporal_basis: Lagrange1D,
    /// Monomial coefficients in s = (t - t0)/dt of each ℓ_i.
    pub temporal_monomials: Vec<Vec<f64>>,
    /// φ_h^i as global nodal vectors of the degree-q_s space.
    pub coeff_funcs: Vec<Vec<f64>>,
    /// Tie tolerance used for sign classification.
    pub tie_tol: f64,
}

pub fn interpolate_levelset(
    prob: &ProblemDefinition,
    mesh: &BackgroundMesh,
    slabs: &TimeSlabbing,
    n: usize,
    q_s: usize,
    q_t: usize,
) -> Result<LevelSetSlab> {
    if q_s < 1 {
        return Err(Error::InvalidInput("q_s must be at least 1".into()));
    }
    let (t0, t1) = slabs.slab(n);
    let space = SpatialSpace::new(mesh, q_s);
    let temporal_basis = Lagrange1D::gauss_lobatto(q_t);
    let temporal_monomials = temporal_basis.monomial_coeffs();
    let coeff_funcs = temporal_basis
        .nodes()
        .iter()
        .map(|&s| {
            let t = t0 + s * (t1 - t0);
            space.interpolate(mesh, |x| (prob.phi)(x, t))
        })
        .collect();
    let scale = mesh
        .domain_lo
        .abs()
        .max(mesh.domain_hi.abs())
        .max(mesh.domain_hi - mesh.domain_lo);
    Ok(LevelSetSlab {
        slab_index: n,
        q_s,
        q_t,
        t0,
        t1,
        mesh: mesh.clone(),
        space,
        temporal_basis,
        temporal_monomials,
        coeff_funcs,
        tie_tol: 1e-14 * scale,
    })
}

impl LevelSetSlab {
    pub fn dt(&self) -> f64 {
        self.t1 - self.t0
    }

    pub fn local_time(&self, t: f64) -> f64 {
        (t - self.t0) / (self.t1 - self.t0)
    }

    fn check(&self, x: f64, t: f64) -> Result<()> {
        let tt = 1e-12 * self.dt();
        let xt = 1e-12 * self.mesh.h;
        if t < self.t0 - tt
            || t > self.t1 + tt
            || x < self.mesh.domain_lo - xt
            || x > self.mesh.domain_hi + xt
        {
            return Err(Error::OutOfDomain { x, t });
        }
        Ok(())
    }

    /// ℓ_i(t) for all i.
    pub fn ell(&self, t: f64) -> Vec<f64> {
        self.temporal_basis.values(self.local_time(t))
    }

    /// ℓ_i(t) and dℓ_i/dt for all i.
    pub fn ell_with_deriv(&self, t: f64) -> (Vec<f64>, Vec<f64>) {
        let n = self.temporal_basis.len();
        let mut v = vec![0.0; n];
        let mut d = vec![0.0; n];
        self.temporal_basis
            .eval_with_deriv(self.local_time(t), &mut v, &mut d);
        let inv = 1.0 / self.dt();
        d.iter_mut().for_each(|x| *x *= inv);
        (v, d)
    }

    /// φ_h^i restricted to element e, canonically extended, with its x-derivative.
    pub fn coeff_local(&self, i: usize, e: usize, x: f64) -> (f64, f64) {
        let xi = self.mesh.reference(e, x);
        let (v, d) = self
            .space
            .eval_local_with_deriv(&self.coeff_funcs[i], e, xi);
        (v, d / self.mesh.h)
    }

    /// Vertex-interpolant of φ_h^i on element e, evaluated at x.
    pub fn coeff_lin_local(&self, i: usize, e: usize, x: f64) -> f64 {
        let xi = self.mesh.reference(e, x);
        let c = &self.coeff_funcs[i];
        (1.0 - xi) * c[e] + xi * c[e + 1]
    }

    pub fn eval_phih(&self, x: f64, t: f64) -> Result<f64> {
        Ok(self.eval_phih_with_dx(x, t)?.0)
    }

    pub fn eval_phih_dx(&self, x: f64, t: f64) -> Result<f64> {
        Ok(self.eval_phih_with_dx(x, t)?.1)
    }

    pub fn eval_phih_with_dx(&self, x: f64, t: f64) -> Result<(f64, f64)> {
        self.check(x, t)?;
        let e = self.mesh.locate(x).ok_or(Error::OutOfDomain { x, t })?;
        Ok(self.eval_phih_on(e, x, t))
    }

    /// φ_h and ∂_x φ_h using the element-e polynomial (extension allowed).
    pub fn eval_phih_on(&self, e: usize, x: f64, t: f64) -> (f64, f64) {
        let ell = self.ell(t);
        let mut v = 0.0;
        let mut d = 0.0;
        for (i, &l) in ell.iter().enumerate() {
            let (a, b) = self.coeff_local(i, e, x);
            v += l * a;
            d += l * b;
        }
        (v, d)
    }

    pub fn eval_philin(&self, x: f64, t: f64) -> Result<f64> {
        self.check(x, t)?;
        let e = self.mesh.locate(x).ok_or(Error::OutOfDomain { x, t })?;
        let xi = self.mesh.reference(e, x);
        Ok((1.0 - xi) * self.vertex_value(e, t) + xi * self.vertex_value(e + 1, t))
    }

    /// φ^lin(v, t) = φ_h(v, t) at vertex v.
    pub fn vertex_value(&self, v: usize, t: f64) -> f64 {
        self.ell(t)
            .iter()
            .zip(&self.coeff_funcs)
            .map(|(l, c)| l * c[v])
            .sum()
    }

    /// Vertex trajectory t ↦ φ^lin(v, t) as a polynomial in s = (t - t0)/dt.
    pub fn vertex_trajectory(&self, v: usize) -> Poly {
        let w: Vec<f64> = self.coeff_funcs.iter().map(|c| c[v]).collect();
        Poly::combination(&self.temporal_monomials, &w)
    }

    /// Sign classification with ties resolved to the negative side.
    pub fn is_negative(&self, value: f64) -> bool {
        value <= self.tie_tol
    }
}
