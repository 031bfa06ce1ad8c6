//! Per-slab isoparametric mapping Θ(x, t) = x + Σ_i ℓ_i(t) d_i(x) and transfer between slabs.

use crate::basis::Lagrange1D;
use crate::error::{Error, Result};
use crate::fe::SpatialSpace;
use crate::levelset::LevelSetSlab;
use crate::mesh::BackgroundMesh;
use crate::regions::ActiveRegions;

#[derive(Debug, Clone)]
pub struct SlabDeformation {
    pub slab_index: usize,
    pub t0: f64,
    pub t1: f64,
    pub mesh: BackgroundMesh,
    pub space: SpatialSpace,
    pub temporal_basis: Lagrange1D,
    /// Displacements d_i as global nodal vectors of the degree-q_s space.
    pub coeff_maps: Vec<Vec<f64>>,
}

/// Solves g(x) = 0 on [lo, hi] by Newton steps safeguarded with bisection.
pub(crate) fn safeguarded_newton(
    g: impl Fn(f64) -> (f64, f64),
    x0: f64,
    lo: f64,
    hi: f64,
    tol: f64,
    max_iter: usize,
) -> std::result::Result<f64, String> {
    let (glo, _) = g(lo);
    let (ghi, _) = g(hi);
    if glo == 0.0 {
        return Ok(lo);
    }
    if ghi == 0.0 {
        return Ok(hi);
    }
    if glo * ghi > 0.0 {
        return Err(format!("no sign change on [{lo}, {hi}]"));
    }
    let (mut a, mut b) = if glo < 0.0 { (lo, hi) } else { (hi, lo) };
    let mut x = if x0 > lo.min(hi) && x0 < hi.max(lo) {
        x0
    } else {
        0.5 * (lo + hi)
    };
    for _ in 0..max_iter {
        let (gx, dg) = g(x);
        if gx == 0.0 {
            return Ok(x);
        }
        if gx < 0.0 {
            a = x;
        } else {
            b = x;
        }
        let mut xn = if dg != 0.0 { x - gx / dg } else { f64::NAN };
        let (l, r) = (a.min(b), a.max(b));
        if !(xn > l && xn < r) {
            xn = 0.5 * (a + b);
        }
        if (xn - x).abs() <= tol || (r - l) <= tol {
            return Ok(xn);
        }
        x = xn;
    }
    Err(format!("no convergence in {max_iter} iterations"))
}

/// Nodal displacement solving φ_i^p(x_j + d_j) = φ_i^lin(x_j) at interior nodes of active elements.
pub fn build_coefficient_map(
    ls: &LevelSetSlab,
    i: usize,
    active: &[bool],
) -> Result<Vec<f64>> {
    let mesh = &ls.mesh;
    let space = &ls.space;
    let h = mesh.h;
    let mut d = vec![0.0; space.n_dofs()];
    for e in 0..mesh.n_elements {
        if !active[e] {
            continue;
        }
        for a in 1..space.degree {
            let xj = space.node(mesh, e, a);
            let target = ls.coeff_lin_local(i, e, xj);
            let g = |y: f64| {
                let (v, dv) = ls.coeff_local(i, e, y);
                (v - target, dv)
            };
            let y = safeguarded_newton(g, xj, xj - h, xj + h, 1e-14, 50).map_err(|reason| {
                Error::RootSearch {
                    element: e,
                    node: a,
                    reason,
                }
            })?;
            let disp = y - xj;
            if disp.abs() > h {
                return Err(Error::DisplacementTooLarge {
                    element: e,
                    node: a,
                    disp,
                    h,
                });
            }
            // root-search noise on level sets that are linear in space
            d[space.dof(e, a)] = if disp.abs() <= 1e-12 * h { 0.0 } else { disp };
        }
    }
    Ok(d)
}

pub fn build_slab_deformation(ls: &LevelSetSlab, regions: &ActiveRegions) -> Result<SlabDeformation> {
    let coeff_maps = (0..=ls.q_t)
        .map(|i| build_coefficient_map(ls, i, &regions.elems_cut_slab))
        .collect::<Result<Vec<_>>>()?;
    Ok(SlabDeformation {
        slab_index: ls.slab_index,
        t0: ls.t0,
        t1: ls.t1,
        mesh: ls.mesh.clone(),
        space: ls.space.clone(),
        temporal_basis: ls.temporal_basis.clone(),
        coeff_maps,
    })
}

impl SlabDeformation {
    pub fn identity(ls: &LevelSetSlab) -> Self {
        Self {
            slab_index: ls.slab_index,
            t0: ls.t0,
            t1: ls.t1,
            mesh: ls.mesh.clone(),
            space: ls.space.clone(),
            temporal_basis: ls.temporal_basis.clone(),
            coeff_maps: vec![vec![0.0; ls.space.n_dofs()]; ls.q_t + 1],
        }
    }

    pub fn is_identity(&self) -> bool {
        self.coeff_maps.iter().all(|c| c.iter().all(|&v| v == 0.0))
    }

    fn ell_with_deriv(&self, t: f64) -> ([f64; 16], [f64; 16]) {
        let n = self.temporal_basis.len();
        let mut v = [0.0; 16];
        let mut d = [0.0; 16];
        let dt = self.t1 - self.t0;
        self.temporal_basis
            .eval_with_deriv((t - self.t0) / dt, &mut v[..n], &mut d[..n]);
        for x in d[..n].iter_mut() {
            *x /= dt;
        }
        (v, d)
    }

    /// Θ, ∂Θ/∂x and ∂Θ/∂t using the element-e polynomial (extension allowed).
    pub fn eval_on(&self, e: usize, x: f64, t: f64) -> (f64, f64, f64) {
        let xi = self.mesh.reference(e, x);
        let (ell, dell) = self.ell_with_deriv(t);
        let mut theta = x;
        let mut jx = 1.0;
        let mut jt = 0.0;
        for (i, c) in self.coeff_maps.iter().enumerate() {
            let (v, d) = self.space.eval_local_with_deriv(c, e, xi);
            theta += ell[i] * v;
            jx += ell[i] * d / self.mesh.h;
            jt += dell[i] * v;
        }
        (theta, jx, jt)
    }

    pub fn eval_deformation(&self, x: f64, t: f64) -> Result<f64> {
        let e = self.mesh.locate(x).ok_or(Error::OutOfDomain { x, t })?;
        Ok(self.eval_on(e, x, t).0)
    }

    /// (∂Θ/∂x, ∂Θ/∂t) at (x, t); the space-time Jacobian determinant is ∂Θ/∂x.
    pub fn eval_jacobian(&self, x: f64, t: f64) -> Result<(f64, f64)> {
        let e = self.mesh.locate(x).ok_or(Error::OutOfDomain { x, t })?;
        let (_, jx, jt) = self.eval_on(e, x, t);
        Ok((jx, jt))
    }

    /// Solves Θ_e(x, t) = y; beyond T, Θ_e is the tangent continuation at the nearer vertex.
    pub fn invert_on(&self, e: usize, y: f64, t: f64) -> Result<f64> {
        let (a, b) = self.mesh.element_bounds(e);
        let g = |x: f64| {
            let (th, jx, _) = self.eval_on(e, x, t);
            (th - y, jx)
        };
        if y < a || y > b {
            // outside T the map is continued linearly from the nearer (fixed) vertex
            let v = if y < a { a } else { b };
            let (_, jv, _) = self.eval_on(e, v, t);
            if !(jv > 0.0) {
                return Err(Error::Inversion { element: e, y, t });
            }
            return Ok(v + (y - v) / jv);
        }
        safeguarded_newton(g, y, a, b, 1e-13 * (1.0 + y.abs()), 100)
            .map_err(|_| Error::Inversion { element: e, y, t })
    }

    /// Reference point and element with Θ(x, t) = y.
    pub fn invert_at_time(&self, y: f64, t: f64) -> Result<(usize, f64)> {
        // vertices are fixed, so elements map onto themselves
        let e = self.mesh.locate(y).ok_or(Error::OutOfDomain { x: y, t })?;
        let (a, b) = self.mesh.element_bounds(e);
        if y <= a {
            return Ok((e, a));
        }
        if y >= b {
            return Ok((e, b));
        }
        Ok((e, self.invert_on(e, y, t)?))
    }
}

/// Per-element nodal values of a degree-k field (discontinuous representation).
#[derive(Debug, Clone)]
pub struct ElementwiseField {
    pub degree: usize,
    pub values: Vec<f64>,
    pub defined: Vec<bool>,
}

impl ElementwiseField {
    pub fn local(&self, e: usize) -> &[f64] {
        let n = self.degree + 1;
        &self.values[e * n..(e + 1) * n]
    }

    pub fn eval(&self, basis: &Lagrange1D, e: usize, xi: f64) -> f64 {
        let mut v = [0.0; 16];
        let n = self.degree + 1;
        basis.eval(xi, &mut v[..n]);
        self.local(e).iter().zip(&v[..n]).map(|(a, b)| a * b).sum()
    }

    /// P_h: average duplicated vertex values into a conforming nodal vector.
    pub fn to_continuous(&self, space: &SpatialSpace) -> (Vec<f64>, Vec<bool>) {
        let mut sum = vec![0.0; space.n_dofs()];
        let mut cnt = vec![0usize; space.n_dofs()];
        for e in 0..space.n_elements {
            if !self.defined[e] {
                continue;
            }
            for (a, &v) in self.local(e).iter().enumerate() {
                let d = space.dof(e, a);
                sum[d] += v;
                cnt[d] += 1;
            }
        }
        let defined: Vec<bool> = cnt.iter().map(|&c| c > 0).collect();
        for (s, &c) in sum.iter_mut().zip(&cnt) {
            if c > 0 {
                *s /= c as f64;
            }
        }
        (sum, defined)
    }
}

/// Π^*: per element T and node x_j, evaluates `eval(T, j, z_j)` at z_j = (Θ^-|_T)^{-1}(Θ^+(x_j, t), t).
pub fn transfer_elementwise_with(
    space: &SpatialSpace,
    def_minus: &SlabDeformation,
    def_plus: &SlabDeformation,
    elements: &[bool],
    t: f64,
    eval: impl Fn(usize, usize, f64) -> f64,
) -> Result<ElementwiseField> {
    let mesh = &def_plus.mesh;
    let n = space.n_local();
    let mut values = vec![0.0; space.n_elements * n];
    let same = def_minus.is_identity() && def_plus.is_identity();
    for e in 0..space.n_elements {
        if !elements[e] {
            continue;
        }
        for a in 0..n {
            let xj = space.node(mesh, e, a);
            let z = if same || a == 0 || a == space.degree {
                xj
            } else {
                let y = def_plus.eval_on(e, xj, t).0;
                def_minus.invert_on(e, y, t)?
            };
            values[e * n + a] = eval(e, a, z);
        }
    }
    Ok(ElementwiseField {
        degree: space.degree,
        values,
        defined: elements.to_vec(),
    })
}

/// Π^* applied to a conforming nodal vector `u_minus` of `space`.
pub fn transfer_elementwise(
    u_minus: &[f64],
    space: &SpatialSpace,
    def_minus: &SlabDeformation,
    def_plus: &SlabDeformation,
    elements: &[bool],
    t: f64,
) -> Result<ElementwiseField> {
    let mesh = &def_plus.mesh;
    transfer_elementwise_with(space, def_minus, def_plus, elements, t, |e, a, z| {
        if z == space.node(mesh, e, a) {
            u_minus[space.dof(e, a)]
        } else {
            space.eval_local(u_minus, e, mesh.reference(e, z))
        }
    })
}

/// Π = P_h ∘ Π^*.
pub fn transfer_continuous(
    u_minus: &[f64],
    space: &SpatialSpace,
    def_minus: &SlabDeformation,
    def_plus: &SlabDeformation,
    elements: &[bool],
    t: f64,
) -> Result<(Vec<f64>, Vec<bool>)> {
    Ok(transfer_elementwise(u_minus, space, def_minus, def_plus, elements, t)?.to_continuous(space))
}
