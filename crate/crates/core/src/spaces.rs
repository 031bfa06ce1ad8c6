//! Temporal bases, per-method slab spaces and evaluation of discrete space-time functions.

use crate::basis::Lagrange1D;
use crate::deform::SlabDeformation;
use crate::error::{Error, Result};
use crate::fe::SpatialSpace;
use crate::mesh::BackgroundMesh;
use crate::regions::{ActiveRegions, Mask};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Dg,
    Cg,
    CgBox,
    Gcc,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Dg => "dg",
            Method::Cg => "cg",
            Method::CgBox => "cgbox",
            Method::Gcc => "gcc",
        }
    }

    pub fn is_continuous(self) -> bool {
        self != Method::Dg
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TemporalKind {
    GaussLobattoLagrange,
    CubicHermite,
}

/// Temporal basis p_0..p_{k_t} on the slab [t0, t1].
#[derive(Debug, Clone)]
pub struct TemporalBasis {
    pub kind: TemporalKind,
    pub order: usize,
    pub t0: f64,
    pub t1: f64,
    lagrange: Option<Lagrange1D>,
}

pub fn build_temporal_basis(kind: TemporalKind, k_t: usize, t0: f64, t1: f64) -> Result<TemporalBasis> {
    let lagrange = match kind {
        TemporalKind::GaussLobattoLagrange => Some(Lagrange1D::gauss_lobatto(k_t)),
        TemporalKind::CubicHermite => {
            if k_t != 3 {
                return Err(Error::UnsupportedBasis(format!(
                    "cubic Hermite basis requires k_t = 3, got {k_t}"
                )));
            }
            None
        }
    };
    Ok(TemporalBasis {
        kind,
        order: k_t,
        t0,
        t1,
        lagrange,
    })
}

impl TemporalBasis {
    pub fn len(&self) -> usize {
        self.order + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dt(&self) -> f64 {
        self.t1 - self.t0
    }

    /// Index of the function that is one at t0 (value condition).
    pub fn i_lo(&self) -> usize {
        0
    }

    /// Index of the function that is one at t1 (Lagrange kind).
    pub fn i_up(&self) -> usize {
        match self.kind {
            TemporalKind::GaussLobattoLagrange => self.order,
            TemporalKind::CubicHermite => 2,
        }
    }

    /// Indices fixed by initial data: value (and first derivative for Hermite).
    pub fn constrained(&self) -> Vec<usize> {
        match self.kind {
            TemporalKind::GaussLobattoLagrange => vec![0],
            TemporalKind::CubicHermite => vec![0, 1],
        }
    }

    /// Values and t-derivatives of all basis functions into the given buffers.
    pub fn eval_into(&self, t: f64, vals: &mut [f64], ders: &mut [f64]) {
        let dt = self.dt();
        let s = (t - self.t0) / dt;
        match &self.lagrange {
            Some(l) => {
                l.eval_with_deriv(s, vals, ders);
                for d in ders.iter_mut().take(self.len()) {
                    *d /= dt;
                }
            }
            None => {
                let s2 = s * s;
                let s3 = s2 * s;
                vals[0] = 2.0 * s3 - 3.0 * s2 + 1.0;
                vals[1] = dt * (s3 - 2.0 * s2 + s);
                vals[2] = -2.0 * s3 + 3.0 * s2;
                vals[3] = dt * (s3 - s2);
                ders[0] = (6.0 * s2 - 6.0 * s) / dt;
                ders[1] = 3.0 * s2 - 4.0 * s + 1.0;
                ders[2] = (-6.0 * s2 + 6.0 * s) / dt;
                ders[3] = 3.0 * s2 - 2.0 * s;
            }
        }
    }

    pub fn eval(&self, t: f64) -> (Vec<f64>, Vec<f64>) {
        let mut v = vec![0.0; self.len()];
        let mut d = vec![0.0; self.len()];
        self.eval_into(t, &mut v, &mut d);
        (v, d)
    }
}

/// Trial/test layout of one slab.
#[derive(Debug, Clone)]
pub struct SlabSpace {
    pub method: Method,
    pub k_s: usize,
    pub k_t: usize,
    pub spatial: SpatialSpace,
    pub trial: TemporalBasis,
    /// Time-integrated part of the test space.
    pub test: TemporalBasis,
    /// Number of collocation test blocks (appended after the integrated test indices).
    pub n_colloc: usize,
    /// Collocation times.
    pub colloc_times: Vec<f64>,
    /// Unknown index of (spatial dof, trial temporal index), row-major in the temporal index.
    pub trial_index: Vec<Option<usize>>,
    /// Test index of (spatial dof, test temporal index incl. collocation blocks).
    pub test_index: Vec<Option<usize>>,
    /// Trial temporal indices carrying initial data.
    pub constrained: Vec<usize>,
    /// Elements whose spatial dofs carry initial data.
    pub init_elements: Mask,
    pub trial_dofs: Vec<(usize, usize)>,
    pub test_dofs: Vec<(usize, usize)>,
}

fn dof_mask(spatial: &SpatialSpace, elements: &[bool]) -> Vec<bool> {
    let mut m = vec![false; spatial.n_dofs()];
    for (e, &on) in elements.iter().enumerate() {
        if on {
            for a in 0..spatial.n_local() {
                m[spatial.dof(e, a)] = true;
            }
        }
    }
    m
}

pub fn build_slab_space(
    method: Method,
    k_s: usize,
    k_t: usize,
    regions: &ActiveRegions,
    mesh: &BackgroundMesh,
    t0: f64,
    t1: f64,
) -> Result<SlabSpace> {
    let spatial = SpatialSpace::new(mesh, k_s);
    let e_dofs = dof_mask(&spatial, &regions.elems_e);
    let ep_dofs = dof_mask(&spatial, &regions.elems_eplus);
    let gl = TemporalKind::GaussLobattoLagrange;
    let (trial, test, n_colloc, colloc_times) = match method {
        Method::Dg => (
            build_temporal_basis(gl, k_t, t0, t1)?,
            build_temporal_basis(gl, k_t, t0, t1)?,
            0,
            vec![],
        ),
        Method::Cg | Method::CgBox => {
            if k_t < 1 {
                return Err(Error::UnsupportedBasis("continuous methods need k_t >= 1".into()));
            }
            (
                build_temporal_basis(gl, k_t, t0, t1)?,
                build_temporal_basis(gl, k_t - 1, t0, t1)?,
                0,
                vec![],
            )
        }
        Method::Gcc => (
            build_temporal_basis(TemporalKind::CubicHermite, k_t, t0, t1)?,
            build_temporal_basis(gl, 0, t0, t1)?,
            1,
            vec![t1],
        ),
    };
    let nt = trial.len();
    let ntest = test.len() + n_colloc;
    let nsd = spatial.n_dofs();
    let constrained = match method {
        Method::Dg => vec![],
        _ => trial.constrained(),
    };
    let trial_active = |d: usize, i: usize| -> bool {
        if constrained.contains(&i) {
            return false;
        }
        match method {
            Method::Dg => e_dofs[d],
            Method::Cg => {
                if i == trial.i_up() {
                    ep_dofs[d]
                } else {
                    e_dofs[d]
                }
            }
            Method::CgBox | Method::Gcc => ep_dofs[d],
        }
    };
    let test_active = |d: usize, j: usize| -> bool {
        match method {
            Method::Dg => e_dofs[d],
            Method::Cg => {
                if j == test.len() - 1 {
                    ep_dofs[d]
                } else {
                    e_dofs[d]
                }
            }
            Method::CgBox | Method::Gcc => ep_dofs[d],
        }
    };
    let mut trial_index = vec![None; nsd * nt];
    let mut trial_dofs = Vec::new();
    for d in 0..nsd {
        for i in 0..nt {
            if trial_active(d, i) {
                trial_index[d * nt + i] = Some(trial_dofs.len());
                trial_dofs.push((d, i));
            }
        }
    }
    let mut test_index = vec![None; nsd * ntest];
    let mut test_dofs = Vec::new();
    for d in 0..nsd {
        for j in 0..ntest {
            if test_active(d, j) {
                test_index[d * ntest + j] = Some(test_dofs.len());
                test_dofs.push((d, j));
            }
        }
    }
    if trial_dofs.is_empty() {
        return Err(Error::EmptySpace(regions.slab_index));
    }
    assert_eq!(
        trial_dofs.len(),
        test_dofs.len(),
        "trial and test spaces differ in dimension"
    );
    let init_elements = match method {
        Method::Dg => vec![false; mesh.n_elements],
        Method::Cg => regions.elems_e.clone(),
        Method::CgBox | Method::Gcc => regions.elems_eplus.clone(),
    };
    Ok(SlabSpace {
        method,
        k_s,
        k_t,
        spatial,
        trial,
        test,
        n_colloc,
        colloc_times,
        trial_index,
        test_index,
        constrained,
        init_elements,
        trial_dofs,
        test_dofs,
    })
}

impl SlabSpace {
    pub fn n_unknowns(&self) -> usize {
        self.trial_dofs.len()
    }

    pub fn n_trial_t(&self) -> usize {
        self.trial.len()
    }

    pub fn n_test_t(&self) -> usize {
        self.test.len() + self.n_colloc
    }

    pub fn trial_unknown(&self, d: usize, i: usize) -> Option<usize> {
        self.trial_index[d * self.n_trial_t() + i]
    }

    pub fn test_row(&self, d: usize, j: usize) -> Option<usize> {
        self.test_index[d * self.n_test_t() + j]
    }

    pub fn is_constrained(&self, i: usize) -> bool {
        self.constrained.contains(&i)
    }
}

/// Coefficients of a discrete slab function over all (spatial dof, trial temporal index) pairs.
#[derive(Debug, Clone)]
pub struct SlabSolution {
    pub coeffs: Vec<f64>,
    pub n_t: usize,
}

impl SlabSolution {
    pub fn zeros(space: &SlabSpace) -> Self {
        Self {
            coeffs: vec![0.0; space.spatial.n_dofs() * space.n_trial_t()],
            n_t: space.n_trial_t(),
        }
    }

    pub fn get(&self, d: usize, i: usize) -> f64 {
        self.coeffs[d * self.n_t + i]
    }

    pub fn set(&mut self, d: usize, i: usize, v: f64) {
        self.coeffs[d * self.n_t + i] = v;
    }

    /// Spatial nodal vector Σ_i c_{d,i} p_i(t) and its t-derivative.
    pub fn trace(&self, space: &SlabSpace, t: f64) -> (Vec<f64>, Vec<f64>) {
        let (pv, pd) = space.trial.eval(t);
        let nsd = space.spatial.n_dofs();
        let mut v = vec![0.0; nsd];
        let mut d = vec![0.0; nsd];
        for k in 0..nsd {
            for i in 0..self.n_t {
                let c = self.get(k, i);
                v[k] += c * pv[i];
                d[k] += c * pd[i];
            }
        }
        (v, d)
    }

    /// Reference value, ∂/∂x̂ and ∂/∂t at undeformed point x̂ of element e.
    pub fn eval_ref(&self, space: &SlabSpace, mesh: &BackgroundMesh, e: usize, x: f64, t: f64) -> (f64, f64, f64) {
        let n = space.spatial.n_local();
        let nt = self.n_t;
        let mut sv = [0.0; 16];
        let mut sd = [0.0; 16];
        let mut tv = [0.0; 16];
        let mut td = [0.0; 16];
        space
            .spatial
            .basis
            .eval_with_deriv(mesh.reference(e, x), &mut sv[..n], &mut sd[..n]);
        space.trial.eval_into(t, &mut tv[..nt], &mut td[..nt]);
        let mut val = 0.0;
        let mut dx = 0.0;
        let mut dtv = 0.0;
        for a in 0..n {
            let d = space.spatial.dof(e, a);
            for i in 0..nt {
                let c = self.get(d, i);
                val += c * sv[a] * tv[i];
                dx += c * sd[a] * tv[i];
                dtv += c * sv[a] * td[i];
            }
        }
        (val, dx / mesh.h, dtv)
    }
}

/// Value, ∂x and ∂t of u = û ∘ (Θ^{st})^{-1} at the physical point (y, t).
pub fn eval_discrete(
    u: &SlabSolution,
    space: &SlabSpace,
    def: &SlabDeformation,
    y: f64,
    t: f64,
) -> Result<(f64, f64, f64)> {
    let (e, x) = def.invert_at_time(y, t)?;
    let (_, jx, jt) = def.eval_on(e, x, t);
    let (v, dx, dt) = u.eval_ref(space, &def.mesh, e, x, t);
    Ok((v, dx / jx, dt - dx * jt / jx))
}
