//! Slab system assembly for the DG, CG, CG□ and GCC methods.

use nalgebra::{DMatrix, DVector};

use crate::basis::GaussRule;
use crate::deform::{ElementwiseField, SlabDeformation};
use crate::error::{Error, Result};
use crate::levelset::{LevelSetSlab, ProblemDefinition};
use crate::quadrature::{mapped_element_rule, st_rule, Part, RuleMode};
use crate::regions::{ActiveRegions, Mask};
use crate::spaces::{Method, SlabSolution, SlabSpace};

const MAXN: usize = 16;

/// Everything the forms of one slab depend on.
pub struct SlabContext<'a> {
    pub prob: &'a ProblemDefinition,
    pub ls: &'a LevelSetSlab,
    pub regions: &'a ActiveRegions,
    pub def: &'a SlabDeformation,
    pub space: &'a SlabSpace,
    pub gamma: f64,
    pub rule_mode: RuleMode,
    pub spatial_exactness: usize,
    pub final_penalty: FinalPenalty,
}

impl SlabContext<'_> {
    pub fn gamma_tilde(&self) -> f64 {
        (1.0 + self.ls.dt() / self.ls.mesh.h) * self.gamma
    }
}

/// Weight of the CG final-time ghost penalty relative to γ_J.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FinalPenalty {
    /// γ_J j_h(t_n).
    Plain,
    /// Δt γ_J j_h(t_n), the same scale as a time-integrated penalty.
    #[default]
    TimeStep,
}

/// Previous-slab data entering the DG upwind term.
pub enum UpwindData<'a> {
    /// Initial condition evaluated at physical points.
    Exact(&'a (dyn Fn(f64) -> f64 + Sync)),
    /// Element-wise transferred trace Π^*(u_-).
    Field(&'a ElementwiseField),
}

/// Time sampling of a ghost-penalty contribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PenaltyMode {
    /// ∫_{I_n} γ̃ j_h(t) dt tested with the integrated test basis.
    TimeIntegrated,
    /// γ j_h(t) tested with the integrated test basis evaluated at t,
    /// scaled according to [`FinalPenalty`].
    AtTime(f64),
    /// γ j_h(t) tested with the collocation block.
    Collocation(f64),
}

#[derive(Debug, Clone)]
pub struct SlabSystem {
    pub matrix: DMatrix<f64>,
    pub rhs: DVector<f64>,
    pub dof_map: Vec<(usize, usize)>,
    pub nze: usize,
    pub method: Method,
}

pub struct Assembler<'a> {
    ctx: &'a SlabContext<'a>,
    init: &'a SlabSolution,
    matrix: DMatrix<f64>,
    rhs: DVector<f64>,
    touched: Vec<bool>,
}

struct LocalBlock {
    n: usize,
    nt: usize,
    ntest: usize,
    a: Vec<f64>,
    f: Vec<f64>,
}

impl LocalBlock {
    fn new(n: usize, nt: usize, ntest: usize) -> Self {
        Self {
            n,
            nt,
            ntest,
            a: vec![0.0; n * ntest * n * nt],
            f: vec![0.0; n * ntest],
        }
    }

    fn at(&mut self, b: usize, j: usize, a: usize, i: usize) -> &mut f64 {
        let row = b * self.ntest + j;
        let col = a * self.nt + i;
        &mut self.a[row * self.n * self.nt + col]
    }
}

impl<'a> Assembler<'a> {
    pub fn new(ctx: &'a SlabContext<'a>, init: &'a SlabSolution) -> Self {
        let n = ctx.space.n_unknowns();
        Self {
            ctx,
            init,
            matrix: DMatrix::zeros(n, n),
            rhs: DVector::zeros(n),
            touched: vec![false; n * n],
        }
    }

    fn scatter(&mut self, e: usize, blk: &LocalBlock, with_rhs: bool) {
        let sp = self.ctx.space;
        let n = blk.n;
        for b in 0..n {
            let db = sp.spatial.dof(e, b);
            for j in 0..blk.ntest {
                let Some(row) = sp.test_row(db, j) else { continue };
                let rloc = b * blk.ntest + j;
                if with_rhs {
                    self.rhs[row] += blk.f[rloc];
                }
                for a in 0..n {
                    let da = sp.spatial.dof(e, a);
                    for i in 0..blk.nt {
                        let v = blk.a[rloc * n * blk.nt + a * blk.nt + i];
                        if let Some(col) = sp.trial_unknown(da, i) {
                            self.matrix[(row, col)] += v;
                            self.touched[row * sp.n_unknowns() + col] = true;
                        } else if sp.is_constrained(i) {
                            self.rhs[row] -= v * self.init.get(da, i);
                        }
                    }
                }
            }
        }
    }

    fn volume_elements(&self) -> Mask {
        match self.ctx.space.method {
            Method::Dg | Method::Cg => self.ctx.regions.elems_e.clone(),
            Method::CgBox | Method::Gcc => self.ctx.regions.elems_eplus.clone(),
        }
    }

    /// B^n(u, v) and f^n(v) over Q^{h,n} with the integrated test basis.
    pub fn add_volume(&mut self) {
        let ctx = self.ctx;
        let sp = ctx.space;
        let mesh = &ctx.ls.mesh;
        let n = sp.spatial.n_local();
        let nt = sp.n_trial_t();
        let ntest = sp.n_test_t();
        let nint = sp.test.len();
        let h = mesh.h;
        let elems = self.volume_elements();
        let (mut sv, mut sd) = ([0.0; MAXN], [0.0; MAXN]);
        let (mut tv, mut td) = ([0.0; MAXN], [0.0; MAXN]);
        let (mut qv, mut qd) = ([0.0; MAXN], [0.0; MAXN]);
        for e in 0..mesh.n_elements {
            if !elems[e] {
                continue;
            }
            let rule = st_rule(ctx.ls, e, ctx.rule_mode, sp.k_t, ctx.spatial_exactness);
            if rule.points.is_empty() {
                continue;
            }
            let mut blk = LocalBlock::new(n, nt, ntest);
            for p in &rule.points {
                let (y, jx, jt) = ctx.def.eval_on(e, p.x, p.t);
                assert!(jx > 0.0, "non-positive deformation Jacobian on element {e}");
                sp.spatial
                    .basis
                    .eval_with_deriv(mesh.reference(e, p.x), &mut sv[..n], &mut sd[..n]);
                for d in sd[..n].iter_mut() {
                    *d /= h;
                }
                sp.trial.eval_into(p.t, &mut tv[..nt], &mut td[..nt]);
                sp.test.eval_into(p.t, &mut qv[..nint], &mut qd[..nint]);
                let wgt = p.w * jx;
                let wv = (ctx.prob.w)(y, p.t);
                let fv = (ctx.prob.f)(y, p.t);
                for b in 0..n {
                    for j in 0..nint {
                        let v = sv[b] * qv[j];
                        let vx = sd[b] * qv[j] / jx;
                        blk.f[b * ntest + j] += wgt * fv * v;
                        for a in 0..n {
                            for i in 0..nt {
                                let ux = sd[a] * tv[i] / jx;
                                let ut = sv[a] * td[i] - sd[a] * tv[i] * jt / jx;
                                *blk.at(b, j, a, i) += wgt * ((ut + wv * ux) * v + ux * vx);
                            }
                        }
                    }
                }
            }
            self.scatter(e, &blk, true);
        }
    }

    /// (u_+, v_+) on Ω^h(t_{n-1}) and the matching upwind right-hand side (DG).
    pub fn add_upwind(&mut self, data: &UpwindData) {
        let ctx = self.ctx;
        let sp = ctx.space;
        let mesh = &ctx.ls.mesh;
        let n = sp.spatial.n_local();
        let nt = sp.n_trial_t();
        let ntest = sp.n_test_t();
        let nint = sp.test.len();
        let t0 = ctx.ls.t0;
        let rule = GaussRule::with_exactness(ctx.spatial_exactness);
        let (tv, _) = sp.trial.eval(t0);
        let (qv, _) = sp.test.eval(t0);
        let mut sv = [0.0; MAXN];
        for e in 0..mesh.n_elements {
            if !ctx.regions.elems_e[e] {
                continue;
            }
            let pts = mapped_element_rule(ctx.ls, ctx.def, e, t0, &rule, Part::Inside);
            if pts.is_empty() {
                continue;
            }
            let mut blk = LocalBlock::new(n, nt, ntest);
            for p in &pts {
                let xi = mesh.reference(e, p.x);
                sp.spatial.basis.eval(xi, &mut sv[..n]);
                let g = match data {
                    UpwindData::Exact(u0) => u0(p.y),
                    UpwindData::Field(fld) => {
                        if fld.defined[e] {
                            fld.eval(&sp.spatial.basis, e, xi)
                        } else {
                            0.0
                        }
                    }
                };
                for b in 0..n {
                    for j in 0..nint {
                        let v = sv[b] * qv[j];
                        blk.f[b * ntest + j] += p.w * g * v;
                        for a in 0..n {
                            for i in 0..nt {
                                *blk.at(b, j, a, i) += p.w * sv[a] * tv[i] * v;
                            }
                        }
                    }
                }
            }
            self.scatter(e, &blk, true);
        }
    }

    /// Direct ghost penalty (1/h²)∫_{ω_F}⟦u⟧⟦v⟧ on the given facets, acting on unknowns only.
    pub fn add_ghost_penalty(&mut self, facets: &[bool], mode: PenaltyMode) {
        let ctx = self.ctx;
        let sp = ctx.space;
        let mesh = &ctx.ls.mesh;
        let n = sp.spatial.n_local();
        let nt = sp.n_trial_t();
        let ntest = sp.n_test_t();
        let nint = sp.test.len();
        let h = mesh.h;
        let (t0, t1) = (ctx.ls.t0, ctx.ls.t1);
        // (time, factor, test multipliers)
        let mut samples: Vec<(f64, f64, Vec<f64>)> = Vec::new();
        match mode {
            PenaltyMode::TimeIntegrated => {
                let gt = ctx.gamma_tilde();
                for (t, w) in GaussRule::with_exactness(2 * (sp.k_t + 1)).mapped(t0, t1) {
                    let (q, _) = sp.test.eval(t);
                    let mut m = vec![0.0; ntest];
                    m[..nint].copy_from_slice(&q);
                    samples.push((t, gt * w, m));
                }
            }
            PenaltyMode::AtTime(t) => {
                let (q, _) = sp.test.eval(t);
                let mut m = vec![0.0; ntest];
                m[..nint].copy_from_slice(&q);
                let fac = match ctx.final_penalty {
                    FinalPenalty::Plain => 1.0,
                    FinalPenalty::TimeStep => t1 - t0,
                };
                samples.push((t, ctx.gamma * fac, m));
            }
            PenaltyMode::Collocation(t) => {
                let mut m = vec![0.0; ntest];
                for c in 0..sp.n_colloc {
                    if (sp.colloc_times[c] - t).abs() <= 1e-14 * (1.0 + t.abs()) {
                        m[nint + c] = 1.0;
                    }
                }
                samples.push((t, ctx.gamma, m));
            }
        }
        let rule = GaussRule::with_exactness(ctx.spatial_exactness);
        let identity = ctx.def.is_identity();
        let mut va = [0.0; MAXN];
        let mut jump = vec![0.0; 2 * n];
        for f in mesh.interior_facets() {
            if !facets[f] {
                continue;
            }
            let (e1, e2) = mesh.facet_patch(f);
            // patch-local block: rows/cols 0..n on e1, n..2n on e2
            let m2 = 2 * n;
            let mut a_loc = vec![0.0; m2 * ntest * m2 * nt];
            for (t, factor, mult) in &samples {
                let (tv, _) = sp.trial.eval(*t);
                for (side, other) in [(e1, e2), (e2, e1)] {
                    for (x, w) in rule.mapped(mesh.vertices[side], mesh.vertices[side + 1]) {
                        let (y, jx, _) = ctx.def.eval_on(side, x, *t);
                        let xo = if identity {
                            x
                        } else {
                            ctx.def.invert_on(other, y, *t).expect("ghost-penalty extension inversion")
                        };
                        let (x1, x2) = if side == e1 { (x, xo) } else { (xo, x) };
                        sp.spatial.basis.eval(mesh.reference(e1, x1), &mut va[..n]);
                        jump[..n].copy_from_slice(&va[..n]);
                        sp.spatial.basis.eval(mesh.reference(e2, x2), &mut va[..n]);
                        for a in 0..n {
                            jump[n + a] = -va[a];
                        }
                        let c = factor * w * jx / (h * h);
                        for p in 0..m2 {
                            for j in 0..ntest {
                                if mult[j] == 0.0 {
                                    continue;
                                }
                                let rv = c * jump[p] * mult[j];
                                let row = p * ntest + j;
                                for q in 0..m2 {
                                    for i in 0..nt {
                                        a_loc[row * m2 * nt + q * nt + i] += rv * jump[q] * tv[i];
                                    }
                                }
                            }
                        }
                    }
                }
            }
            let dofs: Vec<usize> = (0..m2)
                .map(|p| if p < n { sp.spatial.dof(e1, p) } else { sp.spatial.dof(e2, p - n) })
                .collect();
            let nu = sp.n_unknowns();
            for p in 0..m2 {
                for j in 0..ntest {
                    let Some(row) = sp.test_row(dofs[p], j) else { continue };
                    for q in 0..m2 {
                        for i in 0..nt {
                            if let Some(col) = sp.trial_unknown(dofs[q], i) {
                                let v = a_loc[(p * ntest + j) * m2 * nt + q * nt + i];
                                self.matrix[(row, col)] += v;
                                self.touched[row * nu + col] = true;
                            }
                        }
                    }
                }
            }
        }
    }

    /// Collocation rows B_col(t_l; u, v) = f_col(t_l; v) on Ω^h(t_l) (GCC).
    pub fn add_collocation(&mut self, t_l: f64) {
        let ctx = self.ctx;
        let sp = ctx.space;
        let mesh = &ctx.ls.mesh;
        let n = sp.spatial.n_local();
        let nt = sp.n_trial_t();
        let ntest = sp.n_test_t();
        let nint = sp.test.len();
        let Some(c) = sp
            .colloc_times
            .iter()
            .position(|&tc| (tc - t_l).abs() <= 1e-14 * (1.0 + t_l.abs()))
        else {
            return;
        };
        let j = nint + c;
        let h = mesh.h;
        let rule = GaussRule::with_exactness(ctx.spatial_exactness);
        let mut tv = [0.0; MAXN];
        let mut td = [0.0; MAXN];
        sp.trial.eval_into(t_l, &mut tv[..nt], &mut td[..nt]);
        let (mut sv, mut sd) = ([0.0; MAXN], [0.0; MAXN]);
        for e in 0..mesh.n_elements {
            if !ctx.regions.elems_eplus[e] {
                continue;
            }
            let pts = mapped_element_rule(ctx.ls, ctx.def, e, t_l, &rule, Part::Inside);
            if pts.is_empty() {
                continue;
            }
            let mut blk = LocalBlock::new(n, nt, ntest);
            for p in &pts {
                sp.spatial
                    .basis
                    .eval_with_deriv(mesh.reference(e, p.x), &mut sv[..n], &mut sd[..n]);
                for d in sd[..n].iter_mut() {
                    *d /= h;
                }
                let wv = (ctx.prob.w)(p.y, t_l);
                let fv = (ctx.prob.f)(p.y, t_l);
                for b in 0..n {
                    let v = sv[b];
                    let vx = sd[b] / p.jx;
                    blk.f[b * ntest + j] += p.w * fv * v;
                    for a in 0..n {
                        for i in 0..nt {
                            let ux = sd[a] * tv[i] / p.jx;
                            let ut = sv[a] * td[i] - sd[a] * tv[i] * p.jt / p.jx;
                            *blk.at(b, j, a, i) += p.w * ((ut + wv * ux) * v + ux * vx);
                        }
                    }
                }
            }
            self.scatter(e, &blk, true);
        }
    }

    pub fn finish(self) -> SlabSystem {
        let nze = self.touched.iter().filter(|&&b| b).count();
        SlabSystem {
            matrix: self.matrix,
            rhs: self.rhs,
            dof_map: self.ctx.space.trial_dofs.clone(),
            nze,
            method: self.ctx.space.method,
        }
    }
}

/// Method-specific combination of all forms of one slab.
pub fn assemble_slab(ctx: &SlabContext, init: &SlabSolution, upwind: Option<&UpwindData>) -> SlabSystem {
    let r = ctx.regions;
    let t1 = ctx.ls.t1;
    let mut asm = Assembler::new(ctx, init);
    asm.add_volume();
    match ctx.space.method {
        Method::Dg => {
            if let Some(u) = upwind {
                asm.add_upwind(u);
            }
            asm.add_ghost_penalty(&r.facets_rext, PenaltyMode::TimeIntegrated);
        }
        Method::Cg => {
            asm.add_ghost_penalty(&r.facets_rext, PenaltyMode::TimeIntegrated);
            asm.add_ghost_penalty(&r.facets_rplus, PenaltyMode::AtTime(t1));
        }
        Method::CgBox => {
            asm.add_ghost_penalty(&r.facets_rplus, PenaltyMode::TimeIntegrated);
        }
        Method::Gcc => {
            asm.add_ghost_penalty(&r.facets_rplus, PenaltyMode::TimeIntegrated);
            for &tl in &ctx.space.colloc_times {
                asm.add_collocation(tl);
                asm.add_ghost_penalty(&r.facets_rplus, PenaltyMode::Collocation(tl));
            }
        }
    }
    asm.finish()
}

/// Dense LU with partial pivoting; rejects pivots below `rel_threshold`·‖A‖_∞.
pub fn solve_system(sys: &SlabSystem, slab: usize, gamma: f64, rel_threshold: f64) -> Result<Vec<f64>> {
    let a = &sys.matrix;
    let norm = (0..a.nrows())
        .map(|i| a.row(i).iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let lu = a.clone().lu();
    let u = lu.u();
    let pivot = (0..u.nrows()).map(|i| u[(i, i)].abs()).fold(f64::INFINITY, f64::min);
    let threshold = rel_threshold * norm;
    if !(pivot >= threshold) || norm == 0.0 {
        return Err(Error::SingularSystem {
            slab,
            pivot,
            threshold,
            gamma,
        });
    }
    let x = lu.solve(&sys.rhs).ok_or(Error::SingularSystem {
        slab,
        pivot,
        threshold,
        gamma,
    })?;
    Ok(x.iter().copied().collect())
}

/// Full coefficient vector from unknowns and initial data.
pub fn expand_solution(space: &SlabSpace, init: &SlabSolution, x: &[f64]) -> SlabSolution {
    let mut s = init.clone();
    for (k, &(d, i)) in space.trial_dofs.iter().enumerate() {
        s.set(d, i, x[k]);
    }
    s
}
