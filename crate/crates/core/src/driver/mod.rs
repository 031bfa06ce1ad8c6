//! Time marching, error metrics and convergence studies.

pub mod problems;
pub mod studies;

use std::time::Instant;

use crate::assembly::{assemble_slab, expand_solution, solve_system, FinalPenalty, SlabContext, SlabSystem, UpwindData};
use crate::basis::GaussRule;
use crate::deform::{build_slab_deformation, transfer_elementwise, transfer_elementwise_with, SlabDeformation};
use crate::error::{Error, Result};
use crate::levelset::{interpolate_levelset, LevelSetSlab, ProblemDefinition};
use crate::mesh::{build_mesh, build_slabs, BackgroundMesh, TimeSlabbing};
use crate::quadrature::{fixed_time_cut_rule, st_rule_topology_preserving, RuleMode};
use crate::regions::{build_regions, check_extension_constraint, ActiveRegions};
use crate::spaces::{build_slab_space, Method, SlabSolution, SlabSpace};

#[derive(Debug, Clone, PartialEq)]
pub struct MethodConfig {
    pub method: Method,
    pub k_s: usize,
    pub k_t: usize,
    pub q_s: usize,
    pub q_t: usize,
    pub gamma: f64,
    pub eps_f: f64,
    pub rule_mode: RuleMode,
    pub i_s: usize,
    pub i_t: usize,
    /// Relative pivot threshold of the slab solver; 0 disables the singularity check.
    pub pivot_tol: f64,
    /// Spatial exactness of cut rules; defaults to 2 k_s + q_s.
    pub spatial_exactness: Option<usize>,
    /// Scaling of the CG final-time ghost penalty.
    pub final_penalty: FinalPenalty,
}

impl MethodConfig {
    /// k = q configuration with the default stabilization parameters.
    pub fn new(method: Method, k: usize) -> Self {
        Self {
            method,
            k_s: k,
            k_t: k,
            q_s: k,
            q_t: k,
            gamma: 0.05,
            eps_f: 1.1,
            rule_mode: RuleMode::TopologyPreserving,
            i_s: 0,
            i_t: 0,
            pivot_tol: 1e-13,
            spatial_exactness: None,
            final_penalty: FinalPenalty::TimeStep,
        }
    }

    pub fn with_levels(mut self, i_s: usize, i_t: usize) -> Self {
        self.i_s = i_s;
        self.i_t = i_t;
        self
    }

    pub fn exactness(&self) -> usize {
        self.spatial_exactness.unwrap_or(2 * self.k_s + self.q_s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma >= 0.0) {
            return Err(Error::InvalidInput(format!("gamma_J = {} must be nonnegative", self.gamma)));
        }
        if !(self.eps_f >= 1.0) {
            return Err(Error::InvalidInput(format!("eps_f = {} must be at least 1", self.eps_f)));
        }
        if self.k_s < 1 || self.q_s < 1 {
            return Err(Error::InvalidInput("spatial orders must be at least 1".into()));
        }
        if self.method == Method::Gcc && self.k_t != 3 {
            return Err(Error::UnsupportedBasis(format!("GCC requires k_t = 3, got {}", self.k_t)));
        }
        if self.method.is_continuous() && self.k_t < 1 {
            return Err(Error::UnsupportedBasis("continuous methods need k_t >= 1".into()));
        }
        if self.method.is_continuous() && self.q_t < 1 {
            return Err(Error::InvalidInput("continuous methods need q_t >= 1".into()));
        }
        Ok(())
    }

    /// One-line description used in output headers.
    pub fn describe(&self) -> String {
        let rule = match self.rule_mode {
            RuleMode::TopologyPreserving => "preserve".to_string(),
            RuleMode::TopologyInsensitive { substeps, order_factor } => {
                format!("insensitive substeps={substeps} order_factor={order_factor}")
            }
        };
        let basis = match self.method {
            Method::Gcc => "cubic_hermite",
            _ => "gauss_lobatto_lagrange",
        };
        format!(
            "method={} ks={} kt={} qs={} qt={} gamma={:e} epsf={} tint={} temporal_basis={} pivot_tol={:e} final_penalty={}",
            self.method.name(),
            self.k_s,
            self.k_t,
            self.q_s,
            self.q_t,
            self.gamma,
            self.eps_f,
            rule,
            basis,
            self.pivot_tol,
            match self.final_penalty {
                FinalPenalty::Plain => "plain",
                FinalPenalty::TimeStep => "dt",
            }
        )
    }
}

/// Mesh with h = 0.5^{i_s+1}.
pub fn mesh_for(prob: &ProblemDefinition, i_s: usize) -> Result<BackgroundMesh> {
    let (lo, hi) = prob.domain;
    let h = 0.5f64.powi(i_s as i32 + 1);
    let n = ((hi - lo) / h).round().max(1.0) as usize;
    build_mesh(lo, hi, n)
}

/// 2^{i_t+1} slabs on [0, T].
pub fn slabs_for(prob: &ProblemDefinition, i_t: usize) -> Result<TimeSlabbing> {
    build_slabs(prob.t_end, 1usize << (i_t + 1))
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ErrorReport {
    pub l2_final: f64,
    pub l2l2: f64,
    pub geom_dist: f64,
    pub nze_min: usize,
    pub nze_max: usize,
    pub wall_s: f64,
}

/// Everything computed on one slab.
#[derive(Debug, Clone)]
pub struct SlabState {
    pub ls: LevelSetSlab,
    pub regions: ActiveRegions,
    pub def: SlabDeformation,
    pub space: SlabSpace,
    pub init: SlabSolution,
    pub solution: SlabSolution,
    pub nze: usize,
}

#[derive(Debug, Clone)]
pub struct MarchResult {
    pub report: ErrorReport,
    pub last: SlabState,
}

pub fn march(cfg: &MethodConfig, prob: &ProblemDefinition) -> Result<MarchResult> {
    march_with(cfg, prob, |_, _| {})
}

/// Time marching; `observer` sees each finished slab together with its predecessor.
pub fn march_with(
    cfg: &MethodConfig,
    prob: &ProblemDefinition,
    mut observer: impl FnMut(&SlabState, Option<&SlabState>),
) -> Result<MarchResult> {
    cfg.validate()?;
    let start = Instant::now();
    let mesh = mesh_for(prob, cfg.i_s)?;
    let slabs = slabs_for(prob, cfg.i_t)?;
    let mut prev: Option<SlabState> = None;
    let mut l2l2_sq = 0.0;
    let mut geom = 0.0f64;
    let mut nze_min = usize::MAX;
    let mut nze_max = 0;
    for n in 1..=slabs.n_slabs {
        let state = solve_slab(cfg, prob, &mesh, &slabs, n, prev.as_ref())?;
        if let Some(u) = &prob.u_exact {
            l2l2_sq += slab_l2_sq(cfg, &state, u);
        }
        geom = geom.max(geometry_distance(&state, prob));
        nze_min = nze_min.min(state.nze);
        nze_max = nze_max.max(state.nze);
        observer(&state, prev.as_ref());
        prev = Some(state);
    }
    let last = prev.expect("at least one slab");
    let l2_final = match &prob.u_exact {
        Some(u) => final_l2(cfg, &last, u).sqrt(),
        None => 0.0,
    };
    Ok(MarchResult {
        report: ErrorReport {
            l2_final,
            l2l2: l2l2_sq.sqrt(),
            geom_dist: geom,
            nze_min,
            nze_max,
            wall_s: start.elapsed().as_secs_f64(),
        },
        last,
    })
}

/// Builds, assembles and solves slab `n` given the previous slab.
pub fn solve_slab(
    cfg: &MethodConfig,
    prob: &ProblemDefinition,
    mesh: &BackgroundMesh,
    slabs: &TimeSlabbing,
    n: usize,
    prev: Option<&SlabState>,
) -> Result<SlabState> {
    let ls = interpolate_levelset(prob, mesh, slabs, n, cfg.q_s, cfg.q_t)?;
    let regions = build_regions(&ls, cfg.eps_f, prob.w_inf);
    if cfg.method.is_continuous() {
        if let Some(p) = prev {
            if !check_extension_constraint(&p.regions, &regions.elems_e) {
                return Err(Error::ConstraintViolation {
                    slab: n - 1,
                    next: n,
                    eps_f: cfg.eps_f,
                });
            }
        }
    }
    let def = build_slab_deformation(&ls, &regions)?;
    let space = build_slab_space(cfg.method, cfg.k_s, cfg.k_t, &regions, mesh, ls.t0, ls.t1)?;
    let init = initial_data(prob, &ls, &def, &space, prev)?;
    let field;
    let upwind = match (cfg.method, prev) {
        (Method::Dg, None) => Some(UpwindData::Exact(&*prob.u0)),
        (Method::Dg, Some(p)) => {
            let elems: Vec<bool> = regions
                .elems_e
                .iter()
                .zip(&p.regions.elems_e)
                .map(|(&a, &b)| a && b)
                .collect();
            let (gm, _) = p.solution.trace(&p.space, ls.t0);
            field = transfer_elementwise(&gm, &space.spatial, &p.def, &def, &elems, ls.t0)?;
            Some(UpwindData::Field(&field))
        }
        _ => None,
    };
    let ctx = SlabContext {
        prob,
        ls: &ls,
        regions: &regions,
        def: &def,
        space: &space,
        gamma: cfg.gamma,
        rule_mode: cfg.rule_mode,
        spatial_exactness: cfg.exactness(),
        final_penalty: cfg.final_penalty,
    };
    let sys: SlabSystem = assemble_slab(&ctx, &init, upwind.as_ref());
    let x = solve_system(&sys, n, cfg.gamma, cfg.pivot_tol)?;
    let solution = expand_solution(&space, &init, &x);
    Ok(SlabState {
        ls,
        regions,
        def,
        space,
        init,
        solution,
        nze: sys.nze,
    })
}

/// Constrained layers u_init: transferred value (and physical time derivative for GCC).
pub fn initial_data(
    prob: &ProblemDefinition,
    ls: &LevelSetSlab,
    def: &SlabDeformation,
    space: &SlabSpace,
    prev: Option<&SlabState>,
) -> Result<SlabSolution> {
    let mut init = SlabSolution::zeros(space);
    if space.constrained.is_empty() {
        return Ok(init);
    }
    let mesh = &ls.mesh;
    let sp = &space.spatial;
    let t0 = ls.t0;
    let need_dt = space.constrained.len() > 1;
    let (value, deriv) = match prev {
        None => {
            let elems = &space.init_elements;
            let v = nodal_at_mapped(sp, mesh, def, elems, t0, |y| (prob.u0)(y));
            let d = if need_dt {
                let u0_dt = prob
                    .u0_dt
                    .as_ref()
                    .ok_or_else(|| Error::InvalidInput("problem lacks the initial time derivative".into()))?;
                Some(nodal_at_mapped(sp, mesh, def, elems, t0, |y| u0_dt(y)))
            } else {
                None
            };
            (v, d)
        }
        Some(p) => {
            let elems: Vec<bool> = space
                .init_elements
                .iter()
                .zip(&p.regions.elems_eplus)
                .map(|(&a, &b)| a && b)
                .collect();
            let (gm, gdot) = p.solution.trace(&p.space, t0);
            let v = transfer_elementwise(&gm, sp, &p.def, def, &elems, t0)?.to_continuous(sp);
            let d = if need_dt {
                let pd = &p.def;
                let f = transfer_elementwise_with(sp, pd, def, &elems, t0, |e, _, z| {
                    let xi = mesh.reference(e, z);
                    let (_, gx) = sp.eval_local_with_deriv(&gm, e, xi);
                    let gt = sp.eval_local(&gdot, e, xi);
                    let (_, jx, jt) = pd.eval_on(e, z, t0);
                    gt - gx / mesh.h * jt / jx
                })?;
                Some(f.to_continuous(sp))
            } else {
                None
            };
            (v, d)
        }
    };
    let (g0, defined) = value;
    for d in 0..sp.n_dofs() {
        if defined[d] {
            init.set(d, 0, g0[d]);
        }
    }
    if let Some((phys_dt, _)) = deriv {
        // reference derivative so that the physical ∂t at Θ^+(x_j) equals the transferred one
        let mut g1 = vec![0.0; sp.n_dofs()];
        for e in 0..mesh.n_elements {
            if !space.init_elements[e] {
                continue;
            }
            for a in 0..sp.n_local() {
                let dof = sp.dof(e, a);
                if !defined[dof] {
                    continue;
                }
                let corr = if a == 0 || a == sp.degree {
                    0.0
                } else {
                    let xj = sp.node(mesh, e, a);
                    let (_, gx) = sp.eval_local_with_deriv(&g0, e, sp.basis.nodes()[a]);
                    let (_, jx, jt) = def.eval_on(e, xj, t0);
                    gx / mesh.h * jt / jx
                };
                g1[dof] = phys_dt[dof] + corr;
            }
        }
        for d in 0..sp.n_dofs() {
            if defined[d] {
                init.set(d, 1, g1[d]);
            }
        }
    }
    Ok(init)
}

/// Nodal values g(Θ(x_j, t)) on the given elements.
fn nodal_at_mapped(
    sp: &crate::fe::SpatialSpace,
    mesh: &BackgroundMesh,
    def: &SlabDeformation,
    elems: &[bool],
    t: f64,
    g: impl Fn(f64) -> f64,
) -> (Vec<f64>, Vec<bool>) {
    let mut v = vec![0.0; sp.n_dofs()];
    let mut defined = vec![false; sp.n_dofs()];
    for e in 0..mesh.n_elements {
        if !elems[e] {
            continue;
        }
        for a in 0..sp.n_local() {
            let d = sp.dof(e, a);
            let y = def.eval_on(e, sp.node(mesh, e, a), t).0;
            v[d] = g(y);
            defined[d] = true;
        }
    }
    (v, defined)
}

fn slab_l2_sq(cfg: &MethodConfig, st: &SlabState, u: &(dyn Fn(f64, f64) -> f64 + Send + Sync)) -> f64 {
    let mesh = &st.ls.mesh;
    let mut s = 0.0;
    for e in 0..mesh.n_elements {
        if !st.regions.elems_e[e] {
            continue;
        }
        let rule = st_rule_topology_preserving(&st.ls, e, cfg.k_t + 2, cfg.exactness() + 4);
        for p in &rule.points {
            let (y, jx, _) = st.def.eval_on(e, p.x, p.t);
            let (uh, _, _) = st.solution.eval_ref(&st.space, mesh, e, p.x, p.t);
            let d = uh - u(y, p.t);
            s += p.w * jx * d * d;
        }
    }
    s
}

fn final_l2(cfg: &MethodConfig, st: &SlabState, u: &(dyn Fn(f64, f64) -> f64 + Send + Sync)) -> f64 {
    let t = st.ls.t1;
    let mesh = &st.ls.mesh;
    fixed_time_cut_rule(&st.ls, &st.def, t, cfg.exactness() + 4, &st.regions.elems_e)
        .iter()
        .map(|p| {
            let (uh, _, _) = st.solution.eval_ref(&st.space, mesh, p.element, p.x, t);
            let d = uh - u(p.y, t);
            p.w * d * d
        })
        .sum()
}

/// Mapped zeros of φ^lin(·, t) on element e at time t.
pub fn mapped_zeros(ls: &LevelSetSlab, def: &SlabDeformation, t: f64) -> Vec<f64> {
    let mesh = &ls.mesh;
    let mut out = Vec::new();
    for e in 0..mesh.n_elements {
        let a = ls.vertex_value(e, t);
        let b = ls.vertex_value(e + 1, t);
        if (a < 0.0) != (b < 0.0) && a != b {
            let (xl, xr) = mesh.element_bounds(e);
            let x = (xl + (xr - xl) * a / (a - b)).clamp(xl, xr);
            out.push(def.eval_on(e, x, t).0);
        }
    }
    out
}

/// max over sample times of the distance between mapped discrete and exact boundary points.
pub fn geometry_distance(st: &SlabState, prob: &ProblemDefinition) -> f64 {
    let Some(bnd) = &prob.boundary else { return 0.0 };
    let (t0, t1) = (st.ls.t0, st.ls.t1);
    let mut times = vec![t0, t1];
    times.extend(GaussRule::new(5).mapped(t0, t1).map(|(t, _)| t));
    let mut worst = 0.0f64;
    for t in times {
        let exact = bnd(t);
        if exact.is_empty() {
            continue;
        }
        for y in mapped_zeros(&st.ls, &st.def, t) {
            let d = exact.iter().map(|b| (y - b).abs()).fold(f64::INFINITY, f64::min);
            worst = worst.max(d);
        }
    }
    worst
}
