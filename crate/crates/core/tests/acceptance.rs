//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits non-zero on any failure.

use std::process::ExitCode;
use std::time::Instant;

use nalgebra::{DMatrix, SymmetricEigen};

use stfem::assembly::{Assembler, PenaltyMode, SlabContext};
use stfem::deform::SlabDeformation;
use stfem::driver::problems::{manufactured_fitted_static, manufactured_moving_interval, manufactured_poly_test};
use stfem::driver::studies::{final_order, run_convergence, run_nze_study, run_superconvergence, run_tint_comparison, Refine, Row};
use stfem::driver::{mapped_zeros, march, march_with, MethodConfig, SlabState};
use stfem::levelset::{LevelSetSlab, ProblemDefinition};
use stfem::quadrature::{st_rule_topology_preserving_part, Part, RuleMode};
use stfem::spaces::{Method, SlabSolution, SlabSpace};

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self { pass, detail: detail.into() }
    }
}

fn l2_final(rows: &[Row]) -> Vec<f64> {
    rows.iter().map(|r| r.l2_final).collect()
}

fn l2l2(rows: &[Row]) -> Vec<f64> {
    rows.iter().map(|r| r.l2l2).collect()
}

fn convergence(method: Method, ks: &[usize], levels: impl Fn(usize) -> usize, both_norms: bool) -> Outcome {
    let prob = manufactured_moving_interval();
    let mut pass = true;
    let mut parts = Vec::new();
    for &k in ks {
        let nlev = levels(k);
        match run_convergence(&MethodConfig::new(method, k), &prob, Refine::Both, 0, nlev) {
            Ok(rows) => {
                let of = final_order(&l2_final(&rows));
                let o2 = final_order(&l2l2(&rows));
                let need = k as f64 + 0.6;
                let ok = of >= need && (!both_norms || o2 >= need);
                pass &= ok;
                parts.push(format!(
                    "k={k} levels 0..{} order(T)={of:.2} order(L2L2)={o2:.2} need {need:.1}{}",
                    nlev - 1,
                    if ok { "" } else { " <-" }
                ));
            }
            Err(e) => {
                pass = false;
                parts.push(format!("k={k} error: {e}"));
            }
        }
    }
    Outcome::new(pass, parts.join("; "))
}

fn criterion_1() -> Outcome {
    convergence(Method::Dg, &[1, 2, 3], |k| 7 - k, true)
}

fn criterion_2() -> Outcome {
    convergence(Method::Cg, &[1, 2, 3, 4], |k| 7 - k, true)
}

fn criterion_3() -> Outcome {
    let prob = manufactured_moving_interval();
    match run_convergence(&MethodConfig::new(Method::Gcc, 3), &prob, Refine::Both, 0, 5) {
        Ok(rows) => {
            let of = final_order(&l2_final(&rows));
            let o2 = final_order(&l2l2(&rows));
            Outcome::new(of >= 3.6, format!("order(T)={of:.2} (L2L2 {o2:.2}) need 3.6"))
        }
        Err(e) => Outcome::new(false, format!("error: {e}")),
    }
}

fn criterion_4() -> Outcome {
    let prob = manufactured_moving_interval();
    let mut pass = true;
    let mut parts = Vec::new();
    for q in 1..=3 {
        match run_convergence(&MethodConfig::new(Method::Dg, q), &prob, Refine::Both, 0, 7 - q) {
            Ok(rows) => {
                let g: Vec<f64> = rows.iter().map(|r| r.geom_dist).collect();
                let decreasing = g.windows(2).all(|w| w[1] < w[0]);
                let o = final_order(&g);
                let need = q as f64 + 0.6;
                let ok = decreasing && o >= need;
                pass &= ok;
                parts.push(format!("q={q} order={o:.2} need {need:.1} monotone={decreasing}"));
            }
            Err(e) => {
                pass = false;
                parts.push(format!("q={q} error: {e}"));
            }
        }
    }
    Outcome::new(pass, parts.join("; "))
}

fn criterion_5() -> Outcome {
    let prob = manufactured_poly_test();
    let mut template = MethodConfig::new(Method::Dg, 4).with_levels(2, 0);
    let run = |cfg: &MethodConfig, mode: RuleMode| -> stfem::Result<Vec<Row>> {
        Ok(run_tint_comparison(cfg, &prob, &[mode], 2..=5)?.remove(0).1)
    };
    let preserved = match run(&template, RuleMode::TopologyPreserving) {
        Ok(r) => r,
        Err(e) => return Outcome::new(false, format!("preserving rule: {e}")),
    };
    let worst_pres = preserved.iter().map(|r| r.l2_final).fold(0.0, f64::max);
    template.gamma = 5e-20;
    template.pivot_tol = 0.0;
    let plain = run(&template, RuleMode::TopologyInsensitive { substeps: 1, order_factor: 1 });
    let sub = run(&template, RuleMode::TopologyInsensitive { substeps: 10, order_factor: 1 });
    let (plain, sub) = match (plain, sub) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => return Outcome::new(false, format!("insensitive rule: {e}")),
    };
    let (lvl, worst) = plain
        .iter()
        .filter(|r| r.i >= 3)
        .map(|r| (r.i, r.l2_final))
        .fold((0, 0.0), |a, b| if b.1 > a.1 { b } else { a });
    let reduced = sub.iter().find(|r| r.i == lvl).map(|r| r.l2_final).unwrap_or(f64::NAN);
    let ratio = worst / reduced;
    let pass = worst_pres <= 1e-9 && worst > 1e-6 && ratio >= 100.0;
    Outcome::new(
        pass,
        format!(
            "preserving max={worst_pres:.2e} (<=1e-9); insensitive worst={worst:.2e} at i_s={lvl} (>1e-6); 10 substeps {reduced:.2e}, reduction {ratio:.1e} (>=100)"
        ),
    )
}

fn criterion_6() -> Outcome {
    let prob = manufactured_moving_interval();
    let mut pass = true;
    let mut parts = Vec::new();
    for g in [5e4, 5.0, 0.05, 5e-4] {
        let mut cfg = MethodConfig::new(Method::Dg, 4);
        cfg.gamma = g;
        match run_convergence(&cfg, &prob, Refine::Both, 0, 4) {
            Ok(rows) => {
                let o = final_order(&l2_final(&rows));
                let o2 = final_order(&l2l2(&rows));
                pass &= o >= 4.5;
                parts.push(format!("gamma={g:e} order(T)={o:.2} (L2L2 {o2:.2})"));
            }
            Err(e) => {
                pass = false;
                parts.push(format!("gamma={g:e} error: {e}"));
            }
        }
    }
    Outcome::new(pass, format!("{} need 4.5", parts.join("; ")))
}

fn criterion_7() -> Outcome {
    let prob = manufactured_moving_interval();
    let i_ts = [1, 3, 5];
    let lookup = |v: &[(Method, usize, usize)], m: Method, it: usize| {
        v.iter().find(|c| c.0 == m && c.1 == it).map(|c| c.2).unwrap_or(0)
    };
    let mut pass = true;
    let mut parts = Vec::new();
    match run_nze_study(&prob, &[Method::Dg, Method::Cg, Method::Gcc], 3, 1.1, 2, &i_ts) {
        Ok(v) => {
            for &it in &i_ts {
                let (d, c, g) = (lookup(&v, Method::Dg, it), lookup(&v, Method::Cg, it), lookup(&v, Method::Gcc, it));
                pass &= d > c && c > g;
                parts.push(format!("i_t={it}: DG {d} > CG {c} > GCC {g}"));
            }
        }
        Err(e) => return Outcome::new(false, format!("error: {e}")),
    }
    for k in 1..=3 {
        match run_nze_study(&prob, &[Method::Cg, Method::CgBox], k, 1.1, 2, &i_ts) {
            Ok(v) => {
                for &it in &i_ts {
                    let (c, b) = (lookup(&v, Method::Cg, it), lookup(&v, Method::CgBox, it));
                    if b < c {
                        pass = false;
                        parts.push(format!("k={k} i_t={it}: CGbox {b} < CG {c}"));
                    }
                }
            }
            Err(e) => return Outcome::new(false, format!("k={k} error: {e}")),
        }
    }
    parts.push("CGbox >= CG for k=1..3".into());
    Outcome::new(pass, parts.join("; "))
}

fn criterion_8() -> Outcome {
    let prob = manufactured_moving_interval();
    match run_superconvergence(&prob, 1, 3, 3, 5, 1..=4) {
        Ok(rows) => {
            let of = final_order(&l2_final(&rows));
            let o2 = final_order(&l2l2(&rows));
            let pass = of >= 2.5 && (1.6..=2.4).contains(&o2);
            Outcome::new(pass, format!("order(T)={of:.2} (>=2.5), order(L2L2)={o2:.2} (in [1.6, 2.4])"))
        }
        Err(e) => Outcome::new(false, format!("error: {e}")),
    }
}

// ---------------------------------------------------------------------------
// property suites

/// Vector-valued adaptive Gauss-Kronrod (7, 15).
fn adapt(f: &dyn Fn(f64) -> Vec<f64>, a: f64, b: f64, atol: f64, depth: usize, acc: &mut [f64]) {
    const XGK: [f64; 8] = [
        0.991455371120812639206854697526329,
        0.949107912342758524526189684047851,
        0.864864423359769072789712788640926,
        0.741531185599394439863864773280788,
        0.586087235467691130294144845693013,
        0.405845151377397166906606412076961,
        0.207784955007898467600689403773245,
        0.0,
    ];
    const WGK: [f64; 8] = [
        0.022935322010529224963732008058970,
        0.063092092629978553290700663189204,
        0.104790010322250183839876322541518,
        0.140653259715525918745189590510238,
        0.169004726639267902826583426598550,
        0.190350578064785409913256402421014,
        0.204432940075298892414161999234649,
        0.209482141084727828012999174891714,
    ];
    const WG: [f64; 4] = [
        0.129484966168869693270611432679082,
        0.279705391489276667901467771423780,
        0.381830050505118944950369775488975,
        0.417959183673469387755102040816327,
    ];
    let c = 0.5 * (a + b);
    let r = 0.5 * (b - a);
    let n = acc.len();
    let mut k = vec![0.0; n];
    let mut g = vec![0.0; n];
    for (idx, &x) in XGK.iter().enumerate() {
        let pts: &[f64] = if x == 0.0 { &[0.0] } else { &[-1.0, 1.0] };
        for s in pts {
            let v = f(c + s * r * x);
            for m in 0..n {
                k[m] += WGK[idx] * v[m];
                if idx % 2 == 1 {
                    g[m] += WG[idx / 2] * v[m];
                }
            }
        }
    }
    let err = k.iter().zip(&g).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) * r;
    let size = k.iter().fold(0.0, |m: f64, v| m.max(v.abs())) * r;
    if err <= atol.max(1e-14 * size) || depth == 0 {
        for m in 0..n {
            acc[m] += r * k[m];
        }
    } else {
        adapt(f, a, c, 0.5 * atol, depth - 1, acc);
        adapt(f, c, b, 0.5 * atol, depth - 1, acc);
    }
}

fn integrate(f: &dyn Fn(f64) -> Vec<f64>, a: f64, b: f64, n: usize, atol: f64) -> Vec<f64> {
    let mut acc = vec![0.0; n];
    if b > a {
        adapt(f, a, b, atol, 30, &mut acc);
    }
    acc
}

/// Part of element e where the vertex interpolant is non-positive.
fn inside_segment(ls: &LevelSetSlab, e: usize, t: f64) -> Option<(f64, f64)> {
    let (xl, xr) = ls.mesh.element_bounds(e);
    let va = ls.vertex_value(e, t);
    let vb = ls.vertex_value(e + 1, t);
    match (va <= 0.0, vb <= 0.0) {
        (true, true) => Some((xl, xr)),
        (false, false) => None,
        (na, _) => {
            let xs = xl + (xr - xl) * va / (va - vb);
            Some(if na { (xl, xs) } else { (xs, xr) })
        }
    }
}

fn collect_slabs(cfg: &MethodConfig, prob: &ProblemDefinition, keep: &[usize]) -> Vec<SlabState> {
    let mut out = Vec::new();
    march_with(cfg, prob, |st, _| {
        if keep.contains(&st.ls.slab_index) {
            out.push(st.clone());
        }
    })
    .expect("march");
    out
}

fn context<'a>(prob: &'a ProblemDefinition, st: &'a SlabState, def: &'a SlabDeformation, cfg: &MethodConfig) -> SlabContext<'a> {
    SlabContext {
        prob,
        ls: &st.ls,
        regions: &st.regions,
        def,
        space: &st.space,
        gamma: cfg.gamma,
        rule_mode: cfg.rule_mode,
        spatial_exactness: cfg.exactness(),
        final_penalty: cfg.final_penalty,
    }
}

fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |a, &v| a.max(v.abs()))
}

fn scatter(sp: &SlabSpace, dofs: &[usize], ltest: usize, ltrial: usize, local: &[f64], out: &mut DMatrix<f64>) {
    let n = dofs.len();
    for b in 0..n {
        for j in 0..ltest {
            let Some(row) = sp.test_row(dofs[b], j) else { continue };
            for a in 0..n {
                for i in 0..ltrial {
                    if let Some(col) = sp.trial_unknown(dofs[a], i) {
                        out[(row, col)] += local[(b * ltest + j) * n * ltrial + a * ltrial + i];
                    }
                }
            }
        }
    }
}

/// B^n volume matrix by nested adaptive integration over the reference prism.
fn oracle_volume(prob: &ProblemDefinition, st: &SlabState) -> DMatrix<f64> {
    let (ls, sp, def) = (&st.ls, &st.space, &st.def);
    let mesh = &ls.mesh;
    let n = sp.spatial.n_local();
    let (nt, ntest) = (sp.n_trial_t(), sp.test.len());
    let size = n * ntest * n * nt;
    let mut out = DMatrix::zeros(sp.n_unknowns(), sp.n_unknowns());
    for e in 0..mesh.n_elements {
        if !st.regions.elems_e[e] {
            continue;
        }
        let at_time = |t: f64| -> Vec<f64> {
            let Some((a, b)) = inside_segment(ls, e, t) else { return vec![0.0; size] };
            let (tv, td) = sp.trial.eval(t);
            let (qv, _) = sp.test.eval(t);
            let in_space = |x: f64| -> Vec<f64> {
                let (y, jx, jt) = def.eval_on(e, x, t);
                let mut sv = vec![0.0; n];
                let mut sd = vec![0.0; n];
                sp.spatial.basis.eval_with_deriv(mesh.reference(e, x), &mut sv, &mut sd);
                sd.iter_mut().for_each(|d| *d /= mesh.h);
                let w = (prob.w)(y, t);
                let mut v = vec![0.0; size];
                for bb in 0..n {
                    for j in 0..ntest {
                        for aa in 0..n {
                            for i in 0..nt {
                                let ux = sd[aa] * tv[i] / jx;
                                let ut = sv[aa] * td[i] - sd[aa] * tv[i] * jt / jx;
                                let test = sv[bb] * qv[j];
                                let test_x = sd[bb] * qv[j] / jx;
                                v[(bb * ntest + j) * n * nt + aa * nt + i] = jx * ((ut + w * ux) * test + ux * test_x);
                            }
                        }
                    }
                }
                v
            };
            integrate(&in_space, a, b, size, 1e-15)
        };
        let local = integrate(&at_time, ls.t0, ls.t1, size, 1e-14);
        scatter(sp, &sp.spatial.element_dofs(e), ntest, nt, &local, &mut out);
    }
    out
}

/// (u_+, v_+) on Ω^h(t_{n-1}).
fn oracle_upwind(st: &SlabState) -> DMatrix<f64> {
    let (ls, sp, def) = (&st.ls, &st.space, &st.def);
    let mesh = &ls.mesh;
    let n = sp.spatial.n_local();
    let (nt, ntest) = (sp.n_trial_t(), sp.test.len());
    let size = n * ntest * n * nt;
    let t0 = ls.t0;
    let (tv, _) = sp.trial.eval(t0);
    let (qv, _) = sp.test.eval(t0);
    let mut out = DMatrix::zeros(sp.n_unknowns(), sp.n_unknowns());
    for e in 0..mesh.n_elements {
        if !st.regions.elems_e[e] {
            continue;
        }
        let Some((a, b)) = inside_segment(ls, e, t0) else { continue };
        let f = |x: f64| -> Vec<f64> {
            let (_, jx, _) = def.eval_on(e, x, t0);
            let sv = sp.spatial.basis.values(mesh.reference(e, x));
            let mut v = vec![0.0; size];
            for bb in 0..n {
                for j in 0..ntest {
                    for aa in 0..n {
                        for i in 0..nt {
                            v[(bb * ntest + j) * n * nt + aa * nt + i] = jx * sv[aa] * tv[i] * sv[bb] * qv[j];
                        }
                    }
                }
            }
            v
        };
        let local = integrate(&f, a, b, size, 1e-15);
        scatter(sp, &sp.spatial.element_dofs(e), ntest, nt, &local, &mut out);
    }
    out
}

/// Time-integrated direct ghost penalty for an undeformed patch: jumps of the two polynomial extensions.
fn oracle_ghost_penalty(st: &SlabState, gamma: f64) -> DMatrix<f64> {
    let (ls, sp) = (&st.ls, &st.space);
    let mesh = &ls.mesh;
    let h = mesh.h;
    let n = sp.spatial.n_local();
    let (nt, ntest) = (sp.n_trial_t(), sp.test.len());
    let gt = (1.0 + ls.dt() / h) * gamma;
    let time = integrate(
        &|t: f64| {
            let (tv, _) = sp.trial.eval(t);
            let (qv, _) = sp.test.eval(t);
            let mut v = vec![0.0; ntest * nt];
            for j in 0..ntest {
                for i in 0..nt {
                    v[j * nt + i] = qv[j] * tv[i];
                }
            }
            v
        },
        ls.t0,
        ls.t1,
        ntest * nt,
        1e-16,
    );
    let mut out = DMatrix::zeros(sp.n_unknowns(), sp.n_unknowns());
    for f in mesh.interior_facets() {
        if !st.regions.facets_rext[f] {
            continue;
        }
        let (e1, e2) = mesh.facet_patch(f);
        let m = 2 * n;
        let jumps = |x: f64| -> Vec<f64> {
            let p1 = sp.spatial.basis.values(mesh.reference(e1, x));
            let p2 = sp.spatial.basis.values(mesh.reference(e2, x));
            let jmp: Vec<f64> = p1.iter().copied().chain(p2.iter().map(|v| -v)).collect();
            let mut v = vec![0.0; m * m];
            for k in 0..m {
                for l in 0..m {
                    v[k * m + l] = jmp[k] * jmp[l];
                }
            }
            v
        };
        let (lo, _) = mesh.element_bounds(e1);
        let (_, hi) = mesh.element_bounds(e2);
        let space = integrate(&jumps, lo, hi, m * m, 1e-16);
        let dofs: Vec<usize> = sp.spatial.element_dofs(e1).into_iter().chain(sp.spatial.element_dofs(e2)).collect();
        let mut local = vec![0.0; m * ntest * m * nt];
        for b in 0..m {
            for j in 0..ntest {
                for a in 0..m {
                    for i in 0..nt {
                        local[(b * ntest + j) * m * nt + a * nt + i] = gt / (h * h) * space[b * m + a] * time[j * nt + i];
                    }
                }
            }
        }
        scatter(sp, &dofs, ntest, nt, &local, &mut out);
    }
    out
}

/// Gated cases are those where the slab forms are polynomial on every quadrature piece
/// (static cut, polynomial ghost-penalty jumps, fixed-time upwind); moving cuts are reported only.
fn suite_oracle() -> Outcome {
    let mut worst = 0.0f64;
    let mut info = 0.0f64;
    let mut parts = Vec::new();
    let cases = [
        (static_cut(), MethodConfig::new(Method::Dg, 3).with_levels(2, 1), true),
        (static_cut(), MethodConfig::new(Method::Cg, 2).with_levels(2, 1), true),
        (static_cut(), MethodConfig::new(Method::Gcc, 3).with_levels(2, 1), true),
        (manufactured_poly_test(), MethodConfig::new(Method::Dg, 4).with_levels(3, 0), false),
        (manufactured_moving_interval(), MethodConfig::new(Method::Dg, 2).with_levels(2, 2), false),
    ];
    for (prob, cfg, exact_volume) in &cases {
        for st in collect_slabs(cfg, prob, &[1, 2]) {
            let init = SlabSolution::zeros(&st.space);
            let ctx = context(prob, &st, &st.def, cfg);
            let mut asm = Assembler::new(&ctx, &init);
            asm.add_volume();
            let d_vol = max_abs(&(asm.finish().matrix - oracle_volume(prob, &st)));
            let mut line = format!("{} {} slab {}: volume {d_vol:.1e}", prob.name, cfg.method.name(), st.ls.slab_index);
            if *exact_volume {
                worst = worst.max(d_vol);
            } else {
                info = info.max(d_vol);
                line += " (not gated)";
            }
            if cfg.method == Method::Dg {
                let mut asm = Assembler::new(&ctx, &init);
                asm.add_upwind(&stfem::assembly::UpwindData::Exact(&|_| 0.0));
                let d_upw = max_abs(&(asm.finish().matrix - oracle_upwind(&st)));
                worst = worst.max(d_upw);
                line += &format!(", upwind {d_upw:.1e}");
                if st.def.is_identity() {
                    let mut asm = Assembler::new(&ctx, &init);
                    asm.add_ghost_penalty(&st.regions.facets_rext, PenaltyMode::TimeIntegrated);
                    let d_gp = max_abs(&(asm.finish().matrix - oracle_ghost_penalty(&st, cfg.gamma)));
                    worst = worst.max(d_gp);
                    line += &format!(", ghost penalty {d_gp:.1e}");
                }
            }
            parts.push(line);
        }
    }
    Outcome::new(
        worst <= 1e-10,
        format!(
            "max |A - A_oracle| = {worst:.1e} (<=1e-10); moving-cut volume deviation {info:.1e} (quadrature-limited); {}",
            parts.join(", ")
        ),
    )
}

fn suite_quadrature() -> Outcome {
    let prob = manufactured_moving_interval();
    let cfg = MethodConfig::new(Method::Dg, 2).with_levels(2, 2);
    let mut min_w = f64::INFINITY;
    let mut worst_add = 0.0f64;
    let tests: [&dyn Fn(f64, f64) -> f64; 3] = [&|_, _| 1.0, &|x, t| x + 3.0 * t, &|x, t| x * x * t - t * t];
    march_with(&cfg, &prob, |st, _| {
        let ex = cfg.exactness();
        for e in 0..st.ls.mesh.n_elements {
            let rin = st_rule_topology_preserving_part(&st.ls, e, 2, ex, Part::Inside);
            let rout = st_rule_topology_preserving_part(&st.ls, e, 2, ex, Part::Outside);
            let rfull = st_rule_topology_preserving_part(&st.ls, e, 2, ex, Part::Full);
            for p in rin.points.iter().chain(&rout.points).chain(&rfull.points) {
                min_w = min_w.min(p.w);
            }
            for g in &tests {
                let d = (rin.integrate(g) + rout.integrate(g) - rfull.integrate(g)).abs();
                worst_add = worst_add.max(d / (st.ls.dt() * st.ls.mesh.h));
            }
        }
    })
    .expect("march");
    Outcome::new(
        min_w > 0.0 && worst_add <= 1e-13,
        format!("min weight {min_w:.1e} (>0); inside+outside-full {worst_add:.1e} (<=1e-13, relative to |K x I_n|)"),
    )
}

fn suite_deformation() -> Outcome {
    let mut fix = 0.0f64;
    let mut min_j = f64::INFINITY;
    let mut nodal = 0.0f64;
    let mut moved = 0.0f64;
    let prob = quadratic_interval();
    for k in [2, 3, 4] {
        let cfg = MethodConfig::new(Method::Dg, k).with_levels(2, 2);
        march_with(&cfg, &prob, |st, _| {
            moved = moved.max(st.def.coeff_maps.iter().flatten().fold(0.0, |a, v| a.max(v.abs())));
            let (ls, def) = (&st.ls, &st.def);
            let mesh = &ls.mesh;
            let times: Vec<f64> = (0..=8).map(|s| ls.t0 + ls.dt() * s as f64 / 8.0).collect();
            for &t in &times {
                for e in 0..mesh.n_elements {
                    let (xl, xr) = mesh.element_bounds(e);
                    fix = fix.max((def.eval_on(e, xl, t).0 - xl).abs()).max((def.eval_on(e, xr, t).0 - xr).abs());
                    for s in 0..=10 {
                        let x = xl + (xr - xl) * s as f64 / 10.0;
                        min_j = min_j.min(def.eval_on(e, x, t).1);
                    }
                }
            }
            for &tau in ls.temporal_basis.nodes() {
                let t = ls.t0 + tau * ls.dt();
                for e in 0..mesh.n_elements {
                    if !st.regions.elems_cut_slab[e] {
                        continue;
                    }
                    for a in 1..ls.space.degree {
                        let xj = ls.space.node(mesh, e, a);
                        let xi = mesh.reference(e, xj);
                        let lin = (1.0 - xi) * ls.vertex_value(e, t) + xi * ls.vertex_value(e + 1, t);
                        let y = def.eval_on(e, xj, t).0;
                        nodal = nodal.max((ls.eval_phih_on(e, y, t).0 - lin).abs());
                    }
                }
            }
        })
        .expect("march");
    }
    // level set linear in space on every cut element: mapped zeros are exact boundary points
    let poly = manufactured_poly_test();
    let bnd = poly.boundary.as_ref().unwrap();
    let mut root = 0.0f64;
    let cfg = MethodConfig::new(Method::Dg, 3).with_levels(3, 1);
    march_with(&cfg, &poly, |st, _| {
        for s in 0..=6 {
            let t = st.ls.t0 + st.ls.dt() * s as f64 / 6.0;
            let exact = bnd(t);
            for z in mapped_zeros(&st.ls, &st.def, t) {
                let d = exact.iter().map(|b| (b - z).abs()).fold(f64::INFINITY, f64::min);
                root = root.max(d);
            }
        }
    })
    .expect("march");
    let pass = moved > 0.0 && fix <= 1e-14 && min_j > 0.0 && nodal <= 1e-10 && root <= 1e-10;
    Outcome::new(
        pass,
        format!(
            "max nodal displacement {moved:.1e}; vertex displacement {fix:.1e} (<=1e-14); min dTheta/dx {min_j:.3} (>0); nodal root residual {nodal:.1e} (<=1e-10); space-linear boundary error {root:.1e} (<=1e-10)"
        ),
    )
}

fn suite_ghost_penalty() -> Outcome {
    let prob = manufactured_moving_interval();
    let cfg = MethodConfig::new(Method::Dg, 2).with_levels(2, 2);
    let poly = |x: f64| 0.3 + x - 2.0 * x * x;
    let mut annihil = 0.0f64;
    let mut min_eig = f64::INFINITY;
    let mut asym = 0.0f64;
    for st in collect_slabs(&cfg, &prob, &[1, 2, 3, 4, 5, 6, 7, 8]) {
        let sp = &st.space;
        let init = SlabSolution::zeros(sp);
        let identity = SlabDeformation::identity(&st.ls);
        let ctx = context(&prob, &st, &identity, &cfg);
        let mut asm = Assembler::new(&ctx, &init);
        asm.add_ghost_penalty(&st.regions.facets_rext, PenaltyMode::TimeIntegrated);
        let a = asm.finish().matrix;
        let mesh = &st.ls.mesh;
        for i0 in 0..sp.n_trial_t() {
            let mut c = nalgebra::DVector::zeros(sp.n_unknowns());
            for (d, i) in sp.trial_dofs.iter().copied() {
                if i == i0 {
                    let e = sp.spatial.dof_elements(d)[0];
                    let a_loc = sp.spatial.element_dofs(e).iter().position(|&x| x == d).unwrap();
                    c[sp.trial_unknown(d, i).unwrap()] = poly(sp.spatial.node(mesh, e, a_loc));
                }
            }
            let r = (&a * &c).amax() / (max_abs(&a) * c.amax() * sp.n_unknowns() as f64).max(1e-300);
            annihil = annihil.max(r);
        }
        let ctx = context(&prob, &st, &st.def, &cfg);
        let mut asm = Assembler::new(&ctx, &init);
        asm.add_ghost_penalty(&st.regions.facets_rext, PenaltyMode::TimeIntegrated);
        let a = asm.finish().matrix;
        // reorder rows so that row k and column k refer to the same (dof, temporal index)
        let mut m = DMatrix::zeros(sp.n_unknowns(), sp.n_unknowns());
        for &(d, j) in &sp.test_dofs {
            let row = sp.test_row(d, j).unwrap();
            let k = sp.trial_unknown(d, j).unwrap();
            m.set_row(k, &a.row(row));
        }
        let scale = max_abs(&m);
        asym = asym.max(max_abs(&(&m - m.transpose())) / scale);
        let eig = SymmetricEigen::new(0.5 * (&m + m.transpose())).eigenvalues;
        min_eig = min_eig.min(eig.min() / scale);
    }
    let pass = annihil <= 1e-13 && asym <= 1e-12 && min_eig >= -1e-12;
    Outcome::new(
        pass,
        format!("polynomial residual {annihil:.1e} (<=1e-13); asymmetry {asym:.1e} (<=1e-12); min eigenvalue/scale {min_eig:.1e} (>=-1e-12)"),
    )
}

/// Same zero set as the moving interval, but quadratic in space so that the deformation is non-trivial.
fn quadratic_interval() -> ProblemDefinition {
    let mut p = manufactured_moving_interval();
    p.name = "quadratic_interval".into();
    p.phi = Box::new(|x, t| {
        let r = x - (2.0 * std::f64::consts::PI * t).sin() / std::f64::consts::PI;
        r * r - 0.25
    });
    p
}

/// Interval [-0.53, 0.53] at rest; vertex 0 sits on the kink so the level set is linear on every element.
fn static_cut() -> ProblemDefinition {
    let mut p = manufactured_moving_interval();
    p.name = "static_cut".into();
    p.phi = Box::new(|x, _| x.abs() - 0.53);
    p.w = Box::new(|_, _| 0.0);
    p.f = Box::new(|x, t| 1.0 + x * t);
    p.u_exact = None;
    p.w_inf = 0.0;
    p.boundary = Some(Box::new(|_| vec![-0.53, 0.53]));
    p
}

fn constant_problem(c: f64) -> ProblemDefinition {
    let mut p = manufactured_moving_interval();
    p.name = "constant".into();
    p.f = Box::new(|_, _| 0.0);
    p.u_exact = Some(Box::new(move |_, _| c));
    p.u0 = Box::new(move |_| c);
    p.u0_dt = Some(Box::new(|_| 0.0));
    p
}

fn suite_reproduction() -> Outcome {
    let mut worst = 0.0f64;
    let mut parts = Vec::new();
    let constant = constant_problem(1.5);
    let fitted = manufactured_fitted_static();
    for m in [Method::Dg, Method::Cg, Method::CgBox, Method::Gcc] {
        let k_const = if m == Method::Gcc { 3 } else { 2 };
        for (prob, k, lvl) in [(&constant, k_const, 2), (&fitted, 3, 1)] {
            match march(&MethodConfig::new(m, k).with_levels(lvl, lvl), prob) {
                Ok(r) => {
                    let e = r.report.l2_final.max(r.report.l2l2);
                    worst = worst.max(e);
                    parts.push(format!("{} {} {e:.1e}", m.name(), prob.name));
                }
                Err(e) => {
                    worst = f64::INFINITY;
                    parts.push(format!("{} {} error: {e}", m.name(), prob.name));
                }
            }
        }
    }
    Outcome::new(worst <= 1e-10, format!("max error {worst:.1e} (<=1e-10); {}", parts.join(", ")))
}

fn suite_continuity() -> Outcome {
    let prob = manufactured_moving_interval();
    let mut layer = 0.0f64;
    let mut value = 0.0f64;
    let mut deriv = 0.0f64;
    for (m, k) in [(Method::Cg, 2), (Method::CgBox, 2), (Method::Gcc, 3)] {
        let cfg = MethodConfig::new(m, k).with_levels(2, 2);
        march_with(&cfg, &prob, |st, prev| {
            let sp = &st.space;
            let nd = sp.spatial.n_dofs();
            for &i in &sp.constrained {
                for d in 0..nd {
                    layer = layer.max((st.solution.get(d, i) - st.init.get(d, i)).abs());
                }
            }
            let Some(p) = prev else { return };
            let (gv, gd) = p.solution.trace(&p.space, st.ls.t0);
            let mesh = &st.ls.mesh;
            for v in 0..mesh.n_vertices() {
                let carried = [v.checked_sub(1), (v < mesh.n_elements).then_some(v)]
                    .into_iter()
                    .flatten()
                    .any(|e| sp.init_elements[e] && p.regions.elems_eplus[e]);
                if !carried {
                    continue;
                }
                value = value.max((st.init.get(v, 0) - gv[v]).abs());
                if m == Method::Gcc {
                    deriv = deriv.max((st.init.get(v, 1) - gd[v]).abs());
                }
            }
        })
        .expect("march");
    }
    let pass = layer == 0.0 && value <= 1e-12 && deriv <= 1e-10;
    Outcome::new(
        pass,
        format!("constrained layers vs initial data {layer:.1e} (==0); vertex value jump {value:.1e} (<=1e-12); GCC vertex d/dt jump {deriv:.1e} (<=1e-10)"),
    )
}

fn criterion_9() -> Outcome {
    let suites: [(&str, fn() -> Outcome); 6] = [
        ("quadrature", suite_quadrature),
        ("deformation", suite_deformation),
        ("ghost penalty", suite_ghost_penalty),
        ("reproduction", suite_reproduction),
        ("continuity", suite_continuity),
        ("matrix oracle", suite_oracle),
    ];
    let mut pass = true;
    let mut lines = Vec::new();
    for (name, f) in suites {
        let start = Instant::now();
        let o = f();
        pass &= o.pass;
        lines.push(format!(
            "\n    [{}] {name} ({:.1} s): {}",
            if o.pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64(),
            o.detail
        ));
    }
    Outcome::new(pass, lines.concat())
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("DG convergence", criterion_1),
        ("CG convergence", criterion_2),
        ("GCC convergence", criterion_3),
        ("geometry accuracy", criterion_4),
        ("quadrature stress test", criterion_5),
        ("gamma_J robustness", criterion_6),
        ("nze ordering", criterion_7),
        ("superconvergence", criterion_8),
        ("property suites", criterion_9),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (n, (name, f)) in criteria.iter().enumerate() {
        let id = format!("criterion {}", n + 1);
        if !filter.is_empty() && !filter.iter().any(|s| id.ends_with(s.as_str()) || name.contains(s.as_str())) {
            continue;
        }
        let start = Instant::now();
        let o = f();
        if !o.pass {
            failed += 1;
        }
        println!(
            "{id} [{}] {name} ({:.1} s): {}",
            if o.pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64(),
            o.detail
        );
    }
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
