//! Refinement studies and .dat output.

use std::io::Write;
use std::path::Path;

use super::{march, MethodConfig};
use crate::error::Result;
use crate::levelset::ProblemDefinition;
use crate::quadrature::RuleMode;
use crate::spaces::Method;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Refine {
    Both,
    Space,
    Time,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub i: usize,
    pub l2_final: f64,
    pub l2l2: f64,
    pub nze_max: usize,
    pub wall_s: f64,
    pub geom_dist: f64,
}

/// Level `i` of a study; the non-refined direction stays at the template's level.
pub fn levels(template: &MethodConfig, refine: Refine, i: usize) -> (usize, usize) {
    match refine {
        Refine::Both => (i, i),
        Refine::Space => (i, template.i_t),
        Refine::Time => (template.i_s, i),
    }
}

/// Runs levels first..first+nref.
pub fn run_convergence(
    template: &MethodConfig,
    prob: &ProblemDefinition,
    refine: Refine,
    first: usize,
    nref: usize,
) -> Result<Vec<Row>> {
    (first..first + nref)
        .map(|i| {
            let (i_s, i_t) = levels(template, refine, i);
            let cfg = template.clone().with_levels(i_s, i_t);
            let r = march(&cfg, prob)?.report;
            Ok(Row {
                i,
                l2_final: r.l2_final,
                l2l2: r.l2l2,
                nze_max: r.nze_max,
                wall_s: r.wall_s,
                geom_dist: r.geom_dist,
            })
        })
        .collect()
}

/// log2(e_i / e_{i+1}) for consecutive levels.
pub fn observed_orders(errors: &[f64]) -> Vec<f64> {
    errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}

/// Mean of the last two observed orders (or the only one).
pub fn final_order(errors: &[f64]) -> f64 {
    let o = observed_orders(errors);
    match o.len() {
        0 => f64::NAN,
        1 => o[0],
        n => 0.5 * (o[n - 1] + o[n - 2]),
    }
}

pub fn run_gamma_study(
    template: &MethodConfig,
    prob: &ProblemDefinition,
    gammas: &[f64],
    nref: usize,
) -> Result<Vec<(f64, Vec<Row>)>> {
    gammas
        .iter()
        .map(|&g| {
            let mut cfg = template.clone();
            cfg.gamma = g;
            Ok((g, run_convergence(&cfg, prob, Refine::Both, 0, nref)?))
        })
        .collect()
}

/// Time refinement at fixed spatial level with (k_t, k_s) chosen independently.
pub fn run_superconvergence(
    prob: &ProblemDefinition,
    k_t: usize,
    k_s: usize,
    q: usize,
    i_s: usize,
    i_t_range: std::ops::RangeInclusive<usize>,
) -> Result<Vec<Row>> {
    let mut cfg = MethodConfig::new(Method::Dg, k_s);
    cfg.k_t = k_t;
    cfg.q_s = q;
    cfg.q_t = q;
    cfg.i_s = i_s;
    let first = *i_t_range.start();
    let n = i_t_range.end() - first + 1;
    run_convergence(&cfg, prob, Refine::Time, first, n)
}

/// nze_max per (method, i_t) at fixed i_s.
pub fn run_nze_study(
    prob: &ProblemDefinition,
    methods: &[Method],
    k: usize,
    eps_f: f64,
    i_s: usize,
    i_ts: &[usize],
) -> Result<Vec<(Method, usize, usize)>> {
    let mut out = Vec::new();
    for &m in methods {
        for &i_t in i_ts {
            let mut cfg = MethodConfig::new(m, k).with_levels(i_s, i_t);
            cfg.eps_f = eps_f;
            out.push((m, i_t, march(&cfg, prob)?.report.nze_max));
        }
    }
    Ok(out)
}

/// Spatial refinement at fixed i_t for each quadrature variant.
pub fn run_tint_comparison(
    template: &MethodConfig,
    prob: &ProblemDefinition,
    modes: &[RuleMode],
    i_s_range: std::ops::RangeInclusive<usize>,
) -> Result<Vec<(RuleMode, Vec<Row>)>> {
    modes
        .iter()
        .map(|&mode| {
            let mut cfg = template.clone();
            cfg.rule_mode = mode;
            let first = *i_s_range.start();
            let n = i_s_range.end() - first + 1;
            Ok((mode, run_convergence(&cfg, prob, Refine::Space, first, n)?))
        })
        .collect()
}

pub fn write_dat(path: &Path, header: &str, rows: &[Row]) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(f, "# {header}")?;
    for r in rows {
        writeln!(
            f,
            "{} {:.16e} {:.16e} {} {:.6} {:.16e}",
            r.i, r.l2_final, r.l2l2, r.nze_max, r.wall_s, r.geom_dist
        )?;
    }
    f.flush()?;
    Ok(())
}
