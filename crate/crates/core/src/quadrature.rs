//! Cut-cell quadrature on Q^{lin,n} ∩ (T × I_n) and on fixed-time slices.

use crate::basis::GaussRule;
use crate::deform::SlabDeformation;
use crate::levelset::LevelSetSlab;

/// Which part of an element a spatial rule covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Part {
    Inside,
    Outside,
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RuleMode {
    TopologyPreserving,
    TopologyInsensitive { substeps: usize, order_factor: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StPoint {
    pub x: f64,
    pub t: f64,
    pub w: f64,
}

#[derive(Debug, Clone)]
pub struct SpaceTimeQuadRule {
    pub element: usize,
    pub points: Vec<StPoint>,
    pub breakpoints: Vec<f64>,
    /// (spatial exactness, temporal exactness)
    pub orders: (usize, usize),
}

impl SpaceTimeQuadRule {
    pub fn integrate(&self, f: impl Fn(f64, f64) -> f64) -> f64 {
        self.points.iter().map(|p| p.w * f(p.x, p.t)).sum()
    }
}

/// Gauss rule on the part of element e where φ^lin(·, t) is negative (or its complement).
pub fn spatial_cut_rule(
    ls: &LevelSetSlab,
    e: usize,
    t: f64,
    rule: &GaussRule,
    part: Part,
) -> Vec<(f64, f64)> {
    let (xl, xr) = ls.mesh.element_bounds(e);
    let (a, b) = if part == Part::Full {
        (xl, xr)
    } else {
        let va = ls.vertex_value(e, t);
        let vb = ls.vertex_value(e + 1, t);
        let na = ls.is_negative(va);
        let nb = ls.is_negative(vb);
        let inside = match (na, nb) {
            (true, true) => Some((xl, xr)),
            (false, false) => None,
            _ => {
                let r = (xl + (xr - xl) * va / (va - vb)).clamp(xl, xr);
                if na {
                    Some((xl, r))
                } else {
                    Some((r, xr))
                }
            }
        };
        let outside = match (na, nb) {
            (true, true) => None,
            (false, false) => Some((xl, xr)),
            _ => match inside {
                Some((l, r)) if l == xl => Some((r, xr)),
                Some((l, _)) => Some((xl, l)),
                None => None,
            },
        };
        match (part, inside, outside) {
            (Part::Inside, Some(iv), _) => iv,
            (Part::Outside, _, Some(ov)) => ov,
            _ => return Vec::new(),
        }
    };
    if b - a <= 1e-14 * ls.mesh.h {
        return Vec::new();
    }
    rule.mapped(a, b).collect()
}

/// Time breakpoints on element e: slab end points plus all roots of the two vertex trajectories.
pub fn time_breakpoints(ls: &LevelSetSlab, e: usize) -> Vec<f64> {
    let mut s = vec![0.0, 1.0];
    for v in [e, e + 1] {
        s.extend(ls.vertex_trajectory(v).roots_in(0.0, 1.0));
    }
    s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    s.dedup_by(|a, b| (*a - *b).abs() <= 1e-12);
    // an interior root merged into an end point must not move the end point
    s[0] = 0.0;
    *s.last_mut().unwrap() = 1.0;
    if s.len() >= 2 && s[s.len() - 2] >= 1.0 - 1e-12 {
        s.remove(s.len() - 2);
    }
    s.iter().map(|&si| ls.t0 + si * ls.dt()).collect()
}

fn tensor_rule(
    ls: &LevelSetSlab,
    e: usize,
    intervals: &[f64],
    time_rule: &GaussRule,
    space_rule: &GaussRule,
    part: Part,
) -> Vec<StPoint> {
    let mut pts = Vec::new();
    for win in intervals.windows(2) {
        for (t, wt) in time_rule.mapped(win[0], win[1]) {
            for (x, wx) in spatial_cut_rule(ls, e, t, space_rule, part) {
                pts.push(StPoint { x, t, w: wx * wt });
            }
        }
    }
    pts
}

pub fn st_rule_topology_preserving(
    ls: &LevelSetSlab,
    e: usize,
    k_t: usize,
    spatial_exactness: usize,
) -> SpaceTimeQuadRule {
    st_rule_topology_preserving_part(ls, e, k_t, spatial_exactness, Part::Inside)
}

pub fn st_rule_topology_preserving_part(
    ls: &LevelSetSlab,
    e: usize,
    k_t: usize,
    spatial_exactness: usize,
    part: Part,
) -> SpaceTimeQuadRule {
    let time_exactness = 2 * (k_t + 1);
    let breakpoints = time_breakpoints(ls, e);
    let points = tensor_rule(
        ls,
        e,
        &breakpoints,
        &GaussRule::with_exactness(time_exactness),
        &GaussRule::with_exactness(spatial_exactness),
        part,
    );
    SpaceTimeQuadRule {
        element: e,
        points,
        breakpoints,
        orders: (spatial_exactness, time_exactness),
    }
}

pub fn st_rule_topology_insensitive(
    ls: &LevelSetSlab,
    e: usize,
    k_t: usize,
    substeps: usize,
    order_factor: usize,
    spatial_exactness: usize,
) -> SpaceTimeQuadRule {
    let substeps = substeps.max(1);
    let time_exactness = order_factor.max(1) * 2 * (k_t + 1);
    let intervals: Vec<f64> = (0..=substeps)
        .map(|j| ls.t0 + ls.dt() * j as f64 / substeps as f64)
        .collect();
    let points = tensor_rule(
        ls,
        e,
        &intervals,
        &GaussRule::with_exactness(time_exactness),
        &GaussRule::with_exactness(spatial_exactness),
        Part::Inside,
    );
    SpaceTimeQuadRule {
        element: e,
        points,
        breakpoints: Vec::new(),
        orders: (spatial_exactness, time_exactness),
    }
}

pub fn st_rule(
    ls: &LevelSetSlab,
    e: usize,
    mode: RuleMode,
    k_t: usize,
    spatial_exactness: usize,
) -> SpaceTimeQuadRule {
    match mode {
        RuleMode::TopologyPreserving => st_rule_topology_preserving(ls, e, k_t, spatial_exactness),
        RuleMode::TopologyInsensitive {
            substeps,
            order_factor,
        } => st_rule_topology_insensitive(ls, e, k_t, substeps, order_factor, spatial_exactness),
    }
}

/// Quadrature point on the deformed slice Ω^h(t).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MappedPoint {
    pub element: usize,
    /// Undeformed reference coordinate.
    pub x: f64,
    /// Physical coordinate Θ(x, t).
    pub y: f64,
    /// Weight including |∂Θ/∂x|.
    pub w: f64,
    pub jx: f64,
    pub jt: f64,
}

/// Rule on Ω^h(t) ∩ Θ(T) for every element with `elements[e]`.
pub fn fixed_time_cut_rule(
    ls: &LevelSetSlab,
    def: &SlabDeformation,
    t: f64,
    spatial_exactness: usize,
    elements: &[bool],
) -> Vec<MappedPoint> {
    let rule = GaussRule::with_exactness(spatial_exactness);
    let mut out = Vec::new();
    for e in 0..ls.mesh.n_elements {
        if elements[e] {
            out.extend(mapped_element_rule(ls, def, e, t, &rule, Part::Inside));
        }
    }
    out
}

pub fn mapped_element_rule(
    ls: &LevelSetSlab,
    def: &SlabDeformation,
    e: usize,
    t: f64,
    rule: &GaussRule,
    part: Part,
) -> Vec<MappedPoint> {
    spatial_cut_rule(ls, e, t, rule, part)
        .into_iter()
        .map(|(x, w)| {
            let (y, jx, jt) = def.eval_on(e, x, t);
            assert!(jx > 0.0, "non-positive deformation Jacobian {jx} on element {e}");
            MappedPoint {
                element: e,
                x,
                y,
                w: w * jx.abs(),
                jx,
                jt,
            }
        })
        .collect()
}
