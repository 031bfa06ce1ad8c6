//! Element and facet classification per slab.

use crate::levelset::LevelSetSlab;
use crate::mesh::BackgroundMesh;

/// Element or facet membership mask.
pub type Mask = Vec<bool>;

#[derive(Debug, Clone)]
pub struct ActiveRegions {
    pub slab_index: usize,
    pub elems_e: Mask,
    pub elems_i: Mask,
    pub elems_cut_slab: Mask,
    pub elems_eplus: Mask,
    pub elems_s: Mask,
    /// Facet masks indexed by vertex; boundary vertices are never set.
    pub facets_r: Mask,
    pub facets_rext: Mask,
    pub facets_rplus: Mask,
    pub delta: f64,
}

pub fn count(mask: &[bool]) -> usize {
    mask.iter().filter(|&&b| b).count()
}

pub fn is_subset(a: &[bool], b: &[bool]) -> bool {
    a.iter().zip(b).all(|(&x, &y)| !x || y)
}

/// Extended, interior and cut element sets of the slab.
pub fn classify_elements(ls: &LevelSetSlab, n_time_samples: usize) -> (Mask, Mask, Mask) {
    let mesh = &ls.mesh;
    let ranges: Vec<(f64, f64)> = (0..mesh.n_vertices())
        .map(|v| ls.vertex_trajectory(v).range_on(0.0, 1.0))
        .collect();
    if cfg!(debug_assertions) && n_time_samples > 1 {
        for (v, &(lo, hi)) in ranges.iter().enumerate() {
            for j in 0..n_time_samples {
                let t = ls.t0 + ls.dt() * j as f64 / (n_time_samples - 1) as f64;
                let val = ls.vertex_value(v, t);
                debug_assert!(val >= lo - 1e-12 && val <= hi + 1e-12);
            }
        }
    }
    let mut e_mask = vec![false; mesh.n_elements];
    let mut i_mask = vec![false; mesh.n_elements];
    for e in 0..mesh.n_elements {
        let (l0, h0) = ranges[e];
        let (l1, h1) = ranges[e + 1];
        e_mask[e] = ls.is_negative(l0.min(l1));
        i_mask[e] = ls.is_negative(h0.max(h1));
    }
    let cut = e_mask.iter().zip(&i_mask).map(|(&a, &b)| a && !b).collect();
    (e_mask, i_mask, cut)
}

/// Extension region E^+, strip S and strip half-width δ from φ^lin(·, t_n).
pub fn extended_region(ls: &LevelSetSlab, eps_f: f64, w_inf: f64) -> (Mask, Mask, f64) {
    let mesh = &ls.mesh;
    let delta = eps_f * ls.dt() * w_inf;
    let vals: Vec<f64> = (0..mesh.n_vertices())
        .map(|v| ls.vertex_value(v, ls.t1))
        .collect();
    let tol = ls.tie_tol;
    let mut eplus = vec![false; mesh.n_elements];
    let mut strip = vec![false; mesh.n_elements];
    for e in 0..mesh.n_elements {
        let lo = vals[e].min(vals[e + 1]);
        let hi = vals[e].max(vals[e + 1]);
        eplus[e] = lo <= delta + tol;
        strip[e] = lo <= delta + tol && hi >= -delta - tol;
    }
    (eplus, strip, delta)
}

/// True iff every element of the next slab's E lies in this slab's E^+.
pub fn check_extension_constraint(regions: &ActiveRegions, elems_e_next: &[bool]) -> bool {
    is_subset(elems_e_next, &regions.elems_eplus)
}

/// Facet sets F_R, F_R^ext and F_R^+.
pub fn facet_sets(
    mesh: &BackgroundMesh,
    elems_e: &[bool],
    elems_i: &[bool],
    elems_eplus: &[bool],
    elems_s: &[bool],
) -> (Mask, Mask, Mask) {
    let nv = mesh.n_vertices();
    let cut: Vec<bool> = elems_e.iter().zip(elems_i).map(|(&a, &b)| a && !b).collect();
    let mut r = vec![false; nv];
    let mut rplus = vec![false; nv];
    for f in mesh.interior_facets() {
        let (a, b) = mesh.facet_patch(f);
        r[f] = elems_e[a] && elems_e[b] && (cut[a] || cut[b]);
        rplus[f] = elems_eplus[a] && elems_eplus[b] && (elems_s[a] || elems_s[b]);
    }
    let mut rext = r.clone();
    let ne = mesh.n_elements;
    let interior_facet = |f: usize| f >= 1 && f < ne && elems_i[f - 1] && elems_i[f];
    let mut e = 0;
    while e < ne {
        if !cut[e] {
            e += 1;
            continue;
        }
        let c0 = e;
        while e < ne && cut[e] {
            e += 1;
        }
        let c1 = e - 1;
        let len = c1 - c0 + 1;
        let mut added = 0;
        let mut left = c0.checked_sub(1);
        let mut right = Some(c1 + 2);
        while added < len && (left.is_some() || right.is_some()) {
            if let Some(f) = left {
                if interior_facet(f) {
                    if !rext[f] {
                        rext[f] = true;
                        added += 1;
                    }
                    left = f.checked_sub(1);
                } else {
                    left = None;
                }
            }
            if added >= len {
                break;
            }
            if let Some(f) = right {
                if interior_facet(f) {
                    if !rext[f] {
                        rext[f] = true;
                        added += 1;
                    }
                    right = Some(f + 1);
                } else {
                    right = None;
                }
            }
        }
    }
    (r, rext, rplus)
}

pub fn build_regions(ls: &LevelSetSlab, eps_f: f64, w_inf: f64) -> ActiveRegions {
    let (elems_e, elems_i, elems_cut_slab) = classify_elements(ls, ls.q_t + 2);
    let (elems_eplus, elems_s, delta) = extended_region(ls, eps_f, w_inf);
    let (facets_r, facets_rext, facets_rplus) =
        facet_sets(&ls.mesh, &elems_e, &elems_i, &elems_eplus, &elems_s);
    ActiveRegions {
        slab_index: ls.slab_index,
        elems_e,
        elems_i,
        elems_cut_slab,
        elems_eplus,
        elems_s,
        facets_r,
        facets_rext,
        facets_rplus,
        delta,
    }
}
