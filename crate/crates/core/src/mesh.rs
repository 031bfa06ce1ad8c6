//! Uniform background mesh and time slabbing.

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct BackgroundMesh {
    pub domain_lo: f64,
    pub domain_hi: f64,
    pub n_elements: usize,
    pub vertices: Vec<f64>,
    pub h: f64,
}

impl BackgroundMesh {
    pub fn n_vertices(&self) -> usize {
        self.n_elements + 1
    }

    /// Left and right vertex indices of element `e`.
    pub fn element(&self, e: usize) -> (usize, usize) {
        (e, e + 1)
    }

    pub fn element_bounds(&self, e: usize) -> (f64, f64) {
        (self.vertices[e], self.vertices[e + 1])
    }

    /// Interior facets are identified by their vertex index 1..n_elements.
    pub fn interior_facets(&self) -> std::ops::Range<usize> {
        1..self.n_elements
    }

    /// The two elements of the patch of interior facet `f`.
    pub fn facet_patch(&self, f: usize) -> (usize, usize) {
        debug_assert!(f >= 1 && f < self.n_elements);
        (f - 1, f)
    }

    /// Element containing `x`; interior vertices belong to the element on their right.
    pub fn locate(&self, x: f64) -> Option<usize> {
        let tol = 1e-12 * self.h;
        if x < self.domain_lo - tol || x > self.domain_hi + tol {
            return None;
        }
        let r = ((x - self.domain_lo) / self.h).floor();
        Some((r.max(0.0) as usize).min(self.n_elements - 1))
    }

    /// Reference coordinate of `x` relative to element `e`; may lie outside [0, 1].
    pub fn reference(&self, e: usize, x: f64) -> f64 {
        (x - self.vertices[e]) / self.h
    }

    pub fn physical(&self, e: usize, xi: f64) -> f64 {
        self.vertices[e] + xi * self.h
    }
}

pub fn build_mesh(lo: f64, hi: f64, n: usize) -> Result<BackgroundMesh> {
    if n == 0 {
        return Err(Error::InvalidInput("mesh needs at least one element".into()));
    }
    if !(hi > lo) {
        return Err(Error::InvalidInput(format!("empty domain [{lo}, {hi}]")));
    }
    let h = (hi - lo) / n as f64;
    let mut vertices: Vec<f64> = (0..=n).map(|i| lo + i as f64 * h).collect();
    vertices[n] = hi;
    Ok(BackgroundMesh {
        domain_lo: lo,
        domain_hi: hi,
        n_elements: n,
        vertices,
        h,
    })
}

#[derive(Debug, Clone)]
pub struct TimeSlabbing {
    pub t_end: f64,
    pub n_slabs: usize,
    pub dt: f64,
}

impl TimeSlabbing {
    /// Time t_n; t_0 = 0.
    pub fn time(&self, n: usize) -> f64 {
        if n == self.n_slabs {
            self.t_end
        } else {
            n as f64 * self.dt
        }
    }

    /// Slab n (1-based) as the interval (t_{n-1}, t_n].
    pub fn slab(&self, n: usize) -> (f64, f64) {
        assert!(n >= 1 && n <= self.n_slabs, "slab index {n} out of range");
        (self.time(n - 1), self.time(n))
    }
}

pub fn build_slabs(t_end: f64, n_slabs: usize) -> Result<TimeSlabbing> {
    if n_slabs == 0 {
        return Err(Error::InvalidInput("need at least one time slab".into()));
    }
    if !(t_end > 0.0) {
        return Err(Error::InvalidInput(format!("final time {t_end} must be positive")));
    }
    Ok(TimeSlabbing {
        t_end,
        n_slabs,
        dt: t_end / n_slabs as f64,
    })
}
