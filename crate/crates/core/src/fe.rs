//! Continuous Lagrange finite element layout of arbitrary degree on the background mesh.

use crate::basis::Lagrange1D;
use crate::mesh::BackgroundMesh;

/// Degree-k continuous Lagrange space with Gauss-Lobatto nodes per element.
///
/// Dofs 0..=n_elements are the vertices, followed by k-1 interior dofs per element.
#[derive(Debug, Clone)]
pub struct SpatialSpace {
    pub degree: usize,
    pub n_elements: usize,
    pub basis: Lagrange1D,
}

impl SpatialSpace {
    pub fn new(mesh: &BackgroundMesh, degree: usize) -> Self {
        assert!(degree >= 1, "spatial degree must be at least 1");
        Self {
            degree,
            n_elements: mesh.n_elements,
            basis: Lagrange1D::gauss_lobatto(degree),
        }
    }

    pub fn n_dofs(&self) -> usize {
        self.n_elements * self.degree + 1
    }

    pub fn n_local(&self) -> usize {
        self.degree + 1
    }

    pub fn dof(&self, e: usize, a: usize) -> usize {
        if a == 0 {
            e
        } else if a == self.degree {
            e + 1
        } else {
            self.n_elements + 1 + e * (self.degree - 1) + a - 1
        }
    }

    pub fn element_dofs(&self, e: usize) -> Vec<usize> {
        (0..=self.degree).map(|a| self.dof(e, a)).collect()
    }

    /// Elements whose closure contains spatial dof `d`.
    pub fn dof_elements(&self, d: usize) -> Vec<usize> {
        if d <= self.n_elements {
            let mut v = Vec::with_capacity(2);
            if d > 0 {
                v.push(d - 1);
            }
            if d < self.n_elements {
                v.push(d);
            }
            v
        } else {
            vec![(d - self.n_elements - 1) / (self.degree - 1)]
        }
    }

    pub fn node(&self, mesh: &BackgroundMesh, e: usize, a: usize) -> f64 {
        mesh.physical(e, self.basis.nodes()[a])
    }

    /// Nodal interpolation of `f`.
    pub fn interpolate(&self, mesh: &BackgroundMesh, f: impl Fn(f64) -> f64) -> Vec<f64> {
        let mut c = vec![0.0; self.n_dofs()];
        for e in 0..self.n_elements {
            for a in 0..=self.degree {
                c[self.dof(e, a)] = f(self.node(mesh, e, a));
            }
        }
        c
    }

    /// Value of the element-`e` polynomial of `coeffs` at reference coordinate `xi` (extension allowed).
    pub fn eval_local(&self, coeffs: &[f64], e: usize, xi: f64) -> f64 {
        let mut v = [0.0; 16];
        let n = self.n_local();
        self.basis.eval(xi, &mut v[..n]);
        (0..n).map(|a| coeffs[self.dof(e, a)] * v[a]).sum()
    }

    /// Value and reference derivative d/dxi of the element-`e` polynomial.
    pub fn eval_local_with_deriv(&self, coeffs: &[f64], e: usize, xi: f64) -> (f64, f64) {
        let mut v = [0.0; 16];
        let mut d = [0.0; 16];
        let n = self.n_local();
        self.basis.eval_with_deriv(xi, &mut v[..n], &mut d[..n]);
        let mut val = 0.0;
        let mut der = 0.0;
        for a in 0..n {
            let c = coeffs[self.dof(e, a)];
            val += c * v[a];
            der += c * d[a];
        }
        (val, der)
    }
}
