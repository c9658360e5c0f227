//! Element-wise nodal fields, face traces, and interface operators.

use crate::basis::NodalBasis;
use crate::error::FieldError;
use crate::mesh::Mesh1D;
use std::io::{self, Write};
use std::sync::Arc;

/// A mesh paired with a reference basis, plus cached physical node coordinates.
#[derive(Debug, Clone)]
pub struct Discretization {
    pub mesh: Mesh1D,
    pub basis: NodalBasis,
    coords: Vec<f64>,
}

impl Discretization {
    pub fn new(mesh: Mesh1D, basis: NodalBasis) -> Arc<Self> {
        let coords = (0..mesh.n_elements())
            .flat_map(|e| basis.nodes().iter().map(move |&xi| (e, xi)))
            .map(|(e, xi)| mesh.map_point(e, xi))
            .collect();
        Arc::new(Self {
            mesh,
            basis,
            coords,
        })
    }

    pub fn n_elements(&self) -> usize {
        self.mesh.n_elements()
    }

    pub fn n_nodes(&self) -> usize {
        self.basis.n_nodes()
    }

    /// Physical coordinates of all nodes, element-major.
    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn element_coords(&self, e: usize) -> &[f64] {
        let np = self.n_nodes();
        &self.coords[e * np..(e + 1) * np]
    }

    /// Physical coordinates of the quadrature points of element `e`.
    pub fn quad_coords(&self, e: usize) -> Vec<f64> {
        self.basis
            .quad_points()
            .iter()
            .map(|&xi| self.mesh.map_point(e, xi))
            .collect()
    }

    /// Samples a function at every node.
    pub fn sample(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        self.coords.iter().map(|&x| f(x)).collect()
    }
}

/// Nodal coefficients of `C` components on `K` elements with `N+1` nodes each.
///
/// Storage is component-major, then element, then node.
#[derive(Debug, Clone, PartialEq)]
pub struct DgField {
    names: Vec<String>,
    n_elements: usize,
    n_nodes: usize,
    data: Vec<f64>,
}

impl DgField {
    pub fn zeros(names: &[&str], n_elements: usize, n_nodes: usize) -> Self {
        Self {
            names: names.iter().map(|s| s.to_string()).collect(),
            n_elements,
            n_nodes,
            data: vec![0.0; names.len() * n_elements * n_nodes],
        }
    }

    pub fn from_vec(
        names: &[&str],
        n_elements: usize,
        n_nodes: usize,
        data: Vec<f64>,
    ) -> Result<Self, FieldError> {
        let expected = (names.len(), n_elements, n_nodes);
        if data.len() != names.len() * n_elements * n_nodes {
            return Err(FieldError::ShapeMismatch {
                expected,
                found: (data.len() / (n_elements * n_nodes).max(1), n_elements, n_nodes),
            });
        }
        Ok(Self {
            names: names.iter().map(|s| s.to_string()).collect(),
            n_elements,
            n_nodes,
            data,
        })
    }

    /// Nodal interpolant of `f` on a single-component field.
    pub fn sample(disc: &Discretization, name: &str, f: impl Fn(f64) -> f64) -> Self {
        Self {
            names: vec![name.to_string()],
            n_elements: disc.n_elements(),
            n_nodes: disc.n_nodes(),
            data: disc.sample(f),
        }
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        (self.names.len(), self.n_elements, self.n_nodes)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn n_components(&self) -> usize {
        self.names.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn component(&self, c: usize) -> &[f64] {
        let len = self.n_elements * self.n_nodes;
        &self.data[c * len..(c + 1) * len]
    }

    pub fn element(&self, c: usize, e: usize) -> &[f64] {
        let start = (c * self.n_elements + e) * self.n_nodes;
        &self.data[start..start + self.n_nodes]
    }

    /// Left and right traces of element `e` in component `c`.
    pub fn traces(&self, c: usize, e: usize) -> (f64, f64) {
        let el = self.element(c, e);
        (el[0], el[self.n_nodes - 1])
    }

    /// Sum over elements and components of Jacobian-scaled quadrature products
    /// with a pointwise weight given by `weight` (one nodal block per component).
    pub fn broken_inner_product(
        &self,
        other: &DgField,
        weight: &DgField,
        disc: &Discretization,
    ) -> Result<f64, FieldError> {
        if self.shape() != other.shape() {
            return Err(FieldError::ShapeMismatch {
                expected: self.shape(),
                found: other.shape(),
            });
        }
        let expect = (self.n_components(), disc.n_elements(), disc.n_nodes());
        if weight.shape() != expect || self.shape() != expect {
            return Err(FieldError::ShapeMismatch {
                expected: expect,
                found: weight.shape(),
            });
        }
        let mut total = 0.0;
        for c in 0..self.n_components() {
            for e in 0..self.n_elements {
                let ip = disc.basis.quadrature_inner_product(
                    self.element(c, e),
                    other.element(c, e),
                    weight.element(c, e),
                )?;
                total += disc.mesh.jacobian(e) * ip;
            }
        }
        Ok(total)
    }

    /// Writes one row per (element, node) with coordinate and component values.
    /// `time` adds a leading time column.
    pub fn write_csv<W: Write>(
        &self,
        disc: &Discretization,
        time: Option<f64>,
        header: bool,
        out: &mut W,
    ) -> io::Result<()> {
        if header {
            if time.is_some() {
                write!(out, "t,")?;
            }
            write!(out, "element,node,x")?;
            for n in &self.names {
                write!(out, ",{n}")?;
            }
            writeln!(out)?;
        }
        for e in 0..self.n_elements {
            for i in 0..self.n_nodes {
                if let Some(t) = time {
                    write!(out, "{t:.12e},")?;
                }
                write!(out, "{e},{i},{:.15e}", disc.element_coords(e)[i])?;
                for c in 0..self.n_components() {
                    write!(out, ",{:.15e}", self.element(c, e)[i])?;
                }
                writeln!(out)?;
            }
        }
        Ok(())
    }
}

/// Two-sided traces at a face, seen from one element ("minus" side).
///
/// Materials are per model: advection `[a, 0]`, acoustic `[rho, c]`,
/// Maxwell `[mu, eps]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FaceState {
    pub u_minus: [f64; 2],
    pub u_plus: [f64; 2],
    pub n_minus: f64,
    pub material_minus: [f64; 2],
    pub material_plus: [f64; 2],
}

impl FaceState {
    /// Face state with the same material on both sides.
    pub fn new(u_minus: [f64; 2], u_plus: [f64; 2], n_minus: f64, material: [f64; 2]) -> Self {
        Self {
            u_minus,
            u_plus,
            n_minus,
            material_minus: material,
            material_plus: material,
        }
    }

    /// The same face seen from the other side.
    pub fn flipped(&self) -> Self {
        Self {
            u_minus: self.u_plus,
            u_plus: self.u_minus,
            n_minus: -self.n_minus,
            material_minus: self.material_plus,
            material_plus: self.material_minus,
        }
    }
}

/// ⟦u⟧ = u⁻n⁻ + u⁺n⁺ with n⁺ = −n⁻.
pub fn jump(face: &FaceState, c: usize) -> f64 {
    face.n_minus * (face.u_minus[c] - face.u_plus[c])
}

/// {{u}} = (u⁻ + u⁺)/2.
pub fn mean(face: &FaceState, c: usize) -> f64 {
    0.5 * (face.u_minus[c] + face.u_plus[c])
}

/// ⟨⟨u⟩⟩ = u⁻ − u⁺.
pub fn diff(face: &FaceState, c: usize) -> f64 {
    face.u_minus[c] - face.u_plus[c]
}
