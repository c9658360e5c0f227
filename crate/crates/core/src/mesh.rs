//! Interval meshes with affine elements and face connectivity.

use crate::error::MeshError;
use std::fmt;

/// Boundary closure tag for one end of the interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryKind {
    /// Data imposed on incoming characteristics through a ghost state.
    InflowDirichlet,
    /// Reflecting closure that prescribes the flux variable (traction, current sheet).
    TractionLike,
    Periodic,
}

impl fmt::Display for BoundaryKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BoundaryKind::InflowDirichlet => "inflow-dirichlet",
            BoundaryKind::TractionLike => "traction-like",
            BoundaryKind::Periodic => "periodic",
        })
    }
}

impl std::str::FromStr for BoundaryKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "inflow-dirichlet" | "dirichlet" => Ok(BoundaryKind::InflowDirichlet),
            "traction-like" | "traction" => Ok(BoundaryKind::TractionLike),
            "periodic" => Ok(BoundaryKind::Periodic),
            other => Err(format!("unknown boundary kind '{other}'")),
        }
    }
}

/// Which end of the domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Left,
    Right,
}

/// One side of a face: an element or a domain boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FaceSide {
    Element(usize),
    Boundary(Side),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Face {
    pub x: f64,
    pub left: FaceSide,
    pub right: FaceSide,
    /// True for the last face of a periodic mesh, which is the same physical face as face 0.
    pub periodic_image: bool,
}

/// What lies across one face of an element.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Neighbor {
    Element(usize),
    Boundary(Side),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh1D {
    breaks: Vec<f64>,
    faces: Vec<Face>,
    boundary: [BoundaryKind; 2],
}

impl Mesh1D {
    /// `k` equal elements on [x_left, x_right].
    pub fn uniform(
        x_left: f64,
        x_right: f64,
        k: usize,
        boundary: [BoundaryKind; 2],
    ) -> Result<Self, MeshError> {
        if k == 0 {
            return Err(MeshError::NoElements);
        }
        if !(x_left < x_right) {
            return Err(MeshError::InvertedInterval {
                left: x_left,
                right: x_right,
            });
        }
        let h = (x_right - x_left) / k as f64;
        let mut breaks: Vec<f64> = (0..=k).map(|i| x_left + i as f64 * h).collect();
        breaks[k] = x_right;
        Self::from_breaks(breaks, boundary)
    }

    /// Mesh with explicit element breaks.
    pub fn from_breaks(breaks: Vec<f64>, boundary: [BoundaryKind; 2]) -> Result<Self, MeshError> {
        if breaks.len() < 2 {
            return Err(MeshError::NoElements);
        }
        if let Some(i) = breaks.windows(2).position(|w| !(w[0] < w[1])) {
            return Err(MeshError::NonIncreasingBreaks { index: i + 1 });
        }
        let periodic = boundary.map(|b| b == BoundaryKind::Periodic);
        if periodic[0] != periodic[1] {
            return Err(MeshError::MixedPeriodic);
        }
        let k = breaks.len() - 1;
        let faces = (0..=k)
            .map(|f| {
                let (left, right) = if periodic[0] && (f == 0 || f == k) {
                    (FaceSide::Element(k - 1), FaceSide::Element(0))
                } else {
                    let left = if f == 0 {
                        FaceSide::Boundary(Side::Left)
                    } else {
                        FaceSide::Element(f - 1)
                    };
                    let right = if f == k {
                        FaceSide::Boundary(Side::Right)
                    } else {
                        FaceSide::Element(f)
                    };
                    (left, right)
                };
                Face {
                    x: breaks[f],
                    left,
                    right,
                    periodic_image: periodic[0] && f == k,
                }
            })
            .collect();
        Ok(Self {
            breaks,
            faces,
            boundary,
        })
    }

    pub fn n_elements(&self) -> usize {
        self.breaks.len() - 1
    }

    pub fn x_left(&self) -> f64 {
        self.breaks[0]
    }

    pub fn x_right(&self) -> f64 {
        *self.breaks.last().unwrap()
    }

    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    /// Faces without the periodic duplicate.
    pub fn unique_faces(&self) -> impl Iterator<Item = (usize, &Face)> {
        self.faces.iter().enumerate().filter(|(_, f)| !f.periodic_image)
    }

    pub fn boundary_kind(&self, side: Side) -> BoundaryKind {
        match side {
            Side::Left => self.boundary[0],
            Side::Right => self.boundary[1],
        }
    }

    pub fn is_periodic(&self) -> bool {
        self.boundary[0] == BoundaryKind::Periodic
    }

    pub fn width(&self, e: usize) -> f64 {
        self.breaks[e + 1] - self.breaks[e]
    }

    /// Affine Jacobian dx/dxi = width/2.
    pub fn jacobian(&self, e: usize) -> f64 {
        0.5 * self.width(e)
    }

    pub fn min_width(&self) -> f64 {
        (0..self.n_elements()).map(|e| self.width(e)).fold(f64::INFINITY, f64::min)
    }

    /// Physical coordinate of reference point `xi` in element `e`.
    pub fn map_point(&self, e: usize, xi: f64) -> f64 {
        let (a, b) = (self.breaks[e], self.breaks[e + 1]);
        0.5 * (a + b) + 0.5 * (b - a) * xi
    }

    /// Outward normals of the (left, right) faces of an element.
    pub fn outward_normals(&self, e: usize) -> Result<(f64, f64), MeshError> {
        if e >= self.n_elements() {
            return Err(MeshError::InvalidElement {
                index: e,
                count: self.n_elements(),
            });
        }
        Ok((-1.0, 1.0))
    }

    /// What lies across the given face of element `e`.
    pub fn neighbor(&self, e: usize, side: Side) -> Neighbor {
        let k = self.n_elements();
        match side {
            Side::Left if e > 0 => Neighbor::Element(e - 1),
            Side::Right if e + 1 < k => Neighbor::Element(e + 1),
            Side::Left if self.is_periodic() => Neighbor::Element(k - 1),
            Side::Right if self.is_periodic() => Neighbor::Element(0),
            _ => Neighbor::Boundary(side),
        }
    }

    /// Bisects every element.
    pub fn refine(&self) -> Self {
        let mut breaks = Vec::with_capacity(2 * self.breaks.len() - 1);
        for w in self.breaks.windows(2) {
            breaks.push(w[0]);
            breaks.push(0.5 * (w[0] + w[1]));
        }
        breaks.push(self.x_right());
        Self::from_breaks(breaks, self.boundary).expect("bisection preserves mesh validity")
    }
}
