//! Uniform Cartesian mesh, boundary descriptors, and ghost-cell filling.

use crate::basis::Face;
use crate::error::{MhdError, Result};
use crate::physics::NCOMP;
use crate::real::Real;

/// Boundary condition on one side of the domain.
#[derive(Clone, Debug, PartialEq)]
pub enum BoundaryKind<T> {
    Periodic,
    /// Periodic in y with a horizontal displacement of `shift` cells
    /// (top ghost `(i, NY)` copies `(i + shift, 0)`).
    ShiftedPeriodic { shift: isize },
    Outflow,
    /// Fixed state on the cells whose centre lies strictly inside `segment`
    /// (coordinate along the side); outflow elsewhere. `None` covers the whole side.
    Inflow { state: [T; NCOMP], segment: Option<(T, T)> },
    /// Mirror with the normal velocity and normal magnetic field negated.
    Reflect,
}

/// Storage with one layer of ghost cells that the boundary filler can write.
pub trait GhostStorage<T: Real> {
    /// Interior cell counts `(nx, ny)`.
    fn dims(&self) -> (usize, usize);
    fn copy_cell(&mut self, from: (isize, isize), to: (isize, isize));
    fn set_constant(&mut self, at: (isize, isize), u: &[T; NCOMP]);
    /// Writes at `to` the mirror image of `from` across an x-normal (`true`) or y-normal face.
    fn mirror_cell(&mut self, from: (isize, isize), to: (isize, isize), x_normal: bool);
}

/// Uniform grid on `[x0, x1] x [y0, y1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Mesh<T> {
    nx: usize,
    ny: usize,
    x0: T,
    x1: T,
    y0: T,
    y1: T,
    dx: T,
    dy: T,
    bc: [BoundaryKind<T>; 4],
}

impl<T: Real> Mesh<T> {
    /// Boundaries are given in face order: west, east, south, north.
    pub fn new(nx: usize, ny: usize, x: (T, T), y: (T, T), bc: [BoundaryKind<T>; 4]) -> Result<Self> {
        if nx == 0 || ny == 0 {
            return Err(MhdError::InvalidArgument(format!("mesh size {nx}x{ny}")));
        }
        if !(x.1 > x.0 && y.1 > y.0) {
            return Err(MhdError::InvalidArgument("empty domain".into()));
        }
        let [w, e, s, n] = &bc;
        let periodic = |b: &BoundaryKind<T>| matches!(b, BoundaryKind::Periodic);
        if periodic(w) != periodic(e) {
            return Err(MhdError::InvalidArgument("periodic x-boundaries must be paired".into()));
        }
        if matches!(w, BoundaryKind::ShiftedPeriodic { .. }) || matches!(e, BoundaryKind::ShiftedPeriodic { .. }) {
            return Err(MhdError::InvalidArgument("shifted periodic only applies to y-boundaries".into()));
        }
        let wraps = |b: &BoundaryKind<T>| matches!(b, BoundaryKind::Periodic | BoundaryKind::ShiftedPeriodic { .. });
        if wraps(s) != wraps(n) {
            return Err(MhdError::InvalidArgument("periodic y-boundaries must be paired".into()));
        }
        for b in [s, n] {
            if let BoundaryKind::ShiftedPeriodic { shift } = b {
                if shift.unsigned_abs() >= nx {
                    return Err(MhdError::InvalidArgument(format!(
                        "shift {shift} inconsistent with {nx} cells"
                    )));
                }
            }
        }
        if let (BoundaryKind::ShiftedPeriodic { shift: a }, BoundaryKind::ShiftedPeriodic { shift: b }) = (s, n) {
            if a != b {
                return Err(MhdError::InvalidArgument("mismatched shifts".into()));
            }
        }
        Ok(Self {
            nx,
            ny,
            x0: x.0,
            x1: x.1,
            y0: y.0,
            y1: y.1,
            dx: (x.1 - x.0) / T::lit(nx as f64),
            dy: (y.1 - y.0) / T::lit(ny as f64),
            bc,
        })
    }

    /// Doubly periodic mesh.
    pub fn periodic(nx: usize, ny: usize, x: (T, T), y: (T, T)) -> Result<Self> {
        Self::new(nx, ny, x, y, std::array::from_fn(|_| BoundaryKind::Periodic))
    }

    pub fn nx(&self) -> usize {
        self.nx
    }
    pub fn ny(&self) -> usize {
        self.ny
    }
    pub fn dx(&self) -> T {
        self.dx
    }
    pub fn dy(&self) -> T {
        self.dy
    }
    pub fn x_range(&self) -> (T, T) {
        (self.x0, self.x1)
    }
    pub fn y_range(&self) -> (T, T) {
        (self.y0, self.y1)
    }
    pub fn area(&self) -> T {
        (self.x1 - self.x0) * (self.y1 - self.y0)
    }
    pub fn boundary(&self, f: Face) -> &BoundaryKind<T> {
        &self.bc[f as usize]
    }

    /// Centre of cell `(i, j)`; ghost indices are allowed.
    pub fn center(&self, i: isize, j: isize) -> (T, T) {
        (
            self.x0 + (T::lit(i as f64) + T::half()) * self.dx,
            self.y0 + (T::lit(j as f64) + T::half()) * self.dy,
        )
    }

    /// Physical point of reference coordinates `(xi, eta)` in cell `(i, j)`.
    pub fn point(&self, i: isize, j: isize, xi: T, eta: T) -> (T, T) {
        let (cx, cy) = self.center(i, j);
        (cx + xi * self.dx, cy + eta * self.dy)
    }

    /// x-coordinate of the face between cells `i-1` and `i`.
    pub fn x_face(&self, i: isize) -> T {
        self.x0 + T::lit(i as f64) * self.dx
    }

    pub fn y_face(&self, j: isize) -> T {
        self.y0 + T::lit(j as f64) * self.dy
    }

    /// Fills the ghost layer of `store` (corners are not touched).
    ///
    /// x-sides are filled first so shifted-periodic y-ghosts may read them.
    pub fn fill_ghosts<S: GhostStorage<T>>(&self, store: &mut S) {
        let (nx, ny) = store.dims();
        assert_eq!((nx, ny), (self.nx, self.ny), "storage does not match mesh");
        let (nxi, nyi) = (nx as isize, ny as isize);
        for side in Face::ALL {
            let count = match side {
                Face::West | Face::East => nyi,
                Face::South | Face::North => nxi,
            };
            for k in 0..count {
                let (ghost, inner, opposite) = match side {
                    Face::West => ((-1, k), (0, k), (nxi - 1, k)),
                    Face::East => ((nxi, k), (nxi - 1, k), (0, k)),
                    Face::South => ((k, -1), (k, 0), (k, nyi - 1)),
                    Face::North => ((k, nyi), (k, nyi - 1), (k, 0)),
                };
                let along = match side {
                    Face::West | Face::East => self.center(0, k).1,
                    _ => self.center(k, 0).0,
                };
                match &self.bc[side as usize] {
                    BoundaryKind::Periodic => store.copy_cell(opposite, ghost),
                    BoundaryKind::ShiftedPeriodic { shift } => {
                        let src_i = match side {
                            Face::North => k + shift,
                            _ => k - shift,
                        }
                        .clamp(-1, nxi);
                        store.copy_cell((src_i, opposite.1), ghost);
                    }
                    BoundaryKind::Outflow => store.copy_cell(inner, ghost),
                    BoundaryKind::Inflow { state, segment } => {
                        let inside = segment.is_none_or(|(lo, hi)| along > lo && along < hi);
                        if inside {
                            store.set_constant(ghost, state);
                        } else {
                            store.copy_cell(inner, ghost);
                        }
                    }
                    BoundaryKind::Reflect => {
                        store.mirror_cell(inner, ghost, matches!(side, Face::West | Face::East))
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometry() {
        let m = Mesh::<f64>::periodic(10, 10, (0.0, 1.0), (0.0, 1.0)).unwrap();
        assert!((m.dx() - 0.1).abs() < 1e-15);
        let (x, y) = m.center(0, 0);
        assert!((x - 0.05).abs() < 1e-15 && (y - 0.05).abs() < 1e-15);
        let m = Mesh::<f64>::periodic(320, 320, (-0.5, 0.5), (-0.5, 0.5)).unwrap();
        assert_eq!(m.dx(), 1.0 / 320.0);
        assert!(Mesh::<f64>::periodic(0, 3, (0.0, 1.0), (0.0, 1.0)).is_err());
    }

    #[test]
    fn boundary_validation() {
        use BoundaryKind::*;
        let sp = ShiftedPeriodic { shift: 2 };
        assert!(Mesh::<f64>::new(8, 2, (0.0, 1.0), (0.0, 0.25), [Outflow, Outflow, sp.clone(), sp.clone()]).is_ok());
        assert!(Mesh::<f64>::new(2, 2, (0.0, 1.0), (0.0, 1.0), [Outflow, Outflow, sp.clone(), sp.clone()]).is_err());
        assert!(Mesh::<f64>::new(8, 2, (0.0, 1.0), (0.0, 1.0), [sp.clone(), sp, Outflow, Outflow]).is_err());
        assert!(Mesh::<f64>::new(8, 2, (0.0, 1.0), (0.0, 1.0), [Periodic, Outflow, Outflow, Outflow]).is_err());
    }
}
