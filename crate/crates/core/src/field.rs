//! Solution storage: modal DG fields and plain cell-average grids, both with
//! one ghost layer.

use std::sync::Arc;

use crate::basis::DgSpace;
use crate::error::{MhdError, Result};
use crate::mesh::{GhostStorage, Mesh};
use crate::physics::{ConservedState, NCOMP};
use crate::real::Real;

#[inline(always)]
fn slot(nx: usize, i: isize, j: isize) -> usize {
    ((j + 1) as usize) * (nx + 2) + (i + 1) as usize
}

/// Per-cell coefficient blocks of a degree-`K` field on an `nx x ny` grid.
#[derive(Clone, Debug)]
pub struct DgField<T> {
    space: Arc<DgSpace<T>>,
    nx: usize,
    ny: usize,
    data: Vec<T>,
}

impl<T: Real> DgField<T> {
    pub fn zeros(space: Arc<DgSpace<T>>, nx: usize, ny: usize) -> Self {
        let n = (nx + 2) * (ny + 2) * space.n_coef();
        Self {
            space,
            nx,
            ny,
            data: vec![T::zero(); n],
        }
    }

    /// Projects the physical-coordinate function `f(x, y)` cell by cell.
    pub fn project(space: Arc<DgSpace<T>>, mesh: &Mesh<T>, f: impl Fn(T, T) -> [T; NCOMP] + Sync) -> Self {
        let mut field = Self::zeros(space, mesh.nx(), mesh.ny());
        let space = field.space.clone();
        for j in 0..mesh.ny() as isize {
            for i in 0..mesh.nx() as isize {
                let c = field.cell_mut(i, j);
                space.project(
                    |xi, eta| {
                        let (x, y) = mesh.point(i, j, xi, eta);
                        f(x, y)
                    },
                    c,
                );
            }
        }
        mesh.fill_ghosts(&mut field);
        field
    }

    pub fn space(&self) -> &Arc<DgSpace<T>> {
        &self.space
    }
    pub fn nx(&self) -> usize {
        self.nx
    }
    pub fn ny(&self) -> usize {
        self.ny
    }
    pub fn data(&self) -> &[T] {
        &self.data
    }
    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    /// Index of cell `(i, j)` in block units; `-1..=n` are valid.
    #[inline(always)]
    pub fn block_index(&self, i: isize, j: isize) -> usize {
        slot(self.nx, i, j)
    }

    #[inline(always)]
    pub fn cell(&self, i: isize, j: isize) -> &[T] {
        let n = self.space.n_coef();
        let o = slot(self.nx, i, j) * n;
        &self.data[o..o + n]
    }

    #[inline(always)]
    pub fn cell_mut(&mut self, i: isize, j: isize) -> &mut [T] {
        let n = self.space.n_coef();
        let o = slot(self.nx, i, j) * n;
        &mut self.data[o..o + n]
    }

    /// Cell average of all eight components.
    pub fn average(&self, i: isize, j: isize) -> [T; NCOMP] {
        self.space.average(self.cell(i, j))
    }

    /// State at reference point `(xi, eta)` of interior cell `(i, j)`.
    pub fn evaluate(&self, i: usize, j: usize, xi: T, eta: T) -> Result<ConservedState<T>> {
        let h = T::half();
        if i >= self.nx || j >= self.ny {
            return Err(MhdError::InvalidArgument(format!("cell ({i},{j}) outside mesh")));
        }
        if !(xi >= -h && xi <= h && eta >= -h && eta <= h) {
            return Err(MhdError::InvalidArgument(format!("point ({xi},{eta}) outside reference cell")));
        }
        let u = self.space.eval_point(self.cell(i as isize, j as isize), xi, eta);
        Ok(ConservedState::from_array(u))
    }

    /// Interior cell averages as a [`CellAverages`] grid (ghosts zeroed).
    pub fn averages(&self) -> CellAverages<T> {
        let mut a = CellAverages::new(self.nx, self.ny);
        for j in 0..self.ny as isize {
            for i in 0..self.nx as isize {
                *a.get_mut(i, j) = self.average(i, j);
            }
        }
        a
    }

    /// `self = a * x + b * y` over all storage, including ghosts.
    pub fn assign_combination(&mut self, a: T, x: &Self, b: T, y: &Self) {
        for ((o, &p), &q) in self.data.iter_mut().zip(&x.data).zip(&y.data) {
            *o = a * p + b * q;
        }
    }
}

impl<T: Real> GhostStorage<T> for DgField<T> {
    fn dims(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    fn copy_cell(&mut self, from: (isize, isize), to: (isize, isize)) {
        let n = self.space.n_coef();
        let a = slot(self.nx, from.0, from.1) * n;
        let b = slot(self.nx, to.0, to.1) * n;
        self.data.copy_within(a..a + n, b);
    }

    fn set_constant(&mut self, at: (isize, isize), u: &[T; NCOMP]) {
        let space = self.space.clone();
        space.constant(u, self.cell_mut(at.0, at.1));
    }

    fn mirror_cell(&mut self, from: (isize, isize), to: (isize, isize), x_normal: bool) {
        let src = self.cell(from.0, from.1).to_vec();
        let space = self.space.clone();
        space.mirror(&src, x_normal, self.cell_mut(to.0, to.1));
    }
}

/// Grid of cell-average states with one ghost layer.
#[derive(Clone, Debug, PartialEq)]
pub struct CellAverages<T> {
    nx: usize,
    ny: usize,
    data: Vec<[T; NCOMP]>,
}

impl<T: Real> CellAverages<T> {
    pub fn new(nx: usize, ny: usize) -> Self {
        Self {
            nx,
            ny,
            data: vec![[T::zero(); NCOMP]; (nx + 2) * (ny + 2)],
        }
    }

    /// Averages built from `f(i, j)` on interior cells, ghosts filled from `mesh`.
    pub fn from_fn(mesh: &Mesh<T>, f: impl Fn(usize, usize) -> [T; NCOMP]) -> Self {
        let mut a = Self::new(mesh.nx(), mesh.ny());
        for j in 0..mesh.ny() {
            for i in 0..mesh.nx() {
                *a.get_mut(i as isize, j as isize) = f(i, j);
            }
        }
        mesh.fill_ghosts(&mut a);
        a
    }

    pub fn nx(&self) -> usize {
        self.nx
    }
    pub fn ny(&self) -> usize {
        self.ny
    }

    #[inline(always)]
    pub fn get(&self, i: isize, j: isize) -> &[T; NCOMP] {
        &self.data[slot(self.nx, i, j)]
    }

    #[inline(always)]
    pub fn get_mut(&mut self, i: isize, j: isize) -> &mut [T; NCOMP] {
        &mut self.data[slot(self.nx, i, j)]
    }

    /// Interior states in row-major order.
    pub fn interior(&self) -> impl Iterator<Item = ((usize, usize), &[T; NCOMP])> + '_ {
        (0..self.ny).flat_map(move |j| (0..self.nx).map(move |i| ((i, j), self.get(i as isize, j as isize))))
    }
}

impl<T: Real> GhostStorage<T> for CellAverages<T> {
    fn dims(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    fn copy_cell(&mut self, from: (isize, isize), to: (isize, isize)) {
        *self.get_mut(to.0, to.1) = *self.get(from.0, from.1);
    }

    fn set_constant(&mut self, at: (isize, isize), u: &[T; NCOMP]) {
        *self.get_mut(at.0, at.1) = *u;
    }

    fn mirror_cell(&mut self, from: (isize, isize), to: (isize, isize), x_normal: bool) {
        let mut u = *self.get(from.0, from.1);
        let (m, b) = if x_normal { (1, 4) } else { (2, 5) };
        u[m] = -u[m];
        u[b] = -u[b];
        *self.get_mut(to.0, to.1) = u;
    }
}
