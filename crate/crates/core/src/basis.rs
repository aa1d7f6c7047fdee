//! Locally divergence-free polynomial space on the reference cell `[-1/2, 1/2]^2`.
//!
//! The six scalar components `(rho, m1, m2, m3, B3, E)` use an orthonormal
//! total-degree Legendre basis; the in-plane field `(B1, B2)` uses a basis of
//! divergence-free vector polynomials. A cell's coefficient block stores the six
//! scalar blocks first, then the vector block.

use crate::error::{MhdError, Result};
use crate::physics::{BX, BY, BZ, EN, MX, MY, MZ, NCOMP, RHO};
use crate::quadrature::{gauss_legendre, gauss_lobatto, Rule};
use crate::real::Real;

/// State slots carried by the scalar basis, in block order.
pub const SCALAR_SLOTS: [usize; 6] = [RHO, MX, MY, MZ, BZ, EN];

/// Highest supported polynomial degree.
pub const MAX_DEGREE: usize = 2;

/// Cell faces in the order used by all face tables.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Face {
    West = 0,
    East = 1,
    South = 2,
    North = 3,
}

impl Face {
    pub const ALL: [Face; 4] = [Face::West, Face::East, Face::South, Face::North];
}

/// Normalised 1D Legendre polynomial of degree `n <= 2` on `[-1/2, 1/2]` and its derivative.
#[inline]
fn leg<T: Real>(n: usize, x: T) -> (T, T) {
    match n {
        0 => (T::one(), T::zero()),
        1 => {
            let c = T::two() * T::lit(3.0).sqrt();
            (c * x, c)
        }
        _ => {
            let c = T::lit(5.0).sqrt();
            (c * (T::lit(6.0) * x * x - T::half()), c * T::lit(12.0) * x)
        }
    }
}

fn check_degree(k: usize) -> Result<()> {
    if k > MAX_DEGREE {
        Err(MhdError::UnsupportedDegree(k))
    } else {
        Ok(())
    }
}

/// Orthonormal modal basis of total degree `K` (unit cell measure).
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarBasis {
    degree: usize,
    modes: Vec<(usize, usize)>,
}

impl ScalarBasis {
    pub fn new(degree: usize) -> Result<Self> {
        check_degree(degree)?;
        let mut modes = Vec::new();
        for total in 0..=degree {
            for b in 0..=total {
                modes.push((total - b, b));
            }
        }
        Ok(Self { degree, modes })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    /// Legendre indices `(a, b)` of each mode.
    pub fn modes(&self) -> &[(usize, usize)] {
        &self.modes
    }

    /// Values and reference-coordinate gradients of every mode at `(xi, eta)`.
    pub fn eval<T: Real>(&self, xi: T, eta: T, val: &mut [T], dxi: &mut [T], deta: &mut [T]) {
        for (k, &(a, b)) in self.modes.iter().enumerate() {
            let (pa, da) = leg(a, xi);
            let (pb, db) = leg(b, eta);
            val[k] = pa * pb;
            dxi[k] = da * pb;
            deta[k] = pa * db;
        }
    }
}

/// Divergence-free vector basis for `(B1, B2)`.
///
/// Members are written in reference coordinates; `aspect = dy/dx` makes each
/// member divergence-free in physical coordinates. The first two members are
/// the constants `(1,0)` and `(0,1)`; every other member has zero cell mean.
#[derive(Clone, Debug, PartialEq)]
pub struct DivFreeBasis<T> {
    degree: usize,
    aspect: T,
}

impl<T: Real> DivFreeBasis<T> {
    pub fn new(degree: usize, aspect: T) -> Result<Self> {
        check_degree(degree)?;
        if !(aspect > T::zero()) {
            return Err(MhdError::InvalidArgument("cell aspect ratio must be positive".into()));
        }
        Ok(Self { degree, aspect })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        Self::count(self.degree)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Dimension of the divergence-free space of degree `k`.
    pub fn count(k: usize) -> usize {
        (k + 1) * (k + 2) - k * (k + 1) / 2
    }

    /// Values and reference-coordinate derivatives of each member at `(xi, eta)`.
    pub fn eval(&self, xi: T, eta: T, val: &mut [[T; 2]], dxi: &mut [[T; 2]], deta: &mut [[T; 2]]) {
        let (z, o, two) = (T::zero(), T::one(), T::two());
        let r = self.aspect;
        val[0] = [o, z];
        dxi[0] = [z, z];
        deta[0] = [z, z];
        val[1] = [z, o];
        dxi[1] = [z, z];
        deta[1] = [z, z];
        if self.degree >= 1 {
            val[2] = [eta, z];
            dxi[2] = [z, z];
            deta[2] = [o, z];
            val[3] = [z, xi];
            dxi[3] = [z, o];
            deta[3] = [z, z];
            val[4] = [xi, -r * eta];
            dxi[4] = [o, z];
            deta[4] = [z, -r];
        }
        if self.degree >= 2 {
            let c = T::lit(1.0 / 12.0);
            val[5] = [xi * xi - c, -two * r * xi * eta];
            dxi[5] = [two * xi, -two * r * eta];
            deta[5] = [z, -two * r * xi];
            val[6] = [two * xi * eta / r, -(eta * eta - c)];
            dxi[6] = [two * eta / r, z];
            deta[6] = [two * xi / r, -two * eta];
            val[7] = [eta * eta - c, z];
            dxi[7] = [z, z];
            deta[7] = [two * eta, z];
            val[8] = [z, xi * xi - c];
            dxi[8] = [z, two * xi];
            deta[8] = [z, z];
        }
    }
}

/// Basis values (and derivatives) tabulated at a list of reference points.
#[derive(Clone, Debug)]
pub struct PointTable<T> {
    pub xi: Vec<T>,
    pub eta: Vec<T>,
    /// Quadrature weights (all ones for point sets without a rule).
    pub w: Vec<T>,
    pub phi: Vec<T>,
    pub phi_dxi: Vec<T>,
    pub phi_deta: Vec<T>,
    pub psi: Vec<[T; 2]>,
    pub psi_dxi: Vec<[T; 2]>,
    pub psi_deta: Vec<[T; 2]>,
}

impl<T: Real> PointTable<T> {
    fn build(sb: &ScalarBasis, vb: &DivFreeBasis<T>, pts: &[(T, T, T)]) -> Self {
        let (ns, nv, n) = (sb.len(), vb.len(), pts.len());
        let mut t = Self {
            xi: pts.iter().map(|p| p.0).collect(),
            eta: pts.iter().map(|p| p.1).collect(),
            w: pts.iter().map(|p| p.2).collect(),
            phi: vec![T::zero(); n * ns],
            phi_dxi: vec![T::zero(); n * ns],
            phi_deta: vec![T::zero(); n * ns],
            psi: vec![[T::zero(); 2]; n * nv],
            psi_dxi: vec![[T::zero(); 2]; n * nv],
            psi_deta: vec![[T::zero(); 2]; n * nv],
        };
        for (p, &(x, y, _)) in pts.iter().enumerate() {
            let r = p * ns..(p + 1) * ns;
            let mut dx = vec![T::zero(); ns];
            let mut dy = vec![T::zero(); ns];
            sb.eval(x, y, &mut t.phi[r.clone()], &mut dx, &mut dy);
            t.phi_dxi[r.clone()].copy_from_slice(&dx);
            t.phi_deta[r].copy_from_slice(&dy);
            let r = p * nv..(p + 1) * nv;
            let mut v = vec![[T::zero(); 2]; nv];
            let mut vx = vec![[T::zero(); 2]; nv];
            let mut vy = vec![[T::zero(); 2]; nv];
            vb.eval(x, y, &mut v, &mut vx, &mut vy);
            t.psi[r.clone()].copy_from_slice(&v);
            t.psi_dxi[r.clone()].copy_from_slice(&vx);
            t.psi_deta[r].copy_from_slice(&vy);
        }
        t
    }

    pub fn len(&self) -> usize {
        self.xi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xi.is_empty()
    }
}

/// Everything needed to evaluate and evolve a degree-`K` field on cells of size `dx x dy`.
#[derive(Clone, Debug)]
pub struct DgSpace<T> {
    degree: usize,
    ns: usize,
    nv: usize,
    dx: T,
    dy: T,
    scalar: ScalarBasis,
    vector: DivFreeBasis<T>,
    gauss: Rule<T>,
    lobatto: Rule<T>,
    volume: PointTable<T>,
    faces: [PointTable<T>; 4],
    pp_points: PointTable<T>,
    gram_inv: Vec<T>,
    mirror_x: Vec<T>,
    mirror_y: Vec<T>,
}

/// Number of Gauss-Lobatto points used by the positivity point set for degree `k`.
pub fn lobatto_points_for_degree(k: usize) -> usize {
    // Smallest L >= 2 with 2L - 3 >= K.
    ((k + 3).div_ceil(2)).max(2)
}

impl<T: Real> DgSpace<T> {
    pub fn new(degree: usize, dx: T, dy: T) -> Result<Self> {
        check_degree(degree)?;
        if !(dx > T::zero() && dy > T::zero()) {
            return Err(MhdError::InvalidArgument("cell sizes must be positive".into()));
        }
        let scalar = ScalarBasis::new(degree)?;
        let vector = DivFreeBasis::new(degree, dy / dx)?;
        let q = degree + 1;
        let gauss = gauss_legendre::<T>(q)?;
        let lobatto = gauss_lobatto::<T>(lobatto_points_for_degree(degree))?;

        let mut vol_pts = Vec::with_capacity(q * q);
        for (jy, &y) in gauss.nodes.iter().enumerate() {
            for (ix, &x) in gauss.nodes.iter().enumerate() {
                vol_pts.push((x, y, gauss.weights[ix] * gauss.weights[jy]));
            }
        }
        let volume = PointTable::build(&scalar, &vector, &vol_pts);
        let h = T::half();
        let face_pts = |f: Face| -> Vec<(T, T, T)> {
            gauss
                .nodes
                .iter()
                .zip(&gauss.weights)
                .map(|(&s, &w)| match f {
                    Face::West => (-h, s, w),
                    Face::East => (h, s, w),
                    Face::South => (s, -h, w),
                    Face::North => (s, h, w),
                })
                .collect()
        };
        let faces = Face::ALL.map(|f| PointTable::build(&scalar, &vector, &face_pts(f)));

        let mut pp = Vec::new();
        for &g in &gauss.nodes {
            for &l in &lobatto.nodes {
                for cand in [(l, g), (g, l)] {
                    if !pp.iter().any(|&(x, y, _)| x == cand.0 && y == cand.1) {
                        pp.push((cand.0, cand.1, T::one()));
                    }
                }
            }
        }
        let pp_points = PointTable::build(&scalar, &vector, &pp);

        let nv = vector.len();
        let mut gram = vec![T::zero(); nv * nv];
        for p in 0..volume.len() {
            let w = volume.w[p];
            for a in 0..nv {
                let pa = volume.psi[p * nv + a];
                for b in 0..nv {
                    let pb = volume.psi[p * nv + b];
                    gram[a * nv + b] += w * (pa[0] * pb[0] + pa[1] * pb[1]);
                }
            }
        }
        let gram_inv = invert(&gram, nv)?;

        let mut space = Self {
            degree,
            ns: scalar.len(),
            nv,
            dx,
            dy,
            scalar,
            vector,
            gauss,
            lobatto,
            volume,
            faces,
            pp_points,
            gram_inv,
            mirror_x: Vec::new(),
            mirror_y: Vec::new(),
        };
        space.mirror_x = space.vector_mirror(true);
        space.mirror_y = space.vector_mirror(false);
        Ok(space)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }
    pub fn n_scalar(&self) -> usize {
        self.ns
    }
    pub fn n_vector(&self) -> usize {
        self.nv
    }
    /// Coefficients per cell.
    pub fn n_coef(&self) -> usize {
        6 * self.ns + self.nv
    }
    pub fn dx(&self) -> T {
        self.dx
    }
    pub fn dy(&self) -> T {
        self.dy
    }
    pub fn scalar_basis(&self) -> &ScalarBasis {
        &self.scalar
    }
    pub fn vector_basis(&self) -> &DivFreeBasis<T> {
        &self.vector
    }
    pub fn gauss(&self) -> &Rule<T> {
        &self.gauss
    }
    pub fn lobatto(&self) -> &Rule<T> {
        &self.lobatto
    }
    pub fn volume(&self) -> &PointTable<T> {
        &self.volume
    }
    pub fn face(&self, f: Face) -> &PointTable<T> {
        &self.faces[f as usize]
    }
    pub fn pp_points(&self) -> &PointTable<T> {
        &self.pp_points
    }
    /// Row-major inverse of the vector-block Gram matrix.
    pub fn gram_inv(&self) -> &[T] {
        &self.gram_inv
    }

    /// Endpoint Gauss-Lobatto weight `1/(L(L-1))`.
    pub fn lobatto_endpoint_weight(&self) -> T {
        self.lobatto.weights[0]
    }

    /// Offset of the vector block inside a cell's coefficients.
    #[inline(always)]
    pub fn vector_offset(&self) -> usize {
        6 * self.ns
    }

    /// State at tabulated point `p`.
    #[inline(always)]
    pub fn eval_table(&self, coef: &[T], table: &PointTable<T>, p: usize) -> [T; NCOMP] {
        let ns = self.ns;
        let nv = self.nv;
        let phi = &table.phi[p * ns..(p + 1) * ns];
        let mut u = [T::zero(); NCOMP];
        for (block, &slot) in coef[..6 * ns].chunks_exact(ns).zip(SCALAR_SLOTS.iter()) {
            let mut s = T::zero();
            for (&c, &f) in block.iter().zip(phi) {
                s += c * f;
            }
            u[slot] = s;
        }
        let psi = &table.psi[p * nv..(p + 1) * nv];
        let vb = &coef[6 * ns..6 * ns + nv];
        let (mut b1, mut b2) = (T::zero(), T::zero());
        for (&c, q) in vb.iter().zip(psi) {
            b1 += c * q[0];
            b2 += c * q[1];
        }
        u[BX] = b1;
        u[BY] = b2;
        u
    }

    /// State at an arbitrary reference point (no range check).
    pub fn eval_point(&self, coef: &[T], xi: T, eta: T) -> [T; NCOMP] {
        let t = PointTable::build(&self.scalar, &self.vector, &[(xi, eta, T::one())]);
        self.eval_table(coef, &t, 0)
    }

    /// Physical divergence of `(B1, B2)` at a reference point.
    pub fn divergence_at(&self, coef: &[T], xi: T, eta: T) -> T {
        let t = PointTable::build(&self.scalar, &self.vector, &[(xi, eta, T::one())]);
        let vb = &coef[self.vector_offset()..];
        let mut d = T::zero();
        for k in 0..self.nv {
            d += vb[k] * (t.psi_dxi[k][0] / self.dx + t.psi_deta[k][1] / self.dy);
        }
        d
    }

    /// Cell average of all eight components.
    #[inline(always)]
    pub fn average(&self, coef: &[T]) -> [T; NCOMP] {
        let mut u = [T::zero(); NCOMP];
        for (c, &slot) in SCALAR_SLOTS.iter().enumerate() {
            u[slot] = coef[c * self.ns];
        }
        let o = self.vector_offset();
        u[BX] = coef[o];
        u[BY] = coef[o + 1];
        u
    }

    /// Coefficients of a spatially constant state.
    pub fn constant(&self, u: &[T; NCOMP], coef: &mut [T]) {
        coef.iter_mut().for_each(|c| *c = T::zero());
        for (c, &slot) in SCALAR_SLOTS.iter().enumerate() {
            coef[c * self.ns] = u[slot];
        }
        let o = self.vector_offset();
        coef[o] = u[BX];
        coef[o + 1] = u[BY];
    }

    /// Discrete L2 projection of `f(xi, eta)` (reference coordinates) onto the space.
    pub fn project(&self, f: impl Fn(T, T) -> [T; NCOMP], coef: &mut [T]) {
        let rule = gauss_legendre::<T>(self.degree + 3).expect("projection rule");
        let mut pts = Vec::new();
        for (jy, &y) in rule.nodes.iter().enumerate() {
            for (ix, &x) in rule.nodes.iter().enumerate() {
                pts.push((x, y, rule.weights[ix] * rule.weights[jy]));
            }
        }
        let table = PointTable::build(&self.scalar, &self.vector, &pts);
        let values: Vec<[T; NCOMP]> = pts.iter().map(|&(x, y, _)| f(x, y)).collect();
        self.project_values(&table, &values, coef);
    }

    /// Projection from values at the points of `table`, using its weights.
    pub(crate) fn project_values(&self, table: &PointTable<T>, values: &[[T; NCOMP]], coef: &mut [T]) {
        let (ns, nv) = (self.ns, self.nv);
        coef.iter_mut().for_each(|c| *c = T::zero());
        let mut rhs = vec![T::zero(); nv];
        // Scalar modes are orthonormal only under an exact rule; use the
        // discrete Gram matrix to stay exact for any table.
        let mut sgram = vec![T::zero(); ns * ns];
        let mut srhs = vec![T::zero(); 6 * ns];
        let mut vgram = vec![T::zero(); nv * nv];
        for (p, u) in values.iter().enumerate() {
            let w = table.w[p];
            let phi = &table.phi[p * ns..(p + 1) * ns];
            for a in 0..ns {
                for b in 0..ns {
                    sgram[a * ns + b] += w * phi[a] * phi[b];
                }
                for (c, &slot) in SCALAR_SLOTS.iter().enumerate() {
                    srhs[c * ns + a] += w * u[slot] * phi[a];
                }
            }
            let psi = &table.psi[p * nv..(p + 1) * nv];
            for k in 0..nv {
                rhs[k] += w * (u[BX] * psi[k][0] + u[BY] * psi[k][1]);
                for l in 0..nv {
                    vgram[k * nv + l] += w * (psi[k][0] * psi[l][0] + psi[k][1] * psi[l][1]);
                }
            }
        }
        let sinv = invert(&sgram, ns).expect("scalar Gram matrix");
        let vinv = invert(&vgram, nv).expect("vector Gram matrix");
        for c in 0..6 {
            for a in 0..ns {
                let mut s = T::zero();
                for b in 0..ns {
                    s += sinv[a * ns + b] * srhs[c * ns + b];
                }
                coef[c * ns + a] = s;
            }
        }
        let o = self.vector_offset();
        for k in 0..nv {
            let mut s = T::zero();
            for l in 0..nv {
                s += vinv[k * nv + l] * rhs[l];
            }
            coef[o + k] = s;
        }
    }

    /// Applies the vector-block Gram inverse in place.
    #[inline(always)]
    pub(crate) fn apply_gram_inv(&self, v: &mut [T]) {
        let nv = self.nv;
        let mut out = [T::zero(); 9];
        for k in 0..nv {
            let mut s = T::zero();
            for l in 0..nv {
                s += self.gram_inv[k * nv + l] * v[l];
            }
            out[k] = s;
        }
        v[..nv].copy_from_slice(&out[..nv]);
    }

    /// Coefficients of the mirror image across a vertical (`x_normal`) or
    /// horizontal face line, with the normal velocity and normal field negated.
    pub fn mirror(&self, coef: &[T], x_normal: bool, out: &mut [T]) {
        let ns = self.ns;
        let flip_slot = if x_normal { MX } else { MY };
        for (c, &slot) in SCALAR_SLOTS.iter().enumerate() {
            for (a, &(ax, ay)) in self.scalar.modes().iter().enumerate() {
                let odd = if x_normal { ax % 2 == 1 } else { ay % 2 == 1 };
                let mut v = coef[c * ns + a];
                if odd {
                    v = -v;
                }
                if slot == flip_slot {
                    v = -v;
                }
                out[c * ns + a] = v;
            }
        }
        let m = if x_normal { &self.mirror_x } else { &self.mirror_y };
        let o = self.vector_offset();
        let nv = self.nv;
        for k in 0..nv {
            let mut s = T::zero();
            for l in 0..nv {
                s += m[k * nv + l] * coef[o + l];
            }
            out[o + k] = s;
        }
    }

    fn vector_mirror(&self, x_normal: bool) -> Vec<T> {
        let nv = self.nv;
        let vol = &self.volume;
        let mut m = vec![T::zero(); nv * nv];
        let mut val = vec![[T::zero(); 2]; nv];
        let mut dx = vec![[T::zero(); 2]; nv];
        let mut dy = vec![[T::zero(); 2]; nv];
        for l in 0..nv {
            // Project the reflected member l onto the basis.
            let mut rhs = vec![T::zero(); nv];
            for p in 0..vol.len() {
                let (x, y) = (vol.xi[p], vol.eta[p]);
                let (xs, ys) = if x_normal { (-x, y) } else { (x, -y) };
                self.vector.eval(xs, ys, &mut val, &mut dx, &mut dy);
                let mut b = val[l];
                if x_normal {
                    b[0] = -b[0];
                } else {
                    b[1] = -b[1];
                }
                let psi = &vol.psi[p * nv..(p + 1) * nv];
                for k in 0..nv {
                    rhs[k] += vol.w[p] * (b[0] * psi[k][0] + b[1] * psi[k][1]);
                }
            }
            for k in 0..nv {
                let mut s = T::zero();
                for j in 0..nv {
                    s += self.gram_inv[k * nv + j] * rhs[j];
                }
                m[k * nv + l] = s;
            }
        }
        m
    }
}

/// Dense inverse by Gauss-Jordan elimination with partial pivoting.
pub(crate) fn invert<T: Real>(a: &[T], n: usize) -> Result<Vec<T>> {
    let mut m = a.to_vec();
    let mut inv = vec![T::zero(); n * n];
    for i in 0..n {
        inv[i * n + i] = T::one();
    }
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&r, &s| m[r * n + col].abs().partial_cmp(&m[s * n + col].abs()).unwrap())
            .unwrap();
        let pv = m[piv * n + col];
        if !(pv.abs() > T::epsilon()) {
            return Err(MhdError::Singular("Gram matrix"));
        }
        if piv != col {
            for k in 0..n {
                m.swap(piv * n + k, col * n + k);
                inv.swap(piv * n + k, col * n + k);
            }
        }
        for k in 0..n {
            m[col * n + k] /= pv;
            inv[col * n + k] /= pv;
        }
        for r in 0..n {
            if r != col {
                let f = m[r * n + col];
                if f != T::zero() {
                    for k in 0..n {
                        let (mc, ic) = (m[col * n + k], inv[col * n + k]);
                        m[r * n + k] -= f * mc;
                        inv[r * n + k] -= f * ic;
                    }
                }
            }
        }
    }
    Ok(inv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn scalar_basis_is_orthonormal() {
        for k in 0..=2 {
            let s = DgSpace::<f64>::new(k, 1.0, 1.0).unwrap();
            let v = s.volume();
            let ns = s.n_scalar();
            assert_eq!(ns, (k + 1) * (k + 2) / 2);
            for a in 0..ns {
                for b in 0..ns {
                    let g: f64 = (0..v.len()).map(|p| v.w[p] * v.phi[p * ns + a] * v.phi[p * ns + b]).sum();
                    assert_relative_eq!(g, if a == b { 1.0 } else { 0.0 }, epsilon = 1e-12);
                }
            }
        }
        assert!(ScalarBasis::new(3).is_err());
    }

    #[test]
    fn vector_members_are_divergence_free() {
        for &(dx, dy) in &[(1.0, 1.0), (0.1, 0.37), (2.0, 0.5)] {
            let b = DivFreeBasis::<f64>::new(2, dy / dx).unwrap();
            let mut v = [[0.0; 2]; 9];
            let mut gx = [[0.0; 2]; 9];
            let mut gy = [[0.0; 2]; 9];
            for n in 0..20 {
                let x = -0.5 + (n as f64 * 0.37) % 1.0;
                let y = -0.5 + (n as f64 * 0.61) % 1.0;
                b.eval(x, y, &mut v, &mut gx, &mut gy);
                for k in 0..9 {
                    assert!((gx[k][0] / dx + gy[k][1] / dy).abs() < 1e-13);
                }
            }
        }
        assert_eq!(DivFreeBasis::<f64>::count(0), 2);
        assert_eq!(DivFreeBasis::<f64>::count(1), 5);
        assert_eq!(DivFreeBasis::<f64>::count(2), 9);
    }

    #[test]
    fn member_x_minus_y_evaluates_directly() {
        let b = DivFreeBasis::<f64>::new(1, 1.0).unwrap();
        let mut v = [[0.0; 2]; 5];
        let mut gx = [[0.0; 2]; 5];
        let mut gy = [[0.0; 2]; 5];
        b.eval(0.25, 0.5, &mut v, &mut gx, &mut gy);
        assert_eq!(v[4], [0.25, -0.5]);
    }

    #[test]
    fn pp_point_set_sizes() {
        assert_eq!(DgSpace::<f64>::new(0, 1.0, 1.0).unwrap().pp_points().len(), 4);
        assert_eq!(DgSpace::<f64>::new(1, 1.0, 1.0).unwrap().pp_points().len(), 8);
        assert_eq!(DgSpace::<f64>::new(2, 1.0, 1.0).unwrap().pp_points().len(), 17);
        assert_eq!(lobatto_points_for_degree(0), 2);
        assert_eq!(lobatto_points_for_degree(1), 2);
        assert_eq!(lobatto_points_for_degree(2), 3);
    }

    #[test]
    fn projection_reproduces_in_space_data() {
        let s = DgSpace::<f64>::new(2, 0.1, 0.2).unwrap();
        let r = 2.0;
        let f = |x: f64, y: f64| {
            [
                1.0 + x + 3.0 * x * y,
                x * x,
                0.5,
                -y,
                x - 0.3 * y,
                -r * y + 0.2,
                y * y,
                4.0 + x,
            ]
        };
        let mut c = vec![0.0; s.n_coef()];
        s.project(f, &mut c);
        for &(x, y) in &[(0.1, 0.2), (-0.5, 0.5), (0.33, -0.41)] {
            let u = s.eval_point(&c, x, y);
            let e = f(x, y);
            for k in 0..8 {
                assert!((u[k] - e[k]).abs() < 1e-13, "{k}: {} vs {}", u[k], e[k]);
            }
        }
    }

    #[test]
    fn mirror_flips_normal_components() {
        let s = DgSpace::<f64>::new(2, 1.0, 1.0).unwrap();
        let mut c = vec![0.0; s.n_coef()];
        s.project(|x, y| [1.0 + x, 1.0 + y, 0.2 * x, 0.0, 1.0 + y, x, 0.0, 3.0], &mut c);
        let mut m = vec![0.0; s.n_coef()];
        s.mirror(&c, true, &mut m);
        let a = s.eval_point(&c, 0.3, 0.1);
        let b = s.eval_point(&m, -0.3, 0.1);
        let sign = [1.0, -1.0, 1.0, 1.0, -1.0, 1.0, 1.0, 1.0];
        for k in 0..8 {
            assert_relative_eq!(b[k], sign[k] * a[k], epsilon = 1e-13);
        }
    }
}
