//! Positivity-preserving scaling limiter and a TVB minmod limiter.

use rayon::prelude::*;

use crate::basis::{DgSpace, Face, SCALAR_SLOTS};
use crate::error::{MhdError, Result};
use crate::field::DgField;
use crate::physics::{internal_energy_raw, is_admissible_raw, Eos, BX, BY, EN, NCOMP, RHO};
use crate::real::Real;

/// Default floor for density and internal energy.
pub const DEFAULT_FLOOR: f64 = 1e-13;

/// Outcome of limiting one field.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PpStats<T> {
    /// Cells whose polynomial was modified.
    pub limited: usize,
    /// Minimum density over all positivity points after limiting.
    pub min_rho: T,
    /// Minimum pressure over all positivity points after limiting.
    pub min_p: T,
}

fn scale_modes<T: Real>(space: &DgSpace<T>, coef: &mut [T], theta: T, only_density: bool) {
    let ns = space.n_scalar();
    let blocks = if only_density { 1 } else { 6 };
    for c in 0..blocks {
        for a in 1..ns {
            coef[c * ns + a] *= theta;
        }
    }
    if !only_density {
        let o = space.vector_offset();
        for k in 2..space.n_vector() {
            coef[o + k] *= theta;
        }
    }
}

/// Largest `t` in `[0, 1]` with internal energy of `(1-t) avg + t u` at least `eps`,
/// by bisection keeping the admissible end.
fn energy_root<T: Real>(avg: &[T; NCOMP], u: &[T; NCOMP], eps: T) -> T {
    let at = |t: T| {
        let s: [T; NCOMP] = std::array::from_fn(|k| avg[k] + t * (u[k] - avg[k]));
        internal_energy_raw(&s)
    };
    let (mut lo, mut hi) = (T::zero(), T::one());
    let tol = T::lit(1e-14);
    while hi - lo > tol {
        let mid = T::half() * (lo + hi);
        if at(mid) >= eps {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Scales the non-constant modes of one cell toward its average so that
/// density and internal energy are at least the floors at every positivity
/// point. Returns whether the coefficients changed.
///
/// The floors are raised to `64 eps` times the average density and `|E|`, the
/// rounding level of the evaluated values. When the average itself sits below a
/// floor the floor is lowered to half the average value. A cell that violates a
/// floor is scaled to reach twice that floor, so a second pass leaves it unchanged.
pub fn pp_limit_cell<T: Real>(space: &DgSpace<T>, coef: &mut [T], eps_rho: T, eps_e: T) -> Result<bool> {
    limit_cell(space, coef, eps_rho, eps_e).map(|(changed, _, _)| changed)
}

/// Limits one cell and returns the point minima of density and internal energy afterwards.
fn limit_cell<T: Real>(space: &DgSpace<T>, coef: &mut [T], eps_rho: T, eps_e: T) -> Result<(bool, T, T)> {
    let avg = space.average(coef);
    if !is_admissible_raw(&avg) {
        return Err(MhdError::PositivityFailure(format!("inadmissible cell average {avg:?}")));
    }
    let eps_rho = eps_rho.max(T::lit(64.0) * T::epsilon() * avg[RHO]).min(T::half() * avg[RHO]);
    let eps_e = eps_e
        .max(T::lit(64.0) * T::epsilon() * avg[EN].abs())
        .min(T::half() * internal_energy_raw(&avg));
    let e_avg = internal_energy_raw(&avg);
    let pts = space.pp_points();
    let ns = space.n_scalar();
    let rho_at = |coef: &[T], p: usize| -> T {
        let phi = &pts.phi[p * ns..(p + 1) * ns];
        (0..ns).map(|a| coef[a] * phi[a]).sum()
    };
    let minima = |coef: &[T]| {
        (0..pts.len()).fold((T::infinity(), T::infinity()), |(r, e), p| {
            let u = space.eval_table(coef, pts, p);
            (r.min(u[RHO]), e.min(internal_energy_raw(&u)))
        })
    };
    let mut changed = false;

    let rho_min = (0..pts.len()).fold(avg[RHO], |m, p| m.min(rho_at(coef, p)));
    if rho_min < eps_rho {
        changed = true;
        let orig = coef.to_vec();
        let mut target = T::two() * eps_rho;
        loop {
            let theta = ((avg[RHO] - target) / (avg[RHO] - rho_min)).max(T::zero()).min(T::one());
            scale_modes(space, coef, theta, true);
            let low = (0..pts.len()).fold(avg[RHO], |m, p| m.min(rho_at(coef, p)));
            if low >= eps_rho || theta == T::zero() {
                break;
            }
            coef.copy_from_slice(&orig);
            target = (target * T::lit(4.0)).min(avg[RHO]);
        }
    }

    let (mut min_rho, mut min_e) = minima(coef);
    if min_e < eps_e {
        changed = true;
        let orig = coef.to_vec();
        let mut target = T::two() * eps_e;
        loop {
            let theta = (0..pts.len()).fold(T::one(), |t, p| {
                let u = space.eval_table(&orig, pts, p);
                if internal_energy_raw(&u) < target {
                    t.min(energy_root(&avg, &u, target))
                } else {
                    t
                }
            });
            scale_modes(space, coef, theta, false);
            (min_rho, min_e) = minima(coef);
            if min_e >= eps_e || theta == T::zero() {
                break;
            }
            coef.copy_from_slice(&orig);
            target = (target * T::lit(4.0)).min(e_avg);
        }
    }
    Ok((changed, min_rho, min_e))
}

/// Applies [`pp_limit_cell`] to every interior cell and reports point minima.
pub fn pp_limit_field<T: Real, E: Eos<T>>(field: &mut DgField<T>, eps_rho: T, eps_e: T, eos: &E) -> Result<PpStats<T>> {
    let space = field.space().clone();
    let nc = space.n_coef();
    let (nx, ny) = (field.nx(), field.ny());
    let row = (nx + 2) * nc;
    let rows: Vec<Result<PpStats<T>>> = field
        .data_mut()
        .par_chunks_mut(row)
        .enumerate()
        .filter(|(jr, _)| *jr >= 1 && *jr <= ny)
        .map(|(jr, chunk)| {
            let mut s = PpStats {
                limited: 0,
                min_rho: T::infinity(),
                min_p: T::infinity(),
            };
            for i in 0..nx {
                let coef = &mut chunk[(i + 1) * nc..(i + 2) * nc];
                let (changed, rho, rho_e) = limit_cell(&space, coef, eps_rho, eps_e).map_err(|e| match e {
                    MhdError::PositivityFailure(m) => {
                        MhdError::PositivityFailure(format!("cell ({i},{}): {m}", jr - 1))
                    }
                    other => other,
                })?;
                if changed {
                    s.limited += 1;
                }
                s.min_rho = s.min_rho.min(rho);
                s.min_p = s.min_p.min(eos.pressure(rho, rho_e));
            }
            Ok(s)
        })
        .collect();
    let mut out = PpStats {
        limited: 0,
        min_rho: T::infinity(),
        min_p: T::infinity(),
    };
    for r in rows {
        let r = r?;
        out.limited += r.limited;
        out.min_rho = out.min_rho.min(r.min_rho);
        out.min_p = out.min_p.min(r.min_p);
    }
    Ok(out)
}

/// Minimum density and pressure over all positivity points without limiting.
pub fn pp_point_minima<T: Real, E: Eos<T>>(field: &DgField<T>, eos: &E) -> (T, T) {
    let space = field.space();
    let pts = space.pp_points();
    let (mut r, mut p) = (T::infinity(), T::infinity());
    for j in 0..field.ny() as isize {
        for i in 0..field.nx() as isize {
            for k in 0..pts.len() {
                let u = space.eval_table(field.cell(i, j), pts, k);
                r = r.min(u[RHO]);
                p = p.min(eos.pressure(u[RHO], internal_energy_raw(&u)));
            }
        }
    }
    (r, p)
}

#[inline]
fn minmod<T: Real>(a: T, b: T, c: T) -> T {
    if a > T::zero() && b > T::zero() && c > T::zero() {
        a.min(b).min(c)
    } else if a < T::zero() && b < T::zero() && c < T::zero() {
        a.max(b).max(c)
    } else {
        T::zero()
    }
}

/// TVB-modified minmod: returns `a` when `|a| <= bound`.
#[inline]
pub fn tvb_minmod<T: Real>(a: T, b: T, c: T, bound: T) -> T {
    if a.abs() <= bound {
        a
    } else {
        minmod(a, b, c)
    }
}

/// Per-face mean rows: `sum_mu w_mu phi_a(face node)` for scalar and vector modes.
struct FaceMeans<T> {
    scalar: [Vec<T>; 4],
    vector: [Vec<[T; 2]>; 4],
}

impl<T: Real> FaceMeans<T> {
    fn new(space: &DgSpace<T>) -> Self {
        let (ns, nv) = (space.n_scalar(), space.n_vector());
        let scalar = Face::ALL.map(|f| {
            let t = space.face(f);
            (0..ns).map(|a| (0..t.len()).map(|p| t.w[p] * t.phi[p * ns + a]).sum()).collect()
        });
        let vector = Face::ALL.map(|f| {
            let t = space.face(f);
            (0..nv)
                .map(|k| {
                    let mut s = [T::zero(); 2];
                    for p in 0..t.len() {
                        s[0] += t.w[p] * t.psi[p * nv + k][0];
                        s[1] += t.w[p] * t.psi[p * nv + k][1];
                    }
                    s
                })
                .collect()
        });
        Self { scalar, vector }
    }

    fn mean(&self, space: &DgSpace<T>, coef: &[T], f: Face) -> [T; NCOMP] {
        let ns = space.n_scalar();
        let mut u = [T::zero(); NCOMP];
        let row = &self.scalar[f as usize];
        for (c, &slot) in SCALAR_SLOTS.iter().enumerate() {
            u[slot] = (0..ns).map(|a| coef[c * ns + a] * row[a]).sum();
        }
        let o = space.vector_offset();
        for (k, m) in self.vector[f as usize].iter().enumerate() {
            u[BX] += coef[o + k] * m[0];
            u[BY] += coef[o + k] * m[1];
        }
        u
    }
}

/// Component-wise TVB limiter. Ghosts of `field` must be filled. Troubled
/// cells get every component replaced by a limited linear polynomial, with the
/// in-plane field re-projected onto the divergence-free block. Returns the
/// row-major trouble map of the interior.
pub fn tvb_limit<T: Real>(field: &mut DgField<T>, m: T) -> Vec<bool> {
    let space = field.space().clone();
    let (nx, ny) = (field.nx(), field.ny());
    if space.degree() == 0 {
        return vec![false; nx * ny];
    }
    let means = FaceMeans::new(&space);
    let bx = m * space.dx() * space.dx();
    let by = m * space.dy() * space.dy();
    let nc = space.n_coef();
    let src = field.clone();
    let row = (nx + 2) * nc;
    let flags: Vec<Vec<bool>> = field
        .data_mut()
        .par_chunks_mut(row)
        .enumerate()
        .filter(|(jr, _)| *jr >= 1 && *jr <= ny)
        .map(|(jr, chunk)| {
            let j = jr as isize - 1;
            let mut out = vec![false; nx];
            for (i, flag) in out.iter_mut().enumerate() {
                let i = i as isize;
                let c = src.cell(i, j);
                let avg = space.average(c);
                let (ae, aw) = (src.average(i + 1, j), src.average(i - 1, j));
                let (an, as_) = (src.average(i, j + 1), src.average(i, j - 1));
                let fe = means.mean(&space, c, Face::East);
                let fw = means.mean(&space, c, Face::West);
                let fn_ = means.mean(&space, c, Face::North);
                let fs = means.mean(&space, c, Face::South);
                let mut slopes = [[T::zero(); 2]; NCOMP];
                let mut troubled = false;
                for k in 0..NCOMP {
                    let (dpx, dmx) = (ae[k] - avg[k], avg[k] - aw[k]);
                    let (dpy, dmy) = (an[k] - avg[k], avg[k] - as_[k]);
                    let (ex, wx) = (fe[k] - avg[k], avg[k] - fw[k]);
                    let (ny_, sy) = (fn_[k] - avg[k], avg[k] - fs[k]);
                    if tvb_minmod(ex, dpx, dmx, bx) != ex
                        || tvb_minmod(wx, dpx, dmx, bx) != wx
                        || tvb_minmod(ny_, dpy, dmy, by) != ny_
                        || tvb_minmod(sy, dpy, dmy, by) != sy
                    {
                        troubled = true;
                    }
                    slopes[k] = [
                        tvb_minmod(T::half() * (ex + wx), dpx, dmx, bx),
                        tvb_minmod(T::half() * (ny_ + sy), dpy, dmy, by),
                    ];
                }
                if troubled {
                    *flag = true;
                    let dst = &mut chunk[(i as usize + 1) * nc..(i as usize + 2) * nc];
                    linear_replace(&space, &avg, &slopes, dst);
                }
            }
            out
        })
        .collect();
    flags.into_iter().flatten().collect()
}

/// Writes the linear polynomial with face deviations `slopes` (x, y) into `coef`.
fn linear_replace<T: Real>(space: &DgSpace<T>, avg: &[T; NCOMP], slopes: &[[T; 2]; NCOMP], coef: &mut [T]) {
    let ns = space.n_scalar();
    let root3 = T::lit(3.0).sqrt();
    coef.iter_mut().for_each(|c| *c = T::zero());
    for (c, &slot) in SCALAR_SLOTS.iter().enumerate() {
        coef[c * ns] = avg[slot];
        // Mode (1,0) is 2 sqrt(3) xi, worth sqrt(3) on the east face.
        coef[c * ns + 1] = slopes[slot][0] / root3;
        coef[c * ns + 2] = slopes[slot][1] / root3;
    }
    let vol = space.volume();
    let nv = space.n_vector();
    let o = space.vector_offset();
    let two = T::two();
    let mut rhs = vec![T::zero(); nv];
    for p in 0..vol.len() {
        let (x, y) = (vol.xi[p], vol.eta[p]);
        let b1 = avg[BX] + two * (slopes[BX][0] * x + slopes[BX][1] * y);
        let b2 = avg[BY] + two * (slopes[BY][0] * x + slopes[BY][1] * y);
        for k in 0..nv {
            let psi = vol.psi[p * nv + k];
            rhs[k] += vol.w[p] * (b1 * psi[0] + b2 * psi[1]);
        }
    }
    space.apply_gram_inv(&mut rhs);
    coef[o..o + nv].copy_from_slice(&rhs);
}
