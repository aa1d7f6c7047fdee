//! Spatial discretisations: LF flux, interface field jumps, discrete
//! divergences, the first-order scheme on cell averages, and the DG residual.

use std::sync::Arc;

use rayon::prelude::*;

use crate::basis::{DgSpace, Face, SCALAR_SLOTS};
use crate::error::{MhdError, Result};
use crate::field::{CellAverages, DgField};
use crate::mesh::Mesh;
use crate::physics::{
    alpha_from_inputs, alpha_inputs, AlphaInputs, flux_raw, flux_xy_raw, godunov_source_raw, internal_energy_raw,
    is_admissible_raw, spectral_radius_raw, Axis, ConservedState, Eos, BX, BY, NCOMP, RHO,
};
use crate::real::Real;

/// How the LF viscosity parameters are chosen from the current solution.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum ViscosityPolicy {
    /// `margin x` the positivity bound of the theorems.
    PositivityBound,
    /// `margin x max(positivity bound, spectral radius)`.
    #[default]
    PositivityOrSpectral,
    /// `margin x` the largest spectral radius (standard LF).
    Spectral,
}

/// LF parameters and the source switch used by one Euler stage.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SchemeParams<T> {
    pub alpha: [T; 2],
    /// Adds the discretised Godunov-Powell source (penalty) terms.
    pub include_source: bool,
}

/// One face quadrature node with its two one-sided states.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InterfaceTrace<T> {
    pub minus: ConservedState<T>,
    pub plus: ConservedState<T>,
    pub axis: Axis,
}

/// `(F(U-) + F(U+) - alpha (U+ - U-)) / 2`.
pub fn lf_flux<T: Real, E: Eos<T>>(trace: &InterfaceTrace<T>, alpha: T, eos: &E) -> Result<[T; NCOMP]> {
    if !(alpha > T::zero()) {
        return Err(MhdError::InvalidArgument("LF parameter must be positive".into()));
    }
    for s in [&trace.minus, &trace.plus] {
        if !(s.rho > T::zero()) {
            return Err(MhdError::NonpositiveDensity(s.rho.as_f64()));
        }
    }
    let (a, b) = (trace.minus.to_array(), trace.plus.to_array());
    Ok(lf_raw(&a, &b, &flux_raw(&a, trace.axis, eos), &flux_raw(&b, trace.axis, eos), alpha))
}

#[inline(always)]
fn lf_raw<T: Real>(um: &[T; NCOMP], up: &[T; NCOMP], fm: &[T; NCOMP], fp: &[T; NCOMP], alpha: T) -> [T; NCOMP] {
    let h = T::half();
    std::array::from_fn(|k| h * (fm[k] + fp[k] - alpha * (up[k] - um[k])))
}

/// `(B_n(+) - B_n(-)) / 2` for the face normal.
pub fn interface_b_jump<T: Real>(trace: &InterfaceTrace<T>) -> T {
    let i = trace.axis.index();
    T::half() * (trace.plus.b[i] - trace.minus.b[i])
}

/// Central-difference divergence of the cell-average field at interior cell `(i, j)`.
pub fn discrete_divergence_fo<T: Real>(avgs: &CellAverages<T>, mesh: &Mesh<T>, i: isize, j: isize) -> Result<T> {
    let (nx, ny) = (avgs.nx() as isize, avgs.ny() as isize);
    if i < 0 || j < 0 || i >= nx || j >= ny {
        return Err(MhdError::InvalidArgument(format!("cell ({i},{j}) has no full neighbourhood")));
    }
    Ok(div_fo(avgs, mesh.dx(), mesh.dy(), i, j))
}

#[inline(always)]
fn div_fo<T: Real>(a: &CellAverages<T>, dx: T, dy: T, i: isize, j: isize) -> T {
    (a.get(i + 1, j)[BX] - a.get(i - 1, j)[BX]) / (T::two() * dx)
        + (a.get(i, j + 1)[BY] - a.get(i, j - 1)[BY]) / (T::two() * dy)
}

/// Face-average divergence of a DG field at interior cell `(i, j)`, using the
/// arithmetic mean of the two one-sided normal-field traces on each face.
pub fn discrete_divergence_ho<T: Real>(field: &DgField<T>, i: isize, j: isize) -> T {
    let s = field.space();
    let w = &s.gauss().weights;
    let mean = |f: Face, nb: (isize, isize), g: Face, comp: usize| -> T {
        let (a, b) = (field.cell(i, j), field.cell(nb.0, nb.1));
        let mut acc = T::zero();
        for (mu, &wm) in w.iter().enumerate() {
            let u = s.eval_table(a, s.face(f), mu);
            let v = s.eval_table(b, s.face(g), mu);
            acc += wm * T::half() * (u[comp] + v[comp]);
        }
        acc
    };
    (mean(Face::East, (i + 1, j), Face::West, BX) - mean(Face::West, (i - 1, j), Face::East, BX)) / s.dx()
        + (mean(Face::North, (i, j + 1), Face::South, BY) - mean(Face::South, (i, j - 1), Face::North, BY)) / s.dy()
}

/// Viscosity and divergence measures of the first-order scheme.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FirstOrderBounds<T> {
    /// `max_ij alpha_l(U_{i+1}, U_{i-1})` along each axis.
    pub alpha_pp: [T; 2],
    /// Largest spectral radius along each axis.
    pub spectral: [T; 2],
    /// `max_ij |div_ij| / sqrt(rho_ij)`.
    pub vartheta: T,
    pub max_div: T,
}

/// Bounds over the interior of an averages grid whose ghosts are filled.
pub fn first_order_bounds<T: Real, E: Eos<T>>(avgs: &CellAverages<T>, mesh: &Mesh<T>, eos: &E) -> Result<FirstOrderBounds<T>> {
    let (nx, ny) = (avgs.nx() as isize, avgs.ny() as isize);
    let mut out = FirstOrderBounds {
        alpha_pp: [T::zero(); 2],
        spectral: [T::zero(); 2],
        vartheta: T::zero(),
        max_div: T::zero(),
    };
    for j in -1..=ny {
        for i in -1..=nx {
            let ghost_i = i < 0 || i >= nx;
            let ghost_j = j < 0 || j >= ny;
            if ghost_i && ghost_j {
                continue;
            }
            let u = avgs.get(i, j);
            if !is_admissible_raw(u) {
                return Err(MhdError::PositivityFailure(format!("inadmissible average in cell ({i},{j}): {u:?}")));
            }
        }
    }
    for j in 0..ny {
        for i in 0..nx {
            let u = avgs.get(i, j);
            let ax = alpha_from_inputs(
                &alpha_inputs(avgs.get(i + 1, j), Axis::X, eos),
                &alpha_inputs(avgs.get(i - 1, j), Axis::X, eos),
            );
            let ay = alpha_from_inputs(
                &alpha_inputs(avgs.get(i, j + 1), Axis::Y, eos),
                &alpha_inputs(avgs.get(i, j - 1), Axis::Y, eos),
            );
            out.alpha_pp[0] = out.alpha_pp[0].max(ax);
            out.alpha_pp[1] = out.alpha_pp[1].max(ay);
            let d = div_fo(avgs, mesh.dx(), mesh.dy(), i, j);
            out.max_div = out.max_div.max(d.abs());
            out.vartheta = out.vartheta.max(d.abs() / u[RHO].sqrt());
        }
    }
    for j in -1..=ny {
        for i in -1..=nx {
            if (i < 0 || i >= nx) && (j < 0 || j >= ny) {
                continue;
            }
            let u = avgs.get(i, j);
            out.spectral[0] = out.spectral[0].max(spectral_radius_raw(u, Axis::X, eos));
            out.spectral[1] = out.spectral[1].max(spectral_radius_raw(u, Axis::Y, eos));
        }
    }
    Ok(out)
}

/// LF parameters from bounds under a policy.
pub fn choose_alpha<T: Real>(policy: ViscosityPolicy, margin: T, pp: [T; 2], spectral: [T; 2]) -> [T; 2] {
    std::array::from_fn(|l| {
        margin
            * match policy {
                ViscosityPolicy::PositivityBound => pp[l],
                ViscosityPolicy::PositivityOrSpectral => pp[l].max(spectral[l]),
                ViscosityPolicy::Spectral => spectral[l],
            }
    })
}

/// Time derivative of the cell averages under the first-order scheme (ghosts must be filled).
pub fn first_order_rhs<T: Real, E: Eos<T>>(
    avgs: &CellAverages<T>,
    mesh: &Mesh<T>,
    params: &SchemeParams<T>,
    eos: &E,
) -> CellAverages<T> {
    let (nx, ny) = (avgs.nx() as isize, avgs.ny() as isize);
    let (dx, dy) = (mesh.dx(), mesh.dy());
    let mut out = CellAverages::new(avgs.nx(), avgs.ny());
    let fx = |a: &[T; NCOMP], b: &[T; NCOMP], axis: Axis, al: T| {
        lf_raw(a, b, &flux_raw(a, axis, eos), &flux_raw(b, axis, eos), al)
    };
    for j in 0..ny {
        for i in 0..nx {
            let u = avgs.get(i, j);
            let e = fx(u, avgs.get(i + 1, j), Axis::X, params.alpha[0]);
            let w = fx(avgs.get(i - 1, j), u, Axis::X, params.alpha[0]);
            let n = fx(u, avgs.get(i, j + 1), Axis::Y, params.alpha[1]);
            let s = fx(avgs.get(i, j - 1), u, Axis::Y, params.alpha[1]);
            let src = godunov_source_raw(u);
            let div = if params.include_source { div_fo(avgs, dx, dy, i, j) } else { T::zero() };
            let r = out.get_mut(i, j);
            for k in 0..NCOMP {
                r[k] = -(e[k] - w[k]) / dx - (n[k] - s[k]) / dy - div * src[k];
            }
        }
    }
    out
}

/// Largest stable step of the first-order scheme: `1 / (a1/dx + a2/dy + vartheta)`.
pub fn first_order_dt_limit<T: Real>(alpha: [T; 2], vartheta: T, mesh: &Mesh<T>) -> T {
    T::one() / (alpha[0] / mesh.dx() + alpha[1] / mesh.dy() + vartheta)
}

/// One forward-Euler step of the first-order scheme.
///
/// `avgs` must have its ghosts filled. The step is rejected if `dt` exceeds the
/// CFL limit computed from `params` (with the divergence term when the source is
/// on); an inadmissible output is reported as a positivity failure.
pub fn first_order_step<T: Real, E: Eos<T>>(
    avgs: &CellAverages<T>,
    mesh: &Mesh<T>,
    params: &SchemeParams<T>,
    dt: T,
    eos: &E,
) -> Result<CellAverages<T>> {
    let bounds = first_order_bounds(avgs, mesh, eos)?;
    let vt = if params.include_source { bounds.vartheta } else { T::zero() };
    let limit = first_order_dt_limit(params.alpha, vt, mesh);
    if !(dt > T::zero()) || dt > limit * (T::one() + T::lit(1e-12)) {
        return Err(MhdError::CflViolation {
            dt: dt.as_f64(),
            limit: limit.as_f64(),
        });
    }
    let rhs = first_order_rhs(avgs, mesh, params, eos);
    let mut out = avgs.clone();
    for j in 0..avgs.ny() as isize {
        for i in 0..avgs.nx() as isize {
            let r = *rhs.get(i, j);
            let u = out.get_mut(i, j);
            for k in 0..NCOMP {
                u[k] += dt * r[k];
            }
            if !is_admissible_raw(u) {
                return Err(MhdError::PositivityFailure(format!(
                    "first-order update left cell ({i},{j}) inadmissible: {u:?}"
                )));
            }
        }
    }
    mesh.fill_ghosts(&mut out);
    Ok(out)
}

/// Positivity-related measures of a DG field, from its face traces.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DgBounds<T> {
    /// Positivity bound on the LF parameter along each axis.
    pub alpha_pp: [T; 2],
    /// Largest spectral radius over all traces.
    pub spectral: [T; 2],
    /// Normal-field jump measures over `sqrt(rho)` along each axis.
    pub vartheta: [T; 2],
    /// Largest `|B_n jump| / 2` over all faces.
    pub max_jump: T,
    /// Largest face-average discrete divergence over interior cells.
    pub max_div: T,
}

/// Reusable DG residual evaluator with scaled basis tables and face buffers.
#[derive(Debug)]
pub struct DgOperator<T, E> {
    space: Arc<DgSpace<T>>,
    eos: E,
    nx: usize,
    ny: usize,
    q: usize,
    vol_gx: Vec<T>,
    vol_gy: Vec<T>,
    vol_vgx: Vec<[T; 2]>,
    vol_vgy: Vec<[T; 2]>,
    face_w: [Vec<T>; 4],
    face_vw: [Vec<[T; 2]>; 4],
    traces: Vec<[T; NCOMP]>,
    xg: Vec<[[T; NCOMP]; 2]>,
    yg: Vec<[[T; NCOMP]; 2]>,
}

impl<T: Real, E: Eos<T>> DgOperator<T, E> {
    pub fn new(space: Arc<DgSpace<T>>, nx: usize, ny: usize, eos: E) -> Self {
        let (ns, nv) = (space.n_scalar(), space.n_vector());
        let (dx, dy) = (space.dx(), space.dy());
        let vol = space.volume();
        let np = vol.len();
        let mut vol_gx = vec![T::zero(); np * ns];
        let mut vol_gy = vec![T::zero(); np * ns];
        let mut vol_vgx = vec![[T::zero(); 2]; np * nv];
        let mut vol_vgy = vec![[T::zero(); 2]; np * nv];
        for p in 0..np {
            let w = vol.w[p];
            for a in 0..ns {
                vol_gx[p * ns + a] = w * vol.phi_dxi[p * ns + a] / dx;
                vol_gy[p * ns + a] = w * vol.phi_deta[p * ns + a] / dy;
            }
            for k in 0..nv {
                let (gx, gy) = (vol.psi_dxi[p * nv + k], vol.psi_deta[p * nv + k]);
                vol_vgx[p * nv + k] = [w * gx[0] / dx, w * gx[1] / dx];
                vol_vgy[p * nv + k] = [w * gy[0] / dy, w * gy[1] / dy];
            }
        }
        let q = space.gauss().len();
        let face_scale = |f: Face| match f {
            // Outflow through east/north faces enters with a minus sign.
            Face::West => T::one() / dx,
            Face::East => -T::one() / dx,
            Face::South => T::one() / dy,
            Face::North => -T::one() / dy,
        };
        let face_w = Face::ALL.map(|f| {
            let t = space.face(f);
            let s = face_scale(f);
            (0..q * ns).map(|k| s * t.w[k / ns] * t.phi[k]).collect()
        });
        let face_vw = Face::ALL.map(|f| {
            let t = space.face(f);
            let s = face_scale(f);
            (0..q * nv)
                .map(|k| {
                    let psi = t.psi[k];
                    [s * t.w[k / nv] * psi[0], s * t.w[k / nv] * psi[1]]
                })
                .collect()
        });
        let nb = (nx + 2) * (ny + 2);
        Self {
            space,
            eos,
            nx,
            ny,
            q,
            vol_gx,
            vol_gy,
            vol_vgx,
            vol_vgy,
            face_w,
            face_vw,
            traces: vec![[T::zero(); NCOMP]; nb * 4 * q],
            xg: vec![[[T::zero(); NCOMP]; 2]; (nx + 1) * ny * q],
            yg: vec![[[T::zero(); NCOMP]; 2]; nx * (ny + 1) * q],
        }
    }

    pub fn space(&self) -> &Arc<DgSpace<T>> {
        &self.space
    }

    pub fn eos(&self) -> &E {
        &self.eos
    }

    #[inline(always)]
    fn tidx(&self, i: isize, j: isize, f: Face, mu: usize) -> usize {
        let b = ((j + 1) as usize) * (self.nx + 2) + (i + 1) as usize;
        (b * 4 + f as usize) * self.q + mu
    }

    /// Trace of cell `(i, j)` at node `mu` of face `f` (after [`Self::compute_traces`]).
    pub fn trace(&self, i: isize, j: isize, f: Face, mu: usize) -> &[T; NCOMP] {
        &self.traces[self.tidx(i, j, f, mu)]
    }

    /// Evaluates all face traces of interior and (non-corner) ghost cells.
    pub fn compute_traces(&mut self, field: &DgField<T>) {
        assert_eq!((field.nx(), field.ny()), (self.nx, self.ny));
        let space = &*self.space;
        let (nx, ny, q) = (self.nx, self.ny, self.q);
        let row = (nx + 2) * 4 * q;
        self.traces.par_chunks_mut(row).enumerate().for_each(|(jr, chunk)| {
            let j = jr as isize - 1;
            let ghost_row = j < 0 || j >= ny as isize;
            for ir in 0..nx + 2 {
                let i = ir as isize - 1;
                if ghost_row && (i < 0 || i >= nx as isize) {
                    continue;
                }
                let coef = field.cell(i, j);
                for f in Face::ALL {
                    let table = space.face(f);
                    for mu in 0..q {
                        chunk[(ir * 4 + f as usize) * q + mu] = space.eval_table(coef, table, mu);
                    }
                }
            }
        });
    }

    fn inadmissible(i: isize, j: isize, f: Face, mu: usize, u: &[T; NCOMP]) -> MhdError {
        MhdError::PositivityFailure(format!(
            "inadmissible trace in cell ({i},{j}) face {f:?} node {mu}: rho={}, internal energy={}",
            u[RHO],
            internal_energy_raw(u)
        ))
    }

    /// Viscosity bounds and jump measures from the current traces.
    pub fn bounds(&self) -> Result<DgBounds<T>> {
        let (nx, ny, q) = (self.nx as isize, self.ny as isize, self.q);
        let eos = &self.eos;
        // Every trace that enters the bounds must be admissible.
        for j in -1..=ny {
            for i in -1..=nx {
                let gi = i < 0 || i >= nx;
                let gj = j < 0 || j >= ny;
                if gi && gj {
                    continue;
                }
                let faces: &[Face] = if !gi && !gj {
                    &Face::ALL
                } else if i < 0 {
                    &[Face::East]
                } else if i >= nx {
                    &[Face::West]
                } else if j < 0 {
                    &[Face::North]
                } else {
                    &[Face::South]
                };
                for &f in faces {
                    for mu in 0..q {
                        let u = self.trace(i, j, f, mu);
                        if !is_admissible_raw(u) {
                            return Err(Self::inadmissible(i, j, f, mu, u));
                        }
                    }
                }
            }
        }
        let weights = &self.space.gauss().weights;
        let (dx, dy) = (self.space.dx(), self.space.dy());
        let ai: Vec<AlphaInputs<T>> = self
            .traces
            .par_iter()
            .enumerate()
            .map(|(k, u)| {
                let axis = if (k / q) % 4 < 2 { Axis::X } else { Axis::Y };
                alpha_inputs(u, axis, eos)
            })
            .collect();
        let inputs = |i: isize, j: isize, f: Face, mu: usize| &ai[self.tidx(i, j, f, mu)];
        let rows: Vec<DgBounds<T>> = (0..ny)
            .into_par_iter()
            .map(|j| {
                let mut b = DgBounds {
                    alpha_pp: [T::zero(); 2],
                    spectral: [T::zero(); 2],
                    vartheta: [T::zero(); 2],
                    max_jump: T::zero(),
                    max_div: T::zero(),
                };
                for i in 0..nx {
                    let mut div = T::zero();
                    for mu in 0..q {
                        // Same-side traces of the two x-faces of cell (i, j).
                        let e0 = self.trace(i, j, Face::East, mu);
                        let e1 = self.trace(i - 1, j, Face::East, mu);
                        let w0 = self.trace(i + 1, j, Face::West, mu);
                        let w1 = self.trace(i, j, Face::West, mu);
                        let a = alpha_from_inputs(inputs(i, j, Face::East, mu), inputs(i - 1, j, Face::East, mu)).max(
                            alpha_from_inputs(inputs(i + 1, j, Face::West, mu), inputs(i, j, Face::West, mu)),
                        );
                        b.alpha_pp[0] = b.alpha_pp[0].max(a);
                        let n0 = self.trace(i, j, Face::North, mu);
                        let n1 = self.trace(i, j - 1, Face::North, mu);
                        let s0 = self.trace(i, j + 1, Face::South, mu);
                        let s1 = self.trace(i, j, Face::South, mu);
                        let a = alpha_from_inputs(inputs(i, j, Face::North, mu), inputs(i, j - 1, Face::North, mu)).max(
                            alpha_from_inputs(inputs(i, j + 1, Face::South, mu), inputs(i, j, Face::South, mu)),
                        );
                        b.alpha_pp[1] = b.alpha_pp[1].max(a);
                        // Jumps on the four faces, over the interior-side density.
                        let jumps = [
                            (T::half() * (w0[BX] - e0[BX]), e0),
                            (T::half() * (w1[BX] - e1[BX]), w1),
                            (T::half() * (s0[BY] - n0[BY]), n0),
                            (T::half() * (s1[BY] - n1[BY]), s1),
                        ];
                        for (k, (jump, inner)) in jumps.iter().enumerate() {
                            let l = k / 2;
                            b.vartheta[l] = b.vartheta[l].max(jump.abs() / inner[RHO].sqrt());
                            b.max_jump = b.max_jump.max(jump.abs());
                        }
                        for f in Face::ALL {
                            let u = self.trace(i, j, f, mu);
                            b.spectral[0] = b.spectral[0].max(spectral_radius_raw(u, Axis::X, eos));
                            b.spectral[1] = b.spectral[1].max(spectral_radius_raw(u, Axis::Y, eos));
                        }
                        let h = T::half();
                        div += weights[mu]
                            * ((h * (e0[BX] + w0[BX]) - h * (w1[BX] + e1[BX])) / dx
                                + (h * (n0[BY] + s0[BY]) - h * (s1[BY] + n1[BY])) / dy);
                    }
                    b.max_div = b.max_div.max(div.abs());
                }
                b
            })
            .collect();
        let mut out = DgBounds {
            alpha_pp: [T::zero(); 2],
            spectral: [T::zero(); 2],
            vartheta: [T::zero(); 2],
            max_jump: T::zero(),
            max_div: T::zero(),
        };
        for b in rows {
            for l in 0..2 {
                out.alpha_pp[l] = out.alpha_pp[l].max(b.alpha_pp[l]);
                out.spectral[l] = out.spectral[l].max(b.spectral[l]);
                out.vartheta[l] = out.vartheta[l].max(b.vartheta[l]);
            }
            out.max_jump = out.max_jump.max(b.max_jump);
            out.max_div = out.max_div.max(b.max_div);
        }
        Ok(out)
    }

    /// Numerical fluxes with source traces on every face node.
    fn face_fluxes(&mut self, params: &SchemeParams<T>) -> Result<()> {
        let (nx, ny, q) = (self.nx, self.ny, self.q);
        let eos = self.eos;
        let traces = &self.traces;
        let tidx = |i: isize, j: isize, f: Face, mu: usize| {
            let b = ((j + 1) as usize) * (nx + 2) + (i + 1) as usize;
            (b * 4 + f as usize) * q + mu
        };
        let pair = |um: &[T; NCOMP], up: &[T; NCOMP], axis: Axis, alpha: T| {
            let fm = flux_raw(um, axis, &eos);
            let fp = flux_raw(up, axis, &eos);
            let fh = lf_raw(um, up, &fm, &fp, alpha);
            if params.include_source {
                let n = axis.index() + BX;
                let jump = T::half() * (up[n] - um[n]);
                let sm = godunov_source_raw(um);
                let sp = godunov_source_raw(up);
                [
                    std::array::from_fn(|k| fh[k] + jump * sm[k]),
                    std::array::from_fn(|k| fh[k] - jump * sp[k]),
                ]
            } else {
                [fh, fh]
            }
        };
        let check = |i: isize, j: isize, f: Face, mu: usize, u: &[T; NCOMP]| -> Result<()> {
            if u[RHO] > T::zero() && u.iter().all(|x| x.is_finite()) {
                Ok(())
            } else {
                Err(Self::inadmissible(i, j, f, mu, u))
            }
        };
        let ax = params.alpha[0];
        self.xg.par_chunks_mut((nx + 1) * q).enumerate().try_for_each(|(j, chunk)| {
            let j = j as isize;
            for i in 0..=nx as isize {
                for mu in 0..q {
                    let um = &traces[tidx(i - 1, j, Face::East, mu)];
                    let up = &traces[tidx(i, j, Face::West, mu)];
                    check(i - 1, j, Face::East, mu, um)?;
                    check(i, j, Face::West, mu, up)?;
                    chunk[i as usize * q + mu] = pair(um, up, Axis::X, ax);
                }
            }
            Ok::<(), MhdError>(())
        })?;
        let ay = params.alpha[1];
        self.yg.par_chunks_mut(nx * q).enumerate().try_for_each(|(j, chunk)| {
            let j = j as isize;
            for i in 0..nx as isize {
                for mu in 0..q {
                    let um = &traces[tidx(i, j - 1, Face::North, mu)];
                    let up = &traces[tidx(i, j, Face::South, mu)];
                    check(i, j - 1, Face::North, mu, um)?;
                    check(i, j, Face::South, mu, up)?;
                    chunk[i as usize * q + mu] = pair(um, up, Axis::Y, ay);
                }
            }
            Ok::<(), MhdError>(())
        })?;
        debug_assert_eq!(self.yg.len(), nx * (ny + 1) * q);
        Ok(())
    }

    /// Coefficient time derivatives of `field` (ghosts filled, traces computed
    /// by [`Self::compute_traces`]) written into the interior of `out`.
    pub fn residual_from_traces(&mut self, field: &DgField<T>, params: &SchemeParams<T>, out: &mut DgField<T>) -> Result<()> {
        self.face_fluxes(params)?;
        let space = &*self.space;
        let (nx, q) = (self.nx, self.q);
        let (ns, nv) = (space.n_scalar(), space.n_vector());
        let nc = space.n_coef();
        let vo = space.vector_offset();
        let vol = space.volume();
        let np = vol.len();
        let eos = self.eos;
        let (gx, gy, vgx, vgy) = (&self.vol_gx, &self.vol_gy, &self.vol_vgx, &self.vol_vgy);
        let (fw, fvw) = (&self.face_w, &self.face_vw);
        let (xg, yg) = (&self.xg, &self.yg);
        let row = (nx + 2) * nc;
        let ny = self.ny;
        out.data_mut()
            .par_chunks_mut(row)
            .enumerate()
            .filter(|(jr, _)| *jr >= 1 && *jr <= ny)
            .for_each(|(jr, chunk)| {
                let j = jr - 1;
                for i in 0..nx {
                    let coef = field.cell(i as isize, j as isize);
                    let r = &mut chunk[(i + 1) * nc..(i + 2) * nc];
                    r.iter_mut().for_each(|x| *x = T::zero());
                    for p in 0..np {
                        let u = space.eval_table(coef, vol, p);
                        let (f1, f2) = flux_xy_raw(&u, &eos);
                        let (gxp, gyp) = (&gx[p * ns..(p + 1) * ns], &gy[p * ns..(p + 1) * ns]);
                        for (rr, &slot) in r[..vo].chunks_exact_mut(ns).zip(SCALAR_SLOTS.iter()) {
                            let (a1, a2) = (f1[slot], f2[slot]);
                            for ((x, &g1), &g2) in rr.iter_mut().zip(gxp).zip(gyp) {
                                *x += a1 * g1 + a2 * g2;
                            }
                        }
                        let (vx, vy) = (&vgx[p * nv..(p + 1) * nv], &vgy[p * nv..(p + 1) * nv]);
                        for ((x, gx), gy) in r[vo..].iter_mut().zip(vx).zip(vy) {
                            *x += f1[BX] * gx[0] + f1[BY] * gx[1] + f2[BX] * gy[0] + f2[BY] * gy[1];
                        }
                    }
                    for mu in 0..q {
                        let contributions = [
                            (Face::West, &xg[(j * (nx + 1) + i) * q + mu][1]),
                            (Face::East, &xg[(j * (nx + 1) + i + 1) * q + mu][0]),
                            (Face::South, &yg[(j * nx + i) * q + mu][1]),
                            (Face::North, &yg[((j + 1) * nx + i) * q + mu][0]),
                        ];
                        for (f, g) in contributions {
                            let w = &fw[f as usize][mu * ns..(mu + 1) * ns];
                            for (rr, &slot) in r[..vo].chunks_exact_mut(ns).zip(SCALAR_SLOTS.iter()) {
                                let gs = g[slot];
                                for (x, &wa) in rr.iter_mut().zip(w) {
                                    *x += gs * wa;
                                }
                            }
                            let vw = &fvw[f as usize][mu * nv..(mu + 1) * nv];
                            for (x, v) in r[vo..].iter_mut().zip(vw) {
                                *x += g[BX] * v[0] + g[BY] * v[1];
                            }
                        }
                    }
                    space.apply_gram_inv(&mut r[vo..vo + nv]);
                }
            });
        Ok(())
    }

    /// Full residual: traces, face fluxes and cell integrals.
    pub fn residual(&mut self, field: &DgField<T>, params: &SchemeParams<T>, out: &mut DgField<T>) -> Result<()> {
        self.compute_traces(field);
        self.residual_from_traces(field, params, out)
    }

    /// Interior face flux pair `(G-, G+)` on x-face `i` (between cells `i-1` and `i`) of row `j`.
    pub fn x_face_flux(&self, i: usize, j: usize, mu: usize) -> &[[T; NCOMP]; 2] {
        &self.xg[(j * (self.nx + 1) + i) * self.q + mu]
    }

    pub fn y_face_flux(&self, i: usize, j: usize, mu: usize) -> &[[T; NCOMP]; 2] {
        &self.yg[(j * self.nx + i) * self.q + mu]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::physics::EosIdeal;

    #[test]
    fn lf_flux_examples() {
        let e = EosIdeal::<f64>::new(5.0 / 3.0).unwrap();
        let u = ConservedState::from_array([1.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 2.5]);
        let t = InterfaceTrace { minus: u, plus: u, axis: Axis::X };
        let f = lf_flux(&t, 3.0, &e).unwrap();
        let g = crate::physics::flux(&u, Axis::X, &e).unwrap();
        assert_eq!(f, g);
        let a = ConservedState::from_array([1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.5]);
        let b = ConservedState::from_array([1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.5 + 0.3]);
        let f = lf_flux(&InterfaceTrace { minus: a, plus: b, axis: Axis::X }, 1.0, &e).unwrap();
        let pa = 1.0;
        let pb = (2.0 / 3.0) * 1.8;
        assert!((f[1] - 0.5 * (pa + pb)).abs() < 1e-15);
        assert!((f[7] + 0.15).abs() < 1e-15);
        assert!(lf_flux(&InterfaceTrace { minus: a, plus: b, axis: Axis::X }, 0.0, &e).is_err());
    }

    #[test]
    fn b_jump_examples() {
        let mut a = ConservedState::from_array([1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
        let mut b = a;
        b.b[0] = 1.0;
        let t = InterfaceTrace { minus: a, plus: b, axis: Axis::X };
        assert_eq!(interface_b_jump(&t), 0.5);
        std::mem::swap(&mut a, &mut b);
        assert_eq!(interface_b_jump(&InterfaceTrace { minus: a, plus: b, axis: Axis::X }), -0.5);
        assert_eq!(interface_b_jump(&InterfaceTrace { minus: a, plus: a, axis: Axis::Y }), 0.0);
    }

    #[test]
    fn divergence_fo_examples() {
        let mesh = Mesh::<f64>::new(
            5,
            5,
            (0.0, 5.0),
            (0.0, 5.0),
            std::array::from_fn(|_| crate::mesh::BoundaryKind::Outflow),
        )
        .unwrap();
        let a = CellAverages::from_fn(&mesh, |i, j| {
            let (x, y) = mesh.center(i as isize, j as isize);
            [1.0, 0.0, 0.0, 0.0, x, -y, 0.0, 10.0]
        });
        assert!(discrete_divergence_fo(&a, &mesh, 2, 2).unwrap().abs() < 1e-14);
        let a = CellAverages::from_fn(&mesh, |i, _| [1.0, 0.0, 0.0, 0.0, i as f64, 0.3, 0.0, 10.0]);
        assert!((discrete_divergence_fo(&a, &mesh, 2, 2).unwrap() - 1.0).abs() < 1e-14);
        assert!(discrete_divergence_fo(&a, &mesh, -1, 2).is_err());
    }
}
