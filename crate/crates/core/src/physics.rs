//! Pointwise ideal-MHD physics.
//!
//! State layout used throughout the crate is `(rho, m1, m2, m3, B1, B2, B3, E)`.
//! The functions here are pure and operate either on [`ConservedState`] (checked
//! entry points) or on raw `[T; 8]` arrays (unchecked kernels used inside the
//! solver loops).

use std::ops::{Add, Mul, Sub};

use crate::error::{MhdError, Result};
use crate::real::Real;

/// Number of conserved components.
pub const NCOMP: usize = 8;

pub const RHO: usize = 0;
pub const MX: usize = 1;
pub const MY: usize = 2;
pub const MZ: usize = 3;
pub const BX: usize = 4;
pub const BY: usize = 5;
pub const BZ: usize = 6;
pub const EN: usize = 7;

/// Coordinate direction of a flux or face normal.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    #[inline(always)]
    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }

    /// Axis from the 1-based direction index (1, 2 or 3).
    pub fn from_direction(dir: usize) -> Result<Self> {
        match dir {
            1 => Ok(Axis::X),
            2 => Ok(Axis::Y),
            3 => Ok(Axis::Z),
            _ => Err(MhdError::InvalidArgument(format!("axis index {dir}"))),
        }
    }
}

/// Equation-of-state seam. Only the ideal gamma-law is implemented.
pub trait Eos<T: Real>: Copy + Send + Sync + std::fmt::Debug {
    /// Gas pressure from density and internal energy density `rho * e`.
    fn pressure(&self, rho: T, rho_e: T) -> T;
    /// Internal energy density `rho * e` from density and pressure.
    fn internal_energy_density(&self, rho: T, p: T) -> T;
    /// Squared sound speed.
    fn sound_speed_sq(&self, rho: T, p: T) -> T;
}

/// Ideal gamma-law gas, `p = (gamma - 1) rho e`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EosIdeal<T> {
    gamma: T,
}

impl<T: Real> EosIdeal<T> {
    pub fn new(gamma: T) -> Result<Self> {
        if !(gamma > T::one()) || !gamma.is_finite() {
            return Err(MhdError::InvalidArgument(format!(
                "adiabatic index must exceed 1, got {gamma}"
            )));
        }
        Ok(Self { gamma })
    }

    pub fn gamma(&self) -> T {
        self.gamma
    }
}

impl<T: Real> Eos<T> for EosIdeal<T> {
    #[inline(always)]
    fn pressure(&self, _rho: T, rho_e: T) -> T {
        (self.gamma - T::one()) * rho_e
    }

    #[inline(always)]
    fn internal_energy_density(&self, _rho: T, p: T) -> T {
        p / (self.gamma - T::one())
    }

    #[inline(always)]
    fn sound_speed_sq(&self, rho: T, p: T) -> T {
        self.gamma * p / rho
    }
}

/// Conserved variables `U = (rho, m, B, E)`.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct ConservedState<T> {
    pub rho: T,
    pub m: [T; 3],
    pub b: [T; 3],
    pub energy: T,
}

impl<T: Real> ConservedState<T> {
    /// Checked constructor; rejects NaN and infinite entries.
    pub fn new(rho: T, m: [T; 3], b: [T; 3], energy: T) -> Result<Self> {
        let s = Self { rho, m, b, energy };
        if s.to_array().iter().all(|x| x.is_finite()) {
            Ok(s)
        } else {
            Err(MhdError::NonFinite)
        }
    }

    #[inline(always)]
    pub fn from_array(u: [T; NCOMP]) -> Self {
        Self {
            rho: u[RHO],
            m: [u[MX], u[MY], u[MZ]],
            b: [u[BX], u[BY], u[BZ]],
            energy: u[EN],
        }
    }

    #[inline(always)]
    pub fn to_array(&self) -> [T; NCOMP] {
        [
            self.rho, self.m[0], self.m[1], self.m[2], self.b[0], self.b[1], self.b[2],
            self.energy,
        ]
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|x| x.is_finite())
    }

    /// Builds the conserved state from primitive variables.
    pub fn from_primitive<E: Eos<T>>(w: &PrimitiveState<T>, eos: &E) -> Self {
        let half = T::half();
        let rho_e = eos.internal_energy_density(w.rho, w.p);
        let energy = rho_e + half * (w.rho * dot(&w.v, &w.v) + dot(&w.b, &w.b));
        Self {
            rho: w.rho,
            m: [w.rho * w.v[0], w.rho * w.v[1], w.rho * w.v[2]],
            b: w.b,
            energy,
        }
    }
}

impl<T: Real> Add for ConservedState<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        let (a, b) = (self.to_array(), o.to_array());
        Self::from_array(std::array::from_fn(|k| a[k] + b[k]))
    }
}

impl<T: Real> Sub for ConservedState<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        let (a, b) = (self.to_array(), o.to_array());
        Self::from_array(std::array::from_fn(|k| a[k] - b[k]))
    }
}

impl<T: Real> Mul<T> for ConservedState<T> {
    type Output = Self;
    fn mul(self, s: T) -> Self {
        let a = self.to_array();
        Self::from_array(std::array::from_fn(|k| a[k] * s))
    }
}

/// Primitive variables `(rho, v, B, p)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PrimitiveState<T> {
    pub rho: T,
    pub v: [T; 3],
    pub b: [T; 3],
    pub p: T,
}

impl<T: Real> PrimitiveState<T> {
    /// Requires `rho > 0`; the pressure is unconstrained.
    pub fn new(rho: T, v: [T; 3], b: [T; 3], p: T) -> Result<Self> {
        if !(rho > T::zero()) {
            return Err(MhdError::NonpositiveDensity(rho.as_f64()));
        }
        Ok(Self { rho, v, b, p })
    }

    /// Total pressure `p + |B|^2 / 2`.
    pub fn total_pressure(&self) -> T {
        self.p + T::half() * dot(&self.b, &self.b)
    }
}

/// Auxiliary vectors `(v*, B*)` defining `n* = (|v*|^2/2, -v*, -B*, 1)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StarDirection<T> {
    pub v_star: [T; 3],
    pub b_star: [T; 3],
}

impl<T: Real> StarDirection<T> {
    pub fn new(v_star: [T; 3], b_star: [T; 3]) -> Result<Self> {
        if v_star.iter().chain(b_star.iter()).all(|x| x.is_finite()) {
            Ok(Self { v_star, b_star })
        } else {
            Err(MhdError::NonFinite)
        }
    }

    pub fn zero() -> Self {
        Self {
            v_star: [T::zero(); 3],
            b_star: [T::zero(); 3],
        }
    }

    /// The vector `n*` in conserved-variable space.
    pub fn n_star(&self) -> [T; NCOMP] {
        let v = &self.v_star;
        let b = &self.b_star;
        [
            T::half() * dot(v, v),
            -v[0],
            -v[1],
            -v[2],
            -b[0],
            -b[1],
            -b[2],
            T::one(),
        ]
    }
}

#[inline(always)]
pub(crate) fn dot<T: Real>(a: &[T; 3], b: &[T; 3]) -> T {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline(always)]
pub(crate) fn dot8<T: Real>(a: &[T; NCOMP], b: &[T; NCOMP]) -> T {
    let mut s = T::zero();
    for k in 0..NCOMP {
        s += a[k] * b[k];
    }
    s
}

fn check_density<T: Real>(u: &ConservedState<T>) -> Result<()> {
    if u.rho.is_nan() {
        return Err(MhdError::NonFinite);
    }
    if !(u.rho > T::zero()) {
        return Err(MhdError::NonpositiveDensity(u.rho.as_f64()));
    }
    Ok(())
}

/// Internal energy `E - (|m|^2/rho + |B|^2)/2` of a raw state (no checks).
#[inline(always)]
pub fn internal_energy_raw<T: Real>(u: &[T; NCOMP]) -> T {
    let m2 = u[MX] * u[MX] + u[MY] * u[MY] + u[MZ] * u[MZ];
    let b2 = u[BX] * u[BX] + u[BY] * u[BY] + u[BZ] * u[BZ];
    u[EN] - T::half() * (m2 / u[RHO] + b2)
}

/// Internal energy density of an admissible-density state.
pub fn internal_energy<T: Real>(u: &ConservedState<T>) -> Result<T> {
    check_density(u)?;
    Ok(internal_energy_raw(&u.to_array()))
}

/// Strict admissibility: `rho > 0` and internal energy `> 0`. NaN gives `false`.
pub fn is_admissible<T: Real>(u: &ConservedState<T>) -> bool {
    is_admissible_raw(&u.to_array())
}

#[inline(always)]
pub fn is_admissible_raw<T: Real>(u: &[T; NCOMP]) -> bool {
    u[RHO] > T::zero() && internal_energy_raw(u) > T::zero()
}

/// Admissibility against explicit floors: `rho >= eps` and internal energy `>= eps`.
pub fn is_numerically_admissible<T: Real>(u: &ConservedState<T>, eps: T) -> bool {
    let a = u.to_array();
    a[RHO] >= eps && internal_energy_raw(&a) >= eps
}

pub fn to_primitive<T: Real, E: Eos<T>>(u: &ConservedState<T>, eos: &E) -> Result<PrimitiveState<T>> {
    if !u.is_finite() {
        return Err(MhdError::NonFinite);
    }
    check_density(u)?;
    let rho = u.rho;
    let v = [u.m[0] / rho, u.m[1] / rho, u.m[2] / rho];
    let p = eos.pressure(rho, internal_energy_raw(&u.to_array()));
    Ok(PrimitiveState { rho, v, b: u.b, p })
}

pub fn to_conserved<T: Real, E: Eos<T>>(w: &PrimitiveState<T>, eos: &E) -> ConservedState<T> {
    ConservedState::from_primitive(w, eos)
}

/// Pressure of a raw state (no checks).
#[inline(always)]
pub fn pressure_raw<T: Real, E: Eos<T>>(u: &[T; NCOMP], eos: &E) -> T {
    eos.pressure(u[RHO], internal_energy_raw(u))
}

/// `U . n* + |B*|^2 / 2`.
pub fn nstar_functional<T: Real>(u: &ConservedState<T>, s: &StarDirection<T>) -> T {
    dot8(&u.to_array(), &s.n_star()) + T::half() * dot(&s.b_star, &s.b_star)
}

/// Physical flux along `axis` of a raw state (no checks).
#[inline(always)]
pub fn flux_raw<T: Real, E: Eos<T>>(u: &[T; NCOMP], axis: Axis, eos: &E) -> [T; NCOMP] {
    let i = axis.index();
    let rho = u[RHO];
    let inv_rho = T::one() / rho;
    let v = [u[MX] * inv_rho, u[MY] * inv_rho, u[MZ] * inv_rho];
    let b = [u[BX], u[BY], u[BZ]];
    let b2 = dot(&b, &b);
    let m2 = u[MX] * v[0] + u[MY] * v[1] + u[MZ] * v[2];
    let p = eos.pressure(rho, u[EN] - T::half() * (m2 + b2));
    let ptot = p + T::half() * b2;
    let vb = dot(&v, &b);
    let vi = v[i];
    let bi = b[i];
    let mut f = [
        u[i + 1],
        u[i + 1] * v[0] - bi * b[0],
        u[i + 1] * v[1] - bi * b[1],
        u[i + 1] * v[2] - bi * b[2],
        vi * b[0] - bi * v[0],
        vi * b[1] - bi * v[1],
        vi * b[2] - bi * v[2],
        vi * (u[EN] + ptot) - bi * vb,
    ];
    f[1 + i] += ptot;
    f
}

/// Both in-plane fluxes `(F1, F2)` of a raw state, sharing the primitive recovery.
#[inline(always)]
pub fn flux_xy_raw<T: Real, E: Eos<T>>(u: &[T; NCOMP], eos: &E) -> ([T; NCOMP], [T; NCOMP]) {
    let rho = u[RHO];
    let inv_rho = T::one() / rho;
    let v = [u[MX] * inv_rho, u[MY] * inv_rho, u[MZ] * inv_rho];
    let b = [u[BX], u[BY], u[BZ]];
    let b2 = dot(&b, &b);
    let m2 = u[MX] * v[0] + u[MY] * v[1] + u[MZ] * v[2];
    let p = eos.pressure(rho, u[EN] - T::half() * (m2 + b2));
    let ptot = p + T::half() * b2;
    let vb = dot(&v, &b);
    let ep = u[EN] + ptot;
    let f1 = [
        u[MX],
        u[MX] * v[0] - b[0] * b[0] + ptot,
        u[MX] * v[1] - b[0] * b[1],
        u[MX] * v[2] - b[0] * b[2],
        T::zero(),
        v[0] * b[1] - b[0] * v[1],
        v[0] * b[2] - b[0] * v[2],
        v[0] * ep - b[0] * vb,
    ];
    let f2 = [
        u[MY],
        u[MY] * v[0] - b[1] * b[0],
        u[MY] * v[1] - b[1] * b[1] + ptot,
        u[MY] * v[2] - b[1] * b[2],
        v[1] * b[0] - b[1] * v[0],
        T::zero(),
        v[1] * b[2] - b[1] * v[2],
        v[1] * ep - b[1] * vb,
    ];
    (f1, f2)
}

pub fn flux<T: Real, E: Eos<T>>(u: &ConservedState<T>, axis: Axis, eos: &E) -> Result<[T; NCOMP]> {
    check_density(u)?;
    Ok(flux_raw(&u.to_array(), axis, eos))
}

/// Godunov-Powell source vector `(0, B, v, v . B)` of a raw state (no checks).
#[inline(always)]
pub fn godunov_source_raw<T: Real>(u: &[T; NCOMP]) -> [T; NCOMP] {
    let inv_rho = T::one() / u[RHO];
    let v = [u[MX] * inv_rho, u[MY] * inv_rho, u[MZ] * inv_rho];
    let vb = v[0] * u[BX] + v[1] * u[BY] + v[2] * u[BZ];
    [T::zero(), u[BX], u[BY], u[BZ], v[0], v[1], v[2], vb]
}

pub fn godunov_source<T: Real>(u: &ConservedState<T>) -> Result<[T; NCOMP]> {
    check_density(u)?;
    Ok(godunov_source_raw(&u.to_array()))
}

/// Fast magnetosonic speed along `axis` for a given squared "sound" speed `cs2`.
#[inline(always)]
fn fast_speed<T: Real>(cs2: T, rho: T, b: &[T; 3], bi: T) -> T {
    let a = cs2 + dot(b, b) / rho;
    let disc = (a * a - T::lit(4.0) * cs2 * bi * bi / rho).max(T::zero());
    (T::half() * (a + disc.sqrt())).sqrt()
}

/// Spectral radius `|v_i| + C_i` of the flux Jacobian along `axis`.
pub fn spectral_radius<T: Real, E: Eos<T>>(u: &ConservedState<T>, axis: Axis, eos: &E) -> Result<T> {
    if !is_admissible(u) {
        return Err(MhdError::Inadmissible(format!("{u:?}")));
    }
    Ok(spectral_radius_raw(&u.to_array(), axis, eos))
}

#[inline(always)]
pub fn spectral_radius_raw<T: Real, E: Eos<T>>(u: &[T; NCOMP], axis: Axis, eos: &E) -> T {
    let i = axis.index();
    let rho = u[RHO];
    let p = pressure_raw(u, eos);
    let b = [u[BX], u[BY], u[BZ]];
    (u[1 + i] / rho).abs() + fast_speed(eos.sound_speed_sq(rho, p), rho, &b, b[i])
}

/// Quantities of one state entering the viscosity bound.
#[derive(Clone, Copy, Debug)]
pub(crate) struct AlphaInputs<T> {
    rho: T,
    sqrt_rho: T,
    vi: T,
    c: T,
    b: [T; 3],
}

impl<T: Real> AlphaInputs<T> {
    /// The fast speed built from the reduced sound speed.
    pub(crate) fn speed(&self) -> T {
        self.c
    }
}

#[inline(always)]
pub(crate) fn alpha_inputs<T: Real, E: Eos<T>>(u: &[T; NCOMP], axis: Axis, eos: &E) -> AlphaInputs<T> {
    let i = axis.index();
    let rho = u[RHO];
    let rho_e = internal_energy_raw(u);
    let p = eos.pressure(rho, rho_e);
    // C_s = p / (rho sqrt(2e)), squared.
    let cs2 = p * p / (T::two() * rho * rho_e);
    let b = [u[BX], u[BY], u[BZ]];
    AlphaInputs {
        rho,
        sqrt_rho: rho.sqrt(),
        vi: u[1 + i] / rho,
        c: fast_speed(cs2, rho, &b, b[i]),
        b,
    }
}

#[inline(always)]
pub(crate) fn alpha_from_inputs<T: Real>(a: &AlphaInputs<T>, t: &AlphaInputs<T>) -> T {
    let db = [a.b[0] - t.b[0], a.b[1] - t.b[1], a.b[2] - t.b[2]];
    let jump = dot(&db, &db).sqrt();
    let cmax = a.c.max(t.c);
    let base = (a.vi.abs() + a.c).max(t.vi.abs() + t.c);
    let mix1 = (a.rho * a.vi + t.rho * t.vi).abs() / (a.rho + t.rho) + cmax;
    let f1 = jump / (T::two() * (a.rho + t.rho)).sqrt();
    let mix2 = (a.sqrt_rho * a.vi + t.sqrt_rho * t.vi).abs() / (a.sqrt_rho + t.sqrt_rho) + cmax;
    let f2 = jump / (a.sqrt_rho + t.sqrt_rho);
    (base.max(mix1) + f1).min(base.max(mix2) + f2)
}

/// Explicit upper substitute for the positivity bound on the LF viscosity:
/// the minimum over `sigma = rho/(rho+rho~)` and `sigma = sqrt(rho)/(sqrt(rho)+sqrt(rho~))`.
pub fn pp_viscosity_alpha<T: Real, E: Eos<T>>(
    u: &ConservedState<T>,
    ut: &ConservedState<T>,
    axis: Axis,
    eos: &E,
) -> Result<T> {
    for s in [u, ut] {
        if !is_admissible(s) {
            return Err(MhdError::Inadmissible(format!("{s:?}")));
        }
    }
    Ok(pp_viscosity_alpha_raw(&u.to_array(), &ut.to_array(), axis, eos))
}

#[inline(always)]
pub fn pp_viscosity_alpha_raw<T: Real, E: Eos<T>>(
    u: &[T; NCOMP],
    ut: &[T; NCOMP],
    axis: Axis,
    eos: &E,
) -> T {
    alpha_from_inputs(&alpha_inputs(u, axis, eos), &alpha_inputs(ut, axis, eos))
}

/// `alpha_i(U, U~; sigma)` for an arbitrary real `sigma`.
pub fn pp_viscosity_alpha_sigma<T: Real, E: Eos<T>>(
    u: &ConservedState<T>,
    ut: &ConservedState<T>,
    axis: Axis,
    sigma: T,
    eos: &E,
) -> Result<T> {
    for s in [u, ut] {
        if !is_admissible(s) {
            return Err(MhdError::Inadmissible(format!("{s:?}")));
        }
    }
    let a = alpha_inputs(&u.to_array(), axis, eos);
    let t = alpha_inputs(&ut.to_array(), axis, eos);
    let db = [a.b[0] - t.b[0], a.b[1] - t.b[1], a.b[2] - t.b[2]];
    let one = T::one();
    let f = (dot(&db, &db) / T::two()).sqrt()
        * (sigma * sigma / a.rho + (one - sigma) * (one - sigma) / t.rho).sqrt();
    let base = (a.vi.abs() + a.c).max(t.vi.abs() + t.c);
    let mix = (sigma * a.vi + (one - sigma) * t.vi).abs() + a.c.max(t.c);
    Ok(base.max(mix) + f)
}

/// The two parts of the left-hand side of the two-state LF splitting inequality:
/// the part linear in the states (plus `|B*|^2`) and the magnetic-jump term
/// `(B_i - B~_i)/alpha * (v* . B*)`.
pub fn lemma25_terms<T: Real, E: Eos<T>>(
    u: &ConservedState<T>,
    ut: &ConservedState<T>,
    s: &StarDirection<T>,
    alpha: T,
    axis: Axis,
    eos: &E,
) -> Result<(T, T)> {
    if alpha == T::zero() {
        return Err(MhdError::InvalidArgument("alpha must be nonzero".into()));
    }
    let fu = flux(u, axis, eos)?;
    let fut = flux(ut, axis, eos)?;
    let (a, b) = (u.to_array(), ut.to_array());
    let combo: [T; NCOMP] = std::array::from_fn(|k| a[k] - fu[k] / alpha + b[k] + fut[k] / alpha);
    let linear = dot8(&combo, &s.n_star()) + dot(&s.b_star, &s.b_star);
    let i = axis.index();
    let jump = (u.b[i] - ut.b[i]) / alpha * dot(&s.v_star, &s.b_star);
    Ok((linear, jump))
}

/// Left-hand side of the two-state LF splitting inequality; positive whenever
/// `|alpha|` exceeds the positivity bound.
pub fn lemma25_lhs<T: Real, E: Eos<T>>(
    u: &ConservedState<T>,
    ut: &ConservedState<T>,
    s: &StarDirection<T>,
    alpha: T,
    axis: Axis,
    eos: &E,
) -> Result<T> {
    let (linear, jump) = lemma25_terms(u, ut, s, alpha, axis, eos)?;
    Ok(linear + jump)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn eos53() -> EosIdeal<f64> {
        EosIdeal::new(5.0 / 3.0).unwrap()
    }

    fn st(a: [f64; 8]) -> ConservedState<f64> {
        ConservedState::from_array(a)
    }

    fn prim(rho: f64, v: [f64; 3], b: [f64; 3], p: f64) -> ConservedState<f64> {
        ConservedState::from_primitive(&PrimitiveState::new(rho, v, b, p).unwrap(), &eos53())
    }

    #[test]
    fn primitive_conversion_examples() {
        let w = to_primitive(&st([1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.5]), &eos53()).unwrap();
        assert_relative_eq!(w.p, 1.0, epsilon = 1e-15);
        assert_eq!(w.v, [0.0; 3]);
        let w = to_primitive(&st([1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]), &eos53()).unwrap();
        assert_eq!(w.p, 0.0);
        let w = to_primitive(&st([2.0, 2.0, 0.0, 0.0, 1.0, 0.0, 0.0, 3.0]), &eos53()).unwrap();
        assert_eq!(w.v, [1.0, 0.0, 0.0]);
        assert_relative_eq!(w.p, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn primitive_conversion_errors() {
        let e = to_primitive(&st([0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0]), &eos53());
        assert!(matches!(e, Err(MhdError::NonpositiveDensity(_))));
        assert!(e.unwrap_err().to_string().contains("nonpositive density"));
        let e = to_primitive(&st([1.0, f64::NAN, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0]), &eos53());
        assert!(e.is_err());
        assert!(ConservedState::new(1.0, [f64::INFINITY, 0.0, 0.0], [0.0; 3], 1.0).is_err());
        assert!(EosIdeal::new(1.0).is_err());
    }

    #[test]
    fn internal_energy_examples() {
        assert_eq!(internal_energy(&st([1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0])).unwrap(), 1.0);
        assert_eq!(internal_energy(&st([2.0, 2.0, 0.0, 0.0, 1.0, 0.0, 0.0, 3.0])).unwrap(), 1.5);
        assert_eq!(internal_energy(&st([1.0, 1.0, 1.0, 1.0, 0.0, 0.0, 0.0, 1.5])).unwrap(), 0.0);
        assert!(internal_energy(&st([-1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0])).is_err());
    }

    #[test]
    fn admissibility_examples() {
        assert!(is_admissible(&st([1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0])));
        assert!(!is_admissible(&st([-1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0])));
        assert!(!is_admissible(&st([1.0, 1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 1.0])));
        assert!(!is_admissible(&st([f64::NAN, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0])));
        assert!(is_numerically_admissible(&st([1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1e-13]), 1e-13));
        assert!(!is_numerically_admissible(&st([1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 5e-14]), 1e-13));
    }

    #[test]
    fn nstar_examples() {
        let u = st([2.0, 2.0, -1.0, 0.5, 1.0, 0.3, -0.2, 6.0]);
        let s = StarDirection::new([1.0, -0.5, 0.25], [1.0, 0.3, -0.2]).unwrap();
        assert_relative_eq!(nstar_functional(&u, &s), internal_energy(&u).unwrap(), epsilon = 1e-14);
        let u = st([1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
        assert_eq!(nstar_functional(&u, &StarDirection::zero()), 1.0);
        let u = st([1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 2.0]);
        let s = StarDirection::new([0.0; 3], [1.0, 0.0, 0.0]).unwrap();
        assert_eq!(nstar_functional(&u, &s), 1.5);
    }

    #[test]
    fn flux_examples() {
        let e = eos53();
        let u = prim(1.0, [0.0; 3], [0.0; 3], 1.0);
        assert_eq!(flux(&u, Axis::X, &e).unwrap(), [0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let u = prim(1.0, [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], 1.0);
        assert_relative_eq!(u.energy, 2.5, epsilon = 1e-15);
        let f1 = flux(&u, Axis::X, &e).unwrap();
        let want = [1.0, 2.5, 0.0, 0.0, 0.0, 1.0, 0.0, 4.0];
        for k in 0..8 {
            assert_relative_eq!(f1[k], want[k], epsilon = 1e-14);
        }
        let f2 = flux(&u, Axis::Y, &e).unwrap();
        let want = [0.0, 0.0, 0.5, 0.0, -1.0, 0.0, 0.0, 0.0];
        for k in 0..8 {
            assert_relative_eq!(f2[k], want[k], epsilon = 1e-14);
        }
        assert!(flux(&st([0.0; 8]), Axis::X, &e).is_err());
    }

    #[test]
    fn source_examples() {
        let u = prim(1.0, [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], 1.0);
        assert_eq!(godunov_source(&u).unwrap(), [0.0, 0.0, 1.0, 0.0, 1.0, 0.0, 0.0, 0.0]);
        let u = prim(1.0, [0.0; 3], [0.0; 3], 1.0);
        assert_eq!(godunov_source(&u).unwrap(), [0.0; 8]);
        let u = prim(1.0, [1.0; 3], [1.0; 3], 1.0);
        assert_eq!(godunov_source(&u).unwrap(), [0.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 3.0]);
    }

    #[test]
    fn spectral_radius_examples() {
        let e = eos53();
        let r = spectral_radius(&prim(1.0, [0.0; 3], [0.0; 3], 1.0), Axis::X, &e).unwrap();
        assert_relative_eq!(r, (5.0f64 / 3.0).sqrt(), epsilon = 1e-14);
        let r = spectral_radius(&prim(1.0, [0.0; 3], [1.0, 0.0, 0.0], 1.0), Axis::X, &e).unwrap();
        assert_relative_eq!(r, (5.0f64 / 3.0).sqrt(), epsilon = 1e-14);
        let r = spectral_radius(&prim(1.0, [0.0; 3], [0.0, 1.0, 0.0], 1.0), Axis::X, &e).unwrap();
        assert_relative_eq!(r, (8.0f64 / 3.0).sqrt(), epsilon = 1e-14);
        assert!(spectral_radius(&st([1.0, 1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 1.0]), Axis::X, &e).is_err());
    }

    #[test]
    fn viscosity_alpha_examples() {
        let e = eos53();
        let u = prim(1.0, [0.0; 3], [0.0; 3], 1.0);
        let a = pp_viscosity_alpha(&u, &u, Axis::X, &e).unwrap();
        assert_relative_eq!(a, 1.0 / 3.0f64.sqrt(), epsilon = 1e-14);
        let u = prim(0.7, [0.3, -1.2, 0.1], [0.4, 2.0, -0.3], 0.2);
        let a = pp_viscosity_alpha(&u, &u, Axis::Y, &e).unwrap();
        let inputs = alpha_inputs(&u.to_array(), Axis::Y, &e);
        assert_relative_eq!(a, 1.2f64.abs() + inputs.c, epsilon = 1e-14);
        let bad = st([1.0, 1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 1.0]);
        assert!(pp_viscosity_alpha(&u, &bad, Axis::X, &e).is_err());
    }

    #[test]
    fn closed_form_sigmas_match_general_formula() {
        let e = eos53();
        let u = prim(0.5, [1.0, -0.3, 0.2], [0.7, -1.1, 0.4], 0.8);
        let ut = prim(2.5, [-0.4, 0.6, 0.0], [-0.2, 0.9, 1.4], 0.05);
        let s1 = 0.5 / 3.0;
        let s2 = 0.5f64.sqrt() / (0.5f64.sqrt() + 2.5f64.sqrt());
        let a1 = pp_viscosity_alpha_sigma(&u, &ut, Axis::X, s1, &e).unwrap();
        let a2 = pp_viscosity_alpha_sigma(&u, &ut, Axis::X, s2, &e).unwrap();
        let a = pp_viscosity_alpha(&u, &ut, Axis::X, &e).unwrap();
        assert_relative_eq!(a, a1.min(a2), epsilon = 1e-13);
    }

    #[test]
    fn lemma25_static_example() {
        let e = eos53();
        let u = prim(1.0, [0.0; 3], [0.0; 3], 1.0);
        let v = lemma25_lhs(&u, &u, &StarDirection::zero(), 10.0, Axis::X, &e).unwrap();
        assert_relative_eq!(v, 3.0, epsilon = 1e-14);
        assert!(lemma25_lhs(&u, &u, &StarDirection::zero(), 0.0, Axis::X, &e).is_err());
    }
}
