//! CFL conditions and the SSP-RK3 driver with limiting between stages.

use std::sync::Arc;

use crate::basis::DgSpace;
use crate::error::{MhdError, Result};
use crate::field::{CellAverages, DgField};
use crate::limiters::{pp_limit_field, pp_point_minima, tvb_limit, DEFAULT_FLOOR};
use crate::mesh::Mesh;
use crate::physics::{is_admissible_raw, Eos};
use crate::real::Real;
use crate::scheme::{choose_alpha, first_order_bounds, DgOperator, SchemeParams, ViscosityPolicy};

/// Step size and the quantities that determined it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CflReport<T> {
    pub dt: T,
    /// Step allowed by the theorem (fraction 1).
    pub dt_limit: T,
    pub alpha: [T; 2],
    /// `1 / (1 + max(vartheta_l / alpha_l))`; always 1 for the first-order scheme.
    pub theta: T,
    /// DG: jump measures per axis. First order: `[vartheta, vartheta]`.
    pub vartheta: [T; 2],
    /// Largest discrete divergence magnitude.
    pub max_div: T,
}

/// `dt = fraction / (a1/dx + a2/dy + vartheta)` for the first-order scheme.
pub fn cfl_first_order<T: Real, E: Eos<T>>(
    avgs: &CellAverages<T>,
    mesh: &Mesh<T>,
    policy: ViscosityPolicy,
    margin: T,
    eos: &E,
    cfl_fraction: T,
) -> Result<CflReport<T>> {
    let b = first_order_bounds(avgs, mesh, eos)?;
    let alpha = choose_alpha(policy, margin, b.alpha_pp, b.spectral);
    let limit = T::one() / (alpha[0] / mesh.dx() + alpha[1] / mesh.dy() + b.vartheta);
    Ok(CflReport {
        dt: cfl_fraction * limit,
        dt_limit: limit,
        alpha,
        theta: T::one(),
        vartheta: [b.vartheta; 2],
        max_div: b.max_div,
    })
}

/// `theta = 1 / (1 + max(vartheta1/alpha1, vartheta2/alpha2))`.
pub fn theta_factor<T: Real>(alpha: [T; 2], vartheta: [T; 2]) -> T {
    T::one() / (T::one() + (vartheta[0] / alpha[0]).max(vartheta[1] / alpha[1]))
}

/// `dt = fraction * theta * w / (a1/dx + a2/dy)` with `w` the endpoint Lobatto weight.
pub fn dg_dt<T: Real>(alpha: [T; 2], theta: T, endpoint_weight: T, dx: T, dy: T, cfl_fraction: T) -> T {
    cfl_fraction * theta * endpoint_weight / (alpha[0] / dx + alpha[1] / dy)
}

/// CFL report of a DG field whose ghosts are filled. Traces are left in `op`.
pub fn cfl_dg<T: Real, E: Eos<T>>(
    op: &mut DgOperator<T, E>,
    field: &DgField<T>,
    policy: ViscosityPolicy,
    margin: T,
    cfl_fraction: T,
) -> Result<CflReport<T>> {
    op.compute_traces(field);
    let b = op.bounds()?;
    let alpha = choose_alpha(policy, margin, b.alpha_pp, b.spectral);
    let theta = theta_factor(alpha, b.vartheta);
    let s = op.space();
    let limit = dg_dt(alpha, theta, s.lobatto_endpoint_weight(), s.dx(), s.dy(), T::one());
    Ok(CflReport {
        dt: cfl_fraction * limit,
        dt_limit: limit,
        alpha,
        theta,
        vartheta: b.vartheta,
        max_div: b.max_div,
    })
}

/// Generic SSP-RK3 step: `euler(u, dt)` is a forward-Euler step, `combine(a, x, b, y)`
/// returns `a x + b y`, and `limit` post-processes every stage.
pub fn ssp_rk3<S, T: Real>(
    u0: &S,
    dt: T,
    mut euler: impl FnMut(&S, T) -> Result<S>,
    mut combine: impl FnMut(T, &S, T, &S) -> S,
    mut limit: impl FnMut(&mut S) -> Result<()>,
) -> Result<S> {
    let mut u1 = euler(u0, dt)?;
    limit(&mut u1)?;
    let e1 = euler(&u1, dt)?;
    let mut u2 = combine(T::lit(0.75), u0, T::lit(0.25), &e1);
    limit(&mut u2)?;
    let e2 = euler(&u2, dt)?;
    let mut u3 = combine(T::one() / T::lit(3.0), u0, T::two() / T::lit(3.0), &e2);
    limit(&mut u3)?;
    Ok(u3)
}

/// Runtime switches of the DG driver.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverOptions<T> {
    /// Fraction of the theorem's step size.
    pub cfl: T,
    pub policy: ViscosityPolicy,
    /// Factor above the chosen bound (must be >= 1).
    pub margin: T,
    pub include_source: bool,
    pub pp_limiter: bool,
    /// TVB constant; `None` disables the TVB limiter.
    pub tvb_m: Option<T>,
    pub eps_rho: T,
    pub eps_e: T,
    /// Step restarts allowed when a stage violates the step-size condition.
    pub max_restarts: usize,
}

impl<T: Real> Default for SolverOptions<T> {
    fn default() -> Self {
        Self {
            cfl: T::lit(0.15),
            policy: ViscosityPolicy::PositivityOrSpectral,
            margin: T::lit(1.0001),
            include_source: true,
            pp_limiter: true,
            tvb_m: None,
            eps_rho: T::lit(DEFAULT_FLOOR),
            eps_e: T::lit(DEFAULT_FLOOR),
            max_restarts: 20,
        }
    }
}

/// Diagnostics of one completed time step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepRecord<T> {
    /// Time after the step.
    pub t: T,
    pub dt: T,
    /// Smallest theta over the three stages.
    pub theta: T,
    /// Largest `vartheta_l / alpha_l` over the stages.
    pub vartheta_ratio: [T; 2],
    pub alpha: [T; 2],
    pub max_div: T,
    /// Cells modified by the positivity limiter, summed over stages.
    pub limited_cells: usize,
    /// Cells flagged by the TVB limiter, summed over stages.
    pub troubled_cells: usize,
    pub min_rho: T,
    pub min_p: T,
    pub restarts: usize,
}

/// DG time integrator owning the solution.
#[derive(Debug)]
pub struct Solver<T, E> {
    mesh: Mesh<T>,
    eos: E,
    opts: SolverOptions<T>,
    op: DgOperator<T, E>,
    field: DgField<T>,
    rates: DgField<T>,
    t: T,
    steps: usize,
}

struct StageInfo<T> {
    limited: usize,
    troubled: usize,
    min_rho: T,
    min_p: T,
}

impl<T: Real, E: Eos<T>> Solver<T, E> {
    /// Takes a projected field, fills ghosts and applies the stage limiters.
    pub fn new(mesh: Mesh<T>, eos: E, mut field: DgField<T>, opts: SolverOptions<T>) -> Result<Self> {
        if !(opts.cfl > T::zero() && opts.cfl <= T::one()) {
            return Err(MhdError::InvalidArgument(format!("cfl fraction {} outside (0, 1]", opts.cfl)));
        }
        if !(opts.margin >= T::one()) {
            return Err(MhdError::InvalidArgument("margin must be at least 1".into()));
        }
        if (field.nx(), field.ny()) != (mesh.nx(), mesh.ny()) {
            return Err(MhdError::InvalidArgument("field does not match mesh".into()));
        }
        mesh.fill_ghosts(&mut field);
        let space = field.space().clone();
        let op = DgOperator::new(space, mesh.nx(), mesh.ny(), eos);
        let rates = field.clone();
        let mut s = Self {
            mesh,
            eos,
            opts,
            op,
            field,
            rates,
            t: T::zero(),
            steps: 0,
        };
        if let Some(m) = s.opts.tvb_m {
            tvb_limit(&mut s.field, m);
            s.mesh.fill_ghosts(&mut s.field);
        }
        if s.opts.pp_limiter {
            pp_limit_field(&mut s.field, s.opts.eps_rho, s.opts.eps_e, &s.eos)?;
            s.mesh.fill_ghosts(&mut s.field);
        }
        Ok(s)
    }

    /// Projects `f(x, y)` onto a fresh degree-`k` space and builds the solver.
    pub fn from_initial(
        mesh: Mesh<T>,
        eos: E,
        degree: usize,
        f: impl Fn(T, T) -> [T; 8] + Sync,
        opts: SolverOptions<T>,
    ) -> Result<Self> {
        let space = Arc::new(DgSpace::new(degree, mesh.dx(), mesh.dy())?);
        let field = DgField::project(space, &mesh, f);
        Self::new(mesh, eos, field, opts)
    }

    pub fn field(&self) -> &DgField<T> {
        &self.field
    }
    pub fn mesh(&self) -> &Mesh<T> {
        &self.mesh
    }
    pub fn eos(&self) -> &E {
        &self.eos
    }
    pub fn time(&self) -> T {
        self.t
    }
    pub fn steps(&self) -> usize {
        self.steps
    }
    pub fn options(&self) -> &SolverOptions<T> {
        &self.opts
    }

    /// Step-size report for the current state (or a stage state).
    fn cfl(&mut self, which: Option<&DgField<T>>) -> Result<CflReport<T>> {
        let field = which.unwrap_or(&self.field);
        if field.space().degree() == 0 {
            let avgs = averages_with_ghosts(field);
            let mut r = cfl_first_order(&avgs, &self.mesh, self.opts.policy, self.opts.margin, &self.eos, self.opts.cfl)?;
            if !self.opts.include_source {
                r.dt_limit = T::one() / (r.alpha[0] / self.mesh.dx() + r.alpha[1] / self.mesh.dy());
                r.dt = self.opts.cfl * r.dt_limit;
            }
            // The residual reads traces; for K = 0 they are the averages.
            self.op.compute_traces(field);
            Ok(r)
        } else {
            cfl_dg(&mut self.op, field, self.opts.policy, self.opts.margin, self.opts.cfl)
        }
    }

    /// Forward-Euler update of `input` (traces already computed), unlimited.
    fn euler(&mut self, input: &DgField<T>, alpha: [T; 2], dt: T) -> Result<DgField<T>> {
        let params = SchemeParams {
            alpha,
            include_source: self.opts.include_source,
        };
        self.op.residual_from_traces(input, &params, &mut self.rates)?;
        let mut out = input.clone();
        out.assign_combination(T::one(), input, dt, &self.rates);
        Ok(out)
    }

    fn finish_stage(&mut self, mut out: DgField<T>) -> Result<(DgField<T>, StageInfo<T>)> {
        let mut info = StageInfo {
            limited: 0,
            troubled: 0,
            min_rho: T::zero(),
            min_p: T::zero(),
        };
        if let Some(m) = self.opts.tvb_m {
            info.troubled = tvb_limit(&mut out, m).iter().filter(|&&b| b).count();
            self.mesh.fill_ghosts(&mut out);
        }
        if self.opts.pp_limiter {
            let s = pp_limit_field(&mut out, self.opts.eps_rho, self.opts.eps_e, &self.eos)?;
            info.limited = s.limited;
            info.min_rho = s.min_rho;
            info.min_p = s.min_p;
            self.mesh.fill_ghosts(&mut out);
        } else {
            for j in 0..out.ny() as isize {
                for i in 0..out.nx() as isize {
                    let a = out.average(i, j);
                    if !is_admissible_raw(&a) {
                        return Err(MhdError::PositivityFailure(format!(
                            "inadmissible cell average in cell ({i},{j}) at t~{}: {a:?}",
                            self.t
                        )));
                    }
                }
            }
            let (r, p) = pp_point_minima(&out, &self.eos);
            info.min_rho = r;
            info.min_p = p;
        }
        Ok((out, info))
    }

    /// Advances one SSP-RK3 step, not beyond `t_end`.
    pub fn step(&mut self, t_end: T) -> Result<StepRecord<T>> {
        let first = self.cfl(None)?;
        let mut dt = first.dt.min(t_end - self.t);
        if !(dt > T::zero()) {
            return Err(MhdError::InvalidArgument("no time left to step".into()));
        }
        let u0 = self.field.clone();
        let mut restarts = 0;
        'attempt: loop {
            let mut rec = StepRecord {
                t: self.t + dt,
                dt,
                theta: first.theta,
                vartheta_ratio: [first.vartheta[0] / first.alpha[0], first.vartheta[1] / first.alpha[1]],
                alpha: first.alpha,
                max_div: first.max_div,
                limited_cells: 0,
                troubled_cells: 0,
                min_rho: T::infinity(),
                min_p: T::infinity(),
                restarts,
            };
            if restarts > 0 {
                // Traces in the operator belong to the last stage tried.
                self.op.compute_traces(&u0);
            }
            let weights = [
                (T::zero(), T::one()),
                (T::lit(0.75), T::lit(0.25)),
                (T::one() / T::lit(3.0), T::two() / T::lit(3.0)),
            ];
            let mut current = u0.clone();
            let mut last = None;
            for (s, &(a, b)) in weights.iter().enumerate() {
                let alpha = if s == 0 {
                    first.alpha
                } else {
                    let r = self.cfl(Some(&current))?;
                    if dt > r.dt_limit * (T::one() + T::lit(1e-12)) {
                        restarts += 1;
                        if restarts > self.opts.max_restarts {
                            return Err(MhdError::CflViolation {
                                dt: dt.as_f64(),
                                limit: r.dt_limit.as_f64(),
                            });
                        }
                        dt = self.opts.cfl.min(T::lit(0.9)) * r.dt_limit;
                        continue 'attempt;
                    }
                    rec.theta = rec.theta.min(r.theta);
                    for l in 0..2 {
                        rec.vartheta_ratio[l] = rec.vartheta_ratio[l].max(r.vartheta[l] / r.alpha[l]);
                        rec.alpha[l] = rec.alpha[l].max(r.alpha[l]);
                    }
                    rec.max_div = rec.max_div.max(r.max_div);
                    r.alpha
                };
                let mut next = self.euler(&current, alpha, dt)?;
                if s > 0 {
                    let e = next.clone();
                    next.assign_combination(a, &u0, b, &e);
                }
                self.mesh.fill_ghosts(&mut next);
                let (next, info) = self.finish_stage(next)?;
                rec.limited_cells += info.limited;
                rec.troubled_cells += info.troubled;
                last = Some(info);
                current = next;
            }
            let info = last.expect("three stages ran");
            rec.min_rho = info.min_rho;
            rec.min_p = info.min_p;
            self.field = current;
            self.t = if t_end - (self.t + dt) <= T::epsilon() * t_end.abs() { t_end } else { self.t + dt };
            rec.t = self.t;
            self.steps += 1;
            return Ok(rec);
        }
    }

    /// Steps until `t_end`, calling `observe` after every step.
    pub fn run_until(&mut self, t_end: T, mut observe: impl FnMut(&Self, &StepRecord<T>) -> Result<()>) -> Result<Vec<StepRecord<T>>> {
        let mut out = Vec::new();
        while self.t < t_end {
            let r = self.step(t_end)?;
            observe(self, &r)?;
            out.push(r);
        }
        Ok(out)
    }
}

/// Interior and ghost averages of a field (corners zero).
fn averages_with_ghosts<T: Real>(field: &DgField<T>) -> CellAverages<T> {
    let mut a = CellAverages::new(field.nx(), field.ny());
    for j in -1..=field.ny() as isize {
        for i in -1..=field.nx() as isize {
            *a.get_mut(i, j) = field.average(i, j);
        }
    }
    a
}
