//! Initial and boundary data of the benchmark problems.
//!
//! Problems are defined in `f64` only; they feed the driver and the tests.

use std::f64::consts::PI;

use crate::error::{MhdError, Result};
use crate::mesh::{BoundaryKind, Mesh};
use crate::physics::{EosIdeal, NCOMP};

/// Problem ids understood by [`make_problem`].
pub const PROBLEM_IDS: [&str; 14] = [
    "constant",
    "smooth_sine",
    "smooth_vortex",
    "shock_cloud",
    "rotated_tube",
    "blast_standard",
    "blast_extreme",
    "jet",
    "jet_i",
    "jet_ii",
    "jet_iii",
    "appendixA",
    "orszag_tang",
    "rotor",
];

/// Vortex strength giving a central pressure of about `5.3e-12`.
pub const VORTEX_MU: f64 = 5.389489439;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ProblemKind {
    Constant,
    SmoothSine,
    SmoothVortex { mu: f64 },
    ShockCloud,
    RotatedTube,
    Blast { p_e: f64, b_a: f64 },
    /// `b_a` is the ambient field along y.
    Jet { b_a: f64 },
    /// Two-dimensional restriction of the divergence probe with perturbation size `epsilon`.
    AppendixA { epsilon: f64 },
    OrszagTang,
    Rotor,
}

/// Optional changes to a problem's defaults.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Overrides {
    pub t_end: Option<f64>,
    pub gamma: Option<f64>,
    /// Vortex strength or probe perturbation size, depending on the problem.
    pub strength: Option<f64>,
}

/// Fully specified benchmark setup.
#[derive(Clone, Debug, PartialEq)]
pub struct ProblemSpec {
    pub id: String,
    pub kind: ProblemKind,
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
    pub default_mesh: (usize, usize),
    pub gamma: f64,
    pub t_end: f64,
    /// Recommended TVB constant; `None` for smooth problems.
    pub tvb_m: Option<f64>,
}

/// Builds the problem `id` with optional overrides.
pub fn make_problem(id: &str, overrides: Overrides) -> Result<ProblemSpec> {
    let four_pi = (4.0 * PI).sqrt();
    let (kind, x, y, mesh, gamma, t_end, tvb) = match id {
        "constant" => (ProblemKind::Constant, (0.0, 1.0), (0.0, 1.0), (16, 16), 5.0 / 3.0, 0.1, None),
        "smooth_sine" => (ProblemKind::SmoothSine, (0.0, 2.0 * PI), (0.0, 2.0 * PI), (30, 30), 1.4, 0.1, None),
        "smooth_vortex" => (
            ProblemKind::SmoothVortex {
                mu: overrides.strength.unwrap_or(VORTEX_MU),
            },
            (-10.0, 10.0),
            (-10.0, 10.0),
            (40, 40),
            5.0 / 3.0,
            0.05,
            None,
        ),
        "shock_cloud" => (ProblemKind::ShockCloud, (0.0, 1.0), (0.0, 1.0), (128, 128), 5.0 / 3.0, 0.06, Some(50.0)),
        "rotated_tube" => (
            ProblemKind::RotatedTube,
            (0.0, 1.0),
            (0.0, 2.0 / 256.0),
            (256, 2),
            5.0 / 3.0,
            0.08 * (PI / 4.0).cos(),
            Some(50.0),
        ),
        "blast_standard" => (
            ProblemKind::Blast {
                p_e: 1e3,
                b_a: 100.0 / four_pi,
            },
            (-0.5, 0.5),
            (-0.5, 0.5),
            (128, 128),
            1.4,
            0.01,
            Some(50.0),
        ),
        "blast_extreme" => (
            ProblemKind::Blast {
                p_e: 1e4,
                b_a: 1000.0 / four_pi,
            },
            (-0.5, 0.5),
            (-0.5, 0.5),
            (128, 128),
            1.4,
            0.001,
            Some(50.0),
        ),
        "jet" | "jet_iii" | "jet_ii" | "jet_i" => {
            let b2: f64 = match id {
                "jet_i" => 200.0,
                "jet_ii" => 2000.0,
                _ => 20000.0,
            };
            (
                ProblemKind::Jet { b_a: b2.sqrt() },
                (0.0, 0.5),
                (0.0, 1.5),
                (100, 300),
                1.4,
                0.002,
                Some(50.0),
            )
        }
        "appendixA" => (
            ProblemKind::AppendixA {
                epsilon: overrides.strength.unwrap_or(0.01),
            },
            (-1.0, 1.0),
            (-1.0, 1.0),
            (101, 101),
            5.0 / 3.0,
            1e-4,
            None,
        ),
        "orszag_tang" => (ProblemKind::OrszagTang, (0.0, 2.0 * PI), (0.0, 2.0 * PI), (128, 128), 5.0 / 3.0, 2.0, Some(50.0)),
        "rotor" => (ProblemKind::Rotor, (0.0, 1.0), (0.0, 1.0), (128, 128), 1.4, 0.295, Some(50.0)),
        _ => {
            return Err(MhdError::UnknownProblem {
                id: id.to_string(),
                valid: PROBLEM_IDS.join(", "),
            })
        }
    };
    let gamma = overrides.gamma.unwrap_or(gamma);
    EosIdeal::new(gamma)?;
    let t_end = overrides.t_end.unwrap_or(t_end);
    if !(t_end > 0.0) {
        return Err(MhdError::InvalidArgument(format!("end time {t_end}")));
    }
    Ok(ProblemSpec {
        id: id.to_string(),
        kind,
        x_range: x,
        y_range: y,
        default_mesh: mesh,
        gamma,
        t_end,
        tvb_m: tvb,
    })
}

/// Conserved state from `(rho, v, p, B)`.
pub fn conserved(gamma: f64, rho: f64, v: [f64; 3], p: f64, b: [f64; 3]) -> [f64; NCOMP] {
    let v2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
    let b2 = b[0] * b[0] + b[1] * b[1] + b[2] * b[2];
    [
        rho,
        rho * v[0],
        rho * v[1],
        rho * v[2],
        b[0],
        b[1],
        b[2],
        p / (gamma - 1.0) + 0.5 * (rho * v2 + b2),
    ]
}

fn rotated_tube_state(gamma: f64, left: bool) -> [f64; NCOMP] {
    let b = 5.0 / (4.0 * PI).sqrt();
    let (v_par, p) = if left { (10.0, 20.0) } else { (-10.0, 1.0) };
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let (v_perp, b_par, b_perp) = (0.0, b, b);
    conserved(
        gamma,
        1.0,
        [(v_par - v_perp) * s, (v_par + v_perp) * s, 0.0],
        p,
        [(b_par - b_perp) * s, (b_par + b_perp) * s, 0.0],
    )
}

fn shock_cloud_state(gamma: f64, left: bool) -> [f64; NCOMP] {
    if left {
        conserved(gamma, 3.86859, [0.0; 3], 167.345, [0.0, 2.1826182, -2.1826182])
    } else {
        conserved(gamma, 1.0, [-11.2536, 0.0, 0.0], 1.0, [0.0, 0.56418958, 0.56418958])
    }
}

fn jet_states(gamma: f64, b_a: f64) -> ([f64; NCOMP], [f64; NCOMP]) {
    let b = [0.0, b_a, 0.0];
    (
        conserved(gamma, gamma, [0.0, 800.0, 0.0], 1.0, b),
        conserved(gamma, 0.1 * gamma, [0.0; 3], 1.0, b),
    )
}

fn vortex(gamma: f64, mu: f64, x: f64, y: f64) -> [f64; NCOMP] {
    let r2 = x * x + y * y;
    let g = (0.5 * (1.0 - r2)).exp();
    let dv = mu / (2.0f64.sqrt() * PI) * g;
    let db = mu / (2.0 * PI) * g;
    let dp = -mu * mu * (1.0 + r2) / (8.0 * PI * PI) * (1.0 - r2).exp();
    conserved(gamma, 1.0, [1.0 - dv * y, 1.0 + dv * x, 0.0], 1.0 + dp, [-db * y, db * x, 0.0])
}

fn wrap(v: f64, lo: f64, hi: f64) -> f64 {
    let l = hi - lo;
    lo + (v - lo).rem_euclid(l)
}

impl ProblemSpec {
    pub fn eos(&self) -> EosIdeal<f64> {
        EosIdeal::new(self.gamma).expect("validated in make_problem")
    }

    /// Boundary kinds in face order west, east, south, north for a mesh with `ny` rows.
    pub fn boundaries(&self, ny: usize) -> [BoundaryKind<f64>; 4] {
        use BoundaryKind::*;
        let g = self.gamma;
        match self.kind {
            ProblemKind::Constant | ProblemKind::SmoothSine | ProblemKind::SmoothVortex { .. } | ProblemKind::OrszagTang => {
                [Periodic, Periodic, Periodic, Periodic]
            }
            ProblemKind::ShockCloud => [
                Outflow,
                Inflow {
                    state: shock_cloud_state(g, false),
                    segment: None,
                },
                Outflow,
                Outflow,
            ],
            ProblemKind::RotatedTube => {
                let sp = ShiftedPeriodic { shift: ny as isize };
                [
                    Inflow {
                        state: rotated_tube_state(g, true),
                        segment: None,
                    },
                    Inflow {
                        state: rotated_tube_state(g, false),
                        segment: None,
                    },
                    sp.clone(),
                    sp,
                ]
            }
            ProblemKind::Jet { b_a } => {
                let (jet, _) = jet_states(g, b_a);
                [
                    Reflect,
                    Outflow,
                    Inflow {
                        state: jet,
                        segment: Some((-0.05, 0.05)),
                    },
                    Outflow,
                ]
            }
            ProblemKind::Blast { .. } | ProblemKind::AppendixA { .. } | ProblemKind::Rotor => {
                [Outflow, Outflow, Outflow, Outflow]
            }
        }
    }

    /// Mesh of `nx x ny` cells on the problem domain. The rotated tube keeps
    /// square cells, so its y-extent follows `nx` and `ny`.
    pub fn build_mesh(&self, nx: usize, ny: usize) -> Result<Mesh<f64>> {
        let y = match self.kind {
            ProblemKind::RotatedTube => {
                let h = (self.x_range.1 - self.x_range.0) / nx as f64;
                (0.0, h * ny as f64)
            }
            _ => self.y_range,
        };
        Mesh::new(nx, ny, self.x_range, y, self.boundaries(ny))
    }

    /// Initial conserved state at `(x, y)`.
    pub fn initial(&self, x: f64, y: f64) -> [f64; NCOMP] {
        let g = self.gamma;
        match self.kind {
            ProblemKind::Constant => conserved(g, 1.0, [0.5, -0.25, 0.1], 1.0, [0.3, 0.2, 0.1]),
            ProblemKind::SmoothSine => self.exact_unchecked(x, y, 0.0),
            ProblemKind::SmoothVortex { mu } => vortex(g, mu, x, y),
            ProblemKind::ShockCloud => {
                if x < 0.6 {
                    shock_cloud_state(g, true)
                } else {
                    let r2 = (x - 0.8).powi(2) + (y - 0.5).powi(2);
                    let rho = if r2 < 0.15 * 0.15 { 10.0 } else { 1.0 };
                    conserved(g, rho, [-11.2536, 0.0, 0.0], 1.0, [0.0, 0.56418958, 0.56418958])
                }
            }
            ProblemKind::RotatedTube => rotated_tube_state(g, x + y < 0.5),
            ProblemKind::Blast { p_e, b_a } => {
                let p = if x * x + y * y < 0.01 { p_e } else { 0.1 };
                conserved(g, 1.0, [0.0; 3], p, [b_a, 0.0, 0.0])
            }
            ProblemKind::Jet { b_a } => jet_states(g, b_a).1,
            ProblemKind::AppendixA { epsilon } => {
                let p = (1.0 - (-(x * x + y * y)).exp()).max(crate::limiters::DEFAULT_FLOOR);
                let b = [1.0 + 0.5 * epsilon * x.atan(), 1.0 + 0.5 * epsilon * y.atan(), 0.0];
                conserved(g, 1.0, [1.0, 1.0, 0.0], p, b)
            }
            ProblemKind::OrszagTang => conserved(
                g,
                g * g,
                [-y.sin(), x.sin(), 0.0],
                g,
                [-y.sin(), (2.0 * x).sin(), 0.0],
            ),
            ProblemKind::Rotor => {
                let (r0, r1, u0) = (0.1, 0.115, 2.0);
                let (dx, dy) = (x - 0.5, y - 0.5);
                let r = (dx * dx + dy * dy).sqrt();
                let (rho, v) = if r < r0 {
                    (10.0, [-u0 * dy / r0, u0 * dx / r0, 0.0])
                } else if r < r1 {
                    let f = (r1 - r) / (r1 - r0);
                    (1.0 + 9.0 * f, [-f * u0 * dy / r, f * u0 * dx / r, 0.0])
                } else {
                    (1.0, [0.0; 3])
                };
                conserved(g, rho, v, 1.0, [5.0 / (4.0 * PI).sqrt(), 0.0, 0.0])
            }
        }
    }

    /// Whether [`ProblemSpec::exact`] is available.
    pub fn has_exact(&self) -> bool {
        matches!(
            self.kind,
            ProblemKind::Constant | ProblemKind::SmoothSine | ProblemKind::SmoothVortex { .. }
        )
    }

    fn exact_unchecked(&self, x: f64, y: f64, t: f64) -> [f64; NCOMP] {
        let g = self.gamma;
        match self.kind {
            ProblemKind::SmoothSine => conserved(g, 1.0 + 0.99 * (x + y - 2.0 * t).sin(), [1.0, 1.0, 0.0], 1.0, [0.1, 0.1, 0.0]),
            ProblemKind::SmoothVortex { mu } => {
                let xs = wrap(x - t, self.x_range.0, self.x_range.1);
                let ys = wrap(y - t, self.y_range.0, self.y_range.1);
                vortex(g, mu, xs, ys)
            }
            _ => self.initial(x, y),
        }
    }

    /// Exact solution at `(x, y, t)` where one is known.
    pub fn exact(&self, x: f64, y: f64, t: f64) -> Result<[f64; NCOMP]> {
        if !self.has_exact() {
            return Err(MhdError::InvalidArgument(format!("problem {} has no exact solution", self.id)));
        }
        Ok(self.exact_unchecked(x, y, t))
    }
}

/// Exact solution of problem `id` with default parameters.
pub fn exact_solution(id: &str, x: f64, y: f64, t: f64) -> Result<[f64; NCOMP]> {
    make_problem(id, Overrides::default())?.exact(x, y, t)
}
