//! Transmit beamforming for fixed `(w_r, rho)` by difference-of-concave
//! (DC) programming.
//!
//! With `a = |h_RA^H w_t|^2` and `b = |h_RB^H w_t|^2` the sum rate is
//! `F(a, b) = f(a, b) - g(a, b)`, both `f` and `g` being sums of logs of
//! affine functions. Each step replaces `g` by its tangent at the current
//! iterate, which over-estimates it, and maximizes the resulting surrogate
//! `f - g_L`; `F` therefore never decreases along the iterates.
//!
//! The zero-forcing constraint `w_r^H H_RR w_t = 0` is removed by writing
//! `w_t = B x` with `B` an orthonormal basis of the orthogonal complement of
//! `H_RR^H w_r`. The surrogate only sees `x` through `a` and `b`, so the
//! search is confined to `span{u, v}` with `u = B^H h_RA`, `v = B^H h_RB`
//! (see [`crate::subproblem`]). The optimizer works on vectors, so the
//! implied `W_t = w_t w_t^H` is rank one by construction.

use num_complex::Complex64;
use std::f64::consts::LN_2;

use crate::channel::{orthonormal_complement, ChannelRealization, SystemParams};
use crate::error::{Constraint, Error, Result};
use crate::metrics::{effective_gains, harvest_at, source_power_at_relay};
use crate::ps::FEAS_TOL;
use crate::subproblem::{solve_subproblem, SubproblemSettings};
use crate::{CMatrix, CVector};

/// Orthonormal basis (columns) of `{x : (H_RR^H w_r)^H x = 0}`. When the
/// loop channel seen through `w_r` vanishes the constraint is vacuous and
/// the identity is returned.
pub fn zf_complement_basis(h_rr: &CMatrix, w_r: &CVector) -> CMatrix {
    orthonormal_complement(&(h_rr.adjoint() * w_r))
}

/// Transmit-beamforming problem for fixed `(w_r, rho)`, expressed in the
/// zero-forcing null space.
#[derive(Debug, Clone)]
pub struct ReducedProblem {
    /// `m_t x d` orthonormal basis of the zero-forcing null space.
    pub basis: CMatrix,
    /// `B^H h_RA`.
    pub u: CVector,
    /// `B^H h_RB`.
    pub v: CVector,
    /// Trace budget `P_R / (rho (P_A C_rA + P_B C_rB + 1) + 1)`.
    pub p_eff: f64,
    pub rho: f64,
    pub p_a: f64,
    pub p_b: f64,
    pub c_ra: f64,
    pub c_rb: f64,
    /// `|h_AA|^2`.
    pub rsi_a: f64,
    /// `|h_BB|^2`.
    pub rsi_b: f64,
}

/// Affine coefficients shared by `f`, `g` and `F`:
/// `f = log2(c1 a + d1) + log2(c2 b + d2)`, `g = log2(e a + d1) + log2(e b + d2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DcCoefficients {
    pub c1: f64,
    pub d1: f64,
    pub c2: f64,
    pub d2: f64,
    pub e: f64,
}

impl ReducedProblem {
    pub fn new(
        ch: &ChannelRealization,
        w_r: &CVector,
        rho: f64,
        params: &SystemParams,
    ) -> Result<Self> {
        ch.validate(params)?;
        if w_r.len() != params.m_r {
            return Err(Error::DimensionMismatch {
                expected: params.m_r,
                got: w_r.len(),
            });
        }
        if !(0.0..=1.0).contains(&rho) {
            return Err(Error::InvalidParams(format!("rho must lie in [0, 1], got {rho}")));
        }
        let (c_ra, c_rb) = effective_gains(w_r, ch);
        let basis = zf_complement_basis(&ch.h_rr, w_r);
        let u = basis.adjoint() * &ch.h_ra;
        let v = basis.adjoint() * &ch.h_rb;
        let p_eff = params.p_r / (rho * (params.p_a * c_ra + params.p_b * c_rb + 1.0) + 1.0);
        Ok(Self {
            basis,
            u,
            v,
            p_eff,
            rho,
            p_a: params.p_a,
            p_b: params.p_b,
            c_ra,
            c_rb,
            rsi_a: ch.h_aa.norm_sqr(),
            rsi_b: ch.h_bb.norm_sqr(),
        })
    }

    pub fn coefficients(&self) -> DcCoefficients {
        let rho2 = self.rho * self.rho;
        DcCoefficients {
            c1: rho2 * self.p_b * self.c_rb + rho2 + 1.0,
            d1: self.p_a * self.rsi_a + 1.0,
            c2: rho2 * self.p_a * self.c_ra + rho2 + 1.0,
            d2: self.p_b * self.rsi_b + 1.0,
            e: rho2 + 1.0,
        }
    }

    /// `(|u^H x|^2, |v^H x|^2)` for a reduced vector `x`.
    pub fn gains(&self, x: &CVector) -> (f64, f64) {
        (self.u.dotc(x).norm_sqr(), self.v.dotc(x).norm_sqr())
    }

    /// Full-dimension transmit beamformer `B x`.
    pub fn lift(&self, x: &CVector) -> CVector {
        &self.basis * x
    }

    /// Balanced starting point `u/||u|| + v/||v||` scaled to the full budget.
    pub fn default_init(&self) -> CVector {
        let unit = |w: &CVector| {
            let n = w.norm();
            if n > 0.0 {
                w / Complex64::new(n, 0.0)
            } else {
                w.clone()
            }
        };
        let (un, vn) = (unit(&self.u), unit(&self.v));
        let mut x = &un + &vn;
        if x.norm() < 1e-8 {
            x = if un.norm() > 0.0 { un } else { vn };
        }
        let n = x.norm();
        if n > 0.0 {
            x *= Complex64::new(self.p_eff.sqrt() / n, 0.0);
        }
        x
    }
}

/// Sum rate `F(a, b)` in its SINR form.
pub fn objective(a: f64, b: f64, rp: &ReducedProblem) -> f64 {
    let rho2 = rp.rho * rp.rho;
    let k = rp.coefficients();
    let sinr_a = rho2 * rp.p_b * rp.c_rb * a / (rho2 * a + a + k.d1);
    let sinr_b = rho2 * rp.p_a * rp.c_ra * b / (rho2 * b + b + k.d2);
    (sinr_a.ln_1p() + sinr_b.ln_1p()) / LN_2
}

/// Concave minuend `f` of the DC split.
pub fn f_term(a: f64, b: f64, rp: &ReducedProblem) -> f64 {
    let k = rp.coefficients();
    (k.c1 * a + k.d1).log2() + (k.c2 * b + k.d2).log2()
}

/// Concave subtrahend `g` of the DC split.
pub fn g_term(a: f64, b: f64, rp: &ReducedProblem) -> f64 {
    let k = rp.coefficients();
    (k.e * a + k.d1).log2() + (k.e * b + k.d2).log2()
}

/// Gradient of `g` at `(a_k, b_k)`, i.e. the slopes of its tangent plane.
pub fn g_gradient(a_k: f64, b_k: f64, rp: &ReducedProblem) -> (f64, f64) {
    let k = rp.coefficients();
    (
        k.e / (LN_2 * (k.e * a_k + k.d1)),
        k.e / (LN_2 * (k.e * b_k + k.d2)),
    )
}

/// First-order expansion of `g` around `(a_k, b_k)`. Since `g` is concave
/// this upper-bounds it everywhere and is exact at the expansion point.
pub fn g_linearized(a: f64, b: f64, a_k: f64, b_k: f64, rp: &ReducedProblem) -> f64 {
    let (ka, kb) = g_gradient(a_k, b_k, rp);
    g_term(a_k, b_k, rp) + ka * (a - a_k) + kb * (b - b_k)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DcSettings {
    pub max_iter: usize,
    /// Stop once `|F_{k+1} - F_k|` falls below this.
    pub tol: f64,
    /// Allowed decrease of `F` between iterates before the run is declared
    /// broken.
    pub monotone_slack: f64,
    pub subproblem: SubproblemSettings,
}

impl Default for DcSettings {
    fn default() -> Self {
        Self {
            max_iter: 100,
            tol: 1e-5,
            monotone_slack: 1e-9,
            subproblem: SubproblemSettings::default(),
        }
    }
}

/// Iterates of one DC run. `iterates[0]` and `objective[0]` belong to the
/// starting point; each subproblem solve appends one entry.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DcTrace {
    pub iterates: Vec<(f64, f64)>,
    pub objective: Vec<f64>,
    pub converged: bool,
    /// Number of subproblem solves.
    pub iterations: usize,
}

impl DcTrace {
    pub fn final_objective(&self) -> f64 {
        self.objective.last().copied().unwrap_or(0.0)
    }
}

#[derive(Debug, Clone)]
pub struct DcOutcome {
    /// Transmit beamformer in antenna coordinates.
    pub w_t: CVector,
    /// Same beamformer in null-space coordinates, usable as a warm start.
    pub x: CVector,
    pub trace: DcTrace,
}

/// Runs the DC iteration for fixed `(w_r, rho)`.
///
/// `init` is a null-space vector (as returned in [`DcOutcome::x`]); it is
/// scaled down if it exceeds the budget. Fails with an infeasible-harvest
/// error when even a relay radiating its whole budget (`E_bar = P_R`)
/// cannot lift the harvested energy to `q_bar` at this `rho`.
pub fn dc_optimize_wt(
    ch: &ChannelRealization,
    w_r: &CVector,
    rho: f64,
    params: &SystemParams,
    init: Option<&CVector>,
    settings: &DcSettings,
) -> Result<DcOutcome> {
    let rp = ReducedProblem::new(ch, w_r, rho, params)?;
    dc_optimize_reduced(&rp, ch, params, init, settings)
}

pub fn dc_optimize_reduced(
    rp: &ReducedProblem,
    ch: &ChannelRealization,
    params: &SystemParams,
    init: Option<&CVector>,
    settings: &DcSettings,
) -> Result<DcOutcome> {
    let best_harvest = harvest_at(rp.rho, source_power_at_relay(ch, params), params.p_r);
    if best_harvest < params.q_bar - FEAS_TOL {
        return Err(Error::infeasible(
            Constraint::Harvest,
            format!(
                "at rho = {} at most {best_harvest} can be harvested, q_bar = {}",
                rp.rho, params.q_bar
            ),
        ));
    }

    let dim = rp.basis.ncols();
    let mut x = match init {
        Some(x0) if x0.len() != dim => {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: x0.len(),
            })
        }
        Some(x0) => {
            let n = x0.norm_squared();
            if n > rp.p_eff {
                x0 * Complex64::new((rp.p_eff / n).sqrt(), 0.0)
            } else {
                x0.clone()
            }
        }
        None => rp.default_init(),
    };

    let (mut a, mut b) = rp.gains(&x);
    let mut trace = DcTrace {
        iterates: vec![(a, b)],
        objective: vec![objective(a, b, rp)],
        converged: false,
        iterations: 0,
    };

    for _ in 0..settings.max_iter {
        let step = match solve_subproblem(rp, a, b, Some(&x), &settings.subproblem) {
            Ok(step) => step,
            Err(Error::ZeroGain) => {
                log::warn!("transmit beamformer has no gain toward either source; returning w_t = 0");
                let x = CVector::zeros(dim);
                trace.iterates.push((0.0, 0.0));
                trace.objective.push(0.0);
                trace.iterations += 1;
                trace.converged = true;
                return Ok(DcOutcome {
                    w_t: rp.lift(&x),
                    x,
                    trace,
                });
            }
            Err(e) => return Err(e),
        };
        let previous = trace.final_objective();
        let value = objective(step.a, step.b, rp);
        if value < previous - settings.monotone_slack {
            return Err(Error::SolverInvariant(format!(
                "DC objective decreased from {previous} to {value} at iteration {}",
                trace.iterations + 1
            )));
        }
        x = step.x;
        (a, b) = (step.a, step.b);
        trace.iterates.push((a, b));
        trace.objective.push(value);
        trace.iterations += 1;
        if (value - previous).abs() < settings.tol {
            trace.converged = true;
            break;
        }
    }

    Ok(DcOutcome {
        w_t: rp.lift(&x),
        x,
        trace,
    })
}
