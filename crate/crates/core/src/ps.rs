//! Power-splitting ratio for fixed beamformers.
//!
//! The largest `rho` allowed by the relay power budget is taken first; if it
//! starves the energy harvester, the harvest constraint is met with equality
//! instead. The covariance trace `E_bar` inside the harvest constraint is
//! supplied by the caller (the value at the previous iterate).

use crate::channel::{ChannelRealization, SystemParams};
use crate::error::{Constraint, Error, Result};
use crate::metrics::{effective_gains, harvest_at, relay_power_from_gains, source_power_at_relay};
use crate::CVector;

/// `rho` is confined to `[RHO_EPS, 1 - RHO_EPS]`.
pub const RHO_EPS: f64 = 1e-6;

/// Slack on constraint checks.
pub const FEAS_TOL: f64 = 1e-9;

/// Which constraint fixed the returned ratio.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RhoBinding {
    /// The relay power budget holds with equality.
    PowerConstraint,
    /// The harvested energy equals `q_bar`.
    HarvestConstraint,
    /// The power-limited ratio fell outside the admissible interval and was
    /// clamped to it.
    InteriorClamp,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RhoSolution {
    pub rho: f64,
    pub binding: RhoBinding,
    pub feasible: bool,
    /// Unclamped power-limited ratio; `+inf` when `w_t = 0`.
    pub candidate: f64,
}

pub fn clamp_rho(rho: f64) -> f64 {
    rho.clamp(RHO_EPS, 1.0 - RHO_EPS)
}

/// Largest ratio meeting the relay power budget with equality:
/// `(P_R - ||w_t||^2) / ((P_A C_rA + P_B C_rB + 1) ||w_t||^2)`.
pub fn rho_candidate(w_t: &CVector, c_ra: f64, c_rb: f64, params: &SystemParams) -> Result<f64> {
    let n = w_t.norm_squared();
    if !(n > 0.0) {
        return Err(Error::InvalidParams(
            "rho candidate needs a nonzero transmit beamformer".into(),
        ));
    }
    if n > params.p_r {
        return Err(Error::infeasible(
            Constraint::RelayPower,
            format!("||w_t||^2 = {n} exceeds P_R = {} for every rho >= 0", params.p_r),
        ));
    }
    Ok((params.p_r - n) / ((params.p_a * c_ra + params.p_b * c_rb + 1.0) * n))
}

/// Optimal splitting ratio for fixed `(w_t, w_r)` with `E_bar` frozen at
/// `e_bar_prev`.
pub fn optimal_rho(
    w_t: &CVector,
    w_r: &CVector,
    ch: &ChannelRealization,
    params: &SystemParams,
    e_bar_prev: f64,
) -> Result<RhoSolution> {
    if !(e_bar_prev >= 0.0) {
        return Err(Error::InvalidParams(format!(
            "E_bar must be >= 0, got {e_bar_prev}"
        )));
    }
    let (c_ra, c_rb) = effective_gains(w_r, ch);
    let n = w_t.norm_squared();
    let candidate = if n > 0.0 {
        rho_candidate(w_t, c_ra, c_rb, params)?
    } else {
        f64::INFINITY
    };
    let rho_c = clamp_rho(candidate);
    let source = source_power_at_relay(ch, params);

    if harvest_at(rho_c, source, e_bar_prev) >= params.q_bar {
        let binding = if rho_c == candidate {
            RhoBinding::PowerConstraint
        } else {
            RhoBinding::InteriorClamp
        };
        let feasible = relay_power_from_gains(rho_c, c_ra, c_rb, n, params) <= params.p_r + FEAS_TOL;
        return Ok(RhoSolution {
            rho: rho_c,
            binding,
            feasible,
            candidate,
        });
    }

    let total = source + e_bar_prev + 1.0;
    if params.q_bar > total {
        return Err(Error::infeasible(
            Constraint::Harvest,
            format!("q_bar = {} exceeds the splittable power {total}", params.q_bar),
        ));
    }
    let rho_h = 1.0 - params.q_bar / total;
    let rho = clamp_rho(rho_h);
    let power_ok = relay_power_from_gains(rho, c_ra, c_rb, n, params) <= params.p_r + FEAS_TOL;
    let harvest_ok = harvest_at(rho, source, e_bar_prev) >= params.q_bar - FEAS_TOL;
    Ok(RhoSolution {
        rho,
        binding: RhoBinding::HarvestConstraint,
        feasible: rho_h >= RHO_EPS && power_ok && harvest_ok,
        candidate,
    })
}
