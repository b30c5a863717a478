//! Closed-form link quantities for a candidate operating point
//! `(w_r, w_t, rho)`: effective gains, SINRs, rates, relay output power and
//! harvested energy.
//!
//! The formulas carry the splitter exactly as modelled: `rho^2` multiplies
//! the signal and relay-noise terms of the SINRs, while the relay power and
//! the harvested energy are affine in `rho`.

use crate::channel::{ChannelRealization, SystemParams};
use crate::CVector;

/// Candidate operating point of the relay.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamformingSolution {
    /// Unit-norm receive beamformer (`m_r`).
    pub w_r: CVector,
    /// Transmit beamformer (`m_t`); its norm carries the power.
    pub w_t: CVector,
    /// Power-splitting ratio routed to the information receiver.
    pub rho: f64,
    /// Receive-beamformer parameter.
    pub alpha: f64,
}

/// Every performance figure of one operating point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkReport {
    pub sinr_a: f64,
    pub sinr_b: f64,
    pub rate_a: f64,
    pub rate_b: f64,
    pub sum_rate: f64,
    pub c_ra: f64,
    pub c_rb: f64,
    pub p_relay: f64,
    pub e_bar: f64,
    pub q_harvest: f64,
}

/// `(|w_r^H h_AR|^2, |w_r^H h_BR|^2)`.
pub fn effective_gains(w_r: &CVector, ch: &ChannelRealization) -> (f64, f64) {
    (w_r.dotc(&ch.h_ar).norm_sqr(), w_r.dotc(&ch.h_br).norm_sqr())
}

/// `(|h_RA^H w_t|^2, |h_RB^H w_t|^2)`.
pub fn forward_gains(w_t: &CVector, ch: &ChannelRealization) -> (f64, f64) {
    (ch.h_ra.dotc(w_t).norm_sqr(), ch.h_rb.dotc(w_t).norm_sqr())
}

/// SINRs at sources A and B after each cancels its own back-propagated
/// signal. Denominators include the unit receiver noise, so they are >= 1.
pub fn sinr_pair(
    sol: &BeamformingSolution,
    ch: &ChannelRealization,
    params: &SystemParams,
) -> (f64, f64) {
    let (c_ra, c_rb) = effective_gains(&sol.w_r, ch);
    let (a, b) = forward_gains(&sol.w_t, ch);
    let rho2 = sol.rho * sol.rho;
    let sinr_a =
        rho2 * params.p_b * c_rb * a / (rho2 * a + a + params.p_a * ch.h_aa.norm_sqr() + 1.0);
    let sinr_b =
        rho2 * params.p_a * c_ra * b / (rho2 * b + b + params.p_b * ch.h_bb.norm_sqr() + 1.0);
    (sinr_a, sinr_b)
}

/// `(log2(1 + sinr_a), log2(1 + sinr_b), sum)`.
pub fn rates(sinr_a: f64, sinr_b: f64) -> (f64, f64, f64) {
    let rate_a = sinr_a.ln_1p() / std::f64::consts::LN_2;
    let rate_b = sinr_b.ln_1p() / std::f64::consts::LN_2;
    (rate_a, rate_b, rate_a + rate_b)
}

/// Relay output power and the covariance trace `E_bar`. With `||w_r|| = 1`
/// both are `rho (P_A C_rA + P_B C_rB + 1) ||w_t||^2 + ||w_t||^2`.
pub fn relay_power(
    sol: &BeamformingSolution,
    ch: &ChannelRealization,
    params: &SystemParams,
) -> (f64, f64) {
    let (c_ra, c_rb) = effective_gains(&sol.w_r, ch);
    let p = relay_power_from_gains(sol.rho, c_ra, c_rb, sol.w_t.norm_squared(), params);
    (p, p)
}

pub(crate) fn relay_power_from_gains(
    rho: f64,
    c_ra: f64,
    c_rb: f64,
    wt_norm_sq: f64,
    params: &SystemParams,
) -> f64 {
    rho * (params.p_a * c_ra * wt_norm_sq + params.p_b * c_rb * wt_norm_sq + wt_norm_sq)
        + wt_norm_sq
}

/// Power reaching the relay antennas from both sources:
/// `||h_AR||^2 P_A + ||h_BR||^2 P_B`.
pub fn source_power_at_relay(ch: &ChannelRealization, params: &SystemParams) -> f64 {
    ch.h_ar.norm_squared() * params.p_a + ch.h_br.norm_squared() * params.p_b
}

/// Harvested energy `(1 - rho)(||h_AR||^2 P_A + ||h_BR||^2 P_B + E_bar + 1)`
/// for a caller-supplied `E_bar`.
pub fn harvested_energy(
    sol: &BeamformingSolution,
    ch: &ChannelRealization,
    params: &SystemParams,
    e_bar: f64,
) -> f64 {
    harvest_at(sol.rho, source_power_at_relay(ch, params), e_bar)
}

pub(crate) fn harvest_at(rho: f64, source_power: f64, e_bar: f64) -> f64 {
    (1.0 - rho) * (source_power + e_bar + 1.0)
}

/// Full report, with `E_bar` evaluated at the operating point itself.
pub fn evaluate(
    sol: &BeamformingSolution,
    ch: &ChannelRealization,
    params: &SystemParams,
) -> LinkReport {
    let (c_ra, c_rb) = effective_gains(&sol.w_r, ch);
    let (sinr_a, sinr_b) = sinr_pair(sol, ch, params);
    let (rate_a, rate_b, sum_rate) = rates(sinr_a, sinr_b);
    let (p_relay, e_bar) = relay_power(sol, ch, params);
    let q_harvest = harvested_energy(sol, ch, params, e_bar);
    LinkReport {
        sinr_a,
        sinr_b,
        rate_a,
        rate_b,
        sum_rate,
        c_ra,
        c_rb,
        p_relay,
        e_bar,
        q_harvest,
    }
}
