//! Joint optimization of `(w_r, w_t, rho)`.
//!
//! For a fixed receive parameter `alpha` the transmit beamformer and the
//! splitting ratio are updated alternately until the sum rate stops
//! improving; the outer search over `alpha` picks the best of those runs.

use crate::channel::{ChannelRealization, SystemParams};
use crate::dc::{dc_optimize_wt, DcSettings};
use crate::error::{Constraint, Error, Result};
use crate::metrics::{evaluate, harvest_at, relay_power, source_power_at_relay, BeamformingSolution, LinkReport};
use crate::ps::{clamp_rho, optimal_rho, RhoBinding, RhoSolution, FEAS_TOL, RHO_EPS};
use crate::rx::{build_wr, search_alpha, AlphaGrid};
use crate::CVector;

#[derive(Debug, Clone, PartialEq)]
pub struct JointConfig {
    pub alpha_grid: AlphaGrid,
    /// Stop the `rho`/`w_t` alternation once the sum rate improves by less
    /// than this (bits/s/Hz).
    pub outer_tol: f64,
    pub outer_max_iter: usize,
    pub dc: DcSettings,
}

impl Default for JointConfig {
    fn default() -> Self {
        Self {
            alpha_grid: AlphaGrid::default(),
            outer_tol: 1e-4,
            outer_max_iter: 50,
            dc: DcSettings::default(),
        }
    }
}

impl JointConfig {
    pub fn validate(&self) -> Result<()> {
        self.alpha_grid.validate()?;
        if !(self.outer_tol > 0.0 && self.dc.tol > 0.0 && self.dc.subproblem.box_tol > 0.0) {
            return Err(Error::InvalidParams("tolerances must be > 0".into()));
        }
        if self.outer_max_iter < 1 || self.dc.max_iter < 1 {
            return Err(Error::InvalidParams("iteration caps must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct JointSolution {
    pub solution: BeamformingSolution,
    pub report: LinkReport,
    pub alpha_star: f64,
    /// Alternation rounds run for `alpha_star`.
    pub iterations_outer: usize,
    pub converged: bool,
    /// Sum rate after each alternation round.
    pub trace: Vec<f64>,
    /// Outcome of the last `rho` update of the returned iterate.
    pub rho_solution: RhoSolution,
    /// Relative change of the harvested energy between the frozen `E_bar`
    /// used by the `rho` update and `E_bar` at the returned point.
    pub harvest_gap: f64,
    /// `h_AR` is parallel to `h_BR`, so every `alpha` gives the same `w_r`.
    pub degenerate_wr: bool,
    /// Total DC subproblem solves spent on this `alpha`.
    pub dc_iterations: usize,
    /// Points evaluated by the `alpha` search (1 for a fixed-`alpha` run).
    pub alpha_evaluations: usize,
}

struct SettledRho {
    solution: RhoSolution,
    /// `E_bar` that entered the last closed-form update.
    e_bar_used: f64,
}

/// Repeats the closed-form `rho` update for a fixed `w_t`, re-evaluating
/// `E_bar` at the latest ratio each time, until the ratio stops moving.
fn settle_rho(
    w_t: &CVector,
    w_r: &CVector,
    ch: &ChannelRealization,
    params: &SystemParams,
    rho_start: f64,
) -> Result<SettledRho> {
    let e_at = |rho: f64| {
        let sol = BeamformingSolution {
            w_r: w_r.clone(),
            w_t: w_t.clone(),
            rho,
            alpha: 0.0,
        };
        relay_power(&sol, ch, params).1
    };
    let mut rho = rho_start;
    let mut e_bar = e_at(rho);
    for _ in 0..100_000 {
        let solution = optimal_rho(w_t, w_r, ch, params, e_bar)?;
        let e_next = e_at(solution.rho);
        let settled = (solution.rho - rho).abs() <= 1e-15 && (e_next - e_bar).abs() <= 1e-12 * (1.0 + e_bar);
        if settled || !solution.feasible {
            return Ok(SettledRho {
                solution,
                e_bar_used: e_bar,
            });
        }
        rho = solution.rho;
        e_bar = e_next;
    }
    Err(Error::SolverInvariant(
        "splitting-ratio update did not settle".into(),
    ))
}

/// Alternates `w_t` (DC programming) and `rho` (closed form) for the
/// receive beamformer `w_r(alpha)`; returns the best iterate seen.
///
/// The ratio starts at the largest value for which a relay radiating its
/// full budget still meets the harvest threshold.
pub fn solve_fixed_alpha(
    alpha: f64,
    ch: &ChannelRealization,
    params: &SystemParams,
    cfg: &JointConfig,
) -> Result<JointSolution> {
    params.validate()?;
    ch.validate(params)?;
    cfg.validate()?;
    let rb = build_wr(alpha, ch)?;
    let w_r = rb.w_r;

    let source = source_power_at_relay(ch, params);
    let rho_gate = 1.0 - params.q_bar / (source + params.p_r + 1.0);
    if rho_gate < RHO_EPS {
        return Err(Error::infeasible(
            Constraint::Harvest,
            format!(
                "q_bar = {} needs rho < {RHO_EPS} even at full relay power",
                params.q_bar
            ),
        ));
    }
    let mut rho = clamp_rho(rho_gate);

    let mut warm: Option<CVector> = None;
    let mut best: Option<JointSolution> = None;
    let mut trace = Vec::new();
    let mut previous = 0.0;
    let mut converged = false;
    let mut dc_iterations = 0;

    for round in 1..=cfg.outer_max_iter {
        let dc = dc_optimize_wt(ch, &w_r, rho, params, warm.as_ref(), &cfg.dc)?;
        dc_iterations += dc.trace.iterations;
        let settled = settle_rho(&dc.w_t, &w_r, ch, params, rho)?;
        let rho_solution = settled.solution;
        let sol = BeamformingSolution {
            w_r: w_r.clone(),
            w_t: dc.w_t,
            rho: rho_solution.rho,
            alpha,
        };
        let report = evaluate(&sol, ch, params);
        if report.p_relay > params.p_r + FEAS_TOL {
            return Err(Error::infeasible(
                Constraint::RelayPower,
                format!("relay power {} exceeds {}", report.p_relay, params.p_r),
            ));
        }
        if !rho_solution.feasible || report.q_harvest < params.q_bar - FEAS_TOL {
            return Err(Error::infeasible(
                Constraint::Harvest,
                format!("harvested {} < q_bar = {}", report.q_harvest, params.q_bar),
            ));
        }
        let frozen = harvest_at(sol.rho, source, settled.e_bar_used);
        let harvest_gap = (frozen - report.q_harvest).abs() / report.q_harvest.max(f64::MIN_POSITIVE);

        trace.push(report.sum_rate);
        let improvement = report.sum_rate - previous;
        previous = report.sum_rate;
        rho = sol.rho;
        warm = Some(dc.x);

        if best.as_ref().is_none_or(|b| report.sum_rate > b.report.sum_rate) {
            best = Some(JointSolution {
                solution: sol,
                report,
                alpha_star: alpha,
                iterations_outer: round,
                converged: false,
                trace: Vec::new(),
                rho_solution,
                harvest_gap,
                degenerate_wr: rb.degenerate,
                dc_iterations: 0,
                alpha_evaluations: 1,
            });
        }
        if improvement < cfg.outer_tol {
            converged = true;
            break;
        }
    }

    let mut out = best.expect("outer_max_iter >= 1");
    out.iterations_outer = trace.len();
    out.trace = trace;
    out.converged = converged;
    out.dc_iterations = dc_iterations;
    Ok(out)
}

/// Full optimization: searches `alpha` over `cfg.alpha_grid` with
/// [`solve_fixed_alpha`] as the inner solver.
pub fn solve_joint(
    ch: &ChannelRealization,
    params: &SystemParams,
    cfg: &JointConfig,
) -> Result<JointSolution> {
    cfg.validate()?;
    if build_wr(cfg.alpha_grid.start, ch)?.degenerate {
        // Every alpha yields the same receive beamformer.
        let mut sol = solve_fixed_alpha(cfg.alpha_grid.start, ch, params, cfg)?;
        sol.alpha_star = cfg.alpha_grid.start;
        return Ok(sol);
    }
    let search = search_alpha(&cfg.alpha_grid, |alpha| {
        let sol = solve_fixed_alpha(alpha, ch, params, cfg)?;
        Ok((sol.report.sum_rate, sol))
    })?;
    let mut sol = search.payload;
    sol.alpha_star = search.alpha;
    sol.alpha_evaluations = search.evaluations.len();
    Ok(sol)
}

/// Sum rate the same channel would reach without any residual
/// self-interference.
pub fn zero_rsi_reference(
    ch: &ChannelRealization,
    params: &SystemParams,
    cfg: &JointConfig,
) -> Result<f64> {
    let clean = SystemParams {
        var_rsi_a: 0.0,
        var_rsi_b: 0.0,
        var_rsi_r: 0.0,
        ..params.clone()
    };
    Ok(solve_joint(&ch.without_rsi(), &clean, cfg)?.report.sum_rate)
}

/// Reports whether `sol` honours every constraint at the stated slack and
/// returns the worst violation found, if any.
pub fn constraint_violation(
    sol: &JointSolution,
    ch: &ChannelRealization,
    params: &SystemParams,
) -> Option<String> {
    let s = &sol.solution;
    let zf = s.w_r.dotc(&(&ch.h_rr * &s.w_t)).norm();
    if zf > 1e-8 * s.w_t.norm() {
        return Some(format!("zero-forcing residual {zf:e}"));
    }
    if (s.w_r.norm() - 1.0).abs() > 1e-9 {
        return Some(format!("||w_r|| = {}", s.w_r.norm()));
    }
    if !(RHO_EPS..=1.0 - RHO_EPS).contains(&s.rho) {
        return Some(format!("rho = {} outside the admissible interval", s.rho));
    }
    let report = evaluate(s, ch, params);
    if report.p_relay > params.p_r + FEAS_TOL {
        return Some(format!("relay power {} > {}", report.p_relay, params.p_r));
    }
    if report.q_harvest < params.q_bar - FEAS_TOL {
        return Some(format!("harvest {} < {}", report.q_harvest, params.q_bar));
    }
    if sol.rho_solution.binding == RhoBinding::HarvestConstraint
        && (report.q_harvest - params.q_bar).abs() > FEAS_TOL
    {
        return Some(format!(
            "harvest-bound ratio leaves Q = {} != q_bar = {}",
            report.q_harvest, params.q_bar
        ));
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{derive_seed, sample_channels};
    use num_complex::Complex64;

    fn quick_cfg() -> JointConfig {
        JointConfig {
            alpha_grid: AlphaGrid {
                step: 0.1,
                ..AlphaGrid::default()
            },
            ..JointConfig::default()
        }
    }

    #[test]
    fn fixed_alpha_run_is_feasible_and_deterministic() {
        let params = SystemParams {
            q_bar: 2.0,
            ..SystemParams::default()
        };
        let cfg = JointConfig::default();
        for i in 0..5 {
            let ch = sample_channels(&params, derive_seed(31, i)).unwrap();
            let a = solve_fixed_alpha(0.4, &ch, &params, &cfg).unwrap();
            assert!(a.converged);
            assert!(constraint_violation(&a, &ch, &params).is_none());
            let b = solve_fixed_alpha(0.4, &ch, &params, &cfg).unwrap();
            assert_eq!(a.solution, b.solution);
            assert_eq!(a.trace, b.trace);
        }
    }

    #[test]
    fn single_round_cap() {
        let params = SystemParams::default();
        let ch = sample_channels(&params, 3).unwrap();
        let cfg = JointConfig {
            outer_max_iter: 1,
            ..JointConfig::default()
        };
        let sol = solve_fixed_alpha(0.5, &ch, &params, &cfg).unwrap();
        assert_eq!(sol.iterations_outer, 1);
        assert_eq!(sol.trace.len(), 1);
        // The first round improves on the zero-rate start by far more than the tolerance.
        assert!(!sol.converged);
    }

    #[test]
    fn joint_beats_every_fixed_alpha_on_its_grid() {
        let params = SystemParams::default();
        let cfg = quick_cfg();
        let ch = sample_channels(&params, 77).unwrap();
        let joint = solve_joint(&ch, &params, &cfg).unwrap();
        assert!(constraint_violation(&joint, &ch, &params).is_none());
        for alpha in cfg.alpha_grid.points() {
            let fixed = solve_fixed_alpha(alpha, &ch, &params, &cfg).unwrap();
            assert!(joint.report.sum_rate >= fixed.report.sum_rate);
        }
    }

    #[test]
    fn collinear_uplinks_collapse_the_search() {
        let params = SystemParams::default();
        let mut ch = sample_channels(&params, 8).unwrap();
        ch.h_br = &ch.h_ar * Complex64::new(0.5, -1.0);
        let sol = solve_joint(&ch, &params, &quick_cfg()).unwrap();
        assert!(sol.degenerate_wr);
        assert_eq!(sol.alpha_star, 0.0);
        assert!(constraint_violation(&sol, &ch, &params).is_none());
    }

    #[test]
    fn zero_rsi_reference_is_self_consistent() {
        let params = SystemParams {
            var_rsi_a: 0.0,
            var_rsi_b: 0.0,
            var_rsi_r: 0.0,
            ..SystemParams::default()
        };
        let cfg = quick_cfg();
        let ch = sample_channels(&params, 5).unwrap();
        let joint = solve_joint(&ch, &params, &cfg).unwrap();
        let reference = zero_rsi_reference(&ch, &params, &cfg).unwrap();
        assert!((joint.report.sum_rate - reference).abs() <= 1e-9);
    }

    #[test]
    fn impossible_harvest_is_infeasible() {
        let params = SystemParams {
            q_bar: 1e5,
            ..SystemParams::default()
        };
        let ch = sample_channels(&params, 5).unwrap();
        let err = solve_joint(&ch, &params, &quick_cfg()).unwrap_err();
        assert_eq!(err.binding(), Some(Constraint::Harvest));
    }
}
