use rayon::prelude::*;
use serde::Serialize;
use swipt_relay::channel::derive_seed;
use swipt_relay::{
    sample_channels, solve_fixed_alpha, solve_joint, ChannelRealization, JointConfig, JointSolution,
    SystemParams,
};

use crate::config::{Scheme, SweepConfig, SweepKind};
use crate::error::SimResult;
use crate::output::{emit, OutputFormat};

/// One `(scheme, sweep value, q_bar, realization)` outcome. Infeasible runs
/// carry `NaN` in every measured column.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub scheme: Scheme,
    pub sweep_value_db: f64,
    pub q_bar: f64,
    pub realization: usize,
    pub seed: u64,
    pub alpha: f64,
    pub rho: f64,
    pub sum_rate: f64,
    pub rate_a: f64,
    pub rate_b: f64,
    pub q_harvest: f64,
    pub p_relay: f64,
    pub iterations: usize,
    pub converged: bool,
    pub infeasible: bool,
}

impl Row {
    fn solved(key: RowKey, sol: &JointSolution) -> Self {
        Self {
            scheme: key.scheme,
            sweep_value_db: key.sweep_value_db,
            q_bar: key.q_bar,
            realization: key.realization,
            seed: key.seed,
            alpha: sol.alpha_star,
            rho: sol.solution.rho,
            sum_rate: sol.report.sum_rate,
            rate_a: sol.report.rate_a,
            rate_b: sol.report.rate_b,
            q_harvest: sol.report.q_harvest,
            p_relay: sol.report.p_relay,
            iterations: sol.iterations_outer,
            converged: sol.converged,
            infeasible: false,
        }
    }

    fn infeasible(key: RowKey) -> Self {
        Self {
            scheme: key.scheme,
            sweep_value_db: key.sweep_value_db,
            q_bar: key.q_bar,
            realization: key.realization,
            seed: key.seed,
            alpha: f64::NAN,
            rho: f64::NAN,
            sum_rate: f64::NAN,
            rate_a: f64::NAN,
            rate_b: f64::NAN,
            q_harvest: f64::NAN,
            p_relay: f64::NAN,
            iterations: 0,
            converged: false,
            infeasible: true,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct RowKey {
    scheme: Scheme,
    sweep_value_db: f64,
    q_bar: f64,
    realization: usize,
    seed: u64,
}

/// Mean over the feasible rows of one `(sweep value, q_bar, scheme)` cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub scheme: Scheme,
    pub sweep_value_db: f64,
    pub q_bar: f64,
    /// `NaN` when no row is feasible.
    pub mean_sum_rate: f64,
    pub feasible: usize,
    pub infeasible: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SweepResult {
    pub rows: Vec<Row>,
}

impl SweepResult {
    /// Cell summaries in first-appearance order of the rows.
    pub fn summary(&self) -> Vec<Summary> {
        let mut out: Vec<(Summary, f64)> = Vec::new();
        for r in &self.rows {
            let pos = out.iter().position(|(s, _)| {
                s.scheme == r.scheme
                    && s.sweep_value_db.to_bits() == r.sweep_value_db.to_bits()
                    && s.q_bar.to_bits() == r.q_bar.to_bits()
            });
            let idx = pos.unwrap_or_else(|| {
                out.push((
                    Summary {
                        scheme: r.scheme,
                        sweep_value_db: r.sweep_value_db,
                        q_bar: r.q_bar,
                        mean_sum_rate: f64::NAN,
                        feasible: 0,
                        infeasible: 0,
                    },
                    0.0,
                ));
                out.len() - 1
            });
            let (s, total) = &mut out[idx];
            if r.infeasible {
                s.infeasible += 1;
            } else {
                s.feasible += 1;
                *total += r.sum_rate;
            }
        }
        out.into_iter()
            .map(|(mut s, total)| {
                if s.feasible > 0 {
                    s.mean_sum_rate = total / s.feasible as f64;
                }
                s
            })
            .collect()
    }

    pub fn all_infeasible(&self) -> bool {
        !self.rows.is_empty() && self.rows.iter().all(|r| r.infeasible)
    }
}

/// Parameters for one sweep point: the template with the swept quantity
/// set to `10^(value_db / 10)` and the given harvest threshold.
pub fn params_at(cfg: &SweepConfig, value_db: f64, q_bar: f64) -> SystemParams {
    let linear = 10f64.powf(value_db / 10.0);
    let mut p = cfg.fixed_params.clone();
    p.q_bar = q_bar;
    match cfg.sweep_kind {
        SweepKind::Pmax => {
            p.p_a = linear;
            p.p_b = linear;
            p.p_r = linear;
        }
        SweepKind::Rsi => {
            p.var_rsi_a = linear;
            p.var_rsi_b = linear;
            p.var_rsi_r = linear;
        }
    }
    p
}

#[derive(Debug, Clone)]
pub struct SingleRun {
    pub channel: ChannelRealization,
    pub solution: JointSolution,
}

/// Samples the channel for `seed` and solves it with `scheme`.
pub fn run_single(
    params: &SystemParams,
    seed: u64,
    scheme: Scheme,
    frbv_alpha: f64,
    joint: &JointConfig,
) -> swipt_relay::Result<SingleRun> {
    let channel = sample_channels(params, seed)?;
    let solution = match scheme {
        Scheme::JointOpt => solve_joint(&channel, params, joint)?,
        Scheme::Frbv => solve_fixed_alpha(frbv_alpha, &channel, params, joint)?,
    };
    Ok(SingleRun { channel, solution })
}

/// Runs every `(sweep value, q_bar, scheme, realization)` combination and,
/// when `cfg.output_path` is set, writes the table there (JSON for a `.json`
/// extension, CSV otherwise).
///
/// Realization `i` uses the channel seed `derive_seed(master_seed, i)` at
/// every sweep point. Jobs run on the current rayon pool; row order does not
/// depend on the number of threads.
pub fn run_sweep(cfg: &SweepConfig) -> SimResult<SweepResult> {
    cfg.validate()?;
    let joint = cfg.joint_config();
    let mut keys = Vec::new();
    for &v in &cfg.sweep_values {
        for &q in &cfg.q_bar_values {
            for &scheme in &cfg.schemes {
                for i in 0..cfg.n_realizations {
                    keys.push(RowKey {
                        scheme,
                        sweep_value_db: v,
                        q_bar: q,
                        realization: i,
                        seed: derive_seed(cfg.master_seed, i as u64),
                    });
                }
            }
        }
    }
    log::info!("sweep: {} runs", keys.len());

    let rows = keys
        .par_iter()
        .map(|&key| {
            let params = params_at(cfg, key.sweep_value_db, key.q_bar);
            match run_single(&params, key.seed, key.scheme, cfg.frbv_alpha, &joint) {
                Ok(run) => Ok(Row::solved(key, &run.solution)),
                Err(e) if e.binding().is_some() => {
                    log::debug!("{} at {} dB, q_bar {}: {e}", key.scheme, key.sweep_value_db, key.q_bar);
                    Ok(Row::infeasible(key))
                }
                Err(e) => Err(e.into()),
            }
        })
        .collect::<SimResult<Vec<Row>>>()?;

    let result = SweepResult { rows };
    if let Some(path) = &cfg.output_path {
        emit(&result, OutputFormat::from_path(path), path)?;
    }
    Ok(result)
}
