use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;
use swipt_relay::CVector;
use swipt_relay_sim::{emit, format_float, run_single, run_sweep, OutputFormat, Scheme, SimError, SweepConfig};

const EXIT_FAILURE: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_INFEASIBLE: u8 = 3;

#[derive(Parser)]
#[command(name = "swipt-relay", version, about = "Full-duplex SWIPT relay beamforming optimizer")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Optimize a single channel realization drawn from `--seed`.
    Solve {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = SchemeArg::Joint)]
        scheme: SchemeArg,
        /// Print the result as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Run the Monte Carlo sweep described by the config file.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Defaults to the extension of `--out`.
        #[arg(long, value_enum)]
        format: Option<FormatArg>,
        /// Worker threads (defaults to the number of CPUs).
        #[arg(long)]
        jobs: Option<usize>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeArg {
    Joint,
    Frbv,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Solve {
            config,
            seed,
            scheme,
            json,
        } => solve(config, seed, scheme, json),
        Command::Sweep {
            config,
            out,
            format,
            jobs,
        } => sweep(config, out, format, jobs),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            let code = match &e {
                e if e.is_config() => EXIT_CONFIG,
                SimError::Solver(s) if s.binding().is_some() => EXIT_INFEASIBLE,
                _ => EXIT_FAILURE,
            };
            ExitCode::from(code)
        }
    }
}

fn complex_pairs(v: &CVector) -> Vec<[f64; 2]> {
    v.iter().map(|z| [z.re, z.im]).collect()
}

fn solve(config: PathBuf, seed: u64, scheme: SchemeArg, as_json: bool) -> Result<u8, SimError> {
    let cfg = SweepConfig::from_file(&config)?;
    let scheme = match scheme {
        SchemeArg::Joint => Scheme::JointOpt,
        SchemeArg::Frbv => Scheme::Frbv,
    };
    let run = run_single(&cfg.fixed_params, seed, scheme, cfg.frbv_alpha, &cfg.joint_config())?;
    let sol = &run.solution;
    let r = &sol.report;
    if as_json {
        let doc = json!({
            "scheme": scheme.as_str(),
            "seed": seed,
            "alpha": sol.alpha_star,
            "rho": sol.solution.rho,
            "sum_rate": r.sum_rate,
            "rate_a": r.rate_a,
            "rate_b": r.rate_b,
            "sinr_a": r.sinr_a,
            "sinr_b": r.sinr_b,
            "q_harvest": r.q_harvest,
            "p_relay": r.p_relay,
            "iterations": sol.iterations_outer,
            "converged": sol.converged,
            "trace": sol.trace,
            "w_r": complex_pairs(&sol.solution.w_r),
            "w_t": complex_pairs(&sol.solution.w_t),
        });
        println!("{}", serde_json::to_string_pretty(&doc)?);
    } else {
        println!("scheme      {scheme}");
        println!("seed        {seed}");
        println!("alpha       {}", format_float(sol.alpha_star));
        println!("rho         {}", format_float(sol.solution.rho));
        println!("sum_rate    {}", format_float(r.sum_rate));
        println!("rate_a      {}", format_float(r.rate_a));
        println!("rate_b      {}", format_float(r.rate_b));
        println!("q_harvest   {}", format_float(r.q_harvest));
        println!("p_relay     {}", format_float(r.p_relay));
        println!("iterations  {}", sol.iterations_outer);
        println!("converged   {}", sol.converged);
    }
    Ok(0)
}

fn sweep(config: PathBuf, out: PathBuf, format: Option<FormatArg>, jobs: Option<usize>) -> Result<u8, SimError> {
    let mut cfg = SweepConfig::from_file(&config)?;
    cfg.output_path = None;
    let format = match format {
        Some(FormatArg::Csv) => OutputFormat::Csv,
        Some(FormatArg::Json) => OutputFormat::Json,
        None => OutputFormat::from_path(&out),
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = jobs {
        if n == 0 {
            return Err(SimError::Config("--jobs must be >= 1".into()));
        }
        pool = pool.num_threads(n);
    }
    let pool = pool
        .build()
        .map_err(|e| SimError::Config(format!("thread pool: {e}")))?;
    let result = pool.install(|| run_sweep(&cfg))?;
    emit(&result, format, &out)?;

    eprintln!("{:<10} {:>10} {:>8} {:>12} {:>9}", "scheme", "value_db", "q_bar", "mean_rate", "feasible");
    for s in result.summary() {
        eprintln!(
            "{:<10} {:>10} {:>8} {:>12} {:>4}/{:<4}",
            s.scheme.as_str(),
            format_float(s.sweep_value_db),
            format_float(s.q_bar),
            format_float(s.mean_sum_rate),
            s.feasible,
            s.feasible + s.infeasible
        );
    }
    if result.all_infeasible() {
        eprintln!("every run was infeasible");
        return Ok(EXIT_INFEASIBLE);
    }
    Ok(0)
}
