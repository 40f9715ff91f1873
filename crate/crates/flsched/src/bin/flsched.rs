//! Command-line front end: analytic rate sweeps, the subchannel trade-off,
//! Monte Carlo validation, training runs, algorithm comparison, and plotting.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rayon::prelude::*;

use flsched::config::ExperimentConfig;
use flsched::data::build_problem;
use flsched::geometry::{estimate_update_success, IntensityMode};
use flsched::net::{db_to_linear, linear_to_db, NetworkParams, Policy};
use flsched::opt::loss::LossKind;
use flsched::opt::problem::Regularizer;
use flsched::opt::train::{
    train_algorithm1, train_algorithm2, Algorithm2Options, ChannelSource,
};
use flsched::persist::{persist_run, RunManifest, TraceRow};
use flsched::plot::{render_chart, PlotOptions, Series};
use flsched::rates::{
    asymptotic_rounds, rounds_to_gap, success_prob, RateQuery, SinrRegime,
};
use flsched::Error;

/// Explicit marker for grid points that have no finite answer; rows are
/// never silently dropped.
const NONCONV: &str = "NONCONV";

#[derive(Parser)]
#[command(name = "flsched", about = "Federated learning scheduling experiments", version)]
struct Cli {
    /// JSON experiment config; defaults are used when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed; every random stream in a run derives from it.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output directory (overrides the config's output path).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Monte Carlo trials or training repetitions, command-dependent.
    #[arg(long, global = true)]
    trials: Option<u64>,
    /// Worker threads; defaults to the number of cores.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analytic rounds-to-gap sweeps over the threshold and group-ratio grids.
    Rates,
    /// Subchannel-count trade-off with the total-spectrum threshold model.
    Tradeoff,
    /// Monte Carlo validation of the analytic success probabilities.
    ValidateMc,
    /// Train with Algorithm 2 across the configured policies.
    Train,
    /// Compare Algorithm 2 against the local-SGD baseline.
    CompareAlgs,
    /// Render a CSV produced by the other commands as an SVG line chart.
    Plot {
        /// Input CSV (first column = x axis, one column per series).
        input: PathBuf,
        /// Log-scale the y axis (non-positive points are skipped).
        #[arg(long)]
        log_y: bool,
        #[arg(long, default_value = "")]
        title: String,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let benign = matches!(
                e.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            );
            let _ = e.print();
            return if benign { ExitCode::SUCCESS } else { ExitCode::from(1) };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config(_) | Error::InvalidParameter(_) => ExitCode::from(1),
                _ => ExitCode::from(2),
            }
        }
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    }
    let config = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    config.validate()?;
    let out_dir = cli
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(&config.output_dir));
    std::fs::create_dir_all(&out_dir)?;
    let ctx = Ctx {
        config,
        seed: cli.seed,
        out_dir,
        trials: cli.trials,
    };
    match cli.command {
        Command::Rates => cmd_rates(&ctx),
        Command::Tradeoff => cmd_tradeoff(&ctx),
        Command::ValidateMc => cmd_validate_mc(&ctx),
        Command::Train => cmd_train(&ctx),
        Command::CompareAlgs => cmd_compare_algs(&ctx),
        Command::Plot { input, log_y, title } => cmd_plot(&ctx, &input, log_y, &title),
    }
}

struct Ctx {
    config: ExperimentConfig,
    seed: u64,
    out_dir: PathBuf,
    trials: Option<u64>,
}

impl Ctx {
    fn provenance(&self) -> String {
        format!("# config_hash={} master_seed={}", self.config.hash(), self.seed)
    }

    fn write_csv(&self, name: &str, header: &str, rows: &[String]) -> Result<PathBuf, Error> {
        let path = self.out_dir.join(name);
        let mut text = String::new();
        text.push_str(&self.provenance());
        text.push('\n');
        text.push_str(header);
        text.push('\n');
        for r in rows {
            text.push_str(r);
            text.push('\n');
        }
        std::fs::write(&path, text)?;
        println!("wrote {}", path.display());
        Ok(path)
    }

    fn dataset_size(&self) -> u64 {
        match &self.config.dataset.source {
            flsched::data::DataSource::SyntheticGaussian { n, .. } => *n as u64,
            // For file sources the rates commands only need n for the
            // log(n/ε) normalization; use the default problem size.
            flsched::data::DataSource::File { .. } => 200,
        }
    }

    fn query(&self, params: NetworkParams, policy: Policy) -> RateQuery {
        RateQuery {
            params,
            policy,
            beta: self.config.beta,
            gap_target: self.config.epsilon,
            dataset_size: self.dataset_size(),
        }
    }

    /// Config policies plus the NS overlay, deduplicated in order.
    fn sweep_policies(&self) -> Result<Vec<Policy>, Error> {
        let mut ps = self.config.parsed_policies()?;
        if !ps.contains(&Policy::Ns) {
            ps.push(Policy::Ns);
        }
        Ok(ps)
    }
}

fn fmt(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.6e}")
    } else {
        NONCONV.to_string()
    }
}

/// One sweep row; analytic failures become sentinel cells, not missing rows.
fn rate_row(ctx: &Ctx, params: NetworkParams, policy: Policy, axis: String) -> String {
    let q = ctx.query(params, policy);
    let analytic = rounds_to_gap(&q);
    let asym = |regime| {
        asymptotic_rounds(policy, regime, &q)
            .map(fmt)
            .unwrap_or_else(|_| NONCONV.to_string())
    };
    match analytic {
        Ok(rep) => format!(
            "{},{axis},{},{},{},{},{},{}",
            policy.label(),
            fmt(rep.success_prob),
            rep.rounds.map(|r| r.to_string()).unwrap_or_else(|| NONCONV.to_string()),
            fmt(rep.rounds_real),
            fmt(rep.normalized_rounds),
            asym(SinrRegime::High),
            asym(SinrRegime::Low),
        ),
        Err(_) => format!(
            "{},{axis},{n},{n},{n},{n},{n},{n}",
            policy.label(),
            n = NONCONV
        ),
    }
}

fn cmd_rates(ctx: &Ctx) -> Result<(), Error> {
    let base = ctx.config.network()?;
    let policies = ctx.sweep_policies()?;

    // Threshold sweep at the configured K, N.
    let grid: Vec<(Policy, f64)> = policies
        .iter()
        .flat_map(|&p| ctx.config.theta_grid_db.iter().map(move |&t| (p, t)))
        .collect();
    let rows: Vec<String> = grid
        .par_iter()
        .map(|&(p, theta_db)| {
            rate_row(ctx, base.with_theta(db_to_linear(theta_db)), p, format!("{theta_db}"))
        })
        .collect();
    ctx.write_csv(
        "rates_theta.csv",
        "policy,theta_db,U,T,T_real,normalized,asym_high,asym_low",
        &rows,
    )?;

    // Group-ratio sweep at the configured threshold: K = G·N.
    let grid: Vec<(Policy, u32)> = policies
        .iter()
        .flat_map(|&p| ctx.config.group_grid.iter().map(move |&g| (p, g)))
        .collect();
    let rows: Vec<String> = grid
        .par_iter()
        .map(|&(p, g)| {
            let params = NetworkParams {
                ues_per_cell: g * base.subchannels,
                ..base
            };
            rate_row(ctx, params, p, format!("{g}"))
        })
        .collect();
    ctx.write_csv(
        "rates_group.csv",
        "policy,group_ratio,U,T,T_real,normalized,asym_high,asym_low",
        &rows,
    )?;
    Ok(())
}

/// Per-subchannel threshold when a fixed total spectrum is split N ways,
/// anchored so θ(N_ref) = θ_ref.
fn tradeoff_theta(theta_ref: f64, n: u32, n_ref: u32) -> f64 {
    (1.0 + theta_ref).powf(n as f64 / n_ref as f64) - 1.0
}

fn cmd_tradeoff(ctx: &Ctx) -> Result<(), Error> {
    let base = ctx.config.network()?;
    let policies = ctx.config.parsed_policies()?;
    let theta_ref = base.sinr_threshold;
    let n_ref = base.subchannels;

    let grid: Vec<(Policy, u32)> = policies
        .iter()
        .flat_map(|&p| ctx.config.subchannel_grid.iter().map(move |&n| (p, n)))
        .collect();
    let rows: Vec<(Policy, u32, Option<f64>, String)> = grid
        .par_iter()
        .map(|&(p, n)| {
            let theta = tradeoff_theta(theta_ref, n, n_ref);
            if !theta.is_finite() || n > base.ues_per_cell {
                let row = format!("{},{n},{s},{s},{s}", p.label(), s = NONCONV);
                return (p, n, None, row);
            }
            let params = NetworkParams {
                subchannels: n,
                sinr_threshold: theta,
                ..base
            };
            match rounds_to_gap(&ctx.query(params, p)) {
                Ok(rep) if rep.rounds_real.is_finite() && !rep.degenerate => {
                    let row = format!(
                        "{},{n},{},{},{}",
                        p.label(),
                        fmt(linear_to_db(theta)),
                        fmt(rep.rounds_real),
                        fmt(rep.normalized_rounds)
                    );
                    (p, n, Some(rep.rounds_real), row)
                }
                _ => {
                    let row = format!(
                        "{},{n},{},{s},{s}",
                        p.label(),
                        fmt(linear_to_db(theta)),
                        s = NONCONV
                    );
                    (p, n, None, row)
                }
            }
        })
        .collect();

    let csv: Vec<String> = rows.iter().map(|(_, _, _, row)| row.clone()).collect();
    ctx.write_csv(
        "tradeoff.csv",
        "policy,subchannels,theta_db,T_real,normalized",
        &csv,
    )?;

    let mut summary = Vec::new();
    for &p in &policies {
        let best = rows
            .iter()
            .filter(|(q, _, t, _)| *q == p && t.is_some())
            .min_by(|a, b| a.2.unwrap().partial_cmp(&b.2.unwrap()).unwrap());
        match best {
            Some((_, n, Some(t), _)) => {
                summary.push(format!("{},{n},{}", p.label(), fmt(*t)));
                println!("{}: argmin N = {n} (T = {t:.3})", p.label());
            }
            _ => summary.push(format!("{},{NONCONV},{NONCONV}", p.label())),
        }
    }
    ctx.write_csv("tradeoff_argmin.csv", "policy,argmin_subchannels,T_real", &summary)?;
    Ok(())
}

fn cmd_validate_mc(ctx: &Ctx) -> Result<(), Error> {
    let trials = ctx.trials.unwrap_or(20_000);
    if trials < 10_000 {
        return Err(Error::InvalidParameter(
            "validate-mc needs --trials >= 10000".into(),
        ));
    }
    let base = ctx.config.network()?;
    let policies = ctx.sweep_policies()?;
    let mut rows = Vec::new();
    for &p in &policies {
        if matches!(p, Policy::MultiRound(_)) {
            continue; // no single-trial sampler; analytic only
        }
        for &theta_db in &ctx.config.theta_grid_db {
            let params = base.with_theta(db_to_linear(theta_db));
            let analytic = success_prob(&ctx.query(params, p))?;
            let mc = estimate_update_success(
                &params,
                p,
                IntensityMode::StandardExclusion,
                trials,
                ctx.seed,
            )?;
            let rel = if analytic > 0.0 {
                (mc.mean - analytic).abs() / analytic
            } else {
                f64::NAN
            };
            println!(
                "{:>10} θ={theta_db:>6} dB  analytic={analytic:.5}  mc={:.5}±{:.5}  rel={:.3}",
                p.label(),
                mc.mean,
                mc.half_width_95,
                rel
            );
            rows.push(format!(
                "{},{theta_db},{},{},{},{}",
                p.label(),
                fmt(analytic),
                fmt(mc.mean),
                fmt(mc.half_width_95),
                fmt(rel)
            ));
        }
    }
    ctx.write_csv(
        "validate_mc.csv",
        "policy,theta_db,analytic_U,mc_U,ci_half_width,rel_deviation",
        &rows,
    )?;
    Ok(())
}

fn default_reg() -> Regularizer {
    Regularizer { zeta: 1.0, xi: 0.01 }
}

fn cmd_train(ctx: &Ctx) -> Result<(), Error> {
    let params = ctx.config.network()?;
    let prob = build_problem(
        &ctx.config.dataset,
        params.ues_per_cell as usize,
        LossKind::Logistic,
        default_reg(),
    )?;
    let policies = ctx.config.parsed_policies()?;
    let repeats = ctx.trials.unwrap_or(5).max(1);
    let opts = Algorithm2Options {
        rounds: ctx.config.rounds as u64,
        passes: ctx.config.local_passes as u32,
        scaled_v_updates: false,
    };

    for &policy in &policies {
        let runs: Vec<_> = (0..repeats)
            .map(|rep| {
                train_algorithm2(
                    &prob,
                    &params,
                    policy,
                    ChannelSource::Physical {
                        mode: IntensityMode::StandardExclusion,
                    },
                    opts,
                    ctx.seed.wrapping_add(rep),
                )
            })
            .collect::<Result<Vec<_>, _>>()?;

        // Per-round gap statistics across repetitions.
        let mut rows = Vec::with_capacity(opts.rounds as usize);
        for t in 0..opts.rounds as usize {
            let gaps: Vec<f64> = runs.iter().map(|r| r[t].gap).collect();
            let mean = gaps.iter().sum::<f64>() / gaps.len() as f64;
            let lo = gaps.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = gaps.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let primal =
                runs.iter().map(|r| r[t].primal).sum::<f64>() / runs.len() as f64;
            rows.push(format!(
                "{t},{},{},{},{}",
                fmt(mean),
                fmt(lo),
                fmt(hi),
                fmt(primal)
            ));
        }
        let name = format!("train_{}.csv", policy.label().to_lowercase());
        ctx.write_csv(&name, "round,gap_mean,gap_min,gap_max,primal_mean", &rows)?;

        // Persist the first repetition as a replayable trace.
        let trace: Vec<TraceRow> = runs[0].iter().map(TraceRow::from).collect();
        let manifest = RunManifest::new(&ctx.config, ctx.seed);
        let stem = ctx
            .out_dir
            .join(format!("train_{}", policy.label().to_lowercase()));
        persist_run(&trace, &manifest, &stem)?;
        let last = runs[0].last().expect("rounds >= 1");
        println!(
            "{}: final gap {:.3e}, primal {:.5}, η {:.3}",
            policy.label(),
            last.gap,
            last.primal,
            last.eta
        );
    }
    Ok(())
}

fn cmd_compare_algs(ctx: &Ctx) -> Result<(), Error> {
    let params = ctx.config.network()?;
    let prob = build_problem(
        &ctx.config.dataset,
        params.ues_per_cell as usize,
        LossKind::Logistic,
        default_reg(),
    )?;
    let policy = ctx.config.parsed_policies()?[0];
    let channel = ChannelSource::Physical {
        mode: IntensityMode::StandardExclusion,
    };
    let opts = Algorithm2Options {
        rounds: ctx.config.rounds as u64,
        passes: ctx.config.local_passes as u32,
        scaled_v_updates: false,
    };
    let alg2 = train_algorithm2(&prob, &params, policy, channel, opts, ctx.seed)?;
    let alg1 = train_algorithm1(
        &prob,
        &params,
        policy,
        channel,
        opts.rounds,
        10,
        0.05,
        ctx.seed,
    )?;
    let rows: Vec<String> = (0..opts.rounds as usize)
        .map(|t| {
            format!(
                "{t},{},{},{}",
                fmt(alg2[t].primal),
                fmt(alg2[t].gap),
                fmt(alg1[t].primal)
            )
        })
        .collect();
    ctx.write_csv(
        "compare_algs.csv",
        "round,alg2_primal,alg2_gap,alg1_primal",
        &rows,
    )?;
    println!(
        "{}: Algorithm 2 final primal {:.5} (gap {:.3e}); Algorithm 1 final primal {:.5}",
        policy.label(),
        alg2.last().unwrap().primal,
        alg2.last().unwrap().gap,
        alg1.last().unwrap().primal
    );
    Ok(())
}

fn cmd_plot(ctx: &Ctx, input: &Path, log_y: bool, title: &str) -> Result<(), Error> {
    let text = std::fs::read_to_string(input)?;
    let mut lines = text.lines().filter(|l| !l.starts_with('#') && !l.is_empty());
    let header = lines
        .next()
        .ok_or_else(|| Error::InvalidParameter("empty input".into()))?;
    let cols: Vec<&str> = header.split(',').collect();
    if cols.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "need an x column and at least one series, got header {header:?}"
        )));
    }
    let mut series: Vec<Series> = cols[1..]
        .iter()
        .map(|c| Series {
            label: c.to_string(),
            points: Vec::new(),
        })
        .collect();
    for (i, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != cols.len() {
            return Err(Error::InvalidParameter(format!(
                "row {}: {} fields, expected {}",
                i + 2,
                fields.len(),
                cols.len()
            )));
        }
        let x: f64 = match fields[0].parse() {
            Ok(x) => x,
            Err(_) => {
                return Err(Error::InvalidParameter(format!(
                    "row {}: non-numeric x value {:?}",
                    i + 2,
                    fields[0]
                )))
            }
        };
        for (s, f) in series.iter_mut().zip(&fields[1..]) {
            // Sentinel cells become gaps in that series rather than errors.
            if let Ok(y) = f.parse::<f64>() {
                s.points.push((x, y));
            }
        }
    }
    let opts = PlotOptions {
        title: title.to_string(),
        x_label: cols[0].to_string(),
        y_label: if log_y { "value (log)".into() } else { "value".into() },
        log_y,
        ..PlotOptions::default()
    };
    let (svg, warnings) = render_chart(&series, &opts)?;
    for w in warnings {
        eprintln!("warning: {w}");
    }
    let name = input
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "plot".into());
    let out = ctx.out_dir.join(format!("{name}.svg"));
    std::fs::write(&out, svg)?;
    println!("wrote {}", out.display());
    Ok(())
}
