use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use gridcharge::charging::build_charging_lp;
use gridcharge::harness::{
    policy_name, run_monte_carlo, write_dispatch_outputs, write_manifest, write_run_outputs, write_summary_csv,
    write_summary_json, Experiment, ExperimentConfig, Manifest, PriceMode, RunSeeds,
};
use gridcharge::ucp::build_ucp;

#[derive(Parser)]
#[command(name = "gridcharge", version, about = "Dispatch, carbon pricing and emissions-aware EV charging experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Experiment config (TOML).
    #[arg(long, env = "GRIDCHARGE_CONFIG")]
    config: PathBuf,
    /// Output directory; defaults to the config's `output_dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Master seed; defaults to the config's `master_seed`.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum PriceModeArg {
    Mean,
    Sampled,
}

impl From<PriceModeArg> for PriceMode {
    fn from(m: PriceModeArg) -> Self {
        match m {
            PriceModeArg::Mean => PriceMode::Mean,
            PriceModeArg::Sampled => PriceMode::Sampled,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Problem {
    Ucp,
    Charging,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the dispatch day and write dispatch, reservoir and intensity series.
    Ucp {
        #[command(flatten)]
        common: Common,
    },
    /// One full run at a single emission weight.
    Charge {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 10.0)]
        lambda: f64,
        #[arg(long, value_enum)]
        price_mode: Option<PriceModeArg>,
    },
    /// Repeated runs over several emission weights, summarised against FIFS.
    Montecarlo {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        runs: Option<usize>,
        /// Comma-separated weights, e.g. 0,0.1,1,10.
        #[arg(long, value_delimiter = ',')]
        lambdas: Option<Vec<f64>>,
        #[arg(long, value_enum)]
        price_mode: Option<PriceModeArg>,
    },
    /// Print the LP of run 0 in text form.
    DumpLp {
        /// Experiment config (TOML).
        #[arg(long, env = "GRIDCHARGE_CONFIG")]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum, default_value = "ucp")]
        problem: Problem,
        #[arg(long, default_value_t = 10.0)]
        lambda: f64,
    },
}

fn load(path: &PathBuf, seed: Option<u64>) -> Result<ExperimentConfig> {
    let mut config = ExperimentConfig::from_file(path).with_context(|| format!("loading {}", path.display()))?;
    if let Some(s) = seed {
        config.master_seed = s;
    }
    Ok(config)
}

fn out_dir(common: &Common, config: &ExperimentConfig) -> PathBuf {
    common
        .out
        .clone()
        .unwrap_or_else(|| config.resolve(&config.output_dir))
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match Cli::parse().command {
        Command::Ucp { common } => {
            let config = load(&common.config, common.seed)?;
            let out = out_dir(&common, &config);
            let exp = Experiment::load(config)?;
            let seeds = RunSeeds::derive(exp.config.master_seed, 0);
            let (dispatch, intensity, price) = exp.dispatch(&seeds)?;
            write_dispatch_outputs(&out, &dispatch, &exp.hydro_name(), &intensity, &price)?;
            log::info!("dispatch cost {:.0}, outputs in {}", dispatch.total_cost, out.display());
        }
        Command::Charge {
            common,
            lambda,
            price_mode,
        } => {
            if lambda.is_nan() || lambda < 0.0 {
                bail!("lambda must be non-negative");
            }
            let mut config = load(&common.config, common.seed)?;
            config.lambdas = vec![lambda];
            config.runs = 1;
            if let Some(m) = price_mode {
                config.price_mode = m.into();
            }
            let out = out_dir(&common, &config);
            let exp = Experiment::load(config)?;
            let run = exp.run(0)?;
            write_run_outputs(&out, &run, &exp.hydro_name(), &policy_name(lambda))?;
            write_manifest(&Manifest::new(&exp, vec![run.report.seeds]), out.join("manifest.json"))?;
            for p in &run.report.policies {
                log::info!(
                    "{}: cost {:.2}, emissions {:.1} kg",
                    p.policy,
                    p.energy_cost,
                    p.emission_mass_kg
                );
            }
        }
        Command::Montecarlo {
            common,
            runs,
            lambdas,
            price_mode,
        } => {
            let mut config = load(&common.config, common.seed)?;
            if let Some(k) = runs {
                config.runs = k;
            }
            if let Some(l) = lambdas {
                config.lambdas = l;
            }
            if let Some(m) = price_mode {
                config.price_mode = m.into();
            }
            config.validate()?;
            let out = out_dir(&common, &config);
            let exp = Experiment::load(config)?;
            let (reports, stats) = run_monte_carlo(&exp)?;
            std::fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
            write_summary_csv(&stats, out.join("summary.csv"))?;
            write_summary_json(&stats, out.join("summary.json"))?;
            let runs_path = out.join("runs.json");
            std::fs::write(&runs_path, serde_json::to_string_pretty(&reports)? + "\n")
                .with_context(|| format!("writing {}", runs_path.display()))?;
            write_manifest(&Manifest::new(&exp, reports.iter().map(|r| r.seeds).collect()), out.join("manifest.json"))?;
            for p in &stats.policies {
                log::info!(
                    "{}: cost {:.2} ({:.2}% below fifs), emissions {:.1} kg ({:.2}% below fifs)",
                    p.policy,
                    p.cost.mean,
                    p.delta_cost_vs_fifs,
                    p.emissions_kg.mean,
                    p.delta_emissions_vs_fifs
                );
            }
        }
        Command::DumpLp {
            config,
            seed,
            problem,
            lambda,
        } => {
            let exp = Experiment::load(load(&config, seed)?)?;
            let seeds = RunSeeds::derive(exp.config.master_seed, 0);
            match problem {
                Problem::Ucp => print!("{}", build_ucp(&exp.ucp_instance(seeds.inflows))?.lp),
                Problem::Charging => {
                    let (_, _, price) = exp.dispatch(&seeds)?;
                    let instance = exp.charging_instance(&seeds, &price.values)?.with_lambda(lambda);
                    print!("{}", build_charging_lp(&instance)?.lp);
                }
            }
        }
    }
    Ok(())
}
