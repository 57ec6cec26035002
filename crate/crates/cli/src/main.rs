use clap::{Args, Parser, Subcommand, ValueEnum};
use nurse_bnp::benchmark::{
    check_label_order, label_reduction, pricing_csv, pricing_rows, random_duals, solve_csv_row, sub_instance,
    suite_instance, PricingRow, SOLVE_CSV_HEADER, SUITE_SIZE,
};
use nurse_bnp::bnp::{solve, BnpConfig, Mode};
use nurse_bnp::colgen::CgConfig;
use nurse_bnp::graph::DualValues;
use nurse_bnp::instance::{generate_instance, parse_instance, parse_roster, serialize_instance, serialize_roster, Instance};
use nurse_bnp::labeling::{PricingConfig, Variant};
use nurse_bnp::oracle::EvalOptions;
use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

#[derive(Parser)]
#[command(name = "nurse-bnp", version, about = "Branch-and-price for nurse rostering with multiple units")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a seeded random instance.
    Generate {
        #[arg(long)]
        nurses: usize,
        #[arg(long)]
        weeks: usize,
        #[arg(long)]
        units: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output file; stdout when absent.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Solve an instance and print one CSV row.
    Solve {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        opts: SolveOpts,
        /// Write the best roster here.
        #[arg(long)]
        roster_out: Option<PathBuf>,
    },
    /// Run the pricing problem of one nurse with one or all variants.
    Price {
        #[command(flatten)]
        source: Source,
        /// Nurse id; required unless `--sub` is given.
        #[arg(long)]
        nurse: Option<String>,
        /// Pricing sub-instance number (1..=30) of the benchmark.
        #[arg(long, conflicts_with_all = ["instance", "suite_id", "nurse"])]
        sub: Option<usize>,
        /// DPB, DPU, DPP, DPPI or all.
        #[arg(long, default_value = "all")]
        variant: String,
        /// `zero` or `random:SEED`.
        #[arg(long, default_value = "zero")]
        duals: DualSpec,
        #[arg(long, default_value_t = 15.0)]
        time_limit: f64,
    },
    /// Check a roster against an instance and print its penalty report.
    Validate { instance: PathBuf, roster: PathBuf },
    /// Solve the 30 benchmark instances, or with `--pricing` run the 30
    /// pricing sub-instances.
    Suite {
        #[arg(long)]
        pricing: bool,
        /// Restrict to these ids, e.g. `1,2,5`.
        #[arg(long, value_delimiter = ',')]
        ids: Vec<usize>,
        /// Solve both modes per instance.
        #[arg(long, conflicts_with = "pricing")]
        both_modes: bool,
        #[command(flatten)]
        opts: SolveOpts,
    },
}

#[derive(Args)]
struct Source {
    /// Instance file.
    instance: Option<PathBuf>,
    /// Use benchmark instance `K` (1..=30) instead of a file.
    #[arg(long, conflicts_with = "instance")]
    suite_id: Option<usize>,
}

#[derive(Args)]
struct SolveOpts {
    #[arg(long, value_enum, default_value_t = ModeArg::Full)]
    mode: ModeArg,
    /// Seconds; pricing runs use it per call.
    #[arg(long)]
    time_limit: Option<f64>,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    #[arg(long, default_value = "DPPI")]
    variant: Variant,
    /// Columns returned per pricing call.
    #[arg(long, default_value_t = 1)]
    columns: usize,
    /// Price every nurse in every iteration.
    #[arg(long)]
    no_skip: bool,
    /// Do not charge stints still open on the last day.
    #[arg(long)]
    no_trailing_stints: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Full,
    Single,
}

#[derive(Clone, Copy)]
enum DualSpec {
    Zero,
    Random(u64),
}

impl std::str::FromStr for DualSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "zero" {
            return Ok(DualSpec::Zero);
        }
        s.strip_prefix("random:")
            .and_then(|seed| seed.parse().ok())
            .map(DualSpec::Random)
            .ok_or_else(|| format!("expected `zero` or `random:SEED`, got `{s}`"))
    }
}

/// Largest cover dual drawn by `--duals random:SEED`.
const RANDOM_DUAL_MAX: i64 = 40;

enum Failure {
    Input(String),
    Internal(String),
    HardViolations,
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::HardViolations => 1,
            Failure::Input(_) => 2,
            Failure::Internal(_) => 3,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Input(m) => write!(f, "input error: {m}"),
            Failure::Internal(m) => write!(f, "internal error: {m}"),
            Failure::HardViolations => f.write_str("roster violates hard constraints"),
        }
    }
}

fn input<E: fmt::Display>(e: E) -> Failure {
    Failure::Input(e.to_string())
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn check_suite_id(id: usize) -> Result<usize, Failure> {
    if (1..=SUITE_SIZE).contains(&id) {
        Ok(id)
    } else {
        Err(Failure::Input(format!("ids run from 1 to {SUITE_SIZE}, got {id}")))
    }
}

fn load(source: &Source) -> Result<(String, Instance), Failure> {
    match (&source.instance, source.suite_id) {
        (_, Some(id)) => Ok((format!("inst{}", check_suite_id(id)?), suite_instance(id))),
        (Some(path), None) => {
            let instance = parse_instance(&read(path)?).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
            let name = path.file_stem().map_or("instance".into(), |s| s.to_string_lossy().into_owned());
            Ok((name, instance))
        }
        (None, None) => Err(Failure::Input("no instance given".into())),
    }
}

fn bnp_config(opts: &SolveOpts) -> BnpConfig {
    BnpConfig {
        cg: CgConfig {
            pricing: PricingConfig {
                variant: opts.variant,
                columns: opts.columns.max(1),
                eval: EvalOptions {
                    penalize_trailing_stints: !opts.no_trailing_stints,
                },
                ..Default::default()
            },
            skip_heuristic: !opts.no_skip,
            workers: opts.workers.max(1),
            ..Default::default()
        },
        time_limit: Some(Duration::from_secs_f64(opts.time_limit.unwrap_or(3600.0))),
        mode: match opts.mode {
            ModeArg::Full => Mode::Full,
            ModeArg::Single => Mode::Single,
        },
    }
}

fn solve_row(name: &str, instance: &Instance, cfg: &BnpConfig) -> Result<(String, nurse_bnp::bnp::SolveOutcome), Failure> {
    let out = solve(instance, cfg).map_err(|e| Failure::Internal(e.to_string()))?;
    eprintln!(
        "{name}: UB {} LB {:.4} root {:.4} nodes {} {} in {:.2}s",
        out.upper_bound,
        out.lower_bound,
        out.root_lower_bound,
        out.nodes_explored,
        if out.proved { "proved" } else { "not proved" },
        out.elapsed.as_secs_f64()
    );
    Ok((solve_csv_row(name, cfg.mode, &out), out))
}

fn parse_variants(s: &str) -> Result<Vec<Variant>, Failure> {
    if s.eq_ignore_ascii_case("all") {
        Ok(Variant::ALL.to_vec())
    } else {
        Ok(vec![s.parse().map_err(Failure::Input)?])
    }
}

fn report_pricing(rows: &[PricingRow]) {
    let order = check_label_order(rows);
    for (sub, a, b) in &order.violations {
        eprintln!("{sub}: {a} extended more labels than {b}");
    }
    for (better, worse) in [(Variant::Dpp, Variant::Dpu), (Variant::Dppi, Variant::Dpp)] {
        if let Some((r, n)) = label_reduction(rows, better, worse) {
            eprintln!("{better} vs {worse}: {:.1}% fewer labels (geometric mean over {n})", 100.0 * r);
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Generate {
            nurses,
            weeks,
            units,
            seed,
            out,
        } => {
            if nurses == 0 || weeks == 0 || units == 0 {
                return Err(Failure::Input("nurses, weeks and units must be positive".into()));
            }
            let text = serialize_instance(&generate_instance(nurses, weeks, units, seed));
            match out {
                Some(path) => std::fs::write(&path, text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?,
                None => print!("{text}"),
            }
        }
        Command::Solve {
            source,
            opts,
            roster_out,
        } => {
            let (name, instance) = load(&source)?;
            let cfg = bnp_config(&opts);
            let (row, out) = solve_row(&name, &instance, &cfg)?;
            println!("{SOLVE_CSV_HEADER}");
            println!("{row}");
            if let Some(path) = roster_out {
                std::fs::write(&path, serialize_roster(&instance, &out.best_roster))
                    .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
            }
        }
        Command::Price {
            source,
            nurse,
            sub,
            variant,
            duals,
            time_limit,
        } => {
            let variants = parse_variants(&variant)?;
            let (label, instance, n) = match sub {
                Some(k) => {
                    let (instance, n) = sub_instance(check_suite_id(k)?);
                    (format!("Sub{k}"), instance, n)
                }
                None => {
                    let (name, instance) = load(&source)?;
                    let id = nurse.ok_or_else(|| Failure::Input("--nurse is required".into()))?;
                    let n = instance
                        .nurse_index(&id)
                        .ok_or_else(|| Failure::Input(format!("unknown nurse `{id}`")))?;
                    (format!("{name}:{id}"), instance, n)
                }
            };
            let duals = match duals {
                DualSpec::Zero => DualValues::zeros(&instance),
                DualSpec::Random(seed) => random_duals(&instance, seed, RANDOM_DUAL_MAX),
            };
            let limit = Duration::from_secs_f64(time_limit);
            let rows = pricing_rows(&label, &instance, n, &duals, &variants, limit).map_err(input)?;
            print!("{}", pricing_csv(&rows));
            report_pricing(&rows);
        }
        Command::Validate { instance, roster } => {
            let inst = parse_instance(&read(&instance)?).map_err(input)?;
            let r = parse_roster(&inst, &read(&roster)?).map_err(input)?;
            let report = nurse_bnp::instance::validate_roster(&inst, &r, &EvalOptions::default()).map_err(input)?;
            print!("{}", report.to_csv(&inst));
            for v in &report.hard_violations {
                eprintln!("{v}");
            }
            eprintln!("objective {}", report.objective);
            if !report.is_feasible() {
                return Err(Failure::HardViolations);
            }
        }
        Command::Suite {
            pricing,
            ids,
            both_modes,
            opts,
        } => {
            let ids = if ids.is_empty() {
                (1..=SUITE_SIZE).collect()
            } else {
                ids.into_iter().map(check_suite_id).collect::<Result<Vec<_>, _>>()?
            };
            if pricing {
                let limit = Duration::from_secs_f64(opts.time_limit.unwrap_or(15.0));
                let mut all = Vec::new();
                for k in ids {
                    let (instance, n) = sub_instance(k);
                    let duals = DualValues::zeros(&instance);
                    let rows = pricing_rows(&format!("Sub{k}"), &instance, n, &duals, &Variant::ALL, limit)
                        .map_err(|e| Failure::Internal(e.to_string()))?;
                    all.extend(rows);
                }
                print!("{}", pricing_csv(&all));
                report_pricing(&all);
            } else {
                println!("{SOLVE_CSV_HEADER}");
                let mut cfg = bnp_config(&opts);
                let modes = if both_modes { vec![Mode::Full, Mode::Single] } else { vec![cfg.mode] };
                for id in ids {
                    let instance = suite_instance(id);
                    for &mode in &modes {
                        cfg.mode = mode;
                        let (row, _) = solve_row(&format!("inst{id}"), &instance, &cfg)?;
                        println!("{row}");
                    }
                }
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("NURSE_BNP_LOG", "warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{f}");
            ExitCode::from(f.code())
        }
    }
}
