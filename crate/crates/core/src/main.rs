use clap::{Args, Parser, Subcommand};
use php_contact::cli::{
    self, parse_config, parse_spec, render, resolve_output, CliError, Mode, FIGURE_LAMBDA1,
    FIGURE_SWEEP, OUT_DIR_ENV,
};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "php-contact", version, about = "Contact-distance bounds and simulation for Poisson hole processes")]
struct Cli {
    /// Worker threads for trials and grid evaluation (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the analytic curves on a radius grid.
    Bounds(Opts),
    /// Monte Carlo estimate of the contact-distance CDF.
    Simulate(Opts),
    /// Analytic curves plus Monte Carlo with a sandwich verdict.
    Compare(Opts),
    /// Run `compare` over the default figure sweeps for both reference cases.
    ReproduceFigs(FigOpts),
}

#[derive(Args, Default)]
struct Opts {
    /// `key = value` config file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Hole-center density, e.g. 10/km2.
    #[arg(long)]
    lambda1: Option<String>,
    /// Baseline density, e.g. 100/km2.
    #[arg(long)]
    lambda2: Option<String>,
    /// Hole radius, e.g. 100m.
    #[arg(long = "D", alias = "d")]
    d: Option<String>,
    #[arg(long)]
    rmin: Option<String>,
    #[arg(long)]
    rmax: Option<String>,
    /// Number of grid radii.
    #[arg(long)]
    count: Option<String>,
    /// Explicit comma-separated radii; overrides rmin/rmax/count.
    #[arg(long)]
    r: Option<String>,
    /// Reference point: r1 (independent) or r2 (hole center).
    #[arg(long)]
    case: Option<String>,
    /// Comma-separated curves: thm1, closed:N, thm2, ub, ub2, approx, mc.
    #[arg(long)]
    curves: Option<String>,
    #[arg(long)]
    trials: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// adaptive[:tail_prob] or fixed:<length>.
    #[arg(long)]
    window: Option<String>,
    #[arg(long)]
    confidence: Option<String>,
    #[arg(long)]
    rel_tol: Option<String>,
    #[arg(long)]
    abs_tol: Option<String>,
    /// csv or json.
    #[arg(long)]
    format: Option<String>,
    #[arg(long, short)]
    output: Option<String>,
}

impl Opts {
    fn pairs(&self) -> Vec<(String, String)> {
        let fields = [
            ("lambda1", &self.lambda1),
            ("lambda2", &self.lambda2),
            ("d", &self.d),
            ("rmin", &self.rmin),
            ("rmax", &self.rmax),
            ("count", &self.count),
            ("r", &self.r),
            ("case", &self.case),
            ("curves", &self.curves),
            ("trials", &self.trials),
            ("seed", &self.seed),
            ("window", &self.window),
            ("confidence", &self.confidence),
            ("rel_tol", &self.rel_tol),
            ("abs_tol", &self.abs_tol),
            ("format", &self.format),
            ("output", &self.output),
        ];
        fields
            .into_iter()
            .filter_map(|(k, v)| v.as_ref().map(|v| (k.to_string(), v.clone())))
            .collect()
    }
}

#[derive(Args)]
struct FigOpts {
    /// Output directory (default: $PHP_CONTACT_OUT_DIR, else the current directory).
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long, default_value = "10000")]
    trials: String,
    #[arg(long, default_value = "1")]
    seed: String,
    #[arg(long, default_value = "csv")]
    format: String,
}

fn write_output(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            std::fs::write(p, text)?;
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn run_one(mode: Mode, opts: &Opts) -> Result<i32, CliError> {
    let config = match &opts.config {
        Some(path) => parse_config(&std::fs::read_to_string(path)?)?,
        None => Vec::new(),
    };
    let (spec, warnings) = parse_spec(mode, &config, &opts.pairs())?;
    for w in warnings {
        eprintln!("warning: {w}");
    }
    eprintln!("resolved spec: {}", serde_json::to_string(&spec).expect("spec serializes"));
    let table = cli::run(mode, &spec)?;
    let name = match mode {
        Mode::Bounds => "bounds",
        Mode::Simulate => "simulate",
        Mode::Compare => "compare",
    };
    write_output(resolve_output(&spec, name).as_deref(), &render(&spec, &table))?;
    if let Some(v) = &table.verdict {
        eprintln!(
            "verdict: {} ({} of {} rows failed)",
            if v.pass { "pass" } else { "fail" },
            v.failed_rows,
            v.rows.len()
        );
    }
    Ok(cli::exit_code(&table))
}

fn reproduce_figs(opts: &FigOpts) -> Result<i32, CliError> {
    let dir = opts
        .out_dir
        .clone()
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    let mut code = cli::EXIT_OK;
    for (case, fig, rmax) in [("r1", "fig1", "500m"), ("r2", "fig2", "600m")] {
        for (lambda2, d) in FIGURE_SWEEP {
            let label = format!(
                "{fig}_{case}_lambda2-{}_d-{}",
                lambda2.trim_end_matches("/km2"),
                d
            );
            let path = dir.join(format!("{label}.{}", opts.format));
            let flags = Opts {
                lambda1: Some(FIGURE_LAMBDA1.into()),
                lambda2: Some(lambda2.into()),
                d: Some(d.into()),
                rmax: Some(rmax.into()),
                case: Some(case.into()),
                trials: Some(opts.trials.clone()),
                seed: Some(opts.seed.clone()),
                format: Some(opts.format.clone()),
                output: Some(path.display().to_string()),
                ..Opts::default()
            };
            eprintln!("{label}");
            code = code.max(run_one(Mode::Compare, &flags)?);
        }
    }
    Ok(code)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot configure thread pool: {e}");
            return ExitCode::from(cli::EXIT_USAGE as u8);
        }
    }
    let result = match &cli.command {
        Command::Bounds(o) => run_one(Mode::Bounds, o),
        Command::Simulate(o) => run_one(Mode::Simulate, o),
        Command::Compare(o) => run_one(Mode::Compare, o),
        Command::ReproduceFigs(o) => reproduce_figs(o),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
