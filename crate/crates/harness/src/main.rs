use std::path::PathBuf;
use std::process::ExitCode;

use antijam_core::bsum::{run_scheme, BsumOptions, Scheme};
use antijam_core::scene::{draw_scene, SceneConfig};
use antijam_harness::checks::{run_all, CheckProfile};
use antijam_harness::{parse_schemes, parse_values, run_experiment, ExperimentFile, ExperimentSpec, HarnessError};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "antijam", version, about = "Robust anti-jamming Stackelberg game solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep one scene parameter and write per-trial and mean rows as CSV.
    Run {
        /// JSON experiment file; command-line flags override it.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Swept parameter: cj, cs, n or xj.
        #[arg(long)]
        sweep: Option<String>,
        /// Comma-separated sweep values.
        #[arg(long)]
        values: Option<String>,
        /// Comma-separated schemes: robust, perfect, nonrobust, noris.
        #[arg(long)]
        schemes: Option<String>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the oracle suite at a reduced scale and print a pass/fail table.
    Verify {
        /// Use the full acceptance scale (long).
        #[arg(long)]
        full: bool,
    },
    /// Solve the default scene with the robust scheme and print the trace.
    Demo {
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match cli.command {
        Command::Run { config, sweep, values, schemes, trials, seed, out } => {
            match build_spec(config, sweep, values, schemes, trials, seed, out) {
                Ok(spec) => run(spec),
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(2)
                }
            }
        }
        Command::Verify { full } => verify(full),
        Command::Demo { seed } => demo(seed),
    }
}

fn build_spec(
    config: Option<PathBuf>,
    sweep: Option<String>,
    values: Option<String>,
    schemes: Option<String>,
    trials: Option<usize>,
    seed: Option<u64>,
    out: Option<PathBuf>,
) -> Result<ExperimentSpec, HarnessError> {
    let file = match &config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| HarnessError::Io { path: path.clone(), source: e })?;
            ExperimentFile::from_json_str(&text)?
        }
        None => ExperimentFile::default(),
    };
    let sweep = match (sweep, file.sweep) {
        (Some(s), _) => s.parse()?,
        (None, Some(s)) => s,
        (None, None) => return Err(HarnessError::Invalid("--sweep is required (cj, cs, n or xj)".into())),
    };
    let mut spec = ExperimentSpec::new(sweep);
    file.apply_to(&mut spec)?;
    spec.sweep = sweep;
    if file.values.is_none() {
        spec.values = sweep.default_values();
    }
    if let Some(v) = values {
        spec.values = parse_values(&v)?;
    }
    if let Some(s) = schemes {
        spec.schemes = parse_schemes(&s)?;
    }
    if let Some(t) = trials {
        spec.trials = t;
    }
    if let Some(s) = seed {
        spec.seed = s;
    }
    if out.is_some() {
        spec.out = out;
    }
    if spec.out.is_none() {
        spec.out = Some(PathBuf::from(format!("results_{sweep}.csv")));
    }
    spec.validate()?;
    Ok(spec)
}

fn run(spec: ExperimentSpec) -> ExitCode {
    match run_experiment(&spec) {
        Ok(out) => {
            let data = out.rows.iter().filter(|r| !r.is_mean()).count();
            println!(
                "wrote {} ({data} data rows, {} mean rows, {} failures)",
                spec.out.as_ref().map(|p| p.display().to_string()).unwrap_or_default(),
                out.rows.len() - data,
                out.failures.len()
            );
            for f in &out.failures {
                eprintln!("failed: {f}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn verify(full: bool) -> ExitCode {
    let profile = if full { CheckProfile::full() } else { CheckProfile::quick() };
    let outcomes = run_all(&profile);
    for o in &outcomes {
        println!("{o}");
    }
    if outcomes.iter().all(|o| o.passed) {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn demo(seed: u64) -> ExitCode {
    let cfg = SceneConfig { seed, ..SceneConfig::default() };
    let ch = match draw_scene(&cfg) {
        Ok(ch) => ch,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let (sol, eq) = match run_scheme(&ch, &cfg, Scheme::Robust, &BsumOptions::default()) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let r = &sol.report;
    println!("default scene, seed {seed}, N = {}, robust scheme", cfg.n);
    println!("iteration  leader objective");
    for (k, u) in r.utility_trace.iter().enumerate() {
        println!("{k:>9}  {u:.9}");
    }
    println!("termination: {:?} after {} outer iterations", r.termination, r.outer_iterations);
    println!("inner iterations: receive {:?}, reflection {:?}", r.receive_iterations, r.reflection_iterations);
    println!(
        "P_S = {:.6}, P_J = {:.6}, SINR = {:.6}, u_L = {:.6}, u_J = {:.6}, certified worst-case u_L = {:.6}",
        eq.leader.p_s, eq.jammer.p_j, eq.sinr, eq.u_l, eq.u_j, eq.u_l_worst
    );
    for w in &r.warnings {
        println!("warning: {w}");
    }
    ExitCode::SUCCESS
}
