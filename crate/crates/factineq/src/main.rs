use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use factineq::claims::verify_claim;
use factineq::harness::{
    exit_code, load_claim_file, run_all, search_counterexample, Registry, RunOptions,
};
use factineq::identity::{verify_identity, verify_telescope};
use factineq::numeric::{global_factorials, FACTORIAL_CAP_ENV};
use factineq::report::{render_table, to_csv, RangeReport, VerifyDocument};

/// Exact-arithmetic verifier for factorial-sum inequalities: sweeps the
/// registered identities, telescoping witnesses, and bound claims over a
/// range of n, reporting every exact counterexample.
#[derive(Parser)]
#[command(name = "factineq", version, about, max_term_width = 100)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep registered subjects over 1..=n-max and report verdicts
    Verify {
        /// Verify a single claim by id (e.g. app1, app6-printed)
        #[arg(long, conflicts_with_all = ["identity", "all"])]
        app: Option<String>,
        /// Verify a single identity by id (e.g. I1, I7p) plus its witness
        #[arg(long, conflicts_with = "all")]
        identity: Option<String>,
        /// Verify every registered subject (the default)
        #[arg(long)]
        all: bool,
        /// Smallest n to report on
        #[arg(long, default_value_t = 1)]
        n_min: u64,
        /// Largest n to verify
        #[arg(long, default_value_t = 200)]
        n_max: u64,
        /// Treat refuted printed variants as failures (exit 1)
        #[arg(long)]
        strict_printed: bool,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
        /// Write the report here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads for the sweep (default: one per core)
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Scan upward from n=1 for the first n where a subject fails
    Search {
        /// Identity or claim id (e.g. I2p, app1, user claims after `check`)
        subject_id: String,
        #[arg(long, default_value_t = 200)]
        n_max: u64,
    },
    /// Load a claim file and verify each of its claims
    Check {
        /// Line format: `claim <name> : sum <expr-in-k> (<=|>=) <expr-in-n>`
        file: PathBuf,
        #[arg(long, default_value_t = 200)]
        n_max: u64,
    },
    /// Print the registered identities and claims
    Registry {
        #[arg(long, value_enum, default_value_t = RegistryFormat::Table)]
        format: RegistryFormat,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
    Table,
}

#[derive(Clone, Copy, ValueEnum)]
enum RegistryFormat {
    Json,
    Table,
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, String> {
    match cli.command {
        Command::Verify { app, identity, all: _, n_min, n_max, strict_printed, format, out, workers } => {
            check_range(n_min, n_max)?;
            let registry = Registry::builtin();
            let opts = RunOptions { n_min, n_max, workers };
            let reports = if let Some(id) = app {
                let claim = registry
                    .claim(&id)
                    .ok_or_else(|| format!("unknown claim id `{id}`"))?;
                vec![verify_claim(claim, n_min, n_max)]
            } else if let Some(id) = identity {
                let identity = registry
                    .identity(&id)
                    .ok_or_else(|| format!("unknown identity id `{id}`"))?;
                let mut reports = vec![verify_identity(identity, n_min, n_max)];
                reports.extend(verify_telescope(identity, n_min, n_max));
                reports
            } else {
                run_all(&registry, &opts)
            };
            let rendered = match format {
                Format::Json => VerifyDocument { n_min, n_max, reports: reports.clone() }
                    .to_json_pretty(),
                Format::Csv => to_csv(&reports),
                Format::Table => render_table(&reports),
            };
            emit(rendered, out.as_deref())?;
            Ok(ExitCode::from(exit_code(&reports, strict_printed) as u8))
        }
        Command::Search { subject_id, n_max } => {
            check_range(1, n_max)?;
            let registry = Registry::builtin();
            match search_counterexample(&registry, &subject_id, n_max)
                .map_err(|e| e.to_string())?
            {
                Some(hit) => {
                    println!("first counterexample for {subject_id} at n={}", hit.n);
                    println!("  lhs = {} (~{})", hit.lhs, hit.lhs.decimal());
                    println!("  rhs = {} (~{})", hit.rhs, hit.rhs.decimal());
                    Ok(ExitCode::from(1))
                }
                None => {
                    println!("no counterexample for {subject_id} with n <= {n_max}");
                    Ok(ExitCode::SUCCESS)
                }
            }
        }
        Command::Check { file, n_max } => {
            check_range(1, n_max)?;
            let claims = load_claim_file(&file).map_err(|e| e.to_string())?;
            if claims.is_empty() {
                return Err(format!("{} contains no claims", file.display()));
            }
            let reports: Vec<RangeReport> =
                claims.iter().map(|c| verify_claim(c, 1, n_max)).collect();
            print!("{}", render_table(&reports));
            Ok(ExitCode::from(exit_code(&reports, false) as u8))
        }
        Command::Registry { format } => {
            let registry = Registry::builtin();
            match format {
                RegistryFormat::Json => {
                    let doc = serde_json::json!({
                        "identities": registry.identities.iter().map(|i| i.doc()).collect::<Vec<_>>(),
                        "claims": registry.claims.iter().map(|c| c.doc()).collect::<Vec<_>>(),
                    });
                    println!("{}", serde_json::to_string_pretty(&doc).expect("registry serialization"));
                }
                RegistryFormat::Table => print_registry(&registry),
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

/// Range sanity shared by all sweeps: 1 <= n_min <= n_max, and the largest
/// factorial a sweep can touch, (n_max + 2)!, must stay within the cap.
fn check_range(n_min: u64, n_max: u64) -> Result<(), String> {
    if n_min < 1 || n_max < 1 {
        return Err("the range must start at 1 (n-min and n-max must be positive)".into());
    }
    if n_min > n_max {
        return Err(format!("n-min {n_min} exceeds n-max {n_max}"));
    }
    let cap = global_factorials().cap();
    if n_max.saturating_add(2) > cap {
        return Err(format!(
            "n-max {n_max} needs ({n_max}+2)! but the factorial cap is {cap}; raise {FACTORIAL_CAP_ENV}"
        ));
    }
    Ok(())
}

fn emit(text: String, out: Option<&std::path::Path>) -> Result<(), String> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn print_registry(registry: &Registry) {
    println!("identities:");
    for identity in &registry.identities {
        let doc = identity.doc();
        let witness = match &doc.witness {
            Some(w) => format!("  [witness c={}, g(k)={}]", w.c, w.g),
            None => String::new(),
        };
        println!(
            "  {:<4} {:<10} sum({}) = {}{}",
            doc.id,
            format!("{:?}", identity.provenance).to_lowercase(),
            doc.summand,
            doc.closed_form,
            witness
        );
        if let Some(note) = &doc.note {
            println!("       note: {note}");
        }
    }
    println!("claims:");
    for claim in &registry.claims {
        let doc = claim.doc();
        println!(
            "  {:<15} {:<10} sum({}) {} {}",
            doc.id,
            format!("{:?}", claim.variant).to_lowercase(),
            doc.summand,
            claim.relation,
            doc.rhs
        );
        if let Some(note) = &doc.note {
            println!("       note: {note}");
        }
    }
}
