use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sims_audit::fixture::Credential;
use sims_audit::report::{Category, Format};
use sims_audit::seed::{self, SeedPlan};
use sims_audit::{AuditError, Client, Fixture};

/// Probes a running student information service for the OWASP Top 10
/// (2017). A probe PASSES when the attack it performs is repelled.
///
/// The probes create, edit and fail to log in to records. Point them only
/// at a sacrificial instance provisioned with `audit seed`.
#[derive(Parser)]
#[command(name = "audit", version, args_conflicts_with_subcommands = true)]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Subcommand)]
enum Command {
    /// Provision a fresh instance over HTTP and write the fixture file.
    Seed(SeedArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Base URL of the target, e.g. http://127.0.0.1:8080
    #[arg(long)]
    target: Option<String>,
    /// Credentials fixture written by `audit seed`.
    #[arg(long)]
    fixture: Option<PathBuf>,
    /// Report format.
    #[arg(long, default_value = "text")]
    format: Format,
    /// Comma-separated categories to run, e.g. A1,A5. Defaults to all.
    #[arg(long, value_delimiter = ',')]
    category: Vec<String>,
    /// Acknowledges that the probes mutate the target.
    #[arg(long = "i-know-this-is-destructive")]
    destructive: bool,
}

#[derive(Args)]
struct SeedArgs {
    #[arg(long)]
    target: String,
    #[arg(long)]
    admin_email: String,
    #[arg(long, env = "SIMS_ADMIN_PASSWORD")]
    admin_password: String,
    /// The target's storage file, recorded in the fixture.
    #[arg(long)]
    storage: PathBuf,
    /// Where to write the fixture.
    #[arg(long)]
    out: PathBuf,
}

const OPERATIONAL: u8 = 2;

fn fail(message: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {message}");
    ExitCode::from(OPERATIONAL)
}

fn categories(requested: &[String]) -> Result<Vec<Category>, String> {
    let all = [
        Category::A1,
        Category::A2,
        Category::A3,
        Category::A4,
        Category::A5,
        Category::A6,
        Category::A7,
        Category::A8,
        Category::A10,
    ];
    if requested.is_empty() {
        return Ok(all.to_vec());
    }
    requested
        .iter()
        .map(|text| match Category::parse(text) {
            Some(Category::A9) => Err(
                "A9 is covered by the dependency advisory audit in CI, not by runtime probes"
                    .to_owned(),
            ),
            Some(c) => Ok(c),
            None => Err(format!("unknown category {text:?}")),
        })
        .collect()
}

fn run(args: RunArgs) -> ExitCode {
    let (Some(target), Some(fixture)) = (args.target, args.fixture) else {
        return fail("--target and --fixture are required");
    };
    if !args.destructive {
        return fail(
            "the probes mutate the target; rerun against a sacrificial instance with --i-know-this-is-destructive",
        );
    }
    let categories = match categories(&args.category) {
        Ok(c) => c,
        Err(e) => return fail(e),
    };
    let fixture = match Fixture::load(&fixture) {
        Ok(f) => f,
        Err(e) => return fail(e),
    };
    match sims_audit::audit(&target, &fixture, &categories) {
        Ok(report) => {
            println!("{}", report.render(args.format));
            if report.all_passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => fail(e),
    }
}

fn seed(args: SeedArgs) -> Result<(), AuditError> {
    let client = Client::new(&args.target)?;
    let plan = SeedPlan::new(
        Credential {
            email: args.admin_email,
            password: args.admin_password,
        },
        args.storage,
    );
    let outcome = seed::run(&client, &plan)?;
    outcome.fixture.save(&args.out).map_err(|e| {
        AuditError::FixtureInvalid(format!("cannot write {}: {e}", args.out.display()))
    })?;
    println!(
        "fixture written to {} in {:.1?}",
        args.out.display(),
        outcome.elapsed
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(OPERATIONAL)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match cli.command {
        Some(Command::Seed(args)) => match seed(args) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => fail(e),
        },
        None => run(cli.run),
    }
}
