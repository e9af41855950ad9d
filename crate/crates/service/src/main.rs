use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use at_core::facts::parse_facts;
use at_core::profile::{TeacherProfile, TeachingUnit, Uid};
use at_core::rules::{infer, parse_rules, sort_canonical};
use at_core::store::{UserStore, DATA_DIR_ENV, DEFAULT_DATA_DIR};
use at_service::config::{load_assets, Config, RULES_ENV};
use at_service::{router, App, Service};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "at", version, about = "Generates teaching devices adapted to a teacher profile")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Store {
    /// Storage root.
    #[arg(long, env = DATA_DIR_ENV, default_value = DEFAULT_DATA_DIR)]
    data_dir: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Run the HTTP service (configured through AT_DATA_DIR, AT_PORT, AT_RULES).
    Serve,
    /// Generate the device of a stored unit and print its directory.
    Gen {
        #[command(flatten)]
        store: Store,
        /// Email the teacher registered with.
        #[arg(long)]
        user: String,
        #[arg(long)]
        unit: String,
        /// Rule file; defaults to config/adaptation.rules or the built-in rules.
        #[arg(long, env = RULES_ENV)]
        rules: Option<PathBuf>,
    },
    /// Run the rule engine on a fact file and print the directives.
    Infer {
        #[arg(long)]
        facts: PathBuf,
        #[arg(long)]
        rules: PathBuf,
    },
    /// Register a teacher and print the new uid.
    Register {
        #[command(flatten)]
        store: Store,
        #[arg(long)]
        name: String,
        #[arg(long)]
        surname: String,
        #[arg(long)]
        email: String,
        #[arg(long, env = "AT_PASSWORD")]
        password: String,
    },
    /// Store a teacher profile from a JSON file.
    Profile {
        #[command(flatten)]
        store: Store,
        #[arg(long)]
        user: String,
        #[arg(long)]
        file: PathBuf,
    },
    /// Store a teaching unit from a JSON file, replacing one with the same id.
    Unit {
        #[command(flatten)]
        store: Store,
        #[arg(long)]
        user: String,
        #[arg(long)]
        file: PathBuf,
    },
}

fn open_app(store: &Store, rules: Option<&Path>) -> Result<App> {
    let store = UserStore::open(&store.data_dir).with_context(|| format!("opening {}", store.data_dir.display()))?;
    Ok(App::new(store, load_assets(rules)?))
}

fn uid_of(app: &App, email: &str) -> Result<Uid> {
    match app.store.identity_by_email(email)? {
        Some(identity) => Ok(identity.uid),
        None => bail!("no teacher registered with email {email:?}"),
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn serve() -> Result<()> {
    let config = Config::from_env()?;
    let store = UserStore::open(&config.data_dir)?;
    let app = App::new(store, load_assets(config.rules.as_deref())?);
    let service = Arc::new(Service::start(app, config.session_ttl, config.jobs_dir(), None)?);
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(async {
        let listener = tokio::net::TcpListener::bind(("0.0.0.0", config.port))
            .await
            .with_context(|| format!("binding port {}", config.port))?;
        tracing::info!(port = config.port, data_dir = %config.data_dir.display(), "listening");
        axum::serve(listener, router(Arc::clone(&service)))
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await?;
        anyhow::Ok(())
    })?;
    service.jobs.shutdown();
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Serve => serve()?,
        Command::Gen { store, user, unit, rules } => {
            let app = open_app(&store, rules.as_deref())?;
            let uid = uid_of(&app, &user)?;
            let dir = app.generate(uid, &unit)?;
            println!("{}", dir.display());
        }
        Command::Infer { facts, rules } => {
            let text = std::fs::read_to_string(&facts).with_context(|| format!("reading {}", facts.display()))?;
            let facts_set = parse_facts(&text).with_context(|| format!("parsing {}", facts.display()))?;
            let text = std::fs::read_to_string(&rules).with_context(|| format!("reading {}", rules.display()))?;
            let rule_base = parse_rules(&text).with_context(|| format!("parsing {}", rules.display()))?;
            let inference = infer(&facts_set, &rule_base);
            for w in &inference.warnings {
                eprintln!("warning: {w}");
            }
            if inference.budget_exhausted {
                bail!("iteration budget exhausted");
            }
            let mut directives = inference.directives;
            sort_canonical(&mut directives);
            for d in directives {
                println!("{d}");
            }
        }
        Command::Register { store, name, surname, email, password } => {
            let app = open_app(&store, None)?;
            println!("{}", app.store.register(&name, &surname, &email, &password)?);
        }
        Command::Profile { store, user, file } => {
            let app = open_app(&store, None)?;
            let uid = uid_of(&app, &user)?;
            app.save_profile(uid, read_json::<TeacherProfile>(&file)?)?;
        }
        Command::Unit { store, user, file } => {
            let app = open_app(&store, None)?;
            let uid = uid_of(&app, &user)?;
            let unit: TeachingUnit = read_json(&file)?;
            match app.get_unit(uid, &unit.unit_id) {
                Ok(_) => app.update_unit(uid, &unit.unit_id, &unit)?,
                Err(_) => app.create_unit(uid, &unit)?,
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()),
        )
        .with_writer(std::io::stderr)
        .init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
