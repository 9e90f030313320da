use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use kpplab::io::{parse_config, registry_list, run, EntryStatus, Kind, OUT_ENV};
use kpplab::Error;

/// Homogenization laboratory for KPP fronts in random media.
#[derive(Parser)]
#[command(name = "kpplab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a medium against the standing hypotheses.
    Validate(RunArgs),
    /// Solve from a region indicator and write snapshots.
    Simulate(RunArgs),
    /// Spreading speeds from passage-time ladders.
    Speed(RunArgs),
    /// Wulff shape from spreading speeds.
    Wulff(RunArgs),
    /// Virtual-linearity sandwich.
    Vlin(RunArgs),
    /// ε-sweep of the scaled solutions.
    Homogenize(RunArgs),
    /// List runs under the output root.
    List {
        #[arg(long, env = OUT_ENV)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Overrides the seed in the configuration.
    #[arg(long)]
    seed: Option<u64>,
    /// Output root; defaults to the configuration's `out`, then `runs`.
    #[arg(long, env = OUT_ENV)]
    out: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
    /// Comma-separated snapshot times for `simulate`.
    #[arg(long, value_delimiter = ',')]
    emit_snapshots: Vec<f64>,
}

fn error_json(e: &Error) -> String {
    let details = match e {
        Error::Config(list) => list.clone(),
        _ => Vec::new(),
    };
    serde_json::json!({ "error": e.kind(), "message": e.to_string(), "details": details }).to_string()
}

/// Fills in `kind` from the subcommand, or rejects a mismatch.
fn with_kind(text: &str, kind: Kind) -> Result<String, Error> {
    let mut table: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::Config(vec![e.message().to_string()]))?;
    match table.get("kind").and_then(|k| k.as_str()) {
        None => {
            table.insert("kind".into(), toml::Value::String(kind.name().into()));
        }
        Some(k) if k != kind.name() => {
            return Err(Error::Config(vec![format!(
                "kind: configuration is for `{k}` but the subcommand is `{}`",
                kind.name()
            )]))
        }
        Some(_) => {}
    }
    Ok(toml::to_string(&table).expect("table serializes"))
}

fn execute(kind: Kind, args: RunArgs) -> Result<bool, Error> {
    if let Some(n) = args.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(vec![format!("threads: {e}")]))?;
    }
    let text = std::fs::read_to_string(&args.config)?;
    let mut cfg = parse_config(&with_kind(&text, kind)?)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if !args.emit_snapshots.is_empty() {
        let mut times = args.emit_snapshots.clone();
        times.sort_by(f64::total_cmp);
        cfg.simulate.snapshots = times;
    }
    let root = args.out.or_else(|| cfg.out.clone()).unwrap_or_else(|| PathBuf::from("runs"));
    let rec = run(&cfg, &root, &mut |line| println!("{line}"))?;
    Ok(rec.passed())
}

fn list(out: &Path) -> Result<bool, Error> {
    for entry in registry_list(out)? {
        let name = entry.dir.file_name().map_or(String::new(), |n| n.to_string_lossy().into_owned());
        let status = match &entry.status {
            EntryStatus::Finished => "finished".to_string(),
            EntryStatus::Partial => "partial".to_string(),
            EntryStatus::Failed => "failed".to_string(),
            EntryStatus::Unreadable(e) => format!("unreadable ({e})"),
        };
        let summary = entry.record.as_ref().map_or(String::new(), |r| {
            let pass = if r.passed() { "pass" } else { "fail" };
            let metrics: Vec<String> = r.summary.iter().map(|(k, v)| format!("{k}={v:?}")).collect();
            format!(" {pass} {}", metrics.join(" "))
        });
        println!("{name} {status}{summary}");
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Validate(a) => execute(Kind::Validate, a),
        Command::Simulate(a) => execute(Kind::Simulate, a),
        Command::Speed(a) => execute(Kind::Speed, a),
        Command::Wulff(a) => execute(Kind::Wulff, a),
        Command::Vlin(a) => execute(Kind::Vlin, a),
        Command::Homogenize(a) => execute(Kind::Homogenize, a),
        Command::List { out } => list(&out.unwrap_or_else(|| PathBuf::from("runs"))),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("{}", error_json(&e));
            ExitCode::from(2)
        }
    }
}
