//! `spinon`: tabulate spinon kinematics, |A₋|², g and the two- and
//! four-spinon structure factors as CSV or JSON.

mod commands;
mod table;

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::parser::ValueSource;
use clap::{ArgMatches, Args, CommandFactory, FromArgMatches, Parser};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};
use spinon_core::aminus::{TABLE_STEP, TABLE_X_MAX};
use spinon_core::selfcheck;
use spinon_core::{AminusTable, DsfContext, Error, QuadratureSpec, ResidueSpec};

use commands::Command;
use table::{Format, Provenance, Table};

#[derive(Parser, Debug)]
#[command(name = "spinon", version, about = "Exact n-spinon dynamic structure factor of the Heisenberg chain")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Args, Serialize, Deserialize, Debug, Clone)]
struct Global {
    /// JSON file holding any of the options by their snake_case names, and
    /// optionally "command". Options given as flags take precedence.
    #[arg(long, global = true)]
    #[serde(skip)]
    config: Option<PathBuf>,
    /// Output file; standard output when absent.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv, global = true)]
    format: Format,
    /// Worker threads.
    #[arg(long, default_value_t = default_threads(), global = true)]
    threads: usize,
    #[arg(long, default_value_t = QuadratureSpec::default().abs_tol, global = true)]
    abs_tol: f64,
    #[arg(long, default_value_t = QuadratureSpec::default().rel_tol, global = true)]
    rel_tol: f64,
    #[arg(long, default_value_t = QuadratureSpec::default().max_subdivisions, global = true)]
    max_subdivisions: usize,
    #[arg(long, default_value_t = QuadratureSpec::default().tail_truncation, global = true)]
    tail_truncation: usize,
    /// Deepest residue shell summed for g.
    #[arg(long, default_value_t = ResidueSpec::default().m_max, global = true)]
    m_max: usize,
    #[arg(long, default_value_t = ResidueSpec::default().tail_tol, global = true)]
    tail_tol: f64,
    #[arg(long, default_value_t = ResidueSpec::default().consecutive_small, global = true)]
    consecutive_small: usize,
}

fn default_threads() -> usize {
    std::thread::available_parallelism().map_or(1, usize::from)
}

impl Global {
    fn quad(&self) -> QuadratureSpec {
        QuadratureSpec {
            abs_tol: self.abs_tol,
            rel_tol: self.rel_tol,
            max_subdivisions: self.max_subdivisions,
            tail_truncation: self.tail_truncation,
        }
    }

    fn residue(&self) -> ResidueSpec {
        ResidueSpec { m_max: self.m_max, tail_tol: self.tail_tol, consecutive_small: self.consecutive_small }
    }
}

#[derive(Debug)]
enum Failure {
    Core(Error),
    Usage(String),
    Io(String),
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Core(e) => e.exit_code() as u8,
            Failure::Usage(_) | Failure::Io(_) => 1,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Core(e) => write!(f, "{e}"),
            Failure::Usage(m) => write!(f, "invalid configuration: {m}"),
            Failure::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

type Outcome<T> = std::result::Result<T, Failure>;

fn parse(argv: &[String]) -> std::result::Result<(Cli, ArgMatches), clap::Error> {
    let matches = Cli::command().try_get_matches_from(argv)?;
    let cli = Cli::from_arg_matches(&matches)?;
    Ok((cli, matches))
}

fn read_config(path: &Path) -> Outcome<Map<String, Value>> {
    let file = File::open(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    match serde_json::from_reader(BufReader::new(file)) {
        Ok(Value::Object(m)) => Ok(m),
        Ok(_) => Err(Failure::Usage(format!("{} must hold a JSON object", path.display()))),
        Err(e) => Err(Failure::Usage(format!("{}: {e}", path.display()))),
    }
}

/// Replace the fields of `parsed` that were not given as flags with the
/// values from `file`, recording which file keys were used.
fn overlay<T: Serialize + DeserializeOwned>(
    parsed: &T,
    file: &Map<String, Value>,
    from_flags: &dyn Fn(&str) -> bool,
    used: &mut BTreeSet<String>,
) -> Outcome<T> {
    let Value::Object(mut fields) = serde_json::to_value(parsed).map_err(|e| Failure::Usage(e.to_string()))? else {
        return Err(Failure::Usage("options do not serialise to an object".into()));
    };
    for (key, value) in file {
        if fields.contains_key(key) {
            used.insert(key.clone());
            if !from_flags(key) {
                fields.insert(key.clone(), value.clone());
            }
        }
    }
    serde_json::from_value(Value::Object(fields)).map_err(|e| Failure::Usage(e.to_string()))
}

fn merge(cli: Cli, matches: &ArgMatches) -> Outcome<(Global, Command)> {
    let file = match &cli.global.config {
        Some(p) => read_config(p)?,
        None => Map::new(),
    };
    let command = cli.command.ok_or_else(|| Failure::Usage("no command given".into()))?;
    if let Some(named) = file.get("command") {
        if named.as_str() != Some(command.name()) {
            return Err(Failure::Usage(format!("config names command {named}, but `{}` was run", command.name())));
        }
    }
    let sub = matches.subcommand_matches(command.name());
    let from_flags = |id: &str| {
        let given = |m: &ArgMatches| {
            m.try_get_raw(id).is_ok_and(|v| v.is_some()) && m.value_source(id) == Some(ValueSource::CommandLine)
        };
        given(matches) || sub.is_some_and(given)
    };
    let mut used = BTreeSet::from(["command".to_string()]);
    let mut global = overlay(&cli.global, &file, &from_flags, &mut used)?;
    global.config = cli.global.config.clone();
    let command = match command {
        Command::Dispersion(a) => Command::Dispersion(overlay(&a, &file, &from_flags, &mut used)?),
        Command::Boundaries(a) => Command::Boundaries(overlay(&a, &file, &from_flags, &mut used)?),
        Command::Aminus(a) => Command::Aminus(overlay(&a, &file, &from_flags, &mut used)?),
        Command::Gfun(a) => Command::Gfun(overlay(&a, &file, &from_flags, &mut used)?),
        Command::Dsf2(a) => Command::Dsf2(overlay(&a, &file, &from_flags, &mut used)?),
        Command::Dsf4(a) => Command::Dsf4(overlay(&a, &file, &from_flags, &mut used)?),
        Command::Sumrule(a) => Command::Sumrule(overlay(&a, &file, &from_flags, &mut used)?),
        Command::Selfcheck(a) => Command::Selfcheck(overlay(&a, &file, &from_flags, &mut used)?),
    };
    let unknown: Vec<&String> = file.keys().filter(|k| !used.contains(*k)).collect();
    if !unknown.is_empty() {
        return Err(Failure::Usage(format!("unknown keys for `{}`: {unknown:?}", command.name())));
    }
    if global.threads == 0 {
        return Err(Failure::Usage("threads must be at least 1".into()));
    }
    Ok((global, command))
}

/// The resolved options that determine the output, and their SHA-256.
/// Output path and thread count do not change the numbers and are left out.
fn fingerprint(global: &Global, command: &Command) -> Outcome<(Value, String)> {
    let args = match command {
        Command::Dispersion(a) => serde_json::to_value(a),
        Command::Boundaries(a) => serde_json::to_value(a),
        Command::Aminus(a) => serde_json::to_value(a),
        Command::Gfun(a) => serde_json::to_value(a),
        Command::Dsf2(a) => serde_json::to_value(a),
        Command::Dsf4(a) => serde_json::to_value(a),
        Command::Sumrule(a) => serde_json::to_value(a),
        Command::Selfcheck(a) => serde_json::to_value(a),
    }
    .map_err(|e| Failure::Usage(e.to_string()))?;
    let mut g = serde_json::to_value(global).map_err(|e| Failure::Usage(e.to_string()))?;
    if let Value::Object(m) = &mut g {
        m.remove("output");
        m.remove("threads");
    }
    let config = json!({ "command": command.name(), "options": g, "arguments": args });
    let hash = hex::encode(Sha256::digest(config.to_string().as_bytes()));
    Ok((config, hash))
}

/// Context for the structure-factor commands. With SPINON_DSF_CACHE set, the
/// |A₋|² table is read from (or written to) that directory.
fn context(quad: QuadratureSpec, residue: ResidueSpec) -> Outcome<DsfContext> {
    let Some(dir) = std::env::var_os("SPINON_DSF_CACHE") else {
        if quad == QuadratureSpec::default() {
            return Ok(DsfContext::new(quad, residue)?);
        }
        let table = AminusTable::build(TABLE_X_MAX, TABLE_STEP, &quad)?;
        return Ok(DsfContext::with_table(Arc::new(table), quad, residue)?);
    };
    let dir = PathBuf::from(dir);
    let key = format!("{:?}", (TABLE_X_MAX, TABLE_STEP, quad));
    let name = format!("aminus-{}.csv", &hex::encode(Sha256::digest(key.as_bytes()))[..16]);
    let path = dir.join(name);
    let table = match File::open(&path) {
        Ok(f) => AminusTable::read_csv(BufReader::new(f))?,
        Err(_) => {
            let table = AminusTable::build(TABLE_X_MAX, TABLE_STEP, &quad)?;
            std::fs::create_dir_all(&dir)?;
            let tmp = path.with_extension(format!("tmp{}", std::process::id()));
            let mut out = BufWriter::new(File::create(&tmp)?);
            table.write_csv(&mut out)?;
            out.flush()?;
            drop(out);
            std::fs::rename(&tmp, &path)?;
            table
        }
    };
    Ok(DsfContext::with_table(Arc::new(table), quad, residue)?)
}

fn selfcheck_run(global: &Global) -> Outcome<bool> {
    let lines = selfcheck::run_all();
    let mut text = String::new();
    for l in &lines {
        text.push_str(&format!("{l}\n"));
    }
    emit(global, |out| out.write_all(text.as_bytes()))?;
    Ok(lines.iter().all(|l| l.passed))
}

fn emit(global: &Global, write: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> Outcome<()> {
    match &global.output {
        Some(p) => {
            let file = File::create(p).map_err(|e| Failure::Io(format!("{}: {e}", p.display())))?;
            let mut out = BufWriter::new(file);
            write(&mut out)?;
            out.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut out = stdout.lock();
            write(&mut out)?;
            out.flush()?;
        }
    }
    Ok(())
}

fn run(global: &Global, command: &Command) -> Outcome<bool> {
    let (config, hash) = fingerprint(global, command)?;
    let (quad, residue) = (global.quad(), global.residue());
    quad.validate()?;
    residue.validate()?;
    let table: Table = match command {
        Command::Dispersion(a) => commands::dispersion(a)?,
        Command::Boundaries(a) => commands::boundaries_table(a)?,
        Command::Aminus(a) => commands::aminus(a, &quad)?,
        Command::Gfun(a) => commands::gfun(a, &residue)?,
        Command::Dsf2(a) => commands::dsf2(a, &context(quad, residue)?)?,
        Command::Dsf4(a) => commands::dsf4(a, &context(quad, residue)?)?,
        Command::Sumrule(a) => commands::sumrule(a, &context(quad, residue)?)?,
        Command::Selfcheck(_) => return selfcheck_run(global),
    };
    let meta = Provenance { command: command.name(), config: &config, hash: &hash };
    emit(global, |out| table.write(global.format, &meta, out))?;
    Ok(true)
}

fn main() -> ExitCode {
    let mut argv: Vec<String> = std::env::args().collect();
    let (mut cli, mut matches) = match parse(&argv) {
        Ok(p) => p,
        Err(e) if e.use_stderr() => {
            let _ = e.print();
            return ExitCode::from(1);
        }
        Err(e) => e.exit(),
    };
    // the command may come from the config file alone
    if cli.command.is_none() {
        let named = cli.global.config.as_deref().map(read_config).transpose().map(|file| {
            file.and_then(|m| m.get("command").and_then(Value::as_str).map(str::to_owned))
        });
        match named {
            Ok(Some(name)) => {
                argv.push(name);
                match parse(&argv) {
                    Ok(p) => (cli, matches) = p,
                    Err(e) => {
                        let _ = e.print();
                        return ExitCode::from(1);
                    }
                }
            }
            Ok(None) => {
                eprintln!("error: no command given (pass one, or name it as \"command\" in --config)");
                return ExitCode::from(1);
            }
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(e.exit_code());
            }
        }
    }
    let result = merge(cli, &matches).and_then(|(global, command)| {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(global.threads)
            .build()
            .map_err(|e| Failure::Usage(e.to_string()))?;
        pool.install(|| run(&global, &command))
    });
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
