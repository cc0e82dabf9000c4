mod table;

use std::net::{IpAddr, SocketAddr};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use ersmeta_core::crosswalk::{convert, Crosswalk, TargetFormat};
use ersmeta_core::forge::{extract, ForgeError};
use ersmeta_core::record::{from_json_with, from_turtle_with, to_json, Parsed, Strictness};
use ersmeta_core::schema::load_schema_file;
use ersmeta_core::validate::{completeness, validate_with};
use ersmeta_core::{bundled, SchemaDefinition};

#[derive(Parser)]
#[command(name = "ersmeta", version, about = "Extract, validate, score and convert research software metadata")]
struct Cli {
    /// Schema definition file; defaults to the bundled schema.
    #[arg(long, global = true, env = "ERSMETA_SCHEMA")]
    schema: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a record from a GitHub or GitLab repository.
    Extract {
        #[arg(long)]
        url: String,
        /// Output file; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Read recorded API responses from this directory.
        #[arg(long)]
        fixtures: Option<PathBuf>,
    },
    /// Check a record against the schema. Exits 1 when it is not conformant.
    Validate {
        #[arg(long = "in")]
        input: PathBuf,
        /// Input syntax; guessed from the file extension when absent.
        #[arg(long, value_enum)]
        format: Option<InputFormat>,
        /// Report undeclared elements as warnings instead of violations.
        #[arg(long)]
        lax: bool,
        /// Print the report as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Print filled and total element counts per tier and area.
    Score {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum)]
        format: Option<InputFormat>,
        #[arg(long)]
        json: bool,
    },
    /// Convert a record to another format.
    Convert {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum)]
        format: Option<InputFormat>,
        #[arg(long, value_enum)]
        to: Target,
        /// Output file; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the HTTP service.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: IpAddr,
        #[arg(long)]
        fixtures: Option<PathBuf>,
        /// Origin allowed to call the API; repeatable. Any origin when absent.
        #[arg(long = "allow-origin")]
        allow_origin: Vec<String>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum InputFormat {
    Json,
    Turtle,
}

#[derive(Clone, Copy, ValueEnum)]
enum Target {
    Codemeta,
    Cff,
}

#[derive(Debug, thiserror::Error)]
enum Failure {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Io(_) => 3,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.code())
        }
    }
}

fn run(cli: Cli) -> Result<u8, Failure> {
    let schema = load(cli.schema.as_deref())?;
    match cli.command {
        Command::Extract { url, out, fixtures } => run_extract(&schema, &url, out.as_deref(), fixtures),
        Command::Validate {
            input,
            format,
            lax,
            json,
        } => {
            let strictness = if lax { Strictness::Lax } else { Strictness::Strict };
            let parsed = read_record(&schema, &input, format)?;
            let report = validate_with(&parsed.record, &schema, strictness, &parsed.unknowns);
            if json {
                print!("{}", report.to_json_string());
            } else {
                print!("{}", table::findings(&report));
            }
            Ok(if report.conformant { 0 } else { 1 })
        }
        Command::Score { input, format, json } => {
            let parsed = read_record(&schema, &input, format)?;
            let report = completeness(&parsed.record, &schema);
            if json {
                print!("{}", report.to_json_string());
            } else {
                print!("{}", table::completeness(&report, &schema));
            }
            Ok(0)
        }
        Command::Convert {
            input,
            format,
            to,
            out,
        } => {
            let record = read_record(&schema, &input, format)?.record;
            let (format, crosswalk) = crosswalk(&schema, to)?;
            let (document, report) = convert(&record, &crosswalk, format).map_err(|e| Failure::Io(e.to_string()))?;
            write_output(out.as_deref(), &document)?;
            eprintln!(
                "{} mapped, {} dropped, {} synthesized, {} lossy",
                report.mapped.len(),
                report.dropped.len(),
                report.synthesized.len(),
                report.lossy.len()
            );
            for d in &report.dropped {
                eprintln!("  dropped {d}");
            }
            for l in &report.lossy {
                eprintln!("  lossy {}: {}", l.path, l.reason);
            }
            Ok(0)
        }
        Command::Serve {
            port,
            host,
            fixtures,
            allow_origin,
        } => {
            tracing_subscriber::fmt().with_writer(std::io::stderr).init();
            let config = ersmeta_service::Config {
                addr: SocketAddr::new(host, port),
                schema,
                fixtures,
                allow_origins: allow_origin,
            };
            let runtime = tokio::runtime::Runtime::new().map_err(|e| Failure::Io(e.to_string()))?;
            runtime.block_on(ersmeta_service::serve(config)).map_err(|e| match e {
                ersmeta_service::ServeError::Origin(_) => Failure::Usage(e.to_string()),
                ersmeta_service::ServeError::Io(_) => Failure::Io(e.to_string()),
            })?;
            Ok(0)
        }
    }
}

fn load(path: Option<&Path>) -> Result<Arc<SchemaDefinition>, Failure> {
    match path {
        None => Ok(bundled::ersmeta()),
        Some(p) => load_schema_file(p)
            .map(Arc::new)
            .map_err(|e| Failure::Io(format!("cannot load schema {}: {e}", p.display()))),
    }
}

fn run_extract(schema: &SchemaDefinition, url: &str, out: Option<&Path>, fixtures: Option<PathBuf>) -> Result<u8, Failure> {
    let transport = ersmeta_service::transport(fixtures);
    let ex = extract(url, transport.as_ref(), schema).map_err(|e| match e {
        ForgeError::MalformedUrl(_) | ForgeError::UnsupportedHost(_) => Failure::Usage(e.to_string()),
        _ => Failure::Io(e.to_string()),
    })?;
    let document = to_json(&ex.record, schema).map_err(|e| Failure::Io(e.to_string()))?;
    write_output(out, &document)?;
    let r = &ex.repository;
    eprintln!(
        "{}/{}/{}: {} elements extracted, {} fields skipped",
        r.host,
        r.owner,
        r.repo,
        ex.report.extracted.len(),
        ex.report.skipped.len()
    );
    for (element, field) in &ex.report.extracted {
        eprintln!("  {element} <- {field}");
    }
    for s in &ex.report.skipped {
        eprintln!("  skipped {} ({})", s.api_field, s.reason);
    }
    for n in &ex.report.notes {
        eprintln!("  note: {n}");
    }
    Ok(0)
}

fn read_record(schema: &SchemaDefinition, path: &Path, format: Option<InputFormat>) -> Result<Parsed, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Io(format!("cannot read {}: {e}", path.display())))?;
    let format = format.unwrap_or(match path.extension().and_then(|e| e.to_str()) {
        Some("ttl") => InputFormat::Turtle,
        _ => InputFormat::Json,
    });
    let parsed = match format {
        InputFormat::Json => from_json_with(&text, schema, Strictness::Lax),
        InputFormat::Turtle => from_turtle_with(&text, schema, Strictness::Lax),
    };
    parsed.map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn crosswalk(schema: &Arc<SchemaDefinition>, to: Target) -> Result<(TargetFormat, Crosswalk), Failure> {
    let set = bundled::schema_set(schema.clone());
    let (format, loaded) = match to {
        Target::Codemeta => (TargetFormat::CodemetaJson, bundled::crosswalk_codemeta(&set)),
        Target::Cff => (TargetFormat::CffYamlLike, bundled::crosswalk_cff(&set)),
    };
    loaded
        .map(|cw| (format, cw))
        .map_err(|e| Failure::Usage(format!("no {} crosswalk for schema `{}`: {e}", format.as_str(), schema.id)))
}

fn write_output(out: Option<&Path>, document: &str) -> Result<(), Failure> {
    match out {
        None => {
            print!("{document}");
            Ok(())
        }
        Some(p) => std::fs::write(p, document).map_err(|e| Failure::Io(format!("cannot write {}: {e}", p.display()))),
    }
}
