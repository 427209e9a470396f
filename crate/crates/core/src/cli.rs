//! Command-line interface.
//!
//! Exit codes: 0 success, 1 usage, 2 unreadable or malformed input, 3
//! budget exceeded, 4 unsupported SHACL, 5 graph is not a valid instance.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, Parser, Subcommand};

use crate::bench::{run_benchmark, write_csv, BenchConfig};
use crate::budget::Deadline;
use crate::consequence::{
    applicable_rules, existential_schema_consequence_within, simple_schema_consequence_within,
    Algorithm, ConsequenceOptions,
};
use crate::engine::{closure, InferenceRule};
use crate::error::{Error, Result};
use crate::format::{
    read_rules, read_rules_document, read_schema_document, read_turtle, write_file,
    write_schema_document, write_turtle, Prefixes, TurtleDocument,
};
use crate::rdf::Graph;
use crate::schema::{is_instance, violations, TriplestoreSchema};
use crate::shacl::{schema_to_shacl, translate_shapes};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;
pub const EXIT_UNSUPPORTED: i32 = 4;
pub const EXIT_INVALID: i32 = 5;

#[derive(Debug, Parser)]
#[command(
    name = "schemaforge",
    version,
    about = "Schema consequences of triplestore schemas under inference rules"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Schema of the closed instances of a schema under a rule set
    Consequence(ConsequenceArgs),
    /// Check that a graph is an instance of a schema
    Validate {
        #[arg(short, long)]
        schema: PathBuf,
        #[arg(short, long)]
        graph: PathBuf,
    },
    /// Close a graph under a rule set
    Closure {
        #[arg(short, long)]
        graph: PathBuf,
        #[arg(short, long)]
        rules: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Rules that fire on some instance of the schema
    Applicable {
        #[arg(short, long)]
        schema: PathBuf,
        #[arg(short, long)]
        rules: PathBuf,
    },
    /// Translate a SHACL document into a schema
    #[command(name = "shacl2schema")]
    ShaclToSchema {
        input: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Translate a schema into a SHACL document
    #[command(name = "schema2shacl")]
    SchemaToShacl {
        input: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Run a benchmark sweep
    Bench {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        csv: PathBuf,
    },
}

#[derive(Debug, Args)]
struct ConsequenceArgs {
    /// Drop existential rules
    #[arg(
        long,
        conflicts_with = "existential",
        required_unless_present = "existential"
    )]
    simple: bool,
    /// Keep the existential rules no closure can violate
    #[arg(long)]
    existential: bool,
    #[arg(long, default_value = "score")]
    algo: Algorithm,
    #[arg(short, long)]
    schema: PathBuf,
    #[arg(short, long)]
    rules: PathBuf,
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Wall-clock budget in seconds
    #[arg(long, default_value_t = 600.0)]
    timeout: f64,
}

/// Runs the command line `args` (program name first) and returns the exit
/// code. Results go to `out`, diagnostics to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(err, "{text}")
            } else {
                write!(out, "{text}")
            };
            return code;
        }
    };
    match execute(cli.command, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::UnsupportedShacl { .. } => EXIT_UNSUPPORTED,
        e if e.is_budget() => EXIT_BUDGET,
        Error::InvalidConfig(_) => EXIT_USAGE,
        _ => EXIT_PARSE,
    }
}

/// A schema file, or a SHACL document when the name ends in `.ttl`.
fn load_schema(path: &Path, err: &mut dyn Write) -> Result<(Prefixes, TriplestoreSchema)> {
    if path.extension().is_some_and(|e| e == "ttl") {
        load_schema_from_shacl(path, err)
    } else {
        read_schema_document(path)
    }
}

fn emit(text: &str, output: Option<&Path>, out: &mut dyn Write) -> Result<()> {
    match output {
        Some(p) => write_file(p, text),
        None => out.write_all(text.as_bytes()).map_err(|source| Error::Io {
            context: "cannot write output".into(),
            source,
        }),
    }
}

fn comment_graph(report: &mut String, g: &Graph) {
    for t in g.iter() {
        report.push_str(&format!("#     {t} .\n"));
    }
}

fn consequence(a: ConsequenceArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let (mut prefixes, s) = load_schema(&a.schema, err)?;
    let (rule_prefixes, rules): (_, Vec<InferenceRule>) = read_rules_document(&a.rules)?;
    prefixes.merge(&rule_prefixes);
    if a.timeout.is_nan() || a.timeout <= 0.0 {
        return Err(Error::InvalidConfig("--timeout must be positive".into()));
    }
    let deadline = Deadline::after(Duration::from_secs_f64(a.timeout));
    let opts = ConsequenceOptions::with_algorithm(a.algo);
    let mut report = String::new();
    let schema = if a.existential {
        let (schema, simple, ex) =
            existential_schema_consequence_within(&s, &rules, &opts, &deadline)?;
        report.push_str(&format!(
            "# applicable rules: {}\n",
            names(&simple.applicable)
        ));
        for e in &ex.retained {
            report.push_str(&format!("# retained: {e}\n"));
        }
        for w in &ex.violated {
            report.push_str(&format!("# violated: {} (via {})\n", w.rule, w.via_rule));
            report.push_str("#   witness instance:\n");
            comment_graph(&mut report, &w.instance);
            report.push_str("#   unmatched in its closure:\n");
            report.push_str(&format!(
                "#     {}\n",
                w.violation.mapping.apply_triple(&w.rule.consequent)
            ));
        }
        schema
    } else {
        let simple = simple_schema_consequence_within(&s, &rules, &opts, &deadline)?;
        report.push_str(&format!(
            "# applicable rules: {}\n",
            names(&simple.applicable)
        ));
        simple.schema
    };
    emit(
        &format!("{report}{}", write_schema_document(&prefixes, &schema)),
        a.output.as_deref(),
        out,
    )?;
    Ok(EXIT_OK)
}

fn names(set: &std::collections::BTreeSet<String>) -> String {
    if set.is_empty() {
        "none".into()
    } else {
        set.iter().cloned().collect::<Vec<_>>().join(", ")
    }
}

fn execute(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let io = |source| Error::Io {
        context: "cannot write output".into(),
        source,
    };
    match command {
        Command::Consequence(a) => consequence(a, out, err),
        Command::Validate { schema, graph } => {
            let (_, s) = load_schema(&schema, err)?;
            let g = read_turtle(&graph)?.graph;
            if is_instance(&g, &s) {
                writeln!(out, "valid").map_err(io)?;
                return Ok(EXIT_OK);
            }
            writeln!(out, "invalid").map_err(io)?;
            let idx = crate::schema::PatternIndex::new(s.graph(), s.no_literal());
            for t in g.iter().filter(|t| !idx.instantiates_some(t)) {
                writeln!(out, "# no pattern admits {t}").map_err(io)?;
            }
            for v in violations(s.existentials(), &g) {
                writeln!(
                    out,
                    "# {} violated at {}",
                    v.rule,
                    v.mapping.apply_triple(&v.rule.antecedent)
                )
                .map_err(io)?;
            }
            Ok(EXIT_INVALID)
        }
        Command::Closure {
            graph,
            rules,
            output,
        } => {
            let doc = read_turtle(&graph)?;
            let rules = read_rules(&rules)?;
            let closed = closure(&doc.graph, &rules);
            emit(
                &write_turtle(&TurtleDocument::new(doc.prefixes, closed)),
                output.as_deref(),
                out,
            )?;
            Ok(EXIT_OK)
        }
        Command::Applicable { schema, rules } => {
            let (_, s) = load_schema(&schema, err)?;
            let rules = read_rules(&rules)?;
            for name in applicable_rules(&s, &rules)? {
                writeln!(out, "{name}").map_err(io)?;
            }
            Ok(EXIT_OK)
        }
        Command::ShaclToSchema { input, output } => {
            let (prefixes, s) = load_schema_from_shacl(&input, err)?;
            emit(
                &write_schema_document(&prefixes, &s),
                output.as_deref(),
                out,
            )?;
            Ok(EXIT_OK)
        }
        Command::SchemaToShacl { input, output } => {
            let (schema_prefixes, s) = read_schema_document(&input)?;
            let g = schema_to_shacl(&s)?;
            let mut prefixes = Prefixes::shacl();
            prefixes.merge(&schema_prefixes);
            emit(
                &write_turtle(&TurtleDocument::new(prefixes, g)),
                output.as_deref(),
                out,
            )?;
            Ok(EXIT_OK)
        }
        Command::Bench { config, csv } => {
            let mut cfg = BenchConfig::read(&config)?;
            cfg.apply_seed_override()?;
            let records = run_benchmark(&cfg, |r| {
                let _ = writeln!(
                    err,
                    "# {} {} |S^G|={} |S^E|={} {:.1} ms{}",
                    r.mode,
                    r.algo,
                    r.schema_size,
                    r.existential_count,
                    r.time_ms,
                    if r.timed_out { " (timed out)" } else { "" }
                );
            })?;
            let file = std::fs::File::create(&csv).map_err(|source| Error::Io {
                context: format!("cannot write {}", csv.display()),
                source,
            })?;
            write_csv(&records, file)?;
            Ok(EXIT_OK)
        }
    }
}

fn load_schema_from_shacl(
    path: &Path,
    err: &mut dyn Write,
) -> Result<(Prefixes, TriplestoreSchema)> {
    let doc = read_turtle(path)?;
    let t = translate_shapes(&doc.graph)?;
    for p in &t.uninstantiable {
        let _ = writeln!(err, "warning: no instance may use predicate {p}");
    }
    Ok((doc.prefixes, t.schema))
}
