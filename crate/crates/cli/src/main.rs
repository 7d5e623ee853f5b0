use std::collections::BTreeSet;
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use tla_core::assets;
use tla_core::bench::{self, BenchRow};
use tla_core::dsl::{parse, Script};
use tla_core::engine::{evaluate_with, materialize, EvalOptions, ResultTable, SortMode, View};
use tla_core::incremental::{apply_delta, run_incremental, CachedQuery, DeltaBatch, IncrementalError};
use tla_core::ingestion::{generate_mini, load, LoadedDatabase, MiniConfig, SchemaSpec};
use tla_core::oracle::{catalog, compare, eval_plan};

/// Typed linear-algebra query engine over columnar `.tbl` data.
#[derive(Parser)]
#[command(name = "tla", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a script and write the result as CSV.
    Run(RunArgs),
    /// Time queries with k-best-of-N runs.
    Bench(BenchArgs),
    /// Compare engine results with the nested-loop oracle.
    Verify(VerifyArgs),
    /// Bring a cached result up to date with appended rows.
    Incr(IncrArgs),
    /// Write a synthetic TPC-H style dataset.
    Generate(GenerateArgs),
    /// Write the five-order sample tables and schema.
    Sample {
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct DataArgs {
    /// Schema file; the bundled TPC-H schema when omitted.
    #[arg(long)]
    schema: Option<PathBuf>,
    /// Directory holding the `.tbl` files.
    #[arg(long, env = "TLA_DATA_DIR")]
    data: PathBuf,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct ScriptArgs {
    /// Bundled query name (q3, q4, q6, q11, q12, q12_low, q14).
    #[arg(long)]
    query: Option<String>,
    /// Script file.
    #[arg(long)]
    script: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    source: ScriptArgs,
    /// Result CSV; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Skip the algebraic rewrites.
    #[arg(long)]
    no_rewrite: bool,
    /// Row order: label, value or storage.
    #[arg(long, default_value = "label")]
    sort: SortMode,
    /// Also check the result against the oracle (bundled queries only).
    #[arg(long)]
    verify: bool,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    schema: Option<PathBuf>,
    /// Dataset directories, one CSV row per dataset and query.
    #[arg(long = "data", env = "TLA_DATA_DIR", required = true, num_args = 1.., value_delimiter = ',')]
    data: Vec<PathBuf>,
    /// Bundled query names.
    #[arg(long = "query", required = true, num_args = 1.., value_delimiter = ',')]
    queries: Vec<String>,
    /// Evaluations per query.
    #[arg(long, default_value_t = 10)]
    runs: usize,
    /// Also time the oracle, reported as `oracle:<query>`.
    #[arg(long)]
    oracle: bool,
    /// Timing CSV; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Bundled query names, or `all`.
    #[arg(long = "query", required = true, num_args = 1.., value_delimiter = ',')]
    queries: Vec<String>,
    /// Script to check in place of the bundled one; needs a single query.
    #[arg(long)]
    script: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
}

#[derive(Args)]
struct IncrArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    source: ScriptArgs,
    /// Directory holding the appended `.tbl` files.
    #[arg(long)]
    delta: PathBuf,
    /// Cached result; created from the base data when missing, rewritten after the update.
    #[arg(long)]
    cache: PathBuf,
    /// Result CSV; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "label")]
    sort: SortMode,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 300)]
    orders: usize,
    #[arg(long, default_value_t = 1800)]
    lineitems: usize,
}

/// Exit status for a verification that ran and found differences.
const VERIFY_FAILED: u8 = 1;
/// Exit status for usage, input and evaluation errors.
const ERROR: u8 = 2;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { ERROR } else { 0 });
        }
    };
    let outcome = match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Incr(a) => cmd_incr(a),
        Command::Generate(a) => cmd_generate(a),
        Command::Sample { out } => assets::write_sample(&out)
            .with_context(|| format!("writing {}", out.display()))
            .map(|()| true),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(VERIFY_FAILED),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(ERROR)
        }
    }
}

fn schema(path: Option<&Path>) -> Result<SchemaSpec> {
    let text = match path {
        Some(p) => std::fs::read_to_string(p).with_context(|| format!("cannot read {}", p.display()))?,
        None => assets::TPCH_SCHEMA.to_string(),
    };
    Ok(SchemaSpec::parse(&text)?)
}

fn bundled(name: &str) -> Result<&'static str> {
    assets::query_script(name)
        .with_context(|| format!("unknown query `{name}` (known: {})", assets::QUERY_NAMES.join(", ")))
}

fn script(src: &ScriptArgs) -> Result<Script> {
    let text = match (&src.query, &src.script) {
        (Some(q), _) => bundled(q)?.to_string(),
        (_, Some(p)) => std::fs::read_to_string(p).with_context(|| format!("cannot read {}", p.display()))?,
        _ => unreachable!("clap requires one source"),
    };
    parse(&text).map_err(|e| anyhow::anyhow!("{e}"))
}

fn load_for(spec: &SchemaSpec, dir: &Path, attrs: BTreeSet<String>) -> Result<LoadedDatabase> {
    Ok(load(spec, dir, &attrs)?)
}

fn write_table(table: &ResultTable, out: Option<&Path>) -> Result<()> {
    match out {
        Some(p) => {
            let f = File::create(p).with_context(|| format!("cannot create {}", p.display()))?;
            let mut w = BufWriter::new(f);
            table.write_csv(&mut w)?;
            w.flush()?;
        }
        None => table.write_csv(io::stdout().lock())?,
    }
    Ok(())
}

fn oracle_table(name: &str, db: &LoadedDatabase) -> Result<ResultTable> {
    let plan = catalog(name).with_context(|| format!("no oracle plan for `{name}`"))?;
    Ok(eval_plan(&plan, db)?)
}

fn cmd_run(a: RunArgs) -> Result<bool> {
    let spec = schema(a.data.schema.as_deref())?;
    let script = script(&a.source)?;
    let mut attrs = script.required_attributes();
    let plan = match (&a.source.query, a.verify) {
        (Some(q), true) => Some(catalog(q).with_context(|| format!("no oracle plan for `{q}`"))?),
        (None, true) => bail!("--verify needs a bundled --query"),
        _ => None,
    };
    if let Some(p) = &plan {
        attrs.extend(p.attributes());
    }
    let db = load_for(&spec, &a.data.data, attrs)?;
    let start = Instant::now();
    let env = evaluate_with(&script, &View::full(&db), EvalOptions { rewrite: !a.no_rewrite })?;
    let elapsed = start.elapsed();
    let result = env.into_result().expect("evaluation rejects empty scripts");
    let table = materialize(&result, &db, a.sort);
    write_table(&table, a.out.as_deref())?;
    eprintln!("{} rows in {:.3} ms", table.len(), elapsed.as_secs_f64() * 1e3);
    if let Some(p) = plan {
        let c = compare(&table, &eval_plan(&p, &db)?, a.tol);
        eprintln!("verify: {c}");
        return Ok(c.passed());
    }
    Ok(true)
}

fn cmd_bench(a: BenchArgs) -> Result<bool> {
    if a.runs < 3 {
        bail!("--runs must be at least 3, got {}", a.runs);
    }
    let spec = schema(a.schema.as_deref())?;
    let mut scripts = Vec::new();
    for q in &a.queries {
        scripts.push((q.clone(), parse(bundled(q)?).map_err(|e| anyhow::anyhow!("{q}: {e}"))?));
    }
    let mut rows = Vec::new();
    for dir in &a.data {
        let dataset = dir.file_name().map_or_else(|| dir.display().to_string(), |n| n.to_string_lossy().into_owned());
        let mut attrs = BTreeSet::new();
        for (q, s) in &scripts {
            attrs.extend(s.required_attributes());
            if a.oracle {
                attrs.extend(catalog(q).with_context(|| format!("no oracle plan for `{q}`"))?.attributes());
            }
        }
        let db = load_for(&spec, dir, attrs)?;
        for (q, s) in &scripts {
            let mut failure = None;
            let times = bench::k_best(a.runs, 3, || {
                if let Err(e) = evaluate_with(s, &View::full(&db), EvalOptions::default()) {
                    failure = Some(e);
                }
            });
            if let Some(e) = failure {
                return Err(e).with_context(|| format!("{q} on {dataset}"));
            }
            rows.push(BenchRow { query: q.clone(), dataset: dataset.clone(), times, mem_bytes: bench::peak_memory_bytes() });
            if a.oracle {
                let plan = catalog(q).expect("checked above");
                let times = bench::k_best(a.runs, 3, || {
                    eval_plan(&plan, &db).expect("attributes loaded for the plan");
                });
                rows.push(BenchRow {
                    query: format!("oracle:{q}"),
                    dataset: dataset.clone(),
                    times,
                    mem_bytes: bench::peak_memory_bytes(),
                });
            }
        }
    }
    match &a.out {
        Some(p) => {
            let f = File::create(p).with_context(|| format!("cannot create {}", p.display()))?;
            bench::write_csv(&rows, BufWriter::new(f))?;
        }
        None => bench::write_csv(&rows, io::stdout().lock())?,
    }
    Ok(true)
}

fn cmd_verify(a: VerifyArgs) -> Result<bool> {
    let spec = schema(a.data.schema.as_deref())?;
    let names: Vec<String> = if a.queries.iter().any(|q| q == "all") {
        assets::QUERY_NAMES.iter().map(|s| s.to_string()).collect()
    } else {
        a.queries.clone()
    };
    let custom = match (&a.script, &names[..]) {
        (None, _) => None,
        (Some(p), [_]) => Some(std::fs::read_to_string(p).with_context(|| format!("cannot read {}", p.display()))?),
        (Some(_), _) => bail!("--script checks exactly one query"),
    };
    let mut scripts = Vec::new();
    let mut attrs = BTreeSet::new();
    for q in &names {
        let text = match &custom {
            Some(t) => t.as_str(),
            None => bundled(q)?,
        };
        let s = parse(text).map_err(|e| anyhow::anyhow!("{q}: {e}"))?;
        attrs.extend(s.required_attributes());
        attrs.extend(catalog(q).with_context(|| format!("no oracle plan for `{q}`"))?.attributes());
        scripts.push((q, s));
    }
    let db = load_for(&spec, &a.data.data, attrs)?;
    let mut ok = true;
    for (q, s) in scripts {
        let result = evaluate_with(&s, &View::full(&db), EvalOptions::default())?
            .into_result()
            .expect("evaluation rejects empty scripts");
        let c = compare(&materialize(&result, &db, SortMode::Label), &oracle_table(q, &db)?, a.tol);
        println!("{q}: {c}");
        ok &= c.passed();
    }
    Ok(ok)
}

fn cmd_incr(a: IncrArgs) -> Result<bool> {
    let spec = schema(a.data.schema.as_deref())?;
    let script = script(&a.source)?;
    let mut db = load_for(&spec, &a.data.data, script.required_attributes())?;
    let mut cq = if a.cache.exists() {
        let f = File::open(&a.cache).with_context(|| format!("cannot read {}", a.cache.display()))?;
        CachedQuery::read(BufReader::new(f), script.clone(), &db)
            .with_context(|| format!("loading {}", a.cache.display()))?
    } else {
        CachedQuery::new(script.clone(), &db)?
    };
    let tables: Vec<&str> = spec.tables.iter().map(|t| t.name.as_str()).collect();
    let batch = DeltaBatch::read_dir(&spec, &a.delta, tables)?;
    match run_incremental(&mut cq, &mut db, &batch) {
        Ok(_) => eprintln!("applied {} appended rows", batch.row_count()),
        Err(IncrementalError::NotDeltaSafe { binding, reason }) => {
            eprintln!("`{binding}` is not delta-safe ({reason}); recomputing in full");
            apply_delta(&mut db, &batch)?;
            cq = CachedQuery::new(script, &db)?;
        }
        Err(e) => return Err(e.into()),
    }
    let f = File::create(&a.cache).with_context(|| format!("cannot create {}", a.cache.display()))?;
    let mut w = BufWriter::new(f);
    cq.write(&mut w)?;
    w.flush()?;
    let table = cq.table(&db, a.sort);
    write_table(&table, a.out.as_deref())?;
    eprintln!("{} rows", table.len());
    Ok(true)
}

fn cmd_generate(a: GenerateArgs) -> Result<bool> {
    generate_mini(&MiniConfig::new(a.seed, a.orders, a.lineitems), &a.out)
        .with_context(|| format!("writing {}", a.out.display()))?;
    Ok(true)
}
