//! `sqledit`: command-line front end for diffing, applying, explaining,
//! synthesizing and evaluating clause-level SQL edits.
//!
//! Exit codes: 0 success, 1 data error (unreadable or unparsable input),
//! 2 usage error, 3 domain failure (an edit that cannot be applied).

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sqledit::eval::{builtin_corrector, dataset_stats, load_predictions, load_test_set, Corrector, BUILTIN_CORRECTORS};
use sqledit::synth::{load_seeds, synthesize, SynthConfig};
use sqledit::{apply, diff, edit_size, explain, linearize, parse_linearized, parse_sql, render_sql, EditError};
use sqledit::{LinearizedEdit, Schema, SchemaSet};

#[derive(Parser)]
#[command(name = "sqledit", version, about = "Clause-level edits for correcting SQL parses")]
struct Cli {
    /// Schema JSON file or directory of schema files.
    #[arg(long, global = true, env = "SQLEDIT_SCHEMA_DIR")]
    schema: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the edit turning SOURCE into TARGET.
    Diff {
        source: PathBuf,
        target: PathBuf,
        #[command(flatten)]
        db: DbArg,
    },
    /// Apply a linearized edit to SOURCE and print the corrected SQL.
    Apply {
        source: PathBuf,
        edit: PathBuf,
        #[command(flatten)]
        db: DbArg,
    },
    /// Explain a query step by step, or annotate a JSONL example file.
    Explain {
        /// A `.sql` file, or a JSONL file with `db_id` and `initial_sql` fields.
        input: PathBuf,
        #[command(flatten)]
        db: DbArg,
        /// Print the explanation as JSON.
        #[arg(long)]
        json: bool,
        /// Write the output here instead of stdout.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Synthesize correction examples from gold seeds.
    Synth(SynthArgs),
    /// Score a corrector on a test set.
    Eval(EvalArgs),
    /// Edit-size and length distributions of an example file.
    Stats {
        input: PathBuf,
        /// Also write the histograms as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Write the statistics here instead of stdout.
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Worker threads (default: one per core).
        #[arg(long)]
        workers: Option<usize>,
    },
}

#[derive(Args)]
struct DbArg {
    /// Database to resolve against when the schema path holds several.
    #[arg(long)]
    db: Option<String>,
}

#[derive(Args)]
struct SynthArgs {
    /// JSONL file of `{db_id, question, gold_sql}` seeds.
    #[arg(long)]
    seeds: PathBuf,
    /// JSON synthesis config; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Clones per seed.
    #[arg(short)]
    n: Option<usize>,
    /// Upper bound of the number of editors applied per clone.
    #[arg(long)]
    max_edits: Option<usize>,
    /// Random seed; required when the `CI` environment variable is set.
    #[arg(long)]
    seed: Option<u64>,
    /// Drop repeated initial parses of the same seed.
    #[arg(long)]
    dedup: bool,
    /// Emit at most this many examples.
    #[arg(long)]
    limit: Option<usize>,
    /// Write examples here instead of stdout.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Write run statistics as JSON.
    #[arg(long)]
    stats: Option<PathBuf>,
    /// Worker threads (default: one per core).
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args)]
struct EvalArgs {
    /// JSONL test set.
    #[arg(long)]
    test: PathBuf,
    /// Built-in corrector.
    #[arg(long, conflicts_with = "predictions", required_unless_present = "predictions")]
    corrector: Option<String>,
    /// JSONL predictions with `index` and `predicted_sql` or `predicted_edit`.
    #[arg(long)]
    predictions: Option<PathBuf>,
    /// Seed of randomized correctors.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the metrics report here instead of stdout.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Also write the breakdown tables as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Worker threads (default: one per core).
    #[arg(long)]
    workers: Option<usize>,
}

enum Failure {
    Data(String),
    Usage(String),
    Domain(String),
}

impl Failure {
    fn report(self) -> ExitCode {
        let (code, msg) = match self {
            Failure::Data(m) => (1, m),
            Failure::Usage(m) => (2, m),
            Failure::Domain(m) => (3, m),
        };
        eprintln!("sqledit: {msg}");
        ExitCode::from(code)
    }
}

type Result<T, E = Failure> = std::result::Result<T, E>;

fn data(context: impl std::fmt::Display) -> impl FnOnce(String) -> Failure {
    move |e| Failure::Data(format!("{context}: {e}"))
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))
}

fn write(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Data(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn schemas(path: &Option<PathBuf>) -> Result<SchemaSet> {
    let path = path
        .as_deref()
        .ok_or_else(|| Failure::Usage("no schema given; pass --schema or set SQLEDIT_SCHEMA_DIR".into()))?;
    if !path.exists() {
        return Err(Failure::Usage(format!("schema path {} does not exist", path.display())));
    }
    let set = SchemaSet::load(path).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))?;
    if set.is_empty() {
        return Err(Failure::Data(format!("no schemas found in {}", path.display())));
    }
    Ok(set)
}

fn pick<'a>(set: &'a SchemaSet, db: &DbArg) -> Result<&'a Schema> {
    match &db.db {
        Some(id) => set
            .get(id)
            .ok_or_else(|| Failure::Usage(format!("unknown database `{id}`"))),
        None if set.len() == 1 => Ok(set.iter().next().expect("one schema")),
        None => Err(Failure::Usage("several schemas loaded; choose one with --db".into())),
    }
}

fn require(paths: &[&Path]) -> Result<()> {
    for p in paths {
        if !p.is_file() {
            return Err(Failure::Usage(format!("{} is not a readable file", p.display())));
        }
    }
    Ok(())
}

fn pool(workers: Option<usize>) -> Result<rayon::ThreadPool> {
    if workers == Some(0) {
        return Err(Failure::Usage("--workers must be at least 1".into()));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.unwrap_or(0))
        .build()
        .map_err(|e| Failure::Usage(e.to_string()))
}

fn ci_mode() -> bool {
    std::env::var("CI").is_ok_and(|v| !v.is_empty() && v != "0" && v != "false")
}

fn cmd_diff(cli: &Cli, source: &Path, target: &Path, db: &DbArg) -> Result<()> {
    require(&[source, target])?;
    let set = schemas(&cli.schema)?;
    let schema = pick(&set, db)?;
    let a = parse_sql(&read(source)?, schema).map_err(|e| data(source.display())(e.to_string()))?;
    let b = parse_sql(&read(target)?, schema).map_err(|e| data(target.display())(e.to_string()))?;
    let d = diff(&a, &b).map_err(|e| Failure::Data(e.to_string()))?;
    let out = serde_json::json!({
        "edit": d,
        "linearized": linearize(&d, schema).to_string(),
        "edit_size": edit_size(&d),
    });
    println!("{}", serde_json::to_string_pretty(&out).expect("edit serializes"));
    Ok(())
}

fn cmd_apply(cli: &Cli, source: &Path, edit: &Path, db: &DbArg) -> Result<()> {
    require(&[source, edit])?;
    let set = schemas(&cli.schema)?;
    let schema = pick(&set, db)?;
    let q = parse_sql(&read(source)?, schema).map_err(|e| data(source.display())(e.to_string()))?;
    let lin = LinearizedEdit::parse(&read(edit)?).map_err(|e| data(edit.display())(e.to_string()))?;
    let d = parse_linearized(&lin, schema).map_err(|e| data(edit.display())(e.to_string()))?;
    match apply(&d, &q) {
        Ok(fixed) => {
            println!("{}", render_sql(&fixed));
            Ok(())
        }
        Err(e @ (EditError::InapplicableEdit(_) | EditError::InvalidResult(_))) => Err(Failure::Domain(e.to_string())),
        Err(e) => Err(Failure::Data(e.to_string())),
    }
}

fn cmd_explain(cli: &Cli, input: &Path, db: &DbArg, json: bool, output: Option<&Path>) -> Result<()> {
    require(&[input])?;
    let set = schemas(&cli.schema)?;
    let text = read(input)?;
    if input.extension().is_some_and(|e| e == "jsonl") {
        let mut out = String::new();
        for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let at = format!("{}:{}", input.display(), i + 1);
            let mut rec: serde_json::Map<String, serde_json::Value> =
                serde_json::from_str(line).map_err(|e| data(&at)(e.to_string()))?;
            let field = |k: &str| rec.get(k).and_then(|v| v.as_str()).map(str::to_string);
            let (Some(db_id), Some(sql)) = (field("db_id"), field("initial_sql")) else {
                return Err(Failure::Data(format!(
                    "{at}: expected string fields db_id and initial_sql"
                )));
            };
            let schema = set
                .get(&db_id)
                .ok_or_else(|| Failure::Data(format!("{at}: unknown database `{db_id}`")))?;
            let q = parse_sql(&sql, schema).map_err(|e| data(&at)(e.to_string()))?;
            let steps: Vec<String> = explain(&q, schema)
                .sentences()
                .into_iter()
                .map(str::to_string)
                .collect();
            rec.insert("explanation".into(), steps.into());
            out.push_str(&serde_json::Value::Object(rec).to_string());
            out.push('\n');
        }
        return write(output, &out);
    }
    let schema = pick(&set, db)?;
    let q = parse_sql(&text, schema).map_err(|e| data(input.display())(e.to_string()))?;
    let e = explain(&q, schema);
    let out = if json {
        format!(
            "{}\n",
            serde_json::to_string_pretty(&e).expect("explanation serializes")
        )
    } else {
        e.steps.iter().map(|s| format!("{}. {}\n", s.number, s.text)).collect()
    };
    write(output, &out)
}

fn cmd_synth(cli: &Cli, args: &SynthArgs) -> Result<()> {
    require(&[&args.seeds])?;
    if let Some(c) = &args.config {
        require(&[c])?;
    }
    if args.seed.is_none() && ci_mode() {
        return Err(Failure::Usage("--seed is required when CI is set".into()));
    }
    let set = schemas(&cli.schema)?;
    let mut config = match &args.config {
        Some(p) => serde_json::from_str::<SynthConfig>(&read(p)?).map_err(|e| data(p.display())(e.to_string()))?,
        None => SynthConfig::default(),
    };
    if let Some(n) = args.n {
        config.n = n;
    }
    if let Some(m) = args.max_edits {
        config.max_edits = m;
    }
    if let Some(s) = args.seed {
        config.seed = s;
    }
    if args.dedup {
        config.dedup = true;
    }
    if args.limit.is_some() {
        config.limit = args.limit;
    }
    let seeds = load_seeds(&read(&args.seeds)?, &set).map_err(|e| data(args.seeds.display())(e.to_string()))?;
    let out = pool(args.workers)?
        .install(|| synthesize(&seeds, &set, &config))
        .map_err(|e| match e {
            sqledit::SynthError::Config(_) | sqledit::SynthError::UnknownEditor(_) => Failure::Usage(e.to_string()),
            other => Failure::Data(other.to_string()),
        })?;
    write(args.output.as_deref(), &out.to_jsonl())?;
    if let Some(p) = &args.stats {
        let text = serde_json::to_string_pretty(&out.stats).expect("stats serialize");
        write(Some(p), &format!("{text}\n"))?;
    }
    eprintln!(
        "synthesized {} examples from {} seeds ({} clones, {} unchanged, {} exhausted, {} duplicate, {} over limit)",
        out.stats.emitted,
        out.stats.seeds,
        out.stats.clones,
        out.stats.dropped_unchanged,
        out.stats.dropped_exhausted,
        out.stats.dropped_duplicate,
        out.stats.truncated
    );
    Ok(())
}

fn cmd_eval(cli: &Cli, args: &EvalArgs) -> Result<()> {
    require(&[&args.test])?;
    if let Some(p) = &args.predictions {
        require(&[p])?;
    }
    let set = schemas(&cli.schema)?;
    let corrector: Box<dyn Corrector> = match (&args.corrector, &args.predictions) {
        (Some(name), _) => builtin_corrector(name, args.seed).ok_or_else(|| {
            Failure::Usage(format!(
                "unknown corrector `{name}`; choose one of {}",
                BUILTIN_CORRECTORS.join(", ")
            ))
        })?,
        (None, Some(p)) => Box::new(load_predictions(&read(p)?).map_err(|e| data(p.display())(e.to_string()))?),
        (None, None) => unreachable!("clap requires one of --corrector, --predictions"),
    };
    let testset = load_test_set(&read(&args.test)?, &set).map_err(|e| data(args.test.display())(e.to_string()))?;
    let report = pool(args.workers)?
        .install(|| sqledit::evaluate(corrector.as_ref(), &testset, &set))
        .map_err(|e| Failure::Data(e.to_string()))?;
    write(args.output.as_deref(), &format!("{}\n", report.to_json()))?;
    if let Some(p) = &args.csv {
        write(Some(p), &report.breakdowns_csv())?;
    }
    eprintln!(
        "{}: accuracy {:.4}, edit-down {:.4}, edit-up {:.4}, progress {:.4} over {} examples",
        report.corrector,
        report.correction_accuracy,
        report.edit_down,
        report.edit_up,
        report.progress,
        report.examples
    );
    Ok(())
}

fn cmd_stats(cli: &Cli, input: &Path, csv: Option<&Path>, output: Option<&Path>, workers: Option<usize>) -> Result<()> {
    require(&[input])?;
    let set = schemas(&cli.schema)?;
    let examples = load_test_set(&read(input)?, &set).map_err(|e| data(input.display())(e.to_string()))?;
    let stats = pool(workers)?
        .install(|| dataset_stats(&examples, &set))
        .map_err(|e| Failure::Data(e.to_string()))?;
    write(output, &format!("{}\n", stats.to_json()))?;
    if let Some(p) = csv {
        write(Some(p), &stats.to_csv())?;
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Diff { source, target, db } => cmd_diff(cli, source, target, db),
        Command::Apply { source, edit, db } => cmd_apply(cli, source, edit, db),
        Command::Explain {
            input,
            db,
            json,
            output,
        } => cmd_explain(cli, input, db, *json, output.as_deref()),
        Command::Synth(args) => cmd_synth(cli, args),
        Command::Eval(args) => cmd_eval(cli, args),
        Command::Stats {
            input,
            csv,
            output,
            workers,
        } => cmd_stats(cli, input, csv.as_deref(), output.as_deref(), *workers),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => f.report(),
    }
}
