//! `fuzzint`: train, evaluate and self-check temporal knowledge bases.
//!
//! Exit status: 0 success, 1 a required satisfaction level or a check suite
//! failed, 2 bad input (unreadable file, parse or semantic error, bad flag).

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use fuzzint::kb::{self, report, tasks, Groundings, KnowledgeBase, TrainConfig};
use fuzzint::{verify, TNorm};

#[derive(Debug, Parser)]
#[command(name = "fuzzint", version, about = "Fuzzy temporal interval logic: train, evaluate, check")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Train a bundled task or a knowledge-base file and write a result document.
    Run(RunArgs),
    /// Run the verification suites and print a pass/fail table.
    Check(CheckArgs),
    /// Print constraint truth values at the initial groundings, without training.
    Eval(EvalArgs),
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
struct Source {
    /// Bundled task id (T1..T4).
    #[arg(long)]
    task: Option<String>,
    /// Knowledge-base file.
    #[arg(long)]
    kb: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct RunArgs {
    #[command(flatten)]
    source: Source,
    /// Adam steps [default: the task's budget, else 100].
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long, default_value_t = 0.1)]
    lr: f64,
    /// Seed for logits and scalars declared without `init`.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Softplus temperature [default: 1 / horizon].
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long, default_value_t = fuzzint::DEFAULT_DELTA_MIN)]
    delta_min: f64,
    /// Stop once satisfaction reaches this level [default: 0.99 for tasks, off otherwise].
    #[arg(long)]
    target: Option<f64>,
    /// Train for the full step budget even for tasks.
    #[arg(long, conflicts_with = "target")]
    no_early_stop: bool,
    /// Exit with status 1 when final satisfaction is below this level.
    #[arg(long)]
    require: Option<f64>,
    #[arg(long, default_value = "product")]
    t_norm: TNorm,
    /// Result JSON path [default: <out-dir>/<name>.json].
    #[arg(long)]
    out: Option<PathBuf>,
    /// Directory for the default result path.
    #[arg(long, env = "FUZZINT_OUT_DIR", default_value = ".")]
    out_dir: PathBuf,
    /// Also write membership curves as CSV next to the JSON.
    #[arg(long)]
    curves: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Fault {
    /// Drop the last vertex of every intersection polygon.
    Geometry,
}

#[derive(Debug, Args)]
struct CheckArgs {
    /// Cases per randomized suite [default: 1000 oracle pairs, 500 line pairs, 200 gradient configurations].
    #[arg(long)]
    cases: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, hide = true)]
    inject_fault: Option<Fault>,
}

#[derive(Debug, Args)]
#[group(id = "eval_source", required = true, multiple = false)]
struct EvalArgs {
    /// Knowledge-base file.
    kb: Option<PathBuf>,
    /// Bundled task id (T1..T4).
    #[arg(long)]
    task: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = fuzzint::DEFAULT_DELTA_MIN)]
    delta_min: f64,
}

enum Failure {
    Threshold(String),
    Input(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Input(e)
    }
}

struct Loaded {
    kb: KnowledgeBase,
    task: Option<&'static tasks::Task>,
    /// Used in the result document and for default file names.
    name: String,
    label: String,
}

fn load(task: Option<&str>, path: Option<&Path>) -> anyhow::Result<Loaded> {
    if let Some(id) = task {
        let t = tasks::task(id).ok_or_else(|| {
            let known: Vec<&str> = tasks::TASKS.iter().map(|t| t.id).collect();
            anyhow!("unknown task `{id}` (known: {})", known.join(", "))
        })?;
        return Ok(Loaded {
            kb: t.knowledge_base(),
            task: Some(t),
            name: t.id.to_ascii_lowercase(),
            label: format!("task {}", t.id),
        });
    }
    let path = path.expect("clap requires a task or a file");
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let kb = kb::parse_kb(&text).map_err(|e| anyhow!("{}:{e}", path.display()))?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "result".to_owned());
    Ok(Loaded {
        kb,
        task: None,
        name,
        label: path.display().to_string(),
    })
}

fn run(args: RunArgs) -> Result<(), Failure> {
    let loaded = load(args.source.task.as_deref(), args.source.kb.as_deref())?;
    let base = loaded.task.map(|t| t.config()).unwrap_or_default();
    let target = if args.no_early_stop { None } else { args.target.or(base.target) };
    let cfg = TrainConfig {
        steps: args.steps.unwrap_or(base.steps),
        lr: args.lr,
        seed: args.seed,
        beta: args.beta,
        delta_min: args.delta_min,
        target,
        t_norm: args.t_norm,
        ..base
    };
    let kb = &loaded.kb;
    let init = Groundings::initial(kb, cfg.seed, cfg.horizon_for(kb));
    let trained = kb::train(kb, &init, &cfg).map_err(|e| anyhow!("{}: {e}", loaded.label))?;
    let doc = report::result_document(kb, &trained, &cfg, loaded.task.map(|t| t.id), &loaded.label);

    let out = args.out.unwrap_or_else(|| args.out_dir.join(format!("{}.json", loaded.name)));
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    }
    let json = serde_json::to_string_pretty(&doc).context("serializing the result document")?;
    fs::write(&out, json + "\n").with_context(|| format!("cannot write {}", out.display()))?;

    println!(
        "{}: {} steps{}, satisfaction {:.4}",
        loaded.label,
        doc.steps_run,
        if doc.early_stopped { " (early stop)" } else { "" },
        doc.satisfaction
    );
    for c in &doc.constraints {
        println!("  {:.4}  {}", c.truth, c.text);
    }
    for e in doc.events.iter().filter(|e| e.trainable) {
        println!("  event {} = {} happ {:.4}", e.name, e.interval, e.happ);
    }
    for s in doc.scalars.iter().filter(|s| s.trainable) {
        println!("  scalar {} = {}", s.name, s.value);
    }
    println!("wrote {}", out.display());
    if args.curves {
        let csv_path = out.with_extension("csv");
        let csv = report::membership_csv(kb, &trained.groundings, cfg.horizon_for(kb));
        fs::write(&csv_path, csv).with_context(|| format!("cannot write {}", csv_path.display()))?;
        println!("wrote {}", csv_path.display());
    }

    match args.require {
        Some(level) if doc.satisfaction < level => Err(Failure::Threshold(format!(
            "satisfaction {:.4} is below the required {level}",
            doc.satisfaction
        ))),
        _ => Ok(()),
    }
}

fn check(args: CheckArgs) -> Result<(), Failure> {
    let mut cfg = verify::CheckConfig {
        seed: args.seed,
        ..Default::default()
    };
    if let Some(n) = args.cases {
        if n == 0 {
            return Err(anyhow!("--cases must be positive").into());
        }
        cfg = cfg.with_cases(n);
    }
    let area: &verify::AreaFn = match args.inject_fault {
        Some(Fault::Geometry) => &verify::faulty_area,
        None => &verify::closed_form_area,
    };
    let reports = verify::run_all(&cfg, area);
    for r in &reports {
        println!("{r}");
    }
    println!(
        "      f32 d/dx at distance 100: beta=1 gives {:e}, beta=1/100 gives {:e}",
        verify::sigmoid_f32(-100.0, 1.0),
        verify::sigmoid_f32(-100.0, 0.01)
    );
    let failed = reports.iter().filter(|r| !r.passed()).count();
    if failed > 0 {
        return Err(Failure::Threshold(format!("{failed} of {} suites failed", reports.len())));
    }
    println!("all {} suites passed", reports.len());
    Ok(())
}

fn eval(args: EvalArgs) -> Result<(), Failure> {
    let loaded = load(args.task.as_deref(), args.kb.as_deref())?;
    let kb = &loaded.kb;
    let cfg = TrainConfig {
        seed: args.seed,
        delta_min: args.delta_min,
        ..Default::default()
    };
    let g = Groundings::initial(kb, cfg.seed, cfg.horizon_for(kb));
    let ev = kb::evaluate(kb, &g, &cfg).map_err(|e| anyhow!("{}: {e}", loaded.label))?;
    for (c, t) in kb.constraints.iter().zip(&ev.constraints) {
        println!("{t:.6}  {}", c.text);
    }
    println!("satisfaction {:.6}", ev.satisfaction);
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => run(a),
        Command::Check(a) => check(a),
        Command::Eval(a) => eval(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Threshold(msg)) => {
            eprintln!("fuzzint: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Input(e)) => {
            eprintln!("fuzzint: {e:#}");
            ExitCode::from(2)
        }
    }
}
