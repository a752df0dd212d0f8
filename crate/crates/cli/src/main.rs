//! Command line front end: enumerate graph classes, evaluate star products
//! on charts, and run the verification suite.

mod store;

use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;

use graphstar::{
    chart_signature_table, emit_operator, level_classes, parse_expression, star_product, suite,
    GraphClass, KahlerChart, LevelStore, StarOptions, SymbolicFormat, DEFAULT_SEED,
};
use store::DirStore;

#[derive(Parser)]
#[command(
    name = "graphstar",
    version,
    about = "Star products from weighted graph expansions on Kähler charts"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Enumerate the graph classes of one weight level
    Graphs(GraphsArgs),
    /// Evaluate star-product coefficients of two fields on a chart
    Star(StarArgs),
    /// Run verification checks and report pass/fail per check
    Verify(VerifyArgs),
}

#[derive(clap::Args)]
struct GraphsArgs {
    /// Number of external vertices (the arity of the operator)
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u16).range(2..))]
    externals: u16,
    /// Total weight of the level (the order in the deformation parameter)
    #[arg(long)]
    weight: i64,
    #[arg(long, value_enum, default_value_t = GraphsOutput::List)]
    output: GraphsOutput,
    /// Directory for cached levels; defaults to $GRAPHSTAR_CACHE_DIR if set
    #[arg(long)]
    cache_dir: Option<PathBuf>,
    /// Enumerate past the default level-size guard
    #[arg(long)]
    allow_large: bool,
}

#[derive(Copy, Clone, ValueEnum)]
enum GraphsOutput {
    /// Number of classes only
    Count,
    /// One human-readable line per class
    List,
    /// One JSON object per class
    Json,
    /// The weighted operator sum, plain text
    Ascii,
    /// The weighted operator sum, LaTeX
    Latex,
}

#[derive(clap::Args)]
struct StarArgs {
    /// Builtin chart name (flat, fubini-study, hyperbolic-disc) or a path
    /// to a chart JSON file
    #[arg(long)]
    chart: String,
    /// Dimension for builtin charts
    #[arg(long, default_value_t = 1)]
    dimension: usize,
    /// First factor, e.g. "z1^2*zb1 + 0.5*z1"
    #[arg(long)]
    f1: String,
    /// Second factor
    #[arg(long)]
    f2: String,
    /// Comma-separated complex coordinates, e.g. "0.1+0.2i,-0.3"
    #[arg(long)]
    point: String,
    /// Highest order to compute
    #[arg(long, default_value_t = 2)]
    order: i64,
    /// Skip graphs whose vertex tensors vanish on this chart at this point
    #[arg(long)]
    filter: bool,
    #[arg(long, value_enum, default_value_t = StarOutput::Value)]
    output: StarOutput,
    /// Directory for cached levels; defaults to $GRAPHSTAR_CACHE_DIR if set
    #[arg(long)]
    cache_dir: Option<PathBuf>,
    /// Compute past the default order guard
    #[arg(long)]
    allow_large: bool,
}

#[derive(Copy, Clone, ValueEnum)]
enum StarOutput {
    /// One "h^k: value" line per order
    Value,
    /// One JSON object per order
    Json,
}

#[derive(clap::Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Run only checks with this exact name; repeat to select several
    #[arg(long)]
    only: Vec<String>,
    /// Emit one JSON object per check instead of text lines
    #[arg(long)]
    json: bool,
}

fn main() -> Result<()> {
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let result = match Cli::parse().command {
        Command::Graphs(args) => graphs(args, &mut out),
        Command::Star(args) => star(args, &mut out),
        Command::Verify(args) => verify(args, &mut out),
    };
    // A reader that stops early (e.g. `| head`) closes the pipe; that is
    // not an error worth reporting.
    if let Err(err) = &result {
        if let Some(ioe) = err.downcast_ref::<io::Error>() {
            if ioe.kind() == io::ErrorKind::BrokenPipe {
                return Ok(());
            }
        }
    }
    result
}

/// Levels grow quickly with weight; past these bounds enumeration is still
/// exact but no longer interactive.
fn guard_level(n_ext: usize, k: i64, allow_large: bool) -> Result<()> {
    let cap = match n_ext {
        2 => 4,
        3 => 3,
        _ => 2,
    };
    if k > cap && !allow_large {
        bail!(
            "weight {k} with {n_ext} externals enumerates a large level; \
             pass --allow-large to proceed"
        );
    }
    Ok(())
}

fn resolve_store(flag: Option<PathBuf>) -> Result<Option<DirStore>> {
    let root = flag.or_else(|| std::env::var_os("GRAPHSTAR_CACHE_DIR").map(PathBuf::from));
    match root {
        Some(root) => {
            let store = DirStore::open(&root)
                .with_context(|| format!("cannot open cache directory {}", root.display()))?;
            Ok(Some(store))
        }
        None => Ok(None),
    }
}

fn graphs(args: GraphsArgs, out: &mut impl Write) -> Result<()> {
    let n_ext = args.externals as usize;
    guard_level(n_ext, args.weight, args.allow_large)?;
    match args.output {
        GraphsOutput::Ascii => {
            writeln!(out, "{}", emit_operator(n_ext, args.weight, SymbolicFormat::Ascii))?;
            return Ok(());
        }
        GraphsOutput::Latex => {
            writeln!(out, "{}", emit_operator(n_ext, args.weight, SymbolicFormat::Latex))?;
            return Ok(());
        }
        _ => {}
    }
    let store = resolve_store(args.cache_dir)?;
    let opts = StarOptions {
        filter: None,
        store: store.as_ref().map(|s| s as &dyn LevelStore),
    };
    let classes = level_classes(n_ext, args.weight, &opts);
    match args.output {
        GraphsOutput::Count => writeln!(out, "{}", classes.len())?,
        GraphsOutput::List => {
            for class in &classes {
                writeln!(out, "{}", describe(class))?;
            }
        }
        GraphsOutput::Json => {
            for class in &classes {
                writeln!(out, "{}", serde_json::to_string(class).expect("class serializes"))?;
            }
        }
        GraphsOutput::Ascii | GraphsOutput::Latex => unreachable!("handled above"),
    }
    Ok(())
}

fn describe(class: &GraphClass) -> String {
    let g = &class.graph;
    let edges: Vec<String> = g.edges().iter().map(|&(t, h)| format!("{t}->{h}")).collect();
    format!(
        "weights={:?} edges=[{}] auts={}",
        g.internal_weights(),
        edges.join(", "),
        class.auts
    )
}

fn load_chart(name: &str, dimension: usize) -> Result<KahlerChart> {
    if Path::new(name).exists() {
        let text = std::fs::read_to_string(name)
            .with_context(|| format!("cannot read chart file {name}"))?;
        return Ok(KahlerChart::from_json(&text)?);
    }
    Ok(KahlerChart::builtin(name, dimension)?)
}

fn parse_point(text: &str, m: usize) -> Result<Vec<Complex64>> {
    let coords: Vec<Complex64> = text
        .split(',')
        .map(|part| {
            Complex64::from_str(part.trim())
                .map_err(|e| anyhow!("bad coordinate {part:?}: {e}"))
        })
        .collect::<Result<_>>()?;
    if coords.len() != m {
        bail!("chart has dimension {m} but the point has {} coordinates", coords.len());
    }
    Ok(coords)
}

fn format_complex(v: Complex64) -> String {
    format!("{:.12}{:+.12}i", v.re, v.im)
}

fn star(args: StarArgs, out: &mut impl Write) -> Result<()> {
    guard_level(2, args.order, args.allow_large)?;
    let chart = load_chart(&args.chart, args.dimension)?;
    let m = chart.dimension();
    let point = parse_point(&args.point, m)?;
    let f1 = parse_expression(&args.f1).context("cannot parse --f1")?;
    let f2 = parse_expression(&args.f2).context("cannot parse --f2")?;
    let store = resolve_store(args.cache_dir)?;
    let table = if args.filter {
        Some(chart_signature_table(&chart, &point, 0, 2 * args.order.max(0) as usize + 2)?)
    } else {
        None
    };
    let opts = StarOptions {
        filter: table.as_ref(),
        store: store.as_ref().map(|s| s as &dyn LevelStore),
    };
    let series = star_product(&chart, &f1, &f2, &point, 0, args.order, &opts)?;
    for n in series.leading()..=series.trunc() {
        let v = series.get(n).expect("order in range").eval_center();
        match args.output {
            StarOutput::Value => writeln!(out, "h^{n}: {}", format_complex(v))?,
            StarOutput::Json => writeln!(
                out,
                "{}",
                serde_json::json!({ "order": n, "re": v.re, "im": v.im })
            )?,
        }
    }
    Ok(())
}

fn verify(args: VerifyArgs, out: &mut impl Write) -> Result<()> {
    let all = suite(args.seed);
    if let Some(unknown) = args
        .only
        .iter()
        .find(|sel| !all.iter().any(|(name, _)| *name == sel.as_str()))
    {
        bail!("no check named {unknown:?}");
    }
    let selected = all
        .into_iter()
        .filter(|(name, _)| args.only.is_empty() || args.only.iter().any(|s| s == name));
    let mut ran = 0usize;
    let mut passed = 0usize;
    for (_, run) in selected {
        let report = run();
        ran += 1;
        if report.pass {
            passed += 1;
        }
        if args.json {
            writeln!(out, "{}", serde_json::to_string(&report).expect("report serializes"))?;
        } else {
            writeln!(out, "{report}")?;
        }
        out.flush()?;
    }
    if !args.json {
        writeln!(out, "passed {passed} of {ran} checks (seed {})", args.seed)?;
    }
    if passed < ran {
        std::process::exit(1);
    }
    Ok(())
}
