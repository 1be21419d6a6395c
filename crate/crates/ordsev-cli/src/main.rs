//! `ordsev` command-line front end.
//!
//! Subcommands mirror the analysis pipeline: `describe` for per-variable
//! cross-tabulations, `chisq` for association tests, `fit` for the ordered
//! logit estimate plus a machine-readable archive, `margins` for average
//! marginal effects from an archive, and `simulate` for synthetic record
//! generation.
//!
//! Exit codes: 0 on success, 2 for input or configuration problems, 3 for
//! numerical failures (including a fit that did not converge).

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use ordsev::archive::{FitArchive, SimulationProvenance};
use ordsev::contingency::{chi_square_test, observed_table, ObservedTable};
use ordsev::design::encode_design;
use ordsev::dgp::{simulate, GeneratorSpec};
use ordsev::export::{
    contingency_tables, crosstab_table, fit_report_table, fit_summary_table, margins_table_view,
    OutputFormat, Table,
};
use ordsev::fit::{fit, FitOptions};
use ordsev::inference::report;
use ordsev::margins::margins_table_with;
use ordsev::{crosstab, ingest_records, parse_schema, Dataset, Execution, UnknownPolicy};

#[derive(Parser, Debug)]
#[command(name = "ordsev", version, about = "Ordinal crash-severity analytics")]
struct Cli {
    /// Print progress to stderr.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Cross-tabulate every schema variable against the outcome.
    Describe(DescribeArgs),
    /// Pearson chi-square test between two variables.
    Chisq(ChisqArgs),
    /// Fit the ordered logit model and write a report plus a fit archive.
    Fit(FitArgs),
    /// Average marginal effects from a fit archive.
    Margins(MarginsArgs),
    /// Simulate records from a generator spec.
    Simulate(SimulateArgs),
}

#[derive(Args, Debug)]
struct IoArgs {
    /// Output directory (created if missing).
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Output format for tables.
    #[arg(long, default_value = "md")]
    format: String,
}

#[derive(Args, Debug)]
struct DataArgs {
    /// Records CSV path.
    #[arg(long)]
    records: PathBuf,
    /// Schema file path, or a bundled name (`table4`).
    #[arg(long)]
    schema: String,
    /// Unknown-label policy: `drop` or `map:<category>`.
    #[arg(long, default_value = "drop")]
    unknown: String,
}

#[derive(Args, Debug)]
struct DescribeArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    io: IoArgs,
}

#[derive(Args, Debug)]
struct ChisqArgs {
    /// Records CSV path (with --schema, --var-a, --var-b).
    #[arg(long)]
    records: Option<PathBuf>,
    /// Schema file path or bundled name.
    #[arg(long)]
    schema: Option<String>,
    #[arg(long)]
    var_a: Option<String>,
    #[arg(long)]
    var_b: Option<String>,
    /// Pre-tabulated counts CSV (first column row labels) instead of records.
    #[arg(long, conflicts_with_all = ["records", "schema", "var_a", "var_b"])]
    table: Option<PathBuf>,
    /// Unknown-label policy: `drop` or `map:<category>`.
    #[arg(long, default_value = "drop")]
    unknown: String,
    #[command(flatten)]
    io: IoArgs,
}

#[derive(Args, Debug)]
struct FitArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    io: IoArgs,
    /// Gradient max-norm tolerance.
    #[arg(long, default_value_t = 1e-6)]
    tol_grad: f64,
    /// Relative log-likelihood change tolerance.
    #[arg(long, default_value_t = 1e-10)]
    tol_ll: f64,
    #[arg(long, default_value_t = 200)]
    max_iter: usize,
    /// Fail instead of taking gradient steps when the Hessian is not
    /// negative definite.
    #[arg(long)]
    no_hessian_fallback: bool,
}

#[derive(Args, Debug)]
struct MarginsArgs {
    /// Fit archive JSON produced by `fit`.
    #[arg(long)]
    archive: PathBuf,
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    io: IoArgs,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    /// Generator spec path, or a bundled name (`table4_dgp`).
    #[arg(long)]
    spec: String,
    /// Override the spec's sample size.
    #[arg(long)]
    n: Option<usize>,
    /// Override the spec's seed.
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    io: IoArgs,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let verbose = cli.verbose;
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            if verbose > 0 {
                for cause in err.chain().skip(1) {
                    eprintln!("  caused by: {cause}");
                }
            }
            match err.downcast_ref::<ordsev::Error>() {
                Some(e) if e.is_numerical() => ExitCode::from(3),
                _ => ExitCode::from(2),
            }
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::Describe(args) => cmd_describe(args, cli.verbose),
        Command::Chisq(args) => cmd_chisq(args, cli.verbose),
        Command::Fit(args) => cmd_fit(args, cli.verbose),
        Command::Margins(args) => cmd_margins(args, cli.verbose),
        Command::Simulate(args) => cmd_simulate(args, cli.verbose),
    }
}

/// Reads a file, falling back to a bundled asset of the same name.
fn load_text(path: &str, kind: &str) -> anyhow::Result<String> {
    let p = Path::new(path);
    if p.is_file() {
        return fs::read_to_string(p).with_context(|| format!("reading {kind} `{path}`"));
    }
    if let Some(text) = ordsev::assets::bundled(path) {
        return Ok(text.to_string());
    }
    bail!("{kind} `{path}` not found (not a file and not a bundled name)")
}

fn parse_policy(text: &str) -> anyhow::Result<UnknownPolicy> {
    if text == "drop" {
        Ok(UnknownPolicy::Drop)
    } else if let Some(category) = text.strip_prefix("map:") {
        Ok(UnknownPolicy::MapToCategory(category.to_string()))
    } else {
        bail!("unknown policy `{text}`; use `drop` or `map:<category>`")
    }
}

fn load_dataset(data: &DataArgs, verbose: u8) -> anyhow::Result<Dataset> {
    let schema = parse_schema(&load_text(&data.schema, "schema")?)?;
    let policy = parse_policy(&data.unknown)?;
    let file = fs::File::open(&data.records)
        .with_context(|| format!("opening records `{}`", data.records.display()))?;
    let dataset = ingest_records(std::io::BufReader::new(file), &schema, &policy)?;
    if verbose > 0 {
        eprintln!(
            "ingested {} records ({} dropped) from `{}`",
            dataset.n_records(),
            dataset.dropped_count(),
            data.records.display()
        );
    }
    Ok(dataset)
}

fn parse_format(io: &IoArgs) -> anyhow::Result<OutputFormat> {
    Ok(io.format.parse::<OutputFormat>()?)
}

fn write_table(
    out: &Path,
    stem: &str,
    table: &Table,
    format: OutputFormat,
    verbose: u8,
) -> anyhow::Result<PathBuf> {
    fs::create_dir_all(out)
        .with_context(|| format!("creating output directory `{}`", out.display()))?;
    let path = out.join(format!("{stem}.{}", format.extension()));
    fs::write(&path, table.render(format))
        .with_context(|| format!("writing `{}`", path.display()))?;
    if verbose > 0 {
        eprintln!("wrote {}", path.display());
    }
    Ok(path)
}

fn sanitize(name: &str) -> String {
    name.chars().map(|c| if c.is_ascii_alphanumeric() { c } else { '_' }).collect()
}

fn cmd_describe(args: DescribeArgs, verbose: u8) -> anyhow::Result<ExitCode> {
    let format = parse_format(&args.io)?;
    let dataset = load_dataset(&args.data, verbose)?;
    if dataset.is_empty() {
        eprintln!("warning: dataset has no records; tables will be zeros");
    }
    for variable in dataset.schema().variables() {
        let tab = crosstab(&dataset, variable.name())?;
        let stem = format!("describe_{}", sanitize(variable.name()));
        write_table(&args.io.out, &stem, &crosstab_table(&tab), format, verbose)?;
    }
    Ok(ExitCode::SUCCESS)
}

/// Parses a pre-tabulated counts CSV: header names the columns, first cell
/// per row is the row label.
fn read_counts_table(path: &Path) -> anyhow::Result<ObservedTable> {
    let file =
        fs::File::open(path).with_context(|| format!("opening table `{}`", path.display()))?;
    let mut rdr = csv::Reader::from_reader(std::io::BufReader::new(file));
    let headers = rdr.headers()?.clone();
    if headers.len() < 2 {
        bail!("counts table needs a label column and at least one count column");
    }
    let col_labels: Vec<String> = headers.iter().skip(1).map(String::from).collect();
    let mut row_labels = Vec::new();
    let mut counts = Vec::new();
    for record in rdr.records() {
        let record = record?;
        row_labels.push(record[0].to_string());
        let row: Vec<u64> = record
            .iter()
            .skip(1)
            .map(|cell| {
                cell.trim()
                    .parse::<u64>()
                    .with_context(|| format!("count `{cell}` in row `{}`", &record[0]))
            })
            .collect::<anyhow::Result<_>>()?;
        counts.push(row);
    }
    let mut table = ObservedTable::from_counts(counts).map_err(anyhow::Error::from)?;
    table.row_labels = row_labels;
    table.col_labels = col_labels;
    Ok(table)
}

fn cmd_chisq(args: ChisqArgs, verbose: u8) -> anyhow::Result<ExitCode> {
    let format = parse_format(&args.io)?;
    let observed = if let Some(table_path) = &args.table {
        read_counts_table(table_path)?
    } else {
        let (records, schema, var_a, var_b) =
            match (&args.records, &args.schema, &args.var_a, &args.var_b) {
                (Some(r), Some(s), Some(a), Some(b)) => (r, s, a, b),
                _ => bail!("chisq needs either --table or all of --records, --schema, --var-a, --var-b"),
            };
        if var_a == var_b {
            return Err(ordsev::Error::InvalidArgument(format!(
                "--var-a and --var-b must differ (both `{var_a}`)"
            ))
            .into());
        }
        let data = DataArgs {
            records: records.clone(),
            schema: schema.clone(),
            unknown: args.unknown.clone(),
        };
        let dataset = load_dataset(&data, verbose)?;
        observed_table(&dataset, var_a, var_b)?
    };

    let result = chi_square_test(&observed)?;
    if !result.low_expected_cells.is_empty() {
        eprintln!(
            "warning: {} cell(s) have expected count below 5; the asymptotic p-value is unreliable",
            result.low_expected_cells.len()
        );
    }
    for (name, table) in contingency_tables(&result) {
        write_table(&args.io.out, &format!("chisq_{name}"), &table, format, verbose)?;
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_fit(args: FitArgs, verbose: u8) -> anyhow::Result<ExitCode> {
    let format = parse_format(&args.io)?;
    let schema = parse_schema(&load_text(&args.data.schema, "schema")?)?;
    let dataset = load_dataset(&args.data, verbose)?;
    let design = encode_design(&dataset)?;
    let options = FitOptions {
        tol_grad: args.tol_grad,
        tol_ll: args.tol_ll,
        max_iter: args.max_iter,
        hessian_fallback: !args.no_hessian_fallback,
        execution: Execution::default(),
    };
    let fitted = fit(&design, &options)?;
    for warning in &fitted.warnings {
        eprintln!("warning: {warning}");
    }

    fs::create_dir_all(&args.io.out)?;
    let archive = FitArchive::from_fit(&fitted, &design, &schema, &options);
    let archive_path = args.io.out.join("fit_archive.json");
    fs::write(&archive_path, archive.to_json())
        .with_context(|| format!("writing `{}`", archive_path.display()))?;
    if verbose > 0 {
        eprintln!("wrote {}", archive_path.display());
    }

    if !fitted.converged {
        eprintln!(
            "error: estimation did not converge within {} iterations (gradient norm {:.3e}); \
             partial diagnostics in `{}`",
            fitted.iterations,
            fitted.gradient_norm,
            archive_path.display()
        );
        return Ok(ExitCode::from(3));
    }

    let rep = report(&fitted, design.columns())?;
    write_table(&args.io.out, "fit_report", &fit_report_table(&rep), format, verbose)?;
    write_table(&args.io.out, "fit_summary", &fit_summary_table(&rep), format, verbose)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_margins(args: MarginsArgs, verbose: u8) -> anyhow::Result<ExitCode> {
    let format = parse_format(&args.io)?;
    let archive_text = fs::read_to_string(&args.archive)
        .with_context(|| format!("reading archive `{}`", args.archive.display()))?;
    let archive = FitArchive::from_json(&archive_text)?;
    let schema = parse_schema(&load_text(&args.data.schema, "schema")?)?;
    archive.check_schema(&schema)?;

    let dataset = load_dataset(&args.data, verbose)?;
    let design = encode_design(&dataset)?;
    let params = archive.params()?;
    let table = margins_table_with(&params, &design, Execution::default())?;
    write_table(&args.io.out, "margins", &margins_table_view(&table), format, verbose)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_simulate(args: SimulateArgs, verbose: u8) -> anyhow::Result<ExitCode> {
    let spec_text = load_text(&args.spec, "generator spec")?;
    let mut spec = GeneratorSpec::parse(&spec_text)?;
    if let Some(n) = args.n {
        spec = spec.with_sample_size(n)?;
    }
    if let Some(seed) = args.seed {
        spec = spec.with_seed(seed);
    }
    let dataset = simulate(&spec)?;
    if verbose > 0 {
        eprintln!("simulated {} records (seed {})", dataset.n_records(), spec.seed());
    }

    fs::create_dir_all(&args.io.out)?;
    let records_path = args.io.out.join("records.csv");
    let mut buffer = Vec::new();
    dataset.write_csv(&mut buffer)?;
    fs::write(&records_path, buffer)
        .with_context(|| format!("writing `{}`", records_path.display()))?;

    let provenance = SimulationProvenance::new(spec.seed(), spec.sample_size(), &spec_text);
    let provenance_path = args.io.out.join("records_provenance.json");
    fs::write(&provenance_path, serde_json::to_string_pretty(&provenance)?)
        .with_context(|| format!("writing `{}`", provenance_path.display()))?;
    if verbose > 0 {
        eprintln!("wrote {} and {}", records_path.display(), provenance_path.display());
    }
    Ok(ExitCode::SUCCESS)
}
