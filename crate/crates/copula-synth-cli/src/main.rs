//! Command-line front end: fit a synthesis model to a CSV, generate
//! synthetic CSVs, score synthetic-vs-real fidelity, run the SMOTE
//! baseline, and walk the two-categorical-column worked example.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use copula_synth::categorical::{encode_categorical, CategoricalEncoding};
use copula_synth::copula::{CopulaFamily, CorrelationFitMethod};
use copula_synth::csv_io::{ingest_csv, write_csv, write_csv_string, CsvSchemaHints};
use copula_synth::error::{Error, Result};
use copula_synth::numerics::RandomSource;
use copula_synth::pipeline::{fit, generate, FitConfig, SynthModel};
use copula_synth::quality::build_quality_report;
use copula_synth::smote::{smote_table, SmoteConfig};
use copula_synth::table::{Column, DataTable};

#[derive(Parser)]
#[command(
    name = "copula-synth",
    version,
    about = "Copula-based synthetic tabular data: fit, generate, evaluate"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Gaussian,
    T,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Kendall,
    Spearman,
    Pearson,
}

impl From<MethodArg> for CorrelationFitMethod {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Kendall => CorrelationFitMethod::KendallInversion,
            MethodArg::Spearman => CorrelationFitMethod::SpearmanApprox,
            MethodArg::Pearson => CorrelationFitMethod::Pearson,
        }
    }
}

/// CSV ingestion options shared by the commands that read CSVs.
#[derive(Args)]
struct IngestArgs {
    /// Drop this column on ingestion (repeatable).
    #[arg(long)]
    exclude: Vec<String>,
    /// Force this column numeric (repeatable).
    #[arg(long)]
    numeric: Vec<String>,
    /// Force this column categorical (repeatable).
    #[arg(long)]
    categorical: Vec<String>,
    /// Field delimiter (single byte).
    #[arg(long, default_value = ",")]
    delimiter: String,
    /// Treat the first row as data and name columns c0, c1, ...
    #[arg(long)]
    no_header: bool,
}

impl IngestArgs {
    fn hints(&self) -> Result<CsvSchemaHints> {
        let bytes = self.delimiter.as_bytes();
        if bytes.len() != 1 {
            return Err(Error::Domain(format!(
                "delimiter must be a single byte, got {:?}",
                self.delimiter
            )));
        }
        Ok(CsvSchemaHints {
            numeric: self.numeric.clone(),
            categorical: self.categorical.clone(),
            exclude: self.exclude.clone(),
            delimiter: bytes[0],
            has_header: !self.no_header,
        })
    }
}

#[derive(Subcommand)]
enum Command {
    /// Fit a synthesis model to a CSV and write it as JSON.
    Fit {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = FamilyArg::Gaussian)]
        family: FamilyArg,
        /// Degrees of freedom for the t family (default 4 when omitted).
        #[arg(long)]
        nu: Option<f64>,
        #[arg(long, value_enum, default_value_t = MethodArg::Kendall)]
        method: MethodArg,
        /// Confidence multiplier stored with categorical encodings.
        #[arg(long, default_value_t = 1.96)]
        z: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Allow original-row tie alignment when generated and training
        /// row counts match.
        #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
        align_original: bool,
        #[command(flatten)]
        ingest: IngestArgs,
    },
    /// Sample a synthetic CSV from a fitted model.
    Generate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        rows: usize,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Override the model's tie-alignment setting.
        #[arg(long, action = clap::ArgAction::Set)]
        align_original: Option<bool>,
    },
    /// Compare a synthetic CSV against the real one and write a report.
    Evaluate {
        #[arg(long)]
        real: PathBuf,
        #[arg(long)]
        syn: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        ingest: IngestArgs,
    },
    /// Generate a synthetic CSV with the SMOTE baseline.
    Smote {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        rows: usize,
        #[arg(long)]
        out: PathBuf,
        /// Neighbors per base row.
        #[arg(long, default_value_t = 5)]
        k: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1.96)]
        z: f64,
        #[command(flatten)]
        ingest: IngestArgs,
    },
    /// Walk the vehicle/color worked example end to end.
    Demo {
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    if let Ok(v) = std::env::var("COPULA_SYNTH_THREADS") {
        match v.trim().parse::<usize>() {
            Ok(n) => copula_synth::configure_threads(n),
            Err(_) => eprintln!("warning: ignoring invalid COPULA_SYNTH_THREADS={v:?}"),
        }
    }
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Fit {
            input,
            out,
            family,
            nu,
            method,
            z,
            seed,
            align_original,
            ingest,
        } => {
            let table = ingest_csv(&input, &ingest.hints()?)?;
            let (family, nu) = match family {
                FamilyArg::Gaussian => (CopulaFamily::Gaussian, nu),
                FamilyArg::T => (CopulaFamily::StudentT, Some(nu.unwrap_or(4.0))),
            };
            let config = FitConfig {
                family,
                nu,
                method: method.into(),
                z,
                seed,
                excluded_columns: Vec::new(), // exclusions already applied at ingestion
                align_original,
            };
            let model = fit(&table, &config)?;
            model.save(&out)?;
            println!(
                "fitted {} columns over {} rows -> {}",
                model.column_names().len(),
                model.training_n(),
                out.display()
            );
            Ok(())
        }
        Command::Generate { model, rows, out, seed, align_original } => {
            let mut model = SynthModel::load(&model)?;
            if let Some(align) = align_original {
                model.set_align_original(align);
            }
            let mut rng = RandomSource::new(seed, 1);
            let table = generate(&model, rows, &mut rng)?;
            write_csv(&table, &out)?;
            println!("generated {rows} rows -> {}", out.display());
            Ok(())
        }
        Command::Evaluate { real, syn, out, ingest } => {
            let hints = ingest.hints()?;
            let real_table = ingest_csv(&real, &hints)?;
            let syn_table = ingest_csv(&syn, &hints)?;
            let report = build_quality_report(&real_table, &syn_table)?;
            report.save(&out)?;
            println!(
                "mu_diff: pearson={} kendall={} spearman={}",
                report.mu_diff.pearson, report.mu_diff.kendall, report.mu_diff.spearman
            );
            println!("report -> {}", out.display());
            Ok(())
        }
        Command::Smote { input, rows, out, k, seed, z, ingest } => {
            let table = ingest_csv(&input, &ingest.hints()?)?;
            let config = SmoteConfig { k, n_new: rows };
            let mut rng = RandomSource::new(seed, 2);
            let syn = smote_table(&table, &config, z, &mut rng)?;
            write_csv(&syn, &out)?;
            println!("smote generated {rows} rows -> {}", out.display());
            Ok(())
        }
        Command::Demo { seed } => demo(seed),
    }
}

/// The ten-row vehicle/color training table of the walkthrough.
fn demo_table() -> DataTable {
    let vehicle =
        ["CAR", "BUS", "BICYCLE", "BUS", "CAR", "BUS", "CAR", "BICYCLE", "BICYCLE", "BUS"];
    let color =
        ["BLUE", "GREEN", "GREEN", "BLUE", "GREEN", "BLUE", "GREEN", "BLUE", "BLUE", "GREEN"];
    DataTable::new(
        vec!["VEHICLE".into(), "COLOR".into()],
        vec![
            Column::Categorical(vehicle.iter().map(|s| s.to_string()).collect()),
            Column::Categorical(color.iter().map(|s| s.to_string()).collect()),
        ],
    )
    .expect("static table is well formed")
}

fn print_encoding(name: &str, enc: &CategoricalEncoding) {
    let props: Vec<String> = enc
        .levels()
        .iter()
        .zip(enc.proportions())
        .map(|(l, p)| format!("{l}={p}"))
        .collect();
    println!(
        "{name} proportions: {} (n={}, z={})",
        props.join(" "),
        enc.n(),
        enc.z()
    );
    for (i, level) in enc.levels().iter().enumerate() {
        let (lo, hi) = enc.confidence_interval(i);
        println!("  CI[{level}] = [{lo:.4}, {hi:.4}]");
    }
}

/// Decodes `values`, printing the distance computation and tie decision
/// for every row.
fn decode_trace(
    name: &str,
    enc: &CategoricalEncoding,
    values: &[f64],
    original: &[String],
    rng: &mut RandomSource,
) -> Vec<String> {
    let mut out = Vec::with_capacity(values.len());
    for (row, &value) in values.iter().enumerate() {
        let distances: Vec<String> = enc
            .levels()
            .iter()
            .zip(enc.proportions())
            .map(|(l, p)| format!("D({l})={:.4}", (value - p).abs()))
            .collect();
        let tied = enc.nearest_levels(value);
        let decision = if tied.len() == 1 {
            let level = enc.levels()[tied[0]].clone();
            println!(
                "decode {name} row {}: value {value:.4} -> {} -> {level}",
                row + 1,
                distances.join(" ")
            );
            level
        } else {
            let tie_names: Vec<&str> = tied.iter().map(|&i| enc.levels()[i].as_str()).collect();
            let orig = &original[row];
            if tied.iter().any(|&i| enc.levels()[i] == *orig) {
                println!(
                    "decode {name} row {}: value {value:.4} -> tie {{{}}} -> original {orig} kept -> {orig}",
                    row + 1,
                    tie_names.join(", ")
                );
                orig.clone()
            } else {
                let pick = enc.levels()[tied[rng.next_below(tied.len())]].clone();
                println!(
                    "decode {name} row {}: value {value:.4} -> tie {{{}}} -> original {orig} not tied -> random {pick}",
                    row + 1,
                    tie_names.join(", ")
                );
                pick
            }
        };
        out.push(decision);
    }
    out
}

fn demo(seed: u64) -> Result<()> {
    let table = demo_table();
    println!("== training table ==");
    println!("{}", write_csv_string(&table)?);

    println!("== level proportions and confidence intervals ==");
    let root = RandomSource::new(seed, 0);
    let mut encodings = Vec::new();
    for j in 0..table.n_cols() {
        let labels = table.categorical(j)?;
        let mut enc_rng = root.child(j as u64);
        let (enc, encoded) = encode_categorical(labels, &mut enc_rng, 1.96)?;
        print_encoding(table.name(j), &enc);
        let preview: Vec<String> = encoded.iter().take(3).map(|v| format!("{v:.4}")).collect();
        println!("  encoded head: {} ...", preview.join(", "));
        encodings.push(enc);
    }

    println!("== decoding the worked numeric table ==");
    let g1: Vec<f64> = vec![
        7.0 / 10.0,
        4.0 / 7.0,
        1.0 / 100.0,
        1.0 / 80.0,
        1.0 / 2.0,
        1.0 / 6.0,
        1.0 / 6.0,
        3.0 / 5.0,
        7.0 / 10.0,
        3.0 / 11.0,
    ];
    let g2: Vec<f64> = vec![
        3.0 / 4.0,
        7.0 / 8.0,
        1.0 / 3.0,
        2.0 / 9.0,
        3.0 / 5.0,
        2.0 / 3.0,
        3.0 / 11.0,
        1.0 / 101.0,
        5.0 / 9.0,
        1.0 / 3.0,
    ];
    let mut tie_rng = RandomSource::new(seed, 3);
    let vehicles = decode_trace("VEHICLE", &encodings[0], &g1, table.categorical(0)?, &mut tie_rng);
    let colors = decode_trace("COLOR", &encodings[1], &g2, table.categorical(1)?, &mut tie_rng);
    let decoded = DataTable::new(
        vec!["VEHICLE".into(), "COLOR".into()],
        vec![Column::Categorical(vehicles), Column::Categorical(colors)],
    )?;
    println!("== decoded table ==");
    println!("{}", write_csv_string(&decoded)?);

    println!("== full pipeline: fit + generate 10 rows ==");
    let config = FitConfig { seed, ..Default::default() };
    let model = fit(&table, &config)?;
    let mut rng = RandomSource::new(seed, 1);
    let synthetic = generate(&model, 10, &mut rng)?;
    println!("{}", write_csv_string(&synthetic)?);
    Ok(())
}
