//! Command-line front end. The `semid` binary only parses arguments and
//! forwards here, so every subcommand is callable from tests.

use std::io::{self, Write};
use std::net::TcpListener;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use log::info;
use serde::Serialize;

use crate::dataset::{load_features, save_features};
use crate::error::{Error, Result};
use crate::identifier::Threshold;
use crate::protocol::session::{connect_apprentice, serve_teacher, ERR_DIGEST_MISMATCH};
use crate::report::write_sweep;
use crate::simulator::{
    accuracy, derive_seed, gen_synthetic, lambda_grid, optimize_lambda, run_dataset, sweep,
    SyntheticParams,
};
use crate::teacher::TransmitPlan;
use crate::types::{build_semantic_base, dedup_identities, Identity, SemanticBase, DEFAULT_Q};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_PROTOCOL: i32 = 4;
pub const EXIT_IO: i32 = 5;
pub const EXIT_HANDSHAKE: i32 = 6;

#[derive(Debug, Parser)]
#[command(
    name = "semid",
    version,
    about = "Identification via semantic features"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic labeled feature file.
    Gen(GenArgs),
    /// Run every identity once at one threshold and print accuracy and BTR.
    Run(RunArgs),
    /// Sweep the threshold grid and write the plot tables and the optimum.
    Sweep(SweepArgs),
    /// Serve identities to apprentices over TCP.
    Teacher(TeacherArgs),
    /// Connect to a teacher and identify what it sends.
    Apprentice(ApprenticeArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SyntheticArgs {
    /// Number of classes.
    #[arg(long = "gen-k", default_value_t = 10)]
    pub k: usize,
    /// Features per identity.
    #[arg(long = "gen-n", default_value_t = 64)]
    pub n: usize,
    #[arg(long = "gen-per-class", default_value_t = 100)]
    pub per_class: usize,
    /// Within-class standard deviation.
    #[arg(long = "gen-spread", default_value_t = 1.0)]
    pub spread: f64,
    /// Minimum distance between class centers.
    #[arg(long = "gen-sep", default_value_t = 20.0)]
    pub separation: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DataArgs {
    /// Feature CSV; synthetic data from the --gen-* flags when absent.
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[command(flatten)]
    pub synthetic: SyntheticArgs,
    /// Bits per feature value used for bit accounting.
    #[arg(long, default_value_t = DEFAULT_Q)]
    pub q: u16,
    /// Master seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GenArgs {
    #[command(flatten)]
    pub synthetic: SyntheticArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output CSV path.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct RunArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long)]
    pub lambda: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SweepArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long = "lambda-min", default_value_t = 0.10)]
    pub lambda_min: f64,
    #[arg(long = "lambda-max", default_value_t = 1.00)]
    pub lambda_max: f64,
    #[arg(long = "lambda-step", default_value_t = 0.02)]
    pub lambda_step: f64,
    /// Output directory for the CSV tables.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct TeacherArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Address to listen on, e.g. 127.0.0.1:7878.
    #[arg(long)]
    pub listen: String,
    /// Dataset row sent in the first session; later sessions take the next rows.
    #[arg(long, default_value_t = 0)]
    pub index: usize,
    #[arg(long, default_value_t = 1)]
    pub sessions: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ApprenticeArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Teacher address.
    #[arg(long)]
    pub connect: String,
    #[arg(long)]
    pub lambda: f64,
    #[arg(long, default_value_t = 1)]
    pub sessions: usize,
}

/// The validated command together with its arguments; serialized into every
/// artifact the command writes.
#[derive(Debug, Serialize)]
pub struct RunConfig<'a, T: Serialize> {
    pub command: &'static str,
    #[serde(flatten)]
    pub args: &'a T,
}

impl<T: Serialize> RunConfig<'_, T> {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }
}

/// Exit code for an error: config, data, protocol, I/O, or handshake failure.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::InvalidThreshold(_)
        | Error::InvalidParameter(_)
        | Error::InfeasiblePlacement { .. } => EXIT_CONFIG,
        Error::EmptyInput
        | Error::DimensionMismatch { .. }
        | Error::NonFinite { .. }
        | Error::InvalidRecord { .. }
        | Error::UnknownLabel(_)
        | Error::Empty(_)
        | Error::ElementCountMismatch { .. }
        | Error::Csv(_) => EXIT_DATA,
        Error::DigestMismatch { .. } => EXIT_HANDSHAKE,
        Error::Peer { code, .. } if *code == ERR_DIGEST_MISMATCH => EXIT_HANDSHAKE,
        Error::Peer { .. }
        | Error::Protocol(_)
        | Error::Frame(_)
        | Error::DuplicatePosition(_)
        | Error::PositionOutOfRange { .. }
        | Error::NotSaturated { .. }
        | Error::NoFeatures => EXIT_PROTOCOL,
        Error::Io(_) => EXIT_IO,
    }
}

impl SyntheticArgs {
    fn params(&self, seed: u64) -> SyntheticParams {
        SyntheticParams {
            classes: self.k,
            features: self.n,
            per_class: self.per_class,
            spread: self.spread,
            separation: self.separation,
            seed,
        }
    }
}

impl DataArgs {
    /// Dataset rows and the semantic base built from them.
    pub fn load(&self) -> Result<(Vec<Identity>, SemanticBase)> {
        let rows = match &self.data {
            Some(path) => load_features(path)?,
            None => gen_synthetic(&self.synthetic.params(self.seed))?,
        };
        let base = build_semantic_base(&rows, self.q)?;
        info!(
            "loaded {} rows, N = {}, K = {}",
            rows.len(),
            base.n(),
            base.k()
        );
        Ok((rows, base))
    }
}

pub fn run(cli: Cli) -> Result<()> {
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match cli.command {
        Command::Gen(args) => cmd_gen(&args, &mut out),
        Command::Run(args) => cmd_run(&args, &mut out),
        Command::Sweep(args) => cmd_sweep(&args, &mut out),
        Command::Teacher(args) => cmd_teacher(&args, &mut out),
        Command::Apprentice(args) => cmd_apprentice(&args, &mut out),
    }
}

pub fn cmd_gen(args: &GenArgs, out: &mut impl Write) -> Result<()> {
    let rows = gen_synthetic(&args.synthetic.params(args.seed))?;
    let config = RunConfig {
        command: "gen",
        args,
    };
    let mut comments = vec![format!("semid {}", config.to_json())];
    if args.synthetic.spread == 0.0 {
        let distinct = dedup_identities(&rows)?.len();
        comments.push(format!(
            "spread is 0: every class collapses to a single identity ({distinct} distinct of {} rows)",
            rows.len()
        ));
    }
    save_features(&args.out, &rows, &comments)?;
    writeln!(out, "wrote {} rows to {}", rows.len(), args.out.display())?;
    Ok(())
}

pub fn cmd_run(args: &RunArgs, out: &mut impl Write) -> Result<()> {
    let lambda = Threshold::new(args.lambda)?;
    let (rows, base) = args.data.load()?;
    let records = run_dataset(&base, &rows, lambda, args.data.seed)?;
    let alpha = accuracy(&records)?;
    let mean_packets = records
        .iter()
        .map(|r| r.decision.packets_used as f64)
        .sum::<f64>()
        / records.len() as f64;
    let saturated = records.iter().filter(|r| r.decision.saturated).count();
    writeln!(
        out,
        "{}",
        serde_json::json!({
            "lambda": lambda.get(),
            "runs": records.len(),
            "accuracy": alpha,
            "mean_packets": mean_packets,
            "mean_btr": crate::simulator::btr(base.n(), base.q(), mean_packets),
            "saturated": saturated,
        })
    )?;
    Ok(())
}

pub fn cmd_sweep(args: &SweepArgs, out: &mut impl Write) -> Result<()> {
    let grid = lambda_grid(args.lambda_min, args.lambda_max, args.lambda_step)?;
    let (rows, base) = args.data.load()?;
    let table = sweep(&base, &rows, &grid, args.data.seed)?;
    let optimum = optimize_lambda(&table)?;
    let config = RunConfig {
        command: "sweep",
        args,
    };
    let mut provenance = vec![format!("semid {}", config.to_json())];
    if table.rows.iter().any(|r| r.degenerate) {
        provenance.push(format!(
            "rows flagged degenerate have lambda <= 1/K = {}: the first packet always decides",
            1.0 / base.k() as f64
        ));
    }
    let written = write_sweep(&args.out, &table, &optimum, &provenance)?;
    writeln!(
        out,
        "N = {}  lambda_opt = {}  accuracy = {:.4}  BTR = {:.4}",
        table.n, optimum.lambda, optimum.accuracy, optimum.btr
    )?;
    for path in written {
        writeln!(out, "wrote {}", path.display())?;
    }
    Ok(())
}

pub fn cmd_teacher(args: &TeacherArgs, out: &mut impl Write) -> Result<()> {
    let (rows, base) = args.data.load()?;
    if args.index >= rows.len() {
        return Err(Error::InvalidParameter(format!(
            "--index {} outside dataset of {} rows",
            args.index,
            rows.len()
        )));
    }
    let listener = TcpListener::bind(&args.listen)?;
    writeln!(out, "listening on {}", listener.local_addr()?)?;
    out.flush()?;

    let indices: Vec<usize> = (0..args.sessions)
        .map(|j| (args.index + j) % rows.len())
        .collect();
    let plans = indices
        .iter()
        .map(|&i| TransmitPlan::new(rows[i].clone(), derive_seed(args.data.seed, i)));
    let results = serve_teacher(&listener, &base, plans)?;

    let mut first_err = None;
    for (index, result) in indices.iter().zip(results) {
        match result {
            Ok(report) => writeln!(
                out,
                "{}",
                serde_json::json!({ "index": index, "label": rows[*index].label(), "report": report })
            )?,
            Err(e) => {
                writeln!(
                    out,
                    "{}",
                    serde_json::json!({ "index": index, "error": e.to_string() })
                )?;
                first_err.get_or_insert(e);
            }
        }
    }
    first_err.map_or(Ok(()), Err)
}

pub fn cmd_apprentice(args: &ApprenticeArgs, out: &mut impl Write) -> Result<()> {
    let lambda = Threshold::new(args.lambda)?;
    let (_, base) = args.data.load()?;
    for session in 0..args.sessions {
        let report = connect_apprentice(&args.connect, &base, lambda)?;
        let d = report.decision;
        let name = base.element(d.element).map(|e| e.name.as_str());
        writeln!(
            out,
            "{}",
            serde_json::json!({
                "session": session,
                "element": d.element,
                "label": name,
                "confidence": d.confidence,
                "packets_used": d.packets_used,
                "saturated": d.saturated,
                "bits_semantic": report.bits_semantic,
                "bits_syntactic": report.bits_syntactic,
                "btr": report.bits_semantic as f64 / report.bits_syntactic as f64,
                "bytes_received": report.bytes_received,
                "bytes_sent": report.bytes_sent,
            })
        )?;
    }
    Ok(())
}
