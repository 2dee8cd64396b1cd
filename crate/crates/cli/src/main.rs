use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use floorscan_core::config::{parse_config, FloorscanConfig};
use floorscan_core::pipeline::{analyze_dxf, AnalyzeError, AnalyzeOptions, PlanAnalysis};
use floorscan_core::scene::{emit_json, parse_json};
use floorscan_core::score::score_all;
use floorscan_core::svg::emit_svg;
use floorscan_core::synth::{generate_synthetic, SyntheticSpec};

const EXIT_IO: u8 = 2;
const EXIT_PARSE: u8 = 3;
const EXIT_CONFIG: u8 = 4;

/// Extract walls, doors and windows from DXF floor plans.
#[derive(Parser, Debug)]
#[command(name = "floorscan", version, args_conflicts_with_subcommands = true, subcommand_negates_reqs = true)]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,
    #[command(flatten)]
    analyze: AnalyzeArgs,
}

#[derive(Args, Debug)]
struct AnalyzeArgs {
    /// DXF files to analyse.
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    /// Output JSON file; a directory when several inputs are given.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Write one SVG overlay per plan into this directory.
    #[arg(long, value_name = "DIR")]
    svg: Option<PathBuf>,
    /// Flat key = value settings file.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Raster side length in pixels.
    #[arg(long, value_name = "N")]
    resolution: Option<usize>,
    /// Write raster stage images (PGM) into this directory.
    #[arg(long, value_name = "DIR")]
    dump_debug: Option<PathBuf>,
    /// Worker threads for batch runs.
    #[arg(long, value_name = "N")]
    jobs: Option<usize>,
    /// Include per-stage timings in the scene statistics.
    #[arg(long)]
    timings: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a synthetic plan and its ground truth.
    Synth {
        /// Plan description (JSON).
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        truth: PathBuf,
    },
    /// Compare a result document with ground truth.
    Score {
        #[arg(long)]
        result: PathBuf,
        #[arg(long)]
        truth: PathBuf,
        /// Footprint IoU needed to match walls.
        #[arg(long, default_value_t = 0.7)]
        iou: f64,
    },
}

#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn io(path: &Path, e: io::Error) -> Failure {
        Failure { code: EXIT_IO, message: format!("{}: {e}", path.display()) }
    }

    fn new(code: u8, message: impl Into<String>) -> Failure {
        Failure { code, message: message.into() }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::io(path, e))
}

fn write(path: &Path, data: &[u8]) -> Result<(), Failure> {
    fs::write(path, data).map_err(|e| Failure::io(path, e))
}

fn create_dir(path: &Path) -> Result<(), Failure> {
    fs::create_dir_all(path).map_err(|e| Failure::io(path, e))
}

fn stem(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "plan".into())
}

fn load_config(args: &AnalyzeArgs) -> Result<FloorscanConfig, Failure> {
    let mut cfg = match &args.config {
        Some(p) => parse_config(&read(p)?).map_err(|e| Failure::new(EXIT_CONFIG, format!("{}: {e}", p.display())))?,
        None => FloorscanConfig::default(),
    };
    if let Some(r) = args.resolution {
        cfg.restore.resolution = r;
    }
    cfg.restore.keep_debug = args.dump_debug.is_some();
    cfg.validate().map_err(|e| Failure::new(EXIT_CONFIG, e.to_string()))?;
    Ok(cfg)
}

fn dump_debug(dir: &Path, name: &str, a: &PlanAnalysis) -> Result<(), Failure> {
    let base = format!("{name}-{}", a.scene.plan_index);
    let save = |suffix: &str, f: &dyn Fn(&mut BufWriter<fs::File>) -> io::Result<()>| -> Result<(), Failure> {
        let path = dir.join(format!("{base}-{suffix}.pgm"));
        let file = fs::File::create(&path).map_err(|e| Failure::io(&path, e))?;
        let mut w = BufWriter::new(file);
        f(&mut w).and_then(|_| w.flush()).map_err(|e| Failure::io(&path, e))
    };
    if let Some(d) = &a.restored.debug {
        save("raw", &|w| d.raw.write_pgm(w))?;
        save("walls", &|w| d.walls.write_pgm(w))?;
        save("labels", &|w| d.labels.write_pgm(w))?;
    }
    save("mask", &|w| a.restored.mask.write_pgm(w))
}

/// Analyses one file and writes its outputs; returns the JSON document.
fn process(path: &Path, cfg: &FloorscanConfig, args: &AnalyzeArgs) -> Result<String, Failure> {
    let text = read(path)?;
    let opts = AnalyzeOptions { timings: args.timings };
    let analyses = analyze_dxf(&text, cfg, opts).map_err(|e| match e {
        AnalyzeError::Parse(p) => Failure::new(EXIT_PARSE, format!("{}: {p}", path.display())),
        AnalyzeError::Ingest(i) => Failure::new(EXIT_PARSE, format!("{}: {i}", path.display())),
    })?;
    let name = stem(path);
    if let Some(dir) = &args.svg {
        for a in &analyses {
            write(&dir.join(format!("{name}-{}.svg", a.scene.plan_index)), emit_svg(&a.scene, &a.cluster).as_bytes())?;
        }
    }
    if let Some(dir) = &args.dump_debug {
        for a in &analyses {
            dump_debug(dir, &name, a)?;
        }
    }
    for a in &analyses {
        for w in &a.scene.warnings {
            eprintln!("warning: {}: plan {}: {w}", path.display(), a.scene.plan_index);
        }
    }
    let scenes: Vec<_> = analyses.into_iter().map(|a| a.scene).collect();
    Ok(emit_json(&scenes))
}

fn run_analyze(args: &AnalyzeArgs) -> Result<(), Failure> {
    let cfg = load_config(args)?;
    for dir in [&args.svg, &args.dump_debug].into_iter().flatten() {
        create_dir(dir)?;
    }
    let batch = args.inputs.len() > 1;
    let out_dir = if batch { Some(args.output.clone().unwrap_or_else(|| PathBuf::from("."))) } else { None };
    if let Some(d) = &out_dir {
        create_dir(d)?;
    }
    let work = |path: &PathBuf| -> Result<(), Failure> {
        let json = process(path, &cfg, args)?;
        match (&out_dir, &args.output) {
            (Some(dir), _) => write(&dir.join(format!("{}.json", stem(path))), json.as_bytes()),
            (None, Some(file)) => write(file, json.as_bytes()),
            (None, None) => {
                let mut out = io::stdout().lock();
                writeln!(out, "{json}").map_err(|e| Failure::io(Path::new("<stdout>"), e))
            }
        }
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.jobs.unwrap_or(0))
        .build()
        .map_err(|e| Failure::new(EXIT_CONFIG, format!("cannot start workers: {e}")))?;
    let results: Vec<Result<(), Failure>> = pool.install(|| args.inputs.par_iter().map(work).collect());
    let mut first = None;
    for r in results {
        if let Err(f) = r {
            eprintln!("error: {}", f.message);
            first.get_or_insert(f.code);
        }
    }
    match first {
        Some(code) => Err(Failure::new(code, String::new())),
        None => Ok(()),
    }
}

fn run_synth(spec: &Path, out: &Path, truth: &Path) -> Result<(), Failure> {
    let spec: SyntheticSpec = serde_json::from_str(&read(spec)?)
        .map_err(|e| Failure::new(EXIT_PARSE, format!("{}: line {}: {e}", spec.display(), e.line())))?;
    let syn = generate_synthetic(&spec).map_err(|e| Failure::new(EXIT_CONFIG, e.to_string()))?;
    write(out, syn.dxf.as_bytes())?;
    write(truth, emit_json(&[syn.truth]).as_bytes())
}

fn run_score(result: &Path, truth: &Path, iou: f64) -> Result<(), Failure> {
    let load = |p: &Path| {
        parse_json(&read(p)?).map_err(|e| Failure::new(EXIT_PARSE, format!("{}: line {}: {e}", p.display(), e.line())))
    };
    if !(0.0..=1.0).contains(&iou) {
        return Err(Failure::new(EXIT_CONFIG, format!("--iou must lie in [0, 1], got {iou}")));
    }
    let (r, t) = (load(result)?, load(truth)?);
    let s = score_all(&r.scenes, &t.scenes, iou);
    let mut out = io::stdout().lock();
    for (name, c) in [("walls", s.walls), ("doors", s.doors), ("windows", s.windows)] {
        writeln!(
            out,
            "{name:<8} precision {:.4} recall {:.4} f1 {:.4} (matched {}, predicted {}, truth {})",
            c.precision(),
            c.recall(),
            c.f1(),
            c.matched,
            c.predicted,
            c.truth
        )
        .map_err(|e| Failure::io(Path::new("<stdout>"), e))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Some(Command::Synth { spec, out, truth }) => run_synth(spec, out, truth),
        Some(Command::Score { result, truth, iou }) => run_score(result, truth, *iou),
        None => run_analyze(&cli.analyze),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            if !f.message.is_empty() {
                eprintln!("error: {}", f.message);
            }
            ExitCode::from(f.code)
        }
    }
}
