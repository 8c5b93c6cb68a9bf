//! Command-line front end: detect stay-points, dump displacement curves,
//! generate synthetic data, and score detections against ground truth.

use std::fs;
use std::io::{BufRead, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use staycurve::{
    detect, parse_gpx, parse_ground_truth, parse_sample_fields, parse_trajectory_csv, report,
    split_by_day, threshold_detect, to_spatial_curve, write_ground_truth_csv, write_trajectory_csv,
    DerivativeSeries, DetectorConfig, MatchConfig, SamplingPolicy, Scenario, StayClass, StayPoint,
    StreamingDetector, ThresholdConfig, Trajectory,
};

#[derive(Parser)]
#[command(
    name = "staycurve",
    version,
    about = "Stay-point detection on GPS trajectories via displacement-curve analysis"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Detect stay-points in a trajectory file (or a live stdin stream).
    Detect(DetectArgs),
    /// Dump the displacement curve with derivatives and per-point classes.
    Curve(CurveArgs),
    /// Generate a synthetic trajectory with known ground truth.
    Synth(SynthArgs),
    /// Score detected stay-points against ground truth.
    Eval(EvalArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Gpx,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    /// Displacement-curve derivative analysis.
    Extrema,
    /// Classic distance/time-threshold baseline.
    Threshold,
}

#[derive(Args)]
struct DetectArgs {
    /// Trajectory file (CSV `timestamp,lat,lon` or GPX track).
    #[arg(
        long,
        required_unless_present = "streaming",
        conflicts_with = "streaming"
    )]
    input: Option<PathBuf>,
    /// Input format; inferred from the file extension when omitted.
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long, value_enum, default_value_t = Method::Extrema)]
    method: Method,
    /// Read CSV rows from stdin and emit events as they are determined.
    #[arg(long)]
    streaming: bool,
    /// Flatness threshold: slope (km/min) below which a point is
    /// considered stationary.
    #[arg(long, default_value_t = 0.05)]
    e: f64,
    /// Minimum confidence (percent) for the stay class.
    #[arg(long, default_value_t = 80.0)]
    stay_threshold: f64,
    /// Minimum confidence (percent) for the candidate class.
    #[arg(long, default_value_t = 60.0)]
    candidate_threshold: f64,
    /// Also emit inflection-class regions (needed for inflection
    /// statistics in `eval`).
    #[arg(long)]
    include_inflections: bool,
    /// Threshold method: window radius, metres.
    #[arg(long, default_value_t = 200.0)]
    distance_m: f64,
    /// Threshold method: minimum elapsed time, minutes.
    #[arg(long, default_value_t = 20.0)]
    time_min: f64,
}

#[derive(Args)]
struct CurveArgs {
    /// Trajectory file (CSV `timestamp,lat,lon` or GPX track).
    #[arg(long)]
    input: PathBuf,
    /// Input format; inferred from the file extension when omitted.
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Output CSV path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PolicyPreset {
    /// Distance logger, one fix per 100 m.
    Sls100,
    /// Distance logger, one fix per 250 m.
    Sls250,
    /// Distance logger, one fix per 500 m.
    Sls500,
    /// Phone-style: 500 m / 5 min with wake-up bursts.
    Hybrid,
}

#[derive(Args)]
struct SynthArgs {
    /// Scenario description, JSON.
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long, value_enum, default_value_t = PolicyPreset::Sls100)]
    policy: PolicyPreset,
    /// Gaussian position noise sigma, metres.
    #[arg(long, default_value_t = 0.0)]
    sigma: f64,
    /// Fraction of fixes replaced by outlier readings.
    #[arg(long, default_value_t = 0.0)]
    outlier_rate: f64,
    /// Maximum outlier displacement, metres.
    #[arg(long, default_value_t = 1000.0)]
    outlier_max_m: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Trajectory CSV output path.
    #[arg(long)]
    out: PathBuf,
    /// Ground-truth CSV output path.
    #[arg(long)]
    truth: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    /// Detected stay-points, JSON lines (as emitted by `detect`).
    #[arg(long)]
    detected: PathBuf,
    /// Ground-truth stays, CSV.
    #[arg(long)]
    truth: PathBuf,
    /// Maximum detected-to-truth coordinate distance, metres.
    #[arg(long, default_value_t = 500.0)]
    radius_m: f64,
    /// Minimum temporal overlap for a match, minutes.
    #[arg(long, default_value_t = 1.0)]
    min_overlap_min: f64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Detect(args) => run_detect(args),
        Command::Curve(args) => run_curve(args),
        Command::Synth(args) => run_synth(args),
        Command::Eval(args) => run_eval(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn load_days(path: &Path, format: Option<Format>) -> Result<Vec<Trajectory>> {
    let format = format.unwrap_or_else(|| match path.extension().and_then(|e| e.to_str()) {
        Some(e) if e.eq_ignore_ascii_case("gpx") => Format::Gpx,
        _ => Format::Csv,
    });
    let text = read_file(path)?;
    let samples = match format {
        Format::Csv => parse_trajectory_csv(&text)
            .with_context(|| format!("failed to parse {}", path.display()))?,
        Format::Gpx => {
            let (samples, skipped) =
                parse_gpx(&text).with_context(|| format!("failed to parse {}", path.display()))?;
            if skipped > 0 {
                eprintln!("note: skipped {skipped} trackpoint(s) without a <time> element");
            }
            samples
        }
    };
    Ok(split_by_day(&samples))
}

fn emit_record(out: &mut impl Write, record: &StayPoint) -> Result<()> {
    let line = serde_json::to_string(record).context("serializing stay-point")?;
    writeln!(out, "{line}")?;
    Ok(())
}

fn keep_class(record: &StayPoint, include_inflections: bool) -> bool {
    include_inflections || record.class != StayClass::Inflection
}

fn run_detect(args: DetectArgs) -> Result<()> {
    let cfg = DetectorConfig {
        e: args.e,
        stay_threshold: args.stay_threshold,
        candidate_threshold: args.candidate_threshold,
        ..Default::default()
    };
    if args.streaming {
        if args.method == Method::Threshold {
            bail!("--streaming supports only the extrema method");
        }
        return run_detect_streaming(&cfg, args.include_inflections);
    }

    let input = args.input.as_deref().expect("clap enforces --input");
    let days = load_days(input, args.format)?;
    let stdout = std::io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    for day in &days {
        let records = match args.method {
            Method::Extrema => detect(day, &cfg),
            Method::Threshold => threshold_detect(
                day,
                &ThresholdConfig {
                    distance_m: args.distance_m,
                    time_min: args.time_min,
                },
            ),
        };
        for record in records
            .iter()
            .filter(|r| keep_class(r, args.include_inflections))
        {
            emit_record(&mut out, record)?;
        }
    }
    out.flush()?;
    Ok(())
}

fn run_detect_streaming(cfg: &DetectorConfig, include_inflections: bool) -> Result<()> {
    let stdin = std::io::stdin();
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let mut detector = StreamingDetector::new(*cfg);
    for (i, line) in stdin.lock().lines().enumerate() {
        let line = line.context("reading stdin")?;
        let line_no = i as u64 + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || (line_no == 1 && trimmed.starts_with("timestamp")) {
            continue;
        }
        let mut fields = trimmed.split(',');
        let (ts, lat, lon) = match (fields.next(), fields.next(), fields.next(), fields.next()) {
            (Some(ts), Some(lat), Some(lon), None) => (ts, lat, lon),
            _ => bail!("line {line_no}: expected `timestamp,lat,lon`"),
        };
        let sample = parse_sample_fields(ts, lat, lon, line_no)?;
        for record in detector.push(&sample)? {
            if keep_class(&record, include_inflections) {
                emit_record(&mut out, &record)?;
                out.flush()?;
            }
        }
    }
    for record in detector.flush() {
        if keep_class(&record, include_inflections) {
            emit_record(&mut out, &record)?;
        }
    }
    out.flush()?;
    Ok(())
}

fn run_curve(args: CurveArgs) -> Result<()> {
    let days = load_days(&args.input, args.format)?;
    let mut body = String::from("x_min,y_km,dy,d2y,class\n");
    for day in &days {
        let curve = to_spatial_curve(day);
        let n = curve.points.len();
        let (d1, d2) = if n >= 2 {
            let series = DerivativeSeries::of(&curve).expect("two or more points");
            (series.d1, series.d2)
        } else {
            (vec![0.0; n], vec![0.0; n])
        };
        let mut classes = vec!["none"; n];
        for record in detect(day, &DetectorConfig::default()) {
            let (k, w) = record.region;
            let label = match record.class {
                StayClass::Stay => "stay",
                StayClass::Candidate => "candidate",
                StayClass::Inflection => "inflection",
            };
            for c in classes.iter_mut().take(w + 1).skip(k) {
                *c = label;
            }
        }
        for (i, p) in curve.points.iter().enumerate() {
            body.push_str(&format!(
                "{},{},{},{},{}\n",
                p.x, p.y, d1[i], d2[i], classes[i]
            ));
        }
    }
    match &args.out {
        Some(path) => {
            fs::write(path, body).with_context(|| format!("cannot write {}", path.display()))?
        }
        None => print!("{body}"),
    }
    Ok(())
}

fn run_synth(args: SynthArgs) -> Result<()> {
    let text = read_file(&args.scenario)?;
    let scenario: Scenario = serde_json::from_str(&text)
        .with_context(|| format!("failed to parse scenario {}", args.scenario.display()))?;
    let mut policy = match args.policy {
        PolicyPreset::Sls100 => SamplingPolicy::sls(100.0),
        PolicyPreset::Sls250 => SamplingPolicy::sls(250.0),
        PolicyPreset::Sls500 => SamplingPolicy::sls(500.0),
        PolicyPreset::Hybrid => SamplingPolicy::hybrid(),
    };
    policy.noise_sigma_m = args.sigma;
    policy.outlier_rate = args.outlier_rate;
    policy.outlier_max_m = args.outlier_max_m;

    let (trajectory, truth) = staycurve::generate(&scenario, &policy, args.seed)?;
    let mut buf = Vec::new();
    write_trajectory_csv(&trajectory.samples, &mut buf)?;
    fs::write(&args.out, &buf).with_context(|| format!("cannot write {}", args.out.display()))?;
    if let Some(truth_path) = &args.truth {
        let mut buf = Vec::new();
        write_ground_truth_csv(&truth, &mut buf)?;
        fs::write(truth_path, &buf)
            .with_context(|| format!("cannot write {}", truth_path.display()))?;
    }
    eprintln!(
        "generated {} samples, {} ground-truth stay(s)",
        trajectory.samples.len(),
        truth.len()
    );
    Ok(())
}

fn run_eval(args: EvalArgs) -> Result<()> {
    let detected_text = read_file(&args.detected)?;
    let mut detected = Vec::new();
    for (i, line) in detected_text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let record: StayPoint = serde_json::from_str(line).with_context(|| {
            format!(
                "{} line {}: bad stay-point record",
                args.detected.display(),
                i + 1
            )
        })?;
        detected.push(record);
    }
    let truth = parse_ground_truth(&read_file(&args.truth)?)
        .with_context(|| format!("failed to parse {}", args.truth.display()))?;

    let cfg = MatchConfig {
        radius_m: args.radius_m,
        min_overlap_min: args.min_overlap_min,
    };
    let report = report(&detected, &truth, &cfg);
    eprint!("{}", report.render_table());
    println!(
        "{}",
        serde_json::to_string_pretty(&report).context("serializing report")?
    );
    Ok(())
}
