//! Command-line surface. [`run`] parses arguments, executes one subcommand
//! and returns the process exit code: 0 success, 2 bad input, 3 detector
//! failure, 4 a patch that no sub-frame can hold.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use clap::{Parser, Subcommand, ValueEnum};
use log::{info, warn};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::Config;
use crate::error::{Error, Result};
use crate::extraction::{extract_patches, frame_difference, load_patches, save_patches, BinaryMask};
use crate::geometry::{CompositionPlan, FrameSize};
use crate::optimizer::{compose_detailed, div_tile_count};
use crate::oracle::brute_force_min_subframes;
use crate::pipeline::eval::{load_annotations, load_predictions, write_predictions};
use crate::pipeline::{
    evaluate, finish_frame, prepare_frame, render_subframes, run_div, run_ds, Annotation,
    Detector, DetectorError, EvalReport, ExternalDetector, OracleDetector, Prediction,
    StageTimes,
};
use crate::raster::Raster;
use crate::svg::plan_svg;
use crate::synth;

#[derive(Debug, Parser)]
#[command(name = "patchcomp", version, about = "Patch-of-interest composition for detection")]
pub struct Cli {
    /// Print the documented default configuration and exit.
    #[arg(long)]
    pub print_default_config: bool,

    /// Worker threads for `run` and `bench` (default: logical cores).
    #[arg(long, short = 'j', global = true)]
    pub jobs: Option<usize>,

    /// More log output (-v info, -vv debug).
    #[arg(long, short = 'v', action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Extract, compose and detect on sub-frames.
    Composed,
    /// Whole frame downsampled to the detector size.
    Ds,
    /// Fixed non-overlapping tiling.
    Div,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Turn a foreground mask into a patch list.
    Extract {
        #[arg(long)]
        frame: PathBuf,
        /// Previous frame; the mask comes from differencing against it.
        #[arg(long)]
        prev: Option<PathBuf>,
        /// Foreground mask to read, or with --prev the path the computed mask is written to.
        #[arg(long)]
        mask: Option<PathBuf>,
        /// key = value configuration; built-in defaults when absent.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Pack patches into sub-frames and write the plan as JSON.
    Compose {
        #[arg(long)]
        patches: PathBuf,
        /// key = value configuration; built-in defaults when absent.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Overrides rng_seed from the configuration.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Write the detector-size image of every sub-frame in a plan.
    Render {
        #[arg(long)]
        frame: PathBuf,
        #[arg(long)]
        plan: PathBuf,
        #[arg(long)]
        outdir: PathBuf,
        /// key = value configuration; built-in defaults when absent.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Full pipeline over a directory of frames.
    Run {
        #[command(flatten)]
        frames: FrameArgs,
        /// key = value configuration; built-in defaults when absent.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Overrides rng_seed from the configuration.
        #[arg(long)]
        seed: Option<u64>,
        /// `oracle` or a shell command speaking the detector protocol.
        #[arg(long)]
        detector: String,
        /// Ground truth; required by the oracle detector and for scoring.
        #[arg(long)]
        annotations: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Method::Composed)]
        method: Method,
        #[arg(long)]
        report: PathBuf,
        /// Also write every mapped detection as CSV.
        #[arg(long)]
        predictions: Option<PathBuf>,
    },
    /// Score predictions against ground truth.
    Eval {
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        gt: PathBuf,
        #[arg(long, default_value_t = 0.5)]
        iou: f64,
        /// Report path; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Per-stage timing over a set of frames.
    Bench {
        #[command(flatten)]
        frames: FrameArgs,
        /// Generate this many synthetic frames instead of reading --frames.
        #[arg(long, conflicts_with = "frames")]
        synthetic: Option<usize>,
        /// key = value configuration; built-in defaults when absent.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Overrides rng_seed from the configuration.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 1)]
        repeat: usize,
        /// Defaults to the oracle detector.
        #[arg(long)]
        detector: Option<String>,
        #[arg(long)]
        annotations: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exhaustive minimum sub-frame count for a small unscaled patch list.
    Oracle {
        #[arg(long)]
        patches: PathBuf,
        /// key = value configuration; built-in defaults when absent.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, clap::Args)]
pub struct FrameArgs {
    /// Directory of .pgm/.ppm/.pnm frames, processed in file name order.
    #[arg(long)]
    pub frames: Option<PathBuf>,
    /// Directory of masks named like the frames.
    #[arg(long, requires = "frames")]
    pub masks: Option<PathBuf>,
    /// Static background image to difference every frame against.
    #[arg(long, requires = "frames", conflicts_with = "masks")]
    pub background: Option<PathBuf>,
}

/// Parse `args` (including the program name) and execute.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    let _ = env_logger::Builder::new()
        .filter_level(level)
        .format_timestamp(None)
        .try_init();

    if cli.print_default_config {
        print!("{}", Config::default().to_text());
        return 0;
    }
    let Some(command) = cli.command else {
        eprintln!("error: a subcommand is required (see --help)");
        return 2;
    };
    match execute(command, cli.jobs) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Detector(_) => 3,
        Error::PatchExceedsCapacity { .. } => 4,
        _ => 2,
    }
}

fn load_config(path: Option<&Path>, seed: Option<u64>) -> Result<Config> {
    let mut c = match path {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    if let Some(s) = seed {
        c.pipeline.ga.rng_seed = s;
    }
    Ok(c)
}

fn write_json(path: Option<&Path>, value: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    match path {
        Some(p) => fs::write(p, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn execute(command: Command, jobs: Option<usize>) -> Result<()> {
    match command {
        Command::Extract {
            frame,
            prev,
            mask,
            config,
            out,
        } => {
            let cfg = load_config(config.as_deref(), None)?;
            let frame = Raster::read_pnm(&frame)?;
            let mask = match (prev, mask) {
                (Some(prev), mask_out) => {
                    let prev = Raster::read_pnm(&prev)?;
                    let m = frame_difference(&frame, &prev, cfg.pipeline.extraction.diff_threshold)?;
                    if let Some(p) = mask_out {
                        m.to_raster().write_pnm(p)?;
                    }
                    m
                }
                (None, Some(p)) => read_mask(&p, &frame)?,
                (None, None) => {
                    return Err(Error::InvalidInput("extract needs --mask or --prev".into()))
                }
            };
            let profile = cfg.profile(frame.height)?;
            let patches = extract_patches(&mask, &profile, &cfg.pipeline.extraction);
            info!("{} patches", patches.len());
            save_patches(&out, &patches)
        }
        Command::Compose {
            patches,
            config,
            seed,
            out,
            svg,
        } => {
            let cfg = load_config(config.as_deref(), seed)?;
            let patches = load_patches(&patches)?;
            let p = &cfg.pipeline;
            let comp = compose_detailed(
                &patches,
                &cfg.profile(cfg.frame_size.height)?,
                &p.objective,
                &p.ga,
                p.detector_size as f64,
                cfg.frame_size,
            )?;
            info!(
                "{} patches in {} sub-frames ({} relocated, fallback: {})",
                patches.len(),
                comp.plan.sub_frames.len(),
                comp.plan.relocated_count(),
                comp.stats.used_fallback
            );
            write_json(Some(&out), &comp.plan)?;
            if let Some(svg) = svg {
                fs::write(svg, plan_svg(&comp.plan, &patches))?;
            }
            Ok(())
        }
        Command::Render {
            frame,
            plan,
            outdir,
            config,
        } => {
            let cfg = load_config(config.as_deref(), None)?;
            let frame = Raster::read_pnm(&frame)?;
            let text = fs::read_to_string(&plan)?;
            let plan: CompositionPlan = serde_json::from_str(&text).map_err(|e| Error::Format {
                path: plan.clone(),
                message: e.to_string(),
            })?;
            let images = render_subframes(&frame, &plan, cfg.pipeline.interpolation)?;
            fs::create_dir_all(&outdir)?;
            let ext = if frame.channels == 1 { "pgm" } else { "ppm" };
            for (j, img) in images.iter().enumerate() {
                img.write_pnm(outdir.join(format!("sub_{j:03}.{ext}")))?;
            }
            Ok(())
        }
        Command::Run {
            frames,
            config,
            seed,
            detector,
            annotations,
            method,
            report,
            predictions,
        } => {
            let cfg = load_config(config.as_deref(), seed)?;
            let gt = annotations.as_deref().map(load_annotations).transpose()?;
            let source = FrameSource::from_args(&frames)?;
            let mut det = make_detector(Some(&detector), gt.as_deref(), &cfg)?;
            let pool = pool(jobs)?;
            let t = Instant::now();
            let results = process_all(&source, &cfg, method, det.as_mut(), &pool)?;
            let elapsed = t.elapsed();
            let summary = RunReport::new(method, &cfg, &results, gt.as_deref(), elapsed);
            if let Some(path) = predictions {
                let preds: Vec<Prediction> =
                    results.iter().flat_map(|r| r.predictions.iter().cloned()).collect();
                let mut f = std::io::BufWriter::new(fs::File::create(path)?);
                write_predictions(&mut f, &preds)?;
                f.flush()?;
            }
            write_json(Some(&report), &summary)?;
            let needed = results.iter().filter(|r| r.invocations > 0);
            let failed = summary.failed_frames.len();
            if failed > 0 && needed.clone().all(|r| r.failed) {
                return Err(Error::Detector(DetectorError::AllFramesFailed(needed.count())));
            }
            Ok(())
        }
        Command::Eval { pred, gt, iou, out } => {
            let preds = load_predictions(&pred)?;
            let gt = load_annotations(&gt)?;
            if !(iou > 0.0 && iou <= 1.0) {
                return Err(Error::InvalidInput(format!("--iou {iou} outside (0, 1]")));
            }
            write_json(out.as_deref(), &evaluate(&preds, &gt, iou))
        }
        Command::Bench {
            frames,
            synthetic,
            config,
            seed,
            repeat,
            detector,
            annotations,
            out,
        } => {
            let cfg = load_config(config.as_deref(), seed)?;
            let source = match synthetic {
                Some(n) => FrameSource::synthetic(n, &cfg),
                None => FrameSource::from_args(&frames)?,
            };
            let mut gt = annotations.as_deref().map(load_annotations).transpose()?;
            if gt.is_none() {
                if let FrameSource::Synthetic(scenes) = &source {
                    gt = Some(scenes.iter().flat_map(|s| s.annotations.clone()).collect());
                }
            }
            let mut det = make_detector(detector.as_deref(), gt.as_deref(), &cfg)?;
            let pool = pool(jobs)?;
            let mut samples: Vec<StageTimes> = Vec::new();
            let t = Instant::now();
            for _ in 0..repeat.max(1) {
                let results = process_all(&source, &cfg, Method::Composed, det.as_mut(), &pool)?;
                samples.extend(results.iter().filter(|r| !r.failed).map(|r| r.times));
            }
            let report = BenchReport::new(&samples, source.len(), repeat.max(1), t.elapsed());
            write_json(out.as_deref(), &report)
        }
        Command::Oracle {
            patches,
            config,
            out,
        } => {
            let cfg = load_config(config.as_deref(), None)?;
            let patches = load_patches(&patches)?;
            let p = &cfg.pipeline;
            let sol = brute_force_min_subframes(
                &patches,
                p.detector_size as f64,
                cfg.frame_size,
                p.ga.grid_stride,
                p.ga.n_r,
            )?;
            write_json(out.as_deref(), &sol)
        }
    }
}

fn pool(jobs: Option<usize>) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| Error::InvalidInput(format!("worker pool: {e}")))
}

fn make_detector(
    choice: Option<&str>,
    gt: Option<&[Annotation]>,
    cfg: &Config,
) -> Result<Box<dyn Detector>> {
    match choice {
        None | Some("oracle") => Ok(Box::new(
            OracleDetector::new(gt.unwrap_or(&[])).with_min_side(cfg.oracle_min_side),
        )),
        Some(cmd) => Ok(Box::new(ExternalDetector::new(cmd, cfg.detector_timeout)?)),
    }
}

fn read_mask(path: &Path, frame: &Raster) -> Result<BinaryMask> {
    let m = BinaryMask::from_raster(&Raster::read_pnm(path)?);
    if (m.width, m.height) != frame.size() {
        return Err(Error::DimensionMismatch {
            expected: frame.size(),
            actual: (m.width, m.height),
        });
    }
    Ok(m)
}

enum MaskSource {
    Dir(PathBuf),
    Background(Raster),
    /// Difference against the previous frame; the first frame is empty.
    Previous,
}

enum FrameSource {
    Files { paths: Vec<PathBuf>, masks: MaskSource },
    Synthetic(Vec<synth::Scene>),
}

fn is_image(p: &Path) -> bool {
    matches!(
        p.extension().and_then(|e| e.to_str()),
        Some("pgm" | "ppm" | "pnm")
    )
}

fn image_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)?
        .map(|e| e.map(|e| e.path()))
        .collect::<std::io::Result<_>>()?;
    paths.retain(|p| p.is_file() && is_image(p));
    paths.sort();
    Ok(paths)
}

fn frame_id(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

impl FrameSource {
    fn from_args(args: &FrameArgs) -> Result<Self> {
        let dir = args
            .frames
            .as_ref()
            .ok_or_else(|| Error::InvalidInput("--frames is required".into()))?;
        let paths = image_files(dir)?;
        if paths.is_empty() {
            return Err(Error::InvalidInput(format!("no frames in {}", dir.display())));
        }
        let masks = match (&args.masks, &args.background) {
            (Some(d), _) => MaskSource::Dir(d.clone()),
            (None, Some(b)) => MaskSource::Background(Raster::read_pnm(b)?),
            (None, None) => MaskSource::Previous,
        };
        Ok(Self::Files { paths, masks })
    }

    fn synthetic(n: usize, cfg: &Config) -> Self {
        use rand::Rng;
        let mut rng = synth::rng(cfg.pipeline.ga.rng_seed);
        let scenes = (0..n)
            .map(|i| {
                let k = rng.gen_range(1..=30);
                synth::scene(
                    &mut rng,
                    &format!("synthetic_{i:05}"),
                    cfg.frame_size,
                    k,
                    8,
                    80,
                    cfg.pipeline.extraction.margin,
                )
            })
            .collect();
        Self::Synthetic(scenes)
    }

    fn len(&self) -> usize {
        match self {
            Self::Files { paths, .. } => paths.len(),
            Self::Synthetic(s) => s.len(),
        }
    }

    fn load(&self, i: usize, cfg: &Config) -> Result<(String, Raster, BinaryMask)> {
        match self {
            Self::Synthetic(s) => {
                let s = &s[i];
                Ok((s.frame_id.clone(), s.frame.clone(), s.mask.clone()))
            }
            Self::Files { paths, masks } => {
                let frame = Raster::read_pnm(&paths[i])?;
                let id = frame_id(&paths[i]);
                let thr = cfg.pipeline.extraction.diff_threshold;
                let mask = match masks {
                    MaskSource::Dir(dir) => {
                        let candidates = ["pgm", "pnm", "ppm"].map(|e| dir.join(format!("{id}.{e}")));
                        let path = candidates.iter().find(|p| p.is_file()).ok_or_else(|| {
                            Error::InvalidInput(format!("no mask for frame {id} in {}", dir.display()))
                        })?;
                        read_mask(path, &frame)?
                    }
                    MaskSource::Background(bg) => frame_difference(&frame, bg, thr)?,
                    MaskSource::Previous if i == 0 => BinaryMask::new(frame.width, frame.height),
                    MaskSource::Previous => {
                        frame_difference(&frame, &Raster::read_pnm(&paths[i - 1])?, thr)?
                    }
                };
                Ok((id, frame, mask))
            }
        }
    }
}

enum Prepared {
    Composed(crate::pipeline::PreparedFrame),
    Raw { frame_id: String, frame: Raster },
}

#[derive(Debug, Clone)]
struct FrameResult {
    frame_id: String,
    failed: bool,
    patches: usize,
    invocations: usize,
    tiles: usize,
    relocated: usize,
    dropped: usize,
    predictions: Vec<Prediction>,
    times: StageTimes,
}

/// Frames are loaded and composed on the pool in chunks, then detected in
/// order on the calling thread, which owns the detector.
fn process_all(
    source: &FrameSource,
    cfg: &Config,
    method: Method,
    detector: &mut dyn Detector,
    pool: &rayon::ThreadPool,
) -> Result<Vec<FrameResult>> {
    let chunk = pool.current_num_threads().max(1) * 4;
    let mut out = Vec::with_capacity(source.len());
    let p = &cfg.pipeline;
    for start in (0..source.len()).step_by(chunk) {
        let end = (start + chunk).min(source.len());
        let prepared: Vec<Result<Prepared>> = pool.install(|| {
            (start..end)
                .into_par_iter()
                .map(|i| {
                    let (id, frame, mask) = source.load(i, cfg)?;
                    Ok(match method {
                        Method::Composed => {
                            let profile = cfg.profile(frame.height)?;
                            Prepared::Composed(prepare_frame(&id, &frame, &mask, &profile, p)?)
                        }
                        _ => Prepared::Raw { frame_id: id, frame },
                    })
                })
                .collect()
        });
        for prep in prepared {
            out.push(detect_one(prep?, cfg, method, detector));
        }
    }
    Ok(out)
}

fn detect_one(prep: Prepared, cfg: &Config, method: Method, detector: &mut dyn Detector) -> FrameResult {
    let p = &cfg.pipeline;
    match prep {
        Prepared::Composed(prep) => {
            let frame_id = prep.frame_id.clone();
            let tiles = div_tile_count(prep.plan.frame_size, p.detector_size as f64);
            let (patches, invocations) = (prep.patches.len(), prep.plan.sub_frames.len());
            let relocated = prep.plan.relocated_count();
            let times = prep.times;
            match finish_frame(prep, detector, p.nms_iou) {
                Ok(o) => FrameResult {
                    predictions: o.boxes.into_iter().map(|b| b.into_prediction(&frame_id)).collect(),
                    frame_id,
                    failed: false,
                    patches,
                    invocations,
                    tiles,
                    relocated,
                    dropped: o.dropped,
                    times: o.times,
                },
                Err(e) => {
                    warn!("frame {frame_id} skipped: {e}");
                    FrameResult {
                        frame_id,
                        failed: true,
                        patches,
                        invocations,
                        tiles,
                        relocated,
                        dropped: 0,
                        predictions: Vec::new(),
                        times,
                    }
                }
            }
        }
        Prepared::Raw { frame_id, frame } => {
            let size = FrameSize::new(frame.width, frame.height);
            let tiles = div_tile_count(size, p.detector_size as f64);
            let t = Instant::now();
            let (res, invocations) = match method {
                Method::Ds => (run_ds(&frame, &frame_id, detector, p.detector_size), 1),
                _ => (
                    run_div(&frame, &frame_id, detector, p.detector_size, p.nms_iou),
                    tiles,
                ),
            };
            let times = StageTimes {
                detect: t.elapsed(),
                ..StageTimes::default()
            };
            let (failed, predictions) = match res {
                Ok(b) => (false, b.into_iter().map(|b| b.into_prediction(&frame_id)).collect()),
                Err(e) => {
                    warn!("frame {frame_id} skipped: {e}");
                    (true, Vec::new())
                }
            };
            FrameResult {
                frame_id,
                failed,
                patches: 0,
                invocations,
                tiles,
                relocated: 0,
                dropped: 0,
                predictions,
                times,
            }
        }
    }
}

#[derive(Debug, Serialize)]
struct StageMillis {
    extraction: f64,
    composition: f64,
    render: f64,
    detect: f64,
    map_back: f64,
}

fn ms(d: Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

impl StageMillis {
    fn from_fn(f: impl Fn(&dyn Fn(&StageTimes) -> Duration) -> f64) -> Self {
        Self {
            extraction: f(&|t| t.extraction),
            composition: f(&|t| t.composition),
            render: f(&|t| t.render),
            detect: f(&|t| t.detect),
            map_back: f(&|t| t.map_back),
        }
    }
}

#[derive(Debug, Serialize)]
struct RunReport {
    method: Method,
    frames: usize,
    failed_frames: Vec<String>,
    patches: usize,
    relocated_patches: usize,
    detector_invocations: usize,
    tiling_invocations: usize,
    dropped_boxes: usize,
    predictions: usize,
    stage_ms_mean: StageMillis,
    wall_seconds: f64,
    eval: Option<EvalReport>,
}

impl RunReport {
    fn new(
        method: Method,
        cfg: &Config,
        results: &[FrameResult],
        gt: Option<&[Annotation]>,
        elapsed: Duration,
    ) -> Self {
        let n = results.len().max(1) as f64;
        let fps = if elapsed.as_secs_f64() > 0.0 {
            results.len() as f64 / elapsed.as_secs_f64()
        } else {
            0.0
        };
        let preds: Vec<Prediction> = results.iter().flat_map(|r| r.predictions.iter().cloned()).collect();
        let eval = gt.map(|gt| {
            let mut r = evaluate(&preds, gt, cfg.iou_threshold);
            r.frames_per_second = fps;
            r
        });
        Self {
            method,
            frames: results.len(),
            failed_frames: results.iter().filter(|r| r.failed).map(|r| r.frame_id.clone()).collect(),
            patches: results.iter().map(|r| r.patches).sum(),
            relocated_patches: results.iter().map(|r| r.relocated).sum(),
            detector_invocations: results.iter().map(|r| r.invocations).sum(),
            tiling_invocations: results.iter().map(|r| r.tiles).sum(),
            dropped_boxes: results.iter().map(|r| r.dropped).sum(),
            predictions: preds.len(),
            stage_ms_mean: StageMillis::from_fn(|g| results.iter().map(|r| ms(g(&r.times))).sum::<f64>() / n),
            wall_seconds: elapsed.as_secs_f64(),
            eval,
        }
    }
}

#[derive(Debug, Serialize)]
struct BenchReport {
    frames: usize,
    repeat: usize,
    samples: usize,
    mean_ms: StageMillis,
    p95_ms: StageMillis,
    frames_per_second: f64,
}

fn p95(mut v: Vec<f64>) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    v.sort_by(f64::total_cmp);
    let k = ((v.len() as f64 * 0.95).ceil() as usize).clamp(1, v.len());
    v[k - 1]
}

impl BenchReport {
    fn new(samples: &[StageTimes], frames: usize, repeat: usize, elapsed: Duration) -> Self {
        let n = samples.len().max(1) as f64;
        Self {
            frames,
            repeat,
            samples: samples.len(),
            mean_ms: StageMillis::from_fn(|g| samples.iter().map(|t| ms(g(t))).sum::<f64>() / n),
            p95_ms: StageMillis::from_fn(|g| p95(samples.iter().map(|t| ms(g(t))).collect())),
            frames_per_second: (frames * repeat) as f64 / elapsed.as_secs_f64().max(1e-9),
        }
    }
}
