//! Flat `key = value` run configuration.
//!
//! `#` starts a comment. Unknown keys are errors. The scaling calibration
//! is optional; when its keys are absent every patch gets β = 1.

use std::path::Path;
use std::time::Duration;

use crate::error::{Error, Result};
use crate::geometry::FrameSize;
use crate::pipeline::{Interpolation, PipelineConfig};
use crate::scaling::{Calibration, ScalingProfile};

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub pipeline: PipelineConfig,
    pub calibration: Option<Calibration>,
    pub n_bands: usize,
    /// Frame size assumed when only a patch list is given.
    pub frame_size: FrameSize,
    pub iou_threshold: f64,
    pub detector_timeout: Duration,
    /// Smallest box side the oracle detector reports, in detector pixels.
    pub oracle_min_side: f64,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            pipeline: PipelineConfig::default(),
            calibration: None,
            n_bands: 3,
            frame_size: FrameSize::new(1280, 720),
            iou_threshold: 0.5,
            detector_timeout: Duration::from_secs(10),
            oracle_min_side: 0.0,
        }
    }
}

fn parse_value<T: std::str::FromStr>(key: &str, value: &str, line: usize) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value
        .parse()
        .map_err(|e| Error::InvalidInput(format!("config line {line}: {key} = {value:?}: {e}")))
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        let mut c = Config::default();
        let mut cal = [None::<f64>; 5];
        for (n, raw) in text.lines().enumerate() {
            let line = n + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| {
                Error::InvalidInput(format!("config line {line}: expected key = value"))
            })?;
            let (key, v) = (key.trim(), value.trim());
            let p = &mut c.pipeline;
            match key {
                "alpha" => p.objective.alpha = parse_value(key, v, line)?,
                "delta" => p.objective.delta = parse_value(key, v, line)?,
                "k_count" => p.objective.k_count = parse_value(key, v, line)?,
                "b_count" => p.objective.b_count = parse_value(key, v, line)?,
                "psi_epsilon" => p.objective.psi_epsilon = parse_value(key, v, line)?,
                "alpha3" => p.ga.alpha3 = parse_value(key, v, line)?,
                "grid_stride" => p.ga.grid_stride = parse_value(key, v, line)?,
                "tournament_size" => p.ga.tournament_size = parse_value(key, v, line)?,
                "crossover_rate" => p.ga.crossover_rate = parse_value(key, v, line)?,
                "mutation_rate" => p.ga.mutation_rate = parse_value(key, v, line)?,
                "elite_count" => p.ga.elite_count = parse_value(key, v, line)?,
                "patience" => p.ga.patience = parse_value(key, v, line)?,
                "local_search_radius" => p.ga.local_search_radius = parse_value(key, v, line)?,
                "local_search_top_fraction" => {
                    p.ga.local_search_top_fraction = parse_value(key, v, line)?
                }
                "n_r" => p.ga.n_r = parse_value(key, v, line)?,
                "max_verification_retries" => {
                    p.ga.max_verification_retries = parse_value(key, v, line)?
                }
                "max_generations" => p.ga.max_generations = parse_value(key, v, line)?,
                "archive_per_count" => p.ga.archive_per_count = parse_value(key, v, line)?,
                "rng_seed" => p.ga.rng_seed = parse_value(key, v, line)?,
                "diff_threshold" => p.extraction.diff_threshold = parse_value(key, v, line)?,
                "open_iterations" => p.extraction.open_iterations = parse_value(key, v, line)?,
                "close_iterations" => p.extraction.close_iterations = parse_value(key, v, line)?,
                "min_component_area" => {
                    p.extraction.min_component_area = parse_value(key, v, line)?
                }
                "margin" => p.extraction.margin = parse_value(key, v, line)?,
                "detector_size" => p.detector_size = parse_value(key, v, line)?,
                "interpolation" => p.interpolation = v.parse::<Interpolation>()?,
                "nms_iou" => p.nms_iou = parse_value(key, v, line)?,
                "y_ab" => cal[0] = Some(parse_value(key, v, line)?),
                "y_cd" => cal[1] = Some(parse_value(key, v, line)?),
                "l_ab" => cal[2] = Some(parse_value(key, v, line)?),
                "l_cd" => cal[3] = Some(parse_value(key, v, line)?),
                "k_cal" => cal[4] = Some(parse_value(key, v, line)?),
                "n_bands" => c.n_bands = parse_value(key, v, line)?,
                "oracle_min_side" => c.oracle_min_side = parse_value(key, v, line)?,
                "frame_width" => c.frame_size.width = parse_value(key, v, line)?,
                "frame_height" => c.frame_size.height = parse_value(key, v, line)?,
                "iou_threshold" => c.iou_threshold = parse_value(key, v, line)?,
                "detector_timeout_secs" => {
                    c.detector_timeout = Duration::from_secs_f64(parse_value(key, v, line)?)
                }
                other => {
                    return Err(Error::InvalidInput(format!(
                        "config line {line}: unknown key {other:?}"
                    )))
                }
            }
        }
        c.calibration = match cal {
            [None, None, None, None, None] => None,
            [Some(y_ab), Some(y_cd), Some(l_ab), Some(l_cd), Some(k_cal)] => {
                let cal = Calibration {
                    y_ab,
                    y_cd,
                    l_ab,
                    l_cd,
                    k_cal,
                };
                cal.validate()?;
                Some(cal)
            }
            _ => {
                return Err(Error::InvalidInput(
                    "config: calibration needs all of y_ab, y_cd, l_ab, l_cd, k_cal".into(),
                ))
            }
        };
        c.pipeline.ga.validate()?;
        if c.pipeline.detector_size == 0 {
            return Err(Error::InvalidInput("config: detector_size must be positive".into()));
        }
        Ok(c)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text).map_err(|e| match e {
            Error::InvalidInput(message) => Error::Format {
                path: path.to_owned(),
                message,
            },
            other => other,
        })
    }

    /// Scaling profile for frames of the given height.
    pub fn profile(&self, frame_height: u32) -> Result<ScalingProfile> {
        match self.calibration {
            Some(cal) => ScalingProfile::calibrated(cal, self.n_bands, frame_height),
            None => Ok(ScalingProfile::uniform(frame_height)),
        }
    }

    /// Documented configuration text; parses back to `self`.
    pub fn to_text(&self) -> String {
        let p = &self.pipeline;
        let (o, g, e) = (&p.objective, &p.ga, &p.extraction);
        let interp = match p.interpolation {
            Interpolation::Nearest => "nearest",
            Interpolation::Bilinear => "bilinear",
        };
        let mut s = String::new();
        let mut put = |comment: &str, key: &str, value: String| {
            s.push_str(&format!("# {comment}\n{key} = {value}\n"));
        };
        put("weight of the coverage term", "alpha", o.alpha.to_string());
        put("penalty when window area cannot hold the patches", "delta", o.delta.to_string());
        put("count term slope: k_count * N + b_count", "k_count", o.k_count.to_string());
        put("count term offset", "b_count", o.b_count.to_string());
        put("floor inside the coverage logarithm", "psi_epsilon", o.psi_epsilon.to_string());
        put("population size factor", "alpha3", g.alpha3.to_string());
        put("search grid spacing in pixels", "grid_stride", g.grid_stride.to_string());
        put("candidates drawn per tournament", "tournament_size", g.tournament_size.to_string());
        put("probability of one-point crossover", "crossover_rate", g.crossover_rate.to_string());
        put("per-gene and structural mutation probability", "mutation_rate", g.mutation_rate.to_string());
        put("best candidates copied unchanged", "elite_count", g.elite_count.to_string());
        put("generations without improvement before stopping", "patience", g.patience.to_string());
        put("neighbourhood radius of local search in pixels", "local_search_radius", g.local_search_radius.to_string());
        put("share of the population refined by local search", "local_search_top_fraction", g.local_search_top_fraction.to_string());
        put("blank rectangles kept per sub-frame", "n_r", g.n_r.to_string());
        put("bound increments before the tiling fallback", "max_verification_retries", g.max_verification_retries.to_string());
        put("hard cap on generations per attempt", "max_generations", g.max_generations.to_string());
        put("candidates per sub-frame count kept for verification", "archive_per_count", g.archive_per_count.to_string());
        put("random seed", "rng_seed", g.rng_seed.to_string());
        put("frame differencing threshold on luma", "diff_threshold", e.diff_threshold.to_string());
        put("3x3 opening passes", "open_iterations", e.open_iterations.to_string());
        put("3x3 closing passes", "close_iterations", e.close_iterations.to_string());
        put("smallest kept component in pixels", "min_component_area", e.min_component_area.to_string());
        put("margin added around each component", "margin", e.margin.to_string());
        put("detector input side in pixels", "detector_size", p.detector_size.to_string());
        put("sub-frame resampling: nearest or bilinear", "interpolation", interp.to_string());
        put("IoU at which duplicate detections merge", "nms_iou", p.nms_iou.to_string());
        put("IoU for a prediction to match ground truth", "iou_threshold", self.iou_threshold.to_string());
        put("seconds to wait for an external detector", "detector_timeout_secs", self.detector_timeout.as_secs_f64().to_string());
        put("oracle detector ignores boxes with a side below this (detector pixels)", "oracle_min_side", self.oracle_min_side.to_string());
        put("frame size used when composing a bare patch list", "frame_width", self.frame_size.width.to_string());
        put("", "frame_height", self.frame_size.height.to_string());
        put("number of scaling bands (1 to 3)", "n_bands", self.n_bands.to_string());
        match &self.calibration {
            Some(c) => {
                put("calibration: rows of the near and far reference lines", "y_ab", c.y_ab.to_string());
                put("", "y_cd", c.y_cd.to_string());
                put("person height in pixels on each line", "l_ab", c.l_ab.to_string());
                put("", "l_cd", c.l_cd.to_string());
                put("beta per pixel of person height", "k_cal", c.k_cal.to_string());
            }
            None => s.push_str(
                "# calibration (all five or none; none means beta = 1 everywhere)\n\
                 # y_ab = 700\n# y_cd = 100\n# l_ab = 120\n# l_cd = 30\n# k_cal = 0.008333333333333333\n",
            ),
        }
        s.replace("# \n", "")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let c = Config::default();
        assert_eq!(Config::parse(&c.to_text()).unwrap(), c);
    }

    #[test]
    fn calibrated_round_trip() {
        let mut c = Config {
            calibration: Some(Calibration {
                y_ab: 700.0,
                y_cd: 100.0,
                l_ab: 120.0,
                l_cd: 30.0,
                k_cal: 1.0 / 120.0,
            }),
            ..Config::default()
        };
        c.pipeline.ga.rng_seed = 77;
        c.pipeline.interpolation = Interpolation::Bilinear;
        c.oracle_min_side = 6.5;
        let back = Config::parse(&c.to_text()).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.profile(720).unwrap().bands.len(), 3);
    }

    #[test]
    fn errors() {
        assert!(Config::parse("bogus = 1").is_err());
        assert!(Config::parse("alpha").is_err());
        assert!(Config::parse("alpha = x").is_err());
        assert!(Config::parse("y_ab = 3").is_err());
        assert!(Config::parse("crossover_rate = 2").is_err());
        let c = Config::parse("# comment\n\nmargin = 5 # trailing\n").unwrap();
        assert_eq!(c.pipeline.extraction.margin, 5);
    }
}
