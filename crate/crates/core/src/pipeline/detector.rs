//! Detector adapters: an annotation-driven oracle and a line-protocol
//! subprocess.
//!
//! Wire protocol for the subprocess (UTF-8, one message per line):
//!
//! ```text
//! -> DETECT /tmp/.../req-000001.pgm
//! <- BOX person 0.92 12.5 30 40 80
//! <- END
//! ```
//!
//! Coordinates are in the pixel space of the image named in the request.

use std::collections::HashMap;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::time::{Duration, Instant};

use crate::geometry::{Placement, Rect};
use crate::raster::Raster;

use super::{Annotation, BoxSpace, DetectionBox};

#[derive(Debug, thiserror::Error)]
pub enum DetectorError {
    #[error("failed to start detector `{command}`: {source}")]
    Spawn {
        command: String,
        source: std::io::Error,
    },
    #[error("detector exited before answering")]
    Exited,
    #[error("detector did not answer within {0:?}")]
    Timeout(Duration),
    #[error("malformed detector line: {0:?}")]
    Malformed(String),
    #[error("detector failed on all {0} frames that needed it")]
    AllFramesFailed(usize),
    #[error("detector i/o: {0}")]
    Io(#[from] std::io::Error),
}

/// One detector request: a rendered sub-frame plus what it shows.
#[derive(Debug, Clone, Copy)]
pub struct DetectorInput<'a> {
    pub frame_id: &'a str,
    /// Index of the sub-frame, or 0 for a whole-image request.
    pub index: usize,
    pub raster: &'a Raster,
    /// Placements hosted by this image. Detectors that look at pixels ignore it.
    pub placements: &'a [Placement],
    /// Frame region stretched over the whole raster, for requests that show
    /// a resized frame rather than placements.
    pub frame_view: Option<Rect>,
}

pub trait Detector: Send {
    /// Boxes in the pixel space of `input.raster`.
    fn detect(&mut self, input: &DetectorInput) -> Result<Vec<DetectionBox>, DetectorError>;
}

impl<D: Detector + ?Sized> Detector for Box<D> {
    fn detect(&mut self, input: &DetectorInput) -> Result<Vec<DetectionBox>, DetectorError> {
        (**self).detect(input)
    }
}

/// Returns the ground-truth boxes lying inside a hosted placement's
/// source region, mapped into the image, with score 1.
///
/// With `min_side` set, boxes whose mapped width or height falls below it
/// are not reported, which mimics a detector missing tiny objects.
#[derive(Debug, Clone, Default)]
pub struct OracleDetector {
    by_frame: HashMap<String, Vec<Annotation>>,
    min_side: f64,
}

impl OracleDetector {
    pub fn new(annotations: &[Annotation]) -> Self {
        let mut by_frame: HashMap<String, Vec<Annotation>> = HashMap::new();
        for a in annotations {
            by_frame.entry(a.frame_id.clone()).or_default().push(a.clone());
        }
        Self {
            by_frame,
            min_side: 0.0,
        }
    }

    pub fn with_min_side(mut self, min_side: f64) -> Self {
        self.min_side = min_side;
        self
    }
}

impl Detector for OracleDetector {
    fn detect(&mut self, input: &DetectorInput) -> Result<Vec<DetectionBox>, DetectorError> {
        let Some(gt) = self.by_frame.get(input.frame_id) else {
            return Ok(Vec::new());
        };
        let mut out = Vec::new();
        let mut emit = |a: &Annotation, rect: Rect| {
            if rect.w >= self.min_side && rect.h >= self.min_side {
                out.push(DetectionBox {
                    label: a.label.clone(),
                    score: 1.0,
                    rect,
                    space: BoxSpace::SubFrame(input.index),
                });
            }
        };
        for p in input.placements {
            for a in gt.iter().filter(|a| crate::geometry::contains(&p.src, &a.rect)) {
                emit(a, p.forward_map(&a.rect));
            }
        }
        if let (true, Some(v)) = (input.placements.is_empty(), input.frame_view) {
            let sx = input.raster.width as f64 / v.w;
            let sy = input.raster.height as f64 / v.h;
            for a in gt.iter().filter(|a| crate::geometry::contains(&v, &a.rect)) {
                let r = &a.rect;
                emit(a, Rect::new((r.x - v.x) * sx, (r.y - v.y) * sy, r.w * sx, r.h * sy));
            }
        }
        Ok(out)
    }
}

struct Worker {
    child: Child,
    stdin: ChildStdin,
    lines: Receiver<std::io::Result<String>>,
}

impl Worker {
    fn kill(mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

/// Long-lived child process started with `sh -c <command>`. Any protocol
/// violation, timeout or exit kills the child; the next request starts a
/// fresh one.
pub struct ExternalDetector {
    command: String,
    timeout: Duration,
    dir: tempfile::TempDir,
    worker: Option<Worker>,
    requests: u64,
}

impl ExternalDetector {
    pub fn new(command: impl Into<String>, timeout: Duration) -> Result<Self, DetectorError> {
        Ok(Self {
            command: command.into(),
            timeout,
            dir: tempfile::Builder::new().prefix("patchcomp-det").tempdir()?,
            worker: None,
            requests: 0,
        })
    }

    fn spawn(&self) -> Result<Worker, DetectorError> {
        let mut child = Command::new("sh")
            .arg("-c")
            .arg(&self.command)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|source| DetectorError::Spawn {
                command: self.command.clone(),
                source,
            })?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = child.stdout.take().expect("piped stdout");
        let (tx, rx) = mpsc::channel();
        std::thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                let stop = line.is_err();
                if tx.send(line).is_err() || stop {
                    break;
                }
            }
        });
        Ok(Worker {
            child,
            stdin,
            lines: rx,
        })
    }

    fn request(&mut self, path: &Path, index: usize) -> Result<Vec<DetectionBox>, DetectorError> {
        if self.worker.is_none() {
            self.worker = Some(self.spawn()?);
        }
        let w = self.worker.as_mut().unwrap();
        writeln!(w.stdin, "DETECT {}", path.display()).map_err(|_| DetectorError::Exited)?;
        w.stdin.flush().map_err(|_| DetectorError::Exited)?;

        let deadline = Instant::now() + self.timeout;
        let mut out = Vec::new();
        loop {
            let left = deadline.saturating_duration_since(Instant::now());
            let line = match w.lines.recv_timeout(left) {
                Ok(Ok(line)) => line,
                Ok(Err(e)) => return Err(e.into()),
                Err(RecvTimeoutError::Timeout) => return Err(DetectorError::Timeout(self.timeout)),
                Err(RecvTimeoutError::Disconnected) => return Err(DetectorError::Exited),
            };
            let line = line.trim_end();
            if line == "END" {
                return Ok(out);
            }
            out.push(parse_box_line(line, index)?);
        }
    }
}

impl Detector for ExternalDetector {
    fn detect(&mut self, input: &DetectorInput) -> Result<Vec<DetectionBox>, DetectorError> {
        self.requests += 1;
        let ext = if input.raster.channels == 1 { "pgm" } else { "ppm" };
        let path = self.dir.path().join(format!("req-{:06}.{ext}", self.requests));
        std::fs::write(&path, input.raster.encode_pnm())?;
        let result = self.request(&path, input.index);
        let _ = std::fs::remove_file(&path);
        if result.is_err() {
            if let Some(w) = self.worker.take() {
                w.kill();
            }
        }
        result
    }
}

impl Drop for ExternalDetector {
    fn drop(&mut self) {
        if let Some(w) = self.worker.take() {
            w.kill();
        }
    }
}

/// Parse `BOX label score x y w h`.
pub fn parse_box_line(line: &str, index: usize) -> Result<DetectionBox, DetectorError> {
    let bad = || DetectorError::Malformed(line.to_string());
    let mut it = line.split_ascii_whitespace();
    if it.next() != Some("BOX") {
        return Err(bad());
    }
    let label = it.next().ok_or_else(bad)?.to_string();
    let nums: Vec<f64> = it
        .map(|t| t.parse::<f64>().map_err(|_| bad()))
        .collect::<Result<_, _>>()?;
    let [score, x, y, w, h] = nums[..] else {
        return Err(bad());
    };
    if !(0.0..=1.0).contains(&score) || !(w >= 0.0 && h >= 0.0) || !x.is_finite() || !y.is_finite() {
        return Err(bad());
    }
    Ok(DetectionBox {
        label,
        score,
        rect: Rect::new(x, y, w, h),
        space: BoxSpace::SubFrame(index),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_box_lines() {
        let b = parse_box_line("BOX person 0.5 1 2 3 4", 2).unwrap();
        assert_eq!(b.label, "person");
        assert_eq!(b.rect, Rect::new(1.0, 2.0, 3.0, 4.0));
        assert_eq!(b.space, BoxSpace::SubFrame(2));
        for bad in [
            "BOX person 0.5 1 2 3",
            "BOX person 1.5 1 2 3 4",
            "BOX person 0.5 1 2 -3 4",
            "BOXX a 0 0 0 0 0",
            "hello",
            "BOX p 0.5 1 2 3 4 5",
        ] {
            assert!(parse_box_line(bad, 0).is_err(), "{bad}");
        }
    }

    #[test]
    fn oracle_follows_frame_views() {
        let gt = [Annotation {
            frame_id: "f".into(),
            label: "o".into(),
            rect: Rect::new(20.0, 20.0, 40.0, 40.0),
        }];
        let raster = Raster::new(300, 300, 1, 0);
        let input = DetectorInput {
            frame_id: "f",
            index: 0,
            raster: &raster,
            placements: &[],
            frame_view: Some(Rect::new(0.0, 0.0, 600.0, 600.0)),
        };
        let boxes = OracleDetector::new(&gt).detect(&input).unwrap();
        assert_eq!(boxes.len(), 1);
        assert_eq!(boxes[0].rect, Rect::new(10.0, 10.0, 20.0, 20.0));
        let tiny = OracleDetector::new(&gt).with_min_side(25.0).detect(&input).unwrap();
        assert!(tiny.is_empty());
        let other = DetectorInput { frame_id: "g", ..input };
        assert!(OracleDetector::new(&gt).detect(&other).unwrap().is_empty());
    }
}
