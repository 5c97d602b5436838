//! Annotation/prediction files and detection metrics.

use std::collections::{BTreeMap, HashMap};
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Rect;

/// Ground-truth box in original frame coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Annotation {
    pub frame_id: String,
    pub label: String,
    pub rect: Rect,
}

/// Detection in original frame coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub frame_id: String,
    pub label: String,
    pub rect: Rect,
    pub score: f64,
}

#[derive(Debug, Deserialize)]
struct Row {
    frame_id: String,
    label: String,
    x: f64,
    y: f64,
    w: f64,
    h: f64,
    #[serde(default)]
    score: Option<f64>,
}

fn read_rows(reader: impl std::io::Read, name: &Path) -> Result<Vec<Row>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    for need in ["frame_id", "label", "x", "y", "w", "h"] {
        if !headers.iter().any(|h| h == need) {
            return Err(Error::Format {
                path: name.to_owned(),
                message: format!("missing column {need:?}"),
            });
        }
    }
    let mut rows = Vec::new();
    for r in rdr.deserialize() {
        let row: Row = r?;
        if !(row.w >= 0.0 && row.h >= 0.0) {
            return Err(Error::Format {
                path: name.to_owned(),
                message: format!("negative box size in frame {}", row.frame_id),
            });
        }
        rows.push(row);
    }
    Ok(rows)
}

/// CSV `frame_id,label,x,y,w,h` with header.
pub fn read_annotations(reader: impl std::io::Read) -> Result<Vec<Annotation>> {
    Ok(read_rows(reader, Path::new("<annotations>"))?
        .into_iter()
        .map(|r| Annotation {
            frame_id: r.frame_id,
            label: r.label,
            rect: Rect::new(r.x, r.y, r.w, r.h),
        })
        .collect())
}

pub fn load_annotations(path: impl AsRef<Path>) -> Result<Vec<Annotation>> {
    let path = path.as_ref();
    let f = std::fs::File::open(path)?;
    relabel(read_annotations(f), path)
}

/// CSV `frame_id,label,x,y,w,h[,score]`; a missing score means 1.
pub fn read_predictions(reader: impl std::io::Read) -> Result<Vec<Prediction>> {
    read_rows(reader, Path::new("<predictions>"))?
        .into_iter()
        .map(|r| {
            let score = r.score.unwrap_or(1.0);
            if !(0.0..=1.0).contains(&score) {
                return Err(Error::InvalidInput(format!("score {score} outside [0, 1]")));
            }
            Ok(Prediction {
                frame_id: r.frame_id,
                label: r.label,
                rect: Rect::new(r.x, r.y, r.w, r.h),
                score,
            })
        })
        .collect()
}

pub fn load_predictions(path: impl AsRef<Path>) -> Result<Vec<Prediction>> {
    let path = path.as_ref();
    let f = std::fs::File::open(path)?;
    relabel(read_predictions(f), path)
}

fn relabel<T>(r: Result<T>, path: &Path) -> Result<T> {
    r.map_err(|e| match e {
        Error::Format { message, .. } => Error::Format {
            path: path.to_owned(),
            message,
        },
        Error::Csv(e) => Error::Format {
            path: path.to_owned(),
            message: e.to_string(),
        },
        other => other,
    })
}

pub fn write_annotations(mut w: impl Write, anns: &[Annotation]) -> Result<()> {
    writeln!(w, "frame_id,label,x,y,w,h")?;
    for a in anns {
        let r = &a.rect;
        writeln!(w, "{},{},{},{},{},{}", a.frame_id, a.label, r.x, r.y, r.w, r.h)?;
    }
    Ok(())
}

pub fn write_predictions(mut w: impl Write, preds: &[Prediction]) -> Result<()> {
    writeln!(w, "frame_id,label,x,y,w,h,score")?;
    for p in preds {
        let r = &p.rect;
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            p.frame_id, p.label, r.x, r.y, r.w, r.h, p.score
        )?;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrPoint {
    pub threshold: f64,
    pub one_minus_precision: f64,
    pub recall: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub one_minus_precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Filled in by callers that time a run; 0 otherwise.
    pub frames_per_second: f64,
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
    pub pr_curve: Vec<PrPoint>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Counts {
    tp: usize,
    fp: usize,
    fn_: usize,
}

impl Counts {
    /// Precision is 1 when nothing was predicted, recall is 1 when there
    /// was nothing to find.
    fn rates(&self) -> (f64, f64, f64) {
        let p = if self.tp + self.fp == 0 {
            1.0
        } else {
            self.tp as f64 / (self.tp + self.fp) as f64
        };
        let r = if self.tp + self.fn_ == 0 {
            1.0
        } else {
            self.tp as f64 / (self.tp + self.fn_) as f64
        };
        let f1 = if p + r > 0.0 { 2.0 * p * r / (p + r) } else { 0.0 };
        (p, r, f1)
    }
}

fn pred_order(a: &Prediction, b: &Prediction) -> std::cmp::Ordering {
    b.score
        .total_cmp(&a.score)
        .then(a.rect.y.total_cmp(&b.rect.y))
        .then(a.rect.x.total_cmp(&b.rect.x))
        .then(a.rect.w.total_cmp(&b.rect.w))
        .then(a.rect.h.total_cmp(&b.rect.h))
}

type Group<'a> = (Vec<&'a Prediction>, Vec<&'a Annotation>);

/// Greedy matching per frame and label: predictions in descending score
/// take the unmatched ground-truth box of highest IoU if that IoU reaches
/// the threshold.
fn count(preds: &[&Prediction], gt: &[Annotation], iou: f64) -> Counts {
    let mut groups: BTreeMap<(&str, &str), Group> = BTreeMap::new();
    for p in preds {
        groups.entry((&p.frame_id, &p.label)).or_default().0.push(p);
    }
    for g in gt {
        groups.entry((&g.frame_id, &g.label)).or_default().1.push(g);
    }
    let mut c = Counts { tp: 0, fp: 0, fn_: 0 };
    for (_, (mut ps, gs)) in groups {
        ps.sort_by(|a, b| pred_order(a, b));
        let mut used = vec![false; gs.len()];
        for p in ps {
            let mut best: Option<(usize, f64)> = None;
            for (k, g) in gs.iter().enumerate() {
                if used[k] {
                    continue;
                }
                let v = p.rect.iou(&g.rect);
                if v >= iou && best.is_none_or(|(_, b)| v > b) {
                    best = Some((k, v));
                }
            }
            match best {
                Some((k, _)) => {
                    used[k] = true;
                    c.tp += 1;
                }
                None => c.fp += 1,
            }
        }
        c.fn_ += used.iter().filter(|u| !**u).count();
    }
    c
}

pub const PR_THRESHOLDS: usize = 20;

pub fn evaluate(preds: &[Prediction], gt: &[Annotation], iou_threshold: f64) -> EvalReport {
    let all: Vec<&Prediction> = preds.iter().collect();
    let c = count(&all, gt, iou_threshold);
    let (p, r, f1) = c.rates();
    let pr_curve = (0..PR_THRESHOLDS)
        .map(|i| {
            let t = i as f64 / PR_THRESHOLDS as f64;
            let kept: Vec<&Prediction> = preds.iter().filter(|p| p.score >= t).collect();
            let (p, r, _) = count(&kept, gt, iou_threshold).rates();
            PrPoint {
                threshold: t,
                one_minus_precision: 1.0 - p,
                recall: r,
            }
        })
        .collect();
    EvalReport {
        one_minus_precision: 1.0 - p,
        recall: r,
        f1,
        frames_per_second: 0.0,
        true_positives: c.tp,
        false_positives: c.fp,
        false_negatives: c.fn_,
        pr_curve,
    }
}

/// Group annotations by frame id.
pub fn by_frame(anns: &[Annotation]) -> HashMap<&str, Vec<&Annotation>> {
    let mut m: HashMap<&str, Vec<&Annotation>> = HashMap::new();
    for a in anns {
        m.entry(a.frame_id.as_str()).or_default().push(a);
    }
    m
}
