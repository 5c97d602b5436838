use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use patchcomp::config::Config;
use patchcomp::extraction::save_patches;
use patchcomp::geometry::{FrameSize, Patch, Rect};
use patchcomp::pipeline::eval::write_annotations;
use patchcomp::synth;

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_patchcomp"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn json(p: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Frames, masks and annotations for `n` synthetic 640x360 scenes.
fn scene_dir(root: &Path, n: usize) -> (PathBuf, PathBuf, PathBuf) {
    let (frames, masks) = (root.join("frames"), root.join("masks"));
    fs::create_dir_all(&frames).unwrap();
    fs::create_dir_all(&masks).unwrap();
    let mut rng = synth::rng(8);
    let mut anns = Vec::new();
    for i in 0..n {
        let sc = synth::scene(&mut rng, &format!("f{i:03}"), FrameSize::new(640, 360), 6, 8, 50, 3);
        sc.frame.write_pnm(frames.join(format!("f{i:03}.pgm"))).unwrap();
        sc.mask.to_raster().write_pnm(masks.join(format!("f{i:03}.pgm"))).unwrap();
        anns.extend(sc.annotations);
    }
    let gt = root.join("gt.csv");
    write_annotations(fs::File::create(&gt).unwrap(), &anns).unwrap();
    (frames, masks, gt)
}

fn small_config(root: &Path) -> PathBuf {
    let p = root.join("run.cfg");
    fs::write(&p, "frame_width = 640\nframe_height = 360\n").unwrap();
    p
}

#[test]
fn default_config_parses_back() {
    let o = bin(&["--print-default-config"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(Config::parse(&text).unwrap(), Config::default());
}

#[test]
fn extract_compose_render_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    let (frames, masks, _) = scene_dir(root, 1);
    let cfg = small_config(root);
    let patches = root.join("patches.csv");
    let o = bin(&[
        "extract", "--frame", s(&frames.join("f000.pgm")), "--mask", s(&masks.join("f000.pgm")),
        "--config", s(&cfg), "--out", s(&patches),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let lines = fs::read_to_string(&patches).unwrap().lines().count();
    assert!(lines >= 2, "header plus patches");

    let (a, b) = (root.join("a.json"), root.join("b.json"));
    let svg = root.join("layout.svg");
    for out in [&a, &b] {
        let o = bin(&[
            "compose", "--patches", s(&patches), "--config", s(&cfg), "--seed", "42", "--out", s(out),
            "--svg", s(&svg),
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    assert!(fs::read_to_string(&svg).unwrap().starts_with("<svg"));
    let plan = json(&a);
    let n_sub = plan["sub_frames"].as_array().unwrap().len();
    assert!(n_sub >= 1);

    let outdir = root.join("subframes");
    let o = bin(&["render", "--frame", s(&frames.join("f000.pgm")), "--plan", s(&a), "--outdir", s(&outdir)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(fs::read_dir(&outdir).unwrap().count(), n_sub);

    let oracle = root.join("oracle.json");
    let o = bin(&["oracle", "--patches", s(&patches), "--config", s(&cfg), "--out", s(&oracle)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let n_min = json(&oracle)["n_min"].as_u64().unwrap() as usize;
    assert!(n_min >= 1 && n_min <= n_sub);
}

#[test]
fn extract_by_differencing() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    let (frames, _, _) = scene_dir(root, 2);
    let (patches, mask) = (root.join("p.csv"), root.join("m.pgm"));
    let o = bin(&[
        "extract", "--frame", s(&frames.join("f001.pgm")), "--prev", s(&frames.join("f000.pgm")),
        "--mask", s(&mask), "--out", s(&patches),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(mask.is_file());
    let o = bin(&["extract", "--frame", s(&frames.join("f001.pgm")), "--out", s(&patches)]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn run_with_oracle_detector() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    let (frames, masks, gt) = scene_dir(root, 6);
    let report = root.join("report.json");
    let preds = root.join("pred.csv");
    let o = bin(&[
        "run", "--frames", s(&frames), "--masks", s(&masks), "--detector", "oracle", "--annotations",
        s(&gt), "--report", s(&report), "--predictions", s(&preds), "--jobs", "2",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let r = json(&report);
    assert_eq!(r["frames"], 6);
    assert_eq!(r["eval"]["recall"], 1.0);
    assert_eq!(r["eval"]["one_minus_precision"], 0.0);
    assert!(r["detector_invocations"].as_u64() < r["tiling_invocations"].as_u64());

    let eval = root.join("eval.json");
    let o = bin(&["eval", "--pred", s(&preds), "--gt", s(&gt), "--iou", "0.5", "--out", s(&eval)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(json(&eval)["f1"], 1.0);

    for method in ["ds", "div"] {
        let o = bin(&[
            "run", "--frames", s(&frames), "--detector", "oracle", "--annotations", s(&gt),
            "--report", s(&report), "--method", method,
        ]);
        assert!(o.status.success(), "{method}: {}", stderr(&o));
        assert_eq!(json(&report)["method"], method);
    }
}

#[test]
fn run_with_external_detector() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    let (frames, masks, _) = scene_dir(root, 3);
    let script = root.join("detector.sh");
    fs::write(
        &script,
        "while read cmd path; do\n  [ -s \"$path\" ] || exit 1\n  echo 'BOX thing 0.8 5 5 10 10'\n  echo END\ndone\n",
    )
    .unwrap();
    let report = root.join("report.json");
    let cmd = format!("sh {}", s(&script));
    let o = bin(&[
        "run", "--frames", s(&frames), "--masks", s(&masks), "--detector", &cmd, "--report", s(&report),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let r = json(&report);
    assert!(r["predictions"].as_u64().unwrap() >= 1);
    assert!(r["failed_frames"].as_array().unwrap().is_empty());

    let o = bin(&[
        "run", "--frames", s(&frames), "--masks", s(&masks), "--detector", "read x; echo garbage",
        "--report", s(&report),
    ]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert_eq!(json(&report)["failed_frames"].as_array().unwrap().len(), 3);
}

#[test]
fn bench_reports_stages() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("bench.json");
    let o = bin(&["bench", "--synthetic", "8", "--repeat", "2", "--out", s(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let r = json(&out);
    assert_eq!(r["samples"], 16);
    for stage in ["extraction", "composition", "render", "detect", "map_back"] {
        assert!(r["mean_ms"][stage].as_f64().unwrap() >= 0.0);
        assert!(r["p95_ms"][stage].as_f64().unwrap() >= 0.0);
    }
}

#[test]
fn exit_codes_for_bad_input() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    let big = root.join("big.csv");
    save_patches(&big, &[Patch::new(0, Rect::new(0.0, 0.0, 400.0, 50.0), 1.0)]).unwrap();
    let out = root.join("plan.json");
    let o = bin(&["compose", "--patches", s(&big), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(4));
    assert_eq!(stderr(&o).lines().count(), 1);

    let bad = root.join("bad.csv");
    fs::write(&bad, "id,x,y\n1,2,3\n").unwrap();
    let o = bin(&["compose", "--patches", s(&bad), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(2));

    let cfg = root.join("bad.cfg");
    fs::write(&cfg, "no_such_key = 1\n").unwrap();
    let ok = root.join("ok.csv");
    save_patches(&ok, &[Patch::new(0, Rect::new(0.0, 0.0, 40.0, 50.0), 1.0)]).unwrap();
    let o = bin(&["compose", "--patches", s(&ok), "--config", s(&cfg), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("no_such_key"));

    let o = bin(&["eval", "--pred", s(&ok), "--gt", s(&ok)]);
    assert_eq!(o.status.code(), Some(2));
    let o = bin(&["frobnicate"]);
    assert_eq!(o.status.code(), Some(2));
}
