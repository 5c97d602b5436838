use proptest::prelude::*;

use patchcomp::geometry::{contains, CompositionPlan, FrameSize, Placement, PlacementMode, Rect, SubFrame};
use patchcomp::pipeline::eval::{read_annotations, read_predictions, write_annotations, write_predictions};
use patchcomp::pipeline::render::DEAD_SPACE;
use patchcomp::pipeline::{
    evaluate, map_back, process_frame, render_subframes, suppress_duplicates, Annotation, BoxSpace,
    DetectionBox, Interpolation, OracleDetector, PipelineConfig, Prediction,
};
use patchcomp::raster::Raster;
use patchcomp::scaling::{Calibration, ScalingProfile};
use patchcomp::synth;

fn banded() -> ScalingProfile {
    ScalingProfile::calibrated(
        Calibration {
            y_ab: 700.0,
            y_cd: 100.0,
            l_ab: 120.0,
            l_cd: 30.0,
            k_cal: 1.0 / 120.0,
        },
        3,
        720,
    )
    .unwrap()
}

#[test]
fn scaled_round_trip_recovers_ground_truth() {
    let size = FrameSize::new(1280, 720);
    let profile = banded();
    let cfg = PipelineConfig::default();
    let mut rng = synth::rng(77);
    for i in 0..15 {
        let s = synth::scene(&mut rng, &format!("f{i}"), size, 20, 8, 70, 3);
        let mut det = OracleDetector::new(&s.annotations);
        let out = process_frame(&s.frame_id, &s.frame, &s.mask, &profile, &cfg, &mut det).unwrap();
        assert_eq!(out.dropped, 0);
        assert_eq!(out.boxes.len(), s.annotations.len());
        for gt in &s.annotations {
            assert!(
                out.boxes.iter().any(|b| b.space == BoxSpace::Original && b.rect.max_abs_diff(&gt.rect) <= 1.0),
                "frame {i}: {:?} not recovered",
                gt.rect
            );
        }
        for (j, img) in render_subframes(&s.frame, &out.plan, Interpolation::Nearest).unwrap().iter().enumerate() {
            assert_eq!(img.size(), (300, 300), "sub-frame {j}");
        }
    }
}

#[test]
fn render_pastes_relocated_pixels() {
    let mut frame = Raster::new(640, 360, 1, 0);
    for y in 300..310 {
        for x in 600..610 {
            frame.pixel_mut(x, y)[0] = (x + y) as u8;
        }
    }
    let plan = CompositionPlan {
        frame_size: FrameSize::new(640, 360),
        detector_size: 300.0,
        sub_frames: vec![SubFrame::new(150.0, 150.0, 1.0, 300.0)],
        placements: vec![Placement {
            patch_id: 0,
            mode: PlacementMode::Relocated,
            host: 0,
            scale: 1.0,
            src: Rect::new(600.0, 300.0, 10.0, 10.0),
            dst: Rect::new(0.0, 0.0, 10.0, 10.0),
        }],
    };
    let img = &render_subframes(&frame, &plan, Interpolation::Nearest).unwrap()[0];
    for y in 0..10 {
        for x in 0..10 {
            assert_eq!(img.pixel(x, y)[0], frame.pixel(600 + x, 300 + y)[0]);
        }
    }
    let wrong = Raster::new(100, 100, 1, 0);
    assert!(render_subframes(&wrong, &plan, Interpolation::Bilinear).is_err());
    // A window hanging over the frame edge shows dead space there.
    let small = CompositionPlan {
        frame_size: FrameSize::new(200, 200),
        detector_size: 300.0,
        sub_frames: vec![SubFrame::new(100.0, 100.0, 1.0, 300.0)],
        placements: vec![],
    };
    let img = &render_subframes(&Raster::new(200, 200, 1, 7), &small, Interpolation::Nearest).unwrap()[0];
    assert_eq!(img.pixel(10, 10)[0], 7);
    assert_eq!(img.pixel(250, 250)[0], DEAD_SPACE);
}

#[test]
fn dead_space_boxes_are_dropped() {
    let plan = CompositionPlan {
        frame_size: FrameSize::new(1280, 720),
        detector_size: 300.0,
        sub_frames: vec![SubFrame::new(150.0, 150.0, 1.0, 300.0)],
        placements: vec![],
    };
    let b = |x: f64| DetectionBox {
        label: "o".into(),
        score: 0.9,
        rect: Rect::new(x, 10.0, 10.0, 10.0),
        space: BoxSpace::SubFrame(0),
    };
    let r = map_back(&plan, &[vec![b(10.0), b(100.0)]], 0.5);
    assert_eq!((r.boxes.len(), r.dropped), (2, 0));
    let tiny = CompositionPlan {
        frame_size: FrameSize::new(200, 200),
        ..plan
    };
    let r = map_back(&tiny, &[vec![b(10.0), b(250.0)]], 0.5);
    assert_eq!((r.boxes.len(), r.dropped), (1, 1));
}

fn arb_box() -> impl Strategy<Value = DetectionBox> {
    (0u32..3, 0u32..10, 0.0f64..200.0, 0.0f64..200.0, 5.0f64..50.0, 5.0f64..50.0).prop_map(|(l, s, x, y, w, h)| {
        DetectionBox {
            label: format!("c{l}"),
            score: s as f64 / 10.0,
            rect: Rect::new(x, y, w, h),
            space: BoxSpace::Original,
        }
    })
}

proptest! {
    #[test]
    fn suppression_is_idempotent(boxes in prop::collection::vec(arb_box(), 0..30)) {
        let once = suppress_duplicates(boxes.clone(), 0.5);
        let twice = suppress_duplicates(once.clone(), 0.5);
        prop_assert_eq!(&once, &twice);
        prop_assert!(once.len() <= boxes.len());
        for (i, a) in once.iter().enumerate() {
            for b in &once[i + 1..] {
                prop_assert!(a.label != b.label || a.rect.iou(&b.rect) < 0.5);
            }
        }
    }

    #[test]
    fn evaluation_ignores_prediction_order(boxes in prop::collection::vec(arb_box(), 0..20), rot in 0usize..20) {
        let preds: Vec<Prediction> = boxes.iter().cloned().map(|b| b.into_prediction("f")).collect();
        let gt: Vec<Annotation> = boxes
            .iter()
            .step_by(2)
            .map(|b| Annotation { frame_id: "f".into(), label: b.label.clone(), rect: b.rect.translate(2.0, 1.0) })
            .collect();
        let mut shuffled = preds.clone();
        if !shuffled.is_empty() {
            let k = rot % shuffled.len();
            shuffled.rotate_left(k);
        }
        shuffled.reverse();
        prop_assert_eq!(evaluate(&preds, &gt, 0.5), evaluate(&shuffled, &gt, 0.5));
    }
}

#[test]
fn csv_round_trips() {
    let anns = vec![
        Annotation { frame_id: "a".into(), label: "person".into(), rect: Rect::new(1.0, 2.0, 3.0, 4.0) },
        Annotation { frame_id: "b".into(), label: "car".into(), rect: Rect::new(5.5, 6.0, 7.0, 8.25) },
    ];
    let mut buf = Vec::new();
    write_annotations(&mut buf, &anns).unwrap();
    assert_eq!(read_annotations(buf.as_slice()).unwrap(), anns);

    let preds: Vec<Prediction> = anns
        .iter()
        .map(|a| Prediction { frame_id: a.frame_id.clone(), label: a.label.clone(), rect: a.rect, score: 0.25 })
        .collect();
    let mut buf = Vec::new();
    write_predictions(&mut buf, &preds).unwrap();
    assert_eq!(read_predictions(buf.as_slice()).unwrap(), preds);

    // The score column is optional.
    let bare = read_predictions("frame_id,label,x,y,w,h\na,person,1,2,3,4\n".as_bytes()).unwrap();
    assert_eq!(bare[0].score, 1.0);
    assert!(read_annotations("frame,label,x,y,w,h\n".as_bytes()).is_err());

    let r = evaluate(&preds, &anns, 0.5);
    assert_eq!((r.f1, r.one_minus_precision, r.recall), (1.0, 0.0, 1.0));
    assert!(contains(&anns[0].rect, &preds[0].rect));
}
