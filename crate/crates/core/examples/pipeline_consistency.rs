//! Generates noise-free scenes, pseudo-labels them from the placed bodies
//! and compares the result with the renderer's labels.
//!
//! `cargo run --release --example pipeline_consistency -- [scenes] [clearance]`

use hck::evaluation::{compare_label_sets, mask_iou, ApConfig};
use hck::labeling::{pseudo_label, BodyModelFamily, BodyPartTaxonomy, LabelConfig, PointLabels};
use hck::synthesis::{generate_scene, AssetLibrary, NoiseConfig, SynthConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let scenes: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(5);
    let clearance: f64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(0.0);
    let assets = AssetLibrary::procedural(BodyModelFamily::SmplX);
    let taxonomy = BodyPartTaxonomy::build(BodyModelFamily::SmplX);
    let mut cfg = SynthConfig::default();
    cfg.placement.contact_clearance = clearance;
    let noise = NoiseConfig::zero();
    let mut worst = f64::INFINITY;
    for i in 0..scenes {
        let outcome = generate_scene(&assets, &cfg, &noise, i);
        let scene = outcome.result?;
        for view in &scene.views {
            let rendered = PointLabels {
                semantic: view.cloud.semantic.clone(),
                instance: view.cloud.instance.clone(),
                part: view.cloud.part.clone(),
            };
            let labels = pseudo_label(&view.cloud, &scene.composed.bodies, &taxonomy, &LabelConfig::default())?;
            let mut ious = Vec::new();
            for b in &scene.composed.bodies {
                let r: Vec<bool> = rendered.instance.iter().map(|&v| v == b.instance_id).collect();
                if !r.contains(&true) {
                    continue;
                }
                let p: Vec<bool> = labels.instance.iter().map(|&v| v == b.instance_id).collect();
                let iou = mask_iou(&p, &r)?;
                worst = worst.min(iou);
                ious.push((b.instance_id, r.iter().filter(|&&x| x).count(), iou));
            }
            let report = compare_label_sets(&labels, &rendered, &ApConfig::default(), &taxonomy)?;
            let h = report.human();
            println!(
                "scene {i} cam {}: AP {:.2} AP50 {:.2} AP25 {:.2}",
                view.camera_id, h.ap, h.ap50, h.ap25
            );
            for (id, n, iou) in ious {
                println!("  human {id}: {n} rendered points, IoU {iou:.4}");
            }
        }
    }
    println!("worst IoU {worst:.4}");
    Ok(())
}
