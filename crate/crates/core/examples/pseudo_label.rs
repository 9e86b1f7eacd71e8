//! Labels a noisy synthetic view from the placed body meshes and reports
//! how far the result is from the renderer's labels.
//!
//! `cargo run --release --example pseudo_label -- [threshold_m]`

use hck::evaluation::{compare_label_sets, ApConfig};
use hck::labeling::{pseudo_label, BodyModelFamily, BodyPartTaxonomy, LabelConfig, PointLabels};
use hck::synthesis::{generate_scene, AssetLibrary, NoiseConfig, SynthConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let threshold = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(0.05);
    let assets = AssetLibrary::procedural(BodyModelFamily::SmplX);
    let tax = BodyPartTaxonomy::build(BodyModelFamily::SmplX);
    let cfg = SynthConfig { humans_per_scene: [3, 3], ..SynthConfig::default() };
    let scene = generate_scene(&assets, &cfg, &NoiseConfig::default(), 0).result?;
    let view = &scene.views[0];
    let rendered = PointLabels {
        semantic: view.cloud.semantic.clone(),
        instance: view.cloud.instance.clone(),
        part: view.cloud.part.clone(),
    };
    let labels = pseudo_label(&view.cloud, &scene.composed.bodies, &tax, &LabelConfig { distance_threshold: threshold })?;
    println!("{} points, {} rendered human, {} labeled human", view.cloud.len(), rendered.human_count(), labels.human_count());
    let report = compare_label_sets(&labels, &rendered, &ApConfig::default(), &tax)?;
    let h = report.human();
    println!("AP {:.2} AP50 {:.2} AP25 {:.2}, part mIoU {:.3}", h.ap, h.ap50, h.ap25, report.parts.mean.unwrap_or(0.0));
    Ok(())
}
