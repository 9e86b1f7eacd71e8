//! Scores eroded copies of an instance labeling against the original.
//!
//! `cargo run --example evaluate`

use hck::evaluation::{ap_suite, erode_instances, instance_masks, labels_as_predictions, ApConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // Four instances of 250 points plus 1000 background points.
    let reference: Vec<u32> = (0..2000).map(|i| if i < 1000 { i / 250 + 1 } else { 0 }).collect();
    let gts: Vec<Vec<bool>> = instance_masks(&reference).into_iter().map(|(_, m)| m).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for fraction in [0.0, 0.1, 0.3, 0.5] {
        let eroded = erode_instances(&reference, fraction, &mut rng)?;
        let scores = ap_suite(&labels_as_predictions(&eroded), &gts, &ApConfig::default())?;
        println!("drop {:>3.0}%: AP {:6.2} AP50 {:6.2} AP25 {:6.2}", fraction * 100.0, scores.ap, scores.ap50, scores.ap25);
    }
    Ok(())
}
