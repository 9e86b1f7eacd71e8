//! Matches human queries to people, then each matched query's part queries
//! to that person's parts.
//!
//! `cargo run --example two_stage_match`

use hck::clustering::InstancePrediction;
use hck::matching::{two_stage_match, GroundTruthHuman, GroundTruthMask, MaskCostConfig, QueryBundle};

fn soft(mask: &[bool]) -> Vec<f64> {
    mask.iter().map(|&b| if b { 0.9 } else { 0.1 }).collect()
}

fn probs(class: u8) -> Vec<f64> {
    (1..=15).map(|c| if c == class { 0.86 } else { 0.01 }).collect()
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // Two people over 12 points; each has a head (class 1) and a torso (class 2).
    let gt: Vec<GroundTruthHuman> = (0..2)
        .map(|h| {
            let inside = |i: usize| i / 6 == h;
            GroundTruthHuman {
                mask: (0..12).map(inside).collect(),
                parts: vec![
                    GroundTruthMask { mask: (0..12).map(|i| inside(i) && i % 6 < 2).collect(), class: 1 },
                    GroundTruthMask { mask: (0..12).map(|i| inside(i) && i % 6 >= 2).collect(), class: 2 },
                ],
            }
        })
        .collect();
    // Query 0 looks like the second person, query 1 like the first.
    let human_preds = vec![
        InstancePrediction::soft(soft(&gt[1].mask), 1, 1.0),
        InstancePrediction::soft(soft(&gt[0].mask), 1, 1.0),
    ];
    let part_preds = [1, 0]
        .iter()
        .map(|&h| {
            gt[h].parts
                .iter()
                .map(|p| InstancePrediction::soft(soft(&p.mask), 1, 1.0).with_class_probs(probs(p.class)))
                .collect()
        })
        .collect();
    let bundle = QueryBundle::new(human_preds, part_preds)?;
    let a = two_stage_match(&bundle, &gt, &MaskCostConfig::default())?;
    for p in &a.human_pairs {
        println!("human query {} -> person {} (cost {:.4})", p.query, p.target, p.cost);
    }
    for m in &a.part_pairs {
        for p in &m.pairs {
            println!("  part query ({}, {}) -> person {} part {}", m.human_query, p.query, m.target_human, p.target);
        }
    }
    println!("total cost {:.4}", a.total_cost());
    Ok(())
}
