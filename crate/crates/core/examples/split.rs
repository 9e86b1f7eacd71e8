//! Splits sequences into train/val/test without sharing any subject.
//!
//! `cargo run --example split`

use hck::io::{check_subject_disjoint, sample_frames, subject_disjoint_split, SequenceRecord, SplitOptions, SplitTargets};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let people = [["ana", "ben"], ["ben", "cai"], ["dev", "eli"], ["fay", "gus"], ["fay", "hal"], ["ivy", "jon"], ["kim", "lou"]];
    let seqs: Vec<SequenceRecord> = people
        .iter()
        .enumerate()
        .map(|(i, p)| SequenceRecord {
            id: format!("recording_{i}"),
            subjects: p.iter().map(|s| s.to_string()).collect(),
            frame_count: 300 + 40 * i,
            frame_rate: 30.0,
        })
        .collect();
    let spec = subject_disjoint_split(&seqs, SplitTargets::new(4, 1, 2), &SplitOptions::default())?;
    check_subject_disjoint(&seqs, &spec)?;
    println!("train {:?}\nval   {:?}\ntest  {:?}", spec.train, spec.val, spec.test);
    println!("removed {:?}, deviation {}", spec.removed, spec.deviation);
    let frames = sample_frames(&seqs[0], 1.0)?;
    println!("{} frames of {} kept at 1 Hz: {:?}...", frames.len(), seqs[0].id, &frames[..3]);
    Ok(())
}
