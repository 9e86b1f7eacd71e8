//! Prints how each body model's source parts merge into the 15 final parts.
//!
//! `cargo run --example taxonomy -- [smplx|smpl]`

use hck::labeling::{BodyModelFamily, BodyPartTaxonomy};

fn main() {
    let family = match std::env::args().nth(1).as_deref() {
        Some("smpl") => BodyModelFamily::Smpl,
        _ => BodyModelFamily::SmplX,
    };
    let tax = BodyPartTaxonomy::build(family);
    println!("{family:?}: {} source parts", tax.source_count());
    for part in tax.final_parts() {
        let sources: Vec<&str> = tax
            .source_parts()
            .iter()
            .filter(|name| tax.merge_name(name) == Some(part))
            .map(String::as_str)
            .collect();
        println!("{:>2} {:<14} <- {}", part.id(), part.name(), sources.join(", "));
    }
}
