//! Solves a small assignment problem and compares it with every pairing.
//!
//! `cargo run --example hungarian`

use hck::matching::hungarian;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let costs = vec![
        vec![4.0, 1.0, 3.0, 9.0],
        vec![2.0, 0.0, 5.0, 7.0],
        vec![3.0, 2.0, 2.0, 8.0],
    ];
    let a = hungarian(&costs)?;
    println!("pairs {:?}, total {}", a.pairs, a.total);

    // Rows 3, columns 4: try every injective choice of columns.
    let mut best = f64::INFINITY;
    for i in 0..4 {
        for j in (0..4).filter(|&j| j != i) {
            for k in (0..4).filter(|&k| k != i && k != j) {
                best = best.min(costs[0][i] + costs[1][j] + costs[2][k]);
            }
        }
    }
    println!("exhaustive minimum {best}");
    Ok(())
}
