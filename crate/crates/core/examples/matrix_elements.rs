//! ⟨ξ(i)|ρ^{-1/2}|ξ(i)'⟩ for every port: diagonal in all labels with the
//! value c(s), computed here from a numerically diagonalized ρ.
//!
//!     cargo run --example matrix_elements -- 4

use pbt::protocol::{block_spins, c_coefficient, MatrixElementOracle};

fn main() -> pbt::Result<()> {
    let n: usize = std::env::args()
        .nth(1)
        .map(|s| s.parse().expect("port count"))
        .unwrap_or(4);

    println!("c(s) for N = {n}:");
    for two_s in block_spins(n) {
        println!("  s = {two_s}/2: {:.12}", c_coefficient(n, two_s)?);
    }

    let oracle = MatrixElementOracle::new(n)?;
    let labels = oracle.xi_basis().labels();
    println!("{} ξ labels per port", labels.len());
    for port in 1..=n {
        println!("  port {port}: max deviation from δδδ·c(s) = {:.2e}", oracle.max_deviation(port)?);
    }

    // a small slice of the table for port 1
    let (labels, table) = oracle.table(1)?;
    let shown = labels.len().min(6);
    for a in 0..shown {
        let row: Vec<String> = (0..shown).map(|b| format!("{:8.5}", table[(a, b)].re)).collect();
        println!("  path {:?} m = {:>2}/2 {}", labels[a].path, labels[a].two_m, row.join(" "));
    }
    Ok(())
}
