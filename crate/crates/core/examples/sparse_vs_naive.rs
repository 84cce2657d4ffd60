// Time both storage modes on the randomized-fill family.

use std::time::Instant;

use acg::engine::{analyze, AnalysisOptions};
use acg::scalar::Dbm;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../benchmarks");
    println!("{:<12} {:>9} {:>9} {:>7}", "program", "naive", "sparse", "ratio");
    for m in 2..=4 {
        let prog = acg::cli::load(&dir.join(format!("init_rand_{m}.acg")))?;
        let mut secs = Vec::new();
        for opts in [AnalysisOptions::default(), AnalysisOptions::sparse()] {
            let t = Instant::now();
            let r = analyze::<Dbm>(&prog, &opts)?;
            secs.push(t.elapsed().as_secs_f64());
            assert!(r.all_proved());
        }
        println!("init_rand_{m:<2} {:>8.3}s {:>8.3}s {:>6.1}x", secs[0], secs[1], secs[0] / secs[1]);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
