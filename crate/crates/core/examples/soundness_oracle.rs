// Check an analysis result against every small concrete run.

use acg::engine::{analyze, AnalysisOptions};
use acg::oracle::{soundness_enumerate, Limits};
use acg::scalar::Dbm;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../benchmarks");
    let lim = Limits {
        max_len: 2,
        ..Limits::default()
    };
    for name in ["copy", "arraymax", "sentinel", "extra/prefix_write"] {
        let prog = acg::cli::load(&dir.join(format!("{name}.acg")))?;
        for opts in [AnalysisOptions::default(), AnalysisOptions::sparse()] {
            let r = analyze::<Dbm>(&prog, &opts)?;
            let e = soundness_enumerate(&prog, &r, &lim);
            println!("{name:<18} {:<7} states={:<7} violations={}", format!("{:?}", opts.mode), e.states, e.violations.len());
        }
    }
    let prog = acg::cli::load(&dir.join("extra/prefix_write.acg"))?;
    let mutated = AnalysisOptions {
        skip_weak_updates: true,
        ..AnalysisOptions::default()
    };
    let r = analyze::<Dbm>(&prog, &mutated)?;
    let e = soundness_enumerate(&prog, &r, &lim);
    println!("weak updates skipped: {} violations", e.violations.len());
    if let Some(v) = e.violations.first() {
        println!("  {}: {}", v.state, v.reason);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
