// The same programs under both scalar domains.

use acg::engine::{analyze, AnalysisOptions};
use acg::scalar::{Dbm, Interval, ScalarDomain};

fn verdicts<D: ScalarDomain>(prog: &acg::frontend::Program) -> Result<String, Box<dyn std::error::Error>> {
    let r = analyze::<D>(prog, &AnalysisOptions::default())?;
    Ok(acg::cli::check_lines(&r).join("; "))
}

const FILL: &str = "\
array A;
var x;
h:
  A[0] = 1
  A[2] = 1
  A[1] = 1
  x = A[1]
  br d
d:
  end
check d: forall [0, 3) of A : a = 1
";

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../benchmarks");
    for name in ["copy", "init", "extra/init_rand_2_const"] {
        let prog = acg::cli::load(&dir.join(format!("{name}.acg")))?;
        println!("{name}");
        println!("  dbm:      {}", verdicts::<Dbm>(&prog)?);
        println!("  interval: {}", verdicts::<Interval>(&prog)?);
    }
    let fill = acg::frontend::parse_program(FILL)?;
    println!("constant-index fill");
    println!("  dbm:      {}", verdicts::<Dbm>(&fill)?);
    println!("  interval: {}", verdicts::<Interval>(&fill)?);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
