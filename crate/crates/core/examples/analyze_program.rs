// Parse a program, analyze it, and print verdicts and the loop-head state.

use acg::engine::{analyze, AnalysisOptions};
use acg::frontend::parse_program;
use acg::scalar::Dbm;

const SRC: &str = "\
array A, B;
var i, N, v;

head:
  i = 0
  br guard
guard:
  if (i < N) body tail
body:
  v = A[i]
  B[i] = v
  i = i + 1
  br guard
tail:
  end

check tail: forall [0, N) of A, B : a = b
";

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let prog = parse_program(SRC)?;
    let result = analyze::<Dbm>(&prog, &AnalysisOptions::default())?;
    for line in acg::cli::check_lines(&result) {
        println!("{line}");
    }
    let head = result.state("guard").expect("loop head");
    println!("\nat guard:\n{}", head.dump());
    let mid = result.state_after(&prog, "body", 1)?;
    println!("after `v = A[i]`:\n{}", mid.render_matrix());
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
