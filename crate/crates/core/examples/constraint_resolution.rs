// Resolution on general linear constraints, and the transitive collection
// of constraints reachable from an interesting one.

use acg::frontend::parse_constraint;
use acg::relax::{resolve, trans_star};
use acg::Var;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let c1 = parse_constraint("x + y >= 7")?;
    let c2 = parse_constraint("z - 2y >= 2")?;
    let c3 = parse_constraint("w + 2y >= 3")?;
    println!("resolve({c1}, {c2}) = {}", resolve(&c1, &c2, Var::new("y"))?);
    println!("resolve({c1}, {c3}) = {:?}", resolve(&c1, &c3, Var::new("y")).err());

    let seed = [parse_constraint("a - y >= 0")?];
    let rest = ["y - z >= 0", "z + w >= 0", "x - y >= 0"]
        .iter()
        .map(|s| parse_constraint(s))
        .collect::<Result<Vec<_>, _>>()?;
    println!("kept:");
    for c in trans_star(&seed, &rest) {
        println!("  {c}");
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
