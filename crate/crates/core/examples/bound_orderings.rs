// How many bound orderings a partitioning analysis must tell apart.

use acg::oracle::orderings::{count_orderings, orderings, OrderingProblem};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let one = OrderingProblem::new(1, false);
    for o in orderings(&one) {
        println!("{}", o.display(&one));
    }
    for dz in [false, true] {
        let counts: Vec<u64> = (1..=5).map(|m| count_orderings(&OrderingProblem::new(m, dz))).collect();
        println!("distinguish zero = {dz}: {counts:?}");
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
