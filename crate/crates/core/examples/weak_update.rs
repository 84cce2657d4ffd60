// A write inside a zeroed prefix: strong update on the written cell, weak
// update on every segment that may contain it.

use acg::content::{Config, ContentState, Vertex};
use acg::scalar::{DiffCons, Dbm, Operand, ScalarDomain};
use acg::transfer::tf_array_write;
use acg::var::segment_var;
use acg::Var;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let (i, j, n) = (Var::new("i"), Var::new("j"), Var::new("N"));
    let a = segment_var("A");
    let phi = Dbm::top()
        .add_diff(DiffCons::lower(i, 0))
        .add_diff(DiffCons::diff(i, j, -1))
        .add_diff(DiffCons::diff(j, n, 0));
    let verts: Vec<Vertex> = [Vertex::konst(0), Vertex::var(i), Vertex::var(j), Vertex::var(n)]
        .into_iter()
        .flat_map(|v| [v, v.succ()])
        .collect();
    let zero = Dbm::top().add_diff(DiffCons::upper(a, 0)).add_diff(DiffCons::lower(a, 0));
    let cfg = Config {
        scalars: 3,
        ..Config::default()
    };
    let s = ContentState::from_entries(phi, verts, vec![a, Var::idx()], cfg, &[(Vertex::konst(0), Vertex::var(j), zero.clone())])?;
    println!("before A[i] = 1:\n{}", s.render_matrix());
    let w = tf_array_write(&s, "A", Operand::Var(i), Operand::Const(1))?;
    println!("after:\n{}", w.render_matrix());

    let mut c = s.config();
    c.skip_weak_updates = true;
    let broken = ContentState::from_entries(s.phi().clone(), s.vertices().to_vec(), s.segment_vars().to_vec(), c, &[(Vertex::konst(0), Vertex::var(j), zero)])?;
    let w = tf_array_write(&broken, "A", Operand::Var(i), Operand::Const(1))?;
    println!("with weak updates skipped the state is {}", if w.is_bottom() { "⊥" } else { "not ⊥" });
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
