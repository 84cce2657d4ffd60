// Relaxed entries: what survives, and what a join of relaxed entries
// loses without the scalar context.

use acg::content::{Config, ContentState, Mode, Vertex};
use acg::relax::{relax_dbm, relax_unclosed, RelaxMode};
use acg::scalar::{DiffCons, Dbm, ScalarDomain};
use acg::var::segment_var;
use acg::Var;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let (x, y, a) = (Var::new("x"), Var::new("y"), segment_var("A"));
    let v = |n: &str| Vertex::var(Var::new(n));
    let lt = |p: Var, q: Var| DiffCons::diff(p, q, -1);
    let phi = Dbm::top().add_diff(lt(x, y));
    let ik = phi.add_diff(lt(Var::new("i"), Var::new("k"))).add_diff(lt(x, a));
    let kj = phi
        .add_diff(lt(Var::new("k"), Var::new("j")))
        .add_diff(DiffCons::diff(y, a, 0))
        .add_diff(DiffCons::diff(a, y, 0));
    let ui = [a, Var::idx()];
    for mode in [RelaxMode::Cheap, RelaxMode::Exact] {
        let r = relax_dbm(&phi, &kj, v("k"), v("j"), &ui, mode);
        let shown: Vec<String> = r.constraints.iter().map(|c| c.to_string()).collect();
        println!("{mode:?} relaxation of (k,j): {}", shown.join(", "));
    }

    let lost: Dbm = relax_unclosed(&phi, &[lt(x, a)], v("i"), v("k")).join(&relax_unclosed(
        &phi,
        &[DiffCons::diff(y, a, 0), DiffCons::diff(a, y, 0)],
        v("k"),
        v("j"),
    ));
    println!("unclosed join keeps x < a: {}", lost.implies_diff(&lt(x, a)));

    let verts: Vec<Vertex> = ["i", "k", "j"].iter().flat_map(|n| [v(n), v(n).succ()]).collect();
    let cfg = Config {
        mode: Mode::Sparse,
        scalars: 5,
        ..Config::default()
    };
    let s = ContentState::from_entries(phi, verts, ui.to_vec(), cfg, &[(v("i"), v("k"), ik), (v("k"), v("j"), kj)])?;
    println!("sparse state, (i,j): {}", s.render_between(v("i"), v("j")).unwrap());
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
