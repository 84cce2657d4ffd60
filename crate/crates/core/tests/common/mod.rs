//! Seeded generators and a point-wise evaluator shared by the suites.

#![allow(dead_code)]

use std::path::PathBuf;

use acg::content::{Config, ContentState, Mode, NormalizeError, Vertex};
use acg::scalar::{DiffCons, ScalarDomain};
use acg::var::segment_var;
use acg::Var;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use rand::SeedableRng;

pub type Rng8 = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng8 {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn bench_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../benchmarks")
}

pub fn vars(names: &[&str]) -> Vec<Var> {
    names.iter().map(|n| Var::new(n)).collect()
}

/// A random difference or unary constraint over `vs`.
pub fn diff(r: &mut Rng8, vs: &[Var], unary_only: bool) -> DiffCons {
    let x = *vs.choose(r).unwrap();
    let k = r.gen_range(-3..=3);
    if unary_only || r.gen_bool(0.3) {
        return if r.gen_bool(0.5) { DiffCons::upper(x, k) } else { DiffCons::lower(x, k) };
    }
    let y = *vs.iter().filter(|&&y| y != x).collect::<Vec<_>>().choose(r).unwrap().to_owned();
    DiffCons::diff(x, y, k)
}

/// Top, bottom, or a meet of a few random constraints.
pub fn value<D: ScalarDomain>(r: &mut Rng8, vs: &[Var], unary_only: bool) -> D {
    match r.gen_range(0..20) {
        0 => D::top(),
        1 => D::bottom(),
        _ => (0..r.gen_range(1..=4)).fold(D::top(), |d, _| d.add_diff(diff(r, vs, unary_only))),
    }
}

/// Whether the integer point satisfies `d`.
pub fn holds_at<D: ScalarDomain>(d: &D, vs: &[Var], point: &[i64]) -> bool {
    let val = |v: Option<Var>| v.map_or(0, |v| point[vs.iter().position(|&w| w == v).unwrap()]);
    d.diff_constraints().iter().all(|c| val(c.pos) - val(c.neg) <= c.bound)
}

/// Every point of `[-5, 5]^n`.
pub fn grid(n: usize) -> Vec<Vec<i64>> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|p: Vec<i64>| {
                (-5..=5).map(move |x| {
                    let mut p = p.clone();
                    p.push(x);
                    p
                })
            })
            .collect();
    }
    out
}

/// A random content state over at most five vertices and three scalars.
pub fn content_state<D: ScalarDomain>(r: &mut Rng8) -> Result<ContentState<D>, NormalizeError> {
    let scalars = vars(&["i", "j", "x"]);
    let (i, j) = (Vertex::var(scalars[0]), Vertex::var(scalars[1]));
    let zero = Vertex::konst(0);
    let all = [zero, zero.succ(), i, i.succ(), j, j.succ()];
    let keep = r.gen_range(2..=5);
    let mut picked: Vec<usize> = (0..all.len()).collect::<Vec<_>>().choose_multiple(r, keep).copied().collect();
    picked.sort();
    let verts: Vec<Vertex> = picked.iter().map(|&k| all[k]).collect();
    let a = segment_var("A");
    let ui = vec![a, Var::idx()];
    let mut universe = scalars.clone();
    universe.extend(&ui);
    let phi = (0..r.gen_range(0..=3)).fold(D::top(), |d, _| d.add_diff(diff(r, &scalars, false)));
    let mut entries = Vec::new();
    for _ in 0..r.gen_range(0..=4) {
        let p = *verts.choose(r).unwrap();
        let q = *verts.choose(r).unwrap();
        let d = (0..r.gen_range(1..=3)).fold(D::top(), |d, _| d.add_diff(diff(r, &universe, false)));
        entries.push((p, q, d));
    }
    let cfg = Config {
        mode: if r.gen_bool(0.5) { Mode::Naive } else { Mode::Sparse },
        scalars: scalars.len(),
        ..Config::default()
    };
    ContentState::from_entries(phi, verts, ui, cfg, &entries)
}
