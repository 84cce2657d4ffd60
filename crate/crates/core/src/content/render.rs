use std::fmt::Write as _;

use super::{meet_decided, term_diff, ContentState};
use crate::scalar::{render_diffs, DiffCons, ScalarDomain};
use crate::var::Var;

impl<D: ScalarDomain> ContentState<D> {
    /// `φ ⊓ ⟦i < j⟧ ⊓ ⟦i ≤ idx < j⟧`: what every cell of `[i, j)` satisfies
    /// for free.
    pub fn cell_context(&self, i: usize, j: usize) -> D {
        let (p, q) = (self.verts[i], self.verts[j]);
        let idx = (Some(Var::idx()), 0);
        let ctx = self.boundary(i, j);
        let ctx = meet_decided(&ctx, term_diff(p.term(), idx, 0));
        meet_decided(&ctx, term_diff(idx, q.term(), -1))
    }

    /// An irredundant form of the entry, without what the context implies.
    pub fn render_entry(&self, i: usize, j: usize) -> String {
        let full = self.full(i, j);
        if full.is_bottom() {
            return "⊥".into();
        }
        let ctx = self.cell_context(i, j);
        let ui = &self.ui;
        let mut cs = full.diff_constraints();
        // scalar-only facts first, then relational before unary
        cs.sort_by_key(|c: &DiffCons| {
            let touches = c.vars().any(|v| ui.contains(&v));
            (touches, std::cmp::Reverse(c.vars().count()), c.to_string())
        });
        let mut kept = vec![true; cs.len()];
        for k in 0..cs.len() {
            kept[k] = false;
            let rest = cs
                .iter()
                .zip(&kept)
                .filter(|(_, &on)| on)
                .fold(ctx.clone(), |d, (c, _)| d.add_diff(*c));
            if !rest.implies_diff(&cs[k]) {
                kept[k] = true;
            }
        }
        let left: Vec<DiffCons> = cs.into_iter().zip(kept).filter(|(_, on)| *on).map(|(c, _)| c).collect();
        if left.is_empty() {
            "⊤".into()
        } else {
            render_diffs(&left)
        }
    }

    /// Rendering of the entry between two vertices, if both exist.
    pub fn render_between(&self, p: super::Vertex, q: super::Vertex) -> Option<String> {
        Some(self.render_entry(self.index_of(p)?, self.index_of(q)?))
    }

    /// The matrix as text, one row per line.
    pub fn render_matrix(&self) -> String {
        let n = self.n();
        let mut out = String::new();
        for i in 0..n {
            let cells: Vec<String> = (0..n).map(|j| self.render_entry(i, j)).collect();
            let _ = writeln!(out, "{}: {}", self.verts[i], cells.join(" | "));
        }
        out
    }

    /// `φ` and the non-empty edges, omitting edges implied through an
    /// intermediate vertex.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        if self.is_bottom() {
            return "⊥\n".into();
        }
        let _ = writeln!(out, "φ: {}", self.phi.render());
        let n = self.n();
        let fulls: Vec<D> = (0..n * n).map(|k| self.full(k / n, k % n)).collect();
        let full = |i: usize, j: usize| &fulls[i * n + j];
        for i in 0..n {
            for j in 0..n {
                if self.structural(i, j) || full(i, j).is_bottom() {
                    continue;
                }
                let reduced = (0..n).any(|k| {
                    k != i
                        && k != j
                        && !full(i, k).is_bottom()
                        && !full(k, j).is_bottom()
                        && full(i, k).join(full(k, j)).leq(full(i, j))
                });
                if reduced {
                    continue;
                }
                let label = self.render_entry(i, j);
                if label == "⊤" {
                    let _ = writeln!(out, "  {} -> {}", self.verts[i], self.verts[j]);
                } else {
                    let _ = writeln!(out, "  {} -> {} : {}", self.verts[i], self.verts[j], label);
                }
            }
        }
        out
    }
}
