//! Abstract transfer functions over content states.
//!
//! Every function returns a normalized state. Assignments whose target
//! occurs on the right-hand side go through a fresh temporary, named after
//! the target with a trailing `'` so it can never clash with a program
//! variable.

use crate::content::{meet_decided, term_diff, vertex_diff, ContentState, Decided, NormalizeError, Vertex};
use crate::frontend::{Cmp, Instr};
use crate::scalar::{Operand, Rhs, ScalarDomain};
use crate::var::{segment_var, Var};

pub type TfResult<D> = Result<ContentState<D>, NormalizeError>;

fn temp(v: Var) -> Var {
    Var::new(&format!("{}'", v.name()))
}

fn operand_vertex(o: Operand) -> Vertex {
    match o {
        Operand::Var(v) => Vertex::var(v),
        Operand::Const(k) => Vertex::konst(k),
    }
}

fn operand_term(o: Operand) -> (Option<Var>, i64) {
    match o {
        Operand::Var(v) => (Some(v), 0),
        Operand::Const(k) => (None, k),
    }
}

/// `x = o` as difference constraints.
fn equate<D: ScalarDomain>(d: &D, x: Var, o: Operand) -> D {
    let t = operand_term(o);
    let d = meet_decided(d, term_diff((Some(x), 0), t, 0));
    meet_decided(&d, term_diff(t, (Some(x), 0), 0))
}

/// `idx = m(vertex)`.
fn at_index<D: ScalarDomain>(d: &D, at: Vertex) -> D {
    let idx = (Some(Var::idx()), 0);
    let d = meet_decided(d, term_diff(idx, at.term(), 0));
    meet_decided(&d, term_diff(at.term(), idx, 0))
}

fn vertex_pos<D: ScalarDomain>(s: &ContentState<D>, v: Vertex) -> usize {
    s.index_of(v)
        .unwrap_or_else(|| panic!("index `{v}` is not a segment bound of this state"))
}

fn assign_fresh<D: ScalarDomain>(s: &ContentState<D>, v: Var, rhs: &Rhs) -> TfResult<D> {
    let mut out = s.clone();
    let phi = s.phi().assign(v, rhs);
    out.kill(v, phi);
    out.normalize()?;
    Ok(out)
}

/// `v := rhs`, including havoc.
pub fn tf_assign<D: ScalarDomain>(s: &ContentState<D>, v: Var, rhs: &Rhs) -> TfResult<D> {
    if s.is_bottom() {
        return Ok(s.clone());
    }
    if !rhs.mentions(v) {
        return assign_fresh(s, v, rhs);
    }
    let t = temp(v);
    let mut out = s.clone();
    if out.index_of(Vertex::var(v)).is_some() {
        out.add_base(t, Some(v));
    }
    let out = assign_fresh(&out, t, &Rhs::Copy(v))?;
    let mut out = assign_fresh(&out, v, &rhs.substitute(v, t))?;
    out.eliminate(t);
    out.normalize()?;
    Ok(out)
}

/// `v := ?`
pub fn tf_havoc<D: ScalarDomain>(s: &ContentState<D>, v: Var) -> TfResult<D> {
    tf_assign(s, v, &Rhs::Havoc)
}

/// `v := array[index]`
pub fn tf_array_read<D: ScalarDomain>(
    s: &ContentState<D>,
    v: Var,
    array: &str,
    index: Operand,
) -> TfResult<D> {
    if s.is_bottom() {
        return Ok(s.clone());
    }
    if index == Operand::Var(v) {
        let t = temp(v);
        let out = tf_array_read(s, t, array, index)?;
        let mut out = assign_fresh(&out, v, &Rhs::Copy(t))?;
        out.eliminate(t);
        out.normalize()?;
        return Ok(out);
    }
    let a = segment_var(array);
    let at = operand_vertex(index);
    let mut out = s.clone();
    out.kill(v, s.phi().project(v));
    let (i, ip) = (vertex_pos(&out, at), vertex_pos(&out, at.succ()));
    let cell = at_index(&equate(&out.full(i, ip), a, Operand::Var(v)), at);
    let cell = out.store_value(i, ip, cell);
    out.set(i, ip, cell);
    out.normalize()?;
    Ok(out)
}

/// `array[index] := value`
pub fn tf_array_write<D: ScalarDomain>(
    s: &ContentState<D>,
    array: &str,
    index: Operand,
    value: Operand,
) -> TfResult<D> {
    if s.is_bottom() {
        return Ok(s.clone());
    }
    let a = segment_var(array);
    let at = operand_vertex(index);
    let (i, ip) = (vertex_pos(s, at), vertex_pos(s, at.succ()));
    let written = |d: &D| at_index(&equate(&d.project(a), a, value), at);
    let skip_weak = s.config().skip_weak_updates;
    let mut out = s.clone();
    out.transform(s.phi().clone(), false, |st, p, q, full| {
        if (p, q) == (i, ip) || full.is_bottom() {
            return None;
        }
        let (vp, vq) = (st.vertices()[p], st.vertices()[q]);
        let phi = st.phi();
        let before = implies(phi, vertex_diff(vq, at, 0));
        let after = implies(phi, vertex_diff(at.succ(), vp, 0));
        if before || after || skip_weak {
            return None;
        }
        Some(full.join(&written(&full)))
    });
    let strong = written(&out.full(i, ip));
    let strong = out.store_value(i, ip, strong);
    out.set(i, ip, strong);
    out.normalize()?;
    Ok(out)
}

fn implies<D: ScalarDomain>(d: &D, c: Decided) -> bool {
    crate::content::implies_decided(d, c)
}

/// The constraints of `lhs cmp rhs`, or `None` for a disequality.
fn condition(lhs: Operand, cmp: Cmp, rhs: Operand) -> Option<Vec<Decided>> {
    let (l, r) = (operand_term(lhs), operand_term(rhs));
    Some(match cmp {
        Cmp::Lt => vec![term_diff(l, r, -1)],
        Cmp::Le => vec![term_diff(l, r, 0)],
        Cmp::Gt => vec![term_diff(r, l, -1)],
        Cmp::Ge => vec![term_diff(r, l, 0)],
        Cmp::Eq => vec![term_diff(l, r, 0), term_diff(r, l, 0)],
        Cmp::Ne => return None,
    })
}

/// Restricts the state to `lhs cmp rhs`.
pub fn tf_assume<D: ScalarDomain>(
    s: &ContentState<D>,
    lhs: Operand,
    cmp: Cmp,
    rhs: Operand,
) -> TfResult<D> {
    if s.is_bottom() {
        return Ok(s.clone());
    }
    let phi = match condition(lhs, cmp, rhs) {
        Some(cs) => cs.into_iter().fold(s.phi().clone(), |d, c| meet_decided(&d, c)),
        None => match (lhs, rhs) {
            (Operand::Const(x), Operand::Const(y)) if x == y => D::bottom(),
            (Operand::Var(x), Operand::Var(y)) if x == y => D::bottom(),
            (Operand::Var(x), Operand::Const(k)) | (Operand::Const(k), Operand::Var(x)) => {
                s.phi().assume_ne(x, k)
            }
            _ => s.phi().clone(),
        },
    };
    let mut out = s.clone();
    out.set_phi(phi);
    out.normalize()?;
    Ok(out)
}

/// One instruction.
pub fn tf_instr<D: ScalarDomain>(s: &ContentState<D>, ins: &Instr) -> TfResult<D> {
    match ins {
        Instr::Assign { target, rhs } => tf_assign(s, *target, rhs),
        Instr::Read {
            target,
            array,
            index,
        } => tf_array_read(s, *target, array, *index),
        Instr::Write {
            array,
            index,
            value,
        } => tf_array_write(s, array, *index, *value),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::content::Config;
    use crate::scalar::{BinOp, Dbm, DiffCons};

    fn v(n: &str) -> Var {
        Var::new(n)
    }

    fn vx(n: &str) -> Vertex {
        Vertex::var(v(n))
    }

    /// Bounds `0, i, j, n`; `0 ≤ i, j ≤ n`.
    fn fresh(phi: Dbm) -> ContentState<Dbm> {
        let base = Dbm::top()
            .add_diff(DiffCons::lower(v("i"), 0))
            .add_diff(DiffCons::lower(v("j"), 0))
            .add_diff(DiffCons::diff(v("i"), v("n"), 0))
            .add_diff(DiffCons::diff(v("j"), v("n"), 0));
        let verts = ["i", "j", "n"].iter().fold(vec![Vertex::konst(0), Vertex::konst(0).succ()], |mut vs, n| {
            vs.extend([vx(n), vx(n).succ()]);
            vs
        });
        let cfg = Config {
            scalars: 5,
            ..Config::default()
        };
        let mut s = ContentState::top(verts, vec![v("a"), Var::idx()], cfg);
        s.set_phi(base.meet(&phi));
        s.normalize().unwrap();
        s
    }

    fn between(s: &ContentState<Dbm>, p: Vertex, q: Vertex) -> String {
        s.render_between(p, q).unwrap()
    }

    fn incr(n: &str) -> Rhs {
        Rhs::Bin(BinOp::Add, Operand::Var(v(n)), Operand::Const(1))
    }

    #[test]
    fn read_names_the_cell() {
        let s = fresh(Dbm::top().add_diff(DiffCons::diff(v("i"), v("n"), -1)));
        let r = tf_array_read(&s, v("x"), "A", Operand::Var(v("i"))).unwrap();
        assert_eq!(between(&r, vx("i"), vx("i").succ()), "a = x");
    }

    #[test]
    fn write_then_advance_grows_prefix() {
        let s = fresh(Dbm::top().add_diff(DiffCons::upper(v("i"), 0)).add_diff(DiffCons::lower(v("n"), 2)));
        let w = tf_array_write(&s, "A", Operand::Var(v("i")), Operand::Const(5)).unwrap();
        let w = tf_assign(&w, v("i"), &incr("i")).unwrap();
        assert_eq!(between(&w, Vertex::konst(0), vx("i")), "a = 5");
        assert_eq!(w.vertices(), s.vertices());
        let w = tf_array_write(&w, "A", Operand::Var(v("i")), Operand::Const(5)).unwrap();
        let w = tf_assign(&w, v("i"), &incr("i")).unwrap();
        assert_eq!(between(&w, Vertex::konst(0), vx("i")), "a = 5");
        assert!(w.phi().implies_diff(&DiffCons::lower(v("i"), 2)));
    }

    #[test]
    fn self_read_through_index() {
        let s = fresh(Dbm::top().add_diff(DiffCons::diff(v("i"), v("n"), -1)));
        let r = tf_array_read(&s, v("i"), "A", Operand::Var(v("i"))).unwrap();
        assert!(!r.is_bottom());
        assert!(r.vertices().iter().all(|x| !x.to_string().contains('\'')));
    }

    #[test]
    fn weak_update_at_unrelated_index() {
        let s = fresh(Dbm::top().add_diff(DiffCons::diff(v("i"), v("n"), -1)).add_diff(DiffCons::diff(v("j"), v("n"), -1)));
        let w = tf_array_write(&s, "A", Operand::Var(v("i")), Operand::Const(3)).unwrap();
        let w = tf_array_write(&w, "A", Operand::Var(v("j")), Operand::Const(4)).unwrap();
        assert_eq!(between(&w, vx("j"), vx("j").succ()), "a = 4");
        assert_eq!(between(&w, vx("i"), vx("i").succ()), "3 <= a <= 4");
    }

    #[test]
    fn havoc_forgets_bound() {
        let s = fresh(Dbm::top().add_diff(DiffCons::upper(v("i"), 0)).add_diff(DiffCons::lower(v("n"), 1)));
        let w = tf_array_write(&s, "A", Operand::Var(v("i")), Operand::Const(1)).unwrap();
        assert_eq!(between(&w, Vertex::konst(0), Vertex::konst(0).succ()), "a = 1");
        let h = tf_havoc(&w, v("i")).unwrap();
        assert_eq!(between(&h, vx("i"), vx("i").succ()), "⊤");
        assert_eq!(between(&h, Vertex::konst(0), Vertex::konst(0).succ()), "a = 1");
    }

    #[test]
    fn assume_refines_and_contradicts() {
        let s = fresh(Dbm::top().add_diff(DiffCons::upper(v("i"), 0)));
        let t = tf_assume(&s, Operand::Var(v("i")), Cmp::Lt, Operand::Var(v("n"))).unwrap();
        assert!(t.phi().implies_diff(&DiffCons::lower(v("n"), 1)));
        let ne = tf_assume(&s, Operand::Var(v("i")), Cmp::Ne, Operand::Const(0)).unwrap();
        assert!(ne.equivalent(&s));
        let f = tf_assume(&s, Operand::Var(v("n")), Cmp::Lt, Operand::Var(v("i"))).unwrap();
        assert!(f.is_bottom());
        let same = tf_assume(&s, Operand::Var(v("i")), Cmp::Ne, Operand::Var(v("n"))).unwrap();
        assert!(same.equivalent(&s));
    }

    #[test]
    fn bottom_is_absorbing() {
        let s = fresh(Dbm::bottom());
        assert!(s.is_bottom());
        let ins = [
            Instr::Assign { target: v("i"), rhs: incr("i") },
            Instr::Read { target: v("x"), array: "A".into(), index: Operand::Var(v("i")) },
            Instr::Write { array: "A".into(), index: Operand::Var(v("i")), value: Operand::Const(0) },
        ];
        for i in &ins {
            assert!(tf_instr(&s, i).unwrap().is_bottom());
        }
    }
}
