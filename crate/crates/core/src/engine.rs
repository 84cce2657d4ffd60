//! Fixpoint computation over a program's control-flow graph.

use std::collections::{BTreeMap, BTreeSet};
use std::time::{Duration, Instant};

use crate::content::{Config, ContentState, Mode, NormalizeError, Vertex};
use crate::frontend::{BoundExpr, CheckDirective, Instr, Jump, Program};
use crate::relax::RelaxMode;
use crate::scalar::{Operand, Rhs, ScalarDomain};
use crate::transfer::{tf_assume, tf_instr};
use crate::var::Var;

/// Variables and constants that may bound a segment.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bounds {
    /// Index-relevant variables, in declaration order.
    pub vars: Vec<Var>,
    pub consts: BTreeSet<i64>,
}

impl Bounds {
    /// Every base with its successor: constants ascending, then variables.
    pub fn vertices(&self) -> Vec<Vertex> {
        let consts = self.consts.iter().map(|&c| Vertex::konst(c));
        let vars = self.vars.iter().map(|&v| Vertex::var(v));
        consts.chain(vars).flat_map(|v| [v, v.succ()]).collect()
    }
}

fn operand_var(o: &Operand) -> Option<Var> {
    match o {
        Operand::Var(v) => Some(*v),
        Operand::Const(_) => None,
    }
}

/// Computes the bound variables and constants of a program.
///
/// Array indices are bounds; so is anything assigned to a bound or compared
/// with one. Constants come from literal indices, literals assigned to or
/// compared with a bound, check bounds, and `0`.
pub fn compute_bounds(prog: &Program) -> Bounds {
    let mut va: BTreeSet<Var> = BTreeSet::new();
    let mut ca: BTreeSet<i64> = [0].into_iter().collect();
    let instrs = || prog.blocks.iter().flat_map(|b| &b.instrs);
    for ins in instrs() {
        match ins {
            Instr::Read { index, .. } | Instr::Write { index, .. } => match index {
                Operand::Var(v) => {
                    va.insert(*v);
                }
                Operand::Const(k) => {
                    ca.insert(*k);
                }
            },
            Instr::Assign { .. } => {}
        }
    }
    for c in &prog.checks {
        for b in [c.lo, c.hi] {
            if let Operand::Const(k) = b.base {
                ca.insert(k);
            }
        }
    }
    loop {
        let before = va.len();
        for ins in instrs() {
            if let Instr::Assign { target, rhs } = ins {
                if !va.contains(target) {
                    continue;
                }
                match rhs {
                    Rhs::Copy(w) | Rhs::Neg(w) => {
                        va.insert(*w);
                    }
                    Rhs::Bin(_, a, b) => va.extend(operand_var(a).into_iter().chain(operand_var(b))),
                    Rhs::Const(_) | Rhs::Havoc => {}
                }
            }
        }
        for b in &prog.blocks {
            if let Jump::Cond { lhs, rhs, .. } = &b.jump {
                for (x, y) in [(lhs, rhs), (rhs, lhs)] {
                    if operand_var(x).is_some_and(|v| va.contains(&v)) {
                        if let Some(w) = operand_var(y) {
                            va.insert(w);
                        }
                    }
                }
            }
        }
        if va.len() == before {
            break;
        }
    }
    for ins in instrs() {
        if let Instr::Assign {
            target,
            rhs: Rhs::Const(k),
        } = ins
        {
            if va.contains(target) {
                ca.insert(*k);
            }
        }
    }
    for b in &prog.blocks {
        if let Jump::Cond { lhs, rhs, .. } = &b.jump {
            for (x, y) in [(lhs, rhs), (rhs, lhs)] {
                if let (Some(v), Operand::Const(k)) = (operand_var(x), y) {
                    if va.contains(&v) {
                        ca.insert(*k);
                    }
                }
            }
        }
    }
    Bounds {
        vars: prog.scalars.iter().copied().filter(|v| va.contains(v)).collect(),
        consts: ca,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AnalysisOptions {
    pub mode: Mode,
    pub relax: RelaxMode,
    /// Joins before widening kicks in at a loop head.
    pub widen_delay: usize,
    /// Decreasing passes after the fixpoint.
    pub descend: usize,
    pub budget_factor: usize,
    /// Maximum visits of one block.
    pub visit_cap: usize,
    #[doc(hidden)]
    pub skip_weak_updates: bool,
}

impl Default for AnalysisOptions {
    fn default() -> AnalysisOptions {
        AnalysisOptions {
            mode: Mode::Naive,
            relax: RelaxMode::Cheap,
            widen_delay: 2,
            descend: 1,
            budget_factor: 1,
            visit_cap: 1000,
            skip_weak_updates: false,
        }
    }
}

impl AnalysisOptions {
    pub fn sparse() -> AnalysisOptions {
        AnalysisOptions {
            mode: Mode::Sparse,
            ..Default::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum AnalysisError {
    #[error("at block `{label}`: {source}")]
    Normalize {
        label: String,
        source: NormalizeError,
    },
    #[error("block `{label}` visited more than {cap} times")]
    VisitCap { label: String, cap: usize },
    #[error("check at `{label}`: bound `{bound}` is not a segment bound")]
    BadCheckBound { label: String, bound: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Verdict {
    Proved,
    Unknown,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Proved => "PROVED",
            Verdict::Unknown => "UNKNOWN",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckOutcome {
    pub check: CheckDirective,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Stats {
    pub bounds_time: Duration,
    pub fixpoint_time: Duration,
    pub narrowing_time: Duration,
    pub check_time: Duration,
    /// Block visits during the ascending phase.
    pub visits: usize,
    /// Descending normalization steps, summed.
    pub norm_steps: usize,
    pub vertices: usize,
    /// Largest count of non-⊤ entries in any block state.
    pub max_nontop: usize,
}

impl Stats {
    pub fn total(&self) -> Duration {
        self.bounds_time + self.fixpoint_time + self.narrowing_time + self.check_time
    }
}

#[derive(Clone, Debug)]
pub struct AnalysisResult<D: ScalarDomain> {
    pub bounds: Bounds,
    /// Block-entry states, indexed like `Program::blocks`.
    pub states: Vec<ContentState<D>>,
    pub checks: Vec<CheckOutcome>,
    pub stats: Stats,
    labels: BTreeMap<String, usize>,
}

impl<D: ScalarDomain> AnalysisResult<D> {
    pub fn state(&self, label: &str) -> Option<&ContentState<D>> {
        self.labels.get(label).map(|&k| &self.states[k])
    }

    /// The state after the first `k` instructions of a block.
    pub fn state_after(&self, prog: &Program, label: &str, k: usize) -> Result<ContentState<D>, NormalizeError> {
        let b = prog.block(label).expect("known label");
        let mut s = self.state(label).expect("known label").clone();
        for ins in &b.instrs[..k] {
            s = tf_instr(&s, ins)?;
        }
        Ok(s)
    }

    pub fn all_proved(&self) -> bool {
        self.checks.iter().all(|c| c.verdict == Verdict::Proved)
    }
}

thread_local! {
    static NORM_STEPS: std::cell::Cell<usize> = const { std::cell::Cell::new(0) };
}

pub(crate) fn count_norm_steps(k: usize) {
    NORM_STEPS.with(|c| c.set(c.get() + k));
}

fn norm_steps() -> usize {
    NORM_STEPS.with(|c| c.get())
}

/// Depth-first order: reverse postorder and loop heads.
fn cfg_order(prog: &Program) -> (Vec<usize>, BTreeSet<usize>) {
    let n = prog.blocks.len();
    let mut state = vec![0u8; n];
    let mut post = Vec::new();
    let mut heads = BTreeSet::new();
    let mut stack: Vec<(usize, usize)> = vec![(0, 0)];
    state[0] = 1;
    while let Some(&mut (b, ref mut k)) = stack.last_mut() {
        let succ = prog.successors(b);
        if *k < succ.len() {
            let s = succ[*k];
            *k += 1;
            match state[s] {
                0 => {
                    state[s] = 1;
                    stack.push((s, 0));
                }
                1 => {
                    heads.insert(s);
                }
                _ => {}
            }
        } else {
            state[b] = 2;
            post.push(b);
            stack.pop();
        }
    }
    post.reverse();
    (post, heads)
}

struct Engine<'p, D: ScalarDomain> {
    prog: &'p Program,
    opts: AnalysisOptions,
    verts: Vec<Vertex>,
    ui: Vec<Var>,
    cfg: Config,
    _d: std::marker::PhantomData<D>,
}

impl<D: ScalarDomain> Engine<'_, D> {
    fn err(&self, b: usize) -> impl Fn(NormalizeError) -> AnalysisError + '_ {
        move |source| AnalysisError::Normalize {
            label: self.prog.blocks[b].label.clone(),
            source,
        }
    }

    fn top(&self) -> ContentState<D> {
        ContentState::top(self.verts.clone(), self.ui.clone(), self.cfg)
    }

    fn bottom(&self) -> ContentState<D> {
        ContentState::bottom(self.verts.clone(), self.ui.clone(), self.cfg)
    }

    /// Outgoing edge states of block `b`.
    fn run_block(&self, b: usize, s: &ContentState<D>) -> Result<Vec<(usize, ContentState<D>)>, AnalysisError> {
        let block = &self.prog.blocks[b];
        let mut s = s.clone();
        for ins in &block.instrs {
            s = tf_instr(&s, ins).map_err(self.err(b))?;
        }
        let idx = |l: &str| self.prog.block_index(l).expect("resolved label");
        Ok(match &block.jump {
            Jump::Cond {
                lhs,
                cmp,
                rhs,
                then_label,
                else_label,
            } => {
                let t = tf_assume(&s, *lhs, *cmp, *rhs).map_err(self.err(b))?;
                let e = tf_assume(&s, *lhs, cmp.negate(), *rhs).map_err(self.err(b))?;
                vec![(idx(then_label), t), (idx(else_label), e)]
            }
            Jump::Br(l) => vec![(idx(l), s)],
            Jump::End | Jump::Error => vec![],
        })
    }

    /// Passes over the blocks in reverse postorder. Within a pass only
    /// forward edges schedule work; targets of back edges wait for the next
    /// pass, so a loop head sees every path through its body once per pass
    /// and its update count measures passes.
    fn ascend(&self, order: &[usize], heads: &BTreeSet<usize>, stats: &mut Stats) -> Result<Vec<Option<ContentState<D>>>, AnalysisError> {
        let n = self.prog.blocks.len();
        let mut rank = vec![usize::MAX; n];
        for (r, &b) in order.iter().enumerate() {
            rank[b] = r;
        }
        let mut input: Vec<Option<ContentState<D>>> = vec![None; n];
        let mut edges: BTreeMap<(usize, usize), ContentState<D>> = BTreeMap::new();
        let mut visits = vec![0usize; n];
        let mut updates = vec![0usize; n];
        let mut pass: BTreeSet<usize> = [rank[0]].into_iter().collect();
        while !pass.is_empty() {
            let mut later = BTreeSet::new();
            while let Some(r) = pass.pop_first() {
                let b = order[r];
                let mut incoming = (b == 0).then(|| self.top());
                for (_, out) in edges.iter().filter(|((_, t), _)| *t == b) {
                    incoming = Some(match incoming {
                        None => out.clone(),
                        Some(acc) => acc.join(out).map_err(self.err(b))?,
                    });
                }
                let Some(incoming) = incoming else { continue };
                let next = match &input[b] {
                    None => incoming,
                    Some(old) => {
                        if incoming.leq(old) {
                            continue;
                        }
                        let joined = old.join(&incoming).map_err(self.err(b))?;
                        updates[b] += 1;
                        if heads.contains(&b) && updates[b] > self.opts.widen_delay {
                            old.widen(&joined)
                        } else {
                            joined
                        }
                    }
                };
                visits[b] += 1;
                stats.visits += 1;
                if visits[b] > self.opts.visit_cap {
                    return Err(AnalysisError::VisitCap {
                        label: self.prog.blocks[b].label.clone(),
                        cap: self.opts.visit_cap,
                    });
                }
                for (t, out) in self.run_block(b, &next)? {
                    if out.is_bottom() {
                        edges.remove(&(b, t));
                        continue;
                    }
                    edges.insert((b, t), out);
                    if rank[t] > r {
                        pass.insert(rank[t]);
                    } else {
                        later.insert(rank[t]);
                    }
                }
                input[b] = Some(next);
            }
            pass = later;
        }
        Ok(input)
    }

    fn descend(&self, order: &[usize], input: &mut [Option<ContentState<D>>]) -> Result<(), AnalysisError> {
        let n = self.prog.blocks.len();
        for _ in 0..self.opts.descend {
            for &b in order {
                let mut acc: Option<ContentState<D>> = (b == 0).then(|| self.top());
                for p in 0..n {
                    let Some(s) = &input[p] else { continue };
                    if !self.prog.successors(p).contains(&b) {
                        continue;
                    }
                    for (t, out) in self.run_block(p, s)? {
                        if t != b || out.is_bottom() {
                            continue;
                        }
                        acc = Some(match acc {
                            None => out,
                            Some(a) => a.join(&out).map_err(self.err(b))?,
                        });
                    }
                }
                let Some(new) = acc else { continue };
                let keep = match &input[b] {
                    Some(old) => new.leq(old),
                    None => false,
                };
                if keep {
                    input[b] = Some(new);
                }
            }
        }
        Ok(())
    }
}

fn bound_vertex(b: BoundExpr) -> Vertex {
    let v = match b.base {
        Operand::Var(v) => Vertex::var(v),
        Operand::Const(k) => Vertex::konst(k),
    };
    if b.plus {
        v.succ()
    } else {
        v
    }
}

/// Decides one check against a block-entry state.
pub fn check_directive<D: ScalarDomain>(s: &ContentState<D>, c: &CheckDirective) -> Result<Verdict, AnalysisError> {
    let pos = |b: BoundExpr| {
        s.index_of(bound_vertex(b)).ok_or_else(|| AnalysisError::BadCheckBound {
            label: c.label.clone(),
            bound: b.to_string(),
        })
    };
    let (i, j) = (pos(c.lo)?, pos(c.hi)?);
    if s.is_bottom() {
        return Ok(Verdict::Proved);
    }
    let (p, q) = (s.vertices()[i], s.vertices()[j]);
    if crate::content::implies_decided(s.phi(), crate::content::vertex_diff(q, p, 0)) {
        return Ok(Verdict::Proved);
    }
    let full = s.full(i, j);
    let ok = c.predicate.iter().all(|lc| full.implies(lc));
    Ok(if ok { Verdict::Proved } else { Verdict::Unknown })
}

/// Runs the analysis to a post-fixpoint and decides every check.
pub fn analyze<D: ScalarDomain>(prog: &Program, opts: &AnalysisOptions) -> Result<AnalysisResult<D>, AnalysisError> {
    let mut stats = Stats::default();
    let steps0 = norm_steps();
    let t = Instant::now();
    let bounds = compute_bounds(prog);
    let verts = bounds.vertices();
    stats.vertices = verts.len();
    let mut ui = prog.segment_vars();
    ui.push(Var::idx());
    let cfg = Config {
        mode: opts.mode,
        relax: opts.relax,
        budget_factor: opts.budget_factor,
        scalars: prog.scalars.len(),
        skip_weak_updates: opts.skip_weak_updates,
    };
    let engine = Engine::<D> {
        prog,
        opts: *opts,
        verts,
        ui,
        cfg,
        _d: std::marker::PhantomData,
    };
    let (order, heads) = cfg_order(prog);
    stats.bounds_time = t.elapsed();

    let t = Instant::now();
    let mut input = engine.ascend(&order, &heads, &mut stats)?;
    stats.fixpoint_time = t.elapsed();

    let t = Instant::now();
    engine.descend(&order, &mut input)?;
    stats.narrowing_time = t.elapsed();

    let states: Vec<ContentState<D>> = input.into_iter().map(|s| s.unwrap_or_else(|| engine.bottom())).collect();
    stats.max_nontop = states.iter().map(|s| s.nontop_entries()).max().unwrap_or(0);

    let t = Instant::now();
    let labels: BTreeMap<String, usize> = prog.blocks.iter().enumerate().map(|(k, b)| (b.label.clone(), k)).collect();
    let mut checks = Vec::new();
    for c in &prog.checks {
        let verdict = check_directive(&states[labels[&c.label]], c)?;
        checks.push(CheckOutcome {
            check: c.clone(),
            verdict,
        });
    }
    stats.check_time = t.elapsed();
    stats.norm_steps = norm_steps() - steps0;
    Ok(AnalysisResult {
        bounds,
        states,
        checks,
        stats,
        labels,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parse_program;
    use crate::scalar::{Dbm, Interval};

    const COPY: &str = include_str!("../../../benchmarks/copy.acg");
    const RAND2: &str = include_str!("../../../benchmarks/init_rand_2.acg");
    const RAND2_CONST: &str = include_str!("../../../benchmarks/extra/init_rand_2_const.acg");

    fn names(vs: &[Var]) -> Vec<&str> {
        vs.iter().map(|v| v.name()).collect()
    }

    #[test]
    fn bounds_follow_indices_and_guards() {
        let b = compute_bounds(&parse_program(RAND2).unwrap());
        assert_eq!(names(&b.vars), ["n", "i1", "i2"]);
        assert_eq!(b.consts.iter().copied().collect::<Vec<_>>(), [0]);
        let b = compute_bounds(&parse_program(COPY).unwrap());
        assert_eq!(names(&b.vars), ["i", "N"]);
        assert_eq!(b.vertices().len(), 6);
    }

    #[test]
    fn literal_bounds_are_collected() {
        let p = parse_program(
            "array A;\nvar i, v;\nh:\n  i = 2\n  A[1] = v\n  A[i] = v\n  if (i < 7) d d\nd:\n  end\ncheck d: forall [0, 3) of A : a >= 0\n",
        )
        .unwrap();
        let b = compute_bounds(&p);
        assert_eq!(names(&b.vars), ["i"]);
        assert_eq!(b.consts.iter().copied().collect::<Vec<_>>(), [0, 1, 2, 3, 7]);
    }

    #[test]
    fn loop_heads_and_order() {
        let p = parse_program(COPY).unwrap();
        let (order, heads) = cfg_order(&p);
        let label = |k: usize| p.blocks[k].label.as_str();
        assert_eq!(order.iter().map(|&k| label(k)).collect::<Vec<_>>()[0], "head");
        assert_eq!(heads.iter().map(|&k| label(k)).collect::<Vec<_>>(), ["guard"]);
    }

    #[test]
    fn copy_proved_in_both_modes() {
        let p = parse_program(COPY).unwrap();
        for opts in [AnalysisOptions::default(), AnalysisOptions::sparse()] {
            let r = analyze::<Dbm>(&p, &opts).unwrap();
            assert!(r.all_proved(), "{:?}", opts.mode);
            assert!(r.stats.visits > 0);
        }
    }

    #[test]
    fn intervals_prove_constant_index_fill() {
        let p = parse_program(
            "array A;\nvar x;\nh:\n  A[0] = 1\n  A[2] = 1\n  A[1] = 1\n  x = A[1]\n  br d\nd:\n  end\ncheck d: forall [0, 3) of A : a = 1\n",
        )
        .unwrap();
        let r = analyze::<Interval>(&p, &AnalysisOptions::default()).unwrap();
        assert!(r.all_proved());
        let p = parse_program(RAND2_CONST).unwrap();
        assert!(analyze::<Dbm>(&p, &AnalysisOptions::default()).unwrap().all_proved());
        let p = parse_program(COPY).unwrap();
        let r = analyze::<Interval>(&p, &AnalysisOptions::default()).unwrap();
        assert!(!r.all_proved());
    }

    #[test]
    fn non_bound_check_is_rejected() {
        let p = parse_program("array A;\nvar i, x;\nh:\n  x = A[i]\n  end\ncheck h: forall [0, x) of A : a >= 0\n").unwrap();
        let e = analyze::<Dbm>(&p, &AnalysisOptions::default()).unwrap_err();
        assert!(matches!(e, AnalysisError::BadCheckBound { ref bound, .. } if bound == "x"), "{e}");
    }

    #[test]
    fn unreachable_and_empty_segments_are_proved() {
        let p = parse_program(
            "array A;\nvar i, n;\nh:\n  i = 0\n  if (i < n) w live\nw:\n  A[i] = 1\n  if (i < 0) dead live\ndead:\n  end\nlive:\n  end\ncheck dead: forall [0, n) of A : a = 7\ncheck live: forall [i, i) of A : a = 7\ncheck live: forall [0, n) of A : a = 7\n",
        )
        .unwrap();
        let r = analyze::<Dbm>(&p, &AnalysisOptions::default()).unwrap();
        let v: Vec<Verdict> = r.checks.iter().map(|c| c.verdict).collect();
        assert_eq!(v, [Verdict::Proved, Verdict::Proved, Verdict::Unknown]);
    }

    #[test]
    fn visit_cap_is_reported() {
        let p = parse_program(COPY).unwrap();
        let opts = AnalysisOptions {
            visit_cap: 1,
            ..Default::default()
        };
        let e = analyze::<Dbm>(&p, &opts).unwrap_err();
        assert!(matches!(e, AnalysisError::VisitCap { cap: 1, .. }), "{e}");
    }

    #[test]
    fn immediate_widening_still_proves_copy() {
        let p = parse_program(COPY).unwrap();
        let opts = AnalysisOptions {
            widen_delay: 0,
            ..Default::default()
        };
        assert!(analyze::<Dbm>(&p, &opts).unwrap().all_proved());
    }
}
