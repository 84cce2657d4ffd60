use proptest::prelude::*;

use super::*;
use crate::scalar::{BinOp, Rel};

const COPY: &str = "\
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

#[test]
fn parses_copy() {
    let p = parse_program(COPY).unwrap();
    assert_eq!(p.entry().label, "head");
    assert_eq!(p.blocks.len(), 4);
    let (i, n, v) = (Var::new("i"), Var::new("N"), Var::new("v"));
    let body = p.block("body").unwrap();
    assert_eq!(
        body.instrs,
        vec![
            Instr::Read {
                target: v,
                array: "A".into(),
                index: Operand::Var(i)
            },
            Instr::Write {
                array: "B".into(),
                index: Operand::Var(i),
                value: Operand::Var(v)
            },
            Instr::Assign {
                target: i,
                rhs: Rhs::Bin(BinOp::Add, Operand::Var(i), Operand::Const(1))
            },
        ]
    );
    assert_eq!(p.successors(1), vec![2, 3]);
    let c = &p.checks[0];
    assert_eq!(c.lo.base, Operand::Const(0));
    assert_eq!(c.hi.base, Operand::Var(n));
    assert_eq!(c.predicate[0].rel(), Rel::Eq);
    assert_eq!(c.predicate[0].to_string(), "a - b = 0");
}

#[test]
fn parses_init_rand_2() {
    let src = "\
array A;
var i1, i2, n, x, p, t;
head:
  i1 = 0
  i2 = 0
  x = ?
  br g1
g1:
  if (i1 < n) g2 tail
g2:
  if (i2 < n) body tail
body:
  p = ?
  if (p < 0) w1 w2
w1:
  t = x + 1
  A[i1] = t
  i1 = i1 + 1
  br g1
w2:
  t = x + 2
  A[i2] = t
  i2 = i2 + 1
  br g1
tail:
  end
";
    let p = parse_program(src).unwrap();
    let havocs = p
        .blocks
        .iter()
        .flat_map(|b| &b.instrs)
        .filter(|i| matches!(i, Instr::Assign { rhs: Rhs::Havoc, .. }))
        .count();
    assert_eq!(havocs, 2);
    let writes = p
        .blocks
        .iter()
        .filter(|b| b.instrs.iter().any(|i| matches!(i, Instr::Write { .. })))
        .count();
    assert_eq!(writes, 2);
}

#[test]
fn empty_program_rejected() {
    let e = parse_program("array A;\nvar i;\n# nothing\n").unwrap_err();
    assert_eq!(e.category(), "empty-program");
    assert!(e.to_string().contains("program needs ≥1 block"));
}

#[test]
fn error_categories_and_locations() {
    let cases = [
        ("var i;\nh:\n  i = 0\n  br nowhere\n", "unknown-label", 4, 6),
        ("var i;\nh:\n  j = 0\n  end\n", "undeclared", 3, 3),
        ("var i;\nh:\n  end\nh:\n  end\n", "duplicate-label", 4, 1),
        ("array A;\nvar a;\nh:\n  end\n", "name-clash", 2, 5),
        ("var idx;\nh:\n  end\n", "name-clash", 1, 5),
        ("var i;\nh:\n  i = 0 @\n  end\n", "lexical", 3, 9),
        ("var i;\nh:\n  i = 0\n", "syntax", 4, 1),
        ("var i;\nh:\n  end\ncheck nowhere: forall [0, i) of A : a = 0\n", "undeclared", 4, 33),
        ("array A;\nvar i;\nh:\n  end\ncheck gone: forall [0, i) of A : a = 0\n", "unknown-label", 5, 7),
    ];
    for (src, cat, line, col) in cases {
        let e = parse_program(src).unwrap_err();
        assert_eq!(e.category(), cat, "{src:?}: {e}");
        assert_eq!(e.loc(), Loc { line, col }, "{src:?}: {e}");
    }
}

#[test]
fn literal_operands_and_bounds() {
    let src = "\
array A;
var i, n, x;
h:
  A[0] = 5
  x = -3
  x = -n
  x = 2 * n
  if (i != 7) h2 h2
h2:
  end
check h2: forall [i+1, 4) of A : a >= 2x - 1 && idx <= n
";
    let p = parse_program(src).unwrap();
    let c = &p.checks[0];
    assert!(c.lo.plus);
    assert_eq!(c.hi.base, Operand::Const(4));
    assert_eq!(c.predicate[0].to_string(), "a - 2x >= -1");
    assert_eq!(c.predicate[1].to_string(), "-idx + n >= 0");
    assert_eq!(parse_program(&p.to_string()).unwrap(), p);
}

fn name() -> impl Strategy<Value = usize> {
    0usize..4
}

fn operand() -> impl Strategy<Value = Operand> {
    prop_oneof![
        name().prop_map(|k| Operand::Var(Var::new(&format!("s{k}")))),
        (-5i64..6).prop_map(Operand::Const),
    ]
}

fn instr() -> impl Strategy<Value = Instr> {
    let v = || name().prop_map(|k| Var::new(&format!("s{k}")));
    let arr = || prop_oneof![Just("A".to_string()), Just("B".to_string())];
    prop_oneof![
        (v(), -9i64..9).prop_map(|(t, k)| Instr::Assign {
            target: t,
            rhs: Rhs::Const(k)
        }),
        (v(), v()).prop_map(|(t, w)| Instr::Assign {
            target: t,
            rhs: Rhs::Copy(w)
        }),
        (v(), v()).prop_map(|(t, w)| Instr::Assign {
            target: t,
            rhs: Rhs::Neg(w)
        }),
        v().prop_map(|t| Instr::Assign {
            target: t,
            rhs: Rhs::Havoc
        }),
        (v(), 0usize..3, operand(), operand()).prop_map(|(t, o, a, b)| Instr::Assign {
            target: t,
            rhs: Rhs::Bin([BinOp::Add, BinOp::Sub, BinOp::Mul][o], a, b)
        }),
        (v(), arr(), operand()).prop_map(|(t, array, index)| Instr::Read {
            target: t,
            array,
            index
        }),
        (arr(), operand(), operand()).prop_map(|(array, index, value)| Instr::Write {
            array,
            index,
            value
        }),
    ]
}

fn program() -> impl Strategy<Value = Program> {
    let cmps = [Cmp::Lt, Cmp::Le, Cmp::Eq, Cmp::Ne, Cmp::Ge, Cmp::Gt];
    prop::collection::vec(
        (
            prop::collection::vec(instr(), 0..4),
            0usize..4,
            operand(),
            0usize..6,
            operand(),
            0usize..8,
            0usize..8,
        ),
        1..5,
    )
    .prop_map(move |blocks| {
        let n = blocks.len();
        let label = |k: usize| format!("b{}", k % n);
        let blocks: Vec<Block> = blocks
            .into_iter()
            .enumerate()
            .map(|(k, (instrs, j, lhs, c, rhs, t, e))| Block {
                label: label(k),
                instrs,
                jump: match j {
                    0 => Jump::Cond {
                        lhs,
                        cmp: cmps[c],
                        rhs,
                        then_label: label(t),
                        else_label: label(e),
                    },
                    1 => Jump::Br(label(t)),
                    2 => Jump::End,
                    _ => Jump::Error,
                },
            })
            .collect();
        let scalars = (0..4).map(|k| Var::new(&format!("s{k}"))).collect();
        Program::new(vec!["A".into(), "B".into()], scalars, blocks, vec![])
    })
}

proptest! {
    #[test]
    fn pretty_print_round_trips(p in program()) {
        let text = p.to_string();
        let q = parse_program(&text).unwrap();
        prop_assert_eq!(&q, &p);
        prop_assert_eq!(q.to_string(), text);
    }
}
