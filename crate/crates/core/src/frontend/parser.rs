use std::collections::BTreeMap;

use num_bigint::BigInt;

use super::lexer::{tokenize, Tok};
use super::{Block, BoundExpr, CheckDirective, Cmp, Instr, Jump, Loc, ParseError, Program};
use crate::scalar::{BinOp, LinCons, Operand, Rel, Rhs};
use crate::var::{segment_var, Var, IDX};

const KEYWORDS: &[&str] = &["array", "var", "check", "forall", "of", "if", "br", "end", "error"];

/// Parses and validates a program.
pub fn parse_program(src: &str) -> Result<Program, ParseError> {
    let toks = tokenize(src)?;
    let mut p = Parser {
        toks,
        pos: 0,
        arrays: Vec::new(),
        scalars: Vec::new(),
        names: BTreeMap::new(),
        free: false,
    };
    p.program()
}

/// Parses one linear constraint such as `x + 2y >= 3` over free variable
/// names.
pub fn parse_constraint(src: &str) -> Result<LinCons, ParseError> {
    let toks = tokenize(src)?;
    let mut p = Parser {
        toks,
        pos: 0,
        arrays: Vec::new(),
        scalars: Vec::new(),
        names: BTreeMap::new(),
        free: true,
    };
    while *p.peek() == Tok::Newline {
        p.bump();
    }
    let c = p.conjunct()?;
    while *p.peek() == Tok::Newline {
        p.bump();
    }
    if *p.peek() != Tok::Eof {
        return p.unexpected("end of input");
    }
    Ok(c)
}

struct Parser {
    toks: Vec<(Tok, Loc)>,
    pos: usize,
    arrays: Vec<String>,
    scalars: Vec<Var>,
    /// every declared name (and derived segment name) with what it is
    names: BTreeMap<String, String>,
    /// accept any identifier in predicates
    free: bool,
}

type PResult<T> = Result<T, ParseError>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let n = (self.pos + k).min(self.toks.len() - 1);
        &self.toks[n].0
    }

    fn loc(&self) -> Loc {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> (Tok, Loc) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn syntax<T>(&self, msg: impl Into<String>) -> PResult<T> {
        Err(ParseError::Syntax {
            loc: self.loc(),
            msg: msg.into(),
        })
    }

    fn unexpected<T>(&self, wanted: &str) -> PResult<T> {
        self.syntax(format!("expected {wanted}, found {}", self.peek().describe()))
    }

    fn expect(&mut self, t: Tok) -> PResult<Loc> {
        if *self.peek() == t {
            Ok(self.bump().1)
        } else {
            let w = t.describe();
            self.unexpected(&w)
        }
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn skip_newlines(&mut self) {
        while *self.peek() == Tok::Newline {
            self.bump();
        }
    }

    fn end_of_line(&mut self) -> PResult<()> {
        match self.peek() {
            Tok::Newline => {
                self.bump();
                Ok(())
            }
            Tok::Eof => Ok(()),
            _ => self.unexpected("end of line"),
        }
    }

    fn ident(&mut self) -> PResult<(String, Loc)> {
        match self.peek().clone() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                let l = self.bump().1;
                Ok((s, l))
            }
            _ => self.unexpected("identifier"),
        }
    }

    fn int(&mut self) -> PResult<i64> {
        let neg = if *self.peek() == Tok::Minus {
            self.bump();
            true
        } else {
            false
        };
        match *self.peek() {
            Tok::Int(k) => {
                self.bump();
                Ok(if neg { -k } else { k })
            }
            _ => self.unexpected("integer"),
        }
    }

    fn declare(&mut self, name: &str, what: &str, loc: Loc) -> PResult<()> {
        if let Some(prev) = self.names.get(name) {
            return Err(ParseError::NameClash {
                loc,
                name: name.to_string(),
                with: prev.clone(),
            });
        }
        self.names.insert(name.to_string(), what.to_string());
        Ok(())
    }

    fn program(&mut self) -> PResult<Program> {
        self.names.insert(IDX.into(), "the index variable".into());
        self.skip_newlines();
        while self.is_kw("array") || self.is_kw("var") {
            let is_array = self.is_kw("array");
            self.bump();
            loop {
                let (name, loc) = self.ident()?;
                if is_array {
                    self.declare(&name, &format!("array `{name}`"), loc)?;
                    let seg = segment_var(&name).name().to_string();
                    if seg != name {
                        self.declare(&seg, &format!("the segment variable of `{name}`"), loc)?;
                    }
                    self.arrays.push(name);
                } else {
                    self.declare(&name, &format!("scalar `{name}`"), loc)?;
                    self.scalars.push(Var::new(&name));
                }
                if *self.peek() != Tok::Comma {
                    break;
                }
                self.bump();
            }
            if *self.peek() == Tok::Semi {
                self.bump();
            }
            self.end_of_line()?;
            self.skip_newlines();
        }

        let mut blocks: Vec<Block> = Vec::new();
        let mut label_locs: BTreeMap<String, Loc> = BTreeMap::new();
        let mut refs: Vec<(String, Loc)> = Vec::new();
        let mut checks = Vec::new();
        loop {
            self.skip_newlines();
            if *self.peek() == Tok::Eof {
                break;
            }
            if self.is_kw("check") {
                let (c, loc) = self.check()?;
                refs.push((c.label.clone(), loc));
                checks.push(c);
                continue;
            }
            let (label, loc) = self.ident()?;
            self.expect(Tok::Colon)?;
            if label_locs.insert(label.clone(), loc).is_some() {
                return Err(ParseError::DuplicateLabel { loc, label });
            }
            let block = self.block(label, &mut refs)?;
            blocks.push(block);
        }
        if blocks.is_empty() {
            return Err(ParseError::EmptyProgram { loc: self.loc() });
        }
        for (label, loc) in refs {
            if !label_locs.contains_key(&label) {
                return Err(ParseError::UnknownLabel { loc, label });
            }
        }
        Ok(Program::new(
            std::mem::take(&mut self.arrays),
            std::mem::take(&mut self.scalars),
            blocks,
            checks,
        ))
    }

    fn block(&mut self, label: String, refs: &mut Vec<(String, Loc)>) -> PResult<Block> {
        let mut instrs = Vec::new();
        loop {
            self.skip_newlines();
            let word = match self.peek() {
                Tok::Ident(s) => s.clone(),
                Tok::Eof => return self.syntax(format!("block `{label}` has no terminating jump")),
                _ => return self.unexpected("statement"),
            };
            let jump = match word.as_str() {
                "if" => {
                    self.bump();
                    self.expect(Tok::LParen)?;
                    let lhs = self.operand()?;
                    let cmp = self.cmp()?;
                    let rhs = self.operand()?;
                    self.expect(Tok::RParen)?;
                    let (t, tl) = self.ident()?;
                    let (e, el) = self.ident()?;
                    refs.push((t.clone(), tl));
                    refs.push((e.clone(), el));
                    Some(Jump::Cond {
                        lhs,
                        cmp,
                        rhs,
                        then_label: t,
                        else_label: e,
                    })
                }
                "br" => {
                    self.bump();
                    let (t, tl) = self.ident()?;
                    refs.push((t.clone(), tl));
                    Some(Jump::Br(t))
                }
                "end" => {
                    self.bump();
                    Some(Jump::End)
                }
                "error" => {
                    self.bump();
                    Some(Jump::Error)
                }
                "check" => return self.syntax(format!("block `{label}` has no terminating jump")),
                _ if *self.peek_at(1) == Tok::Colon => {
                    return self.syntax(format!("block `{label}` has no terminating jump"))
                }
                _ => {
                    instrs.push(self.instr()?);
                    None
                }
            };
            self.end_of_line()?;
            if let Some(jump) = jump {
                return Ok(Block {
                    label,
                    instrs,
                    jump,
                });
            }
        }
    }

    fn scalar(&mut self) -> PResult<Var> {
        let (name, loc) = self.ident()?;
        if self.scalars.iter().any(|v| v.name() == name) {
            Ok(Var::new(&name))
        } else {
            Err(ParseError::Undeclared { loc, name })
        }
    }

    fn array(&mut self) -> PResult<String> {
        let (name, loc) = self.ident()?;
        if self.arrays.contains(&name) {
            Ok(name)
        } else {
            Err(ParseError::Undeclared { loc, name })
        }
    }

    fn operand(&mut self) -> PResult<Operand> {
        match self.peek() {
            Tok::Int(_) | Tok::Minus => Ok(Operand::Const(self.int()?)),
            _ => Ok(Operand::Var(self.scalar()?)),
        }
    }

    fn cmp(&mut self) -> PResult<Cmp> {
        let c = match self.peek() {
            Tok::Lt => Cmp::Lt,
            Tok::Le => Cmp::Le,
            Tok::Assign | Tok::EqEq => Cmp::Eq,
            Tok::Ne => Cmp::Ne,
            Tok::Ge => Cmp::Ge,
            Tok::Gt => Cmp::Gt,
            _ => return self.unexpected("comparison"),
        };
        self.bump();
        Ok(c)
    }

    fn binop(&self) -> Option<BinOp> {
        match self.peek() {
            Tok::Plus => Some(BinOp::Add),
            Tok::Minus => Some(BinOp::Sub),
            Tok::Star => Some(BinOp::Mul),
            _ => None,
        }
    }

    fn instr(&mut self) -> PResult<Instr> {
        if *self.peek_at(1) == Tok::LBracket {
            let array = self.array()?;
            self.bump();
            let index = self.operand()?;
            self.expect(Tok::RBracket)?;
            self.expect(Tok::Assign)?;
            let value = self.operand()?;
            return Ok(Instr::Write {
                array,
                index,
                value,
            });
        }
        let target = self.scalar()?;
        self.expect(Tok::Assign)?;
        if *self.peek() == Tok::Question {
            self.bump();
            return Ok(Instr::Assign {
                target,
                rhs: Rhs::Havoc,
            });
        }
        if matches!(self.peek(), Tok::Ident(_)) && *self.peek_at(1) == Tok::LBracket {
            let array = self.array()?;
            self.bump();
            let index = self.operand()?;
            self.expect(Tok::RBracket)?;
            return Ok(Instr::Read {
                target,
                array,
                index,
            });
        }
        if *self.peek() == Tok::Minus && matches!(self.peek_at(1), Tok::Ident(_)) {
            self.bump();
            let w = self.scalar()?;
            return Ok(Instr::Assign {
                target,
                rhs: Rhs::Neg(w),
            });
        }
        let a = self.operand()?;
        let rhs = match self.binop() {
            Some(op) => {
                self.bump();
                let b = self.operand()?;
                Rhs::Bin(op, a, b)
            }
            None => match a {
                Operand::Var(w) => Rhs::Copy(w),
                Operand::Const(k) => Rhs::Const(k),
            },
        };
        Ok(Instr::Assign { target, rhs })
    }

    fn bound(&mut self) -> PResult<BoundExpr> {
        let base = self.operand()?;
        let plus = if *self.peek() == Tok::Plus {
            self.bump();
            if self.int()? != 1 {
                return self.syntax("only `+1` offsets are allowed in segment bounds");
            }
            true
        } else {
            false
        };
        Ok(BoundExpr { base, plus })
    }

    fn check(&mut self) -> PResult<(CheckDirective, Loc)> {
        self.bump();
        let (label, loc) = self.ident()?;
        self.expect(Tok::Colon)?;
        if !self.is_kw("forall") {
            return self.unexpected("`forall`");
        }
        self.bump();
        self.expect(Tok::LBracket)?;
        let lo = self.bound()?;
        self.expect(Tok::Comma)?;
        let hi = self.bound()?;
        self.expect(Tok::RParen)?;
        if !self.is_kw("of") {
            return self.unexpected("`of`");
        }
        self.bump();
        let mut arrays = vec![self.array()?];
        while *self.peek() == Tok::Comma {
            self.bump();
            arrays.push(self.array()?);
        }
        self.expect(Tok::Colon)?;
        let mut predicate = vec![self.conjunct()?];
        while *self.peek() == Tok::AndAnd {
            self.bump();
            predicate.push(self.conjunct()?);
        }
        self.end_of_line()?;
        Ok((
            CheckDirective {
                label,
                lo,
                hi,
                arrays,
                predicate,
            },
            loc,
        ))
    }

    /// Variables allowed in check predicates.
    fn pred_var(&mut self) -> PResult<Var> {
        let (name, loc) = self.ident()?;
        let ok = self.free
            || name == IDX
            || self.scalars.iter().any(|v| v.name() == name)
            || self.arrays.iter().any(|a| segment_var(a).name() == name);
        if ok {
            Ok(Var::new(&name))
        } else {
            Err(ParseError::Undeclared { loc, name })
        }
    }

    /// `Σ k·x + c`, returned as (terms, constant).
    fn linexpr(&mut self) -> PResult<(Vec<(Var, BigInt)>, BigInt)> {
        let mut terms = Vec::new();
        let mut constant = BigInt::from(0);
        let mut sign = 1i64;
        if *self.peek() == Tok::Minus {
            self.bump();
            sign = -1;
        }
        loop {
            match self.peek().clone() {
                Tok::Int(k) => {
                    self.bump();
                    let has_var = match self.peek() {
                        Tok::Star => {
                            self.bump();
                            true
                        }
                        Tok::Ident(_) => true,
                        _ => false,
                    };
                    if has_var {
                        let v = self.pred_var()?;
                        terms.push((v, BigInt::from(sign) * k));
                    } else {
                        constant += BigInt::from(sign) * k;
                    }
                }
                Tok::Ident(_) => {
                    let v = self.pred_var()?;
                    terms.push((v, BigInt::from(sign)));
                }
                _ => return self.unexpected("term"),
            }
            sign = match self.peek() {
                Tok::Plus => 1,
                Tok::Minus => -1,
                _ => break,
            };
            self.bump();
        }
        Ok((terms, constant))
    }

    fn conjunct(&mut self) -> PResult<LinCons> {
        let loc = self.loc();
        let (lt, lc) = self.linexpr()?;
        let cmp = self.cmp()?;
        let (rt, rc) = self.linexpr()?;
        // orient so that the relation reads `expr rel bound`
        let (pos, neg, pc, nc, rel) = match cmp {
            Cmp::Ge => (lt, rt, lc, rc, Rel::Ge),
            Cmp::Gt => (lt, rt, lc, rc, Rel::Gt),
            Cmp::Eq => (lt, rt, lc, rc, Rel::Eq),
            Cmp::Le => (rt, lt, rc, lc, Rel::Ge),
            Cmp::Lt => (rt, lt, rc, lc, Rel::Gt),
            Cmp::Ne => {
                return Err(ParseError::Syntax {
                    loc,
                    msg: "`!=` is not allowed in check predicates".into(),
                })
            }
        };
        let terms = pos
            .into_iter()
            .chain(neg.into_iter().map(|(v, k)| (v, -k)));
        LinCons::new(terms, rel, nc - pc).map_err(|_| ParseError::Syntax {
            loc,
            msg: "predicate mentions no variable".into(),
        })
    }
}
