//! Core-language abstract syntax.

use crate::rat::Rat;
use serde::Serialize;
use std::collections::BTreeSet;
use std::fmt;

pub type Name = String;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Span {
    pub line: u32,
    pub col: u32,
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Refinement {
    WeightTree,
    RankTree,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum PlainType {
    Bool,
    Base,
    Tree,
    Refined(Refinement),
}

impl PlainType {
    pub fn is_tree(self) -> bool {
        matches!(self, PlainType::Tree | PlainType::Refined(_))
    }

    pub fn refinement(self) -> Option<Refinement> {
        match self {
            PlainType::Refined(r) => Some(r),
            _ => None,
        }
    }
}

impl fmt::Display for PlainType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PlainType::Bool => write!(f, "Bool"),
            PlainType::Base => write!(f, "Base"),
            PlainType::Tree => write!(f, "Tree Base"),
            PlainType::Refined(Refinement::WeightTree) => write!(f, "Tree Base @weight"),
            PlainType::Refined(Refinement::RankTree) => write!(f, "Tree Base @rank"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum CmpOp {
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
            CmpOp::Eq => "=",
        }
    }

    pub fn eval(self, a: i64, b: i64) -> bool {
        match self {
            CmpOp::Lt => a < b,
            CmpOp::Le => a <= b,
            CmpOp::Gt => a > b,
            CmpOp::Ge => a >= b,
            CmpOp::Eq => a == b,
        }
    }

    pub fn negate(self) -> Option<CmpOp> {
        match self {
            CmpOp::Lt => Some(CmpOp::Ge),
            CmpOp::Le => Some(CmpOp::Gt),
            CmpOp::Gt => Some(CmpOp::Le),
            CmpOp::Ge => Some(CmpOp::Lt),
            CmpOp::Eq => None,
        }
    }

    /// The operator obtained by swapping the operands.
    pub fn flip(self) -> CmpOp {
        match self {
            CmpOp::Lt => CmpOp::Gt,
            CmpOp::Le => CmpOp::Ge,
            CmpOp::Gt => CmpOp::Lt,
            CmpOp::Ge => CmpOp::Le,
            CmpOp::Eq => CmpOp::Eq,
        }
    }
}

/// Tree measures: `#` counts nodes, `†` is the length of the right spine.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Measure {
    Weight,
    Rank,
}

impl Measure {
    pub fn builtin_name(self) -> &'static str {
        match self {
            Measure::Weight => "weight",
            Measure::Rank => "rank",
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Measure::Weight => "#",
            Measure::Rank => "†",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Cue {
    /// Derivation leaf not bound by a let: weaken with monotonicity knowledge.
    PseudoLeaf,
    /// Ticked function application: apply Shift below the Tick.
    ShiftOnTick,
    /// Const/Var leaf with variables in scope it does not use.
    WVarBeforeLeaf(Vec<Name>),
    /// Let whose binding is a function application: weaken with the full fact base.
    WeakenBeforeLet,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Pattern {
    Leaf,
    Node(Name, Name, Name),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Arm {
    pub pat: Pattern,
    pub body: Expr,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum ExprKind {
    Var(Name),
    Bool(bool),
    Leaf,
    Node(Box<Expr>, Box<Expr>, Box<Expr>),
    App(Name, Vec<Expr>),
    /// `weight e` or `rank e`; only legal as a comparison operand.
    Builtin(Measure, Box<Expr>),
    Cmp(CmpOp, Box<Expr>, Box<Expr>),
    If(Box<Expr>, Box<Expr>, Box<Expr>),
    Match(Box<Expr>, Vec<Arm>),
    Let(Name, Box<Expr>, Box<Expr>),
    Error,
    Tick(#[serde(serialize_with = "ser_rat")] Rat, Box<Expr>),
}

fn ser_rat<S: serde::Serializer>(r: &Rat, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&crate::rat::fmt_rat(r))
}

#[derive(Clone, Debug, Serialize)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ty: Option<PlainType>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub cues: Vec<Cue>,
}

/// Structural equality ignores spans, types and cues.
impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

impl Eq for Expr {}

impl Expr {
    pub fn new(kind: ExprKind, span: Span) -> Expr {
        Expr { kind, span, ty: None, cues: Vec::new() }
    }

    pub fn var(name: &str, span: Span) -> Expr {
        Expr::new(ExprKind::Var(name.to_string()), span)
    }

    pub fn as_var(&self) -> Option<&str> {
        match &self.kind {
            ExprKind::Var(v) => Some(v),
            _ => None,
        }
    }

    pub fn has_cue(&self, pred: impl Fn(&Cue) -> bool) -> bool {
        self.cues.iter().any(pred)
    }

    /// Free variables, in first-occurrence order.
    pub fn free_vars(&self) -> Vec<Name> {
        let mut out = Vec::new();
        let mut bound = Vec::new();
        self.collect_free(&mut bound, &mut out);
        out
    }

    pub fn free_var_set(&self) -> BTreeSet<Name> {
        self.free_vars().into_iter().collect()
    }

    fn collect_free(&self, bound: &mut Vec<Name>, out: &mut Vec<Name>) {
        match &self.kind {
            ExprKind::Var(v) => {
                if !bound.contains(v) && !out.contains(v) {
                    out.push(v.clone());
                }
            }
            ExprKind::Bool(_) | ExprKind::Leaf | ExprKind::Error => {}
            ExprKind::Node(a, b, c) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
                c.collect_free(bound, out);
            }
            ExprKind::App(_, args) => {
                for a in args {
                    a.collect_free(bound, out);
                }
            }
            ExprKind::Builtin(_, e) | ExprKind::Tick(_, e) => e.collect_free(bound, out),
            ExprKind::Cmp(_, a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            ExprKind::If(c, t, e) => {
                c.collect_free(bound, out);
                t.collect_free(bound, out);
                e.collect_free(bound, out);
            }
            ExprKind::Match(s, arms) => {
                s.collect_free(bound, out);
                for arm in arms {
                    let n = bound.len();
                    if let Pattern::Node(t, a, u) = &arm.pat {
                        bound.extend([t.clone(), a.clone(), u.clone()]);
                    }
                    arm.body.collect_free(bound, out);
                    bound.truncate(n);
                }
            }
            ExprKind::Let(x, e1, e2) => {
                e1.collect_free(bound, out);
                bound.push(x.clone());
                e2.collect_free(bound, out);
                bound.pop();
            }
        }
    }

    /// Visits every node in pre-order.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Expr)) {
        f(self);
        match &self.kind {
            ExprKind::Var(_) | ExprKind::Bool(_) | ExprKind::Leaf | ExprKind::Error => {}
            ExprKind::Node(a, b, c) | ExprKind::If(a, b, c) => {
                a.walk(f);
                b.walk(f);
                c.walk(f);
            }
            ExprKind::App(_, args) => args.iter().for_each(|a| a.walk(f)),
            ExprKind::Builtin(_, e) | ExprKind::Tick(_, e) => e.walk(f),
            ExprKind::Cmp(_, a, b) | ExprKind::Let(_, a, b) => {
                a.walk(f);
                b.walk(f);
            }
            ExprKind::Match(s, arms) => {
                s.walk(f);
                arms.iter().for_each(|a| a.body.walk(f));
            }
        }
    }

    pub fn count_nodes(&self) -> usize {
        let mut n = 0;
        self.walk(&mut |_| n += 1);
        n
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize)]
pub enum Mode {
    #[default]
    Default,
    WorstCase,
    Hybrid,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FunSig {
    pub args: Vec<PlainType>,
    pub ret: PlainType,
}

#[derive(Clone, Debug, Serialize)]
pub struct FunDef {
    pub name: Name,
    pub params: Vec<Name>,
    pub sig: Option<FunSig>,
    pub body: Expr,
    pub mode: Mode,
    pub num_cf_sigs: Option<usize>,
    pub span: Span,
    /// Parameter and result types once plain type inference has run.
    pub param_types: Vec<PlainType>,
    pub ret_type: Option<PlainType>,
}

impl FunDef {
    pub fn tree_params(&self) -> Vec<Name> {
        self.params
            .iter()
            .zip(&self.param_types)
            .filter(|(_, t)| t.is_tree())
            .map(|(p, _)| p.clone())
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PotentialPragma {
    pub ty: PlainType,
    pub lang: String,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Program {
    pub funs: Vec<FunDef>,
    pub potential: Option<PotentialPragma>,
}

impl Program {
    pub fn fun(&self, name: &str) -> Option<&FunDef> {
        self.funs.iter().find(|f| f.name == name)
    }
}
