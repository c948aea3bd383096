//! Derivation trees.

use crate::constraints::Model;
use crate::syntax::{Expr, Name, Span};
use crate::templates::{Instance, Template};
use crate::weakening::GuardSet;
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Rule {
    Var,
    ConstLeaf,
    ConstNode,
    Pure,
    Error,
    Match,
    Ite,
    Let,
    App,
    Tick,
    Shift,
    W,
    WVar,
    Share,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Rule::Var => "Var",
            Rule::ConstLeaf => "Const(leaf)",
            Rule::ConstNode => "Const(node)",
            Rule::Pure => "Pure",
            Rule::Error => "Error",
            Rule::Match => "Match",
            Rule::Ite => "Ite",
            Rule::Let => "Let",
            Rule::App => "App",
            Rule::Tick => "Tick",
            Rule::Shift => "Shift",
            Rule::W => "W",
            Rule::WVar => "WVar",
            Rule::Share => "Share",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug)]
pub struct DerivationNode {
    pub id: usize,
    pub rule: Rule,
    pub span: Span,
    /// The expression, printed.
    pub expr: String,
    pub source: Expr,
    pub ctx: Vec<Name>,
    pub guards: GuardSet,
    pub q: Template,
    pub q_res: Template,
    pub children: Vec<usize>,
    /// Index into the certificate list for W nodes.
    pub cert: Option<usize>,
    /// Rule-specific note (chosen signatures, lifted keys, ...).
    pub detail: String,
    pub cost_free: bool,
}

impl DerivationNode {
    pub fn input(&self, m: &Model) -> Instance {
        self.q.instantiate(m)
    }

    pub fn output(&self, m: &Model) -> Instance {
        self.q_res.instantiate(m)
    }
}

/// All nodes of one analysis, addressed by id.
#[derive(Clone, Debug, Default)]
pub struct Forest {
    pub nodes: Vec<DerivationNode>,
}

impl Forest {
    pub fn get(&self, id: usize) -> &DerivationNode {
        &self.nodes[id]
    }

    /// Rule names in pre-order below `root`.
    pub fn rules_below(&self, root: usize) -> Vec<Rule> {
        let mut out = Vec::new();
        let mut stack = vec![root];
        while let Some(n) = stack.pop() {
            let node = &self.nodes[n];
            out.push(node.rule);
            stack.extend(node.children.iter().rev());
        }
        out
    }

    /// Indented outline, one node per line.
    pub fn outline(&self, root: usize) -> String {
        let mut out = String::new();
        self.outline_into(root, 0, &mut out);
        out
    }

    fn outline_into(&self, n: usize, depth: usize, out: &mut String) {
        let node = &self.nodes[n];
        out.push_str(&"  ".repeat(depth));
        out.push_str(&format!("{} [{}] {}", node.rule, node.ctx.join(","), node.expr));
        if !node.detail.is_empty() {
            out.push_str(&format!("  ({})", node.detail));
        }
        out.push('\n');
        for c in &node.children {
            self.outline_into(*c, depth + 1, out);
        }
    }
}
