//! Runtime values.

use crate::syntax::{parse_expr, ExprKind, Measure};
use std::fmt;
use std::rc::Rc;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Tree {
    Leaf,
    Node(Rc<Tree>, i64, Rc<Tree>),
}

impl Tree {
    pub fn node(l: Tree, a: i64, r: Tree) -> Tree {
        Tree::Node(Rc::new(l), a, Rc::new(r))
    }

    /// Number of leaves, written |t|.
    pub fn leaves(&self) -> u64 {
        self.weight() + 1
    }

    /// Number of internal nodes, written #t.
    pub fn weight(&self) -> u64 {
        match self {
            Tree::Leaf => 0,
            Tree::Node(l, _, r) => l.weight() + r.weight() + 1,
        }
    }

    /// Length of the rightmost path, written †t.
    pub fn rank(&self) -> u64 {
        let mut t = self;
        let mut n = 0;
        while let Tree::Node(_, _, r) = t {
            n += 1;
            t = r;
        }
        n
    }

    pub fn measure(&self, m: Measure) -> u64 {
        match m {
            Measure::Weight => self.weight(),
            Measure::Rank => self.rank(),
        }
    }

    /// Calls `f` on every internal node as `(left, key, right)`.
    pub fn for_each_node(&self, f: &mut impl FnMut(&Tree, i64, &Tree)) {
        if let Tree::Node(l, a, r) = self {
            f(l, *a, r);
            l.for_each_node(f);
            r.for_each_node(f);
        }
    }

    pub fn is_weight_biased(&self) -> bool {
        let mut ok = true;
        self.for_each_node(&mut |l, _, r| ok &= l.weight() >= r.weight());
        ok
    }

    pub fn is_rank_biased(&self) -> bool {
        let mut ok = true;
        self.for_each_node(&mut |l, _, r| ok &= l.rank() >= r.rank());
        ok
    }

    pub fn is_heap_ordered(&self) -> bool {
        let mut ok = true;
        self.for_each_node(&mut |l, a, r| {
            for c in [l, r] {
                if let Tree::Node(_, b, _) = c {
                    ok &= a <= *b;
                }
            }
        });
        ok
    }

    /// Keys in in-order.
    pub fn keys(&self) -> Vec<i64> {
        let mut out = Vec::new();
        fn go(t: &Tree, out: &mut Vec<i64>) {
            if let Tree::Node(l, a, r) = t {
                go(l, out);
                out.push(*a);
                go(r, out);
            }
        }
        go(self, &mut out);
        out
    }
}

impl fmt::Display for Tree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tree::Leaf => write!(f, "leaf"),
            Tree::Node(l, a, r) => {
                write!(f, "node ")?;
                for (i, c) in [l, r].into_iter().enumerate() {
                    if matches!(**c, Tree::Leaf) {
                        write!(f, "leaf")?;
                    } else {
                        write!(f, "({c})")?;
                    }
                    if i == 0 {
                        write!(f, " {a} ")?;
                    }
                }
                Ok(())
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Value {
    Bool(bool),
    Base(i64),
    Tree(Tree),
}

impl Value {
    pub fn as_tree(&self) -> Option<&Tree> {
        match self {
            Value::Tree(t) => Some(t),
            _ => None,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Bool(b) => write!(f, "{b}"),
            Value::Base(n) => write!(f, "{n}"),
            Value::Tree(t) => write!(f, "{t}"),
        }
    }
}

/// Reads a literal value such as `node (node leaf 1 leaf) 2 leaf`, `true` or `7`.
pub fn parse_value(src: &str) -> Result<Value, String> {
    let src = src.trim();
    if let Ok(n) = src.parse::<i64>() {
        return Ok(Value::Base(n));
    }
    // Integer keys inside trees are not identifiers, so rewrite them first.
    let mut ident = String::new();
    for tok in src.replace('(', " ( ").replace(')', " ) ").split_whitespace() {
        match tok.parse::<i64>() {
            Ok(n) => ident.push_str(&format!(" k{}{} ", if n < 0 { "m" } else { "" }, n.abs())),
            Err(_) => {
                ident.push(' ');
                ident.push_str(tok);
            }
        }
    }
    let e = parse_expr(&ident).map_err(|e| e.to_string())?;
    fn conv(e: &crate::syntax::Expr) -> Result<Value, String> {
        match &e.kind {
            ExprKind::Bool(b) => Ok(Value::Bool(*b)),
            ExprKind::Leaf => Ok(Value::Tree(Tree::Leaf)),
            ExprKind::Var(k) => {
                let digits = k.strip_prefix('k').ok_or_else(|| format!("not a value: {k}"))?;
                let (neg, digits) = match digits.strip_prefix('m') {
                    Some(d) => (true, d),
                    None => (false, digits),
                };
                let n: i64 = digits.parse().map_err(|_| format!("not a value: {k}"))?;
                Ok(Value::Base(if neg { -n } else { n }))
            }
            ExprKind::Node(l, a, r) => {
                let (Value::Tree(l), Value::Base(a), Value::Tree(r)) = (conv(l)?, conv(a)?, conv(r)?)
                else {
                    return Err("ill-typed node literal".into());
                };
                Ok(Value::Tree(Tree::node(l, a, r)))
            }
            _ => Err("not a value literal".into()),
        }
    }
    conv(&e)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn perfect(d: u32) -> Tree {
        if d == 0 {
            Tree::Leaf
        } else {
            Tree::node(perfect(d - 1), 0, perfect(d - 1))
        }
    }

    #[test]
    fn measures() {
        assert_eq!((Tree::Leaf.leaves(), Tree::Leaf.weight(), Tree::Leaf.rank()), (1, 0, 0));
        let n = Tree::node(Tree::Leaf, 1, Tree::Leaf);
        assert_eq!((n.leaves(), n.weight(), n.rank()), (2, 1, 1));
        let p = perfect(3);
        assert_eq!((p.leaves(), p.weight(), p.rank()), (8, 7, 3));
    }

    #[test]
    fn literals_round_trip() {
        let t = Tree::node(Tree::node(Tree::Leaf, -1, Tree::Leaf), 2, Tree::Leaf);
        let s = t.to_string();
        assert_eq!(s, "node (node leaf -1 leaf) 2 leaf");
        assert_eq!(parse_value(&s).unwrap(), Value::Tree(t));
        assert_eq!(parse_value("true").unwrap(), Value::Bool(true));
    }
}
