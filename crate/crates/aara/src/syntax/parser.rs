//! Recursive-descent parser for the ML-style surface syntax.
//!
//! A token in column 1 always starts a new top-level item, so function
//! bodies end where the next declaration begins.

use super::ast::*;
use super::lexer::{lex, Tok, Token};
use super::SyntaxError;
use crate::rat::{self, Rat};

const KEYWORDS: &[&str] = &[
    "let", "in", "if", "then", "else", "match", "with", "leaf", "node", "true", "false", "error",
    "weight", "rank",
];

#[derive(Default)]
struct Pending {
    mode: Option<Mode>,
    num_cf_sigs: Option<usize>,
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

pub fn parse(src: &str) -> Result<Program, SyntaxError> {
    let mut p = Parser { toks: lex(src)?, pos: 0 };
    p.program()
}

/// Parses a single expression (used by tests and the CLI tree syntax).
pub fn parse_expr(src: &str) -> Result<Expr, SyntaxError> {
    let mut p = Parser { toks: lex(src)?, pos: 0 };
    let e = p.expr()?;
    p.expect_eof()?;
    Ok(e)
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn peek_at(&self, k: usize) -> &Token {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)]
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, SyntaxError> {
        Err(SyntaxError::new(self.peek().span, msg))
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(&self.peek().tok, Tok::Sym(x) if *x == s) && !self.at_item_start()
    }

    fn is_kw(&self, s: &str) -> bool {
        matches!(&self.peek().tok, Tok::Ident(x) if x == s) && !self.at_item_start()
    }

    /// Column-1 tokens (other than the first) begin a new declaration.
    fn at_item_start(&self) -> bool {
        self.pos > 0 && self.peek().span.col == 1 && self.peek().tok != Tok::Eof
    }

    fn expect_sym(&mut self, s: &str) -> Result<Token, SyntaxError> {
        if self.is_sym(s) {
            Ok(self.bump())
        } else {
            self.err(format!("expected '{s}', found {}", describe(&self.peek().tok)))
        }
    }

    fn expect_kw(&mut self, s: &str) -> Result<Token, SyntaxError> {
        if self.is_kw(s) {
            Ok(self.bump())
        } else {
            self.err(format!("expected '{s}', found {}", describe(&self.peek().tok)))
        }
    }

    fn expect_eof(&self) -> Result<(), SyntaxError> {
        match self.peek().tok {
            Tok::Eof => Ok(()),
            ref t => self.err(format!("unexpected {}", describe(t))),
        }
    }

    fn ident(&mut self) -> Result<(Name, Span), SyntaxError> {
        match &self.peek().tok {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) && !self.at_item_start() => {
                let s = s.clone();
                let span = self.bump().span;
                Ok((s, span))
            }
            t => self.err(format!("expected identifier, found {}", describe(t))),
        }
    }

    fn program(&mut self) -> Result<Program, SyntaxError> {
        let mut prog = Program::default();
        let mut pending = Pending::default();
        let mut sigs: Vec<(Name, FunSig, Span, Pending)> = Vec::new();
        loop {
            let tok = self.peek().clone();
            match &tok.tok {
                Tok::Eof => break,
                Tok::Pragma(body) => {
                    self.bump();
                    self.pragma(body, tok.span, &mut prog, &mut pending)?;
                }
                Tok::Ident(name) if !KEYWORDS.contains(&name.as_str()) => {
                    if tok.span.col != 1 {
                        return self.err("declarations must start in column 1");
                    }
                    let is_sig = matches!(&self.peek_at(1).tok, Tok::Sym("::"));
                    if is_sig {
                        self.bump();
                        self.bump();
                        let sig = self.signature()?;
                        if sigs.iter().any(|(n, ..)| n == name) {
                            return Err(SyntaxError::new(
                                tok.span,
                                format!("duplicate signature for '{name}'"),
                            ));
                        }
                        sigs.push((name.clone(), sig, tok.span, std::mem::take(&mut pending)));
                    } else {
                        let def = self.definition(&mut sigs, std::mem::take(&mut pending))?;
                        if prog.fun(&def.name).is_some() {
                            return Err(SyntaxError::new(
                                def.span,
                                format!("duplicate definition of '{}'", def.name),
                            ));
                        }
                        prog.funs.push(def);
                    }
                }
                t => return self.err(format!("unexpected {} at top level", describe(t))),
            }
        }
        if let Some((name, _, span, _)) = sigs.first() {
            return Err(SyntaxError::new(*span, format!("signature for '{name}' has no definition")));
        }
        Ok(prog)
    }

    fn pragma(
        &mut self,
        body: &str,
        span: Span,
        prog: &mut Program,
        pending: &mut Pending,
    ) -> Result<(), SyntaxError> {
        let (name, rest) = body.split_once(char::is_whitespace).unwrap_or((body, ""));
        let rest = rest.trim();
        match name {
            "POTENTIAL" => {
                let inner = rest
                    .strip_prefix('(')
                    .and_then(|r| r.strip_suffix(')'))
                    .ok_or_else(|| SyntaxError::new(span, "expected POTENTIAL (<Type>: <lang>)"))?;
                let (ty, lang) = inner
                    .split_once(':')
                    .ok_or_else(|| SyntaxError::new(span, "expected ':' in POTENTIAL pragma"))?;
                let ty = parse_type_text(ty.trim(), span)?;
                if !ty.is_tree() {
                    return Err(SyntaxError::new(span, "potentials attach to tree types only"));
                }
                let lang = lang.trim().to_string();
                if lang.is_empty() {
                    return Err(SyntaxError::new(span, "missing template language name"));
                }
                prog.potential = Some(PotentialPragma { ty, lang });
            }
            "MODE" => {
                pending.mode = Some(match rest {
                    "worst_case" => Mode::WorstCase,
                    "hybrid" => Mode::Hybrid,
                    "default" => Mode::Default,
                    _ => return Err(SyntaxError::new(span, format!("unknown mode '{rest}'"))),
                });
            }
            "NUM_CF_SIGS" => {
                let n = rest
                    .parse::<usize>()
                    .map_err(|_| SyntaxError::new(span, "NUM_CF_SIGS expects a natural number"))?;
                pending.num_cf_sigs = Some(n);
            }
            _ => return Err(SyntaxError::new(span, format!("unknown pragma '{name}'"))),
        }
        Ok(())
    }

    fn signature(&mut self) -> Result<FunSig, SyntaxError> {
        let mut parts = self.ty_product()?;
        self.expect_sym("->")?;
        let ret = self.ty_atom()?;
        if parts.len() == 1 && parts[0].is_empty() {
            parts.clear();
        }
        let args = parts.into_iter().flatten().collect();
        Ok(FunSig { args, ret })
    }

    /// `A * B * C` or `(A * B)`; returns one group per factor.
    fn ty_product(&mut self) -> Result<Vec<Vec<PlainType>>, SyntaxError> {
        let mut groups = vec![self.ty_factor()?];
        while self.is_sym("*") {
            self.bump();
            groups.push(self.ty_factor()?);
        }
        Ok(groups)
    }

    fn ty_factor(&mut self) -> Result<Vec<PlainType>, SyntaxError> {
        if self.is_sym("(") {
            self.bump();
            if self.is_sym(")") {
                self.bump();
                return Ok(Vec::new());
            }
            let inner = self.ty_product()?;
            self.expect_sym(")")?;
            Ok(inner.into_iter().flatten().collect())
        } else {
            Ok(vec![self.ty_atom()?])
        }
    }

    fn ty_atom(&mut self) -> Result<PlainType, SyntaxError> {
        let (name, span) = match &self.peek().tok {
            Tok::Ident(s) if !self.at_item_start() => {
                let s = s.clone();
                (s, self.bump().span)
            }
            t => return self.err(format!("expected a type, found {}", describe(t))),
        };
        let base = match name.as_str() {
            "Bool" => return Ok(PlainType::Bool),
            "Base" => return Ok(PlainType::Base),
            "WeightTree" => PlainType::Refined(Refinement::WeightTree),
            "RankTree" => PlainType::Refined(Refinement::RankTree),
            "Tree" => {
                match &self.peek().tok {
                    Tok::Ident(s) if s == "Base" && !self.at_item_start() => {
                        self.bump();
                    }
                    _ => return self.err("expected 'Base' after 'Tree'"),
                }
                PlainType::Tree
            }
            _ => return Err(SyntaxError::new(span, format!("unknown type '{name}'"))),
        };
        if base == PlainType::Tree && self.is_sym("@") {
            self.bump();
            let (r, rspan) = match &self.peek().tok {
                Tok::Ident(s) => {
                    let s = s.clone();
                    (s, self.bump().span)
                }
                t => return self.err(format!("expected refinement name, found {}", describe(t))),
            };
            return match r.as_str() {
                "weight" => Ok(PlainType::Refined(Refinement::WeightTree)),
                "rank" => Ok(PlainType::Refined(Refinement::RankTree)),
                _ => Err(SyntaxError::new(rspan, format!("unknown refinement '@{r}'"))),
            };
        }
        Ok(base)
    }

    fn definition(
        &mut self,
        sigs: &mut Vec<(Name, FunSig, Span, Pending)>,
        pending: Pending,
    ) -> Result<FunDef, SyntaxError> {
        let start = self.peek().span;
        let name = match self.bump().tok {
            Tok::Ident(s) => s,
            _ => unreachable!(),
        };
        let mut params = Vec::new();
        while !self.is_sym("=") {
            let (p, span) = self.ident()?;
            if params.contains(&p) {
                return Err(SyntaxError::new(span, format!("duplicate parameter '{p}'")));
            }
            params.push(p);
        }
        self.expect_sym("=")?;
        let body = self.expr()?;
        if !self.at_item_start() && self.peek().tok != Tok::Eof {
            return self.err(format!("unexpected {}", describe(&self.peek().tok)));
        }
        let (sig, mut prag) = match sigs.iter().position(|(n, ..)| *n == name) {
            Some(i) => {
                let (_, sig, _, p) = sigs.remove(i);
                (Some(sig), p)
            }
            None => (None, Pending::default()),
        };
        prag.mode = pending.mode.or(prag.mode);
        prag.num_cf_sigs = pending.num_cf_sigs.or(prag.num_cf_sigs);
        Ok(FunDef {
            name,
            params,
            sig,
            body,
            mode: prag.mode.unwrap_or_default(),
            num_cf_sigs: prag.num_cf_sigs,
            span: start,
            param_types: Vec::new(),
            ret_type: None,
        })
    }

    pub fn expr(&mut self) -> Result<Expr, SyntaxError> {
        let span = self.peek().span;
        if self.is_kw("let") {
            self.bump();
            let (x, _) = self.ident()?;
            self.expect_sym("=")?;
            let e1 = self.expr()?;
            self.expect_kw("in")?;
            let e2 = self.expr()?;
            return Ok(Expr::new(ExprKind::Let(x, Box::new(e1), Box::new(e2)), span));
        }
        if self.is_kw("if") {
            self.bump();
            let c = self.expr()?;
            self.expect_kw("then")?;
            let t = self.expr()?;
            self.expect_kw("else")?;
            let e = self.expr()?;
            return Ok(Expr::new(ExprKind::If(Box::new(c), Box::new(t), Box::new(e)), span));
        }
        if self.is_kw("match") {
            self.bump();
            let scrut = self.expr()?;
            self.expect_kw("with")?;
            let mut arms = Vec::new();
            while self.is_sym("|") {
                self.bump();
                let pat = self.pattern()?;
                self.expect_sym("->")?;
                let body = self.expr()?;
                arms.push(Arm { pat, body });
            }
            if arms.is_empty() {
                return self.err("match needs at least one arm");
            }
            return Ok(Expr::new(ExprKind::Match(Box::new(scrut), arms), span));
        }
        self.cmp()
    }

    fn pattern(&mut self) -> Result<Pattern, SyntaxError> {
        if self.is_sym("(") {
            self.bump();
            let p = self.pattern()?;
            self.expect_sym(")")?;
            return Ok(p);
        }
        if self.is_kw("leaf") {
            self.bump();
            return Ok(Pattern::Leaf);
        }
        if self.is_kw("node") {
            self.bump();
            let (t, _) = self.ident()?;
            let (a, _) = self.ident()?;
            let (u, span) = self.ident()?;
            if t == a || t == u || a == u {
                return Err(SyntaxError::new(span, "pattern variables must be distinct"));
            }
            return Ok(Pattern::Node(t, a, u));
        }
        self.err(format!("expected a pattern, found {}", describe(&self.peek().tok)))
    }

    fn cmp(&mut self) -> Result<Expr, SyntaxError> {
        let lhs = self.app()?;
        let op = match &self.peek().tok {
            Tok::Sym("<") => CmpOp::Lt,
            Tok::Sym("<=") => CmpOp::Le,
            Tok::Sym(">") => CmpOp::Gt,
            Tok::Sym(">=") => CmpOp::Ge,
            Tok::Sym("=") => CmpOp::Eq,
            _ => return Ok(lhs),
        };
        if self.at_item_start() {
            return Ok(lhs);
        }
        self.bump();
        let rhs = self.app()?;
        let span = lhs.span;
        Ok(Expr::new(ExprKind::Cmp(op, Box::new(lhs), Box::new(rhs)), span))
    }

    fn tick_amount(&mut self) -> Result<Rat, SyntaxError> {
        if !self.is_sym("[") {
            return Ok(rat::one());
        }
        self.bump();
        let span = self.peek().span;
        let mut text = String::new();
        while !self.is_sym("]") {
            match self.bump().tok {
                Tok::Number(n) => text.push_str(&n),
                Tok::Sym("/") => text.push('/'),
                Tok::Sym("-") => text.push('-'),
                t => return Err(SyntaxError::new(span, format!("bad tick amount {}", describe(&t)))),
            }
        }
        self.bump();
        let a = rat::parse_rat(&text)
            .ok_or_else(|| SyntaxError::new(span, format!("bad tick amount '{text}'")))?;
        if !rat::is_nonneg(&a) {
            return Err(SyntaxError::new(span, "tick cost must be nonnegative"));
        }
        Ok(a)
    }

    fn app(&mut self) -> Result<Expr, SyntaxError> {
        let span = self.peek().span;
        if self.is_sym("~") {
            self.bump();
            let a = self.tick_amount()?;
            let body = self.app()?;
            return Ok(Expr::new(ExprKind::Tick(a, Box::new(body)), span));
        }
        let head = self.peek().clone();
        match &head.tok {
            Tok::Ident(k) if k == "node" && !self.at_item_start() => {
                self.bump();
                let t = self.atom()?;
                let a = self.atom()?;
                let u = self.atom()?;
                Ok(Expr::new(ExprKind::Node(Box::new(t), Box::new(a), Box::new(u)), span))
            }
            Tok::Ident(k) if (k == "weight" || k == "rank") && !self.at_item_start() => {
                self.bump();
                let m = if k == "weight" { Measure::Weight } else { Measure::Rank };
                let arg = self.atom()?;
                Ok(Expr::new(ExprKind::Builtin(m, Box::new(arg)), span))
            }
            Tok::Ident(f) if !KEYWORDS.contains(&f.as_str()) && !self.at_item_start() => {
                let f = f.clone();
                self.bump();
                let mut args = Vec::new();
                while self.starts_atom() {
                    args.push(self.atom()?);
                }
                if args.is_empty() {
                    Ok(Expr::new(ExprKind::Var(f), span))
                } else {
                    Ok(Expr::new(ExprKind::App(f, args), span))
                }
            }
            _ => self.atom(),
        }
    }

    fn starts_atom(&self) -> bool {
        if self.at_item_start() {
            return false;
        }
        match &self.peek().tok {
            Tok::Ident(s) => {
                !KEYWORDS.contains(&s.as_str())
                    || matches!(s.as_str(), "leaf" | "true" | "false" | "error")
            }
            Tok::Sym("(") => true,
            _ => false,
        }
    }

    fn atom(&mut self) -> Result<Expr, SyntaxError> {
        let tok = self.peek().clone();
        if self.at_item_start() {
            return self.err("unexpected start of declaration");
        }
        let span = tok.span;
        match &tok.tok {
            Tok::Sym("(") => {
                self.bump();
                let e = self.expr()?;
                self.expect_sym(")")?;
                Ok(e)
            }
            Tok::Ident(s) => {
                let kind = match s.as_str() {
                    "leaf" => ExprKind::Leaf,
                    "true" => ExprKind::Bool(true),
                    "false" => ExprKind::Bool(false),
                    "error" => ExprKind::Error,
                    _ if KEYWORDS.contains(&s.as_str()) => {
                        return self.err(format!("unexpected keyword '{s}'"))
                    }
                    _ => ExprKind::Var(s.clone()),
                };
                self.bump();
                Ok(Expr::new(kind, span))
            }
            t => self.err(format!("expected an expression, found {}", describe(t))),
        }
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(s) => format!("'{s}'"),
        Tok::Number(n) => format!("number {n}"),
        Tok::Pragma(_) => "pragma".into(),
        Tok::Sym(s) => format!("'{s}'"),
        Tok::Eof => "end of input".into(),
    }
}

/// Parses a type written inside a pragma, e.g. `Tree Base @weight`.
pub fn parse_type_text(text: &str, span: Span) -> Result<PlainType, SyntaxError> {
    let mut p = Parser { toks: lex(text).map_err(|e| SyntaxError::new(span, e.msg))?, pos: 0 };
    let t = p.ty_atom().map_err(|e| SyntaxError::new(span, e.msg))?;
    p.expect_eof().map_err(|e| SyntaxError::new(span, e.msg))?;
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SWAP: &str = "swap :: Tree Base -> Tree Base
swap x = match x with
  | leaf       -> leaf
  | node t a u -> let u' = ~ swap u in node u' a t
";

    #[test]
    fn parses_swap() {
        let p = parse(SWAP).unwrap();
        assert_eq!(p.funs.len(), 1);
        let f = &p.funs[0];
        assert_eq!(f.params, vec!["x"]);
        let ExprKind::Match(_, arms) = &f.body.kind else { panic!("expected match") };
        assert_eq!(arms.len(), 2);
        let ExprKind::Let(x, e1, _) = &arms[1].body.kind else { panic!("expected let") };
        assert_eq!(x, "u'");
        let ExprKind::Tick(a, inner) = &e1.kind else { panic!("expected tick") };
        assert_eq!(*a, rat::one());
        assert!(matches!(&inner.kind, ExprKind::App(f, _) if f == "swap"));
    }

    #[test]
    fn parses_identity() {
        let p = parse("f x = x").unwrap();
        assert_eq!(p.funs[0].body.kind, ExprKind::Var("x".into()));
    }

    #[test]
    fn layout_ends_bodies() {
        let p = parse("f x = g x\ng y = y\n").unwrap();
        assert_eq!(p.funs.len(), 2);
        assert!(matches!(&p.funs[0].body.kind, ExprKind::App(g, args) if g == "g" && args.len() == 1));
    }

    #[test]
    fn reads_pragmas() {
        let src = "{-# POTENTIAL (Tree Base: logr) #-}\n{-# MODE worst_case #-}\n{-# NUM_CF_SIGS 2 #-}\nf x = x\ng x = x\n";
        let p = parse(src).unwrap();
        assert_eq!(p.potential.as_ref().unwrap().lang, "logr");
        assert_eq!(p.funs[0].mode, Mode::WorstCase);
        assert_eq!(p.funs[0].num_cf_sigs, Some(2));
        assert_eq!(p.funs[1].mode, Mode::Default);
    }

    #[test]
    fn rational_ticks() {
        let e = parse_expr("~[3/2] f x").unwrap();
        let ExprKind::Tick(a, _) = e.kind else { panic!() };
        assert_eq!(a, rat::rat(3, 2));
    }

    #[test]
    fn errors_carry_positions() {
        let err = parse("f x = let in x").unwrap_err();
        assert_eq!((err.span.line, err.span.col), (1, 11));
        let err = parse("{-# FOO #-}\nf x = x").unwrap_err();
        assert!(err.msg.contains("unknown pragma"));
        let err = parse("f x = x\nf y = y").unwrap_err();
        assert!(err.msg.contains("duplicate definition"));
    }

    #[test]
    fn refined_signatures() {
        let p = parse("bal :: (Tree Base @weight * Base * Tree Base @weight) -> Tree Base @weight\nbal t a u = node t a u").unwrap();
        let sig = p.funs[0].sig.as_ref().unwrap();
        assert_eq!(sig.args.len(), 3);
        assert_eq!(sig.args[0], PlainType::Refined(Refinement::WeightTree));
        assert_eq!(sig.args[1], PlainType::Base);
    }
}
