//! Substituting constructor shapes and variables into template terms.
//!
//! Every rule that relates two templates exactly (Var, Const, Match, App,
//! Share) is an instance of one substitution: the image of a term is a
//! linear combination of terms over the new variables with the same value.

use super::iverson_is_constant;
use super::term::{Term, MAX_OFFSET, MIN_OFFSET};
use crate::potentials::Lang;
use crate::rat::{int, Rat};
use crate::syntax::Name;
use std::collections::BTreeMap;

/// What a variable stands for.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Form {
    Var(Name),
    Leaf,
    Node(Name, Name),
}

pub type Subst = BTreeMap<Name, Form>;

#[derive(Clone, Debug, PartialEq)]
pub enum Image {
    /// Equal to this linear combination.
    Terms(Vec<(Term, Rat)>),
    /// Identically zero.
    Zero,
    /// Not expressible in the term universe.
    Drop,
}

impl Image {
    fn one(t: Term) -> Image {
        Image::Terms(vec![(t, int(1))])
    }
}

/// Σ|vars| + k after substitution, or `None` on a repeated variable.
fn expand(vars: &[Name], s: &Subst) -> (Vec<Name>, i64) {
    let mut out = Vec::new();
    let mut k = 0;
    for v in vars {
        match s.get(v) {
            None => out.push(v.clone()),
            Some(Form::Var(y)) => out.push(y.clone()),
            Some(Form::Leaf) => k += 1,
            Some(Form::Node(t, u)) => {
                out.push(t.clone());
                out.push(u.clone());
            }
        }
    }
    out.sort();
    (out, k)
}

fn has_dup(v: &[Name]) -> bool {
    v.windows(2).any(|w| w[0] == w[1])
}

/// Normal form of [Σ|lhs| + c < Σ|rhs|] for disjoint, duplicate-free sides.
pub fn bracket(lhs: Vec<Name>, c: i64, rhs: Vec<Name>) -> Image {
    let (l, r) = (lhs.len() as i64, rhs.len() as i64);
    if rhs.is_empty() {
        return if lhs.is_empty() {
            if c < 0 {
                Image::one(Term::unit())
            } else {
                Image::Zero
            }
        } else if l + c >= 0 {
            Image::Zero
        } else {
            Image::Drop
        };
    }
    if lhs.is_empty() && c < r {
        return Image::one(Term::unit());
    }
    if c < MIN_OFFSET as i64 || c > MAX_OFFSET as i64 {
        return Image::Drop;
    }
    debug_assert!(!iverson_is_constant(&lhs, c as i8, &rhs));
    Image::one(Term::Iverson { lhs, c: c as i8, rhs })
}

pub fn image(t: &Term, s: &Subst, lang: &Lang) -> Image {
    match t {
        Term::Log { vars, c } => {
            let (vs, k) = expand(vars, s);
            let c = *c as i64 + k;
            if has_dup(&vs) || c > MAX_OFFSET as i64 {
                return Image::Drop;
            }
            if vs.is_empty() && c == 1 {
                return Image::Zero;
            }
            Image::one(Term::Log { vars: vs, c: c as i8 })
        }
        Term::Phi(x) => match s.get(x) {
            None => Image::one(t.clone()),
            Some(Form::Var(y)) => Image::one(Term::Phi(y.clone())),
            Some(Form::Leaf) => match lang {
                Lang::Sol(_) => Image::one(Term::unit()),
                _ => Image::Zero,
            },
            Some(Form::Node(a, b)) => {
                let mut out = vec![(Term::Phi(a.clone()), int(1)), (Term::Phi(b.clone()), int(1))];
                match lang {
                    Lang::Sol(p) => {
                        out.push((Term::Log { vars: vec![a.clone()], c: 0 }, p.a.clone()));
                        out.push((Term::Log { vars: vec![b.clone()], c: 0 }, p.b.clone()));
                        let mut both = vec![a.clone(), b.clone()];
                        both.sort();
                        out.push((Term::Log { vars: both, c: 0 }, p.c.clone()));
                    }
                    Lang::Pw => out.push((
                        Term::Iverson { lhs: vec![a.clone()], c: 0, rhs: vec![b.clone()] },
                        int(1),
                    )),
                    _ => {}
                }
                out.retain(|(_, k)| *k != int(0));
                Image::Terms(out)
            }
        },
        Term::Rank(x) => match s.get(x) {
            None => Image::one(t.clone()),
            Some(Form::Var(y)) => Image::one(Term::Rank(y.clone())),
            Some(Form::Leaf) => Image::Zero,
            Some(Form::Node(_, b)) => {
                Image::Terms(vec![(Term::Rank(b.clone()), int(1)), (Term::unit(), int(1))])
            }
        },
        Term::Iverson { lhs, c, rhs } => {
            let (mut l, kl) = expand(lhs, s);
            let (mut r, kr) = expand(rhs, s);
            // cancel variables that now occur on both sides
            let common: Vec<Name> = l.iter().filter(|x| r.contains(x)).cloned().collect();
            for x in common {
                if let Some(i) = l.iter().position(|y| *y == x) {
                    l.remove(i);
                }
                if let Some(i) = r.iter().position(|y| *y == x) {
                    r.remove(i);
                }
            }
            if has_dup(&l) || has_dup(&r) {
                return Image::Drop;
            }
            bracket(l, *c as i64 + kl - kr, r)
        }
    }
}

pub fn rename(pairs: &[(&str, &str)]) -> Subst {
    pairs.iter().map(|(a, b)| (a.to_string(), Form::Var(b.to_string()))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potentials::{term_value, SolParams, TreeEnv};
    use crate::rat::to_f64;
    use crate::semantics::{generate_tree, Tree, TreeKind};
    use crate::templates::{enumerate_terms, Caps, PARAM_X};
    use std::rc::Rc;

    fn check_shape(lang: &Lang, leaf: bool) {
        let vars: Vec<Name> = vec!["x".into(), "y".into()];
        let terms = enumerate_terms(lang, &vars, true, &Caps::default());
        let mut s = Subst::new();
        s.insert("x".into(), if leaf { Form::Leaf } else { Form::Node("t".into(), "u".into()) });
        for seed in 0..60u64 {
            let t = generate_tree(1 + seed % 7, TreeKind::Any, seed);
            let u = generate_tree(1 + (seed * 3) % 5, TreeKind::Any, seed + 100);
            let y = generate_tree(1 + (seed * 5) % 6, TreeKind::Any, seed + 200);
            let big = generate_tree(1 + (seed * 7) % 13, TreeKind::Any, seed + 300);
            let x = if leaf { Tree::Leaf } else { Tree::Node(Rc::new(t.clone()), 0, Rc::new(u.clone())) };
            let before: TreeEnv =
                [("x", x), ("y", y.clone()), (PARAM_X, big.clone())].into_iter().map(|(k, v)| (k.to_string(), v)).collect();
            let after: TreeEnv = [("t", t), ("u", u), ("y", y), (PARAM_X, big)]
                .into_iter()
                .map(|(k, v)| (k.to_string(), v))
                .collect();
            for term in &terms {
                let lhs = term_value(term, lang, &before).unwrap();
                match image(term, &s, lang) {
                    Image::Terms(ts) => {
                        let rhs: f64 =
                            ts.iter().map(|(t, k)| to_f64(k) * term_value(t, lang, &after).unwrap()).sum();
                        assert!((lhs - rhs).abs() < 1e-9, "{term}: {lhs} vs {rhs}");
                        assert!(ts.iter().all(|(t, _)| t.is_valid()), "{term}");
                    }
                    Image::Zero => assert_eq!(lhs, 0.0, "{term}"),
                    Image::Drop => {}
                }
            }
        }
    }

    #[test]
    fn images_preserve_values() {
        for lang in [Lang::Log, Lang::Sol(SolParams::minus_left()), Lang::Pw, Lang::Rank] {
            check_shape(&lang, true);
            check_shape(&lang, false);
        }
    }

    #[test]
    fn match_leaf_examples() {
        let mut s = Subst::new();
        s.insert("x".into(), Form::Leaf);
        let lang = Lang::Pw;
        assert_eq!(image(&Term::log(&["x"], 0), &s, &lang), Image::Zero);
        assert_eq!(image(&Term::log(&["x", "y"], 0), &s, &lang), Image::one(Term::log(&["y"], 1)));
        assert_eq!(image(&Term::log(&["x"], 2), &s, &lang), Image::Drop);
        assert_eq!(image(&Term::iverson(&["x"], -1, &["y"]), &s, &lang), Image::one(Term::unit()));
        assert_eq!(image(&Term::iverson(&[], 1, &["x", "y"]), &s, &lang), Image::one(Term::unit()));
        assert_eq!(image(&Term::iverson(&[], 2, &["x", "y"]), &s, &lang), Image::one(Term::iverson(&[], 1, &["y"])));
    }

    #[test]
    fn share_merges_and_cancels() {
        let s = rename(&[("x", "z"), ("y", "z")]);
        let lang = Lang::Pw;
        assert_eq!(image(&Term::log(&["x", "y"], 0), &s, &lang), Image::Drop);
        assert_eq!(image(&Term::iverson(&["x"], -1, &["y"]), &s, &lang), Image::one(Term::unit()));
        assert_eq!(image(&Term::iverson(&["x"], 0, &["y"]), &s, &lang), Image::Zero);
        assert_eq!(image(&Term::Phi("x".into()), &s, &lang), Image::one(Term::Phi("z".into())));
    }
}
