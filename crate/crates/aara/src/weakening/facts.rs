//! Instantiated expert knowledge: linear inequalities between term values.

use super::guards::GuardSet;
use crate::potentials::lemmas::{l3_side_condition, L4_A, L4_B};
use crate::potentials::Lang;
use crate::rat::{fmt_rat, int, one, rat, to_f64, zero, Rat};
use crate::syntax::{CmpOp, Measure, Name};
use crate::templates::subst::{bracket, Image};
use crate::templates::{log_terms, Term};
use num_traits::Zero;
use std::collections::BTreeMap;
use std::fmt;

/// Σ coeffs·term ≤ bound.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FactRow {
    pub lemma: String,
    pub coeffs: Vec<(Term, Rat)>,
    pub bound: Rat,
}

impl fmt::Display for FactRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (t, k) in &self.coeffs {
            let neg = k < &zero();
            let mag = if neg { -k.clone() } else { k.clone() };
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, "{}", if neg { " - " } else { " + " })?;
            }
            if mag != one() {
                write!(f, "{}·", fmt_rat(&mag))?;
            }
            write!(f, "{t}")?;
            first = false;
        }
        write!(f, " <= {}   ({})", fmt_rat(&self.bound), self.lemma)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FactBase {
    pub rows: Vec<FactRow>,
}

impl FactBase {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// Which lemmas to instantiate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Knowledge {
    pub monotone: bool,
    pub l1: bool,
    pub l2: bool,
    pub cor1: bool,
    /// (a, b) pairs of the L3 schema; L4 is the pair (105/163, 3115/7824).
    pub l3: Vec<(Rat, Rat)>,
    /// rank ≤ log, valid for rank-biased trees only.
    pub rank_log: bool,
    pub rank_mono: bool,
    /// Offsets c allowed in the arguments x = Σ|S| + c of lemma instances.
    pub offsets: Vec<i8>,
}

impl Knowledge {
    pub fn none() -> Knowledge {
        Knowledge {
            monotone: false,
            l1: false,
            l2: false,
            cor1: false,
            l3: Vec::new(),
            rank_log: false,
            rank_mono: false,
            offsets: vec![-1, 0],
        }
    }

    pub fn defaults(lang: &Lang) -> Knowledge {
        let base = Knowledge { monotone: true, ..Knowledge::none() };
        match lang {
            Lang::Log => Knowledge { l1: true, cor1: true, ..base },
            Lang::Sol(_) => Knowledge { l1: true, cor1: true, l3: vec![l4_pair()], ..base },
            Lang::Pw => Knowledge { l1: true, l2: true, ..base },
            Lang::Rank => Knowledge { l1: true, rank_log: true, rank_mono: true, ..base },
        }
    }

    /// Rejects L3 pairs outside the lemma's side condition.
    pub fn validate(&self) -> Result<(), String> {
        for (a, b) in &self.l3 {
            if !l3_side_condition(to_f64(a), to_f64(b)) {
                return Err(format!("L3 pair ({}, {}) violates (a+b)^(a+b)/(a^a b^b) >= 2", fmt_rat(a), fmt_rat(b)));
            }
        }
        Ok(())
    }
}

pub fn l4_pair() -> (Rat, Rat) {
    (rat(105, 163), rat(3115, 7824))
}

#[allow(dead_code)]
fn l4_consistent() -> bool {
    (to_f64(&l4_pair().0) - L4_A).abs() < 1e-15 && (to_f64(&l4_pair().1) - L4_B).abs() < 1e-15
}

/// Linear size form Σ|vars| + c.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SizeForm {
    pub vars: Vec<Name>,
    pub c: i64,
}

/// Size guards as rows g with g·x ≤ 0 over the given variables.
fn size_rows(guards: &GuardSet, vars: &[Name]) -> Vec<BTreeMap<Name, i64>> {
    let mut rows = Vec::new();
    for g in guards.within(vars).iter() {
        if g.measure != Measure::Weight {
            continue;
        }
        let row = |a: &Name, b: &Name| -> BTreeMap<Name, i64> { [(a.clone(), 1), (b.clone(), -1)].into_iter().collect() };
        match g.op {
            CmpOp::Lt | CmpOp::Le => rows.push(row(&g.lhs, &g.rhs)),
            CmpOp::Gt | CmpOp::Ge => rows.push(row(&g.rhs, &g.lhs)),
            CmpOp::Eq => {
                rows.push(row(&g.lhs, &g.rhs));
                rows.push(row(&g.rhs, &g.lhs));
            }
        }
    }
    rows
}

/// Whether Σ|a| + c ≤ Σ|b| + d for all sizes ≥ 1 satisfying the guards,
/// certified with the dual vector restricted to v = 1λ, λ ∈ {0, 1}.
pub fn size_le(a: &SizeForm, b: &SizeForm, guards: &GuardSet, vars: &[Name]) -> bool {
    let mut p: BTreeMap<&Name, i64> = BTreeMap::new();
    for v in &a.vars {
        *p.entry(v).or_default() += 1;
    }
    for v in &b.vars {
        *p.entry(v).or_default() -= 1;
    }
    let beta = b.c - a.c;
    let p_sum: i64 = p.values().sum();
    // λ = 0
    if p.values().all(|&k| k <= 0) && p_sum <= beta {
        return true;
    }
    // λ = 1
    let rows = size_rows(guards, vars);
    if rows.is_empty() {
        return false;
    }
    let mut col: BTreeMap<&Name, i64> = BTreeMap::new();
    let mut total = 0;
    for r in &rows {
        for (v, k) in r {
            *col.entry(v).or_default() += k;
            total += k;
        }
    }
    let ok_cols = p.iter().all(|(v, k)| col.get(v).copied().unwrap_or(0) >= *k)
        && col.iter().all(|(v, k)| p.contains_key(v) || *k >= 0);
    ok_cols && p_sum - total <= beta
}

fn log_form(t: &Term) -> Option<SizeForm> {
    match t {
        Term::Log { vars, c } => Some(SizeForm { vars: vars.clone(), c: *c as i64 }),
        _ => None,
    }
}

fn row(lemma: &str, coeffs: Vec<(Term, Rat)>, bound: Rat) -> FactRow {
    // merge duplicate terms and fold the unit constant into the bound
    let mut m: BTreeMap<Term, Rat> = BTreeMap::new();
    let mut bound = bound;
    for (t, k) in coeffs {
        if t.is_unit() {
            bound -= k;
        } else if !t.is_zero_valued() {
            *m.entry(t).or_insert_with(zero) += k;
        }
    }
    let coeffs = m.into_iter().filter(|(_, k)| !k.is_zero()).collect();
    FactRow { lemma: lemma.to_string(), coeffs, bound }
}

/// Monotonicity facts log(a) ≤ log(b), reduced to covering pairs.
fn monotone_rows(terms: &[Term], guards: &GuardSet, vars: &[Name]) -> Vec<FactRow> {
    let logs: Vec<(&Term, SizeForm)> = terms
        .iter()
        .filter(|t| !t.is_zero_valued())
        .filter_map(|t| log_form(t).map(|f| (t, f)))
        .collect();
    let n = logs.len();
    let le: Vec<Vec<bool>> = (0..n)
        .map(|i| (0..n).map(|j| i != j && size_le(&logs[i].1, &logs[j].1, guards, vars)).collect())
        .collect();
    let mut out = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if !le[i][j] || le[j][i] && i > j {
                continue;
            }
            let between = (0..n).any(|k| k != i && k != j && le[i][k] && le[k][j] && !le[k][i] && !le[j][k]);
            if between {
                continue;
            }
            if logs[i].0.is_unit() && logs[j].0.is_unit() {
                continue;
            }
            out.push(row("mono", vec![(logs[i].0.clone(), one()), (logs[j].0.clone(), -one())], zero()));
        }
    }
    out
}

/// Ordered pairs of argument terms (x, y) for two-argument lemmas, with the
/// term for x + y.
fn lemma_args(vars: &[Name], offsets: &[i8], universe: &[Term]) -> Vec<(Term, Term, Term)> {
    let mut out = Vec::new();
    let subsets: Vec<Term> = log_terms(vars)
        .into_iter()
        .filter(|t| matches!(t, Term::Log { vars, c } if !vars.is_empty() && offsets.contains(c)))
        .collect();
    for x in &subsets {
        for y in &subsets {
            let (Term::Log { vars: sx, c: cx }, Term::Log { vars: sy, c: cy }) = (x, y) else { continue };
            if sx.iter().any(|v| sy.contains(v)) {
                continue;
            }
            let mut s: Vec<Name> = sx.iter().chain(sy).cloned().collect();
            s.sort();
            let xy = Term::Log { vars: s, c: cx + cy };
            if xy.is_valid() && universe.contains(&xy) {
                out.push((x.clone(), y.clone(), xy));
            }
        }
    }
    out
}

fn iverson(lhs: &Term, rhs: &Term, shift: i64) -> Option<(Option<Term>, Rat)> {
    // [lhs + shift < rhs] with both sides log arguments
    let (Term::Log { vars: l, c: cl }, Term::Log { vars: r, c: cr }) = (lhs, rhs) else { return None };
    match bracket(l.clone(), *cl as i64 - *cr as i64 + shift, r.clone()) {
        Image::Terms(ts) => {
            let (t, k) = ts.into_iter().next()?;
            if t.is_unit() {
                Some((None, k))
            } else {
                Some((Some(t), k))
            }
        }
        Image::Zero => Some((None, zero())),
        Image::Drop => None,
    }
}

/// Builds the fact base for a context of tree variables.
pub fn build_facts(lang: &Lang, vars: &[Name], guards: &GuardSet, k: &Knowledge, universe: &[Term]) -> FactBase {
    let mut rows = Vec::new();
    let mut vars = vars.to_vec();
    vars.sort();
    if k.monotone {
        rows.extend(monotone_rows(universe, guards, &vars));
    }
    let args = lemma_args(&vars, &k.offsets, universe);
    for (x, y, xy) in &args {
        let symmetric_first = x < y;
        if k.l1 && symmetric_first {
            rows.push(row("L1", vec![(x.clone(), rat(1, 2)), (y.clone(), rat(1, 2)), (xy.clone(), -one())], int(-1)));
        }
        for (a, b) in &k.l3 {
            rows.push(row(
                &format!("L3({},{})", fmt_rat(a), fmt_rat(b)),
                vec![(x.clone(), a.clone()), (y.clone(), b.clone()), (xy.clone(), -(a + b))],
                int(-1),
            ));
        }
        if k.l2 && matches!(lang, Lang::Pw) {
            // log(x+y) ≥ log y + [x ≥ y], i.e. [y − 1 < x]
            if let Some((t, c)) = iverson(y, x, -1) {
                let mut cs = vec![(y.clone(), one()), (xy.clone(), -one())];
                let mut bound = zero();
                match t {
                    Some(t) => cs.push((t, c)),
                    None => bound -= c,
                }
                rows.push(row("L2", cs, bound));
            }
            // log(x+y) + [x < y] ≥ log y + 1
            if let Some((t, c)) = iverson(x, y, 0) {
                let mut cs = vec![(y.clone(), one()), (xy.clone(), -one())];
                let mut bound = int(-1);
                match t {
                    Some(t) => cs.push((t, -c)),
                    None => bound += c,
                }
                rows.push(row("L2(i)", cs, bound));
            }
            // log(x+y) ≥ log y + [x > y], i.e. [y < x]
            if let Some((t, c)) = iverson(y, x, 0) {
                let mut cs = vec![(y.clone(), one()), (xy.clone(), -one())];
                let mut bound = zero();
                match t {
                    Some(t) => cs.push((t, c)),
                    None => bound -= c,
                }
                rows.push(row("L2(ii)", cs, bound));
            }
        }
        if k.cor1 {
            let (fx, fy) = (log_form(x).unwrap(), log_form(y).unwrap());
            if size_le(&fy, &fx, guards, &vars) {
                rows.push(row("Cor1", vec![(y.clone(), one()), (xy.clone(), -one())], int(-1)));
            }
        }
    }
    if k.rank_log {
        for v in &vars {
            let t = Term::Log { vars: vec![v.clone()], c: 0 };
            rows.push(row("RankLog", vec![(Term::Rank(v.clone()), one()), (t, -one())], zero()));
        }
    }
    if k.rank_mono {
        for g in guards.within(&vars).iter() {
            if g.measure != Measure::Rank {
                continue;
            }
            let (lo, hi) = match g.op {
                CmpOp::Lt | CmpOp::Le => (&g.lhs, &g.rhs),
                CmpOp::Gt | CmpOp::Ge => (&g.rhs, &g.lhs),
                CmpOp::Eq => continue,
            };
            rows.push(row("RankMono", vec![(Term::Rank(lo.clone()), one()), (Term::Rank(hi.clone()), -one())], zero()));
        }
    }
    rows.retain(|r| !r.coeffs.is_empty() || r.bound < zero());
    FactBase { rows }
}

#[cfg(test)]
mod tests {
    use super::super::guards::Guard;
    use super::*;
    use crate::potentials::{term_value, SolParams, TreeEnv};
    use crate::semantics::{generate_tree, TreeKind};
    use crate::templates::{enumerate_terms, Caps};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn names(v: &[&str]) -> Vec<Name> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn l1_row_for_two_variables() {
        let vars = names(&["t", "u"]);
        let lang = Lang::Log;
        let uni = enumerate_terms(&lang, &vars, false, &Caps::default());
        let k = Knowledge { l1: true, offsets: vec![0], ..Knowledge::none() };
        let f = build_facts(&lang, &vars, &GuardSet::new(), &k, &uni);
        assert_eq!(f.rows.len(), 1);
        assert_eq!(f.rows[0].to_string(), "1/2·log|t| - log(|t| + |u|) + 1/2·log|u| <= -1   (L1)");
    }

    #[test]
    fn guard_yields_monotone_row() {
        let vars = names(&["t", "u"]);
        let g = GuardSet::new().with(Guard::new(Measure::Weight, "t", CmpOp::Ge, "u"));
        let a = SizeForm { vars: names(&["u"]), c: 0 };
        let b = SizeForm { vars: names(&["t"]), c: 0 };
        assert!(size_le(&a, &b, &g, &vars));
        assert!(!size_le(&a, &b, &GuardSet::new(), &vars));
        assert!(!size_le(&b, &a, &g, &vars));
    }

    #[test]
    fn l2_base_row_shape() {
        let vars = names(&["t", "u"]);
        let lang = Lang::Pw;
        let uni = enumerate_terms(&lang, &vars, false, &Caps::default());
        let k = Knowledge { l2: true, offsets: vec![0], ..Knowledge::none() };
        let f = build_facts(&lang, &vars, &GuardSet::new(), &k, &uni);
        let shown: Vec<String> = f.rows.iter().map(|r| r.to_string()).collect();
        assert!(shown.contains(&"-log(|t| + |u|) + log|u| + [|u| - 1 < |t|] <= 0   (L2)".to_string()), "{shown:#?}");
    }

    /// Brute force: maximise p·x over x ≥ 1 with guard rows, for small boxes.
    fn brute_le(a: &SizeForm, b: &SizeForm, guards: &GuardSet, vars: &[Name]) -> bool {
        let n = vars.len();
        let rows = super::size_rows(guards, vars);
        let mut x = vec![1i64; n];
        loop {
            let val = |v: &Name| x[vars.iter().position(|w| w == v).unwrap()];
            let feasible = rows.iter().all(|r| r.iter().map(|(v, k)| k * val(v)).sum::<i64>() <= 0);
            if feasible {
                let lhs: i64 = a.vars.iter().map(val).sum::<i64>() + a.c;
                let rhs: i64 = b.vars.iter().map(val).sum::<i64>() + b.c;
                if lhs > rhs {
                    return false;
                }
            }
            let mut i = 0;
            loop {
                if i == n {
                    return true;
                }
                x[i] += 1;
                if x[i] <= 6 {
                    break;
                }
                x[i] = 1;
                i += 1;
            }
        }
    }

    #[test]
    fn order_is_sound_against_enumeration() {
        let vars = names(&["s", "t", "u"]);
        let guard_sets = [
            GuardSet::new(),
            GuardSet::new().with(Guard::new(Measure::Weight, "t", CmpOp::Ge, "u")),
            GuardSet::new()
                .with(Guard::new(Measure::Weight, "t", CmpOp::Ge, "u"))
                .with(Guard::new(Measure::Weight, "s", CmpOp::Le, "u")),
        ];
        let forms: Vec<SizeForm> = log_terms(&vars)
            .iter()
            .map(|t| log_form(t).unwrap())
            .collect();
        for g in &guard_sets {
            for a in &forms {
                for b in &forms {
                    if size_le(a, b, g, &vars) {
                        assert!(brute_le(a, b, g, &vars), "{a:?} <= {b:?} under {g}");
                    }
                }
            }
        }
    }

    fn eval_row(r: &FactRow, lang: &Lang, env: &TreeEnv) -> f64 {
        r.coeffs.iter().map(|(t, k)| to_f64(k) * term_value(t, lang, env).unwrap()).sum::<f64>() - to_f64(&r.bound)
    }

    #[test]
    fn every_row_holds_on_guarded_samples() {
        let vars = names(&["t", "u", "y"]);
        let g = GuardSet::new()
            .with(Guard::new(Measure::Weight, "t", CmpOp::Ge, "u"))
            .with(Guard::new(Measure::Rank, "t", CmpOp::Ge, "u"));
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for lang in [Lang::Log, Lang::Sol(SolParams::right()), Lang::Pw, Lang::Rank] {
            let mut k = Knowledge::defaults(&lang);
            k.l2 = true;
            k.rank_log = lang == Lang::Rank;
            k.rank_mono = true;
            k.l3 = vec![l4_pair(), (rat(1, 2), rat(1, 2)), (int(1), int(1))];
            let uni = enumerate_terms(&lang, &vars, false, &Caps::default());
            let f = build_facts(&lang, &vars, &g, &k, &uni);
            let mut checked = 0;
            while checked < 300 {
                let mut env = TreeEnv::new();
                for v in &vars {
                    let kind = if lang == Lang::Rank { TreeKind::RankBiased } else { TreeKind::Any };
                    env.insert(v.clone(), generate_tree(rng.gen_range(1..20), kind, rng.gen()));
                }
                let (t, u) = (&env["t"], &env["u"]);
                if t.leaves() < u.leaves() || t.rank() < u.rank() {
                    continue;
                }
                checked += 1;
                for r in &f.rows {
                    assert!(eval_row(r, &lang, &env) <= 1e-9, "{r} fails");
                }
            }
        }
    }
}
