//! Every rule's potential relation holds numerically under a solved model,
//! in each template language.

use aara::frontend::config;
use aara::inference::run::{run, Status};
use aara::inference::Rule;
use aara::potentials::{Lang, SolParams};
use aara::semantics::TreeKind;
use aara::solver::SolverConfig;
use aara::soundness::local::check_forest;
use aara::syntax::load;

const PROG: &str = "
id :: Tree Base -> Tree Base
id x = x

graft :: (Tree Base * Tree Base * Base) -> Tree Base
graft x y c = match x with
  | leaf       -> y
  | node t a u -> if a <= c
    then (let z = ~ id t in node z a y)
    else (let w = ~ id t in node w a t)

drop :: Tree Base -> Tree Base
drop x = match x with
  | leaf       -> leaf
  | node t a u -> let v = drop u in v
";

fn langs() -> Vec<Lang> {
    vec![Lang::Log, Lang::Sol(SolParams::right()), Lang::Pw, Lang::Rank]
}

#[test]
fn rules_hold_in_every_language() {
    let prog = load(PROG).unwrap();
    for lang in langs() {
        let name = lang.name();
        let res = run(&prog, &config(lang, None, false), &SolverConfig::default()).unwrap();
        assert_eq!(res.status, Status::Sat, "{name}");
        let model = res.model.as_ref().unwrap();
        let rep = check_forest(&res.analysis, model, TreeKind::Any, 100, 11);
        assert!(rep.ok(), "{name}: {:#?}", rep.failures);
        for rule in [Rule::ConstLeaf, Rule::ConstNode, Rule::Match, Rule::Let, Rule::Var, Rule::Tick, Rule::Ite, Rule::W, Rule::Share, Rule::App] {
            assert!(rep.count(rule) >= 100, "{name}: {rule} checked {} times", rep.count(rule));
        }
    }
}
