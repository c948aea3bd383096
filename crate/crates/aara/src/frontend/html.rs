//! Collapsible HTML proof trees.

use super::{kind_name, render_instance};
use crate::inference::run::{AnalysisResult, Status};
use crate::inference::{Forest, Rule};
use crate::rat::fmt_rat;
use num_traits::Zero;
use std::collections::BTreeSet;
use std::fmt::Write;

const STYLE: &str = "body{font-family:sans-serif;font-size:14px}\
details{margin-left:1.2em;border-left:1px solid #ccc;padding-left:.4em}\
summary{cursor:pointer}\
.rule{font-weight:bold}.expr{font-family:monospace;color:#333}\
.core>summary{background:#fdd}.core-c{color:#b00;font-family:monospace}\
.ann{font-family:monospace;color:#036}.facts{font-family:monospace;color:#555;font-size:12px}";

pub fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '&' => out.push_str("&amp;"),
            '"' => out.push_str("&quot;"),
            _ => out.push(c),
        }
    }
    out
}

struct Ctx<'a> {
    res: &'a AnalysisResult,
    forest: &'a Forest,
    core: BTreeSet<usize>,
}

impl Ctx<'_> {
    fn node(&self, id: usize, out: &mut String) {
        let n = self.forest.get(id);
        let core = self.core.contains(&id);
        let _ = write!(
            out,
            "<details open{}><summary><span class=\"rule\">{}</span> #{} [{}] <span class=\"expr\">{}</span></summary>",
            if core { " class=\"core\"" } else { "" },
            n.rule,
            n.id,
            escape(&n.ctx.join(", ")),
            escape(&n.expr)
        );
        let _ = write!(out, "<div>guards: {}</div>", escape(&n.guards.to_string()));
        if !n.detail.is_empty() {
            let _ = write!(out, "<div>{}</div>", escape(&n.detail));
        }
        if let Some(m) = &self.res.model {
            let _ = write!(
                out,
                "<div class=\"ann\">{} ⊢ … : {}</div>",
                escape(&render_instance(&n.input(m))),
                escape(&render_instance(&n.output(m)))
            );
        }
        if core {
            for &i in &self.res.core {
                let (c, p) = &self.res.analysis.cs.items[i];
                if p.node == id {
                    let _ = write!(out, "<div class=\"core-c\">{} {}: {}</div>", escape(&p.rule), escape(&p.tag), escape(&c.render(&self.res.analysis.cs.pool)));
                }
            }
        }
        if n.rule == Rule::W {
            if let Some(cert) = n.cert.map(|c| &self.res.analysis.certs[c]) {
                let _ = write!(out, "<details class=\"facts\"><summary>{} fact row(s)</summary>", cert.facts.rows.len());
                for (row, v) in cert.facts.rows.iter().zip(&cert.multipliers) {
                    match &self.res.model {
                        Some(m) if m.get(*v).is_zero() => continue,
                        Some(m) => {
                            let _ = write!(out, "<div>{} × {}</div>", fmt_rat(&m.get(*v)), escape(&row.to_string()));
                        }
                        None => {
                            let _ = write!(out, "<div>{}</div>", escape(&row.to_string()));
                        }
                    }
                }
                out.push_str("</details>");
            }
        }
        for &c in &n.children {
            self.node(c, out);
        }
        out.push_str("</details>\n");
    }
}

/// Renders every signature's derivation. Core nodes are highlighted on UNSAT.
pub fn render_proof_tree(res: &AnalysisResult, title: &str) -> String {
    let a = &res.analysis;
    let ctx = Ctx { res, forest: &a.forest, core: res.core_nodes().into_iter().collect() };
    let mut out = String::new();
    let _ = write!(out, "<!DOCTYPE html>\n<html><head><meta charset=\"utf-8\"><title>{}</title><style>{STYLE}</style></head><body>\n", escape(title));
    let status = match res.status {
        Status::Sat => format!("sat, objective {}", res.objective.as_ref().map(fmt_rat).unwrap_or_default()),
        Status::Unsat => format!("unsat, {} core constraint(s)", res.core.len()),
        Status::Timeout => "timeout".into(),
    };
    let _ = writeln!(out, "<h1>{}</h1><p>{} · {}</p>", escape(title), escape(&a.cfg.lang.name()), escape(&status));
    for &(s, root) in &a.roots {
        let sig = &a.sigs.sigs[s];
        let _ = writeln!(out, "<h2>{} <small>{}</small></h2>", escape(&sig.label()), kind_name(sig.kind));
        ctx.node(root, &mut out);
    }
    out.push_str("</body></html>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn escapes_markup() {
        assert_eq!(escape("[|x| < |y|] & \"z\""), "[|x| &lt; |y|] &amp; &quot;z&quot;");
    }
}
