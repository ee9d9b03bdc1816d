//! DOT and TSV renderings. Output order is fixed (nodes and edges sorted by name) so
//! files diff cleanly between runs.

use std::fmt::Write as _;

use crate::dag::Dag;
use crate::forest::Forest;
use crate::metrics::MetricsReport;
use crate::scalar::Scalar;
use crate::temporal::{AgreementReport, Direction, PrecedenceEntry, Verdict};

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        if c == '"' || c == '\\' {
            out.push('\\');
        }
        out.push(c);
    }
    out.push('"');
    out
}

pub fn forest_dot(f: &Forest) -> String {
    let mut names: Vec<&String> = f.names().iter().collect();
    names.sort();
    let mut out = String::from("graph forest {\n");
    for n in names {
        let _ = writeln!(out, "  {};", quote(n));
    }
    for (a, b) in f.named_edges() {
        let _ = writeln!(out, "  {} -- {};", quote(&a), quote(&b));
    }
    out.push_str("}\n");
    out
}

/// Directed arcs, plus one dashed edge per arc carrying the physical order of its
/// endpoints (earlier -> later; `dir=none` for ties). Arcs without enough support
/// get no dashed edge.
pub fn dag_dot(g: &Dag, agreement: Option<&AgreementReport>) -> String {
    let mut names: Vec<&String> = g.names().iter().collect();
    names.sort();
    let mut out = String::from("digraph dag {\n");
    for n in names {
        let _ = writeln!(out, "  {};", quote(n));
    }
    for (u, v) in g.named_arcs() {
        let _ = writeln!(out, "  {} -> {};", quote(&u), quote(&v));
    }
    if let Some(report) = agreement {
        let mut dashed: Vec<String> = report
            .arcs
            .iter()
            .filter_map(|a| {
                let (p, c) = (quote(&a.parent), quote(&a.child));
                match a.verdict {
                    Verdict::Agree => Some(format!("  {p} -> {c} [style=dashed, constraint=false];")),
                    Verdict::Disagree => Some(format!("  {c} -> {p} [style=dashed, constraint=false];")),
                    Verdict::Tie => Some(format!("  {p} -> {c} [style=dashed, dir=none, constraint=false];")),
                    Verdict::Insufficient => None,
                }
            })
            .collect();
        dashed.sort();
        for line in dashed {
            out.push_str(&line);
            out.push('\n');
        }
    }
    out.push_str("}\n");
    out
}

/// `node  degree  betweenness  closeness`, closeness to two decimals.
pub fn metrics_tsv<S: Scalar>(report: &MetricsReport<S>) -> String {
    let mut out = String::from("node\tdegree\tbetweenness\tcloseness\n");
    for r in &report.records {
        let _ = writeln!(out, "{}\t{}\t{}\t{:.2}", r.vertex, r.degree, r.betweenness, r.closeness);
    }
    out
}

pub fn agreement_tsv(report: &AgreementReport) -> String {
    let mut out = String::from("parent\tchild\tn_parent_first\tn_child_first\tn_tied\tverdict\n");
    for a in &report.arcs {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}",
            a.parent,
            a.child,
            a.parent_first,
            a.child_first,
            a.tied,
            a.verdict.as_str()
        );
    }
    out
}

/// `item_i  item_j  n_i_first  n_j_first  n_tied  n_both  first`, where `first` names
/// the item visited first by the majority, or `-` when unordered.
pub fn precedence_tsv(entries: &[PrecedenceEntry]) -> String {
    let mut out = String::from("item_i\titem_j\tn_i_first\tn_j_first\tn_tied\tn_both\tfirst\n");
    for e in entries {
        let first = match crate::temporal::physical_order(e) {
            Direction::Forward => e.i.as_str(),
            Direction::Backward => e.j.as_str(),
            Direction::Unordered => "-",
        };
        let _ = writeln!(out, "{}\t{}\t{}\t{}\t{}\t{}\t{}", e.i, e.j, e.i_first, e.j_first, e.tied, e.both, first);
    }
    out
}
