//! Tab-separated sweep reports.

use std::fmt::Write as _;

use afa_core::recognition::{SweepReport, Value};

/// How many counterexamples and indeterminate strings the summary names.
pub const SUMMARY_LIST_LIMIT: usize = 20;

fn optional(v: &Option<Value>) -> String {
    v.as_ref()
        .map_or_else(|| "none".to_string(), ToString::to_string)
}

pub fn verdict(report: &SweepReport) -> &'static str {
    if !report.counterexamples.is_empty() {
        "refuted"
    } else if !report.indeterminate.is_empty() {
        "indeterminate"
    } else {
        "verified"
    }
}

/// The aggregate block: one `key<TAB>value` line per statistic, then the
/// first few counterexamples and indeterminate strings.
pub fn summary(report: &SweepReport) -> String {
    let mut out = String::new();
    let mut line = |k: &str, v: String| writeln!(out, "{k}\t{v}").unwrap();
    line("mode", report.mode.to_string());
    line("cutpoint", report.cutpoint.to_string());
    line("maxlen", report.maxlen.to_string());
    line("strings", report.records.len().to_string());
    line(
        "members",
        report
            .records
            .iter()
            .filter(|r| r.member)
            .count()
            .to_string(),
    );
    line("counterexamples", report.counterexamples.len().to_string());
    line("indeterminate", report.indeterminate.len().to_string());
    line("min_member", optional(&report.min_member));
    line("max_nonmember", optional(&report.max_nonmember));
    if report.gap.is_some() {
        line("gap", optional(&report.gap));
    }
    line("verdict", verdict(report).to_string());
    for (label, list) in [
        ("counterexample", &report.counterexamples),
        ("indeterminate_string", &report.indeterminate),
    ] {
        for w in list.iter().take(SUMMARY_LIST_LIMIT) {
            line(label, w.clone());
        }
        if list.len() > SUMMARY_LIST_LIMIT {
            line(
                label,
                format!("... {} more", list.len() - SUMMARY_LIST_LIMIT),
            );
        }
    }
    out
}

/// One row per string in enumeration order, a blank line, then the
/// summary block.
pub fn sweep_tsv(report: &SweepReport) -> String {
    let mut out = String::from("string\tvalue\tmember\tagrees\n");
    for r in &report.records {
        let member = if r.member { "yes" } else { "no" };
        writeln!(
            out,
            "{}\t{}\t{}\t{}",
            r.string,
            r.value,
            member,
            r.agreement.name()
        )
        .unwrap();
    }
    out.push('\n');
    out.push_str(&summary(report));
    out
}
