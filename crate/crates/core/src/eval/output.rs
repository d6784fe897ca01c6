//! Text renderings of reports: per-term CSV, markdown summary tables and
//! SVG bar charts of per-term differences. Each embeds a provenance string
//! (the resolved configuration) supplied by the caller.

use std::fmt::Write;

use super::EvalReport;

/// Footer for summaries that include LSTM results.
pub const PARAMETER_NOTE: &str = "LSTM parameter count with element-wise peepholes and K output senses: \
8d^2 + 7d + Kd + K, i.e. 8d^2 + 9d + 2 for K = 2 (80,902 at d = 100; 2,004,502 at d = 500). \
The figure of 81,002 sometimes quoted for d = 100 corresponds to 8d^2 + 10d + 2 and is not reproduced by this architecture.";

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn comment_lines(prefix: &str, provenance: &str) -> String {
    provenance.lines().map(|l| format!("{prefix}{l}\n")).collect()
}

/// One row per term, preceded by `#` comment lines carrying the provenance.
pub fn report_csv(r: &EvalReport, provenance: &str) -> String {
    let mut out = comment_lines("# ", provenance);
    out.push_str("term,senses,type,correct,total,accuracy\n");
    for t in &r.terms {
        let _ = writeln!(
            out,
            "{},{},{:?},{},{},{:.6}",
            csv_field(&t.term),
            t.n_senses,
            t.word_type,
            t.correct,
            t.total,
            t.accuracy
        );
    }
    out
}

fn fmt_ci(r: &EvalReport) -> String {
    match r.ci95 {
        Some((lo, hi)) => format!("{:.4} ± {:.4}", (lo + hi) / 2.0, (hi - lo) / 2.0),
        None => "n/a".into(),
    }
}

/// Feature set x learner table of macro/micro accuracy (percent).
pub fn summary_markdown(reports: &[&EvalReport], provenance: &str) -> String {
    let mut out = String::from("# Results\n\n| Features | Learner | Macro | Micro | Macro CI95 |\n|---|---|---:|---:|---|\n");
    for r in reports {
        let _ = writeln!(
            out,
            "| {} | {} | {:.2} | {:.2} | {} |",
            r.features,
            r.learner,
            100.0 * r.macro_accuracy,
            100.0 * r.micro_accuracy,
            fmt_ci(r)
        );
    }
    let groups: Vec<&EvalReport> = reports.iter().copied().filter(|r| !r.groups.is_empty()).collect();
    if !groups.is_empty() {
        out.push_str("\n## Breakdown\n\n| Features | Learner | Group | Terms | Macro | Micro |\n|---|---|---|---:|---:|---:|\n");
        for r in groups {
            for g in &r.groups {
                let _ = writeln!(
                    out,
                    "| {} | {} | {}={} | {} | {:.2} | {:.2} |",
                    r.features,
                    r.learner,
                    g.by,
                    g.key,
                    g.n_terms,
                    100.0 * g.macro_accuracy,
                    100.0 * g.micro_accuracy
                );
            }
        }
    }
    if reports.iter().any(|r| r.learner.starts_with("lstm")) {
        let _ = write!(out, "\n{PARAMETER_NOTE}\n");
    }
    let _ = write!(out, "\n## Configuration\n\n```\n{provenance}\n```\n");
    out
}

pub fn diff_csv(diffs: &[(String, f64)], provenance: &str) -> String {
    let mut out = comment_lines("# ", provenance);
    out.push_str("term,difference\n");
    for (t, d) in diffs {
        let _ = writeln!(out, "{},{:.6}", csv_field(t), d);
    }
    out
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Bar chart of per-term differences in the order given.
pub fn diff_svg(diffs: &[(String, f64)], title: &str, provenance: &str) -> String {
    let bar = 14.0;
    let (left, top, plot_h) = (60.0, 40.0, 300.0);
    let width = left + 20.0 + bar * diffs.len().max(1) as f64;
    let height = top + plot_h + 120.0;
    let max = diffs.iter().map(|(_, d)| d.abs()).fold(0.0, f64::max).max(1e-9);
    let zero_y = top + plot_h / 2.0;
    let scale = (plot_h / 2.0) / max;

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}">"#
    );
    let _ = writeln!(out, "<!--\n{}\n-->", provenance.replace("--", "- -"));
    let _ = writeln!(out, r#"<text x="{left}" y="20" font-size="14">{}</text>"#, xml_escape(title));
    let _ = writeln!(
        out,
        r#"<line x1="{left}" y1="{zero_y}" x2="{:.1}" y2="{zero_y}" stroke="black"/>"#,
        width - 10.0
    );
    let _ = writeln!(out, r#"<text x="4" y="{:.1}" font-size="10">{max:+.3}</text>"#, top + 4.0);
    let _ = writeln!(out, r#"<text x="4" y="{:.1}" font-size="10">{:+.3}</text>"#, top + plot_h, -max);
    for (i, (term, d)) in diffs.iter().enumerate() {
        let x = left + bar * i as f64;
        let h = d.abs() * scale;
        let y = if *d >= 0.0 { zero_y - h } else { zero_y };
        let fill = if *d >= 0.0 { "#3b7dd8" } else { "#d8573b" };
        let _ = writeln!(
            out,
            r#"<rect x="{:.1}" y="{y:.2}" width="{:.1}" height="{h:.2}" fill="{fill}"><title>{}: {d:+.4}</title></rect>"#,
            x + 1.0,
            bar - 2.0,
            xml_escape(term)
        );
        let ly = top + plot_h + 8.0;
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{ly:.1}" font-size="9" transform="rotate(90 {:.1} {ly:.1})">{}</text>"#,
            x + 4.0,
            x + 4.0,
            xml_escape(term)
        );
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn svg_has_one_bar_per_term() {
        let diffs = vec![("a".to_string(), 0.2), ("b<c".to_string(), 0.0), ("d".to_string(), -0.1)];
        let svg = diff_svg(&diffs, "x", "seed = 1");
        assert_eq!(svg.matches("<rect").count(), 3);
        assert!(svg.contains("b&lt;c"));
        assert!(svg.contains("seed = 1"));
        let csv = diff_csv(&diffs, "seed = 1");
        assert!(csv.starts_with("# seed = 1\nterm,difference\n"));
    }
}
