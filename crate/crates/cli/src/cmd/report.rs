use std::fmt::Write;

use anyhow::Result;
use wsd_core::eval::summary_markdown;
use wsd_core::EvalReport;

use crate::files::{read_json, write_string};
use crate::ReportArgs;

pub fn run(a: &ReportArgs) -> Result<()> {
    let mut reports = Vec::with_capacity(a.reports.len());
    let mut provenance = String::from("reports:\n");
    for p in &a.reports {
        let r: EvalReport = read_json(p)?;
        r.verify()?;
        let _ = writeln!(provenance, "  {} (fingerprint {}, seed {})", p.display(), r.fingerprint, r.seed);
        reports.push(r);
    }
    let refs: Vec<&EvalReport> = reports.iter().collect();
    let md = summary_markdown(&refs, &provenance);
    match &a.out {
        Some(p) => write_string(p, &md)?,
        None => print!("{md}"),
    }
    Ok(())
}
