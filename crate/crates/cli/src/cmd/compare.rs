use std::collections::BTreeMap;
use std::path::PathBuf;

use anyhow::{bail, Result};
use wsd_core::eval::{ci95, diff_csv, diff_report, diff_svg, randomization_test};
use wsd_core::EvalReport;

use crate::files::{read_json, write_string};
use crate::CompareArgs;

const EXHAUSTIVE_LIMIT: usize = 20;

/// Per-instance 1/0 outcomes of two reports, paired by instance id.
fn paired_outcomes(a: &EvalReport, b: &EvalReport) -> Result<(Vec<f64>, Vec<f64>)> {
    let outcome = |r: &EvalReport| -> BTreeMap<String, f64> {
        r.predictions
            .iter()
            .map(|p| (p.instance.clone(), if p.is_correct() { 1.0 } else { 0.0 }))
            .collect()
    };
    let (oa, ob) = (outcome(a), outcome(b));
    if !oa.keys().eq(ob.keys()) {
        bail!(wsd_core::Error::InvalidDataset(
            "reports were produced on different instances".into()
        ));
    }
    Ok((oa.into_values().collect(), ob.into_values().collect()))
}

fn label(r: &EvalReport) -> String {
    format!("{} / {}", r.features, r.learner)
}

pub fn run(a: &CompareArgs) -> Result<()> {
    let ra: EvalReport = read_json(&a.report_a)?;
    let rb: EvalReport = read_json(&a.report_b)?;
    ra.verify()?;
    rb.verify()?;
    let diffs = diff_report(&ra, &rb)?;
    let (xa, xb) = if a.per_instance {
        paired_outcomes(&ra, &rb)?
    } else {
        let pairs: Vec<(f64, f64)> = ra
            .terms
            .iter()
            .map(|t| (t.accuracy, rb.term(&t.term).expect("same term sets").accuracy))
            .collect();
        pairs.into_iter().unzip()
    };
    let p = randomization_test(&xa, &xb, a.iterations, a.seed)?;
    let per_pair: Vec<f64> = xa.iter().zip(&xb).map(|(x, y)| x - y).collect();
    let method = if per_pair.len() <= EXHAUSTIVE_LIMIT {
        format!("exhaustive over 2^{} sign patterns", per_pair.len())
    } else {
        format!("Monte Carlo, {} iterations, seed {}", a.iterations, a.seed)
    };
    let unit = if a.per_instance { "instances" } else { "terms" };

    println!("A: {} macro {:.4} micro {:.4} ({})", label(&ra), ra.macro_accuracy, ra.micro_accuracy, a.report_a.display());
    println!("B: {} macro {:.4} micro {:.4} ({})", label(&rb), rb.macro_accuracy, rb.micro_accuracy, a.report_b.display());
    match ci95(&per_pair) {
        Ok((lo, hi)) => println!(
            "difference A - B over {} {unit}: {:.4} ± {:.4} (95% CI)",
            per_pair.len(),
            (lo + hi) / 2.0,
            (hi - lo) / 2.0
        ),
        Err(_) => println!(
            "difference A - B over {} {unit}: {:.4}",
            per_pair.len(),
            per_pair.iter().sum::<f64>() / per_pair.len() as f64
        ),
    }
    println!("p-value: {p:.4} ({method})");

    let provenance = format!(
        "A: {} (fingerprint {}, seed {})\nB: {} (fingerprint {}, seed {})\npaired by {unit}; p = {p}; {method}",
        label(&ra),
        ra.fingerprint,
        ra.seed,
        label(&rb),
        rb.fingerprint,
        rb.seed
    );
    let dir = a.out.clone().unwrap_or_else(|| PathBuf::from("."));
    let title = format!("{} minus {}", label(&ra), label(&rb));
    write_string(&dir.join("diff.csv"), &diff_csv(&diffs, &provenance))?;
    write_string(&dir.join("diff.svg"), &diff_svg(&diffs, &title, &provenance))?;
    Ok(())
}
