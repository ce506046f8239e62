//! Benchmark suites compared against published reference values.

use rayon::prelude::*;

use crate::element::Formulation;
use crate::error::Result;
use crate::model_io::{builtin, Overrides};
use crate::reference::{
    b1_fsdb_peak_kn, deviation_pct, B1_CYCLIC_DB_KN, B1_CYCLIC_FSDB_KN, B1_DB_PEAK_KN,
    TABLE1_AXIAL_KN, TABLE1_DB_KN, TABLE1_FB_KN, TABLE1_FSDB_KN,
};

/// One benchmark case: measured value beside its reference.
#[derive(Debug, Clone, PartialEq)]
pub struct Case {
    pub label: String,
    pub formulation: Formulation,
    /// Measured peak in kN, or the reason the case failed.
    pub measured: std::result::Result<f64, String>,
    pub reference: f64,
    /// Force-based reference, where one is published.
    pub fb: Option<f64>,
}

impl Case {
    pub fn deviation_pct(&self) -> Option<f64> {
        self.measured
            .as_ref()
            .ok()
            .map(|&m| deviation_pct(m, self.reference))
    }
}

/// Peak lateral forces (positive, negative) in kN of a built-in protocol.
/// A run that stops early is an error.
pub fn peaks(
    model: &str,
    protocol: &str,
    ov: &Overrides,
    axial_kn: Option<f64>,
) -> Result<(f64, f64)> {
    let mut spec = builtin(model)?;
    if let Some(n) = axial_kn {
        spec.set_load(1, 0, -n * 1e3);
    }
    let out = spec.run(protocol, ov)?;
    if let Some(f) = out.result.failure {
        return Err(crate::FsdbError::InvalidInput(format!(
            "analysis stopped after {} steps: {f}",
            out.result.steps.len()
        )));
    }
    Ok((
        out.result.peak_positive() / 1e3,
        out.result.peak_negative() / 1e3,
    ))
}

/// Benchmark 3 across the published axial levels, DB and FSDB, single
/// element. Cases run in parallel; output order is fixed.
pub fn table1(ov: &Overrides) -> Vec<Case> {
    let jobs: Vec<(usize, Formulation)> = (0..TABLE1_AXIAL_KN.len())
        .flat_map(|i| [(i, Formulation::Db), (i, Formulation::Fsdb)])
        .collect();
    jobs.par_iter()
        .map(|&(i, f)| {
            let ov = Overrides {
                formulation: Some(f),
                ..*ov
            };
            let reference = match f {
                Formulation::Db => TABLE1_DB_KN[i],
                Formulation::Fsdb => TABLE1_FSDB_KN[i],
            };
            Case {
                label: format!("N = {:.0} kN", TABLE1_AXIAL_KN[i]),
                formulation: f,
                measured: peaks("benchmark3", "pushover", &ov, Some(TABLE1_AXIAL_KN[i]))
                    .map(|p| p.0)
                    .map_err(|e| e.to_string()),
                reference,
                fb: Some(TABLE1_FB_KN[i]),
            }
        })
        .collect()
}

/// Benchmark 1 monotonic and cyclic peaks, DB and FSDB.
pub fn benchmark1(ov: &Overrides) -> Vec<Case> {
    let jobs = [
        ("pushover", Formulation::Db),
        ("pushover", Formulation::Fsdb),
        ("cyclic", Formulation::Db),
        ("cyclic", Formulation::Fsdb),
    ];
    let runs: Vec<_> = jobs
        .par_iter()
        .map(|&(p, f)| {
            let ov = Overrides {
                formulation: Some(f),
                ..*ov
            };
            peaks("benchmark1", p, &ov, None).map_err(|e| e.to_string())
        })
        .collect();
    let mut cases = Vec::new();
    for (&(p, f), r) in jobs.iter().zip(runs) {
        if p == "pushover" {
            cases.push(Case {
                label: "monotonic peak".into(),
                formulation: f,
                measured: r.map(|p| p.0),
                reference: match f {
                    Formulation::Db => B1_DB_PEAK_KN,
                    Formulation::Fsdb => b1_fsdb_peak_kn(),
                },
                fb: Some(crate::reference::B1_FB_PEAK_KN),
            });
        } else {
            let (pos, neg) = match f {
                Formulation::Db => B1_CYCLIC_DB_KN,
                Formulation::Fsdb => B1_CYCLIC_FSDB_KN,
            };
            let fb = crate::reference::B1_CYCLIC_FB_KN;
            cases.push(Case {
                label: "cyclic peak +".into(),
                formulation: f,
                measured: r.clone().map(|p| p.0),
                reference: pos,
                fb: Some(fb.0),
            });
            cases.push(Case {
                label: "cyclic peak -".into(),
                formulation: f,
                measured: r.map(|p| p.1),
                reference: neg,
                fb: Some(fb.1),
            });
        }
    }
    cases
}

/// Plain-text comparison table.
pub fn format_table(cases: &[Case]) -> String {
    use std::fmt::Write as _;
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:<16} {:<6} {:>10} {:>10} {:>8} {:>10}",
        "case", "model", "measured", "reference", "dev %", "FB ref"
    );
    for c in cases {
        let fb = c.fb.map_or_else(|| "-".into(), |v| format!("{v:.2}"));
        match &c.measured {
            Ok(m) => {
                let _ = writeln!(
                    s,
                    "{:<16} {:<6} {:>10.2} {:>10.2} {:>+8.1} {:>10}",
                    c.label,
                    c.formulation.to_string(),
                    m,
                    c.reference,
                    deviation_pct(*m, c.reference),
                    fb
                );
            }
            Err(e) => {
                let _ = writeln!(
                    s,
                    "{:<16} {:<6} {:>10} {:>10.2} {:>8} {:>10}  ({e})",
                    c.label,
                    c.formulation.to_string(),
                    "failed",
                    c.reference,
                    "-",
                    fb
                );
            }
        }
    }
    s
}
