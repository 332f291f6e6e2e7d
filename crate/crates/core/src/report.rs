//! JSON and plain-text rendering of reports. Text output is derived from
//! the same structures that serialize to JSON.

use std::fmt::Write;

use serde::Serialize;

use crate::jdc::JdcReport;
use crate::num::Num;
use crate::selectivity::{ChainReport, SuiteReport};

/// Pretty JSON with a trailing newline. Field order is fixed by the
/// struct definitions, so output is deterministic.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

fn seq(r: &ChainReport) -> String {
    r.sequence.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ")
}

fn sum_terms(terms: &[Num]) -> String {
    terms.iter().map(ToString::to_string).collect::<Vec<_>>().join(" + ")
}

pub fn render_chain(r: &ChainReport) -> String {
    let mut out = String::new();
    writeln!(out, "metric:   {}", r.metric).unwrap();
    writeln!(out, "sequence: {}", seq(r)).unwrap();
    writeln!(out, "test:     {} <= {}", r.lhs, sum_terms(&r.rhs)).unwrap();
    writeln!(out, "residual: {}", r.residual).unwrap();
    writeln!(out, "verdict:  {}", if r.violated { "VIOLATED" } else { "satisfied" }).unwrap();
    out
}

pub fn render_suite(r: &SuiteReport) -> String {
    let mut out = String::new();
    let ms = &r.marginal_selectivity;
    writeln!(out, "arithmetic: {:?}", r.regime).unwrap();
    writeln!(
        out,
        "marginal selectivity: {} (max discrepancy {}, {} subsets{})",
        if ms.passed { "ok" } else { "FAILED" },
        ms.max_discrepancy,
        ms.subsets_checked,
        if ms.exhaustive { "" } else { ", singletons and pairs only" }
    )
    .unwrap();
    if let (false, Some(w)) = (ms.passed, &ms.worst) {
        writeln!(
            out,
            "  inputs {:?} = {:?}: treatments {:?} vs {:?} differ by {} at outcome {:?}",
            w.inputs, w.values, w.treatments[0], w.treatments[1], w.discrepancy, w.outcome
        )
        .unwrap();
    }
    writeln!(
        out,
        "sequences tested: {} (length <= {}), chain tests: {}",
        r.sequences_tested, r.max_len, r.chain_tests
    )
    .unwrap();
    for m in &r.metrics {
        let min = m.min_residual.as_ref().map_or("-".to_string(), ToString::to_string);
        writeln!(
            out,
            "  {:<32} tests {:>8}  violations {:>6}  min residual {}",
            m.name, m.tests, m.violations, min
        )
        .unwrap();
    }
    for note in &r.truncation {
        writeln!(out, "note: {note}").unwrap();
    }
    if r.violations.is_empty() {
        writeln!(out, "no violations").unwrap();
    } else {
        writeln!(out, "violations: {}", r.violations.len()).unwrap();
        for v in &r.violations {
            writeln!(
                out,
                "  [{}] {}: {} <= {} fails, residual {}",
                v.metric,
                seq(v),
                v.lhs,
                sum_terms(&v.rhs),
                v.residual
            )
            .unwrap();
        }
    }
    out
}

pub fn render_jdc(r: &JdcReport) -> String {
    let mut out = String::new();
    writeln!(out, "arithmetic: {:?}", r.regime).unwrap();
    writeln!(
        out,
        "hidden assignments: {}, constraints: {}, pivots: {}",
        r.hidden_size, r.constraints, r.pivots
    )
    .unwrap();
    writeln!(out, "joint distribution: {}", if r.feasible { "EXISTS" } else { "DOES NOT EXIST" }).unwrap();
    let points = r.hidden_points.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ");
    if let Some(w) = &r.witness {
        writeln!(out, "witness over {points}:").unwrap();
        for atom in w {
            writeln!(out, "  {:?} {}", atom.assignment, atom.p).unwrap();
        }
    }
    if let Some(c) = &r.certificate {
        writeln!(out, "certificate (yA >= 0, yb < 0):").unwrap();
        for row in c {
            writeln!(out, "  treatment {:?} outcome {:?}: {}", row.treatment, row.outcome, row.y).unwrap();
        }
    }
    if let Some(f) = &r.fine {
        writeln!(out, "2x2 inequalities (each in [-1, 0]):").unwrap();
        for (k, (v, ok)) in f.values.iter().zip(&f.satisfied).enumerate() {
            writeln!(out, "  e{} = {} {}", k + 1, v, if *ok { "ok" } else { "VIOLATED" }).unwrap();
        }
    }
    if let Some(d) = &r.chain_identity_max_discrepancy {
        writeln!(out, "order-chain identity max discrepancy: {d}").unwrap();
    }
    out
}
