//! Per-algorithm aggregates over run records.

use std::fmt::Write as _;

use serde::Serialize;

use super::suite::RunRecord;
use crate::faultyflow::FlowVerdict;
use crate::verify::Algorithm;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub algorithm: Algorithm,
    pub runs: usize,
    pub errors: usize,
    pub avg_time: f64,
    /// Over runs that found a counterexample.
    pub avg_len: Option<f64>,
    pub median_len: Option<f64>,
    pub mistakes: usize,
    pub avg_mqs: f64,
    pub avg_sampled: f64,
    /// Over runs that built a hypothesis.
    pub avg_dfa_size: Option<f64>,
    pub flows_found: usize,
    pub flows_checked: usize,
}

fn mean(xs: &[f64]) -> Option<f64> {
    (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
}

pub fn median(xs: &[f64]) -> Option<f64> {
    if xs.is_empty() {
        return None;
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    Some(if v.len() % 2 == 1 {
        v[m]
    } else {
        (v[m - 1] + v[m]) / 2.0
    })
}

/// One row per algorithm, in the order SMC, AAMC, PDV; algorithms without
/// records are omitted.
pub fn summarize(records: &[RunRecord]) -> Vec<Summary> {
    [Algorithm::Smc, Algorithm::Aamc, Algorithm::Pdv]
        .into_iter()
        .filter_map(|alg| {
            let rs: Vec<&RunRecord> = records.iter().filter(|r| r.algorithm == alg).collect();
            if rs.is_empty() {
                return None;
            }
            let ok: Vec<_> = rs.iter().filter_map(|r| r.stats.as_ref().map(|s| (*r, s))).collect();
            let times: Vec<f64> = ok.iter().map(|(_, s)| s.wall_time_secs).collect();
            let lens: Vec<f64> = ok
                .iter()
                .filter(|(r, _)| r.found_counterexample())
                .filter_map(|(_, s)| s.counterexample_length.map(|l| l as f64))
                .collect();
            let mqs: Vec<f64> = ok.iter().map(|(_, s)| s.membership_queries as f64).collect();
            let sampled: Vec<f64> = ok.iter().map(|(_, s)| s.sampled_words as f64).collect();
            let sizes: Vec<f64> = ok
                .iter()
                .filter_map(|(_, s)| s.final_hypothesis_size().map(|n| n as f64))
                .collect();
            let flows: Vec<_> = rs.iter().filter_map(|r| r.faulty_flow.as_ref()).collect();
            Some(Summary {
                algorithm: alg,
                runs: rs.len(),
                errors: rs.len() - ok.len(),
                avg_time: mean(&times).unwrap_or(0.0),
                avg_len: mean(&lens),
                median_len: median(&lens),
                mistakes: lens.len(),
                avg_mqs: mean(&mqs).unwrap_or(0.0),
                avg_sampled: mean(&sampled).unwrap_or(0.0),
                avg_dfa_size: mean(&sizes),
                flows_found: flows
                    .iter()
                    .filter(|f| f.verdict == FlowVerdict::FaultyFlowFound)
                    .count(),
                flows_checked: flows.len(),
            })
        })
        .collect()
}

const HEADERS: [&str; 6] = ["Type", "Avg time (s)", "Avg len", "# Mistakes", "Avg MQs", "Avg DFA size"];

fn cells(s: &Summary) -> [String; 6] {
    let opt = |x: Option<f64>| x.map_or("-".to_string(), |v| format!("{v:.2}"));
    [
        s.algorithm.name().to_string(),
        format!("{:.3}", s.avg_time),
        opt(s.avg_len),
        s.mistakes.to_string(),
        format!("{:.0}", s.avg_mqs),
        opt(s.avg_dfa_size),
    ]
}

/// Aligned text table, followed by faulty-flow counts when present.
pub fn render_text(rows: &[Summary]) -> String {
    let body: Vec<[String; 6]> = rows.iter().map(cells).collect();
    let mut widths = HEADERS.map(str::len);
    for r in &body {
        for (w, c) in widths.iter_mut().zip(r) {
            *w = (*w).max(c.chars().count());
        }
    }
    let mut out = String::new();
    let line = |out: &mut String, cols: &[String]| {
        let mut parts = Vec::new();
        for (i, (c, w)) in cols.iter().zip(widths).enumerate() {
            parts.push(if i == 0 { format!("{c:<w$}") } else { format!("{c:>w$}") });
        }
        let _ = writeln!(out, "{}", parts.join("  ").trim_end());
    };
    line(&mut out, &HEADERS.map(String::from));
    for r in &body {
        line(&mut out, r);
    }
    for s in rows.iter().filter(|s| s.flows_checked > 0) {
        let _ = writeln!(
            out,
            "{}: faulty flows in {}/{} counterexamples",
            s.algorithm.name(),
            s.flows_found,
            s.flows_checked
        );
    }
    out
}

pub fn render_csv(rows: &[Summary]) -> String {
    let mut out = String::from("type,avg_time_s,avg_len,mistakes,avg_mqs,avg_dfa_size\n");
    let opt = |x: Option<f64>| x.map_or(String::new(), |v| v.to_string());
    for s in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            s.algorithm.name(),
            s.avg_time,
            opt(s.avg_len),
            s.mistakes,
            s.avg_mqs,
            opt(s.avg_dfa_size)
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::Word;
    use crate::verify::{ExhaustionReason, Outcome, RunStats};

    fn record(alg: Algorithm, time: f64, mqs: u64, cex: Option<usize>, sizes: Vec<usize>) -> RunRecord {
        RunRecord {
            instance: "inst_000".into(),
            spec: 0,
            algorithm: alg,
            seed: 0,
            epsilon: 0.1,
            gamma: 0.1,
            outcome: Some(match cex {
                Some(n) => Outcome::CounterexampleFound {
                    word: Word::new(vec![0; n]),
                    confirmed: true,
                },
                None => Outcome::BudgetExhausted {
                    reason: ExhaustionReason::WallClock,
                },
            }),
            counterexample: None,
            stats: Some(RunStats {
                wall_time_secs: time,
                membership_queries: mqs,
                counterexample_length: cex,
                hypothesis_sizes: sizes,
                ..RunStats::default()
            }),
            faulty_flow: None,
            error: None,
        }
    }

    #[test]
    fn single_run() {
        let rows = summarize(&[record(Algorithm::Pdv, 1.0, 10, Some(5), vec![2, 3])]);
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].avg_len, Some(5.0));
        assert_eq!(rows[0].mistakes, 1);
        assert_eq!(rows[0].avg_dfa_size, Some(3.0));
    }

    #[test]
    fn three_record_fixture() {
        let records = [
            record(Algorithm::Smc, 1.0, 100, Some(4), vec![]),
            record(Algorithm::Smc, 2.0, 200, None, vec![]),
            record(Algorithm::Smc, 6.0, 600, Some(10), vec![]),
        ];
        let s = &summarize(&records)[0];
        assert_eq!(s.runs, 3);
        assert_eq!(s.avg_time, 3.0);
        assert_eq!(s.avg_len, Some(7.0));
        assert_eq!(s.median_len, Some(7.0));
        assert_eq!(s.mistakes, 2);
        assert_eq!(s.avg_mqs, 300.0);
        assert_eq!(s.avg_dfa_size, None);
        let csv = render_csv(&summarize(&records));
        assert_eq!(csv.lines().nth(1), Some("SMC,3,7,2,300,"));
    }

    #[test]
    fn errors_excluded_from_means() {
        let mut bad = record(Algorithm::Aamc, 100.0, 1, None, vec![9]);
        bad.stats = None;
        bad.outcome = None;
        bad.error = Some("boom".into());
        let rows = summarize(&[bad, record(Algorithm::Aamc, 2.0, 8, None, vec![4])]);
        assert_eq!(rows[0].errors, 1);
        assert_eq!(rows[0].avg_time, 2.0);
        assert_eq!(rows[0].avg_dfa_size, Some(4.0));
    }

    #[test]
    fn empty_table_has_headers() {
        let text = render_text(&summarize(&[]));
        assert_eq!(text.lines().count(), 1);
        for h in HEADERS {
            assert!(text.contains(h));
        }
        assert_eq!(render_csv(&[]).lines().count(), 1);
    }

    #[test]
    fn text_columns_align() {
        let records = [
            record(Algorithm::Smc, 1.0, 123456, Some(40), vec![]),
            record(Algorithm::Pdv, 0.5, 42, Some(3), vec![7]),
        ];
        let text = render_text(&summarize(&records));
        let widths: Vec<usize> = text.lines().map(|l| l.chars().count()).collect();
        assert!(widths.iter().all(|&w| w == widths[0]), "{text}");
    }

    #[test]
    fn medians() {
        assert_eq!(median(&[]), None);
        assert_eq!(median(&[3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), Some(2.5));
    }
}
