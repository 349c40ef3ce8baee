//! Scoring of reports against exact ground truth, bound verification, and
//! cross-run aggregation.

use crate::protocol::FrequentReport;
use crate::workload::GroundTruth;

/// Quality of one peer's report against the exact frequent set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunMetrics {
    /// Fraction of truly frequent items retrieved; 1 when none exist.
    pub recall: f64,
    /// Fraction of reported items that are truly frequent; 1 on an empty
    /// report.
    pub precision: f64,
    /// Mean over reported items of `|estimate - exact| / exact`.
    pub are: f64,
}

/// Scores one report. Every reported item appeared in some local stream, so
/// its exact count is positive; the relative error is averaged over all
/// reported items, truly frequent or not.
pub fn score(report: &FrequentReport, truth: &GroundTruth) -> RunMetrics {
    let true_positives = report
        .entries
        .iter()
        .filter(|(item, _)| truth.frequent.contains(item))
        .count();
    let recall = if truth.frequent.is_empty() {
        1.0
    } else {
        true_positives as f64 / truth.frequent.len() as f64
    };
    let precision = if report.entries.is_empty() {
        1.0
    } else {
        true_positives as f64 / report.entries.len() as f64
    };
    let are = if report.entries.is_empty() {
        0.0
    } else {
        let total: f64 = report
            .entries
            .iter()
            .map(|&(item, estimate)| {
                let exact = truth.count(item);
                assert!(exact > 0, "reported item {item} never occurred");
                (estimate - exact as f64).abs() / exact as f64
            })
            .sum();
        total / report.entries.len() as f64
    };
    RunMetrics {
        recall,
        precision,
        are,
    }
}

/// Mean and 95% confidence half-width over a sample of values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aggregate {
    pub mean: f64,
    pub ci_halfwidth: f64,
}

impl Aggregate {
    /// Normal-approximation interval: `mean ± 1.96 s / sqrt(len)`.
    pub fn from_samples(values: &[f64]) -> Aggregate {
        assert!(!values.is_empty(), "aggregate of an empty sample");
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        if values.len() == 1 {
            return Aggregate {
                mean,
                ci_halfwidth: 0.0,
            };
        }
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
        Aggregate {
            mean,
            ci_halfwidth: 1.96 * var.sqrt() / n.sqrt(),
        }
    }
}

/// Per-metric aggregates over a batch of runs (repetitions x queried peers).
#[derive(Debug, Clone, Copy)]
pub struct MetricsAggregate {
    pub recall: Aggregate,
    pub precision: Aggregate,
    pub are: Aggregate,
}

pub fn aggregate(runs: &[RunMetrics]) -> MetricsAggregate {
    let collect = |f: fn(&RunMetrics) -> f64| -> Vec<f64> { runs.iter().map(f).collect() };
    MetricsAggregate {
        recall: Aggregate::from_samples(&collect(|r| r.recall)),
        precision: Aggregate::from_samples(&collect(|r| r.precision)),
        are: Aggregate::from_samples(&collect(|r| r.are)),
    }
}

/// Outcome of checking one report against the frequency-estimation bounds.
#[derive(Debug, Clone, Default)]
pub struct BoundCheck {
    /// Items whose rescaled estimate left the envelope
    /// `[(1-e*)/(1+e*) f, (1+e*)/(1-e*) (f + n/k)]`.
    pub sandwich_violations: Vec<u32>,
    /// Reported items with exact frequency at or below `(phi - eps) n`.
    pub floor_violations: Vec<u32>,
}

impl BoundCheck {
    pub fn sandwich_ok(&self) -> bool {
        self.sandwich_violations.is_empty()
    }

    pub fn floor_ok(&self) -> bool {
        self.floor_violations.is_empty()
    }
}

/// Verifies, per reported item, the two-sided frequency envelope implied by
/// the report's confidence radius, and that nothing at or below the
/// `(phi - eps) n` floor was reported. `eps` is the tolerance achieved by
/// the run's `(k, rounds)` pair. The envelope is treated as closed so the
/// fully converged case, where the estimate equals the exact count, passes.
pub fn bound_check(
    report: &FrequentReport,
    truth: &GroundTruth,
    k: usize,
    eps: f64,
) -> BoundCheck {
    let es = report.eps_star;
    let n = truth.n as f64;
    let floor = (truth.phi - eps) * n;
    let mut check = BoundCheck::default();
    for &(item, estimate) in &report.entries {
        let exact = truth.count(item) as f64;
        let lower = (1.0 - es) / (1.0 + es) * exact;
        let upper = (1.0 + es) / (1.0 - es) * (exact + n / k as f64);
        if !(estimate >= lower && estimate <= upper) {
            check.sandwich_violations.push(item);
        }
        if exact <= floor {
            check.floor_violations.push(item);
        }
    }
    check
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::workload::exact_frequencies;

    fn report_of(entries: Vec<(u32, f64)>, eps_star: f64) -> FrequentReport {
        FrequentReport {
            entries,
            threshold: 0.0,
            eps_star,
            p_est: 1.0,
        }
    }

    #[test]
    fn exact_report_scores_perfectly() {
        let truth = exact_frequencies(&[1, 1, 1, 2, 2, 3], 0.4);
        assert_eq!(truth.frequent.len(), 1);
        let metrics = score(&report_of(vec![(1, 3.0)], 0.0), &truth);
        assert_eq!(
            metrics,
            RunMetrics {
                recall: 1.0,
                precision: 1.0,
                are: 0.0
            }
        );
    }

    #[test]
    fn partial_recall() {
        let truth = exact_frequencies(&[1, 1, 1, 2, 2, 2], 0.25);
        assert_eq!(truth.frequent.len(), 2);
        let metrics = score(&report_of(vec![(1, 3.0)], 0.0), &truth);
        assert_eq!(metrics.recall, 0.5);
        assert_eq!(metrics.precision, 1.0);
    }

    #[test]
    fn empty_report_and_empty_truth() {
        let truth = exact_frequencies(&[1, 2, 3], 0.9);
        assert!(truth.frequent.is_empty());
        let metrics = score(&report_of(vec![], 0.0), &truth);
        assert_eq!(metrics.recall, 1.0);
        assert_eq!(metrics.precision, 1.0);
        assert_eq!(metrics.are, 0.0);
    }

    #[test]
    fn are_averages_relative_errors() {
        let truth = exact_frequencies(&[1, 1, 1, 1, 2, 2], 0.1);
        // Item 1 estimated 5 (exact 4): rel 0.25. Item 2 exact: rel 0.
        let metrics = score(&report_of(vec![(1, 5.0), (2, 2.0)], 0.0), &truth);
        assert!((metrics.are - 0.125).abs() < 1e-12);
    }

    #[test]
    fn score_ignores_entry_order() {
        let truth = exact_frequencies(&[1, 1, 2, 2, 3], 0.3);
        let a = score(&report_of(vec![(1, 2.0), (2, 2.0)], 0.0), &truth);
        let b = score(&report_of(vec![(2, 2.0), (1, 2.0)], 0.0), &truth);
        assert_eq!(a, b);
    }

    #[test]
    fn single_run_has_zero_halfwidth() {
        let agg = Aggregate::from_samples(&[0.7]);
        assert_eq!(agg.mean, 0.7);
        assert_eq!(agg.ci_halfwidth, 0.0);
    }

    #[test]
    fn identical_runs_have_zero_halfwidth() {
        let agg = Aggregate::from_samples(&[0.5; 10]);
        assert_eq!(agg.mean, 0.5);
        assert_eq!(agg.ci_halfwidth, 0.0);
    }

    #[test]
    fn alternating_runs_reference_halfwidth() {
        // Ten alternating 0/1 samples: mean 0.5, sample stddev 0.527046,
        // half-width 1.96 * s / sqrt(10) = 0.326667.
        let values: Vec<f64> = (0..10).map(|i| (i % 2) as f64).collect();
        let agg = Aggregate::from_samples(&values);
        assert_eq!(agg.mean, 0.5);
        assert!((agg.ci_halfwidth - 0.32666666666666666).abs() < 1e-12);
    }

    #[test]
    fn exact_estimates_pass_the_degenerate_envelope() {
        let truth = exact_frequencies(&[1, 1, 1, 1, 2], 0.5);
        // eps_star = 0: envelope is [f, f + n/k].
        let report = report_of(vec![(1, 4.0)], 0.0);
        let check = bound_check(&report, &truth, 5, 0.2);
        assert!(check.sandwich_ok() && check.floor_ok());
    }

    #[test]
    fn floor_boundary_is_strict() {
        // phi = 0.5, eps = 0.25, n = 8: floor is 2; an item with exactly 2
        // occurrences must not be reported.
        let truth = exact_frequencies(&[1, 1, 1, 1, 1, 1, 2, 2], 0.5);
        let report = report_of(vec![(2, 2.0)], 0.0);
        let check = bound_check(&report, &truth, 8, 0.25);
        assert_eq!(check.floor_violations, vec![2]);
    }

    #[test]
    fn sandwich_flags_out_of_envelope_estimates() {
        let truth = exact_frequencies(&[1, 1, 1, 1], 0.5);
        let report = report_of(vec![(1, 40.0)], 0.1);
        let check = bound_check(&report, &truth, 4, 0.2);
        assert_eq!(check.sandwich_violations, vec![1]);
    }
}
