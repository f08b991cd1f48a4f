//! Synthesis cost measurements.

use std::time::{Duration, Instant};

use plc_enforce_core::{
    size, synthesize, Alphabet, ControllerTerm, SynthesisError, SynthesisReport,
};

use crate::gen::chain;

/// A synthesis result with its wall-clock time.
#[derive(Clone, Debug)]
pub struct TimedSynthesis {
    pub report: SynthesisReport,
    pub elapsed: Duration,
}

pub fn synthesize_timed(
    p: &ControllerTerm,
    alphabet: &Alphabet,
) -> Result<TimedSynthesis, SynthesisError> {
    let start = Instant::now();
    let report = synthesize(p, alphabet)?;
    Ok(TimedSynthesis {
        report,
        elapsed: start.elapsed(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ComplexityRow {
    /// Size of the controller.
    pub n: usize,
    /// Branches of the synthesized automaton once suppressions are expanded.
    pub branches: usize,
    /// Fastest of the repeated synthesize-and-expand runs.
    pub elapsed: Duration,
}

/// Synthesize and materialize every controller of `corpus`, `repeats` times.
pub fn measure_complexity(
    corpus: &[(ControllerTerm, Alphabet)],
    repeats: usize,
) -> Result<Vec<ComplexityRow>, SynthesisError> {
    corpus
        .iter()
        .map(|(p, alphabet)| {
            let mut best = Duration::MAX;
            let mut branches = 0;
            for _ in 0..repeats.max(1) {
                let start = Instant::now();
                let report = synthesize(p, alphabet)?;
                let expanded = report.automaton.expand(alphabet);
                best = best.min(start.elapsed());
                branches = expanded.branch_count(alphabet);
                std::hint::black_box(expanded);
            }
            Ok(ComplexityRow {
                n: size(p),
                branches,
                elapsed: best,
            })
        })
        .collect()
}

/// Chain controllers with sizes `sizes`; each size must be at least 3.
pub fn ladder(sizes: &[usize]) -> Vec<(ControllerTerm, Alphabet)> {
    sizes
        .iter()
        .map(|&n| chain(n.saturating_sub(2).max(1)))
        .collect()
}

/// Least-squares `c` for `branches = c * n^2`.
pub fn fit_quadratic(rows: &[ComplexityRow]) -> f64 {
    let (num, den) = rows.iter().fold((0.0, 0.0), |(num, den), r| {
        let n2 = (r.n * r.n) as f64;
        (num + r.branches as f64 * n2, den + n2 * n2)
    });
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Largest relative deviation of `branches` from `c * n^2`.
pub fn max_relative_deviation(rows: &[ComplexityRow], c: f64) -> f64 {
    rows.iter()
        .map(|r| {
            let model = c * (r.n * r.n) as f64;
            ((r.branches as f64 - model) / model).abs()
        })
        .fold(0.0, f64::max)
}

/// Ordinary least-squares slope of `ln elapsed` against `ln n`.
pub fn loglog_slope(rows: &[ComplexityRow]) -> f64 {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .map(|r| ((r.n as f64).ln(), r.elapsed.as_secs_f64().max(1e-9).ln()))
        .collect();
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_corpus_gives_empty_table() {
        assert!(measure_complexity(&[], 1).unwrap().is_empty());
    }

    #[test]
    fn tick_end_branch_count() {
        // tick and end states: one allowed branch plus one suppression per
        // actuator and channel action each
        let a = Alphabet::new(["s"], ["a", "b"], ["c"]);
        let (p, _) = chain(0);
        let r = synthesize(&p, &a).unwrap();
        assert_eq!(
            r.automaton.branch_count(&a),
            2 * (a.suppressible().len() + 1)
        );
    }

    #[test]
    fn fit_recovers_exact_quadratic() {
        let rows: Vec<ComplexityRow> = [10usize, 20, 40]
            .iter()
            .map(|&n| ComplexityRow {
                n,
                branches: 3 * n * n,
                elapsed: Duration::from_nanos((n * n) as u64 * 100),
            })
            .collect();
        assert!((fit_quadratic(&rows) - 3.0).abs() < 1e-12);
        assert!(max_relative_deviation(&rows, 3.0) < 1e-12);
        assert!((loglog_slope(&rows) - 2.0).abs() < 1e-9);
    }
}
