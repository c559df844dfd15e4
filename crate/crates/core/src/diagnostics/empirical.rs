use crate::error::{Error, Result};

/// Average, median and population standard deviation of terminal values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TerminalStats {
    pub avg: f64,
    pub median: f64,
    pub sd: f64,
}

pub fn terminal_stats(values: &[f64]) -> Result<TerminalStats> {
    if values.is_empty() {
        return Err(Error::EmptyRunSet);
    }
    let n = values.len() as f64;
    let avg = values.iter().sum::<f64>() / n;
    let sd = (values.iter().map(|v| (v - avg).powi(2)).sum::<f64>() / n).sqrt();
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mid = sorted.len() / 2;
    let median = if sorted.len() % 2 == 1 {
        sorted[mid]
    } else {
        0.5 * (sorted[mid - 1] + sorted[mid])
    };
    Ok(TerminalStats { avg, median, sd })
}

/// `p_hat[i][j]`: fraction of runs whose best value at `iterations[i]` is at
/// least `epsilons[j]` above the known minimum.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalProbabilityCurve {
    pub epsilons: Vec<f64>,
    pub iterations: Vec<usize>,
    pub p_hat: Vec<Vec<f64>>,
    pub runs: usize,
    /// Statistics of `best − U*` at the last recorded iteration.
    pub terminal: TerminalStats,
}

/// `traces[m][i]` is run `m`'s running best value at `iterations[i]`.
pub fn empirical_probability(
    traces: &[Vec<f64>],
    iterations: &[usize],
    u_star: f64,
    epsilons: &[f64],
) -> Result<EmpiricalProbabilityCurve> {
    if traces.is_empty() {
        return Err(Error::EmptyRunSet);
    }
    if iterations.is_empty() {
        return Err(Error::invalid("iterations", "need at least one recorded iteration"));
    }
    for trace in traces {
        if trace.len() != iterations.len() {
            return Err(Error::DimensionMismatch {
                expected: iterations.len(),
                got: trace.len(),
            });
        }
    }
    if let Some(&eps) = epsilons.iter().find(|e| !(e.is_finite() && **e >= 0.0)) {
        return Err(Error::invalid("epsilons", format!("{eps} is not a non-negative number")));
    }
    let m = traces.len() as f64;
    let p_hat = (0..iterations.len())
        .map(|i| {
            epsilons
                .iter()
                .map(|&eps| traces.iter().filter(|t| t[i] - u_star >= eps).count() as f64 / m)
                .collect()
        })
        .collect();
    let last = iterations.len() - 1;
    let gaps: Vec<f64> = traces.iter().map(|t| t[last] - u_star).collect();
    Ok(EmpiricalProbabilityCurve {
        epsilons: epsilons.to_vec(),
        iterations: iterations.to_vec(),
        p_hat,
        runs: traces.len(),
        terminal: terminal_stats(&gaps)?,
    })
}
