use crate::adapt::{adaptive_loop, AdaptConfig, RunHistory};
use crate::error::{DpgError, Result};
use crate::forms::NormVariant;
use crate::problems::ProblemSpec;

/// Two adaptive runs of one problem under different test norms.
#[derive(Debug, Clone)]
pub struct NormComparison {
    pub first: RunHistory,
    pub second: RunHistory,
    /// For each record of `first`, the index of the record of `second` with
    /// the nearest DOF count.
    pub aligned: Vec<usize>,
    /// Final `‖u - u_h‖` of `first` over that of `second`.
    pub final_error_ratio: f64,
}

/// Runs the adaptive loop under `first` and `second`, each driven by its own
/// estimator.
pub fn compare_norms(
    problem: &ProblemSpec,
    config: &AdaptConfig,
    first: NormVariant,
    second: NormVariant,
) -> Result<NormComparison> {
    let run = |norm: NormVariant| {
        adaptive_loop(problem, &AdaptConfig { norm, ..*config })
            .map_err(|e| DpgError::Labeled { label: format!("{norm} run"), source: Box::new(e) })
    };
    let a = run(first)?;
    let b = if first == second { a.clone() } else { run(second)? };
    let aligned = a
        .records
        .iter()
        .map(|r| {
            (0..b.records.len())
                .min_by_key(|&k| b.records[k].ndof.abs_diff(r.ndof))
                .unwrap_or(0)
        })
        .collect();
    let final_error_ratio = match (a.last(), b.last()) {
        (Some(x), Some(y)) => x.l2_u / y.l2_u,
        _ => f64::NAN,
    };
    Ok(NormComparison { first: a, second: b, aligned, final_error_ratio })
}
