use crate::adapt::RunHistory;

/// `log(e1/e2) / log(h1/h2)`, or `None` unless both errors are positive and
/// `h1 > h2 > 0`.
pub fn observed_rate(e1: f64, e2: f64, h1: f64, h2: f64) -> Option<f64> {
    let ok = e1 > 0.0 && e2 > 0.0 && h2 > 0.0 && h1 > h2 && e1.is_finite() && e2.is_finite();
    ok.then(|| (e1 / e2).ln() / (h1 / h2).ln())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateRow {
    pub dof: [usize; 2],
    pub error: [f64; 2],
    pub rate: Option<f64>,
}

/// Rates between consecutive cycles of a history.
#[derive(Debug, Clone, PartialEq)]
pub struct RateTable {
    pub rows: Vec<RateRow>,
}

impl RateTable {
    /// Rates of `‖u - u_h‖` with `h = ncells^{-1/2}`, the mesh size on uniform
    /// refinement.
    pub fn by_cells(history: &RunHistory) -> Self {
        Self::build(history, |r| (r.ncells as f64).powf(-0.5))
    }

    /// Rates of `‖u - u_h‖` with `h = ndof^{-1/2}`.
    pub fn by_dofs(history: &RunHistory) -> Self {
        Self::build(history, |r| (r.ndof as f64).powf(-0.5))
    }

    fn build(history: &RunHistory, h: impl Fn(&crate::adapt::CycleRecord) -> f64) -> Self {
        let rows = history
            .records
            .windows(2)
            .map(|w| RateRow {
                dof: [w[0].ndof, w[1].ndof],
                error: [w[0].l2_u, w[1].l2_u],
                rate: observed_rate(w[0].l2_u, w[1].l2_u, h(&w[0]), h(&w[1])),
            })
            .collect();
        RateTable { rows }
    }

    /// Rate between the last two cycles.
    pub fn last_rate(&self) -> Option<f64> {
        self.rows.last().and_then(|r| r.rate)
    }
}
