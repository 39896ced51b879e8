//! Central finite differences for checking analytic gradients.
//!
//! The numeric side only ever calls the forward function, so it stays
//! independent of the backward code it is used to check.

use crate::params::{GradStore, ParamStore};
use crate::Result;

/// Denominator floor for relative error, so exact zeros compare by absolute
/// difference.
pub const REL_FLOOR: f64 = 1e-6;

pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(REL_FLOOR)
}

#[derive(Clone, Debug, Default)]
pub struct GradCheckReport {
    pub max_rel_err: f64,
    /// Parameter name and flat index of the worst coordinate.
    pub worst: Option<(String, usize)>,
    pub checked: usize,
}

impl GradCheckReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.max_rel_err < tol
    }

    pub fn merge(&mut self, other: GradCheckReport) {
        if other.max_rel_err > self.max_rel_err || self.worst.is_none() {
            self.max_rel_err = self.max_rel_err.max(other.max_rel_err);
            self.worst = other.worst.or(self.worst.take());
        }
        self.checked += other.checked;
    }
}

/// Compares `analytic` with `(f(p + h) − f(p − h)) / 2h` for every scalar
/// of every parameter that has an analytic gradient.
pub fn check_store<F>(store: &ParamStore, analytic: &GradStore, step: f64, mut f: F) -> Result<GradCheckReport>
where
    F: FnMut(&ParamStore) -> Result<f64>,
{
    let mut probe = store.clone();
    let mut report = GradCheckReport::default();
    for id in store.ids() {
        let Some(g) = analytic.get(id) else { continue };
        for k in 0..g.numel() {
            let orig = store.get(id).data()[k];
            probe.get_mut(id).data_mut()[k] = orig + step;
            let up = f(&probe)?;
            probe.get_mut(id).data_mut()[k] = orig - step;
            let down = f(&probe)?;
            probe.get_mut(id).data_mut()[k] = orig;
            let numeric = (up - down) / (2.0 * step);
            let err = relative_error(g.data()[k], numeric);
            if err > report.max_rel_err || report.worst.is_none() {
                report.max_rel_err = report.max_rel_err.max(err);
                report.worst = Some((store.name(id).to_string(), k));
            }
            report.checked += 1;
        }
    }
    Ok(report)
}
