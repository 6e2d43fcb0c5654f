use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Numerical thresholds shared by every module.
///
/// `tol_rank`, `tol_psd`, `tol_det` and `tol_gap` are relative: they are
/// scaled by `sigma_1` (or `sigma_1^2` for quadratic quantities) at the
/// point of use.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TolerancePolicy {
    pub tol_orth: f64,
    pub tol_recon: f64,
    pub tol_rank: f64,
    pub tol_psd: f64,
    pub tol_det: f64,
    pub tol_gap: f64,
}

impl Default for TolerancePolicy {
    fn default() -> Self {
        Self {
            tol_orth: 1e-10,
            tol_recon: 1e-10,
            tol_rank: 1e-10,
            tol_psd: 1e-9,
            tol_det: 1e-9,
            tol_gap: 1e-8,
        }
    }
}

impl TolerancePolicy {
    pub fn validated(self) -> Result<Self> {
        let fields = [
            ("tol_orth", self.tol_orth),
            ("tol_recon", self.tol_recon),
            ("tol_rank", self.tol_rank),
            ("tol_psd", self.tol_psd),
            ("tol_det", self.tol_det),
            ("tol_gap", self.tol_gap),
        ];
        for (name, value) in fields {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "{name} must be finite and positive, got {value}"
                )));
            }
        }
        Ok(self)
    }
}
