use serde::{Deserialize, Serialize};

use crate::pattern::PatternError;
use crate::weight::WeightMatrix;

/// Two-plateau weight `w = (f·1_{d/2}, y·1_{d/2})` with `f = 2√m/d − y`,
/// so that `‖w‖₁ = √m` and `W = w wᵀ` has total mass `m`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightFamilySpec {
    pub d: usize,
    pub m_target: f64,
    pub y: f64,
}

impl WeightFamilySpec {
    pub fn new(d: usize, m_target: f64, y: f64) -> Self {
        Self { d, m_target, y }
    }

    /// Height of the first plateau.
    pub fn f(&self) -> f64 {
        2.0 * self.m_target.sqrt() / self.d as f64 - self.y
    }

    /// The `y` that makes both plateaus equal.
    pub fn flat_y(d: usize, m_target: f64) -> f64 {
        m_target.sqrt() / d as f64
    }

    /// Whether `m ∈ [4d log d, d²/4]` and `y ∈ [√(2/d), √(log d / d)]`.
    /// Informational only; generation needs just `f, y ∈ (0, 1]`.
    pub fn in_recommended_range(&self) -> bool {
        let d = self.d as f64;
        let m_ok = self.m_target >= 4.0 * d * d.ln() && self.m_target <= d * d / 4.0;
        let y_ok = self.y >= (2.0 / d).sqrt() && self.y <= (d.ln() / d).sqrt();
        m_ok && y_ok
    }
}

pub fn spiky_vector(spec: &WeightFamilySpec) -> Result<Vec<f64>, PatternError> {
    if spec.d == 0 || spec.d % 2 != 0 {
        return Err(PatternError::Domain(format!("d must be positive and even, got {}", spec.d)));
    }
    if !(spec.m_target > 0.0 && spec.m_target.is_finite()) {
        return Err(PatternError::Domain(format!("m must be positive, got {}", spec.m_target)));
    }
    let f = spec.f();
    for (name, v) in [("f", f), ("y", spec.y)] {
        if !(v > 0.0 && v <= 1.0) {
            return Err(PatternError::Domain(format!(
                "{name} = {v} outside (0, 1] for d = {}, m = {}, y = {}",
                spec.d, spec.m_target, spec.y
            )));
        }
    }
    let half = spec.d / 2;
    Ok(std::iter::repeat_n(f, half).chain(std::iter::repeat_n(spec.y, half)).collect())
}

/// `W = w wᵀ` for the two-plateau `w`.
pub fn spiky_weight(spec: &WeightFamilySpec) -> Result<WeightMatrix, PatternError> {
    let w = spiky_vector(spec)?;
    WeightMatrix::new(w.clone(), w).map_err(|e| PatternError::Domain(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_choice_gives_constant_vector() {
        let (d, m) = (100, 900.0);
        let spec = WeightFamilySpec::new(d, m, WeightFamilySpec::flat_y(d, m));
        let w = spiky_vector(&spec).unwrap();
        assert!(w.iter().all(|&x| (x - 0.3).abs() < 1e-15));
    }

    #[test]
    fn plateaus_at_d1000() {
        let spec = WeightFamilySpec::new(1000, 77045.0, 0.045);
        let w = spiky_vector(&spec).unwrap();
        let f = 2.0 * 77045f64.sqrt() / 1000.0 - 0.045;
        assert!(w[..500].iter().all(|&x| x == f));
        assert!(w[500..].iter().all(|&x| x == 0.045));
        assert!((f - 0.5101).abs() < 1e-3);
        assert!(spec.in_recommended_range());
        let total = spiky_weight(&spec).unwrap().total();
        assert!((total - 77045.0).abs() <= 1e-9 * 77045.0);
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(spiky_vector(&WeightFamilySpec::new(11, 100.0, 0.1)).is_err());
        // f would exceed 1
        assert!(spiky_vector(&WeightFamilySpec::new(10, 100.0, 0.1)).is_err());
        // f would be negative
        assert!(spiky_vector(&WeightFamilySpec::new(10, 1.0, 0.5)).is_err());
        assert!(spiky_vector(&WeightFamilySpec::new(10, 4.0, 0.0)).is_err());
    }
}
