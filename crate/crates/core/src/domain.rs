//! Axis-aligned box domains.

use crate::search::SearchError;

/// `lower_i < upper_i`, all bounds finite.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxDomain {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl BoxDomain {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self, SearchError> {
        if lower.len() != upper.len() || lower.is_empty() {
            return Err(SearchError::InvalidDomain(format!(
                "bounds have lengths {} and {}",
                lower.len(),
                upper.len()
            )));
        }
        for (i, (&lo, &hi)) in lower.iter().zip(&upper).enumerate() {
            if !lo.is_finite() || !hi.is_finite() {
                return Err(SearchError::InvalidDomain(format!(
                    "coordinate {i} has a non-finite bound"
                )));
            }
            if lo >= hi {
                return Err(SearchError::InvalidDomain(format!(
                    "coordinate {i} has empty range [{lo}, {hi}]"
                )));
            }
        }
        Ok(Self { lower, upper })
    }

    /// `[lo, hi]^n`.
    pub fn cube(n: usize, lo: f64, hi: f64) -> Result<Self, SearchError> {
        Self::new(vec![lo; n], vec![hi; n])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn range(&self, i: usize) -> f64 {
        self.upper[i] - self.lower[i]
    }

    /// Length of the main diagonal.
    pub fn diameter(&self) -> f64 {
        (0..self.dim())
            .map(|i| self.range(i).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(v, (lo, hi))| *v >= *lo && *v <= *hi)
    }

    pub fn clamp(&self, x: &mut [f64]) {
        for ((v, lo), hi) in x.iter_mut().zip(&self.lower).zip(&self.upper) {
            *v = v.clamp(*lo, *hi);
        }
    }

    /// The sub-box over the coordinates in `span`.
    pub fn restrict(&self, span: std::ops::Range<usize>) -> BoxDomain {
        BoxDomain {
            lower: self.lower[span.clone()].to_vec(),
            upper: self.upper[span].to_vec(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diameter_of_square() {
        let d = BoxDomain::cube(2, 0.0, 10.0).unwrap();
        assert!((d.diameter() - 200f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn rejects_inverted_and_infinite_bounds() {
        assert!(BoxDomain::new(vec![1.0], vec![1.0]).is_err());
        assert!(BoxDomain::new(vec![0.0], vec![f64::INFINITY]).is_err());
        assert!(BoxDomain::new(vec![0.0, 0.0], vec![1.0]).is_err());
    }

    #[test]
    fn clamp_projects_onto_box() {
        let d = BoxDomain::cube(3, -1.0, 1.0).unwrap();
        let mut x = [2.0, -3.0, 0.5];
        d.clamp(&mut x);
        assert_eq!(x, [1.0, -1.0, 0.5]);
        assert!(d.contains(&x));
    }
}
