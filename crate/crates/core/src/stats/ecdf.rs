use super::{check_finite, StatError};

/// Right-continuous empirical distribution function of a finite sample.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCdf {
    sorted: Vec<f64>,
}

impl EmpiricalCdf {
    pub fn new(samples: &[f64]) -> Result<Self, StatError> {
        if samples.is_empty() {
            return Err(StatError::NoSamples);
        }
        check_finite(samples)?;
        let mut sorted = samples.to_vec();
        sorted.sort_by(f64::total_cmp);
        Ok(Self { sorted })
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn samples(&self) -> &[f64] {
        &self.sorted
    }

    /// `F(x) = #{samples <= x} / n`.
    pub fn eval(&self, x: f64) -> f64 {
        let below = self.sorted.partition_point(|&s| s <= x);
        below as f64 / self.sorted.len() as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_point_is_a_step() {
        let f = EmpiricalCdf::new(&[1.0]).unwrap();
        assert_eq!(f.eval(0.999), 0.0);
        assert_eq!(f.eval(1.0), 1.0);
        assert_eq!(f.eval(f64::INFINITY), 1.0);
        assert_eq!(f.eval(f64::NEG_INFINITY), 0.0);
    }

    #[test]
    fn sorts_and_counts() {
        let f = EmpiricalCdf::new(&[3.0, 1.0, 2.0]).unwrap();
        assert_eq!(f.samples(), &[1.0, 2.0, 3.0]);
        assert!((f.eval(2.0) - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn delay_example() {
        let f = EmpiricalCdf::new(&[0.2, 0.4, 0.1]).unwrap();
        assert!((f.eval(0.3) - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_empty_and_nan() {
        assert_eq!(EmpiricalCdf::new(&[]), Err(StatError::NoSamples));
        assert_eq!(EmpiricalCdf::new(&[1.0, f64::NAN]), Err(StatError::NonFinite(1)));
    }
}
