use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Piecewise-constant encounter rate: `lambda(t) = lambda_k` on
/// `[start_k, start_{k+1})`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaSchedule {
    steps: Vec<(f64, f64)>,
}

impl LambdaSchedule {
    /// `steps` are `(start, lambda)` pairs; the first start must be 0 and
    /// starts must increase strictly.
    pub fn new(steps: Vec<(f64, f64)>) -> Result<Self> {
        match steps.first() {
            Some(&(0.0, _)) => {}
            _ => return Err(Error::Domain("schedule must start at t = 0".into())),
        }
        if steps.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::Domain("schedule breakpoints must increase".into()));
        }
        if let Some(&(_, l)) = steps
            .iter()
            .find(|(s, l)| !(s.is_finite() && l.is_finite() && *l >= 0.0))
        {
            return Err(Error::InvalidParameter {
                name: "lambda",
                value: l,
                constraint: "must be finite and >= 0",
            });
        }
        Ok(Self { steps })
    }

    pub fn constant(lambda: f64) -> Result<Self> {
        Self::new(vec![(0.0, lambda)])
    }

    pub fn at(&self, t: f64) -> f64 {
        let n = self.steps.partition_point(|&(s, _)| s <= t);
        self.steps[n.saturating_sub(1)].1
    }

    pub fn next_change_after(&self, t: f64) -> Option<f64> {
        self.steps.iter().map(|&(s, _)| s).find(|&s| s > t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lookup() {
        let s = LambdaSchedule::new(vec![(0.0, 1.0), (2.0, 5.0), (3.0, 0.5)]).unwrap();
        assert_eq!(s.at(0.0), 1.0);
        assert_eq!(s.at(1.999), 1.0);
        assert_eq!(s.at(2.0), 5.0);
        assert_eq!(s.at(10.0), 0.5);
        assert_eq!(s.next_change_after(0.0), Some(2.0));
        assert_eq!(s.next_change_after(2.0), Some(3.0));
        assert_eq!(s.next_change_after(3.0), None);
    }

    #[test]
    fn validation() {
        assert!(LambdaSchedule::new(vec![]).is_err());
        assert!(LambdaSchedule::new(vec![(1.0, 1.0)]).is_err());
        assert!(LambdaSchedule::new(vec![(0.0, 1.0), (0.0, 2.0)]).is_err());
        assert!(LambdaSchedule::new(vec![(0.0, -1.0)]).is_err());
        assert!(LambdaSchedule::constant(3.0).is_ok());
    }
}
