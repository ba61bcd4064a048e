//! One-dimensional parameter grids for `scan`.

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    start: f64,
    stop: f64,
    count: usize,
    log: bool,
}

impl GridSpec {
    pub fn new(start: f64, stop: f64, count: usize, log: bool) -> Result<Self, CliError> {
        if count == 0 {
            return Err(CliError::domain("grid count must be >= 1"));
        }
        if !start.is_finite() || !stop.is_finite() {
            return Err(CliError::domain(format!(
                "grid bounds must be finite, got [{start}, {stop}]"
            )));
        }
        if start > stop {
            return Err(CliError::domain(format!(
                "grid start {start} exceeds stop {stop}"
            )));
        }
        if log && !(start > 0.0) {
            return Err(CliError::domain(format!(
                "log spacing needs start > 0, got {start}"
            )));
        }
        Ok(GridSpec {
            start,
            stop,
            count,
            log,
        })
    }

    /// A single point.
    pub fn point(x: f64) -> Result<Self, CliError> {
        Self::new(x, x, 1, false)
    }

    /// The grid points; both endpoints are reproduced exactly.
    pub fn points(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        let last = (self.count - 1) as f64;
        let mut pts: Vec<f64> = (0..self.count)
            .map(|i| {
                let t = i as f64 / last;
                if self.log {
                    (self.start.ln() + t * (self.stop.ln() - self.start.ln())).exp()
                } else {
                    self.start + t * (self.stop - self.start)
                }
            })
            .collect();
        pts[0] = self.start;
        pts[self.count - 1] = self.stop;
        pts
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(GridSpec::new(1.0, 2.0, 0, false).is_err());
        assert!(GridSpec::new(2.0, 1.0, 3, false).is_err());
        assert_eq!(
            GridSpec::new(0.0, 1.0, 3, true).unwrap_err().code,
            crate::exit::DOMAIN
        );
        assert!(GridSpec::new(0.0, 1.0, 3, false).is_ok());
    }

    #[test]
    fn linear_and_log_points() {
        assert_eq!(
            GridSpec::new(0.0, 1.0, 5, false).unwrap().points(),
            vec![0.0, 0.25, 0.5, 0.75, 1.0]
        );
        let g = GridSpec::new(2.0, 200.0, 3, true).unwrap().points();
        assert_eq!(g[0], 2.0);
        assert!((g[1] - 20.0).abs() < 1e-12);
        assert_eq!(g[2], 200.0);
        assert_eq!(GridSpec::point(7.0).unwrap().points(), vec![7.0]);
    }
}
