//! Regression reports shared by every verifier.

use std::fmt::Write as _;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    /// Every measured quantity vanished; nothing to fit.
    DegeneratePass,
}

impl Verdict {
    pub fn passed(self) -> bool {
        !matches!(self, Verdict::Fail)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::DegeneratePass => "PASS(degenerate)",
        }
    }
}

/// Per-abscissa measurements (ordinate is log₂ of the measured quantity), the
/// least-squares line through them, and bound-check bookkeeping.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbeReport {
    pub label: String,
    pub abscissa: Vec<f64>,
    pub ordinate: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
    /// Largest LHS/RHS ratio for bound checks (NaN when not applicable).
    pub max_ratio: f64,
    /// Same ratio after one refinement doubling, when measured.
    pub refined_max_ratio: Option<f64>,
    /// Upper bound the slope was compared against, when applicable.
    pub slope_bound: Option<f64>,
    /// Set when the parameters lie where no estimate is claimed.
    pub no_guarantee: bool,
    pub verdict: Verdict,
    pub notes: Vec<String>,
}

/// Least-squares fit `y ≈ slope·x + intercept` over the finite points.
/// Returns `None` with fewer than two usable points.
pub fn fit_line(x: &[f64], y: &[f64]) -> Option<(f64, f64)> {
    let pts: Vec<(f64, f64)> = x.iter().zip(y).filter(|(a, b)| a.is_finite() && b.is_finite()).map(|(a, b)| (*a, *b)).collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}

impl ProbeReport {
    /// Report from raw positive measurements `values[i]` at `abscissa[i]`;
    /// zeros become `-∞` ordinates and are left out of the fit.
    pub fn from_values(label: impl Into<String>, abscissa: Vec<f64>, values: &[f64]) -> Self {
        let ordinate: Vec<f64> = values.iter().map(|v| v.log2()).collect();
        let (slope, intercept) = fit_line(&abscissa, &ordinate).unwrap_or((f64::NAN, f64::NAN));
        let degenerate = values.iter().all(|&v| v == 0.0);
        ProbeReport {
            label: label.into(),
            abscissa,
            ordinate,
            slope,
            intercept,
            max_ratio: f64::NAN,
            refined_max_ratio: None,
            slope_bound: None,
            no_guarantee: false,
            verdict: if degenerate { Verdict::DegeneratePass } else { Verdict::Pass },
            notes: vec![],
        }
    }

    /// Marks the report FAIL unless `slope <= bound` (degenerate reports
    /// stay degenerate).
    pub fn check_slope_at_most(mut self, bound: f64) -> Self {
        self.slope_bound = Some(bound);
        if self.verdict != Verdict::DegeneratePass && !(self.slope <= bound) {
            self.verdict = Verdict::Fail;
        }
        self
    }

    /// Relative growth of the max ratio under refinement.
    pub fn growth(&self) -> Option<f64> {
        self.refined_max_ratio.map(|r| {
            if self.max_ratio == 0.0 && r == 0.0 {
                0.0
            } else {
                r / self.max_ratio - 1.0
            }
        })
    }

    /// Marks the report FAIL if the ratio is not finite or grows by more than
    /// `tol` under refinement.
    pub fn check_growth(mut self, tol: f64) -> Self {
        let bad_ratio = !(self.max_ratio.is_finite() || self.max_ratio.is_nan() && self.verdict == Verdict::DegeneratePass);
        let bad_growth = self.growth().is_some_and(|g| !(g < tol));
        if self.verdict != Verdict::DegeneratePass && (bad_ratio || bad_growth) {
            self.verdict = Verdict::Fail;
        }
        self
    }

    pub fn fitted(&self) -> Vec<f64> {
        self.abscissa.iter().map(|x| self.slope * x + self.intercept).collect()
    }

    /// One-line summary.
    pub fn verdict_line(&self) -> String {
        let mut s = format!(
            "verdict={} label={} slope={:.6} intercept={:.6} max_ratio={:.6e}",
            self.verdict.as_str(),
            self.label,
            self.slope,
            self.intercept,
            self.max_ratio
        );
        if let Some(b) = self.slope_bound {
            let _ = write!(s, " slope_bound={b:.6}");
        }
        if let Some(g) = self.growth() {
            let _ = write!(s, " refinement_growth={g:.6e}");
        }
        if self.no_guarantee {
            s.push_str(" regime=no-guarantee");
        }
        s
    }

    /// CSV body: `abscissa,ordinate,fitted,residual` rows, preceded by an
    /// optional hash comment and followed by a `# verdict` comment line.
    pub fn to_csv(&self, config_hash: Option<&str>) -> String {
        let mut out = String::new();
        if let Some(h) = config_hash {
            let _ = writeln!(out, "# config_hash={h}");
        }
        out.push_str("abscissa,ordinate,fitted,residual\n");
        for ((x, y), f) in self.abscissa.iter().zip(&self.ordinate).zip(self.fitted()) {
            let _ = writeln!(out, "{x:?},{y:?},{f:?},{:?}", y - f);
        }
        for n in &self.notes {
            let _ = writeln!(out, "# note: {n}");
        }
        let _ = writeln!(out, "# {}", self.verdict_line());
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fit_recovers_line() {
        let x: Vec<f64> = (0..10).map(f64::from).collect();
        let y: Vec<f64> = x.iter().map(|v| -0.5 * v + 3.0).collect();
        let (s, i) = fit_line(&x, &y).unwrap();
        assert!((s + 0.5).abs() < 1e-14 && (i - 3.0).abs() < 1e-13);
    }

    #[test]
    fn zeros_are_degenerate() {
        let r = ProbeReport::from_values("z", vec![1.0, 2.0], &[0.0, 0.0]).check_slope_at_most(-0.1);
        assert_eq!(r.verdict, Verdict::DegeneratePass);
    }
}
