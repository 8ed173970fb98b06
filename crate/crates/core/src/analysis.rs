//! Polynomial fits of `p_L(p)` and the crossing with the unencoded rate `2p/3`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::runner::CurvePoint;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitKind {
    /// `a p + b p²`.
    LinearPlusQuadratic,
    /// `b p²`, or `b p² + c p³` with the cubic term enabled.
    QuadraticLeading { cubic: bool },
}

impl FitKind {
    /// Exponents of the fitted monomials.
    pub fn powers(self) -> &'static [i32] {
        match self {
            FitKind::LinearPlusQuadratic => &[1, 2],
            FitKind::QuadraticLeading { cubic: false } => &[2],
            FitKind::QuadraticLeading { cubic: true } => &[2, 3],
        }
    }

    pub fn is_fault_tolerant_form(self) -> bool {
        matches!(self, FitKind::QuadraticLeading { .. })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitPoint {
    pub p: f64,
    pub p_l: f64,
    pub stderr: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitModel {
    pub kind: FitKind,
    /// Coefficients of [`FitKind::powers`], in order.
    pub coefficients: Vec<f64>,
    /// Covariance of the coefficients, row-major, inflated by the reduced
    /// chi-square when that exceeds one (model misfit beyond the error bars).
    pub covariance: Vec<f64>,
    /// `χ² / (n - m)`; zero for an exactly determined fit.
    pub reduced_chi2: f64,
    /// Weighted residual norm `sqrt(Σ ((y - f)/σ)²)`.
    pub residual_norm: f64,
    pub points: usize,
}

impl FitModel {
    pub fn eval(&self, p: f64) -> f64 {
        self.kind.powers().iter().zip(&self.coefficients).map(|(&k, c)| c * p.powi(k)).sum()
    }

    /// Coefficient of `p^power`, zero if not fitted.
    pub fn coefficient(&self, power: i32) -> f64 {
        self.kind
            .powers()
            .iter()
            .position(|&k| k == power)
            .map_or(0.0, |i| self.coefficients[i])
    }

    /// Standard error of the `p^power` coefficient.
    pub fn coefficient_stderr(&self, power: i32) -> f64 {
        let m = self.coefficients.len();
        self.kind
            .powers()
            .iter()
            .position(|&k| k == power)
            .map_or(0.0, |i| self.covariance[i * m + i].max(0.0).sqrt())
    }
}

/// Weighted least squares of `points` on the monomials of `kind`, with
/// weights `1/stderr²`.
pub fn fit(points: &[FitPoint], kind: FitKind) -> Result<FitModel> {
    let powers = kind.powers();
    let m = powers.len();
    if points.len() < m {
        return Err(Error::Fit(format!("{} points cannot determine {m} coefficients", points.len())));
    }
    if points.iter().all(|pt| pt.p_l == 0.0) {
        return Err(Error::Fit("all logical error rates are zero".into()));
    }
    if let Some(pt) = points.iter().find(|pt| pt.stderr.is_nan() || pt.stderr <= 0.0 || !pt.stderr.is_finite()) {
        return Err(Error::Fit(format!("non-positive standard error at p = {}", pt.p)));
    }
    let n = points.len();
    let a = DMatrix::from_fn(n, m, |i, j| points[i].p.powi(powers[j]) / points[i].stderr);
    let y = DVector::from_fn(n, |i, _| points[i].p_l / points[i].stderr);
    // Scale columns so the normal equations stay well conditioned.
    let scale = DVector::from_fn(m, |j, _| a.column(j).norm());
    if scale.iter().any(|&s| s == 0.0) {
        return Err(Error::Fit("degenerate design matrix".into()));
    }
    let a_s = DMatrix::from_fn(n, m, |i, j| a[(i, j)] / scale[j]);
    let normal = a_s.transpose() * &a_s;
    let inv = normal
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Fit("singular normal equations".into()))?;
    let beta_s = &inv * (a_s.transpose() * &y);
    let coefficients: Vec<f64> = (0..m).map(|j| beta_s[j] / scale[j]).collect();
    let fitted = DVector::from_fn(n, |i, _| {
        powers.iter().zip(&coefficients).map(|(&k, c)| c * points[i].p.powi(k)).sum::<f64>() / points[i].stderr
    });
    let residual_norm = (y - fitted).norm();
    let reduced_chi2 = if n > m { residual_norm * residual_norm / (n - m) as f64 } else { 0.0 };
    let inflate = reduced_chi2.max(1.0);
    let mut covariance = vec![0.0; m * m];
    for i in 0..m {
        for j in 0..m {
            covariance[i * m + j] = inflate * inv[(i, j)] / (scale[i] * scale[j]);
        }
    }
    Ok(FitModel { kind, coefficients, covariance, reduced_chi2, residual_norm, points: n })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PseudothresholdResult {
    /// Positive crossing of the fit with `2p/3`, if one exists.
    pub p_star: Option<f64>,
    /// First-order interval `p* ± σ` from the coefficient covariance.
    pub interval: Option<(f64, f64)>,
    /// `true` for quadratic-leading fits; a linear-leading crossing is not a
    /// pseudothreshold.
    pub is_pseudothreshold: bool,
    pub label: String,
}

/// The unencoded single-qubit failure rate under depolarizing noise.
pub fn unencoded_rate(p: f64) -> f64 {
    2.0 * p / 3.0
}

/// Solves `f(p)/p = 2/3` for the smallest positive root.
pub fn pseudothreshold(f: &FitModel) -> Result<PseudothresholdResult> {
    // g(p) = f(p)/p - 2/3 = a + b p + c p² - 2/3
    let a = f.coefficient(1);
    let b = f.coefficient(2);
    let c = f.coefficient(3);
    let target = 2.0 / 3.0;
    let g = |p: f64| a + b * p + c * p * p - target;
    let dg = |p: f64| b + 2.0 * c * p;
    let root = if c == 0.0 {
        (b != 0.0).then(|| (target - a) / b).filter(|&p| p > 0.0)
    } else {
        let disc = b * b - 4.0 * c * (a - target);
        if disc < 0.0 {
            None
        } else {
            let sq = disc.sqrt();
            // numerically stable pair of roots
            let q = -0.5 * (b + b.signum() * sq);
            let mut roots = vec![];
            if q != 0.0 {
                roots.push(q / c);
                roots.push((a - target) / q);
            }
            roots.into_iter().filter(|&p| p > 0.0).min_by(f64::total_cmp)
        }
    };
    let is_pt = f.kind.is_fault_tolerant_form();
    let Some(mut p) = root else {
        return Ok(PseudothresholdResult {
            p_star: None,
            interval: None,
            is_pseudothreshold: false,
            label: "no pseudothreshold".into(),
        });
    };
    for _ in 0..8 {
        let d = dg(p);
        if d == 0.0 {
            break;
        }
        let step = g(p) / d;
        p -= step;
        if step.abs() <= 1e-16 * p.abs() {
            break;
        }
    }
    if (f.eval(p) - unencoded_rate(p)).abs() > 1e-12 {
        return Err(Error::Fit(format!("crossing at {p} did not converge")));
    }
    // dp*/dθ_k = -(∂g/∂θ_k) / (∂g/∂p), with ∂g/∂θ_k = p^(power-1)
    let powers = f.kind.powers();
    let grad: Vec<f64> = powers.iter().map(|&k| -p.powi(k - 1) / dg(p)).collect();
    let m = grad.len();
    let mut var = 0.0;
    for i in 0..m {
        for j in 0..m {
            var += grad[i] * f.covariance[i * m + j] * grad[j];
        }
    }
    let sigma = var.max(0.0).sqrt();
    Ok(PseudothresholdResult {
        p_star: Some(p),
        interval: Some((p - sigma, p + sigma)),
        is_pseudothreshold: is_pt,
        label: if is_pt { "pseudothreshold".into() } else { "crossing, not pseudothreshold".into() },
    })
}

/// Fit inputs from a curve. Truncated mass is folded into the error bar, and
/// points without any uncertainty (e.g. `p = 0`) are dropped.
pub fn fit_points(curve: &[CurvePoint]) -> Vec<FitPoint> {
    curve
        .iter()
        .filter_map(|c| {
            let sigma = c.stderr.hypot(c.excluded_mass);
            (sigma > 0.0 && c.p > 0.0).then_some(FitPoint { p: c.p, p_l: c.p_l, stderr: sigma })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitSummary {
    pub fit: FitModel,
    pub pseudothreshold: PseudothresholdResult,
}

/// Quadratic-leading fit (with a cubic term) for fault-tolerant
/// configurations, linear-plus-quadratic otherwise, and the crossing.
pub fn summarize(curve: &[CurvePoint], fault_tolerant: bool) -> Result<FitSummary> {
    let kind = if fault_tolerant {
        FitKind::QuadraticLeading { cubic: true }
    } else {
        FitKind::LinearPlusQuadratic
    };
    let fit = fit(&fit_points(curve), kind)?;
    let pseudothreshold = pseudothreshold(&fit)?;
    Ok(FitSummary { fit, pseudothreshold })
}

/// `n` log-spaced points over `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(f: impl Fn(f64) -> f64, grid: &[f64]) -> Vec<FitPoint> {
        grid.iter().map(|&p| FitPoint { p, p_l: f(p), stderr: f(p) * 0.01 }).collect()
    }

    #[test]
    fn exact_quadratic() {
        let g = log_grid(1e-5, 5e-3, 10);
        let m = fit(&pts(|p| 2.0 * p * p, &g), FitKind::QuadraticLeading { cubic: false }).unwrap();
        assert!((m.coefficients[0] - 2.0).abs() < 1e-9);
        assert!(m.residual_norm < 1e-9);
    }

    #[test]
    fn recovers_linear_plus_quadratic() {
        let g = log_grid(1e-5, 5e-3, 12);
        let m = fit(&pts(|p| 0.3 * p + 150.0 * p * p, &g), FitKind::LinearPlusQuadratic).unwrap();
        assert!((m.coefficients[0] / 0.3 - 1.0).abs() < 1e-6);
        assert!((m.coefficients[1] / 150.0 - 1.0).abs() < 1e-6);
    }

    #[test]
    fn closed_form_crossing() {
        let b = 2.0 / 3.0 / 1e-3;
        let g = log_grid(1e-5, 5e-3, 6);
        let m = fit(&pts(|p| b * p * p, &g), FitKind::QuadraticLeading { cubic: false }).unwrap();
        let r = pseudothreshold(&m).unwrap();
        let p = r.p_star.unwrap();
        assert!((p - 1e-3).abs() < 1e-12);
        assert!(r.is_pseudothreshold);
    }

    #[test]
    fn crossing_with_cubic_term() {
        let g = log_grid(1e-5, 5e-3, 10);
        let m = fit(&pts(|p| 400.0 * p * p + 2e5 * p * p * p, &g), FitKind::QuadraticLeading { cubic: true }).unwrap();
        let r = pseudothreshold(&m).unwrap();
        let p = r.p_star.unwrap();
        assert!((m.eval(p) - 2.0 * p / 3.0).abs() < 1e-12);
    }

    #[test]
    fn linear_leading_is_labelled() {
        let g = log_grid(1e-5, 5e-3, 8);
        let m = fit(&pts(|p| 0.05 * p + 300.0 * p * p, &g), FitKind::LinearPlusQuadratic).unwrap();
        let r = pseudothreshold(&m).unwrap();
        assert!(!r.is_pseudothreshold);
        assert_eq!(r.label, "crossing, not pseudothreshold");
        let m = fit(&pts(|p| 0.9 * p, &g), FitKind::LinearPlusQuadratic).unwrap();
        assert!(pseudothreshold(&m).unwrap().p_star.is_none());
    }

    #[test]
    fn fit_errors() {
        let zero = vec![FitPoint { p: 1e-3, p_l: 0.0, stderr: 1.0 }; 3];
        assert!(fit(&zero, FitKind::LinearPlusQuadratic).is_err());
        let one = vec![FitPoint { p: 1e-3, p_l: 1e-6, stderr: 1e-7 }];
        assert!(fit(&one, FitKind::LinearPlusQuadratic).is_err());
        let bad = vec![FitPoint { p: 1e-3, p_l: 1e-6, stderr: 0.0 }, FitPoint { p: 2e-3, p_l: 4e-6, stderr: 1e-7 }];
        assert!(fit(&bad, FitKind::LinearPlusQuadratic).is_err());
    }
}
