//! CSV rows and JSON documents written by the subcommands.
//!
//! Column order and field names are frozen; tests compare them byte for byte.

use bare713::analysis::{FitSummary, PseudothresholdResult};
use bare713::runner::CurvePoint;
use serde::Serialize;

pub const SWEEP_HEADER: &str = "p,p_L,stderr,shots_effective,sampler,method,model,metric,config_hash,seed";

pub const COMPARE_HEADER: &str = "p,p_L_importance,stderr_importance,excluded_mass,p_L_traditional,stderr_traditional,\
z,agree,truncation_dip,method,model,metric,config_hash,seed";

/// Probabilities are always written in scientific notation.
pub fn sci(x: f64) -> String {
    format!("{x:.6e}")
}

/// Labels shared by every row of one run.
pub struct RowContext<'a> {
    pub sampler: &'a str,
    pub method: &'a str,
    pub model: &'a str,
    pub metric: &'a str,
    pub config_hash: &'a str,
    pub seed: u64,
}

pub fn sweep_csv(points: &[CurvePoint], ctx: &RowContext) -> String {
    let mut out = String::from(SWEEP_HEADER);
    out.push('\n');
    for pt in points {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            sci(pt.p),
            sci(pt.p_l),
            sci(pt.stderr),
            pt.shots,
            ctx.sampler,
            ctx.method,
            ctx.model,
            ctx.metric,
            ctx.config_hash,
            ctx.seed
        ));
    }
    out
}

/// One paired row of compare-samplers.
pub struct Comparison {
    pub importance: CurvePoint,
    pub traditional: CurvePoint,
}

impl Comparison {
    /// Combined uncertainty, with truncated mass folded into the importance side.
    pub fn sigma(&self) -> f64 {
        self.importance.stderr.hypot(self.importance.excluded_mass).hypot(self.traditional.stderr)
    }

    pub fn z(&self) -> f64 {
        let d = self.importance.p_l - self.traditional.p_l;
        if d == 0.0 {
            0.0
        } else {
            d / self.sigma()
        }
    }

    pub fn agrees(&self) -> bool {
        self.z().abs() <= 3.0
    }

    /// Importance below traditional by more than the sampling error alone
    /// explains: the mark of subsets dropped by truncation.
    pub fn truncation_dip(&self) -> bool {
        let sampling = self.importance.stderr.hypot(self.traditional.stderr);
        self.traditional.p_l - self.importance.p_l > 3.0 * sampling
    }
}

pub fn compare_csv(rows: &[Comparison], ctx: &RowContext) -> String {
    let mut out = String::from(COMPARE_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{:.3},{},{},{},{},{},{},{}\n",
            sci(r.importance.p),
            sci(r.importance.p_l),
            sci(r.importance.stderr),
            sci(r.importance.excluded_mass),
            sci(r.traditional.p_l),
            sci(r.traditional.stderr),
            r.z(),
            r.agrees(),
            r.truncation_dip(),
            ctx.method,
            ctx.model,
            ctx.metric,
            ctx.config_hash,
            ctx.seed
        ));
    }
    out
}

#[derive(Serialize)]
pub struct FitJson {
    /// `linear-plus-quadratic` or `quadratic-leading`.
    pub form: String,
    pub powers: Vec<i32>,
    pub coefficients: Vec<f64>,
    pub stderr: Vec<f64>,
    pub reduced_chi2: f64,
    pub points: usize,
}

#[derive(Serialize)]
pub struct PseudothresholdJson {
    pub p_star: Option<f64>,
    pub interval: Option<(f64, f64)>,
    pub label: String,
}

/// The sweep sidecar.
#[derive(Serialize)]
pub struct Sidecar {
    pub config_hash: String,
    pub seed: u64,
    pub code: String,
    pub method: String,
    pub model: String,
    pub metric: String,
    pub sampler: String,
    /// Whether exhaustive order-1 certification found no malignant fault;
    /// selects the fit form.
    pub fault_tolerant: bool,
    pub fit: Option<FitJson>,
    pub pseudothreshold: Option<PseudothresholdJson>,
    /// Why no fit was produced, if none was.
    pub fit_error: Option<String>,
}

impl FitJson {
    pub fn from_summary(s: &FitSummary) -> Self {
        let powers = s.fit.kind.powers().to_vec();
        FitJson {
            form: if s.fit.kind.is_fault_tolerant_form() { "quadratic-leading" } else { "linear-plus-quadratic" }.into(),
            stderr: powers.iter().map(|&k| s.fit.coefficient_stderr(k)).collect(),
            powers,
            coefficients: s.fit.coefficients.clone(),
            reduced_chi2: s.fit.reduced_chi2,
            points: s.fit.points,
        }
    }
}

impl From<&PseudothresholdResult> for PseudothresholdJson {
    fn from(p: &PseudothresholdResult) -> Self {
        PseudothresholdJson { p_star: p.p_star, interval: p.interval, label: p.label.clone() }
    }
}
