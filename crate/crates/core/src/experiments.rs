//! Scripted sharpness sweeps, the asymptotic exponent fit for `AT(α, β)` and the
//! `MT`/`AT` identity check, emitting machine-readable records.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exponents::{alpha_n, ConfigSnapshot, ExponentConfig};
use crate::functionals::{f_ratio, g_ratio, q_ratio, FunctionalKind};
use crate::optimize::{estimate_at, estimate_mt, MtResult, OptimizerParams};
use crate::profiles::{moser_sequence, moser_sequence_q};
use crate::transforms::{IdentityRecord, IdentityReport};

/// One point of a sweep: the sweep variable (`k`, `α` or a family index), the ratio
/// and, where one applies, the closed-form lower bound for the ratio.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRecord {
    pub sweep_value: f64,
    pub ratio: f64,
    pub numerator: f64,
    pub denominator: f64,
    pub lower_bound: Option<f64>,
    pub grad_norm: f64,
    pub config: ConfigSnapshot,
}

impl SweepRecord {
    /// `ratio >= lower_bound - tol`, vacuously true without a bound.
    pub fn respects_bound(&self, tol: f64) -> bool {
        self.lower_bound.is_none_or(|b| self.ratio >= b - tol)
    }
}

/// Closed-form lower bound for the numerator of the sweep ratio, when one is known.
///
/// `G`: the plateau alone contributes `k^{N-1}/(N-t)^N`. `Q`: the plateau contributes at
/// least `ω_{N-1}^{1-q/N}/(q-t) (k/(N-t))^{q/N'}`. Both need `α >= α_{N,t}`.
pub fn numerator_lower_bound(cfg: &ExponentConfig<f64>, kind: FunctionalKind, k: usize) -> Option<f64> {
    if cfg.alpha() < cfg.alpha_crit() {
        return None;
    }
    let nn = cfg.n_real();
    let t = cfg.t();
    let k = k as f64;
    match kind {
        FunctionalKind::G => Some(k.powf(nn - 1.0) / (nn - t).powf(nn)),
        FunctionalKind::Q => {
            let q = cfg.q();
            Some(cfg.omega().powf(1.0 - q / nn) / (q - t) * (k / (nn - t)).powf(q / cfg.nprime()))
        }
        _ => None,
    }
}

/// Ratio of `kind` on the `k`-th test sequence for every `k` in `k_range`, in order.
/// `F` and `G` use the logarithmic sequence with unit gradient; `Q` uses its steeper
/// `q`-variant.
pub fn sharpness_sweep(
    cfg: &ExponentConfig<f64>,
    kind: FunctionalKind,
    k_range: std::ops::RangeInclusive<usize>,
) -> Result<Vec<SweepRecord>> {
    if k_range.is_empty() {
        return Err(Error::InvalidParameter("empty k range".into()));
    }
    if !matches!(kind, FunctionalKind::F | FunctionalKind::G | FunctionalKind::Q) {
        return Err(Error::InvalidParameter(format!("sharpness sweep supports F, G, Q; got {kind}")));
    }
    let ks: Vec<usize> = k_range.collect();
    ks.par_iter()
        .map(|&k| {
            let report = match kind {
                FunctionalKind::Q => q_ratio(&moser_sequence_q(cfg.n(), cfg.t(), cfg.q(), k)?, cfg)?,
                FunctionalKind::F => f_ratio(&moser_sequence(cfg.n(), cfg.t(), k)?, cfg)?,
                _ => g_ratio(&moser_sequence(cfg.n(), cfg.t(), k)?, cfg)?,
            };
            Ok(SweepRecord {
                sweep_value: k as f64,
                ratio: report.value,
                numerator: report.numerator,
                denominator: report.denominator,
                lower_bound: numerator_lower_bound(cfg, kind, k).map(|b| b / report.denominator),
                grad_norm: report.grad_norm_used,
                config: cfg.snapshot(),
            })
        })
        .collect()
}

/// CSV with columns `k,ratio,lower_bound,grad_norm`; a missing bound is an empty field.
pub fn sharpness_csv(records: &[SweepRecord]) -> String {
    let mut out = String::from("k,ratio,lower_bound,grad_norm\n");
    for r in records {
        let bound = r.lower_bound.map(|b| format!("{b:e}")).unwrap_or_default();
        out.push_str(&format!("{},{:e},{},{:e}\n", r.sweep_value, r.ratio, bound, r.grad_norm));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitPoint {
    pub alpha_frac: f64,
    pub estimate: f64,
    /// `log(1 - (α/α_N)^{N-1})`
    pub log_gap: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExponentFit {
    pub n: usize,
    pub beta: f64,
    pub slope: f64,
    pub intercept: f64,
    /// `-(N-β)/N`
    pub predicted_slope: f64,
    pub points: Vec<FitPoint>,
}

impl ExponentFit {
    pub fn relative_slope_error(&self) -> f64 {
        ((self.slope - self.predicted_slope) / self.predicted_slope).abs()
    }

    /// CSV with columns `alpha_frac,estimate,log_gap`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("alpha_frac,estimate,log_gap\n");
        for p in &self.points {
            out.push_str(&format!("{},{:e},{:e}\n", p.alpha_frac, p.estimate, p.log_gap));
        }
        out
    }
}

/// Least-squares slope and intercept of `y` on `x`.
fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let m = x.len() as f64;
    let mx = x.iter().sum::<f64>() / m;
    let my = y.iter().sum::<f64>() / m;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Regresses `log AT̂(α, β)` on `log(1 - (α/α_N)^{N-1})` over `α = frac·α_N`.
/// Only converged estimates enter the fit; fewer than three is an error.
pub fn theorem_c_exponent_fit(n: usize, beta: f64, alpha_fracs: &[f64], params: &OptimizerParams) -> Result<ExponentFit> {
    let an = alpha_n::<f64>(n)?;
    if alpha_fracs.iter().any(|f| !(*f > 0.0 && *f < 1.0)) {
        return Err(Error::InvalidParameter("alpha fractions must lie in (0, 1)".into()));
    }
    let points: Vec<FitPoint> = alpha_fracs
        .iter()
        .map(|&frac| {
            let res = estimate_at(n, frac * an, beta, params)?;
            Ok(FitPoint {
                alpha_frac: frac,
                estimate: res.value,
                log_gap: (1.0 - frac.powi(n as i32 - 1)).ln(),
                converged: res.converged,
            })
        })
        .collect::<Result<_>>()?;
    let used: Vec<&FitPoint> = points.iter().filter(|p| p.converged).collect();
    if used.len() < 3 {
        return Err(Error::FitDegenerate(used.len()));
    }
    let x: Vec<f64> = used.iter().map(|p| p.log_gap).collect();
    let y: Vec<f64> = used.iter().map(|p| p.estimate.ln()).collect();
    let (slope, intercept) = linear_fit(&x, &y);
    let nn = n as f64;
    Ok(ExponentFit { n, beta, slope, intercept, predicted_slope: -(nn - beta) / nn, points })
}

/// `((1 - x^{(N-1)a/N}) / x^{(N-1)b/N})^{(N-β)/b}` with `x = α/α_N`.
pub fn mt_prefactor(n: usize, a: f64, b: f64, beta: f64, alpha_frac: f64) -> f64 {
    let nn = n as f64;
    let e = (nn - 1.0) / nn;
    ((1.0 - alpha_frac.powf(e * a)) / alpha_frac.powf(e * b)).powf((nn - beta) / b)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityRow {
    pub alpha: f64,
    pub prefactor: f64,
    pub at_est: f64,
    pub product: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TheoremECheck {
    pub report: IdentityReport,
    pub rows: Vec<IdentityRow>,
    pub mt: MtResult,
}

impl TheoremECheck {
    /// CSV with columns `alpha,prefactor,AT_est,product`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("alpha,prefactor,AT_est,product\n");
        for r in &self.rows {
            out.push_str(&format!("{:e},{:e},{:e},{:e}\n", r.alpha, r.prefactor, r.at_est, r.product));
        }
        out
    }
}

/// Compares the direct estimate of `MT_{a,b}(β)` with `max_α prefactor(α)·AT̂(α, β)`
/// over `α = frac·α_N`, `frac ∈ alpha_fracs`. Both sides under-estimate suprema, so the
/// report uses the coarse tolerance `tol`.
pub fn theorem_e_identity_check(
    n: usize,
    a: f64,
    b: f64,
    beta: f64,
    alpha_fracs: &[f64],
    params: &OptimizerParams,
    tol: f64,
) -> Result<TheoremECheck> {
    if b > n as f64 {
        return Err(Error::Finiteness { b, n });
    }
    if alpha_fracs.is_empty() || alpha_fracs.iter().any(|f| !(*f > 0.0 && *f < 1.0)) {
        return Err(Error::InvalidParameter("alpha fractions must be nonempty and lie in (0, 1)".into()));
    }
    let an = alpha_n::<f64>(n)?;
    let mt = estimate_mt(n, a, b, beta, params)?;
    let rows: Vec<IdentityRow> = alpha_fracs
        .iter()
        .map(|&frac| {
            let at = estimate_at(n, frac * an, beta, params)?;
            let prefactor = mt_prefactor(n, a, b, beta, frac);
            Ok(IdentityRow { alpha: frac * an, prefactor, at_est: at.value, product: prefactor * at.value })
        })
        .collect::<Result<_>>()?;
    let rhs = rows.iter().map(|r| r.product).fold(f64::NEG_INFINITY, f64::max);
    let report = IdentityReport::new(vec![IdentityRecord::equality("mt_vs_at", mt.value, rhs)], tol);
    Ok(TheoremECheck { report, rows, mt })
}
