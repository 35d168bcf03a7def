//! Ratio functionals `F`, `G`, the `q`-power ratio, the Adachi–Tanaka ratio and the
//! Caffarelli–Kohn–Nirenberg ratio, assembled from the quadrature primitives.
//!
//! None of these renormalize their input. The gradient norm of the argument is
//! recorded in every report so callers can audit the constraint `∥∇u∥_N ≤ 1`.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponents::{ConfigSnapshot, ExponentConfig};
use crate::profiles::{random_profile, RadialShape};
use crate::quadrature::Quadrature;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FunctionalKind {
    F,
    G,
    Q,
    AT,
    CKN,
}

impl fmt::Display for FunctionalKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            FunctionalKind::F => "F",
            FunctionalKind::G => "G",
            FunctionalKind::Q => "Q",
            FunctionalKind::AT => "AT",
            FunctionalKind::CKN => "CKN",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for FunctionalKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "F" | "f" => Ok(FunctionalKind::F),
            "G" | "g" => Ok(FunctionalKind::G),
            "Q" | "q" => Ok(FunctionalKind::Q),
            "AT" | "at" => Ok(FunctionalKind::AT),
            "CKN" | "ckn" => Ok(FunctionalKind::CKN),
            other => Err(Error::InvalidParameter(format!("unknown functional kind `{other}`"))),
        }
    }
}

/// One evaluated ratio. `value = numerator / denominator`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FunctionalReport<S> {
    pub kind: FunctionalKind,
    pub value: S,
    pub numerator: S,
    pub denominator: S,
    pub config: ConfigSnapshot,
    pub grad_norm_used: S,
}

impl<S: Scalar + Serialize> FunctionalReport<S> {
    /// Flat JSON record; the config keys are inlined.
    pub fn to_json(&self) -> String {
        serde_json::json!({
            "kind": self.kind,
            "value": self.value,
            "numerator": self.numerator,
            "denominator": self.denominator,
            "grad_norm_used": self.grad_norm_used,
            "N": self.config.n,
            "s": self.config.s,
            "t": self.config.t,
            "q": self.config.q,
            "alpha": self.config.alpha,
        })
        .to_string()
    }
}

impl<S: Scalar> FunctionalReport<S> {
    /// Whether the input satisfied `∥∇u∥_N ≤ 1 + slack`.
    pub fn constraint_held(&self, slack: S) -> bool {
        self.grad_norm_used <= S::one() + slack
    }
}

fn report<S: Scalar>(
    kind: FunctionalKind,
    numerator: S,
    denominator: S,
    config: ConfigSnapshot,
    grad_norm_used: S,
    label: &'static str,
) -> Result<FunctionalReport<S>> {
    if !(denominator > S::zero()) {
        return Err(Error::ZeroDenominator(label));
    }
    Ok(FunctionalReport { kind, value: numerator / denominator, numerator, denominator, config, grad_norm_used })
}

/// `∥u∥_{L^N(|x|^{-s})}^{N(N-t)/(N-s)}`, the common denominator of `F` and `G`.
fn standard_denominator<S: Scalar, P: RadialShape<S> + ?Sized>(
    quad: &Quadrature<S>,
    p: &P,
    cfg: &ExponentConfig<S>,
) -> Result<S> {
    let nn = cfg.n_real();
    let norm = quad.weighted_norm(p, cfg.n(), nn, cfg.s())?;
    Ok(norm.powf(nn * (nn - cfg.t()) / (nn - cfg.s())))
}

pub fn f_ratio<S: Scalar, P: RadialShape<S> + ?Sized>(p: &P, cfg: &ExponentConfig<S>) -> Result<FunctionalReport<S>> {
    f_ratio_with(&Quadrature::default(), p, cfg)
}

/// `∫ Φ_N(α|u|^{N'}) |x|^{-t} dx / ∥u∥_{L^N(|x|^{-s})}^{N(N-t)/(N-s)}`.
pub fn f_ratio_with<S: Scalar, P: RadialShape<S> + ?Sized>(
    quad: &Quadrature<S>,
    p: &P,
    cfg: &ExponentConfig<S>,
) -> Result<FunctionalReport<S>> {
    let den = standard_denominator(quad, p, cfg)?;
    if !(den > S::zero()) {
        return Err(Error::ZeroDenominator("F"));
    }
    let num = quad.phi_functional(p, cfg, cfg.t())?;
    let g = quad.grad_norm(p, cfg.n())?;
    report(FunctionalKind::F, num, den, cfg.snapshot(), g, "F")
}

pub fn g_ratio<S: Scalar, P: RadialShape<S> + ?Sized>(p: &P, cfg: &ExponentConfig<S>) -> Result<FunctionalReport<S>> {
    g_ratio_with(&Quadrature::default(), p, cfg)
}

/// `∫ e^{α|u|^{N'}} |u|^N |x|^{-t} dx / ∥u∥_{L^N(|x|^{-s})}^{N(N-t)/(N-s)}`.
pub fn g_ratio_with<S: Scalar, P: RadialShape<S> + ?Sized>(
    quad: &Quadrature<S>,
    p: &P,
    cfg: &ExponentConfig<S>,
) -> Result<FunctionalReport<S>> {
    let den = standard_denominator(quad, p, cfg)?;
    if !(den > S::zero()) {
        return Err(Error::ZeroDenominator("G"));
    }
    let num = quad.exp_functional(p, cfg, cfg.n_real(), cfg.t())?;
    let g = quad.grad_norm(p, cfg.n())?;
    report(FunctionalKind::G, num, den, cfg.snapshot(), g, "G")
}

pub fn q_ratio<S: Scalar, P: RadialShape<S> + ?Sized>(p: &P, cfg: &ExponentConfig<S>) -> Result<FunctionalReport<S>> {
    q_ratio_with(&Quadrature::default(), p, cfg)
}

/// `∫ e^{α|u|^{N'}} |u|^q |x|^{-t} dx / (∫ |u|^q |x|^{-s} dx)^{(N-t)/(N-s)}`, requires `q > N`.
pub fn q_ratio_with<S: Scalar, P: RadialShape<S> + ?Sized>(
    quad: &Quadrature<S>,
    p: &P,
    cfg: &ExponentConfig<S>,
) -> Result<FunctionalReport<S>> {
    let nn = cfg.n_real();
    let q = cfg.q();
    if !(q > nn) {
        return Err(Error::Power(format!("q ratio needs q > N, got q = {}", q.to_f64_lossy())));
    }
    let mass = quad.weighted_norm(p, cfg.n(), q, cfg.s())?.powf(q);
    let den = mass.powf((nn - cfg.t()) / (nn - cfg.s()));
    if !(den > S::zero()) {
        return Err(Error::ZeroDenominator("Q"));
    }
    let num = quad.exp_functional(p, cfg, q, cfg.t())?;
    let g = quad.grad_norm(p, cfg.n())?;
    report(FunctionalKind::Q, num, den, cfg.snapshot(), g, "Q")
}

pub fn at_ratio<S: Scalar, P: RadialShape<S> + ?Sized>(p: &P, n: usize, alpha: S, beta: S) -> Result<FunctionalReport<S>> {
    at_ratio_with(&Quadrature::default(), p, n, alpha, beta)
}

/// `∫ Φ_N(α(1-β/N)|u|^{N'}) |x|^{-β} dx / ∥u∥_{L^N}^{N-β}`.
///
/// The reported config is `(N, s = 0, t = β, q = N, α)`.
pub fn at_ratio_with<S: Scalar, P: RadialShape<S> + ?Sized>(
    quad: &Quadrature<S>,
    p: &P,
    n: usize,
    alpha: S,
    beta: S,
) -> Result<FunctionalReport<S>> {
    let nn = S::from_usize_lossy(n);
    if !(beta >= S::zero() && beta < nn) {
        return Err(Error::InvalidBeta { beta: beta.to_f64_lossy(), n });
    }
    let cfg = ExponentConfig::new(n, S::zero(), beta, nn, alpha)?;
    let den = quad.weighted_norm(p, n, nn, S::zero())?.powf(nn - beta);
    if !(den > S::zero()) {
        return Err(Error::ZeroDenominator("AT"));
    }
    let num = quad.phi_integral(p, n, alpha * (S::one() - beta / nn), beta)?;
    let g = quad.grad_norm(p, n)?;
    report(FunctionalKind::AT, num, den, cfg.snapshot(), g, "AT")
}

pub fn ckn_ratio<S: Scalar, P: RadialShape<S> + ?Sized>(p: &P, cfg: &ExponentConfig<S>, q: S) -> Result<S> {
    Ok(ckn_report_with(&Quadrature::default(), p, cfg, q)?.value)
}

/// `∥u∥_{q,t} / (∥u∥_{q,s}^{θ} ∥∇u∥_N^{1-θ})` with `θ = (N-t)/(N-s)`, as a report.
///
/// The config echo carries `q` in place of `cfg.q`.
pub fn ckn_report_with<S: Scalar, P: RadialShape<S> + ?Sized>(
    quad: &Quadrature<S>,
    p: &P,
    cfg: &ExponentConfig<S>,
    q: S,
) -> Result<FunctionalReport<S>> {
    let nn = cfg.n_real();
    if !(q >= nn) {
        return Err(Error::Power(format!("CKN ratio needs q >= N, got q = {}", q.to_f64_lossy())));
    }
    let theta = (nn - cfg.t()) / (nn - cfg.s());
    let g = quad.grad_norm(p, cfg.n())?;
    let num = quad.weighted_norm(p, cfg.n(), q, cfg.t())?;
    let s_norm = quad.weighted_norm(p, cfg.n(), q, cfg.s())?;
    let den = s_norm.powf(theta) * g.powf(S::one() - theta);
    if !(den > S::zero()) || !(s_norm > S::zero()) {
        return Err(Error::ZeroDenominator("CKN"));
    }
    let mut snap = cfg.snapshot();
    snap.q = q.to_f64_lossy();
    report(FunctionalKind::CKN, num, den, snap, g, "CKN")
}

/// Terms `α^i/i! ∥u∥_{N'(i+N-1),t}^{N'(i+N-1)} / ∥u∥_{N,t}^N`, `i = 0..count`, of the
/// series of the `G` ratio when `s = t`. The first term is 1.
pub fn g_series_terms<S: Scalar, P: RadialShape<S> + ?Sized>(
    quad: &Quadrature<S>,
    p: &P,
    cfg: &ExponentConfig<S>,
    count: usize,
) -> Result<Vec<S>> {
    let n = cfg.n();
    let nn = cfg.n_real();
    let base = quad.weighted_norm(p, n, nn, cfg.t())?.powf(nn);
    if !(base > S::zero()) {
        return Err(Error::ZeroDenominator("G series"));
    }
    let mut coef = S::one();
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        if i > 0 {
            coef = coef * cfg.alpha() / S::from_usize_lossy(i);
        }
        let power = cfg.nprime() * S::from_usize_lossy(i + n - 1);
        let moment = quad.radial_integral(p, n, cfg.t(), |u| u.abs().powf(power))?;
        out.push(coef * moment / base);
    }
    Ok(out)
}

/// One row of a family sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub seed: u64,
    pub kind: FunctionalKind,
    pub value: f64,
    pub numerator: f64,
    pub denominator: f64,
    pub grad_norm: f64,
}

impl SweepRow {
    fn from_report(seed: u64, r: &FunctionalReport<f64>) -> Self {
        Self {
            seed,
            kind: r.kind,
            value: r.value,
            numerator: r.numerator,
            denominator: r.denominator,
            grad_norm: r.grad_norm_used,
        }
    }
}

/// CSV with columns `seed,kind,value,numerator,denominator,grad_norm`.
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("seed,kind,value,numerator,denominator,grad_norm\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{:e},{:e},{:e},{:e}\n",
            r.seed, r.kind, r.value, r.numerator, r.denominator, r.grad_norm
        ));
    }
    out
}

/// CKN ratio over `random_profile(seed, node_count, 1)` for `seed in seeds`.
///
/// Zero profiles are skipped. Rows come back in seed order.
pub fn ckn_sweep(
    cfg: &ExponentConfig<f64>,
    q: f64,
    seeds: std::ops::Range<u64>,
    node_count: usize,
) -> Result<Vec<SweepRow>> {
    let quad = Quadrature::default();
    let rows: Vec<Option<SweepRow>> = seeds
        .into_par_iter()
        .map(|seed| {
            let p = random_profile::<f64>(seed, node_count, 1.0)?;
            if p.is_zero() {
                return Ok(None);
            }
            let r = ckn_report_with(&quad, &p, cfg, q)?;
            Ok(Some(SweepRow::from_report(seed, &r)))
        })
        .collect::<Result<_>>()?;
    Ok(rows.into_iter().flatten().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exponents::critical_alpha;
    use crate::profiles::{moser_sequence, moser_sequence_q, RadialProfile};
    use crate::quadrature::{phi_n, QuadSettings};
    use crate::scalar::rel_err;
    use std::f64::consts::PI;

    fn tent() -> RadialProfile<f64> {
        RadialProfile::new(vec![(0.5, 1.0), (1.0, 0.0)]).unwrap()
    }

    fn tent_value(r: f64) -> f64 {
        if r <= 0.5 {
            1.0
        } else if r < 1.0 {
            2.0 - 2.0 * r
        } else {
            0.0
        }
    }

    fn trapezoid(f: impl Fn(f64) -> f64, n: usize) -> f64 {
        let h = 1.0 / n as f64;
        let mut acc = 0.5 * (f(0.0) + f(1.0));
        for i in 1..n {
            acc += f(i as f64 * h);
        }
        acc * h
    }

    fn zero() -> RadialProfile<f64> {
        RadialProfile::new(vec![(1.0, 0.0)]).unwrap()
    }

    #[test]
    fn zero_profile_has_zero_denominator() {
        let cfg = ExponentConfig::standard(2, 0.0, 0.0, 1.0).unwrap();
        assert_eq!(f_ratio(&zero(), &cfg).unwrap_err(), Error::ZeroDenominator("F"));
        assert_eq!(g_ratio(&zero(), &cfg).unwrap_err(), Error::ZeroDenominator("G"));
        let cq = ExponentConfig::new(2, 0.0, 0.0, 3.0, 1.0).unwrap();
        assert_eq!(q_ratio(&zero(), &cq).unwrap_err(), Error::ZeroDenominator("Q"));
        assert_eq!(at_ratio(&zero(), 2, 1.0, 0.0).unwrap_err(), Error::ZeroDenominator("AT"));
        assert!(matches!(ckn_ratio(&zero(), &cfg, 2.0), Err(Error::ZeroDenominator(_))));
    }

    #[test]
    fn f_ratio_tent_against_trapezoid() {
        let cfg = ExponentConfig::standard(2, 0.0, 0.0, 1.0).unwrap();
        let r = f_ratio(&tent(), &cfg).unwrap();
        let num = 2.0 * PI * trapezoid(|x| (tent_value(x).powi(2).exp() - 1.0) * x, 1_000_000);
        let den = 2.0 * PI * trapezoid(|x| tent_value(x).powi(2) * x, 1_000_000);
        assert!(rel_err(r.numerator, num) < 1e-8);
        assert!(rel_err(r.denominator, den) < 1e-8);
        assert!(rel_err(r.value, num / den) < 1e-8);
        assert_eq!(r.kind, FunctionalKind::F);
    }

    #[test]
    fn g_ratio_unit_gradient_tent_against_trapezoid() {
        let t = tent();
        let g = crate::quadrature::grad_norm(&t, 2).unwrap();
        let p = t.scaled(1.0 / g);
        let c = 1.0 / g;
        let cfg = ExponentConfig::standard(2, 0.0, 0.0, 6.0).unwrap();
        let r = g_ratio(&p, &cfg).unwrap();
        assert!((r.grad_norm_used - 1.0).abs() < 1e-14);
        let num = 2.0 * PI
            * trapezoid(
                |x| {
                    let u = c * tent_value(x);
                    (6.0 * u * u).exp() * u * u * x
                },
                1_000_000,
            );
        let den = 2.0 * PI * trapezoid(|x| (c * tent_value(x)).powi(2) * x, 1_000_000);
        assert!(rel_err(r.value, num / den) < 1e-8);
        assert!(r.value > 1.0);
        assert!(r.constraint_held(1e-12));
    }

    #[test]
    fn s_equal_t_denominator_is_plain_power() {
        let p = random_profile::<f64>(3, 12, 1.0).unwrap();
        let cfg = ExponentConfig::standard(3, 0.7, 0.7, 2.0).unwrap();
        let r = f_ratio(&p, &cfg).unwrap();
        let norm = crate::quadrature::weighted_norm(&p, 3, 3.0, 0.7).unwrap();
        assert!(rel_err(r.denominator, norm.powi(3)) < 1e-14);
    }

    #[test]
    fn g_dominates_f_when_the_leading_constant_allows() {
        // pointwise Φ_N(x) <= e^x |u|^N holds termwise iff α^{N-1} <= (N-1)!
        for seed in 0..20u64 {
            let p = random_profile::<f64>(seed, 10, 1.0).unwrap();
            if p.is_zero() {
                continue;
            }
            for &(n, s, t, a) in &[(2usize, 0.0, 0.0, 1.0), (2, -1.0, 0.5, 0.5), (3, 0.0, 1.0, 1.4)] {
                let cfg = ExponentConfig::standard(n, s, t, a).unwrap();
                let f = f_ratio(&p, &cfg).unwrap().value;
                let g = g_ratio(&p, &cfg).unwrap().value;
                assert!(g >= f * (1.0 - 1e-12), "seed {seed} n {n}");
            }
        }
    }

    #[test]
    fn g_does_not_dominate_f_for_large_alpha() {
        // α = 3 > (N-1)! = 1: a tiny profile has F ≈ α G
        let p = tent().scaled(1e-3);
        let cfg = ExponentConfig::standard(2, 0.0, 0.0, 3.0).unwrap();
        let f = f_ratio(&p, &cfg).unwrap().value;
        let g = g_ratio(&p, &cfg).unwrap().value;
        assert!(f > 2.9 * g);
    }

    #[test]
    fn g_series_identity() {
        for seed in 0..6u64 {
            let raw = random_profile::<f64>(seed, 12, 1.0).unwrap();
            if raw.is_zero() {
                continue;
            }
            let p = raw.scaled(1.0 / crate::quadrature::grad_norm(&raw, 2).unwrap());
            for &(n, t, a) in &[(2usize, 0.0, 2.0), (2, 1.0, 1.5), (3, 0.5, 3.0)] {
                let p = if n == 2 { p.clone() } else { raw.scaled(1.0 / crate::quadrature::grad_norm(&raw, 3).unwrap()) };
                let cfg = ExponentConfig::standard(n, t, t, a).unwrap();
                let quad = Quadrature::default();
                let g = g_ratio_with(&quad, &p, &cfg).unwrap().value;
                let terms = g_series_terms(&quad, &p, &cfg, 60).unwrap();
                assert!((terms[0] - 1.0).abs() < 1e-12);
                let six: f64 = terms[..6].iter().sum();
                assert!(six <= g * (1.0 + 1e-12) && six >= 1.0);
                let all: f64 = terms.iter().sum();
                assert!(rel_err(all, g) < 1e-9, "seed {seed} n {n}: {all} vs {g}");
                assert!(g > 1.0);
            }
        }
    }

    #[test]
    fn q_ratio_moser_family_grows_at_critical_alpha() {
        let a = critical_alpha::<f64>(2, 0.0).unwrap();
        let cfg = ExponentConfig::new(2, 0.0, 0.0, 3.0, a).unwrap();
        let mut prev = 0.0;
        for k in [2usize, 5, 10, 15] {
            let p = moser_sequence_q(2, 0.0, 3.0, k).unwrap();
            let v = q_ratio(&p, &cfg).unwrap().value;
            assert!(v > prev, "k {k}");
            prev = v;
        }
        assert!(prev > 50.0);
        assert!(q_ratio(&tent(), &ExponentConfig::standard(2, 0.0, 0.0, 1.0).unwrap()).is_err());
    }

    #[test]
    fn q_ratio_is_stable_under_refinement() {
        let p = random_profile::<f64>(11, 16, 1.0).unwrap();
        let ac = critical_alpha::<f64>(2, 0.5).unwrap();
        let cfg = ExponentConfig::new(2, 0.0, 0.5, 3.0, 0.5 * ac).unwrap();
        let coarse = q_ratio(&p, &cfg).unwrap().value;
        let fine = Quadrature::new(QuadSettings { rel_tol: 1e-12, gauss_order: 32, max_depth: 20 });
        let v = q_ratio_with(&fine, &p, &cfg).unwrap().value;
        assert!(v.is_finite());
        assert!(rel_err(coarse, v) < 1e-7);
    }

    #[test]
    fn at_ratio_reductions() {
        let p = random_profile::<f64>(5, 12, 1.0).unwrap();
        let a = 5.0;
        let cfg = ExponentConfig::standard(2, 0.0, 0.0, a).unwrap();
        let at = at_ratio(&p, 2, a, 0.0).unwrap();
        let f = f_ratio(&p, &cfg).unwrap();
        assert!(rel_err(at.value, f.value) < 1e-14);
        let lo = at_ratio(&p, 2, 3.0, 0.5).unwrap().value;
        let hi = at_ratio(&p, 2, 6.0, 0.5).unwrap().value;
        assert!(lo < hi);
        assert!(matches!(at_ratio(&p, 2, 1.0, 2.0), Err(Error::InvalidBeta { .. })));
        assert!(matches!(at_ratio(&p, 2, 1.0, -0.1), Err(Error::InvalidBeta { .. })));
    }

    #[test]
    fn at_ratio_unbounded_at_alpha_n() {
        let an = crate::exponents::alpha_n::<f64>(2).unwrap();
        let vals: Vec<f64> = [2usize, 6, 12, 18]
            .iter()
            .map(|&k| at_ratio(&moser_sequence(2, 1.0, k).unwrap(), 2, an, 1.0).unwrap().value)
            .collect();
        assert!(vals.windows(2).all(|w| w[1] > w[0]), "{vals:?}");
        // numerator stays O(1) while ∥u_k∥_N ~ k^{-1/2}
        assert!(vals[3] > 4.0 * vals[0], "{vals:?}");
    }

    #[test]
    fn ckn_ratio_collapses_when_s_equals_t() {
        for seed in 0..5u64 {
            let p = random_profile::<f64>(seed, 8, 1.0).unwrap();
            if p.is_zero() {
                continue;
            }
            let cfg = ExponentConfig::standard(2, 0.5, 0.5, 1.0).unwrap();
            assert!((ckn_ratio(&p, &cfg, 3.0).unwrap() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn every_ratio_is_dilation_invariant() {
        let cfg = ExponentConfig::new(2, 0.0, 1.0, 3.0, 2.0).unwrap();
        for seed in 0..4u64 {
            let p = random_profile::<f64>(seed, 10, 1.0).unwrap();
            if p.is_zero() {
                continue;
            }
            let base = [
                f_ratio(&p, &cfg).unwrap().value,
                g_ratio(&p, &cfg).unwrap().value,
                q_ratio(&p, &cfg).unwrap().value,
                at_ratio(&p, 2, 3.0, 1.0).unwrap().value,
                ckn_ratio(&p, &cfg, 2.0).unwrap(),
            ];
            for lambda in [0.5, 2.0, 10.0] {
                let d = p.radii_divided(lambda);
                let other = [
                    f_ratio(&d, &cfg).unwrap().value,
                    g_ratio(&d, &cfg).unwrap().value,
                    q_ratio(&d, &cfg).unwrap().value,
                    at_ratio(&d, 2, 3.0, 1.0).unwrap().value,
                    ckn_ratio(&d, &cfg, 2.0).unwrap(),
                ];
                for (a, b) in base.iter().zip(&other) {
                    assert!(rel_err(*a, *b) < 1e-9, "seed {seed} lambda {lambda}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn ckn_sweep_is_ordered_and_finite() {
        let cfg = ExponentConfig::standard(2, 0.0, 1.0, 1.0).unwrap();
        let rows = ckn_sweep(&cfg, 2.0, 0..40, 12).unwrap();
        assert!(rows.windows(2).all(|w| w[0].seed < w[1].seed));
        assert!(rows.iter().all(|r| r.value.is_finite() && r.value > 0.0));
        let csv = sweep_csv(&rows);
        assert!(csv.starts_with("seed,kind,value,numerator,denominator,grad_norm\n"));
        assert_eq!(csv.lines().count(), rows.len() + 1);
    }

    #[test]
    fn report_serializes_flat() {
        let cfg = ExponentConfig::standard(2, 0.0, 0.0, 1.0).unwrap();
        let r = f_ratio(&tent(), &cfg).unwrap();
        let v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(v["kind"], "F");
        assert_eq!(v["N"], 2);
        assert!(v["value"].as_f64().unwrap() > 0.0);
        assert_eq!("ckn".parse::<FunctionalKind>().unwrap(), FunctionalKind::CKN);
        assert!("x".parse::<FunctionalKind>().is_err());
    }

    #[test]
    fn single_precision_f_ratio() {
        let cfg = ExponentConfig::<f32>::standard(2, 0.0, 0.0, 1.0).unwrap();
        let p = RadialProfile::<f32>::new(vec![(0.5, 1.0), (1.0, 0.0)]).unwrap();
        let quad = Quadrature::new(QuadSettings { rel_tol: 1e-5, gauss_order: 8, max_depth: 10 });
        let r32 = f_ratio_with(&quad, &p, &cfg).unwrap().value as f64;
        let r64 = f_ratio(&tent(), &ExponentConfig::standard(2, 0.0, 0.0, 1.0).unwrap()).unwrap().value;
        assert!(rel_err(r32, r64) < 1e-5);
        let _ = phi_n::<f32>(2, 1.0).unwrap();
    }
}
