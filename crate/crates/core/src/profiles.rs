//! Compactly supported piecewise-linear radial profiles and the explicit test sequences.

use rand::{RngExt, SeedableRng};
use rand_xoshiro::SplitMix64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponents::{conjugate, sphere_area};
use crate::scalar::{lit, Scalar};

/// Radial function `ũ(r)`: constant on `[0, r_0]`, linear between nodes, zero from `r_M` on.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialProfile<S> {
    nodes: Vec<(S, S)>,
    closed_by_append: bool,
}

impl<S: Scalar> RadialProfile<S> {
    /// Validates the node list. When the last value is nonzero, or only one node is given,
    /// a zero node is appended at twice the last radius; [`RadialProfile::closed_by_append`]
    /// reports it.
    pub fn new(nodes: Vec<(S, S)>) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::EmptyProfile);
        }
        for (i, &(r, v)) in nodes.iter().enumerate() {
            if !(r > S::zero()) || !r.is_finite() {
                return Err(Error::NonpositiveRadius { index: i, radius: r.to_f64_lossy() });
            }
            if !v.is_finite() {
                return Err(Error::InvalidProfile(format!("non-finite value at node {i}")));
            }
            if i > 0 && !(r > nodes[i - 1].0) {
                return Err(Error::NonMonotoneRadii { index: i });
            }
        }
        let mut nodes = nodes;
        let (last_r, last_v) = *nodes.last().unwrap();
        let closed_by_append = last_v != S::zero() || nodes.len() < 2;
        if closed_by_append {
            nodes.push((last_r + last_r, S::zero()));
        }
        Ok(Self { nodes, closed_by_append })
    }

    pub fn nodes(&self) -> &[(S, S)] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Whether construction had to append a terminal zero node.
    pub fn closed_by_append(&self) -> bool {
        self.closed_by_append
    }

    pub fn plateau_radius(&self) -> S {
        self.nodes[0].0
    }

    pub fn plateau_value(&self) -> S {
        self.nodes[0].1
    }

    pub fn support_radius(&self) -> S {
        self.nodes[self.nodes.len() - 1].0
    }

    pub fn is_zero(&self) -> bool {
        self.nodes.iter().all(|&(_, v)| v == S::zero())
    }

    /// Largest absolute slope over the linear segments.
    pub fn max_slope(&self) -> S {
        self.nodes
            .windows(2)
            .map(|w| ((w[1].1 - w[0].1) / (w[1].0 - w[0].0)).abs())
            .fold(S::zero(), S::max)
    }

    /// `ũ(r)` for `r >= 0`.
    pub fn evaluate(&self, r: S) -> Result<S> {
        if r < S::zero() || r.is_nan() {
            return Err(Error::NegativeRadius(r.to_f64_lossy()));
        }
        Ok(self.value_at(r))
    }

    pub(crate) fn value_at(&self, r: S) -> S {
        let nodes = &self.nodes;
        if r <= nodes[0].0 {
            return nodes[0].1;
        }
        let last = nodes.len() - 1;
        if r >= nodes[last].0 {
            return nodes[last].1;
        }
        // first index with radius > r; lies in 1..=last
        let j = nodes.partition_point(|&(rr, _)| rr <= r);
        let (r0, v0) = nodes[j - 1];
        let (r1, v1) = nodes[j];
        v0 + (v1 - v0) * (r - r0) / (r1 - r0)
    }

    /// Profile with every value multiplied by `factor`.
    pub fn scaled(&self, factor: S) -> Self {
        Self {
            nodes: self.nodes.iter().map(|&(r, v)| (r, v * factor)).collect(),
            closed_by_append: self.closed_by_append,
        }
    }

    /// Profile with every radius divided by `lambda`, i.e. `u(λ·)`.
    pub(crate) fn radii_divided(&self, lambda: S) -> Self {
        Self {
            nodes: self.nodes.iter().map(|&(r, v)| (r / lambda, v)).collect(),
            closed_by_append: self.closed_by_append,
        }
    }

    pub fn to_file(&self) -> ProfileFile {
        ProfileFile {
            nodes: self.nodes.iter().map(|&(r, v)| [r.to_f64_lossy(), v.to_f64_lossy()]).collect(),
        }
    }

    pub fn from_file(file: &ProfileFile) -> Result<Self> {
        Self::new(file.nodes.iter().map(|&[r, v]| (lit(r), lit(v))).collect())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_file()).expect("profile serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ProfileFile = serde_json::from_str(text)?;
        Self::from_file(&file)
    }

    /// CSV with header `r,value`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("r,value\n");
        for &(r, v) in &self.nodes {
            out.push_str(&format!("{},{}\n", r.to_f64_lossy(), v.to_f64_lossy()));
        }
        out
    }
}

/// On-disk profile format: `{"nodes": [[r, v], ...]}` with ascending radii.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileFile {
    pub nodes: Vec<[f64; 2]>,
}

/// `c · base(r^γ)`: a profile seen through a power reparameterization of the radius.
#[derive(Debug, Clone, PartialEq)]
pub struct ComposedProfile<S> {
    pub base: RadialProfile<S>,
    pub radial_exponent: S,
    pub amplitude: S,
}

impl<S: Scalar> ComposedProfile<S> {
    pub fn new(base: RadialProfile<S>, radial_exponent: S, amplitude: S) -> Result<Self> {
        if !(radial_exponent > S::zero()) {
            return Err(Error::InvalidProfile("radial exponent must be positive".into()));
        }
        Ok(Self { base, radial_exponent, amplitude })
    }

    pub fn evaluate(&self, r: S) -> Result<S> {
        if r < S::zero() || r.is_nan() {
            return Err(Error::NegativeRadius(r.to_f64_lossy()));
        }
        Ok(self.amplitude * self.base.value_at(r.powf(self.radial_exponent)))
    }
}

impl<S: Scalar> Serialize for RadialProfile<S> {
    fn serialize<Z: serde::Serializer>(&self, s: Z) -> std::result::Result<Z::Ok, Z::Error> {
        self.to_file().serialize(s)
    }
}

/// Anything the quadrature can integrate: a base profile seen through `r ↦ r^γ` and scaled by `c`.
pub trait RadialShape<S: Scalar> {
    fn base(&self) -> &RadialProfile<S>;
    fn radial_exponent(&self) -> S {
        S::one()
    }
    fn amplitude(&self) -> S {
        S::one()
    }
}

impl<S: Scalar> RadialShape<S> for RadialProfile<S> {
    fn base(&self) -> &RadialProfile<S> {
        self
    }
}

impl<S: Scalar> RadialShape<S> for ComposedProfile<S> {
    fn base(&self) -> &RadialProfile<S> {
        &self.base
    }
    fn radial_exponent(&self) -> S {
        self.radial_exponent
    }
    fn amplitude(&self) -> S {
        self.amplitude
    }
}

/// Resolution of the logarithmic segment of the Moser-type sequences.
///
/// The segment `A log(1/r)` is sampled on a geometric grid with log-step `h`. Linear
/// interpolation in `r` inflates `∫|ũ'|^N r^{N-1} dr` on every cell by the same factor
/// `1 + N(N-1)h²/24 + O(h³)`, so `h` is chosen from a target relative error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogSampling<S> {
    pub target_rel_error: S,
}

impl<S: Scalar> Default for LogSampling<S> {
    fn default() -> Self {
        Self { target_rel_error: lit(2e-9) }
    }
}

impl<S: Scalar> LogSampling<S> {
    /// Number of geometric cells covering a log-radius span of `span`.
    pub fn cells(&self, n: usize, span: S) -> usize {
        let nn = S::from_usize_lossy(n);
        let h = (lit::<S>(24.0) * self.target_rel_error / (nn * (nn - S::one()))).sqrt();
        let cells = (span / h).ceil().to_usize().unwrap_or(1);
        cells.max(1)
    }
}

fn log_segment_profile<S: Scalar>(slope: S, span: S, plateau: S, cells: usize) -> Result<RadialProfile<S>> {
    let mut nodes = Vec::with_capacity(cells + 1);
    nodes.push(((-span).exp(), plateau));
    let m = S::from_usize_lossy(cells);
    for j in 1..cells {
        let log_r = -span + span * S::from_usize_lossy(j) / m;
        nodes.push((log_r.exp(), slope * (-log_r)));
    }
    nodes.push((S::one(), S::zero()));
    RadialProfile::new(nodes)
}

fn check_sequence_args<S: Scalar>(n: usize, t: S, k: usize) -> Result<S> {
    let nn = S::from_usize_lossy(n);
    if n < 2 {
        return Err(Error::DimensionTooSmall(n));
    }
    if t >= nn {
        return Err(Error::WeightIntegrability { weight: t.to_f64_lossy(), n });
    }
    if k == 0 {
        return Err(Error::InvalidProfile("sequence index k must be >= 1".into()));
    }
    Ok(nn)
}

/// Plateau value `(1/ω_{N-1})^{1/N} (k/(N-t))^{1/N'}` shared by both test sequences.
pub fn moser_plateau_value<S: Scalar>(n: usize, t: S, k: usize) -> Result<S> {
    let nn = check_sequence_args(n, t, k)?;
    let omega = sphere_area::<S>(n)?;
    let kk = S::from_usize_lossy(k);
    Ok(omega.recip().powf(nn.recip()) * (kk / (nn - t)).powf(conjugate::<S>(n).recip()))
}

/// Slope coefficient `((N-t)/(ω_{N-1} k))^{1/N}` of the logarithmic segment.
pub fn moser_slope<S: Scalar>(n: usize, t: S, k: usize) -> Result<S> {
    let nn = check_sequence_args(n, t, k)?;
    let omega = sphere_area::<S>(n)?;
    Ok(((nn - t) / (omega * S::from_usize_lossy(k))).powf(nn.recip()))
}

/// Truncated-logarithm sequence concentrating at the origin with unit gradient `L^N` norm.
pub fn moser_sequence<S: Scalar>(n: usize, t: S, k: usize) -> Result<RadialProfile<S>> {
    moser_sequence_with(n, t, k, &LogSampling::default())
}

pub fn moser_sequence_with<S: Scalar>(n: usize, t: S, k: usize, sampling: &LogSampling<S>) -> Result<RadialProfile<S>> {
    let nn = check_sequence_args(n, t, k)?;
    let span = S::from_usize_lossy(k) / (nn - t);
    let slope = moser_slope(n, t, k)?;
    let plateau = moser_plateau_value(n, t, k)?;
    log_segment_profile(slope, span, plateau, sampling.cells(n, span))
}

/// Variant with the steeper segment on `e^{-k/(q-t)} < r < 1`, slope multiplied by `(q-t)/(N-t)`.
///
/// Its gradient norm is `((q-t)/(N-t))^{(N-1)/N}`, not 1, whenever `q > N`.
pub fn moser_sequence_q<S: Scalar>(n: usize, t: S, q: S, k: usize) -> Result<RadialProfile<S>> {
    moser_sequence_q_with(n, t, q, k, &LogSampling::default())
}

pub fn moser_sequence_q_with<S: Scalar>(
    n: usize,
    t: S,
    q: S,
    k: usize,
    sampling: &LogSampling<S>,
) -> Result<RadialProfile<S>> {
    let nn = check_sequence_args(n, t, k)?;
    if !(q > nn) {
        return Err(Error::Power(format!("sequence needs q > N, got q = {}", q.to_f64_lossy())));
    }
    let span = S::from_usize_lossy(k) / (q - t);
    let slope = moser_slope(n, t, k)? * (q - t) / (nn - t);
    let plateau = moser_plateau_value(n, t, k)?;
    log_segment_profile(slope, span, plateau, sampling.cells(n, span))
}

/// Seeded nonnegative profile on a geometric grid over `[R·10⁻⁴, R]`.
///
/// Values are uniform in `[0, 1)` from a SplitMix64 stream seeded with `seed`; the last
/// value is forced to zero.
pub fn random_profile<S: Scalar>(seed: u64, node_count: usize, support_radius: S) -> Result<RadialProfile<S>> {
    if node_count < 2 {
        return Err(Error::InvalidProfile(format!("node_count = {node_count}, need >= 2")));
    }
    if !(support_radius > S::zero()) {
        return Err(Error::InvalidProfile("support radius must be positive".into()));
    }
    let mut rng = SplitMix64::seed_from_u64(seed);
    let inner = support_radius * lit(1e-4);
    let steps = S::from_usize_lossy(node_count - 1);
    let nodes = (0..node_count)
        .map(|i| {
            let r = if i + 1 == node_count {
                support_radius
            } else {
                inner * lit::<S>(1e4).powf(S::from_usize_lossy(i) / steps)
            };
            let v: f64 = rng.random();
            (r, if i + 1 == node_count { S::zero() } else { lit(v) })
        })
        .collect();
    RadialProfile::new(nodes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn tent() -> RadialProfile<f64> {
        RadialProfile::new(vec![(0.5, 1.0), (1.0, 0.0)]).unwrap()
    }

    #[test]
    fn construction_examples() {
        let z = RadialProfile::new(vec![(1.0, 0.0)]).unwrap();
        assert_eq!(z.nodes(), &[(1.0, 0.0), (2.0, 0.0)]);
        assert!(z.closed_by_append() && z.is_zero());

        let t = tent();
        assert!(!t.closed_by_append());
        assert_eq!(t.evaluate(0.2).unwrap(), 1.0);

        assert_eq!(
            RadialProfile::new(vec![(1.0, 1.0), (0.5, 2.0)]),
            Err(Error::NonMonotoneRadii { index: 1 })
        );
        assert!(matches!(RadialProfile::new(vec![(0.0, 1.0), (1.0, 0.0)]), Err(Error::NonpositiveRadius { .. })));
        assert_eq!(RadialProfile::<f64>::new(vec![]), Err(Error::EmptyProfile));

        let open = RadialProfile::new(vec![(0.5, 1.0), (1.0, 0.5)]).unwrap();
        assert!(open.closed_by_append());
        assert_eq!(open.support_radius(), 2.0);
    }

    #[test]
    fn evaluation_rules() {
        let t = tent();
        assert_eq!(t.evaluate(0.75).unwrap(), 0.5);
        assert_eq!(t.evaluate(3.0).unwrap(), 0.0);
        assert_eq!(t.evaluate(1.0).unwrap(), 0.0);
        assert!(matches!(t.evaluate(-0.1), Err(Error::NegativeRadius(_))));

        let c = ComposedProfile::new(tent(), 2.0, 3.0).unwrap();
        let r = 0.75f64.sqrt();
        assert!((c.evaluate(r).unwrap() - 1.5).abs() < 1e-14);
        let id = ComposedProfile::new(tent(), 1.0, 1.0).unwrap();
        for &r in &[0.0, 0.3, 0.6, 0.9, 1.2] {
            assert_eq!(id.evaluate(r).unwrap(), tent().evaluate(r).unwrap());
        }
    }

    #[test]
    fn moser_sequence_closed_forms() {
        let p = moser_sequence::<f64>(2, 0.0, 1).unwrap();
        let plateau = (1.0 / (2.0 * PI)).sqrt() * 0.5f64.sqrt();
        assert!((p.plateau_value() - plateau).abs() < 1e-15);
        assert!((p.plateau_value() - 0.28209).abs() < 1e-5);
        assert!((p.plateau_radius() - (-0.5f64).exp()).abs() < 1e-15);
        assert!((p.plateau_radius() - 0.60653).abs() < 1e-5);
        assert_eq!(p.support_radius(), 1.0);

        let p = moser_sequence::<f64>(2, 1.0, 2).unwrap();
        assert!((p.plateau_radius() - (-2.0f64).exp()).abs() < 1e-15);

        let pq = moser_sequence_q::<f64>(2, 0.0, 3.0, 1).unwrap();
        assert!((pq.plateau_radius() - (-1.0f64 / 3.0).exp()).abs() < 1e-15);
        assert!((pq.plateau_radius() - 0.71653).abs() < 1e-5);
        assert!(matches!(moser_sequence_q::<f64>(2, 0.0, 2.0, 1), Err(Error::Power(_))));
    }

    #[test]
    fn moser_sequences_are_continuous_at_the_junction() {
        for n in 2..=4 {
            for &t in &[-1.0, 0.0, 0.5, 1.5] {
                for k in [1usize, 3, 12] {
                    let nn = n as f64;
                    let plateau = moser_plateau_value::<f64>(n, t, k).unwrap();
                    let slope = moser_slope::<f64>(n, t, k).unwrap();
                    let joined = slope * k as f64 / (nn - t);
                    assert!((plateau - joined).abs() <= 1e-12 * plateau);
                    for &q in &[nn + 0.5, nn + 2.0] {
                        let slope_q = slope * (q - t) / (nn - t);
                        let joined_q = slope_q * k as f64 / (q - t);
                        assert!((plateau - joined_q).abs() <= 1e-12 * plateau);
                    }
                }
            }
        }
    }

    #[test]
    fn moser_sequences_are_nonincreasing() {
        for n in 2..=3 {
            for &t in &[0.0, 1.0] {
                for k in [1usize, 5] {
                    let p = moser_sequence::<f64>(n, t, k).unwrap();
                    assert!(p.nodes().windows(2).all(|w| w[1].1 <= w[0].1));
                    let q = moser_sequence_q::<f64>(n, t, n as f64 + 1.0, k).unwrap();
                    assert!(q.nodes().windows(2).all(|w| w[1].1 <= w[0].1));
                }
            }
        }
    }

    #[test]
    fn random_profile_determinism() {
        let a = random_profile::<f64>(7, 16, 1.0).unwrap();
        let b = random_profile::<f64>(7, 16, 1.0).unwrap();
        assert_eq!(a, b);
        let c = random_profile::<f64>(8, 16, 1.0).unwrap();
        assert!(a.nodes().iter().zip(c.nodes()).any(|(x, y)| x.1 != y.1));
        let tiny = random_profile::<f64>(7, 2, 1.0).unwrap();
        assert_eq!(tiny.len(), 2);
        assert_eq!(tiny.nodes()[1], (1.0, 0.0));
        assert!((a.plateau_radius() - 1e-4).abs() < 1e-18);
        assert!(a.nodes().iter().all(|&(_, v)| v >= 0.0));
        assert!(random_profile::<f64>(7, 1, 1.0).is_err());
    }

    #[test]
    fn json_and_csv() {
        let p = tent();
        let back = RadialProfile::<f64>::from_json(&p.to_json()).unwrap();
        assert_eq!(back, p);
        assert_eq!(p.to_json(), r#"{"nodes":[[0.5,1.0],[1.0,0.0]]}"#);
        assert_eq!(p.to_csv(), "r,value\n0.5,1\n1,0\n");
    }

    proptest! {
        #[test]
        fn evaluation_is_lipschitz(seed in 0u64..500, a in 0.0f64..1.2, b in 0.0f64..1.2) {
            let p = random_profile::<f64>(seed, 12, 1.0).unwrap();
            let l = p.max_slope();
            let diff = (p.evaluate(a).unwrap() - p.evaluate(b).unwrap()).abs();
            prop_assert!(diff <= l * (a - b).abs() * (1.0 + 1e-12) + 1e-15);
        }
    }
}
