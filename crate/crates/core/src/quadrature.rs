//! Globally adaptive Gauss-Kronrod quadrature on finite intervals, with
//! vector-valued integrands so that a function and its derivatives share
//! one set of panels.

#![allow(clippy::excessive_precision)]

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Node rule used on each panel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum PanelRule {
    /// 15-point Kronrod extension of the 7-point Gauss rule.
    #[default]
    #[serde(rename = "gk15")]
    GaussKronrod15,
}

/// Parameters shared by every semi-infinite integral in the crate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuadratureSpec {
    /// Relative Gaussian tail height at which integrals are truncated.
    pub tail_eps: f64,
    /// Target error relative to the integral of `|f|`.
    pub rel_tol: f64,
    /// Refinement budget (bisections beyond the initial partition).
    pub max_panels: usize,
    pub panel_rule: PanelRule,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self { tail_eps: 1e-16, rel_tol: 1e-10, max_panels: 4096, panel_rule: PanelRule::GaussKronrod15 }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.tail_eps > 0.0 && self.tail_eps < 1.0) {
            return Err(Error::Config(format!("tail_eps must lie in (0,1), got {}", self.tail_eps)));
        }
        if !(self.rel_tol > 0.0) {
            return Err(Error::Config(format!("rel_tol must be positive, got {}", self.rel_tol)));
        }
        if self.max_panels < 8 {
            return Err(Error::Config(format!("max_panels must be >= 8, got {}", self.max_panels)));
        }
        Ok(())
    }

    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }
}

// Kronrod abscissae (positive half, descending) and weights. Odd indices are
// the 7-point Gauss nodes.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Result of a vector-valued integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral<const K: usize> {
    pub value: [f64; K],
    pub error: [f64; K],
    /// Integral of `|f|` per component, the scale used by the stopping rule.
    pub abs_value: [f64; K],
    pub panels: usize,
}

impl<const K: usize> Integral<K> {
    pub fn zero() -> Self {
        Self { value: [0.0; K], error: [0.0; K], abs_value: [0.0; K], panels: 0 }
    }

    pub fn accumulate(&mut self, other: &Integral<K>) {
        for k in 0..K {
            self.value[k] += other.value[k];
            self.error[k] += other.error[k];
            self.abs_value[k] += other.abs_value[k];
        }
        self.panels += other.panels;
    }
}

#[derive(Debug, Clone, Copy)]
struct Panel<const K: usize> {
    a: f64,
    b: f64,
    value: [f64; K],
    error: [f64; K],
    abs_value: [f64; K],
}

fn gk15<const K: usize, F: Fn(f64) -> [f64; K]>(f: &F, a: f64, b: f64) -> Panel<K> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kron = [0.0; K];
    let mut gauss = [0.0; K];
    let mut resabs = [0.0; K];
    let mut fvals: [([f64; K], [f64; K]); 7] = [([0.0; K], [0.0; K]); 7];
    for k in 0..K {
        kron[k] = WGK[7] * fc[k];
        gauss[k] = WG[3] * fc[k];
        resabs[k] = WGK[7] * fc[k].abs();
    }
    for (j, slot) in fvals.iter_mut().enumerate() {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        for k in 0..K {
            kron[k] += WGK[j] * (f1[k] + f2[k]);
            resabs[k] += WGK[j] * (f1[k].abs() + f2[k].abs());
            if j % 2 == 1 {
                gauss[k] += WG[j / 2] * (f1[k] + f2[k]);
            }
        }
        *slot = (f1, f2);
    }
    let mut error = [0.0; K];
    let mut abs_value = [0.0; K];
    for k in 0..K {
        let mean = 0.5 * kron[k];
        let mut resasc = WGK[7] * (fc[k] - mean).abs();
        for (j, (f1, f2)) in fvals.iter().enumerate() {
            resasc += WGK[j] * ((f1[k] - mean).abs() + (f2[k] - mean).abs());
        }
        let resasc = resasc * half.abs();
        let mut err = ((kron[k] - gauss[k]) * half).abs();
        if resasc != 0.0 && err != 0.0 {
            err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
        }
        let ra = resabs[k] * half.abs();
        if ra > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
            err = err.max(50.0 * f64::EPSILON * ra);
        }
        error[k] = err;
        abs_value[k] = ra;
        kron[k] *= half;
    }
    Panel { a, b, value: kron, error, abs_value }
}

struct Ranked<const K: usize> {
    key: f64,
    panel: Panel<K>,
}

impl<const K: usize> PartialEq for Ranked<K> {
    fn eq(&self, other: &Self) -> bool {
        self.key.total_cmp(&other.key) == Ordering::Equal
    }
}
impl<const K: usize> Eq for Ranked<K> {}
impl<const K: usize> PartialOrd for Ranked<K> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<const K: usize> Ord for Ranked<K> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key.total_cmp(&other.key)
    }
}

/// Integrates `f` over `[breaks[0], breaks.last()]`, using the interior
/// breakpoints as the initial partition.
///
/// Stops when every component satisfies `error <= rel_tol * integral(|f|)`.
/// Empty or degenerate ranges integrate to zero.
pub fn integrate<const K: usize, F>(f: F, breaks: &[f64], spec: &QuadratureSpec) -> Result<Integral<K>>
where
    F: Fn(f64) -> [f64; K],
{
    let mut pts: Vec<f64> = breaks.iter().copied().filter(|x| x.is_finite()).collect();
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    if pts.len() < 2 {
        return Ok(Integral::zero());
    }
    let scale = |abs: &[f64; K], err: &[f64; K]| -> f64 {
        let mut key = 0.0f64;
        for k in 0..K {
            if abs[k] > 0.0 {
                key = key.max(err[k] / abs[k]);
            }
        }
        key
    };
    let mut total_val = [0.0; K];
    let mut total_err = [0.0; K];
    let mut total_abs = [0.0; K];
    let mut heap: BinaryHeap<Ranked<K>> = BinaryHeap::with_capacity(pts.len() * 2);
    for w in pts.windows(2) {
        let p = gk15(&f, w[0], w[1]);
        for k in 0..K {
            total_val[k] += p.value[k];
            total_err[k] += p.error[k];
            total_abs[k] += p.abs_value[k];
        }
        heap.push(Ranked { key: 0.0, panel: p });
    }
    // Rank panels by absolute error relative to the running scale.
    let rerank = |heap: BinaryHeap<Ranked<K>>, abs: &[f64; K]| -> BinaryHeap<Ranked<K>> {
        heap.into_iter()
            .map(|r| Ranked { key: scale(abs, &r.panel.error), panel: r.panel })
            .collect()
    };
    heap = rerank(heap, &total_abs);
    let initial = heap.len();
    let limit = initial + spec.max_panels;
    let converged = |err: &[f64; K], abs: &[f64; K]| (0..K).all(|k| err[k] <= spec.rel_tol * abs[k]);
    let mut since_rerank = 0usize;
    while !converged(&total_err, &total_abs) {
        if heap.len() >= limit {
            return Err(Error::Quadrature(format!(
                "{} panels exhausted on [{}, {}]; error {:e} vs scale {:e}",
                heap.len(),
                pts[0],
                pts[pts.len() - 1],
                scale(&total_abs, &total_err),
                spec.rel_tol
            )));
        }
        let worst = heap.pop().expect("non-empty panel set").panel;
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            return Err(Error::Quadrature(format!("panel [{}, {}] cannot be bisected", worst.a, worst.b)));
        }
        let left = gk15(&f, worst.a, mid);
        let right = gk15(&f, mid, worst.b);
        for k in 0..K {
            total_val[k] += left.value[k] + right.value[k] - worst.value[k];
            total_err[k] += left.error[k] + right.error[k] - worst.error[k];
            total_abs[k] += left.abs_value[k] + right.abs_value[k] - worst.abs_value[k];
        }
        heap.push(Ranked { key: scale(&total_abs, &left.error), panel: left });
        heap.push(Ranked { key: scale(&total_abs, &right.error), panel: right });
        since_rerank += 1;
        if since_rerank >= 64 {
            heap = rerank(heap, &total_abs);
            since_rerank = 0;
        }
    }
    // Re-sum to shed drift from the incremental updates.
    let mut out = Integral::<K>::zero();
    out.panels = heap.len();
    for r in heap.iter() {
        for k in 0..K {
            out.value[k] += r.panel.value[k];
            out.error[k] += r.panel.error[k];
            out.abs_value[k] += r.panel.abs_value[k];
        }
    }
    Ok(out)
}

/// Scalar convenience wrapper around [`integrate`].
pub fn integrate_scalar<F: Fn(f64) -> f64>(f: F, breaks: &[f64], spec: &QuadratureSpec) -> Result<f64> {
    integrate(|x| [f(x)], breaks, spec).map(|r| r.value[0])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kronrod_weights_sum_to_two() {
        let sk: f64 = WGK[7] + 2.0 * WGK[..7].iter().sum::<f64>();
        let sg: f64 = WG[3] + 2.0 * WG[..3].iter().sum::<f64>();
        assert!((sk - 2.0).abs() < 1e-15);
        assert!((sg - 2.0).abs() < 1e-15);
    }

    #[test]
    fn single_panel_exact_for_polynomials() {
        // Kronrod-15 integrates degree 22 exactly, Gauss-7 degree 13.
        for deg in 0..=22 {
            let p = gk15(&|x: f64| [x.powi(deg)], -1.0, 1.0);
            let exact = if deg % 2 == 0 { 2.0 / (deg as f64 + 1.0) } else { 0.0 };
            assert!((p.value[0] - exact).abs() < 1e-14, "degree {deg}: {} vs {exact}", p.value[0]);
        }
        for deg in 0..=13 {
            let p = gk15(&|x: f64| [x.powi(deg)], 0.0, 1.0);
            assert!(p.error[0] < 1e-13, "degree {deg} error {}", p.error[0]);
        }
    }

    #[test]
    fn adaptive_handles_kink_and_vector() {
        let spec = QuadratureSpec::default();
        let r = integrate(|x: f64| [(x - 0.3).abs(), x.sin()], &[0.0, 1.0], &spec).unwrap();
        assert!((r.value[0] - (0.045 + 0.245)).abs() < 1e-10);
        assert!((r.value[1] - (1.0 - 1f64.cos())).abs() < 1e-12);
    }

    #[test]
    fn gaussian_with_tail() {
        let spec = QuadratureSpec::default();
        let v = integrate_scalar(|x: f64| (-x * x).exp(), &[-12.0, 0.0, 12.0], &spec).unwrap();
        assert!((v - std::f64::consts::PI.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn budget_exhaustion_reports_error() {
        let spec = QuadratureSpec { max_panels: 8, rel_tol: 1e-15, ..Default::default() };
        let r = integrate_scalar(|x: f64| x.abs().sqrt().recip().min(1e8), &[-1.0, 1.0], &spec);
        assert!(matches!(r, Err(Error::Quadrature(_))));
    }

    #[test]
    fn empty_range_is_zero() {
        let spec = QuadratureSpec::default();
        assert_eq!(integrate_scalar(|x| x, &[2.0, 2.0], &spec).unwrap(), 0.0);
        assert_eq!(integrate_scalar(|x| x, &[], &spec).unwrap(), 0.0);
    }

    #[test]
    fn spec_validation() {
        assert!(QuadratureSpec::default().validate().is_ok());
        assert!(QuadratureSpec { tail_eps: 1.0, ..Default::default() }.validate().is_err());
        assert!(QuadratureSpec { max_panels: 4, ..Default::default() }.validate().is_err());
    }
}
