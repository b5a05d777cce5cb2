//! Nonnegative initial data of finite mass: Dirac atoms plus per-edge densities.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{GraphPoint, StarGraph};

/// A Dirac mass `w * delta_loc` on one edge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    pub edge: usize,
    pub loc: f64,
    pub weight: f64,
}

/// Density shapes. Each one is nonnegative and integrable on `[0, inf)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Profile {
    /// `height` on `[a, b]`, zero elsewhere.
    Indicator { a: f64, b: f64, height: f64 },
    /// `height * exp(-(y - center)^2 / (2 sigma^2))`.
    Gauss { center: f64, sigma: f64, height: f64 },
    /// `height * exp(-rate * y)`.
    Exp { rate: f64, height: f64 },
    /// Samples at `0, h, 2h, ...`, linearly interpolated, zero past the last sample.
    Grid { h: f64, values: Vec<f64> },
}

impl Profile {
    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        match self {
            Profile::Indicator { a, b, height } => {
                if !(*a >= 0.0 && b > a && b.is_finite()) {
                    return bad(format!("indicator needs 0 <= a < b, got [{a}, {b}]"));
                }
                if !(*height >= 0.0 && height.is_finite()) {
                    return bad(format!("indicator height must be >= 0, got {height}"));
                }
            }
            Profile::Gauss { center, sigma, height } => {
                if !(center.is_finite() && *sigma > 0.0 && sigma.is_finite()) {
                    return bad(format!("gauss needs finite center and sigma > 0, got ({center}, {sigma})"));
                }
                if !(*height >= 0.0 && height.is_finite()) {
                    return bad(format!("gauss height must be >= 0, got {height}"));
                }
            }
            Profile::Exp { rate, height } => {
                if !(*rate > 0.0 && rate.is_finite()) {
                    return bad(format!("exp rate must be > 0, got {rate}"));
                }
                if !(*height >= 0.0 && height.is_finite()) {
                    return bad(format!("exp height must be >= 0, got {height}"));
                }
            }
            Profile::Grid { h, values } => {
                if !(*h > 0.0 && h.is_finite()) {
                    return bad(format!("grid spacing must be > 0, got {h}"));
                }
                if values.is_empty() {
                    return bad("grid needs at least one sample".into());
                }
                if let Some(v) = values.iter().find(|v| !(**v >= 0.0 && v.is_finite())) {
                    return bad(format!("grid samples must be finite and >= 0, got {v}"));
                }
            }
        }
        Ok(())
    }

    pub fn eval(&self, y: f64) -> f64 {
        match self {
            Profile::Indicator { a, b, height } => {
                if y >= *a && y <= *b {
                    *height
                } else {
                    0.0
                }
            }
            Profile::Gauss { center, sigma, height } => {
                let s = (y - center) / sigma;
                height * (-0.5 * s * s).exp()
            }
            Profile::Exp { rate, height } => height * (-rate * y).exp(),
            Profile::Grid { h, values } => {
                if y < 0.0 {
                    return 0.0;
                }
                let s = y / h;
                let k = s.floor() as usize;
                if k + 1 >= values.len() {
                    return if k + 1 == values.len() && s == k as f64 { values[k] } else { 0.0 };
                }
                let frac = s - k as f64;
                values[k] + frac * (values[k + 1] - values[k])
            }
        }
    }

    /// Exact integral over `[0, inf)` (trapezoid for sampled grids, which is
    /// exact for the linear interpolant).
    pub fn l1(&self) -> f64 {
        match self {
            Profile::Indicator { a, b, height } => height * (b - a),
            Profile::Gauss { center, sigma, height } => {
                height * sigma * (std::f64::consts::PI / 2.0).sqrt()
                    * (1.0 + libm::erf(center / (sigma * std::f64::consts::SQRT_2)))
            }
            Profile::Exp { rate, height } => height / rate,
            Profile::Grid { h, values } => {
                let n = values.len();
                if n < 2 {
                    return 0.0;
                }
                h * (values.iter().sum::<f64>() - 0.5 * (values[0] + values[n - 1]))
            }
        }
    }

    /// Interval outside which the profile is below `eps` times its peak.
    pub fn support(&self, eps: f64) -> (f64, f64) {
        match self {
            Profile::Indicator { a, b, .. } => (*a, *b),
            Profile::Gauss { center, sigma, .. } => {
                let k = (2.0 * (1.0 / eps).ln()).sqrt() * sigma;
                ((center - k).max(0.0), (center + k).max(0.0))
            }
            Profile::Exp { rate, .. } => (0.0, (1.0 / eps).ln() / rate),
            Profile::Grid { h, values } => (0.0, h * (values.len() - 1) as f64),
        }
    }

    /// Points in `(lo, hi)` where the profile is not smooth or changes character.
    pub fn breakpoints(&self, lo: f64, hi: f64, out: &mut Vec<f64>) {
        let mut push = |x: f64| {
            if x > lo && x < hi {
                out.push(x);
            }
        };
        match self {
            Profile::Indicator { a, b, .. } => {
                push(*a);
                push(*b);
            }
            Profile::Gauss { center, .. } => push(*center),
            Profile::Exp { .. } => {}
            Profile::Grid { h, values } => {
                let first = (lo / h).ceil().max(0.0) as usize;
                let last = ((hi / h).floor() as usize).min(values.len() - 1);
                for k in first..=last {
                    push(k as f64 * h);
                }
            }
        }
    }

    /// Best `(eta, start, end)` such that the profile is `>= eta` on `[start, end]`.
    fn witness(&self) -> Option<(f64, f64, f64)> {
        match self {
            Profile::Indicator { a, b, height } => (*height > 0.0).then_some((*height, *a, *b)),
            Profile::Gauss { center, sigma, height } => {
                if *height <= 0.0 || center + sigma <= 0.0 {
                    return None;
                }
                let lo = (center - sigma).max(0.0);
                let hi = center + sigma;
                Some((height * (-0.5f64).exp(), lo, hi))
            }
            // eta * lambda = height * y * exp(-rate y) peaks at y = 1 / rate.
            Profile::Exp { rate, height } => {
                (*height > 0.0).then(|| (height * (-1f64).exp(), 0.0, 1.0 / rate))
            }
            Profile::Grid { h, values } => {
                let vmax = values.iter().cloned().fold(0.0, f64::max);
                if vmax <= 0.0 {
                    return None;
                }
                let mut best: Option<(f64, f64, f64)> = None;
                for k in 0..WITNESS_THRESHOLDS {
                    let eta = vmax * 10f64.powf(-4.0 * k as f64 / (WITNESS_THRESHOLDS - 1) as f64);
                    let mut run_start = None;
                    let mut longest: Option<(usize, usize)> = None;
                    for (i, v) in values.iter().enumerate() {
                        if *v >= eta {
                            let s = *run_start.get_or_insert(i);
                            if longest.is_none_or(|(a, b)| i - s > b - a) {
                                longest = Some((s, i));
                            }
                        } else {
                            run_start = None;
                        }
                    }
                    if let Some((s, e)) = longest {
                        if e > s {
                            let cand = (eta, s as f64 * h, e as f64 * h);
                            let score = |w: &(f64, f64, f64)| w.0 * (w.2 - w.1);
                            if best.is_none_or(|b| score(&cand) > score(&b)) {
                                best = Some(cand);
                            }
                        }
                    }
                }
                best
            }
        }
    }
}

/// Number of candidate thresholds scanned when extracting a witness from sampled data.
pub const WITNESS_THRESHOLDS: usize = 21;

/// A density profile attached to one edge.
#[derive(Debug, Clone, PartialEq)]
pub struct Density {
    pub edge: usize,
    pub profile: Profile,
}

/// Certificate that `phi_edge >= eta` on `K = [r0 - lambda, r0]`, a subset of `B_{r0}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PositivityWitness {
    pub edge: usize,
    pub eta: f64,
    pub lambda: f64,
    pub r0: f64,
}

/// Initial datum `phi >= 0` with finite mass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GraphFunctionRepr", into = "GraphFunctionRepr")]
pub struct GraphFunction {
    atoms: Vec<Atom>,
    densities: Vec<Density>,
    total_mass: f64,
}

impl GraphFunction {
    pub fn new(atoms: Vec<Atom>, densities: Vec<Density>) -> Result<Self> {
        for a in &atoms {
            if !(a.loc >= 0.0 && a.loc.is_finite()) {
                return Err(Error::Config(format!("atom location must be >= 0, got {}", a.loc)));
            }
            if !(a.weight > 0.0 && a.weight.is_finite()) {
                return Err(Error::Config(format!("atom weight must be > 0, got {}", a.weight)));
            }
        }
        for d in &densities {
            d.profile.validate()?;
        }
        let total_mass =
            atoms.iter().map(|a| a.weight).sum::<f64>() + densities.iter().map(|d| d.profile.l1()).sum::<f64>();
        Ok(Self { atoms, densities, total_mass })
    }

    pub fn empty() -> Self {
        Self { atoms: vec![], densities: vec![], total_mass: 0.0 }
    }

    pub fn from_atoms(atoms: &[(usize, f64, f64)]) -> Result<Self> {
        Self::new(atoms.iter().map(|&(edge, loc, weight)| Atom { edge, loc, weight }).collect(), vec![])
    }

    pub fn with_atom(mut self, edge: usize, loc: f64, weight: f64) -> Result<Self> {
        self.atoms.push(Atom { edge, loc, weight });
        Self::new(self.atoms, self.densities)
    }

    pub fn with_density(mut self, edge: usize, profile: Profile) -> Result<Self> {
        self.densities.push(Density { edge, profile });
        Self::new(self.atoms, self.densities)
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn densities(&self) -> &[Density] {
        &self.densities
    }

    pub fn densities_on(&self, edge: usize) -> impl Iterator<Item = &Profile> {
        self.densities.iter().filter(move |d| d.edge == edge).map(|d| &d.profile)
    }

    pub fn atoms_on(&self, edge: usize) -> impl Iterator<Item = &Atom> {
        self.atoms.iter().filter(move |a| a.edge == edge)
    }

    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }

    pub fn is_zero(&self) -> bool {
        self.total_mass == 0.0
    }

    /// Checks that every edge index fits the graph.
    pub fn check_against(&self, graph: &StarGraph) -> Result<()> {
        let n = graph.edge_count();
        let max = self.atoms.iter().map(|a| a.edge).chain(self.densities.iter().map(|d| d.edge)).max();
        match max {
            Some(e) if e >= n => Err(Error::Config(format!("initial datum uses edge {} but graph has {n}", e + 1))),
            _ => Ok(()),
        }
    }

    pub fn l1_norm(&self, edge: usize) -> f64 {
        self.atoms_on(edge).map(|a| a.weight).sum::<f64>() + self.densities_on(edge).map(Profile::l1).sum::<f64>()
    }

    /// Density value at `p`; atoms are not included.
    pub fn eval_density(&self, p: &GraphPoint) -> f64 {
        self.densities_on(p.edge).map(|d| d.eval(p.coord)).sum()
    }

    /// Witness maximizing `eta * lambda` over all densities.
    pub fn positivity_witness(&self) -> Result<PositivityWitness> {
        let mut best: Option<PositivityWitness> = None;
        for d in &self.densities {
            if let Some((eta, start, end)) = d.profile.witness() {
                let w = PositivityWitness { edge: d.edge, eta, lambda: end - start, r0: end };
                if w.lambda > 0.0 && best.is_none_or(|b| w.eta * w.lambda > b.eta * b.lambda) {
                    best = Some(w);
                }
            }
        }
        best.ok_or(Error::NoWitness)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("initial datum JSON: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("graph function serializes")
    }
}

pub fn l1_norm(f: &GraphFunction, edge: usize) -> f64 {
    f.l1_norm(edge)
}

pub fn positivity_witness(f: &GraphFunction) -> Result<PositivityWitness> {
    f.positivity_witness()
}

pub fn eval_density(f: &GraphFunction, p: &GraphPoint) -> f64 {
    f.eval_density(p)
}

// JSON form, with 1-based edge numbers.
#[derive(Serialize, Deserialize)]
struct AtomRepr {
    edge: usize,
    loc: f64,
    w: f64,
}

#[derive(Serialize, Deserialize)]
struct DensityRepr {
    edge: usize,
    #[serde(flatten)]
    profile: Profile,
}

#[derive(Serialize, Deserialize)]
struct GraphFunctionRepr {
    #[serde(default)]
    atoms: Vec<AtomRepr>,
    #[serde(default)]
    densities: Vec<DensityRepr>,
}

fn to_zero_based(edge: usize) -> Result<usize> {
    edge.checked_sub(1).ok_or_else(|| Error::Config("edge numbers start at 1".into()))
}

impl TryFrom<GraphFunctionRepr> for GraphFunction {
    type Error = Error;

    fn try_from(r: GraphFunctionRepr) -> Result<Self> {
        let atoms = r
            .atoms
            .into_iter()
            .map(|a| Ok(Atom { edge: to_zero_based(a.edge)?, loc: a.loc, weight: a.w }))
            .collect::<Result<Vec<_>>>()?;
        let densities = r
            .densities
            .into_iter()
            .map(|d| Ok(Density { edge: to_zero_based(d.edge)?, profile: d.profile }))
            .collect::<Result<Vec<_>>>()?;
        GraphFunction::new(atoms, densities)
    }
}

impl From<GraphFunction> for GraphFunctionRepr {
    fn from(f: GraphFunction) -> Self {
        GraphFunctionRepr {
            atoms: f.atoms.iter().map(|a| AtomRepr { edge: a.edge + 1, loc: a.loc, w: a.weight }).collect(),
            densities: f
                .densities
                .into_iter()
                .map(|d| DensityRepr { edge: d.edge + 1, profile: d.profile })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn indicator(a: f64, b: f64, height: f64) -> Profile {
        Profile::Indicator { a, b, height }
    }

    #[test]
    fn l1_examples() {
        let f = GraphFunction::empty().with_density(0, indicator(0.0, 1.0, 1.0)).unwrap();
        assert_eq!(l1_norm(&f, 0), 1.0);
        assert_eq!(l1_norm(&f, 1), 0.0);
        let d = GraphFunction::from_atoms(&[(0, 1.0, 1.0)]).unwrap();
        assert_eq!(l1_norm(&d, 0), 1.0);
    }

    #[test]
    fn witness_examples() {
        let f = GraphFunction::empty().with_density(2, indicator(0.0, 1.0, 2.0)).unwrap();
        assert_eq!(
            positivity_witness(&f).unwrap(),
            PositivityWitness { edge: 2, eta: 2.0, lambda: 1.0, r0: 1.0 }
        );
        assert_eq!(positivity_witness(&GraphFunction::empty()), Err(Error::NoWitness));
        let atoms = GraphFunction::from_atoms(&[(0, 1.0, 3.0)]).unwrap();
        assert_eq!(positivity_witness(&atoms), Err(Error::NoWitness));
        let bump = GraphFunction::empty()
            .with_density(0, Profile::Gauss { center: 2.0, sigma: 1.0, height: 1.0 })
            .unwrap();
        let w = positivity_witness(&bump).unwrap();
        assert_eq!(w.edge, 0);
        assert!((w.eta - 0.606_530_659_712_633_4).abs() < 1e-15);
        assert_eq!((w.lambda, w.r0), (2.0, 3.0));
    }

    #[test]
    fn grid_witness_satisfies_itself() {
        let values: Vec<f64> = (0..200).map(|k| (k as f64 * 0.05).sin().max(0.0) * 3.0).collect();
        let f = GraphFunction::empty().with_density(1, Profile::Grid { h: 0.05, values }).unwrap();
        let w = positivity_witness(&f).unwrap();
        assert!(w.lambda > 0.0);
        for k in 0..=10_000 {
            let y = w.r0 - w.lambda + w.lambda * k as f64 / 10_000.0;
            assert!(f.eval_density(&GraphPoint { edge: 1, coord: y }) >= w.eta * (1.0 - 1e-12));
        }
    }

    #[test]
    fn density_eval_examples() {
        let f = GraphFunction::empty().with_density(0, indicator(0.0, 1.0, 1.0)).unwrap();
        assert_eq!(eval_density(&f, &GraphPoint { edge: 0, coord: 0.5 }), 1.0);
        assert_eq!(eval_density(&f, &GraphPoint { edge: 0, coord: 2.0 }), 0.0);
        let g = Profile::Grid { h: 1.0, values: vec![0.0, 2.0] };
        assert_eq!(g.eval(0.5), 1.0);
        assert_eq!(g.eval(1.0), 2.0);
        assert_eq!(g.eval(1.5), 0.0);
    }

    #[test]
    fn invalid_data_rejected() {
        assert!(GraphFunction::from_atoms(&[(0, -1.0, 1.0)]).is_err());
        assert!(GraphFunction::from_atoms(&[(0, 1.0, 0.0)]).is_err());
        assert!(GraphFunction::empty().with_density(0, indicator(2.0, 1.0, 1.0)).is_err());
        assert!(GraphFunction::empty().with_density(0, Profile::Grid { h: 0.1, values: vec![1.0, -1.0] }).is_err());
    }

    #[test]
    fn json_schema() {
        let text = r#"{"atoms":[{"edge":3,"loc":1.0,"w":1.0}],
            "densities":[{"edge":1,"kind":"indicator","a":0.0,"b":1.0,"height":2.0},
                         {"edge":2,"kind":"grid","h":0.5,"values":[0.0,1.0,0.0]}]}"#;
        let f = GraphFunction::from_json(text).unwrap();
        assert_eq!(f.atoms()[0].edge, 2);
        assert_eq!(f.densities()[0].edge, 0);
        assert!((f.total_mass() - 3.5).abs() < 1e-15);
        let back = GraphFunction::from_json(&f.to_json()).unwrap();
        assert_eq!(back, f);
        assert!(GraphFunction::from_json(r#"{"atoms":[{"edge":0,"loc":1.0,"w":1.0}]}"#).is_err());
    }
}
