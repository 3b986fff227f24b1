//! Closed-form DoF values, the optimal DoF region, and DoF estimation from
//! finite-SNR rate curves.

use crate::channel_model::QualityPair;
use crate::error::{Error, Result};
use crate::schemes::Scheme;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DofPoint {
    pub d1: f64,
    pub d2: f64,
}

impl DofPoint {
    pub fn new(d1: f64, d2: f64) -> Self {
        DofPoint { d1, d2 }
    }
}

/// `a1·d1 + a2·d2 ≤ b`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Halfspace {
    pub a1: BigRational,
    pub a2: BigRational,
    pub b: BigRational,
}

impl Halfspace {
    fn new(a1: BigRational, a2: BigRational, b: BigRational) -> Self {
        Halfspace { a1, a2, b }
    }

    fn contains_exact(&self, p: &(BigRational, BigRational)) -> bool {
        &self.a1 * &p.0 + &self.a2 * &p.1 <= self.b
    }

    pub fn to_f64(&self) -> [f64; 3] {
        [ratio_f64(&self.a1), ratio_f64(&self.a2), ratio_f64(&self.b)]
    }
}

/// The optimal DoF region `d_i ≤ 1`, `2d₁ + d₂ ≤ 2 + m`, `d₁ + 2d₂ ≤ 2 + m`,
/// `d_i ≥ 0` with `m = max{α₁, α₂}`, kept in exact rational form.
#[derive(Clone, Debug, PartialEq)]
pub struct DofRegion {
    pub halfspaces: Vec<Halfspace>,
    /// Extreme points, counter-clockwise from the origin.
    pub vertices_exact: Vec<(BigRational, BigRational)>,
}

impl DofRegion {
    pub fn vertices(&self) -> Vec<DofPoint> {
        self.vertices_exact
            .iter()
            .map(|(a, b)| DofPoint::new(ratio_f64(a), ratio_f64(b)))
            .collect()
    }

    pub fn halfspaces_f64(&self) -> Vec<[f64; 3]> {
        self.halfspaces.iter().map(Halfspace::to_f64).collect()
    }

    /// `{"halfspaces":[[a1,a2,b],...],"vertices":[[d1,d2],...]}`
    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Repr {
            halfspaces: Vec<[f64; 3]>,
            vertices: Vec<[f64; 2]>,
        }
        let repr = Repr {
            halfspaces: self.halfspaces_f64(),
            vertices: self.vertices().iter().map(|v| [v.d1, v.d2]).collect(),
        };
        serde_json::to_string(&repr).expect("plain numeric arrays always serialize")
    }

    pub fn contains_exact(&self, p: &(BigRational, BigRational)) -> bool {
        self.halfspaces.iter().all(|h| h.contains_exact(p))
    }
}

fn ratio_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Exact rational value of a finite float (every finite `f64` is a dyadic rational).
pub fn exact_rational(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite input")
}

fn int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Sum DoF of each scheme: `2α₂`, `2`, `4/3`, `(4+2α₂)/3`, `(4+2α₁)/3`,
/// and `1 + max α` for the corner-point scheme.
pub fn theoretical_dof(scheme: Scheme, qual: &QualityPair) -> f64 {
    let lo = qual.alpha1.min(qual.alpha2);
    let hi = qual.max();
    match scheme {
        Scheme::Zf => 2.0 * lo,
        Scheme::ZfPerfect => 2.0,
        Scheme::Mat => 4.0 / 3.0,
        Scheme::AlphaMatZf => (4.0 + 2.0 * lo) / 3.0,
        Scheme::AlphaMatApzf => (4.0 + 2.0 * hi) / 3.0,
        Scheme::Vertex => 1.0 + hi,
    }
}

/// Parses a scheme label and returns its sum DoF.
pub fn theoretical_dof_by_name(name: &str, qual: &QualityPair) -> Result<f64> {
    Ok(theoretical_dof(name.parse()?, qual))
}

/// Per-RX DoF point achieved by a scheme (symmetric schemes split evenly).
pub fn theoretical_point(scheme: Scheme, qual: &QualityPair) -> DofPoint {
    match scheme {
        Scheme::Vertex => DofPoint::new(1.0, qual.max()),
        s => {
            let d = 0.5 * theoretical_dof(s, qual);
            DofPoint::new(d, d)
        }
    }
}

pub fn dof_region(qual: &QualityPair) -> DofRegion {
    dof_region_for_max(&exact_rational(qual.max()))
}

/// Region for a given `m = max{α₁, α₂}` in exact arithmetic.
pub fn dof_region_for_max(m: &BigRational) -> DofRegion {
    let (zero, one, two) = (BigRational::zero(), BigRational::one(), int(2));
    let rhs = &two + m;
    let halfspaces = vec![
        Halfspace::new(one.clone(), zero.clone(), one.clone()),
        Halfspace::new(zero.clone(), one.clone(), one.clone()),
        Halfspace::new(two.clone(), one.clone(), rhs.clone()),
        Halfspace::new(one.clone(), two.clone(), rhs),
        Halfspace::new(-one.clone(), zero.clone(), zero.clone()),
        Halfspace::new(zero.clone(), -one, zero),
    ];
    let vertices_exact = enumerate_vertices(&halfspaces);
    DofRegion {
        halfspaces,
        vertices_exact,
    }
}

/// Pairwise intersection of constraint lines, kept when feasible, deduplicated
/// and sorted counter-clockwise around the centroid.
pub fn enumerate_vertices(halfspaces: &[Halfspace]) -> Vec<(BigRational, BigRational)> {
    let mut out: Vec<(BigRational, BigRational)> = Vec::new();
    for i in 0..halfspaces.len() {
        for j in (i + 1)..halfspaces.len() {
            let (a, b) = (&halfspaces[i], &halfspaces[j]);
            let det = &a.a1 * &b.a2 - &a.a2 * &b.a1;
            if det.is_zero() {
                continue;
            }
            let x = (&a.b * &b.a2 - &a.a2 * &b.b) / &det;
            let y = (&a.a1 * &b.b - &a.b * &b.a1) / &det;
            let p = (x, y);
            if halfspaces.iter().all(|h| h.contains_exact(&p)) && !out.contains(&p) {
                out.push(p);
            }
        }
    }
    if out.is_empty() {
        return out;
    }
    let n = int(out.len() as i64);
    let cx = out.iter().fold(BigRational::zero(), |acc, p| acc + &p.0) / &n;
    let cy = out.iter().fold(BigRational::zero(), |acc, p| acc + &p.1) / &n;
    // sort by angle around the centroid; the centroid is strictly inside
    out.sort_by(|p, q| {
        let (px, py) = (&p.0 - &cx, &p.1 - &cy);
        let (qx, qy) = (&q.0 - &cx, &q.1 - &cy);
        let half = |x: &BigRational, y: &BigRational| -> u8 {
            if y.is_negative() || (y.is_zero() && x.is_negative()) {
                1
            } else {
                0
            }
        };
        half(&px, &py).cmp(&half(&qx, &qy)).then_with(|| {
            let cross = &px * &qy - &py * &qx;
            BigRational::zero().cmp(&cross)
        })
    });
    // start from the vertex closest to the origin (the origin itself here)
    if let Some(pos) = out.iter().position(|p| p.0.is_zero() && p.1.is_zero()) {
        out.rotate_left(pos);
    }
    out
}

/// True iff `p` satisfies every halfspace within `tol`.
pub fn region_contains(region: &DofRegion, p: &DofPoint, tol: f64) -> bool {
    region
        .halfspaces_f64()
        .iter()
        .all(|[a1, a2, b]| a1 * p.d1 + a2 * p.d2 <= b + tol)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RatePoint {
    pub p: f64,
    pub mean_sum_rate: f64,
    pub stderr: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RateCurve {
    pub points: Vec<RatePoint>,
}

impl RateCurve {
    pub fn new(points: Vec<RatePoint>) -> Result<Self> {
        for w in points.windows(2) {
            if w[1].p.partial_cmp(&w[0].p) != Some(std::cmp::Ordering::Greater) {
                return Err(Error::invalid("points", "P must be strictly increasing"));
            }
        }
        if points.iter().any(|p| p.stderr.is_nan() || p.stderr < 0.0) {
            return Err(Error::invalid("stderr", "must be >= 0"));
        }
        Ok(RateCurve { points })
    }

    pub fn from_pairs(p: &[f64], rate: &[f64]) -> Result<Self> {
        if p.len() != rate.len() {
            return Err(Error::invalid("rate", "length differs from P"));
        }
        RateCurve::new(
            p.iter()
                .zip(rate)
                .map(|(&p, &r)| RatePoint {
                    p,
                    mean_sum_rate: r,
                    stderr: 0.0,
                })
                .collect(),
        )
    }
}

/// Least-squares slope of rate against `log₂ P` over the `window` highest-P points.
pub fn estimate_dof_slope(curve: &RateCurve, window: usize) -> Result<f64> {
    if window < 2 {
        return Err(Error::invalid("window", "must be at least 2"));
    }
    if curve.points.len() < window {
        return Err(Error::InsufficientPoints {
            needed: window,
            got: curve.points.len(),
        });
    }
    let tail = &curve.points[curve.points.len() - window..];
    let n = window as f64;
    let xs: Vec<f64> = tail.iter().map(|pt| pt.p.log2()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = tail.iter().map(|pt| pt.mean_sum_rate).sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (x, pt) in xs.iter().zip(tail) {
        sxy += (x - mx) * (pt.mean_sum_rate - my);
        sxx += (x - mx) * (x - mx);
    }
    Ok(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn theoretical_values() {
        let qual = QualityPair::new(1.0, 0.5).unwrap();
        assert_eq!(theoretical_dof(Scheme::Zf, &qual), 1.0);
        assert_eq!(theoretical_dof(Scheme::Mat, &qual), 4.0 / 3.0);
        assert_eq!(theoretical_dof(Scheme::AlphaMatApzf, &qual), 2.0);
        assert!((theoretical_dof(Scheme::AlphaMatZf, &qual) - 5.0 / 3.0).abs() < 1e-15);
        assert!(matches!(
            theoretical_dof_by_name("foo", &qual),
            Err(Error::UnknownScheme(_))
        ));
    }

    #[test]
    fn region_vertices_at_zero() {
        let r = dof_region_for_max(&BigRational::zero());
        let v = r.vertices_exact;
        assert!(v.contains(&(int(1), int(0))));
        assert!(v.contains(&(q(2, 3), q(2, 3))));
        assert!(v.contains(&(int(0), int(1))));
        assert_eq!(v.len(), 4); // plus the origin
    }

    #[test]
    fn region_vertices_at_half() {
        let r = dof_region(&QualityPair::new(0.5, 0.25).unwrap());
        let v = &r.vertices_exact;
        for p in [(int(1), q(1, 2)), (q(5, 6), q(5, 6)), (q(1, 2), int(1))] {
            assert!(v.contains(&p), "{p:?} missing from {v:?}");
        }
        assert!(!region_contains(&r, &DofPoint::new(1.0, 1.0), 0.0));
    }

    #[test]
    fn full_quality_region_contains_one_one() {
        let r = dof_region(&QualityPair::new(1.0, 1.0).unwrap());
        assert!(r.vertices_exact.contains(&(int(1), int(1))));
        assert!(region_contains(&r, &DofPoint::new(1.0, 1.0), 1e-12));
    }

    #[test]
    fn membership_basics() {
        let r = dof_region(&QualityPair::new(0.75, 0.5).unwrap());
        assert!(region_contains(&r, &DofPoint::new(0.0, 0.0), 0.0));
        for v in r.vertices() {
            assert!(region_contains(&r, &v, 1e-12));
        }
    }

    #[test]
    fn json_shape() {
        let r = dof_region(&QualityPair::new(1.0, 0.5).unwrap());
        let v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(v["halfspaces"].as_array().unwrap().len(), 6);
        assert_eq!(v["halfspaces"][2], serde_json::json!([2.0, 1.0, 3.0]));
    }

    #[test]
    fn slope_examples() {
        let p: Vec<f64> = (0..7).map(|i| 10f64.powf(i as f64)).collect();
        let r: Vec<f64> = p.iter().map(|x| 2.0 * x.log2()).collect();
        let c = RateCurve::from_pairs(&p, &r).unwrap();
        assert!((estimate_dof_slope(&c, 4).unwrap() - 2.0).abs() < 1e-12);
        let flat = RateCurve::from_pairs(&p, &[3.0; 7]).unwrap();
        assert!(estimate_dof_slope(&flat, 3).unwrap().abs() < 1e-12);
        assert!(matches!(
            estimate_dof_slope(&c, 9),
            Err(Error::InsufficientPoints { needed: 9, got: 7 })
        ));
        assert!(RateCurve::from_pairs(&[2.0, 1.0], &[0.0, 0.0]).is_err());
    }
}
