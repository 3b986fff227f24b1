//! Small fixed-size complex linear algebra for the 2-antenna network.

use num_complex::Complex64;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

pub type ComplexGain = Complex64;

/// A length-2 complex column vector.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct CVec2(pub [Complex64; 2]);

impl CVec2 {
    pub const ZERO: CVec2 = CVec2([Complex64::new(0.0, 0.0); 2]);

    pub fn new(a: Complex64, b: Complex64) -> Self {
        CVec2([a, b])
    }

    pub fn real(a: f64, b: f64) -> Self {
        CVec2([Complex64::new(a, 0.0), Complex64::new(b, 0.0)])
    }

    /// Hermitian inner product `selfᴴ · other`.
    pub fn inner(&self, other: &CVec2) -> Complex64 {
        self.0[0].conj() * other.0[0] + self.0[1].conj() * other.0[1]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0[0].norm_sqr() + self.0[1].norm_sqr()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn scale(&self, s: Complex64) -> CVec2 {
        CVec2([self.0[0] * s, self.0[1] * s])
    }

    pub fn scale_re(&self, s: f64) -> CVec2 {
        CVec2([self.0[0] * s, self.0[1] * s])
    }

    /// Unit-norm copy, `None` for the zero vector.
    pub fn normalized(&self) -> Option<CVec2> {
        let n = self.norm();
        if n > 0.0 && n.is_finite() {
            Some(self.scale_re(1.0 / n))
        } else {
            None
        }
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

impl Index<usize> for CVec2 {
    type Output = Complex64;
    fn index(&self, i: usize) -> &Complex64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for CVec2 {
    fn index_mut(&mut self, i: usize) -> &mut Complex64 {
        &mut self.0[i]
    }
}

impl Add for CVec2 {
    type Output = CVec2;
    fn add(self, rhs: CVec2) -> CVec2 {
        CVec2([self.0[0] + rhs.0[0], self.0[1] + rhs.0[1]])
    }
}

impl Sub for CVec2 {
    type Output = CVec2;
    fn sub(self, rhs: CVec2) -> CVec2 {
        CVec2([self.0[0] - rhs.0[0], self.0[1] - rhs.0[1]])
    }
}

impl Neg for CVec2 {
    type Output = CVec2;
    fn neg(self) -> CVec2 {
        CVec2([-self.0[0], -self.0[1]])
    }
}

impl Mul<f64> for CVec2 {
    type Output = CVec2;
    fn mul(self, rhs: f64) -> CVec2 {
        self.scale_re(rhs)
    }
}

/// 2×2 complex matrix, row-major.
pub type Mat2 = [[Complex64; 2]; 2];

pub fn det2(m: &Mat2) -> Complex64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

/// `log2 det(sigma + G Λ Gᴴ) - log2 det(sigma)` for diagonal `sigma` and
/// diagonal stream powers `Λ`: the Gaussian-input rate of a 2×2 link.
pub fn gaussian_rate_2x2(g: &Mat2, powers: [f64; 2], noise: [f64; 2]) -> f64 {
    let mut m: Mat2 = [[Complex64::new(0.0, 0.0); 2]; 2];
    for (r, row) in m.iter_mut().enumerate() {
        for (c, cell) in row.iter_mut().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for (k, pw) in powers.iter().enumerate() {
                acc += g[r][k] * g[c][k].conj() * *pw;
            }
            if r == c {
                acc += noise[r];
            }
            *cell = acc;
        }
    }
    let d = det2(&m).re.max(noise[0] * noise[1]);
    (d / (noise[0] * noise[1])).log2()
}

/// Singular values `(σ₁, σ₂)`, `σ₁ ≥ σ₂`, of a 3×2 complex matrix given by rows.
///
/// Uses `σ₁² + σ₂² = ‖A‖_F²` and `σ₁σ₂ = sqrt(Σ |2×2 minors|²)` (Cauchy-Binet),
/// which keeps `σ₂` accurate to machine precision relative to `σ₁` even when the
/// matrix is numerically rank one.
pub fn singular_values_3x2(rows: &[[Complex64; 2]; 3]) -> (f64, f64) {
    let fro: f64 = rows.iter().flatten().map(|z| z.norm_sqr()).sum();
    let mut minors = 0.0;
    for i in 0..3 {
        for j in (i + 1)..3 {
            let m = rows[i][0] * rows[j][1] - rows[i][1] * rows[j][0];
            minors += m.norm_sqr();
        }
    }
    let prod = minors.sqrt();
    let disc = (fro * fro - 4.0 * prod * prod).max(0.0).sqrt();
    let s1_sq = 0.5 * (fro + disc);
    let s1 = s1_sq.sqrt();
    let s2 = if s1 > 0.0 { prod / s1 } else { 0.0 };
    (s1, s2)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn inner_is_conjugate_linear_in_first_argument() {
        let a = CVec2::new(c(0.0, 1.0), c(1.0, 0.0));
        let b = CVec2::new(c(1.0, 0.0), c(0.0, 0.0));
        assert_eq!(a.inner(&b), c(0.0, -1.0));
    }

    #[test]
    fn singular_values_of_diagonal() {
        let rows = [[c(3.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(0.0, 2.0)], [c(0.0, 0.0); 2]];
        let (s1, s2) = singular_values_3x2(&rows);
        assert!((s1 - 3.0).abs() < 1e-14);
        assert!((s2 - 2.0).abs() < 1e-14);
    }

    #[test]
    fn rank_one_has_tiny_second_singular_value() {
        let h = [c(0.3, -1.2), c(0.7, 0.4)];
        let k = c(-0.4, 2.2);
        let rows = [h, [h[0] * k, h[1] * k], [c(0.0, 0.0); 2]];
        let (s1, s2) = singular_values_3x2(&rows);
        assert!(s2 / s1 < 1e-14, "{s2} / {s1}");
    }

    #[test]
    fn gaussian_rate_identity_channel() {
        let g: Mat2 = [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(1.0, 0.0)]];
        let r = gaussian_rate_2x2(&g, [3.0, 7.0], [1.0, 1.0]);
        assert!((r - 5.0).abs() < 1e-12);
    }
}
