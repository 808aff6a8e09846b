//! Polarimetric primitives: scattering vectors, second-order (coherency /
//! covariance) matrices, multilooking, and the dB/scaling pipeline that turns
//! them into real-valued channel cubes.
//!
//! Conventions used throughout:
//! - monostatic reciprocity, so a single cross-pol component stands for both
//!   HV and VH;
//! - coherency `T` comes from Pauli vectors, covariance `C` from
//!   lexicographic vectors, both via the same outer-product average;
//! - rasters are row-major with `(x, y)` addressing column/row.

pub mod feature;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// One pixel of a single-look complex scattering matrix.
///
/// Reciprocity is baked in: `s_hv` represents both off-diagonal entries of
/// the 2×2 scattering matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScatteringPixel {
    pub s_hh: Complex64,
    pub s_hv: Complex64,
    pub s_vv: Complex64,
}

impl ScatteringPixel {
    pub fn new(s_hh: Complex64, s_hv: Complex64, s_vv: Complex64) -> Self {
        Self { s_hh, s_hv, s_vv }
    }

    pub fn is_finite(&self) -> bool {
        [self.s_hh, self.s_hv, self.s_vv]
            .iter()
            .all(|c| c.re.is_finite() && c.im.is_finite())
    }
}

/// Basis choice for second-order statistics.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Basis {
    /// Pauli scattering vectors; averages to the coherency matrix `T`.
    Pauli,
    /// Lexicographic vectors; averages to the covariance matrix `C`.
    Lexicographic,
}

/// A stack of single-look scattering planes sharing one pixel grid.
#[derive(Clone, Debug)]
pub struct ScatteringImage {
    width: usize,
    height: usize,
    looks: Vec<Vec<ScatteringPixel>>,
}

impl ScatteringImage {
    /// Builds an image from per-look planes (row-major, length
    /// `width * height` each). At least one look is required and every
    /// component must be finite.
    pub fn new(width: usize, height: usize, looks: Vec<Vec<ScatteringPixel>>) -> Result<Self> {
        if looks.is_empty() {
            return Err(Error::NoLooks);
        }
        for (i, plane) in looks.iter().enumerate() {
            if plane.len() != width * height {
                return Err(Error::DimensionMismatch {
                    what: format!("look plane {i}"),
                    expected_width: width,
                    expected_height: height,
                    found_width: plane.len(),
                    found_height: 1,
                });
            }
            if let Some(bad) = plane.iter().position(|p| !p.is_finite()) {
                return Err(Error::NonFinite(format!(
                    "scattering pixel ({}, {}) in look {i}",
                    bad % width,
                    bad / width
                )));
            }
        }
        Ok(Self {
            width,
            height,
            looks,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn num_looks(&self) -> usize {
        self.looks.len()
    }

    pub fn look(&self, i: usize) -> &[ScatteringPixel] {
        &self.looks[i]
    }

    pub fn pixel(&self, look: usize, x: usize, y: usize) -> ScatteringPixel {
        self.looks[look][y * self.width + x]
    }
}

/// A 3×3 complex Hermitian matrix stored as its upper triangle.
///
/// The representation makes Hermitian symmetry structural: there is no way
/// to hold `M ≠ M^H`. Diagonal entries are real by construction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Hermitian3 {
    pub d11: f64,
    pub d22: f64,
    pub d33: f64,
    pub m12: Complex64,
    pub m13: Complex64,
    pub m23: Complex64,
}

impl Hermitian3 {
    pub fn zero() -> Self {
        Self {
            d11: 0.0,
            d22: 0.0,
            d33: 0.0,
            m12: Complex64::ZERO,
            m13: Complex64::ZERO,
            m23: Complex64::ZERO,
        }
    }

    pub fn diagonal(d11: f64, d22: f64, d33: f64) -> Self {
        Self {
            d11,
            d22,
            d33,
            ..Self::zero()
        }
    }

    /// Rank-1 outer product `v v^H`.
    pub fn from_outer(v: &[Complex64; 3]) -> Self {
        Self {
            d11: v[0].norm_sqr(),
            d22: v[1].norm_sqr(),
            d33: v[2].norm_sqr(),
            m12: v[0] * v[1].conj(),
            m13: v[0] * v[2].conj(),
            m23: v[1] * v[2].conj(),
        }
    }

    /// Reads the upper triangle of a full matrix, taking real parts on the
    /// diagonal. The caller asserts the input is (numerically) Hermitian.
    pub fn from_full(m: &[[Complex64; 3]; 3]) -> Self {
        Self {
            d11: m[0][0].re,
            d22: m[1][1].re,
            d33: m[2][2].re,
            m12: m[0][1],
            m13: m[0][2],
            m23: m[1][2],
        }
    }

    /// Expands to a dense matrix, mirroring the conjugate lower triangle.
    pub fn full(&self) -> [[Complex64; 3]; 3] {
        [
            [self.d11.into(), self.m12, self.m13],
            [self.m12.conj(), self.d22.into(), self.m23],
            [self.m13.conj(), self.m23.conj(), self.d33.into()],
        ]
    }

    pub fn trace(&self) -> f64 {
        self.d11 + self.d22 + self.d33
    }

    /// Determinant (real for Hermitian matrices).
    pub fn det(&self) -> f64 {
        self.d11 * self.d22 * self.d33 + 2.0 * (self.m12 * self.m23 * self.m13.conj()).re
            - self.d11 * self.m23.norm_sqr()
            - self.d22 * self.m13.norm_sqr()
            - self.d33 * self.m12.norm_sqr()
    }

    /// Eigenvalues in descending order, computed by cyclic Jacobi rotations.
    /// Unlike closed-form root formulas, Jacobi keeps the error at O(ε)·‖A‖
    /// even for repeated eigenvalues, which rank-deficient averages hit
    /// constantly (a single-look coherency matrix is exactly rank one).
    pub fn eigenvalues(&self) -> [f64; 3] {
        let scale = self
            .d11
            .abs()
            .max(self.d22.abs())
            .max(self.d33.abs())
            .max(self.m12.norm())
            .max(self.m13.norm())
            .max(self.m23.norm());
        let mut m = *self;
        if scale > 0.0 {
            let target = (f64::EPSILON * scale).powi(2);
            for _sweep in 0..30 {
                let off = m.m12.norm_sqr() + m.m13.norm_sqr() + m.m23.norm_sqr();
                if off <= target {
                    break;
                }
                for (p, q) in [(0usize, 1usize), (0, 2), (1, 2)] {
                    let a = m.full();
                    let b = a[p][q].norm();
                    if b == 0.0 {
                        continue;
                    }
                    let w = a[p][q] / b;
                    let tau = (a[q][q].re - a[p][p].re) / (2.0 * b);
                    let t = tau.signum() / (tau.abs() + tau.hypot(1.0));
                    let c = 1.0 / t.hypot(1.0);
                    let s = t * c;
                    // Unitary plane rotation chosen to zero the (p,q) entry
                    // of G·M·G^H; `transform` applies exactly that product.
                    let mut g = [[Complex64::ZERO; 3]; 3];
                    for (i, row) in g.iter_mut().enumerate() {
                        row[i] = Complex64::ONE;
                    }
                    g[p][p] = c.into();
                    g[p][q] = -(w * s);
                    g[q][p] = s.into();
                    g[q][q] = w * c;
                    m = m.transform(&g);
                }
            }
        }
        let mut eig = [m.d11, m.d22, m.d33];
        eig.sort_by(|a, b| b.partial_cmp(a).unwrap());
        eig
    }

    /// Congruence transform `M · self · M^H` for a dense 3×3 `M`.
    pub fn transform(&self, m: &[[Complex64; 3]; 3]) -> Self {
        let a = self.full();
        let mut ma = [[Complex64::ZERO; 3]; 3];
        for r in 0..3 {
            for c in 0..3 {
                for k in 0..3 {
                    ma[r][c] += m[r][k] * a[k][c];
                }
            }
        }
        let mut out = [[Complex64::ZERO; 3]; 3];
        for r in 0..3 {
            for c in 0..3 {
                for k in 0..3 {
                    out[r][c] += ma[r][k] * m[c][k].conj();
                }
            }
        }
        Self::from_full(&out)
    }
}

impl std::ops::Add for Hermitian3 {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self {
            d11: self.d11 + rhs.d11,
            d22: self.d22 + rhs.d22,
            d33: self.d33 + rhs.d33,
            m12: self.m12 + rhs.m12,
            m13: self.m13 + rhs.m13,
            m23: self.m23 + rhs.m23,
        }
    }
}

impl std::ops::AddAssign for Hermitian3 {
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl std::ops::Mul<f64> for Hermitian3 {
    type Output = Self;
    fn mul(self, s: f64) -> Self {
        Self {
            d11: self.d11 * s,
            d22: self.d22 * s,
            d33: self.d33 * s,
            m12: self.m12 * s,
            m13: self.m13 * s,
            m23: self.m23 * s,
        }
    }
}

/// Per-pixel 3×3 Hermitian matrices on a raster grid.
#[derive(Clone, Debug)]
pub struct HermitianImage {
    width: usize,
    height: usize,
    data: Vec<Hermitian3>,
}

impl HermitianImage {
    pub fn new(width: usize, height: usize, data: Vec<Hermitian3>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::DimensionMismatch {
                what: "hermitian pixel buffer".into(),
                expected_width: width,
                expected_height: height,
                found_width: data.len(),
                found_height: 1,
            });
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, value: Hermitian3) -> Self {
        Self {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn at(&self, x: usize, y: usize) -> &Hermitian3 {
        &self.data[y * self.width + x]
    }

    pub fn at_mut(&mut self, x: usize, y: usize) -> &mut Hermitian3 {
        &mut self.data[y * self.width + x]
    }

    pub fn pixels(&self) -> &[Hermitian3] {
        &self.data
    }

    /// Applies `f` to every pixel, preserving the grid.
    pub fn map(&self, f: impl Fn(&Hermitian3) -> Hermitian3) -> Self {
        Self {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(f).collect(),
        }
    }
}

/// Pauli scattering vector `k = [s_hh + s_vv, s_hh − s_vv, 2 s_hv] / √2`.
pub fn pauli_vector(p: &ScatteringPixel) -> [Complex64; 3] {
    let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
    [
        (p.s_hh + p.s_vv) * inv_sqrt2,
        (p.s_hh - p.s_vv) * inv_sqrt2,
        2.0 * p.s_hv * inv_sqrt2,
    ]
}

/// Lexicographic scattering vector `Ω = [s_hh, √2 s_hv, s_vv]`.
pub fn lexicographic_vector(p: &ScatteringPixel) -> [Complex64; 3] {
    [
        p.s_hh,
        std::f64::consts::SQRT_2 * p.s_hv,
        p.s_vv,
    ]
}

/// Total scattering power: `|s_hh|² + 2|s_hv|² + |s_vv|²`, the cross term
/// counted twice under reciprocity. Equals `‖k‖²` and `‖Ω‖²`.
pub fn span(p: &ScatteringPixel) -> f64 {
    p.s_hh.norm_sqr() + 2.0 * p.s_hv.norm_sqr() + p.s_vv.norm_sqr()
}

/// Mean outer product `(1/n) Σ v_i v_i^H` over a non-empty vector list.
pub fn second_order_average(vectors: &[[Complex64; 3]]) -> Result<Hermitian3> {
    if vectors.is_empty() {
        return Err(Error::NoLooks);
    }
    let mut acc = Hermitian3::zero();
    for v in vectors {
        acc += Hermitian3::from_outer(v);
    }
    Ok(acc * (1.0 / vectors.len() as f64))
}

/// Coherency (`T`, Pauli basis) or covariance (`C`, lexicographic basis)
/// image: per pixel, projects every look onto the chosen basis and averages
/// the outer products.
pub fn build_hermitian_image(img: &ScatteringImage, basis: Basis) -> HermitianImage {
    let n = img.num_looks();
    let mut data = Vec::with_capacity(img.width() * img.height());
    let mut vectors = vec![[Complex64::ZERO; 3]; n];
    for y in 0..img.height() {
        for x in 0..img.width() {
            for (i, v) in vectors.iter_mut().enumerate() {
                let p = img.pixel(i, x, y);
                *v = match basis {
                    Basis::Pauli => pauli_vector(&p),
                    Basis::Lexicographic => lexicographic_vector(&p),
                };
            }
            // `ScatteringImage` guarantees at least one look.
            data.push(second_order_average(&vectors).expect("non-empty looks"));
        }
    }
    HermitianImage {
        width: img.width(),
        height: img.height(),
        data,
    }
}

/// Change of basis `T = M C M^H` with the unitary Pauli-from-lexicographic
/// matrix, valid because `k = M Ω` holds per pixel.
pub fn coherency_from_covariance(c: &Hermitian3) -> Hermitian3 {
    c.transform(&pauli_from_lex())
}

/// Inverse basis change `C = M^H T M`.
pub fn covariance_from_coherency(t: &Hermitian3) -> Hermitian3 {
    let m = pauli_from_lex();
    // M is unitary, so M^H = M^{-1}; conjugate-transpose it in place.
    let mut mh = [[Complex64::ZERO; 3]; 3];
    for r in 0..3 {
        for c in 0..3 {
            mh[r][c] = m[c][r].conj();
        }
    }
    t.transform(&mh)
}

fn pauli_from_lex() -> [[Complex64; 3]; 3] {
    let s = Complex64::from(std::f64::consts::FRAC_1_SQRT_2);
    let zero = Complex64::ZERO;
    let one = Complex64::ONE;
    [[s, zero, s], [s, zero, -s], [zero, one, zero]]
}

/// Mirror (reflect-101) index for out-of-range raster access: `-1 → 1`,
/// `len → len-2`, and so on; a length-1 axis always resolves to `0`.
pub fn mirror_index(i: isize, len: usize) -> usize {
    debug_assert!(len > 0);
    if len == 1 {
        return 0;
    }
    let period = 2 * (len as isize - 1);
    let m = i.rem_euclid(period);
    if m >= len as isize {
        (period - m) as usize
    } else {
        m as usize
    }
}

/// Element-wise mean of each pixel's `window × window` neighborhood with
/// mirror padding at the borders. Averaging Hermitian PSD matrices keeps
/// them Hermitian PSD, so this is a valid (boxcar) multilook/speckle filter.
pub fn boxcar_multilook(h: &HermitianImage, window: usize) -> Result<HermitianImage> {
    if window == 0 || window % 2 == 0 {
        return Err(Error::BadWindow(window));
    }
    let half = (window / 2) as isize;
    let norm = 1.0 / (window * window) as f64;
    let mut data = Vec::with_capacity(h.width() * h.height());
    for y in 0..h.height() as isize {
        for x in 0..h.width() as isize {
            let mut acc = Hermitian3::zero();
            for dy in -half..=half {
                for dx in -half..=half {
                    let sy = mirror_index(y + dy, h.height());
                    let sx = mirror_index(x + dx, h.width());
                    acc += *h.at(sx, sy);
                }
            }
            data.push(acc * norm);
        }
    }
    Ok(HermitianImage {
        width: h.width(),
        height: h.height(),
        data,
    })
}

/// Per-pixel trace raster of a Hermitian image; for coherency/covariance
/// matrices this is the mean span of the underlying looks.
pub fn trace_raster(h: &HermitianImage) -> Vec<f64> {
    h.pixels().iter().map(Hermitian3::trace).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{self, ChaCha8Rng};
    use rand_core::SeedableRng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_pixel(rng: &mut ChaCha8Rng) -> ScatteringPixel {
        let draw = |r: &mut ChaCha8Rng| {
            c(rng::uniform_in(r, -2.0, 2.0), rng::uniform_in(r, -2.0, 2.0))
        };
        ScatteringPixel::new(draw(rng), draw(rng), draw(rng))
    }

    fn norm_sqr(v: &[Complex64; 3]) -> f64 {
        v.iter().map(|z| z.norm_sqr()).sum()
    }

    fn max_abs_diff(a: &Hermitian3, b: &Hermitian3) -> f64 {
        let (fa, fb) = (a.full(), b.full());
        let mut worst = 0.0f64;
        for r in 0..3 {
            for c in 0..3 {
                worst = worst.max((fa[r][c] - fb[r][c]).norm());
            }
        }
        worst
    }

    #[test]
    fn pauli_vector_on_canonical_scatterers() {
        let sqrt2 = std::f64::consts::SQRT_2;
        let k = pauli_vector(&ScatteringPixel::new(c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)));
        assert_eq!(k, [c(sqrt2, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);

        let k = pauli_vector(&ScatteringPixel::new(c(1.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)));
        assert_eq!(k, [c(0.0, 0.0), c(sqrt2, 0.0), c(0.0, 0.0)]);

        let k = pauli_vector(&ScatteringPixel::new(c(0.0, 0.0), c(0.0, 1.0), c(0.0, 0.0)));
        assert!((k[2] - c(0.0, sqrt2)).norm() < 1e-15);
        assert_eq!((k[0], k[1]), (c(0.0, 0.0), c(0.0, 0.0)));
    }

    #[test]
    fn lexicographic_vector_on_canonical_scatterers() {
        let sqrt2 = std::f64::consts::SQRT_2;
        let o = lexicographic_vector(&ScatteringPixel::new(c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)));
        assert_eq!(o, [c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);

        let o = lexicographic_vector(&ScatteringPixel::new(c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)));
        assert_eq!(o, [c(0.0, 0.0), c(sqrt2, 0.0), c(0.0, 0.0)]);

        let o = lexicographic_vector(&ScatteringPixel::new(c(0.0, 2.0), c(0.0, 0.0), c(-1.0, 0.0)));
        assert_eq!(o, [c(0.0, 2.0), c(0.0, 0.0), c(-1.0, 0.0)]);
    }

    #[test]
    fn span_counts_cross_term_twice() {
        let unit = ScatteringPixel::new(c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0));
        assert_eq!(span(&unit), 4.0);
        assert_eq!(span(&ScatteringPixel::new(c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0))), 0.0);
        assert_eq!(span(&ScatteringPixel::new(c(0.0, 3.0), c(0.0, 0.0), c(0.0, 0.0))), 9.0);
    }

    #[test]
    fn vector_norms_equal_span() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..1000 {
            let p = random_pixel(&mut rng);
            let s = span(&p);
            let k = norm_sqr(&pauli_vector(&p));
            let o = norm_sqr(&lexicographic_vector(&p));
            assert!((k - s).abs() <= 1e-12 * s.max(1.0), "pauli norm {k} vs span {s}");
            assert!((o - s).abs() <= 1e-12 * s.max(1.0), "lex norm {o} vs span {s}");
        }
    }

    #[test]
    fn second_order_average_of_single_vector() {
        let t = second_order_average(&[[c(std::f64::consts::SQRT_2, 0.0), c(0.0, 0.0), c(0.0, 0.0)]]).unwrap();
        assert!(max_abs_diff(&t, &Hermitian3::diagonal(2.0, 0.0, 0.0)) < 1e-15);
    }

    #[test]
    fn second_order_average_of_two_orthogonal_vectors() {
        let t = second_order_average(&[
            [c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)],
            [c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)],
        ])
        .unwrap();
        assert!(max_abs_diff(&t, &Hermitian3::diagonal(0.5, 0.5, 0.0)) < 1e-15);
    }

    #[test]
    fn second_order_average_matches_elementwise_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let vectors: Vec<[Complex64; 3]> = (0..50)
            .map(|_| {
                let mut v = [Complex64::ZERO; 3];
                for z in &mut v {
                    *z = c(rng::uniform_in(&mut rng, -1.0, 1.0), rng::uniform_in(&mut rng, -1.0, 1.0));
                }
                v
            })
            .collect();
        let got = second_order_average(&vectors).unwrap().full();

        // Independent oracle: accumulate each of the 9 entries directly.
        let mut want = [[Complex64::ZERO; 3]; 3];
        for v in &vectors {
            for r in 0..3 {
                for cc in 0..3 {
                    want[r][cc] += v[r] * v[cc].conj();
                }
            }
        }
        for row in &mut want {
            for z in row.iter_mut() {
                *z /= vectors.len() as f64;
            }
        }
        for r in 0..3 {
            for cc in 0..3 {
                assert!((got[r][cc] - want[r][cc]).norm() < 1e-12);
                assert!((got[r][cc] - got[cc][r].conj()).norm() < 1e-12, "hermitian");
            }
        }
    }

    #[test]
    fn second_order_average_rejects_empty_input() {
        assert!(matches!(second_order_average(&[]), Err(Error::NoLooks)));
    }

    #[test]
    fn averaged_matrices_are_hermitian_psd_with_span_trace() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..200 {
            let n = 1 + (rng::uniform(&mut rng) * 6.0) as usize;
            let pixels: Vec<ScatteringPixel> = (0..n).map(|_| random_pixel(&mut rng)).collect();
            let ks: Vec<[Complex64; 3]> = pixels.iter().map(pauli_vector).collect();
            let t = second_order_average(&ks).unwrap();
            let mean_span = pixels.iter().map(span).sum::<f64>() / n as f64;
            assert!((t.trace() - mean_span).abs() <= 1e-12 * mean_span.max(1.0));
            let min_eig = t.eigenvalues()[2];
            assert!(min_eig >= -1e-10 * t.trace(), "eigenvalue {min_eig}");
        }
    }

    #[test]
    fn eigenvalues_of_known_matrices() {
        let eig = Hermitian3::diagonal(3.0, 1.0, 2.0).eigenvalues();
        assert_eq!(eig, [3.0, 2.0, 1.0]);

        // [[2,1,0],[1,2,0],[0,0,3]] has eigenvalues {3, 3, 1}.
        let a = Hermitian3 {
            d11: 2.0,
            d22: 2.0,
            d33: 3.0,
            m12: c(1.0, 0.0),
            m13: c(0.0, 0.0),
            m23: c(0.0, 0.0),
        };
        let eig = a.eigenvalues();
        assert!((eig[0] - 3.0).abs() < 1e-12);
        assert!((eig[1] - 3.0).abs() < 1e-12);
        assert!((eig[2] - 1.0).abs() < 1e-12);

        // [[1,i,0],[-i,1,0],[0,0,2]] has eigenvalues {2, 2, 0}.
        let b = Hermitian3 {
            d11: 1.0,
            d22: 1.0,
            d33: 2.0,
            m12: c(0.0, 1.0),
            m13: c(0.0, 0.0),
            m23: c(0.0, 0.0),
        };
        let eig = b.eigenvalues();
        assert!((eig[0] - 2.0).abs() < 1e-12);
        assert!((eig[1] - 2.0).abs() < 1e-12);
        assert!(eig[2].abs() < 1e-12);
    }

    #[test]
    fn det_equals_eigenvalue_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..100 {
            let vectors: Vec<[Complex64; 3]> = (0..5)
                .map(|_| {
                    let mut v = [Complex64::ZERO; 3];
                    for z in &mut v {
                        *z = c(rng::uniform_in(&mut rng, -1.0, 1.0), rng::uniform_in(&mut rng, -1.0, 1.0));
                    }
                    v
                })
                .collect();
            let m = second_order_average(&vectors).unwrap();
            let [e1, e2, e3] = m.eigenvalues();
            let scale = m.trace().powi(3).max(1e-9);
            assert!((m.det() - e1 * e2 * e3).abs() <= 1e-10 * scale);
        }
    }

    #[test]
    fn basis_transform_links_coherency_and_covariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(47);
        for _ in 0..100 {
            let pixels: Vec<ScatteringPixel> = (0..4).map(|_| random_pixel(&mut rng)).collect();
            let t = second_order_average(&pixels.iter().map(pauli_vector).collect::<Vec<_>>()).unwrap();
            let cov = second_order_average(&pixels.iter().map(lexicographic_vector).collect::<Vec<_>>()).unwrap();
            assert!(max_abs_diff(&coherency_from_covariance(&cov), &t) < 1e-12);
            assert!(max_abs_diff(&covariance_from_coherency(&t), &cov) < 1e-12);
        }
    }

    #[test]
    fn build_hermitian_image_single_pixel() {
        let img = ScatteringImage::new(
            1,
            1,
            vec![vec![ScatteringPixel::new(c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0))]],
        )
        .unwrap();
        let t = build_hermitian_image(&img, Basis::Pauli);
        assert!(max_abs_diff(t.at(0, 0), &Hermitian3::diagonal(2.0, 0.0, 0.0)) < 1e-15);
    }

    #[test]
    fn build_hermitian_image_shape_and_trace() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (w, h, n) = (3, 2, 4);
        let looks: Vec<Vec<ScatteringPixel>> = (0..n)
            .map(|_| (0..w * h).map(|_| random_pixel(&mut rng)).collect())
            .collect();
        let img = ScatteringImage::new(w, h, looks).unwrap();
        let t = build_hermitian_image(&img, Basis::Pauli);
        assert_eq!((t.width(), t.height()), (w, h));
        for y in 0..h {
            for x in 0..w {
                let mean_span =
                    (0..n).map(|i| span(&img.pixel(i, x, y))).sum::<f64>() / n as f64;
                assert!((t.at(x, y).trace() - mean_span).abs() < 1e-12 * mean_span.max(1.0));
            }
        }
    }

    #[test]
    fn empty_looks_rejected() {
        assert!(matches!(ScatteringImage::new(2, 2, vec![]), Err(Error::NoLooks)));
    }

    #[test]
    fn mirror_index_reflects_without_repeating_edges() {
        assert_eq!(mirror_index(-1, 5), 1);
        assert_eq!(mirror_index(-2, 5), 2);
        assert_eq!(mirror_index(0, 5), 0);
        assert_eq!(mirror_index(4, 5), 4);
        assert_eq!(mirror_index(5, 5), 3);
        assert_eq!(mirror_index(6, 5), 2);
        assert_eq!(mirror_index(8, 5), 0);
        assert_eq!(mirror_index(-3, 1), 0);
    }

    #[test]
    fn boxcar_window_one_is_identity_and_constant_is_fixed_point() {
        let m = Hermitian3 {
            d11: 2.0,
            d22: 1.0,
            d33: 0.5,
            m12: c(0.1, -0.2),
            m13: c(0.0, 0.3),
            m23: c(-0.4, 0.0),
        };
        let img = HermitianImage::filled(4, 3, m);
        let w1 = boxcar_multilook(&img, 1).unwrap();
        for (a, b) in w1.pixels().iter().zip(img.pixels()) {
            assert_eq!(a, b);
        }
        let w5 = boxcar_multilook(&img, 5).unwrap();
        for p in w5.pixels() {
            assert!(max_abs_diff(p, &m) < 1e-12);
        }
    }

    #[test]
    fn boxcar_rejects_even_or_zero_window() {
        let img = HermitianImage::filled(3, 3, Hermitian3::zero());
        assert!(matches!(boxcar_multilook(&img, 2), Err(Error::BadWindow(2))));
        assert!(matches!(boxcar_multilook(&img, 0), Err(Error::BadWindow(0))));
    }

    #[test]
    fn boxcar_matches_neighborhood_sum_oracle() {
        // A single nonzero pixel at (2,1) of a 5×5 image, window 3: each
        // output pixel must equal the mirror-padded 9-cell mean computed
        // here with nothing but explicit index arithmetic.
        let mut img = HermitianImage::filled(5, 5, Hermitian3::zero());
        let spike = Hermitian3 {
            d11: 9.0,
            d22: 4.5,
            d33: 1.8,
            m12: c(0.9, 0.9),
            m13: c(-0.9, 0.0),
            m23: c(0.0, 2.7),
        };
        *img.at_mut(2, 1) = spike;
        let out = boxcar_multilook(&img, 3).unwrap();
        for y in 0..5i64 {
            for x in 0..5i64 {
                let mut acc = Hermitian3::zero();
                for dy in -1..=1i64 {
                    for dx in -1..=1i64 {
                        let sy = mirror_index((y + dy) as isize, 5);
                        let sx = mirror_index((x + dx) as isize, 5);
                        acc += *img.at(sx, sy);
                    }
                }
                let want = acc * (1.0 / 9.0);
                assert!(
                    max_abs_diff(out.at(x as usize, y as usize), &want) < 1e-12,
                    "mismatch at ({x},{y})"
                );
            }
        }
        // Interior neighborhoods contain the spike once (value/9); at the
        // top edge the mirrored row duplicates it, doubling the mean.
        assert!((out.at(1, 1).d11 - 1.0).abs() < 1e-12);
        assert!((out.at(3, 2).d11 - 1.0).abs() < 1e-12);
        assert!((out.at(1, 0).d11 - 2.0).abs() < 1e-12);
    }

    #[test]
    fn boxcar_commutes_with_scalar_multiplication() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let data: Vec<Hermitian3> = (0..24)
            .map(|_| {
                let p = random_pixel(&mut rng);
                Hermitian3::from_outer(&pauli_vector(&p))
            })
            .collect();
        let img = HermitianImage::new(6, 4, data).unwrap();
        let scaled_then_boxcar =
            boxcar_multilook(&img.map(|m| *m * 3.25), 3).unwrap();
        let boxcar_then_scaled = boxcar_multilook(&img, 3).unwrap().map(|m| *m * 3.25);
        for (a, b) in scaled_then_boxcar.pixels().iter().zip(boxcar_then_scaled.pixels()) {
            assert!(max_abs_diff(a, b) < 1e-12);
        }
    }

    #[test]
    fn trace_raster_matches_per_pixel_trace() {
        let mut img = HermitianImage::filled(2, 2, Hermitian3::diagonal(1.0, 2.0, 3.0));
        *img.at_mut(1, 1) = Hermitian3::diagonal(0.5, 0.25, 0.25);
        assert_eq!(trace_raster(&img), vec![6.0, 6.0, 6.0, 1.0]);
    }
}
