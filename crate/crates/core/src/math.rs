//! Complex-vector arithmetic, special functions, quadrature and the
//! randomness contract shared by the rest of the crate.

use std::ops::Deref;

use num_complex::Complex64;
use rand::{Error as RandError, Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::{Error, Result};

/// A non-empty vector of finite complex amplitudes.
///
/// Holds the per-relay channel vectors, beamformers, Gram-Schmidt bases and
/// received signals.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexVec(Vec<Complex64>);

impl ComplexVec {
    pub fn new(entries: Vec<Complex64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Domain("complex vector must have length >= 1".into()));
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Domain("complex vector has non-finite entries".into()));
        }
        Ok(Self(entries))
    }

    /// Builds a vector from real/imaginary pairs. Panics on invalid input;
    /// intended for literals.
    pub fn from_pairs(pairs: &[(f64, f64)]) -> Self {
        Self::new(pairs.iter().map(|&(re, im)| Complex64::new(re, im)).collect())
            .expect("literal complex vector")
    }

    pub(crate) fn from_raw(entries: Vec<Complex64>) -> Self {
        debug_assert!(!entries.is_empty());
        Self(entries)
    }

    pub fn into_inner(self) -> Vec<Complex64> {
        self.0
    }

    /// Hermitian inner product `a^H b`.
    pub fn inner(&self, other: &ComplexVec) -> Complex64 {
        assert_eq!(self.len(), other.len(), "inner product of unequal lengths");
        self.iter().zip(other.iter()).map(|(a, b)| a.conj() * b).sum()
    }

    /// Plain bilinear product `a^T b` (no conjugation), as in `w^T h`.
    pub fn dot_t(&self, other: &ComplexVec) -> Complex64 {
        assert_eq!(self.len(), other.len(), "product of unequal lengths");
        self.iter().zip(other.iter()).map(|(a, b)| a * b).sum()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn scale(&self, factor: Complex64) -> ComplexVec {
        Self(self.iter().map(|z| z * factor).collect())
    }

    pub fn conj(&self) -> ComplexVec {
        Self(self.iter().map(|z| z.conj()).collect())
    }

    /// `self + factor * other`.
    pub fn axpy(&self, factor: Complex64, other: &ComplexVec) -> ComplexVec {
        assert_eq!(self.len(), other.len());
        Self(self.iter().zip(other.iter()).map(|(a, b)| a + factor * b).collect())
    }

    pub fn sub(&self, other: &ComplexVec) -> ComplexVec {
        self.axpy(Complex64::new(-1.0, 0.0), other)
    }
}

impl Deref for ComplexVec {
    type Target = [Complex64];

    fn deref(&self) -> &[Complex64] {
        &self.0
    }
}

/// Gaussian tail probability `Q(x) = P(N(0,1) > x)`, evaluated through the
/// complementary error function.
///
/// Underflows to exactly `0.0` beyond `x ~ 38.5`.
pub fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

/// Euler gamma integral `Z(t) = \int_0^\infty x^{t-1} e^{-x} dx` for `t > 0`.
pub fn gamma_fn(t: f64) -> Result<f64> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::Domain(format!("gamma_fn requires finite t > 0, got {t}")));
    }
    Ok(libm::tgamma(t))
}

/// `n!` as a float, exact for `n <= 22`.
pub fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// `binom(n, k)` as a float.
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Fixed-order Gauss-Legendre rule.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Nodes and weights on `[-1, 1]` by Newton iteration on the Legendre
    /// three-term recurrence.
    pub fn new(order: usize) -> Self {
        assert!(order >= 1, "quadrature order must be >= 1");
        let n = order;
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let step = p / d;
                x -= step;
                if step.abs() < 1e-15 {
                    let (_, d) = legendre_with_derivative(n, x);
                    dp = d;
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(mid + half * x))
            .sum::<f64>()
            * half
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let (p_n, p_nm1) = if n == 1 { (x, 1.0) } else { (p1, p0) };
    let dp = n as f64 * (x * p_n - p_nm1) / (x * x - 1.0);
    (p_n, dp)
}

/// A reproducible random stream identified by `(seed, stream_id)`.
///
/// Backed by ChaCha8 with the stream id mapped onto the cipher's 64-bit
/// stream selector, so distinct ids never overlap regardless of how many
/// draws each consumes.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        Self { seed, stream_id, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// One circularly-symmetric complex Gaussian draw with total variance
    /// `variance` (each of re/im carries `variance / 2`). `variance = 0`
    /// yields exactly zero.
    pub fn cn(&mut self, variance: f64) -> Complex64 {
        if variance == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let s = (0.5 * variance).sqrt();
        let re: f64 = self.rng.sample(StandardNormal);
        let im: f64 = self.rng.sample(StandardNormal);
        Complex64::new(s * re, s * im)
    }

    /// Uniform draw from `0..n`.
    pub fn index(&mut self, n: usize) -> usize {
        self.rng.gen_range(0..n)
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.rng.fill_bytes(dest)
    }

    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> std::result::Result<(), RandError> {
        self.rng.try_fill_bytes(dest)
    }
}

/// `n` i.i.d. `CN(0, variance)` entries.
pub fn sample_cn(rng: &mut RngStream, n: usize, variance: f64) -> ComplexVec {
    assert!(n >= 1, "sample_cn needs n >= 1");
    assert!(variance > 0.0, "sample_cn needs variance > 0");
    ComplexVec((0..n).map(|_| rng.cn(variance)).collect())
}

/// Wraps an angle into `[0, 2*pi)`.
pub fn wrap_angle(theta: f64) -> f64 {
    let tau = std::f64::consts::TAU;
    let r = theta.rem_euclid(tau);
    if r >= tau {
        0.0
    } else {
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    /// Adaptive Simpson, used only as an independent oracle.
    fn simpson<F: Fn(f64) -> f64 + Copy>(f: F, a: f64, b: f64, tol: f64) -> f64 {
        fn step<F: Fn(f64) -> f64 + Copy>(
            f: F,
            a: f64,
            b: f64,
            fa: f64,
            fm: f64,
            fb: f64,
            whole: f64,
            tol: f64,
            depth: u32,
        ) -> f64 {
            let m = 0.5 * (a + b);
            let lm = 0.5 * (a + m);
            let rm = 0.5 * (m + b);
            let flm = f(lm);
            let frm = f(rm);
            let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
            let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
            if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
                return left + right + (left + right - whole) / 15.0;
            }
            step(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
                + step(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
        }
        let fa = f(a);
        let fb = f(b);
        let fm = f(0.5 * (a + b));
        let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
        step(f, a, b, fa, fm, fb, whole, tol, 50)
    }

    #[test]
    fn q_at_zero_is_half() {
        assert_eq!(q_function(0.0), 0.5);
    }

    #[test]
    fn q_far_tail_is_tiny_and_finite() {
        let q = q_function(40.0);
        assert!(q.is_finite() && q >= 0.0 && q < 1e-300);
    }

    #[test]
    fn q_matches_integrated_tail() {
        let pdf = |t: f64| (-0.5 * t * t).exp() / (2.0 * PI).sqrt();
        let x = 1.2816;
        let oracle = simpson(pdf, x, x + 40.0, 1e-14);
        assert!((q_function(x) - oracle).abs() < 1e-10, "{} vs {}", q_function(x), oracle);
        assert!((q_function(x) - 0.100).abs() < 1e-4);
    }

    #[test]
    fn q_matches_craig_form() {
        let gl = GaussLegendre::new(256);
        for &x in &[0.1, 0.7, 1.5, 3.0, 5.0] {
            let craig = gl.integrate(0.0, PI / 2.0, |th| (-x * x / (2.0 * th.sin().powi(2))).exp()) / PI;
            assert!(((q_function(x) - craig) / craig).abs() < 1e-10, "x={x}");
        }
    }

    #[test]
    fn gamma_special_values() {
        assert!((gamma_fn(1.0).unwrap() - 1.0).abs() < 1e-14);
        assert!((gamma_fn(0.5).unwrap() - PI.sqrt()).abs() < 1e-13);
        for n in 1..10 {
            let g = gamma_fn(n as f64).unwrap();
            assert!((g - factorial(n - 1)).abs() / g < 1e-13);
        }
    }

    #[test]
    fn gamma_matches_euler_integral() {
        let oracle = simpson(|x: f64| x.powf(3.5) * (-x).exp(), 0.0, 120.0, 1e-12);
        let g = gamma_fn(4.5).unwrap();
        assert!((g - oracle).abs() / oracle < 1e-9, "{g} vs {oracle}");
        assert!((g - 11.6317).abs() < 1e-4);
    }

    #[test]
    fn gamma_rejects_nonpositive() {
        assert!(matches!(gamma_fn(0.0), Err(Error::Domain(_))));
        assert!(matches!(gamma_fn(-1.5), Err(Error::Domain(_))));
    }

    #[test]
    fn gamma_recurrence() {
        for &t in &[0.5, 1.0, 2.5, 7.0] {
            let lhs = gamma_fn(t + 1.0).unwrap();
            let rhs = t * gamma_fn(t).unwrap();
            assert!((lhs - rhs).abs() / rhs < 1e-10);
        }
    }

    #[test]
    fn gauss_legendre_is_exact_on_polynomials() {
        let gl = GaussLegendre::new(8);
        // exact up to degree 15
        let v = gl.integrate(-1.0, 2.0, |x| x.powi(15) - 3.0 * x.powi(4) + 1.0);
        let exact = (2f64.powi(16) - 1.0) / 16.0 - 3.0 * (32.0 + 1.0) / 5.0 + 3.0;
        assert!((v - exact).abs() < 1e-10);
        let w: f64 = GaussLegendre::new(512).weights.iter().sum();
        assert!((w - 2.0).abs() < 1e-12);
    }

    #[test]
    fn inner_product_is_real_nonnegative_on_self() {
        let a = ComplexVec::from_pairs(&[(1.0, -2.0), (0.5, 3.0)]);
        let ip = a.inner(&a);
        assert!(ip.im.abs() < 1e-15);
        assert!((ip.re - a.norm_sqr()).abs() < 1e-15);
    }

    #[test]
    fn empty_and_nonfinite_vectors_are_rejected() {
        assert!(ComplexVec::new(vec![]).is_err());
        assert!(ComplexVec::new(vec![Complex64::new(f64::NAN, 0.0)]).is_err());
    }

    #[test]
    fn cn_unit_variance() {
        let mut rng = RngStream::new(7, 0);
        let v = sample_cn(&mut rng, 1_000_000, 1.0);
        let p = v.norm_sqr() / v.len() as f64;
        assert!((p - 1.0).abs() < 0.01, "{p}");
        let re: f64 = v.iter().map(|z| z.re * z.re).sum::<f64>() / v.len() as f64;
        assert!((re - 0.5).abs() < 0.01);
    }

    #[test]
    fn cn_small_variance_within_chi_square_band() {
        let n = 200_000;
        let mut rng = RngStream::new(11, 3);
        let v = sample_cn(&mut rng, n, 0.01);
        let p = v.norm_sqr() / n as f64;
        // |z|^2 ~ Exp(mean 0.01): std of the mean is 0.01/sqrt(n)
        let sigma = 0.01 / (n as f64).sqrt();
        assert!((p - 0.01).abs() < 3.0 * sigma, "{p}");
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a = sample_cn(&mut RngStream::new(42, 5), 16, 1.0);
        let b = sample_cn(&mut RngStream::new(42, 5), 16, 1.0);
        let c = sample_cn(&mut RngStream::new(42, 6), 16, 1.0);
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    proptest! {
        #[test]
        fn q_symmetry(x in -30.0f64..30.0) {
            prop_assert!((q_function(x) + q_function(-x) - 1.0).abs() < 1e-12);
        }

        #[test]
        fn q_is_monotone(x in -10.0f64..10.0, dx in 1e-3f64..1.0) {
            // strictly decreasing until the lower tail rounds to 1.0
            prop_assert!(q_function(x + dx) <= q_function(x));
            if x > -8.0 {
                prop_assert!(q_function(x + dx) < q_function(x));
            }
        }

        #[test]
        fn wrapped_angles_stay_in_range(theta in -100.0f64..100.0) {
            let w = wrap_angle(theta);
            prop_assert!((0.0..std::f64::consts::TAU).contains(&w));
        }
    }
}
