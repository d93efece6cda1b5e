//! Compactly supported test functions, their scaled Sobolev norms and the
//! diamond product.

pub mod bump;
mod diamond;
mod json;
mod norms;
pub mod random;

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::{Quadrature, SampledFunction};

pub use diamond::{diamond, DiamondProduct};
pub use norms::{l1_norm, l1_sum_bound_check, sobolev_norm};
pub(crate) use json::parse_complex as json_complex;

/// Highest derivative order the crate relies on.
pub const M_MAX: usize = 12;

/// Beyond this many widths the internal Gaussian is below 1e-13 and is
/// treated as supported.
const GAUSSIAN_CUTOFF: f64 = 8.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    StandardBump,
    MollifiedPolynomial,
    Gaussian,
    Product,
    Shift,
    Scale,
    Sum,
    Conjugate,
    Derivative,
}

#[derive(Debug)]
enum Node {
    /// `amplitude · b((t - center)/radius)`
    Bump {
        center: f64,
        radius: f64,
        amplitude: f64,
    },
    /// `p((t - center)/radius) · b((t - center)/radius)`
    MollifiedPolynomial {
        center: f64,
        radius: f64,
        coeffs: Vec<f64>,
    },
    /// `exp(-(t - center)²/(2 width²))`, not compactly supported
    Gaussian { center: f64, width: f64 },
    Product(Vec<TestFunction>),
    Shift { inner: TestFunction, offset: f64 },
    Scale { inner: TestFunction, lambda: f64 },
    Sum(Vec<(Complex64, TestFunction)>),
    Conjugate(TestFunction),
    Derivative { inner: TestFunction, order: usize },
}

/// An immutable test function with exact derivatives. Cloning is cheap.
#[derive(Debug, Clone)]
pub struct TestFunction {
    node: Arc<Node>,
    lo: f64,
    hi: f64,
    real_valued: bool,
}

fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn binomials(n: usize) -> Vec<f64> {
    let mut row = vec![1.0; n + 1];
    for k in 1..n {
        row[k] = row[k - 1] * (n - k + 1) as f64 / k as f64;
    }
    row
}

impl TestFunction {
    fn from_node(node: Node, lo: f64, hi: f64, real_valued: bool) -> Self {
        TestFunction {
            node: Arc::new(node),
            lo,
            hi,
            real_valued,
        }
    }

    /// The standard bump `e^{-1/(1-t²)}` on `(-1, 1)`.
    pub fn standard_bump() -> Self {
        Self::bump(0.0, 1.0, 1.0).expect("valid parameters")
    }

    /// `amplitude · b((t - center)/radius)`, supported in `(center ± radius)`.
    pub fn bump(center: f64, radius: f64, amplitude: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::precondition("bump radius must be positive"));
        }
        if !(center.is_finite() && amplitude.is_finite()) {
            return Err(Error::precondition("bump parameters must be finite"));
        }
        Ok(Self::from_node(
            Node::Bump {
                center,
                radius,
                amplitude,
            },
            center - radius,
            center + radius,
            true,
        ))
    }

    /// `p(x) b(x)` with `x = (t - center)/radius` and `p(x) = Σ coeffs[k] x^k`.
    pub fn mollified_polynomial(center: f64, radius: f64, coeffs: Vec<f64>) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::precondition("radius must be positive"));
        }
        if coeffs.is_empty() || coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::precondition("coefficients must be finite and non-empty"));
        }
        Ok(Self::from_node(
            Node::MollifiedPolynomial {
                center,
                radius,
                coeffs,
            },
            center - radius,
            center + radius,
            true,
        ))
    }

    /// Gaussian `exp(-(t-center)²/(2 width²))`. Not compactly supported; kept
    /// for phase-space diagnostics. Its nominal support is `center ± 8 width`.
    pub fn gaussian(center: f64, width: f64) -> Result<Self> {
        if !(width > 0.0 && width.is_finite()) {
            return Err(Error::precondition("gaussian width must be positive"));
        }
        let r = GAUSSIAN_CUTOFF * width;
        Ok(Self::from_node(
            Node::Gaussian { center, width },
            center - r,
            center + r,
            true,
        ))
    }

    /// The zero function, represented as an empty sum on `(-1, 1)`.
    pub fn zero() -> Self {
        Self::from_node(Node::Sum(Vec::new()), -1.0, 1.0, true)
    }

    /// `λ^{-1} g(t/λ)`.
    pub fn scale(&self, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::precondition(format!(
                "scale factor must be positive, got {lambda}"
            )));
        }
        Ok(Self::from_node(
            Node::Scale {
                inner: self.clone(),
                lambda,
            },
            lambda * self.lo,
            lambda * self.hi,
            self.real_valued,
        ))
    }

    /// `g(t - offset)`.
    pub fn shift(&self, offset: f64) -> Self {
        Self::from_node(
            Node::Shift {
                inner: self.clone(),
                offset,
            },
            self.lo + offset,
            self.hi + offset,
            self.real_valued,
        )
    }

    /// The same function with its declared support widened to `[lo, hi]`,
    /// so that grids built on the support line up with other grids.
    pub fn with_support(&self, lo: f64, hi: f64) -> Result<Self> {
        if !self.is_compactly_supported() {
            return Err(Error::precondition("only compactly supported functions can be re-declared"));
        }
        if !(lo <= self.lo && hi >= self.hi && hi.is_finite() && lo.is_finite()) {
            return Err(Error::precondition(format!(
                "[{lo}, {hi}] does not contain the support [{}, {}]",
                self.lo, self.hi
            )));
        }
        Ok(Self::from_node(
            Node::Sum(vec![(real(1.0), self.clone())]),
            lo,
            hi,
            self.real_valued,
        ))
    }

    /// `Σ c_k g_k`.
    pub fn sum(terms: Vec<(Complex64, TestFunction)>) -> Result<Self> {
        if terms.is_empty() {
            return Ok(Self::zero());
        }
        let lo = terms.iter().map(|t| t.1.lo).fold(f64::INFINITY, f64::min);
        let hi = terms.iter().map(|t| t.1.hi).fold(f64::NEG_INFINITY, f64::max);
        let real_valued = terms.iter().all(|(c, g)| c.im == 0.0 && g.real_valued);
        Ok(Self::from_node(Node::Sum(terms), lo, hi, real_valued))
    }

    /// `Π g_k`; the support is the intersection of the factor supports.
    pub fn product(factors: Vec<TestFunction>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::precondition("product of no factors"));
        }
        let lo = factors.iter().map(|g| g.lo).fold(f64::NEG_INFINITY, f64::max);
        let hi = factors.iter().map(|g| g.hi).fold(f64::INFINITY, f64::min);
        let real_valued = factors.iter().all(|g| g.real_valued);
        if lo >= hi {
            // disjoint supports: identically zero
            return Ok(Self::zero());
        }
        Ok(Self::from_node(Node::Product(factors), lo, hi, real_valued))
    }

    pub fn times(&self, c: Complex64) -> Self {
        Self::sum(vec![(c, self.clone())]).expect("non-empty")
    }

    pub fn plus(&self, other: &TestFunction) -> Self {
        Self::sum(vec![(real(1.0), self.clone()), (real(1.0), other.clone())]).expect("non-empty")
    }

    /// Complex conjugate.
    pub fn conj(&self) -> Self {
        if self.real_valued {
            return self.clone();
        }
        Self::from_node(Node::Conjugate(self.clone()), self.lo, self.hi, false)
    }

    /// The `order`-th derivative as a test function.
    pub fn derivative(&self, order: usize) -> Self {
        if order == 0 {
            return self.clone();
        }
        Self::from_node(
            Node::Derivative {
                inner: self.clone(),
                order,
            },
            self.lo,
            self.hi,
            self.real_valued,
        )
    }

    pub fn family(&self) -> Family {
        match &*self.node {
            Node::Bump { .. } => Family::StandardBump,
            Node::MollifiedPolynomial { .. } => Family::MollifiedPolynomial,
            Node::Gaussian { .. } => Family::Gaussian,
            Node::Product(_) => Family::Product,
            Node::Shift { .. } => Family::Shift,
            Node::Scale { .. } => Family::Scale,
            Node::Sum(_) => Family::Sum,
            Node::Conjugate(_) => Family::Conjugate,
            Node::Derivative { .. } => Family::Derivative,
        }
    }

    /// Every derivative vanishes outside `(lo, hi)`.
    pub fn support(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }
    pub fn center(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }
    pub fn support_radius(&self) -> f64 {
        0.5 * (self.hi - self.lo)
    }
    /// Points where `g` fails to be analytic: the support ends of its
    /// compactly supported building blocks. Taylor expansions about `t`
    /// converge at most out to the nearest of these.
    pub fn edges(&self) -> Vec<f64> {
        let mut out = match &*self.node {
            Node::Bump { center, radius, .. } | Node::MollifiedPolynomial { center, radius, .. } => {
                vec![center - radius, center + radius]
            }
            Node::Gaussian { .. } => Vec::new(),
            Node::Product(fs) => fs.iter().flat_map(|g| g.edges()).collect(),
            Node::Sum(terms) => terms.iter().flat_map(|(_, g)| g.edges()).collect(),
            Node::Shift { inner, offset } => inner.edges().into_iter().map(|e| e + offset).collect(),
            Node::Scale { inner, lambda } => inner.edges().into_iter().map(|e| e * lambda).collect(),
            Node::Conjugate(inner) | Node::Derivative { inner, .. } => inner.edges(),
        };
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }

    pub fn is_real_valued(&self) -> bool {
        self.real_valued
    }
    /// True only for the Gaussian family or compositions containing it.
    pub fn is_compactly_supported(&self) -> bool {
        match &*self.node {
            Node::Gaussian { .. } => false,
            Node::Bump { .. } | Node::MollifiedPolynomial { .. } => true,
            Node::Product(fs) => fs.iter().any(|g| g.is_compactly_supported()),
            Node::Shift { inner, .. }
            | Node::Scale { inner, .. }
            | Node::Conjugate(inner)
            | Node::Derivative { inner, .. } => inner.is_compactly_supported(),
            Node::Sum(ts) => ts.iter().all(|(_, g)| g.is_compactly_supported()),
        }
    }

    /// Whether the (closed) support lies within `[-d, d]`.
    pub fn supported_in(&self, d: f64) -> bool {
        let slack = 1e-12 * d.abs().max(1.0);
        self.lo >= -d - slack && self.hi <= d + slack
    }

    /// `g(t)`.
    pub fn value(&self, t: f64) -> Complex64 {
        if t <= self.lo || t >= self.hi {
            if !matches!(&*self.node, Node::Gaussian { .. }) {
                return real(0.0);
            }
        }
        match &*self.node {
            Node::Bump {
                center,
                radius,
                amplitude,
            } => real(amplitude * bump::value((t - center) / radius)),
            Node::MollifiedPolynomial {
                center,
                radius,
                coeffs,
            } => {
                let x = (t - center) / radius;
                let p = coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c);
                real(p * bump::value(x))
            }
            Node::Gaussian { center, width } => {
                let x = (t - center) / width;
                real((-0.5 * x * x).exp())
            }
            Node::Product(fs) => fs.iter().map(|g| g.value(t)).product(),
            Node::Shift { inner, offset } => inner.value(t - offset),
            Node::Scale { inner, lambda } => inner.value(t / lambda) / lambda,
            Node::Sum(ts) => ts.iter().map(|(c, g)| c * g.value(t)).sum(),
            Node::Conjugate(inner) => inner.value(t).conj(),
            Node::Derivative { .. } => self.jet(t, 0)[0],
        }
    }

    /// `[g(t), g'(t), ..., g^{(n)}(t)]`.
    pub fn jet(&self, t: f64, n: usize) -> Vec<Complex64> {
        let mut out = vec![real(0.0); n + 1];
        self.jet_into(t, &mut out);
        out
    }

    /// Fills `out[k]` with `g^{(k)}(t)`.
    pub fn jet_into(&self, t: f64, out: &mut [Complex64]) {
        let n = out.len();
        if n == 0 {
            return;
        }
        let compact = !matches!(&*self.node, Node::Gaussian { .. });
        if compact && (t <= self.lo || t >= self.hi) {
            out.iter_mut().for_each(|v| *v = real(0.0));
            return;
        }
        match &*self.node {
            Node::Bump {
                center,
                radius,
                amplitude,
            } => {
                let mut j = vec![0.0; n];
                bump::jet((t - center) / radius, &mut j);
                let mut s = *amplitude;
                for (o, v) in out.iter_mut().zip(j) {
                    *o = real(s * v);
                    s /= radius;
                }
            }
            Node::MollifiedPolynomial {
                center,
                radius,
                coeffs,
            } => {
                let x = (t - center) / radius;
                let mut bj = vec![0.0; n];
                bump::jet(x, &mut bj);
                let pj = polynomial_jet(coeffs, x, n);
                let mut s = 1.0;
                for m in 0..n {
                    let b = binomials(m);
                    let v: f64 = (0..=m).map(|k| b[k] * pj[k] * bj[m - k]).sum();
                    out[m] = real(s * v);
                    s /= radius;
                }
            }
            Node::Gaussian { center, width } => {
                // d^k/dx^k e^{-x²/2} = (-1)^k He_k(x) e^{-x²/2}
                let x = (t - center) / width;
                let g = (-0.5 * x * x).exp();
                let (mut he_prev, mut he) = (0.0, 1.0);
                let mut s = 1.0;
                for (k, o) in out.iter_mut().enumerate() {
                    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                    *o = real(sign * he * g * s);
                    let next = x * he - k as f64 * he_prev;
                    he_prev = he;
                    he = next;
                    s /= width;
                }
            }
            Node::Product(fs) => {
                let mut acc = fs[0].jet(t, n - 1);
                for g in &fs[1..] {
                    let other = g.jet(t, n - 1);
                    let mut next = vec![real(0.0); n];
                    for m in 0..n {
                        let b = binomials(m);
                        next[m] = (0..=m).map(|k| acc[k] * other[m - k] * b[k]).sum();
                    }
                    acc = next;
                }
                out.copy_from_slice(&acc);
            }
            Node::Shift { inner, offset } => inner.jet_into(t - offset, out),
            Node::Scale { inner, lambda } => {
                inner.jet_into(t / lambda, out);
                let mut s = 1.0 / lambda;
                for o in out.iter_mut() {
                    *o *= s;
                    s /= lambda;
                }
            }
            Node::Sum(ts) => {
                out.iter_mut().for_each(|v| *v = real(0.0));
                let mut buf = vec![real(0.0); n];
                for (c, g) in ts {
                    g.jet_into(t, &mut buf);
                    for (o, v) in out.iter_mut().zip(&buf) {
                        *o += c * v;
                    }
                }
            }
            Node::Conjugate(inner) => {
                inner.jet_into(t, out);
                out.iter_mut().for_each(|v| *v = v.conj());
            }
            Node::Derivative { inner, order } => {
                let full = inner.jet(t, n - 1 + order);
                out.copy_from_slice(&full[*order..]);
            }
        }
    }

    /// `g^{(n)}(t)`.
    pub fn derivative_at(&self, t: f64, n: usize) -> Complex64 {
        if n == 0 {
            self.value(t)
        } else {
            self.jet(t, n)[n]
        }
    }

    /// Samples `g` on `n` points spanning its support.
    pub fn sample(&self, n: usize) -> Result<SampledFunction> {
        SampledFunction::from_fn(|t| self.value(t), self.center(), self.support_radius(), n)
    }

    /// `∫ g` by adaptive quadrature over the support.
    pub fn integral(&self) -> Result<Complex64> {
        Ok(Quadrature::relative(1e-12, 1e-14)
            .integrate(|t| self.value(t), self.lo, self.hi)?
            .value)
    }

    /// `∫ |g^{(n)}|²`.
    pub fn l2_norm_sq(&self, n: usize) -> Result<f64> {
        Ok(Quadrature::relative(1e-12, 1e-300)
            .integrate_real(|t| self.derivative_at(t, n).norm_sqr(), self.lo, self.hi)?
            .value)
    }

    /// `∫ |g|²`.
    pub fn l2_norm(&self) -> Result<f64> {
        Ok(self.l2_norm_sq(0)?.sqrt())
    }

    /// Largest `|g|` on a uniform grid of the support.
    pub fn sup_norm(&self) -> f64 {
        let n = 2001;
        let (lo, hi) = (self.lo, self.hi);
        (0..n)
            .map(|j| self.value(lo + (hi - lo) * j as f64 / (n - 1) as f64).norm())
            .fold(0.0, f64::max)
    }
}

/// Derivatives of `p(x) = Σ c_k x^k` at `x`, orders `0..n`.
fn polynomial_jet(coeffs: &[f64], x: f64, n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n];
    let mut c: Vec<f64> = coeffs.to_vec();
    for o in out.iter_mut() {
        if c.is_empty() {
            break;
        }
        *o = c.iter().rev().fold(0.0, |acc, v| acc * x + v);
        c = c.iter().enumerate().skip(1).map(|(k, v)| k as f64 * v).collect();
    }
    out
}
