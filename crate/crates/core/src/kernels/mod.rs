//! Distributional kernels `K(s' - i0)`: boundary values of functions analytic
//! in the lower half-plane, with Fourier-side spectral measures where they
//! exist.

mod boundary;
mod positive;
mod spectral;

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde_json::{json, Value};
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::testfn::json_complex;

pub use boundary::{
    boundary_bound, eval_boundary, eval_boundary_limit, knorm_estimate, pair_function,
    BoundaryPairing, KNormEstimate, KNormGrid, PairingMethod, PairingOptions,
};
pub use positive::{is_positive_type, quadratic_form_value, PositiveType};
pub use spectral::{
    free_field_cumulative, product_measure, two_point_density, Density, SpectralMeasure,
    MAX_GROWTH_EXPONENT,
};

type ComplexMap = Arc<dyn Fn(Complex64) -> Complex64 + Send + Sync>;
type RealMap = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum KernelKind {
    /// `amplitude · (i(s' - i0))^β`
    Homogeneous { beta: f64, amplitude: Complex64 },
    /// Boundary value of `F`, analytic for `Im z < 0`. `singular_points` lists
    /// real points where the boundary value is singular.
    AnalyticClosure {
        f: ComplexMap,
        label: String,
        singular_points: Vec<f64>,
    },
    /// `K(s') = (1/2π) ∫ K̃(p) e^{-ips'} dp`
    SpectralForm {
        measure: SpectralMeasure,
        label: String,
    },
    /// A smooth function on the real line.
    Smooth {
        f: RealMap,
        label: String,
        /// Set for constant kernels, which have a spectral atom at 0.
        constant: Option<f64>,
    },
}

impl fmt::Debug for KernelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KernelKind::Homogeneous { beta, amplitude } => f
                .debug_struct("Homogeneous")
                .field("beta", beta)
                .field("amplitude", amplitude)
                .finish(),
            KernelKind::AnalyticClosure { label, .. } => write!(f, "AnalyticClosure({label})"),
            KernelKind::SpectralForm { label, .. } => write!(f, "SpectralForm({label})"),
            KernelKind::Smooth { label, .. } => write!(f, "Smooth({label})"),
        }
    }
}

/// An immutable kernel. Cloning is cheap.
#[derive(Debug, Clone)]
pub struct Kernel {
    kind: KernelKind,
    spectral: Option<SpectralMeasure>,
    json: Value,
}

/// `K̃` of `amplitude · (i(s' - i0))^β` for `β < 0`:
/// `amplitude · 2π p^{-β-1}/Γ(-β) θ(p)`.
fn homogeneous_measure(beta: f64, amplitude: Complex64) -> Option<SpectralMeasure> {
    if beta >= 0.0 {
        return None;
    }
    if amplitude == Complex64::new(0.0, 0.0) {
        return Some(SpectralMeasure::zero());
    }
    let density = Density::Scaled(
        2.0 * PI / gamma(-beta),
        Box::new(Density::Power { exponent: -beta - 1.0 }),
    );
    Some(SpectralMeasure::from_density(amplitude, density))
}

/// Homogeneous kernel `amplitude · (i(s' - i0))^β`; for `β < 0` its spectral
/// density `2π p^{-β-1}/Γ(-β)` is attached.
pub fn homogeneous_kernel(beta: f64, amplitude: Complex64) -> Kernel {
    Kernel {
        kind: KernelKind::Homogeneous { beta, amplitude },
        spectral: homogeneous_measure(beta, amplitude),
        json: json!({"type": "homogeneous", "beta": beta, "amplitude": [amplitude.re, amplitude.im]}),
    }
}

/// Spectral measure `2πρ_m` of the time-axis vacuum two-point function
/// `Δ₊(s') = ∫ ρ_m(ω) e^{-iωs'} dω`, in the `K̃` convention.
pub fn free_field_spectral_density(mass: f64) -> Result<SpectralMeasure> {
    if !(mass >= 0.0 && mass.is_finite()) {
        return Err(Error::precondition(format!(
            "mass must be finite and nonnegative, got {mass}"
        )));
    }
    Ok(SpectralMeasure::from_density(
        Complex64::new(2.0 * PI, 0.0),
        Density::FreeField { mass },
    ))
}

impl Kernel {
    pub fn zero() -> Self {
        homogeneous_kernel(-1.0, Complex64::new(0.0, 0.0))
    }

    /// Vacuum two-point function `Δ₊` of the free scalar field of mass `m`
    /// in 3+1 dimensions, restricted to the time axis.
    pub fn free_field_two_point(mass: f64) -> Result<Self> {
        let measure = free_field_spectral_density(mass)?;
        Ok(Kernel {
            kind: KernelKind::SpectralForm {
                measure: measure.clone(),
                label: format!("free_field_two_point(m={mass})"),
            },
            spectral: Some(measure),
            json: json!({"type": "free_field_two_point", "mass": mass}),
        })
    }

    pub fn spectral(measure: SpectralMeasure, label: impl Into<String>) -> Self {
        let label = label.into();
        Kernel {
            kind: KernelKind::SpectralForm {
                measure: measure.clone(),
                label: label.clone(),
            },
            spectral: Some(measure),
            json: json!({"type": "spectral", "label": label}),
        }
    }

    pub fn analytic<F>(label: impl Into<String>, f: F, singular_points: Vec<f64>) -> Self
    where
        F: Fn(Complex64) -> Complex64 + Send + Sync + 'static,
    {
        let label = label.into();
        Kernel {
            json: json!({"type": "analytic", "label": label}),
            kind: KernelKind::AnalyticClosure {
                f: Arc::new(f),
                label,
                singular_points,
            },
            spectral: None,
        }
    }

    pub fn smooth<F>(label: impl Into<String>, f: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let label = label.into();
        Kernel {
            json: json!({"type": "smooth", "label": label}),
            kind: KernelKind::Smooth {
                f: Arc::new(f),
                label,
                constant: None,
            },
            spectral: None,
        }
    }

    /// The constant kernel `c`, whose spectral measure is `2πc δ(p)`.
    pub fn constant(c: f64) -> Self {
        Kernel {
            kind: KernelKind::Smooth {
                f: Arc::new(move |_| c),
                label: format!("{c}"),
                constant: Some(c),
            },
            spectral: Some(if c == 0.0 {
                SpectralMeasure::zero()
            } else {
                SpectralMeasure::atom(Complex64::new(c, 0.0), 0.0, 2.0 * PI).expect("valid atom")
            }),
            json: json!({"type": "smooth", "expr": format!("{c}")}),
        }
    }

    /// Smooth kernel from an expression in the variable `s`, e.g. `"s"` or
    /// `"exp(-s^2)"`.
    pub fn smooth_expr(expr: &str) -> Result<Self> {
        let parsed = exmex::parse::<f64>(&conventional_unary_minus(expr))
            .map_err(|e| Error::Input(format!("kernel expression \"{expr}\": {e}")))?;
        use exmex::Express;
        let vars: Vec<String> = parsed.var_names().to_vec();
        match vars.as_slice() {
            [] => {
                let c = parsed
                    .eval(&[])
                    .map_err(|e| Error::Input(format!("kernel expression \"{expr}\": {e}")))?;
                let mut k = Kernel::constant(c);
                k.json = json!({"type": "smooth", "expr": expr});
                Ok(k)
            }
            [v] if v == "s" => {
                if let Err(e) = parsed.eval(&[0.5]) {
                    return Err(Error::Input(format!("kernel expression \"{expr}\": {e}")));
                }
                let f = move |s: f64| parsed.eval(&[s]).unwrap_or(f64::NAN);
                let mut k = Kernel::smooth(expr, f);
                k.json = json!({"type": "smooth", "expr": expr});
                Ok(k)
            }
            _ => Err(Error::Input(format!(
                "kernel expression \"{expr}\" may only use the variable s, found {vars:?}"
            ))),
        }
    }

    pub fn kind(&self) -> &KernelKind {
        &self.kind
    }

    /// The spectral measure, if the kernel has one.
    pub fn spectral_form(&self) -> Option<&SpectralMeasure> {
        self.spectral.as_ref()
    }

    pub fn label(&self) -> String {
        match &self.kind {
            KernelKind::Homogeneous { beta, amplitude } => {
                format!("homogeneous(beta={beta}, amplitude={amplitude})")
            }
            KernelKind::AnalyticClosure { label, .. }
            | KernelKind::SpectralForm { label, .. }
            | KernelKind::Smooth { label, .. } => label.clone(),
        }
    }

    pub fn is_zero(&self) -> bool {
        match &self.kind {
            KernelKind::Homogeneous { amplitude, .. } => *amplitude == Complex64::new(0.0, 0.0),
            KernelKind::Smooth { constant, .. } => *constant == Some(0.0),
            _ => self.spectral.as_ref().is_some_and(|m| m.is_zero()),
        }
    }

    /// Degree `β` for homogeneous kernels (including the massless two-point
    /// function, which is `(i(s'-i0))^{-2}/(4π²)`).
    pub fn homogeneous_degree(&self) -> Option<f64> {
        match &self.kind {
            KernelKind::Homogeneous { beta, .. } => Some(*beta),
            KernelKind::SpectralForm { measure, .. } => match &measure.density {
                Some(Density::FreeField { mass }) if *mass == 0.0 && measure.atoms.is_empty() => {
                    Some(-2.0)
                }
                _ => None,
            },
            _ => None,
        }
    }

    pub fn is_smooth(&self) -> bool {
        matches!(self.kind, KernelKind::Smooth { .. })
    }

    /// Value of the analytic function at `z` with `Im z < 0`, when known.
    pub fn continuation(&self, z: Complex64) -> Result<Complex64> {
        match &self.kind {
            KernelKind::Homogeneous { beta, amplitude } => {
                if *amplitude == Complex64::new(0.0, 0.0) {
                    return Ok(Complex64::new(0.0, 0.0));
                }
                Ok(amplitude * (Complex64::i() * z).powf(*beta))
            }
            KernelKind::AnalyticClosure { f, .. } => Ok(f(z)),
            KernelKind::SpectralForm { measure, .. } => {
                if let Some(Density::FreeField { mass }) = &measure.density {
                    if *mass == 0.0 && measure.atoms.is_empty() {
                        // (2π/2π) ∫₀^∞ ω/(4π²) e^{-iωz} dω = -1/(4π² z²)
                        let scale = measure.amplitude / (2.0 * PI);
                        return Ok(scale * (-1.0 / (4.0 * PI * PI * z * z)));
                    }
                }
                measure.continuation(z)
            }
            KernelKind::Smooth { constant: Some(c), .. } => Ok(Complex64::new(*c, 0.0)),
            KernelKind::Smooth { label, .. } => Err(Error::Unsupported(format!(
                "smooth kernel {label} has no known analytic continuation"
            ))),
        }
    }

    /// Value on the real line away from singular points.
    pub fn real_value(&self, s: f64) -> Result<Complex64> {
        match &self.kind {
            KernelKind::Smooth { f, .. } => Ok(Complex64::new(f(s), 0.0)),
            KernelKind::Homogeneous { beta, amplitude } => {
                if s == 0.0 {
                    return Err(Error::precondition("homogeneous kernel is singular at 0"));
                }
                let phase = if s > 0.0 { 0.5 } else { -0.5 } * beta * PI;
                Ok(amplitude * s.abs().powf(*beta) * Complex64::from_polar(1.0, phase))
            }
            _ => Err(Error::Unsupported(format!(
                "{} has no pointwise real-line values",
                self.label()
            ))),
        }
    }

    /// Parses `{"type":"homogeneous","beta":..,"amplitude":[re,im]}`,
    /// `{"type":"free_field_two_point","mass":..}` or
    /// `{"type":"smooth","expr":".."}`.
    pub fn from_json(v: &Value) -> Result<Self> {
        let obj = v
            .as_object()
            .ok_or_else(|| Error::Input("kernel: expected an object".into()))?;
        let ty = obj
            .get("type")
            .and_then(Value::as_str)
            .ok_or_else(|| Error::Input("kernel: missing string field \"type\"".into()))?;
        let num = |key: &str| -> Result<f64> {
            obj.get(key)
                .and_then(Value::as_f64)
                .ok_or_else(|| Error::Input(format!("kernel.{key}: expected a number")))
        };
        match ty {
            "homogeneous" => {
                let beta = num("beta")?;
                let amplitude = match obj.get("amplitude") {
                    None => Complex64::new(1.0, 0.0),
                    Some(a) => json_complex(a, "kernel.amplitude")?,
                };
                Ok(homogeneous_kernel(beta, amplitude))
            }
            "free_field_two_point" => {
                let mass = match obj.get("mass") {
                    None => 0.0,
                    Some(_) => num("mass")?,
                };
                Kernel::free_field_two_point(mass).map_err(|e| Error::Input(format!("kernel.mass: {e}")))
            }
            "smooth" => {
                let expr = obj
                    .get("expr")
                    .and_then(Value::as_str)
                    .ok_or_else(|| Error::Input("kernel.expr: expected a string".into()))?;
                Kernel::smooth_expr(expr)
            }
            other => Err(Error::Input(format!("kernel.type: unknown kernel type \"{other}\""))),
        }
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let v: Value = serde_json::from_str(s)
            .map_err(|e| Error::Input(format!("line {}, column {}: {e}", e.line(), e.column())))?;
        Self::from_json(&v)
    }

    pub fn to_json(&self) -> Value {
        self.json.clone()
    }
}

/// exmex binds a unary minus tighter than `^`, so `-s^2` would mean `(-s)^2`.
/// Rewriting every unary minus outside an exponent as `(-1)*` restores the
/// usual reading while leaving `2^-s` alone.
fn conventional_unary_minus(expr: &str) -> String {
    let mut out = String::with_capacity(expr.len() + 8);
    let mut prev: Option<char> = None;
    for c in expr.chars() {
        if c == '-' && matches!(prev, None | Some('(' | ',' | '+' | '-' | '*' | '/')) {
            out.push_str("(-1)*");
        } else {
            out.push(c);
        }
        if !c.is_whitespace() {
            prev = Some(c);
        }
    }
    out
}
