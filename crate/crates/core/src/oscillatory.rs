//! ε-periodic velocities written as finite sums `Σ_k a_k(x) g_k(t/ε)` and
//! the exact step integrals ("moments") of their temporal profiles.
//!
//! Trigonometric profiles are handled in closed form: every moment of
//! `e^{iωs}` over `[a, a+T]` is `T^p e^{iωa}` times a divided difference of
//! `exp` at scaled frequencies, evaluated without cancellation for any `ωT`.

use std::f64::consts::TAU;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::Domain;
use crate::quadrature;

/// 1-periodic scalar function of the fast variable `Θ = t/ε`.
#[derive(Clone)]
pub enum TemporalProfile {
    /// `a₀ + Σ_m (a_m cos 2πmΘ + b_m sin 2πmΘ)`.
    Trig(TrigProfile),
    /// Arbitrary 1-periodic function; integrals fall back to quadrature.
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for TemporalProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TemporalProfile::Trig(t) => t.fmt(f),
            TemporalProfile::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

/// Real trigonometric polynomial, stored as complex Fourier coefficients
/// `c_m` for both signs of `m` (zero coefficients omitted).
#[derive(Debug, Clone, PartialEq)]
pub struct TrigProfile {
    coeffs: Vec<(i32, Complex64)>,
}

impl TrigProfile {
    /// From the constant `a0` and `(m, a_m, b_m)` harmonics, `m ≥ 1`.
    pub fn new(a0: f64, harmonics: &[(u32, f64, f64)]) -> Result<Self> {
        let mut coeffs = Vec::new();
        if a0 != 0.0 {
            coeffs.push((0, Complex64::new(a0, 0.0)));
        }
        for &(m, a, b) in harmonics {
            if m == 0 {
                return Err(Error::Argument("harmonic index must be at least 1".into()));
            }
            if !a.is_finite() || !b.is_finite() {
                return Err(Error::Argument(format!("non-finite coefficient for harmonic {m}")));
            }
            if a == 0.0 && b == 0.0 {
                continue;
            }
            let m = i32::try_from(m).map_err(|_| Error::Argument(format!("harmonic {m} too large")))?;
            coeffs.push((m, Complex64::new(0.5 * a, -0.5 * b)));
            coeffs.push((-m, Complex64::new(0.5 * a, 0.5 * b)));
        }
        Ok(Self { coeffs })
    }

    pub fn coefficients(&self) -> &[(i32, Complex64)] {
        &self.coeffs
    }

    fn coeff(&self, m: i32) -> Complex64 {
        self.coeffs
            .iter()
            .find(|(k, _)| *k == m)
            .map_or(Complex64::new(0.0, 0.0), |(_, c)| *c)
    }

    fn mean(&self) -> f64 {
        self.coeff(0).re
    }
}

impl TemporalProfile {
    /// `cos 2πΘ`.
    pub fn cosine() -> Self {
        Self::Trig(TrigProfile::new(0.0, &[(1, 1.0, 0.0)]).expect("valid"))
    }

    /// `sin 2πΘ`.
    pub fn sine() -> Self {
        Self::Trig(TrigProfile::new(0.0, &[(1, 0.0, 1.0)]).expect("valid"))
    }

    pub fn constant(v: f64) -> Self {
        Self::Trig(TrigProfile::new(v, &[]).expect("valid"))
    }

    /// `cos² 2πΘ = ½ + ½ cos 4πΘ`.
    pub fn cos_squared() -> Self {
        Self::Trig(TrigProfile::new(0.5, &[(2, 0.5, 0.0)]).expect("valid"))
    }

    pub fn custom(g: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self::Custom(Arc::new(g))
    }

    pub fn eval(&self, theta: f64) -> f64 {
        match self {
            TemporalProfile::Trig(p) => {
                let th = theta - theta.floor();
                p.coeffs
                    .iter()
                    .map(|&(m, c)| (c * Complex64::cis(TAU * f64::from(m) * th)).re)
                    .sum()
            }
            TemporalProfile::Custom(g) => g(theta - theta.floor()),
        }
    }

    /// Period mean `⟨g⟩`.
    pub fn mean(&self) -> Result<f64> {
        match self {
            TemporalProfile::Trig(p) => Ok(p.mean()),
            TemporalProfile::Custom(g) => Ok(quad(|s| g(s), 0.0, 1.0)?),
        }
    }

    /// `∫₀^Θ g(σ) dσ`.
    pub fn primitive(&self, theta: f64) -> Result<f64> {
        match self {
            TemporalProfile::Trig(p) => {
                let cycles = theta.floor();
                let th = theta - cycles;
                let mut v = p.mean() * theta;
                for &(m, c) in &p.coeffs {
                    if m != 0 {
                        let w = Complex64::new(0.0, TAU * f64::from(m));
                        v += (c * (Complex64::cis(TAU * f64::from(m) * th) - 1.0) / w).re;
                    }
                }
                Ok(v)
            }
            TemporalProfile::Custom(g) => {
                let cycles = theta.floor();
                let mean = if cycles != 0.0 { quad(|s| g(s), 0.0, 1.0)? } else { 0.0 };
                Ok(cycles * mean + quad(|s| g(s), 0.0, theta - cycles)?)
            }
        }
    }

    /// Zero-mean fluctuation primitive `H̃(Θ) = H(Θ) − ⟨H⟩`, where
    /// `H(Θ) = ∫₀^Θ (g − ⟨g⟩)`.
    pub fn centered_primitive(&self, theta: f64) -> Result<f64> {
        match self {
            TemporalProfile::Trig(p) => {
                let th = theta - theta.floor();
                Ok(p.coeffs
                    .iter()
                    .filter(|(m, _)| *m != 0)
                    .map(|&(m, c)| {
                        let w = Complex64::new(0.0, TAU * f64::from(m));
                        (c * Complex64::cis(TAU * f64::from(m) * th) / w).re
                    })
                    .sum())
            }
            TemporalProfile::Custom(_) => {
                let th = theta - theta.floor();
                Ok(self.fluctuation_primitive(th)? - self.mean_fluctuation_primitive()?)
            }
        }
    }

    /// `H(Θ) = ∫₀^Θ (g − ⟨g⟩)`.
    pub fn fluctuation_primitive(&self, theta: f64) -> Result<f64> {
        Ok(self.primitive(theta)? - self.mean()? * theta)
    }

    /// `⟨H⟩`.
    pub fn mean_fluctuation_primitive(&self) -> Result<f64> {
        match self {
            TemporalProfile::Trig(p) => Ok(p
                .coeffs
                .iter()
                .filter(|(m, _)| *m != 0)
                .map(|&(m, c)| -(c / Complex64::new(0.0, TAU * f64::from(m))).re)
                .sum()),
            TemporalProfile::Custom(_) => quad_result(|s| self.fluctuation_primitive(s), 0.0, 1.0),
        }
    }

    /// `⟨∫₀^Θ g⟩`.
    pub fn mean_primitive(&self) -> Result<f64> {
        Ok(0.5 * self.mean()? + self.mean_fluctuation_primitive()?)
    }

    /// `∫_{t}^{t+Δt} g(s/ε) ds` for real time `t` (the antiderivative
    /// difference `G(t+Δt) − G(t)`).
    pub fn integral(&self, t: f64, dt: f64, eps: f64) -> Result<f64> {
        let theta0 = t / eps;
        Ok(eps * (self.primitive(theta0 + dt / eps)? - self.primitive(theta0)?))
    }
}

/// `⟨g_k · H̃_j⟩`: mean of one profile times the centered fluctuation
/// primitive of another.
pub fn mean_product_centered(gk: &TemporalProfile, gj: &TemporalProfile) -> Result<f64> {
    match (gk, gj) {
        (TemporalProfile::Trig(pk), TemporalProfile::Trig(pj)) => Ok(pj
            .coeffs
            .iter()
            .filter(|(m, _)| *m != 0)
            .map(|&(m, c)| (pk.coeff(-m) * c / Complex64::new(0.0, TAU * f64::from(m))).re)
            .sum()),
        _ => quad_result(|s| Ok(gk.eval(s) * gj.centered_primitive(s)?), 0.0, 1.0),
    }
}

/// `⟨g_k · ∫₀^Θ g_j⟩` (uncentered primitive).
pub fn mean_product_primitive(gk: &TemporalProfile, gj: &TemporalProfile) -> Result<f64> {
    match (gk, gj) {
        (TemporalProfile::Trig(pk), TemporalProfile::Trig(_)) => {
            // ∫₀¹ Θ e^{2πimΘ} dΘ = 1/(2πim) for m ≠ 0.
            let theta_gk: f64 = 0.5 * pk.mean()
                + pk.coeffs
                    .iter()
                    .filter(|(m, _)| *m != 0)
                    .map(|&(m, c)| (c / Complex64::new(0.0, TAU * f64::from(m))).re)
                    .sum::<f64>();
            Ok(gj.mean()? * theta_gk
                + mean_product_centered(gk, gj)?
                + gk.mean()? * gj.mean_fluctuation_primitive()?)
        }
        _ => quad_result(|s| Ok(gk.eval(s) * gj.primitive(s)?), 0.0, 1.0),
    }
}

fn quad<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> Result<f64> {
    Ok(quadrature::integrate(f, a, b, 1e-13, 1e-13)?.value)
}

fn quad_result<F: Fn(f64) -> Result<f64>>(f: F, a: f64, b: f64) -> Result<f64> {
    let err = std::cell::RefCell::new(None);
    let v = quad(
        |s| match f(s) {
            Ok(v) => v,
            Err(e) => {
                err.borrow_mut().get_or_insert(e);
                0.0
            }
        },
        a,
        b,
    )?;
    match err.into_inner() {
        Some(e) => Err(e),
        None => Ok(v),
    }
}

/// Divided differences of `exp`.
mod dd {
    use num_complex::Complex64 as C;

    /// `sinh(z)/z`.
    fn sinhc(z: C) -> C {
        if z.norm() < 0.1 {
            let z2 = z * z;
            let mut term = C::new(1.0, 0.0);
            let mut sum = term;
            for k in 1..8 {
                term *= z2 / ((2 * k * (2 * k + 1)) as f64);
                sum += term;
            }
            sum
        } else {
            z.sinh() / z
        }
    }

    /// `exp[x, y]`.
    pub fn two(x: C, y: C) -> C {
        ((x + y) * 0.5).exp() * sinhc((x - y) * 0.5)
    }

    /// `exp[x, y, z]`.
    pub fn three(x: C, y: C, z: C) -> C {
        let c = (x + y + z) / 3.0;
        let u = [x - c, y - c, z - c];
        if u.iter().all(|v| v.norm() <= 1.0) {
            // exp[u0,u1,u2] = Σ_{m≥0} h_m(u0,u1,u2) / (m+2)!, with h_m the
            // complete homogeneous symmetric polynomials.
            let mut p = C::new(1.0, 0.0);
            let mut q = C::new(1.0, 0.0);
            let mut r = C::new(1.0, 0.0);
            let mut fact = 2.0;
            let mut sum = r / fact;
            for m in 1..32 {
                p *= u[0];
                q = u[1] * q + p;
                r = u[2] * r + q;
                fact *= (m + 2) as f64;
                sum += r / fact;
            }
            return c.exp() * sum;
        }
        // Divide across the farthest pair.
        let pts = [x, y, z];
        let pairs = [(0, 1, 2), (0, 2, 1), (1, 2, 0)];
        let &(a, b, m) = pairs
            .iter()
            .max_by(|p, q| {
                (pts[p.0] - pts[p.1])
                    .norm()
                    .total_cmp(&(pts[q.0] - pts[q.1]).norm())
            })
            .expect("three pairs");
        (two(pts[a], pts[m]) - two(pts[m], pts[b])) / (pts[a] - pts[b])
    }
}

/// Step integrals over `[tⁿ, tⁿ + Δt]` for every term (and term pair) of a
/// separable velocity.
#[derive(Debug, Clone, PartialEq)]
pub struct Moments {
    pub dt: f64,
    /// `∫ g_k(s/ε) ds`.
    pub i0: Vec<f64>,
    /// `∫∫_{s}^{tⁿ⁺¹} g_k(σ/ε) dσ ds`.
    pub j1: Vec<f64>,
    /// `∫ (tⁿ⁺¹ − s) g_k(s/ε) ds`.
    pub j2: Vec<f64>,
    /// `j3[j * K + k] = ∫ g_j(s/ε) ∫_s^{tⁿ⁺¹} g_k(σ/ε) dσ ds`.
    pub j3: Vec<f64>,
}

impl Moments {
    pub fn n_terms(&self) -> usize {
        self.i0.len()
    }

    pub fn j3(&self, j: usize, k: usize) -> f64 {
        self.j3[j * self.i0.len() + k]
    }
}

/// Closed-form (or quadrature, for custom profiles) moments over the step
/// starting at fast phase `theta0 = tⁿ/ε`.
pub fn moments_at(profiles: &[&TemporalProfile], theta0: f64, dt: f64, eps: f64) -> Result<Moments> {
    if !(dt >= 0.0) || !dt.is_finite() {
        return Err(Error::Argument(format!("step {dt} must be non-negative")));
    }
    if !(eps > 0.0) {
        return Err(Error::Argument(format!("period ε = {eps} must be positive")));
    }
    let k = profiles.len();
    let base = theta0 - theta0.floor();
    let mut m = Moments {
        dt,
        i0: vec![0.0; k],
        j1: vec![0.0; k],
        j2: vec![0.0; k],
        j3: vec![0.0; k * k],
    };
    let r = dt / eps;
    let t2 = dt * dt;
    for (a, pa) in profiles.iter().enumerate() {
        match pa {
            TemporalProfile::Trig(p) => {
                let (mut i0, mut j1, mut j2) = (C0, C0, C0);
                for &(h, c) in &p.coeffs {
                    let x = Complex64::new(0.0, TAU * f64::from(h) * r);
                    let ph = c * cis_cycles(f64::from(h) * base);
                    i0 += ph * dd::two(x, C0);
                    j1 += ph * dd::three(x, x, C0);
                    j2 += ph * dd::three(x, C0, C0);
                }
                m.i0[a] = dt * i0.re;
                m.j1[a] = t2 * j1.re;
                m.j2[a] = t2 * j2.re;
            }
            TemporalProfile::Custom(_) => {
                let g = |u: f64| pa.eval(base + u / eps);
                m.i0[a] = quad(g, 0.0, dt)?;
                m.j1[a] = quad(|u| u * g(u), 0.0, dt)?;
                m.j2[a] = quad(|u| (dt - u) * g(u), 0.0, dt)?;
            }
        }
    }
    for (a, pa) in profiles.iter().enumerate() {
        for (b, pb) in profiles.iter().enumerate() {
            m.j3[a * k + b] = match (pa, pb) {
                (TemporalProfile::Trig(p), TemporalProfile::Trig(q)) => {
                    let mut s = C0;
                    for &(hj, cj) in &p.coeffs {
                        for &(hk, ck) in &q.coeffs {
                            let xj = Complex64::new(0.0, TAU * f64::from(hj) * r);
                            let xk = Complex64::new(0.0, TAU * f64::from(hk) * r);
                            let ph = cj * ck * cis_cycles(f64::from(hj + hk) * base);
                            s += ph * dd::three(xj + xk, xk, C0);
                        }
                    }
                    t2 * s.re
                }
                _ if a == b => 0.5 * m.i0[a] * m.i0[a],
                _ => {
                    let ga = |u: f64| pa.eval(base + u / eps);
                    let gb = |u: f64| pb.eval(base + u / eps);
                    quad(|u| ga(u) * quad(gb, u, dt).unwrap_or(f64::NAN), 0.0, dt)?
                }
            };
        }
    }
    Ok(m)
}

const C0: Complex64 = Complex64::new(0.0, 0.0);

/// `e^{2πi·c}` with the integer part of `c` removed first.
fn cis_cycles(c: f64) -> Complex64 {
    Complex64::cis(TAU * (c - c.round()))
}

/// Spatial vector field `a(x, y)`.
pub type Field = Arc<dyn Fn(f64, f64) -> (f64, f64) + Send + Sync>;

#[derive(Clone)]
pub struct VelocityTerm {
    pub field: Field,
    pub profile: TemporalProfile,
}

impl fmt::Debug for VelocityTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("VelocityTerm").field("profile", &self.profile).finish_non_exhaustive()
    }
}

/// `u(x, t) = Σ_k a_k(x) g_k(t/ε)`.
#[derive(Debug, Clone)]
pub struct SeparableVelocity {
    pub terms: Vec<VelocityTerm>,
    pub eps: f64,
}

impl SeparableVelocity {
    pub fn new(terms: Vec<VelocityTerm>, eps: f64) -> Result<Self> {
        if !(eps > 0.0) || !eps.is_finite() {
            return Err(Error::Argument(format!("period ε = {eps} must be positive")));
        }
        Ok(Self { terms, eps })
    }

    /// No advection.
    pub fn zero(eps: f64) -> Result<Self> {
        Self::new(Vec::new(), eps)
    }

    pub fn n_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn profiles(&self) -> Vec<&TemporalProfile> {
        self.terms.iter().map(|t| &t.profile).collect()
    }

    /// Pointwise velocity at `(x, y)` and time `t`.
    pub fn eval(&self, x: f64, y: f64, t: f64) -> (f64, f64) {
        let theta = t / self.eps;
        self.terms.iter().fold((0.0, 0.0), |(ux, uy), term| {
            let g = term.profile.eval(theta);
            let (ax, ay) = (term.field)(x, y);
            (ux + g * ax, uy + g * ay)
        })
    }

    /// Profile values `g_k(t/ε)`.
    pub fn profile_values(&self, t: f64) -> Vec<f64> {
        let theta = t / self.eps;
        self.terms.iter().map(|term| term.profile.eval(theta)).collect()
    }

    pub fn moments(&self, t: f64, dt: f64) -> Result<Moments> {
        moments_at(&self.profiles(), t / self.eps, dt, self.eps)
    }
}

/// Radial field `A R_B (x, y)/(x² + y²)` with cosine profile. Active points
/// closer than `R_B/2` to the origin are rejected.
pub fn testcos_field(domain: &Domain, amplitude: f64, radius: f64, eps: f64) -> Result<SeparableVelocity> {
    let r_min = 0.5 * radius;
    for (x, y) in domain.active_coordinates() {
        if x.hypot(y) < r_min {
            return Err(Error::Config(format!(
                "active point ({x}, {y}) lies inside the guard radius {r_min} of the radial field"
            )));
        }
    }
    let s = amplitude * radius;
    let field: Field = Arc::new(move |x, y| {
        let r2 = x * x + y * y;
        (s * x / r2, s * y / r2)
    });
    SeparableVelocity::new(
        vec![VelocityTerm {
            field,
            profile: TemporalProfile::cosine(),
        }],
        eps,
    )
}

/// `A R_B cos(2π(t + x)/ε) (1, 0)` split into cosine and sine terms.
pub fn testosc_field(amplitude: f64, radius: f64, eps: f64) -> Result<SeparableVelocity> {
    let s = amplitude * radius;
    let k = TAU / eps;
    let cos_part: Field = Arc::new(move |x, _| (s * (k * x).cos(), 0.0));
    let sin_part: Field = Arc::new(move |x, _| (-s * (k * x).sin(), 0.0));
    SeparableVelocity::new(
        vec![
            VelocityTerm {
                field: cos_part,
                profile: TemporalProfile::cosine(),
            },
            VelocityTerm {
                field: sin_part,
                profile: TemporalProfile::sine(),
            },
        ],
        eps,
    )
}
