//! Averaged (two-scale) models for `∂t c = (L + Σ_k g_k(t/ε) Q_k) c`.
//!
//! With `C = C̄(t) + ε C¹(t, Θ) + O(ε²)` and the centered fluctuation
//! primitives `H̃_k`, the corrector is `C¹ = Σ_k H̃_k(Θ) Q_k C̄` and
//!
//! * order 1: `∂t C̄ = (L + Σ ⟨g_k⟩ Q_k) C̄`, `C̄(0) = c⁰`
//! * order 2: `∂t C̄ = (L + Σ ⟨g_k⟩ Q_k + ε Σ_kj ⟨g_k H̃_j⟩ Q_k Q_j) C̄`,
//!   `C̄(0) = c⁰ + ε Σ ⟨H_k⟩ Q_k c⁰`, and `c(t) ≈ (I + ε Σ H̃_k(t/ε) Q_k) C̄(t)`.
//!
//! [`Centering::Uncentered`] replaces `H̃_k` by the raw primitive
//! `∫₀^Θ g_k` in both the generator and the reconstruction.

use std::str::FromStr;

use crate::error::{Error, Result};
use crate::integrators::{integrate_autonomous, Integration, Operators};
use crate::oscillatory::{mean_product_centered, mean_product_primitive, SeparableVelocity};
use crate::solver::SolveSettings;
use crate::sparse::CsrMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Order {
    First,
    Second,
}

impl FromStr for Order {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "1" => Ok(Order::First),
            "2" => Ok(Order::Second),
            _ => Err(Error::Parse(format!("model order must be 1 or 2, got '{s}'"))),
        }
    }
}

impl Order {
    pub fn as_u8(&self) -> u8 {
        match self {
            Order::First => 1,
            Order::Second => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Centering {
    #[default]
    Centered,
    Uncentered,
}

/// Constant-coefficient generator for `C̄` together with the data needed to
/// map initial data in and reconstruct the oscillating solution.
#[derive(Debug, Clone)]
pub struct AveragedModel<'a> {
    pub order: Order,
    pub centering: Centering,
    pub generator: CsrMatrix,
    ops: &'a Operators,
    velocity: &'a SeparableVelocity,
}

/// `⟨ℱ⟩` for the given order.
pub fn averaged_generator(
    order: Order,
    ops: &Operators,
    velocity: &SeparableVelocity,
    centering: Centering,
) -> Result<CsrMatrix> {
    let profiles = velocity.profiles();
    let eps = velocity.eps;
    let mut terms: Vec<(f64, &CsrMatrix)> = vec![(1.0, &ops.laplacian)];
    for (p, q) in profiles.iter().zip(&ops.advection) {
        terms.push((p.mean()?, q));
    }
    let mut products = Vec::new();
    if order == Order::Second {
        for (pj, qj) in profiles.iter().zip(&ops.advection) {
            if centering == Centering::Uncentered {
                let c = pj.mean_primitive()?;
                if c != 0.0 {
                    products.push((eps * c, ops.laplacian.matmul(qj)));
                }
            }
            for (pk, qk) in profiles.iter().zip(&ops.advection) {
                let c = match centering {
                    Centering::Centered => mean_product_centered(pk, pj)?,
                    Centering::Uncentered => mean_product_primitive(pk, pj)?,
                };
                if c != 0.0 {
                    products.push((eps * c, qk.matmul(qj)));
                }
            }
        }
    }
    terms.extend(products.iter().map(|(c, m)| (*c, m)));
    terms.retain(|(c, _)| *c != 0.0);
    Ok(CsrMatrix::linear_combination(&terms))
}

impl<'a> AveragedModel<'a> {
    pub fn new(
        order: Order,
        ops: &'a Operators,
        velocity: &'a SeparableVelocity,
        centering: Centering,
    ) -> Result<Self> {
        if ops.n_terms() != velocity.n_terms() {
            return Err(Error::Argument(format!(
                "{} advection operators for {} velocity terms",
                ops.n_terms(),
                velocity.n_terms()
            )));
        }
        let generator = averaged_generator(order, ops, velocity, centering)?;
        Ok(Self {
            order,
            centering,
            generator,
            ops,
            velocity,
        })
    }

    /// `C̄(0)`: `c⁰` for order 1, `c⁰ + ε Σ ⟨H_k⟩ Q_k c⁰` for order 2.
    pub fn initial(&self, c0: &[f64]) -> Result<Vec<f64>> {
        match self.order {
            Order::First => Ok(c0.to_vec()),
            Order::Second => corrected_initial(c0, self.ops, self.velocity),
        }
    }

    /// Approximation of `c(t)` from `C̄(t)`.
    pub fn reconstruct(&self, cbar: &[f64], t: f64) -> Result<Vec<f64>> {
        match self.order {
            Order::First => Ok(cbar.to_vec()),
            Order::Second => {
                let theta = t / self.velocity.eps;
                reconstruct(cbar, self.ops, self.velocity, theta - theta.floor(), self.centering)
            }
        }
    }

    /// Integrate `C̄` to `t_fin` with the second-order implicit step;
    /// `probe` sees the reconstructed solution.
    pub fn integrate(
        &self,
        c0: &[f64],
        dt: f64,
        t_fin: f64,
        settings: &SolveSettings,
        mut probe: impl FnMut(usize, f64, &[f64]) -> Result<()>,
    ) -> Result<Integration> {
        let start = self.initial(c0)?;
        let mut out = integrate_autonomous(&self.generator, &start, dt, t_fin, settings, |n, t, cbar| {
            let c = self.reconstruct(cbar, t)?;
            probe(n, t, &c)
        })?;
        out.state.values = self.reconstruct(&out.state.values, out.state.time)?;
        Ok(out)
    }
}

/// `c⁰ + ε Σ_k ⟨H_k⟩ Q_k c⁰` with `H_k = ∫₀^Θ (g_k − ⟨g_k⟩)`.
pub fn corrected_initial(c0: &[f64], ops: &Operators, velocity: &SeparableVelocity) -> Result<Vec<f64>> {
    let mut out = c0.to_vec();
    let mut tmp = vec![0.0; c0.len()];
    for (p, q) in velocity.profiles().iter().zip(&ops.advection) {
        let w = velocity.eps * p.mean_fluctuation_primitive()?;
        if w == 0.0 {
            continue;
        }
        q.mul_vec_into(c0, &mut tmp);
        out.iter_mut().zip(&tmp).for_each(|(o, t)| *o += w * t);
    }
    Ok(out)
}

/// `(I + ε Σ_k P_k(Θ) Q_k) C̄` where `P_k` is `H̃_k` (centered) or
/// `∫₀^Θ g_k` (uncentered).
pub fn reconstruct(
    cbar: &[f64],
    ops: &Operators,
    velocity: &SeparableVelocity,
    theta: f64,
    centering: Centering,
) -> Result<Vec<f64>> {
    let mut out = cbar.to_vec();
    let mut tmp = vec![0.0; cbar.len()];
    for (p, q) in velocity.profiles().iter().zip(&ops.advection) {
        let w = velocity.eps
            * match centering {
                Centering::Centered => p.centered_primitive(theta)?,
                Centering::Uncentered => p.primitive(theta)?,
            };
        if w == 0.0 {
            continue;
        }
        q.mul_vec_into(cbar, &mut tmp);
        out.iter_mut().zip(&tmp).for_each(|(o, t)| *o += w * t);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::{PhysicalParams, Potential};
    use crate::geometry::Domain;
    use crate::oscillatory::{testcos_field, SeparableVelocity, TemporalProfile, VelocityTerm};
    use std::f64::consts::TAU;
    use std::sync::Arc;

    fn setup() -> (Domain, PhysicalParams) {
        let d = Domain::circle(20, 0.2).unwrap();
        let p = PhysicalParams::from_potential(0.02, &Potential::new(1e-2, 1.0)).unwrap();
        (d, p)
    }

    fn swirl(profile: TemporalProfile, eps: f64) -> SeparableVelocity {
        SeparableVelocity::new(
            vec![
                VelocityTerm {
                    field: Arc::new(|x, y| (-y, x)),
                    profile: profile.clone(),
                },
                VelocityTerm {
                    field: Arc::new(|x, y| (x * y, 1.0 - x)),
                    profile: TemporalProfile::sine(),
                },
            ],
            eps,
        )
        .unwrap()
    }

    #[test]
    fn cosine_generators_reduce_to_laplacian() {
        let (d, p) = setup();
        let v = testcos_field(&d, 1.0, 0.2, 0.01).unwrap();
        let ops = Operators::assemble(&d, &p, &v).unwrap();
        for order in [Order::First, Order::Second] {
            for centering in [Centering::Centered, Centering::Uncentered] {
                let g = averaged_generator(order, &ops, &v, centering).unwrap();
                assert_eq!(g.max_abs_diff(&ops.laplacian), 0.0);
            }
        }
        let c0: Vec<f64> = (0..ops.dim()).map(|i| (i as f64 * 0.37).sin()).collect();
        assert_eq!(corrected_initial(&c0, &ops, &v).unwrap(), c0);
    }

    #[test]
    fn cos_squared_first_order_mean() {
        let (d, p) = setup();
        let v = swirl(TemporalProfile::cos_squared(), 0.1);
        let ops = Operators::assemble(&d, &p, &v).unwrap();
        let g = averaged_generator(Order::First, &ops, &v, Centering::Centered).unwrap();
        let expect = CsrMatrix::linear_combination(&[(1.0, &ops.laplacian), (0.5, &ops.advection[0])]);
        assert!(g.max_abs_diff(&expect) < 1e-14);
        // quadrature twin of the profile gives the same generator
        let twin = swirl(TemporalProfile::custom(|s| (TAU * s).cos().powi(2)), 0.1);
        let gt = averaged_generator(Order::First, &ops, &twin, Centering::Centered).unwrap();
        assert!(g.max_abs_diff(&gt) < 1e-11);
    }

    #[test]
    fn second_order_correction_is_linear_in_eps() {
        let (d, p) = setup();
        for centering in [Centering::Centered, Centering::Uncentered] {
            let diff = |eps: f64| {
                let v = swirl(TemporalProfile::cosine(), eps);
                let ops = Operators::assemble(&d, &p, &v).unwrap();
                let g1 = averaged_generator(Order::First, &ops, &v, centering).unwrap();
                let g2 = averaged_generator(Order::Second, &ops, &v, centering).unwrap();
                CsrMatrix::linear_combination(&[(1.0, &g2), (-1.0, &g1)])
            };
            let a = diff(0.2);
            let b = diff(0.1);
            assert!(a.max_abs() > 1e-6);
            let half = a.scaled(0.5);
            assert!(half.max_abs_diff(&b) <= 1e-14 * a.max_abs());
        }
    }

    #[test]
    fn corrected_initial_is_linear() {
        let (d, p) = setup();
        let c0: Vec<f64> = {
            let v = swirl(TemporalProfile::cos_squared(), 0.1);
            let ops = Operators::assemble(&d, &p, &v).unwrap();
            (0..ops.dim()).map(|i| (i as f64 * 0.11).cos()).collect()
        };
        let corr = |eps: f64, scale: f64| {
            let v = swirl(TemporalProfile::cos_squared(), eps);
            let ops = Operators::assemble(&d, &p, &v).unwrap();
            let x: Vec<f64> = c0.iter().map(|c| c * scale).collect();
            let y = corrected_initial(&x, &ops, &v).unwrap();
            y.iter().zip(&x).map(|(a, b)| a - b).collect::<Vec<_>>()
        };
        let base = corr(0.1, 1.0);
        assert!(base.iter().any(|v| v.abs() > 1e-8));
        for (a, b) in base.iter().zip(corr(0.2, 1.0)) {
            assert!((2.0 * a - b).abs() < 1e-13);
        }
        for (a, b) in base.iter().zip(corr(0.1, 3.0)) {
            assert!((3.0 * a - b).abs() < 1e-13);
        }
        let v = swirl(TemporalProfile::cos_squared(), 0.0_f64.max(1e-300));
        let ops = Operators::assemble(&d, &p, &v).unwrap();
        let y = corrected_initial(&c0, &ops, &v).unwrap();
        for (a, b) in y.iter().zip(&c0) {
            assert!((a - b).abs() < 1e-200);
        }
    }

    #[test]
    fn reconstruction_correction_has_zero_mean() {
        let (d, p) = setup();
        let v = swirl(TemporalProfile::cos_squared(), 0.1);
        let ops = Operators::assemble(&d, &p, &v).unwrap();
        let cbar: Vec<f64> = (0..ops.dim()).map(|i| 1.0 + (i as f64 * 0.3).sin()).collect();
        let n = 64;
        let mut mean = vec![0.0; cbar.len()];
        for s in 0..n {
            let r = reconstruct(&cbar, &ops, &v, (s as f64 + 0.5) / n as f64, Centering::Centered).unwrap();
            for (m, (a, b)) in mean.iter_mut().zip(r.iter().zip(&cbar)) {
                *m += (a - b) / n as f64;
            }
        }
        // midpoint rule is exact for the low harmonics involved
        assert!(mean.iter().all(|m| m.abs() < 1e-12), "{:?}", mean.iter().fold(0.0f64, |a, b| a.max(b.abs())));
    }

    #[test]
    fn cosine_quarter_period_reconstruction() {
        let (d, p) = setup();
        let eps = 0.01;
        let v = testcos_field(&d, 1.0, 0.2, eps).unwrap();
        let ops = Operators::assemble(&d, &p, &v).unwrap();
        let cbar: Vec<f64> = d.active_coordinates().iter().map(|&(x, y)| (x - 2.0 * y).exp()).collect();
        let r = reconstruct(&cbar, &ops, &v, 0.25, Centering::Centered).unwrap();
        let qc = ops.advection[0].mul_vec(&cbar);
        for ((a, b), q) in r.iter().zip(&cbar).zip(&qc) {
            assert!((a - b - eps / TAU * q).abs() < 1e-12 * (1.0 + q.abs()));
        }
        let id = reconstruct(&cbar, &ops, &SeparableVelocity::new(v.terms.clone(), 1e-300).unwrap(), 0.25, Centering::Centered).unwrap();
        for (a, b) in id.iter().zip(&cbar) {
            assert!((a - b).abs() < 1e-200);
        }
    }
}
