//! Brute-force reference: classical RK4 on the dense semi-discrete system
//! with a step that resolves the oscillation.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::integrators::Operators;
use crate::oscillatory::SeparableVelocity;

/// Largest grid the dense oracle accepts.
pub const MAX_ORACLE_N: usize = 40;

/// Blow-up threshold on `‖c‖₂ / max(1, ‖c⁰‖₂)`.
pub const ORACLE_NORM_BOUND: f64 = 1e6;

#[derive(Debug, Clone)]
pub struct DenseOracle {
    laplacian: DMatrix<f64>,
    advection: Vec<DMatrix<f64>>,
    velocity: SeparableVelocity,
}

impl DenseOracle {
    pub fn new(grid_n: usize, ops: &Operators, velocity: &SeparableVelocity) -> Result<Self> {
        if grid_n > MAX_ORACLE_N {
            return Err(Error::Argument(format!(
                "dense oracle needs N ≤ {MAX_ORACLE_N}, got {grid_n}"
            )));
        }
        Ok(Self {
            laplacian: ops.laplacian.to_dense(),
            advection: ops.advection.iter().map(|q| q.to_dense()).collect(),
            velocity: velocity.clone(),
        })
    }

    fn rhs(&self, t: f64, c: &DVector<f64>) -> DVector<f64> {
        let mut f = &self.laplacian * c;
        for (q, g) in self.advection.iter().zip(self.velocity.profile_values(t)) {
            f.gemv(g, q, c, 1.0);
        }
        f
    }

    /// Integrate from `c⁰` at `t = 0` to `t_fin` with steps no larger than
    /// `dt_sub`, which must satisfy `dt_sub ≤ ε/50` when there is a velocity.
    pub fn integrate(&self, c0: &[f64], t_fin: f64, dt_sub: f64) -> Result<Vec<f64>> {
        if !(dt_sub > 0.0) || !(t_fin >= 0.0) {
            return Err(Error::Argument(format!("need dt_sub > 0 and t_fin ≥ 0, got {dt_sub}, {t_fin}")));
        }
        if self.velocity.n_terms() > 0 && dt_sub > self.velocity.eps / 50.0 * (1.0 + 1e-12) {
            return Err(Error::Argument(format!(
                "dt_sub = {dt_sub} does not resolve ε = {} (need dt_sub ≤ ε/50)",
                self.velocity.eps
            )));
        }
        let steps = (t_fin / dt_sub * (1.0 - 1e-12)).ceil().max(0.0) as usize;
        let mut c = DVector::from_column_slice(c0);
        if steps == 0 {
            return Ok(c0.to_vec());
        }
        let h = t_fin / steps as f64;
        let bound = ORACLE_NORM_BOUND * c.norm().max(1.0);
        for n in 0..steps {
            let t = n as f64 * h;
            let k1 = self.rhs(t, &c);
            let k2 = self.rhs(t + 0.5 * h, &(&c + &k1 * (0.5 * h)));
            let k3 = self.rhs(t + 0.5 * h, &(&c + &k2 * (0.5 * h)));
            let k4 = self.rhs(t + h, &(&c + &k3 * h));
            c += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
            let norm = c.norm();
            if !(norm <= bound) {
                return Err(Error::OracleUnstable { t: t + h, norm });
            }
        }
        Ok(c.as_slice().to_vec())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::{PhysicalParams, Potential};
    use crate::geometry::Domain;
    use crate::harness::measure::{initial_condition, relative_error};
    use crate::oscillatory::testcos_field;

    fn setup(eps: f64) -> (Domain, Operators, SeparableVelocity, Vec<f64>) {
        let d = Domain::circle(20, 0.2).unwrap();
        let p = PhysicalParams::from_potential(0.02, &Potential::new(1e-2, 1.0)).unwrap();
        let v = testcos_field(&d, 1.0, 0.2, eps).unwrap();
        let ops = Operators::assemble(&d, &p, &v).unwrap();
        let c0 = initial_condition(&d, 0.2, -0.5).unwrap();
        (d, ops, v, c0)
    }

    #[test]
    fn autonomous_step_matches_taylor() {
        let (_, ops, _, c0) = setup(0.1);
        let v = SeparableVelocity::zero(0.1).unwrap();
        let o = DenseOracle::new(20, &ops, &v).unwrap();
        let h = 1e-3;
        let got = o.integrate(&c0, h, h).unwrap();
        // exp(hL) c⁰ by a long Taylor series
        let l = ops.laplacian.to_dense();
        let mut term = DVector::from_column_slice(&c0);
        let mut sum = term.clone();
        for k in 1..30 {
            term = &l * term * (h / k as f64);
            sum += &term;
        }
        let err = relative_error(&got, sum.as_slice()).unwrap();
        // local error of RK4 is O(h⁵ ‖L‖⁵)
        let lnorm = l.abs().row_sum().max();
        assert!(err < (h * lnorm).powi(5), "{err}");
    }

    #[test]
    fn halving_the_substep_changes_little() {
        let (_, ops, v, c0) = setup(0.1);
        let o = DenseOracle::new(20, &ops, &v).unwrap();
        let a = o.integrate(&c0, 0.1, 1e-3).unwrap();
        let b = o.integrate(&c0, 0.1, 5e-4).unwrap();
        assert!(relative_error(&a, &b).unwrap() <= 1e-10);
    }

    #[test]
    fn guards() {
        let (_, ops, v, c0) = setup(0.1);
        assert!(DenseOracle::new(80, &ops, &v).is_err());
        let o = DenseOracle::new(20, &ops, &v).unwrap();
        assert!(o.integrate(&c0, 0.1, 0.01).is_err());
        assert_eq!(o.integrate(&c0, 0.0, 1e-3).unwrap(), c0);
        let zero = SeparableVelocity::zero(0.1).unwrap();
        let stiff = DenseOracle::new(20, &ops, &zero).unwrap();
        assert!(matches!(stiff.integrate(&c0, 5.0, 0.5), Err(Error::OracleUnstable { .. })));
    }
}
