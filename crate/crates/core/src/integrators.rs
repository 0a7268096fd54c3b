//! Implicit time integrators for `∂t c = (L + Σ_k g_k(t/ε) Q_k) c`.
//!
//! * `ua1`: `(I − ΔtL − Σ I0_k Q_k) cⁿ⁺¹ = cⁿ`
//! * `ua2`: `(I − 𝕄) cⁿ⁺¹ = cⁿ` with
//!   `𝕄 = ΔtL + Σ I0_k Q_k − ½Δt²L² − Σ J1_k LQ_k − Σ J2_k Q_kL − Σ J3_jk Q_jQ_k`
//! * `cn`: trapezoidal rule with the velocity sampled at both step ends.
//!
//! The moments `I0, J1, J2, J3` are exact step integrals of the profiles, so
//! no step restriction in terms of ε arises for the `ua*` schemes.

use std::cell::RefCell;
use std::str::FromStr;

use crate::discretization::{assemble_advection, assemble_diffusion, PhysicalParams};
use crate::error::{Error, Result};
use crate::geometry::Domain;
use crate::oscillatory::{Moments, SeparableVelocity};
use crate::solver::{bicgstab, DirectSolver, Factorization, SolveSettings, SolverKind};
use crate::sparse::{CsrMatrix, SharedPattern};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    Ua1,
    Ua2,
    Cn,
    /// `ua2` with the sign of the `½Δt²L²` term reversed; unstable for stiff
    /// `L`, kept as a negative control.
    Ua2Flipped,
}

impl Scheme {
    pub fn name(&self) -> &'static str {
        match self {
            Scheme::Ua1 => "ua1",
            Scheme::Ua2 => "ua2",
            Scheme::Cn => "cn",
            Scheme::Ua2Flipped => "ua2-flipped",
        }
    }

    fn second_order(&self) -> bool {
        matches!(self, Scheme::Ua2 | Scheme::Ua2Flipped)
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ua1" => Ok(Scheme::Ua1),
            "ua2" => Ok(Scheme::Ua2),
            "cn" => Ok(Scheme::Cn),
            "ua2-flipped" => Ok(Scheme::Ua2Flipped),
            _ => Err(Error::Parse(format!("unknown scheme '{s}' (expected ua1, ua2 or cn)"))),
        }
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// `L_h` and one `Q_h[a_k]` per velocity term.
#[derive(Debug, Clone)]
pub struct Operators {
    pub laplacian: CsrMatrix,
    pub advection: Vec<CsrMatrix>,
}

impl Operators {
    pub fn assemble(domain: &Domain, params: &PhysicalParams, velocity: &SeparableVelocity) -> Result<Self> {
        let laplacian = assemble_diffusion(domain, params)?;
        let advection = velocity
            .terms
            .iter()
            .map(|t| assemble_advection(domain, t.field.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { laplacian, advection })
    }

    pub fn dim(&self) -> usize {
        self.laplacian.nrows()
    }

    pub fn n_terms(&self) -> usize {
        self.advection.len()
    }

    /// `(L + Σ_k g_k Q_k) x`.
    pub fn apply_generator(&self, g: &[f64], x: &[f64], y: &mut [f64]) {
        self.laplacian.mul_vec_into(x, y);
        let mut tmp = vec![0.0; x.len()];
        for (q, gk) in self.advection.iter().zip(g) {
            if *gk == 0.0 {
                continue;
            }
            q.mul_vec_into(x, &mut tmp);
            y.iter_mut().zip(&tmp).for_each(|(yi, ti)| *yi += gk * ti);
        }
    }
}

/// Concentration at the active points at time `time`.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub values: Vec<f64>,
    pub time: f64,
}

/// Diagonal of `A B` without forming the product.
fn product_diagonal(a: &CsrMatrix, b: &CsrMatrix) -> Vec<f64> {
    (0..a.nrows()).map(|i| a.row(i).map(|(k, v)| v * b.get(k, i)).sum()).collect()
}

/// Matrices (and their diagonals) whose linear combination forms the step
/// operator. Order: `I, L, Q_k…` then, for second order, `L², LQ_k…,
/// Q_kL…, Q_jQ_k…` (row-major in `(j, k)`).
struct Members {
    pattern: Option<SharedPattern>,
    diagonals: Vec<Vec<f64>>,
}

impl Members {
    fn build(ops: &Operators, second_order: bool, assemble: bool) -> Self {
        let n = ops.dim();
        let l = &ops.laplacian;
        let qs = &ops.advection;
        let mut diagonals = vec![vec![1.0; n], l.diagonal()];
        diagonals.extend(qs.iter().map(|q| q.diagonal()));
        if second_order {
            diagonals.push(product_diagonal(l, l));
            diagonals.extend(qs.iter().map(|q| product_diagonal(l, q)));
            diagonals.extend(qs.iter().map(|q| product_diagonal(q, l)));
            for qj in qs {
                for qk in qs {
                    diagonals.push(product_diagonal(qj, qk));
                }
            }
        }
        let pattern = assemble.then(|| {
            let id = CsrMatrix::identity(n);
            let mut owned = Vec::new();
            if second_order {
                owned.push(l.matmul(l));
                owned.extend(qs.iter().map(|q| l.matmul(q)));
                owned.extend(qs.iter().map(|q| q.matmul(l)));
                for qj in qs {
                    for qk in qs {
                        owned.push(qj.matmul(qk));
                    }
                }
            }
            let mut refs: Vec<&CsrMatrix> = vec![&id, l];
            refs.extend(qs.iter());
            refs.extend(owned.iter());
            SharedPattern::new(&refs)
        });
        Self { pattern, diagonals }
    }
}

/// Advances a state by one step of a fixed scheme. Holds the operator
/// products and solver caches that persist across steps.
pub struct Stepper<'a> {
    ops: &'a Operators,
    velocity: &'a SeparableVelocity,
    scheme: Scheme,
    settings: SolveSettings,
    members: Members,
    direct: DirectSolver,
    work: Option<CsrMatrix>,
}

impl std::fmt::Debug for Stepper<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Stepper")
            .field("scheme", &self.scheme)
            .field("settings", &self.settings)
            .field("dim", &self.ops.dim())
            .finish()
    }
}

impl<'a> Stepper<'a> {
    pub fn new(
        ops: &'a Operators,
        velocity: &'a SeparableVelocity,
        scheme: Scheme,
        settings: SolveSettings,
    ) -> Result<Self> {
        settings.validate()?;
        if ops.n_terms() != velocity.n_terms() {
            return Err(Error::Argument(format!(
                "{} advection operators for {} velocity terms",
                ops.n_terms(),
                velocity.n_terms()
            )));
        }
        let members = Members::build(ops, scheme.second_order(), settings.method == SolverKind::Direct);
        let work = members.pattern.as_ref().map(|p| p.pattern().clone());
        Ok(Self {
            ops,
            velocity,
            scheme,
            settings,
            members,
            direct: DirectSolver::new(),
            work,
        })
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    /// Coefficients of the step operator in [`Members`] order.
    fn coefficients(&self, t: f64, dt: f64) -> Result<Vec<f64>> {
        let k = self.ops.n_terms();
        let mut c = vec![1.0, -dt];
        match self.scheme {
            Scheme::Cn => {
                let g = self.velocity.profile_values(t + dt);
                c[1] = -0.5 * dt;
                c.extend(g.iter().map(|gk| -0.5 * dt * gk));
            }
            Scheme::Ua1 => {
                let m = self.velocity.moments(t, dt)?;
                c.extend(m.i0.iter().map(|v| -v));
            }
            Scheme::Ua2 | Scheme::Ua2Flipped => {
                let m: Moments = self.velocity.moments(t, dt)?;
                c.extend(m.i0.iter().map(|v| -v));
                let sign = if self.scheme == Scheme::Ua2 { 1.0 } else { -1.0 };
                c.push(sign * 0.5 * dt * dt);
                c.extend(m.j1.iter().copied());
                c.extend(m.j2.iter().copied());
                for j in 0..k {
                    for kk in 0..k {
                        c.push(m.j3(j, kk));
                    }
                }
            }
        }
        Ok(c)
    }

    fn rhs(&self, state: &State, dt: f64) -> Vec<f64> {
        match self.scheme {
            Scheme::Cn => {
                let g = self.velocity.profile_values(state.time);
                let mut f = vec![0.0; state.values.len()];
                self.ops.apply_generator(&g, &state.values, &mut f);
                state.values.iter().zip(&f).map(|(c, fi)| c + 0.5 * dt * fi).collect()
            }
            _ => state.values.clone(),
        }
    }

    /// Apply the step operator with coefficients `c` matrix-free.
    fn apply(&self, c: &[f64], x: &[f64], y: &mut [f64], scratch: &RefCell<Vec<Vec<f64>>>) {
        let k = self.ops.n_terms();
        let l = &self.ops.laplacian;
        let qs = &self.ops.advection;
        let mut s = scratch.borrow_mut();
        let n = x.len();
        if s.len() < k + 3 {
            s.resize(k + 3, vec![0.0; n]);
        }
        let (lx, rest) = s.split_first_mut().expect("scratch");
        let (tmp, rest) = rest.split_first_mut().expect("scratch");
        let (acc, qx) = rest.split_first_mut().expect("scratch");
        l.mul_vec_into(x, lx);
        for (q, out) in qs.iter().zip(qx.iter_mut()) {
            q.mul_vec_into(x, out);
        }
        for i in 0..n {
            let mut v = c[0] * x[i] + c[1] * lx[i];
            for j in 0..k {
                v += c[2 + j] * qx[j][i];
            }
            y[i] = v;
        }
        if !self.scheme.second_order() {
            return;
        }
        let o = 2 + k;
        // L (c_LL Lx + Σ c_LQk Q_k x)
        for i in 0..n {
            let mut v = c[o] * lx[i];
            for j in 0..k {
                v += c[o + 1 + j] * qx[j][i];
            }
            acc[i] = v;
        }
        l.mul_vec_into(acc, tmp);
        y.iter_mut().zip(tmp.iter()).for_each(|(yi, ti)| *yi += ti);
        // Σ_j Q_j (c_QjL Lx + Σ_k c_QjQk Q_k x)
        for (j, q) in qs.iter().enumerate() {
            for i in 0..n {
                let mut v = c[o + 1 + k + j] * lx[i];
                for kk in 0..k {
                    v += c[o + 1 + 2 * k + j * k + kk] * qx[kk][i];
                }
                acc[i] = v;
            }
            q.mul_vec_into(acc, tmp);
            y.iter_mut().zip(tmp.iter()).for_each(|(yi, ti)| *yi += ti);
        }
    }

    /// The assembled step matrix at `(t, Δt)` (for inspection and tests).
    pub fn step_matrix(&self, t: f64, dt: f64) -> Result<CsrMatrix> {
        let c = self.coefficients(t, dt)?;
        Ok(self.step_matrix_with(&c))
    }

    fn step_matrix_with(&self, c: &[f64]) -> CsrMatrix {
        let owned;
        let pattern = match &self.members.pattern {
            Some(p) => p,
            None => {
                owned = Members::build(self.ops, self.scheme.second_order(), true)
                    .pattern
                    .expect("assembled");
                &owned
            }
        };
        pattern.combine(c)
    }

    /// One step from `state.time` to `state.time + dt`.
    pub fn step(&mut self, state: &State, dt: f64) -> Result<State> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::Argument(format!("time step {dt} must be positive")));
        }
        let c = self.coefficients(state.time, dt)?;
        let b = self.rhs(state, dt);
        let values = match self.settings.method {
            SolverKind::Direct => {
                let pattern = self.members.pattern.as_ref().expect("direct solver keeps an assembled pattern");
                let work = self.work.as_mut().expect("work matrix");
                pattern.combine_into(&c, work);
                self.direct.solve(work, &b, self.settings.tolerance)?
            }
            SolverKind::Krylov => {
                let n = b.len();
                let inv_diag: Vec<f64> = (0..n)
                    .map(|i| {
                        let d: f64 = c.iter().zip(&self.members.diagonals).map(|(ci, di)| ci * di[i]).sum();
                        if d != 0.0 { 1.0 / d } else { 1.0 }
                    })
                    .collect();
                let scratch = RefCell::new(Vec::new());
                let mut x = state.values.clone();
                bicgstab(
                    |u, v| self.apply(&c, u, v, &scratch),
                    &inv_diag,
                    &b,
                    &mut x,
                    self.settings.tolerance,
                    self.settings.max_iterations,
                )?;
                x
            }
        };
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Numeric(format!("non-finite value at unknown {i}")));
        }
        Ok(State {
            values,
            time: state.time + dt,
        })
    }
}

/// Result of [`integrate`]: final state, the step actually used and the
/// number of steps.
#[derive(Debug, Clone, PartialEq)]
pub struct Integration {
    pub state: State,
    pub dt: f64,
    pub steps: usize,
}

/// Number of steps `M = round(t_fin/Δt)` and the re-derived step `t_fin/M`.
pub fn step_count(t_fin: f64, dt: f64) -> Result<(usize, f64)> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::Argument(format!("time step {dt} must be positive")));
    }
    if !(t_fin >= 0.0) || !t_fin.is_finite() {
        return Err(Error::Argument(format!("final time {t_fin} must be non-negative")));
    }
    let m = (t_fin / dt).round();
    if m == 0.0 {
        return Ok((0, dt));
    }
    Ok((m as usize, t_fin / m))
}

/// Integrate from `c0` at `t = 0` to `t_fin`. `probe(n, tⁿ, cⁿ)` is called
/// for the initial state and after every step.
pub fn integrate(
    stepper: &mut Stepper<'_>,
    c0: &[f64],
    dt: f64,
    t_fin: f64,
    mut probe: impl FnMut(usize, f64, &[f64]) -> Result<()>,
) -> Result<Integration> {
    if c0.len() != stepper.ops.dim() {
        return Err(Error::Argument(format!(
            "initial state has length {} for {} unknowns",
            c0.len(),
            stepper.ops.dim()
        )));
    }
    let (steps, dt) = step_count(t_fin, dt)?;
    let mut state = State {
        values: c0.to_vec(),
        time: 0.0,
    };
    probe(0, 0.0, &state.values)?;
    for n in 0..steps {
        state.time = n as f64 * dt;
        let next = stepper.step(&state, dt).map_err(|e| e.at_step(n + 1))?;
        state = State {
            values: next.values,
            time: (n + 1) as f64 * dt,
        };
        probe(n + 1, state.time, &state.values).map_err(|e| e.at_step(n + 1))?;
    }
    Ok(Integration { state, dt, steps })
}

/// Constant-coefficient second-order step `(I − ΔtG + ½Δt²G²) cⁿ⁺¹ = cⁿ`,
/// the velocity-free case of `ua2`, for a fixed generator `G`. The step
/// matrix is factored once.
pub struct AutonomousStepper {
    matrix: CsrMatrix,
    factors: Factorization,
    tolerance: f64,
}

impl std::fmt::Debug for AutonomousStepper {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("AutonomousStepper")
            .field("dim", &self.matrix.nrows())
            .field("tolerance", &self.tolerance)
            .finish()
    }
}

impl AutonomousStepper {
    pub fn new(generator: &CsrMatrix, dt: f64, settings: &SolveSettings) -> Result<Self> {
        settings.validate()?;
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::Argument(format!("time step {dt} must be positive")));
        }
        let n = generator.nrows();
        let g2 = generator.matmul(generator);
        let id = CsrMatrix::identity(n);
        let matrix = CsrMatrix::linear_combination(&[(1.0, &id), (-dt, generator), (0.5 * dt * dt, &g2)]);
        let factors = DirectSolver::new().factor(&matrix)?;
        Ok(Self {
            matrix,
            factors,
            tolerance: settings.tolerance,
        })
    }

    pub fn step(&self, c: &[f64]) -> Result<Vec<f64>> {
        self.factors.solve(&self.matrix, c, self.tolerance)
    }
}

/// Integrate `∂t c = G c` with [`AutonomousStepper`].
pub fn integrate_autonomous(
    generator: &CsrMatrix,
    c0: &[f64],
    dt: f64,
    t_fin: f64,
    settings: &SolveSettings,
    mut probe: impl FnMut(usize, f64, &[f64]) -> Result<()>,
) -> Result<Integration> {
    let (steps, dt) = step_count(t_fin, dt)?;
    let stepper = AutonomousStepper::new(generator, dt, settings)?;
    let mut values = c0.to_vec();
    probe(0, 0.0, &values)?;
    for k in 0..steps {
        values = stepper.step(&values).map_err(|e| e.at_step(k + 1))?;
        probe(k + 1, (k + 1) as f64 * dt, &values).map_err(|e| e.at_step(k + 1))?;
    }
    Ok(Integration {
        state: State {
            values,
            time: steps as f64 * dt,
        },
        dt,
        steps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::Potential;
    use crate::oscillatory::{testcos_field, testosc_field};
    use nalgebra::{DMatrix, DVector};

    fn setup(n: usize) -> (Domain, PhysicalParams) {
        let d = Domain::circle(n, 0.2).unwrap();
        let p = PhysicalParams::from_potential(0.02, &Potential::new(1e-2, 1.0)).unwrap();
        (d, p)
    }

    fn gaussian(d: &Domain) -> Vec<f64> {
        d.active_coordinates()
            .iter()
            .map(|&(x, y)| (-(x * x + (y + 0.5) * (y + 0.5)) / 0.08).exp())
            .collect()
    }

    #[test]
    fn zero_velocity_ua1_is_backward_euler() {
        let (d, p) = setup(20);
        let v = SeparableVelocity::zero(0.1).unwrap();
        let ops = Operators::assemble(&d, &p, &v).unwrap();
        let c0 = gaussian(&d);
        let dt = 1e-3;
        let mut st = Stepper::new(&ops, &v, Scheme::Ua1, SolveSettings::default()).unwrap();
        let s = st.step(&State { values: c0.clone(), time: 0.0 }, dt).unwrap();
        let l = ops.laplacian.to_dense();
        let a = DMatrix::identity(l.nrows(), l.nrows()) - l * dt;
        let x = a.lu().solve(&DVector::from_vec(c0)).unwrap();
        for (u, w) in s.values.iter().zip(x.iter()) {
            assert!((u - w).abs() < 1e-10);
        }
    }

    #[test]
    fn zero_velocity_ua2_dense_oracle() {
        let (d, p) = setup(20);
        let v = SeparableVelocity::zero(0.1).unwrap();
        let ops = Operators::assemble(&d, &p, &v).unwrap();
        let c0 = gaussian(&d);
        let dt = 2e-3;
        let l = ops.laplacian.to_dense();
        let a = DMatrix::identity(l.nrows(), l.nrows()) - &l * dt + &l * &l * (0.5 * dt * dt);
        let x = a.lu().solve(&DVector::from_vec(c0.clone())).unwrap();
        for settings in [SolveSettings::default(), SolveSettings::krylov()] {
            let mut st = Stepper::new(&ops, &v, Scheme::Ua2, settings).unwrap();
            let s = st.step(&State { values: c0.clone(), time: 0.0 }, dt).unwrap();
            for (u, w) in s.values.iter().zip(x.iter()) {
                assert!((u - w).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn krylov_matches_direct_with_two_terms() {
        let (d, p) = setup(20);
        let v = testosc_field(1.0, 0.2, 0.3).unwrap();
        let ops = Operators::assemble(&d, &p, &v).unwrap();
        let c0 = gaussian(&d);
        for scheme in [Scheme::Ua1, Scheme::Ua2, Scheme::Cn] {
            let s0 = State { values: c0.clone(), time: 0.37 };
            let a = Stepper::new(&ops, &v, scheme, SolveSettings::default()).unwrap().step(&s0, 0.05).unwrap();
            let b = Stepper::new(&ops, &v, scheme, SolveSettings::krylov()).unwrap().step(&s0, 0.05).unwrap();
            let diff = a.values.iter().zip(&b.values).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
            assert!(diff < 1e-10, "{scheme}: {diff}");
        }
    }

    #[test]
    fn matrix_free_apply_matches_assembled() {
        let (d, p) = setup(20);
        let v = testosc_field(1.0, 0.2, 0.3).unwrap();
        let ops = Operators::assemble(&d, &p, &v).unwrap();
        let st = Stepper::new(&ops, &v, Scheme::Ua2, SolveSettings::default()).unwrap();
        let a = st.step_matrix(0.1, 0.07).unwrap();
        let c = st.coefficients(0.1, 0.07).unwrap();
        let x = gaussian(&d);
        let mut y = vec![0.0; x.len()];
        st.apply(&c, &x, &mut y, &RefCell::new(Vec::new()));
        let z = a.mul_vec(&x);
        for (u, w) in y.iter().zip(&z) {
            assert!((u - w).abs() < 1e-12);
        }
        // diagonals
        for (k, dg) in st.members.diagonals.iter().enumerate() {
            let mut e = vec![0.0; c.len()];
            e[k] = 1.0;
            let m = st.step_matrix_with(&e);
            for (i, v) in dg.iter().enumerate() {
                assert!((m.get(i, i) - v).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn single_term_quadratic_coefficient() {
        let (d, p) = setup(20);
        let v = testcos_field(&d, 1.0, 0.2, 0.013).unwrap();
        let ops = Operators::assemble(&d, &p, &v).unwrap();
        let st = Stepper::new(&ops, &v, Scheme::Ua2, SolveSettings::default()).unwrap();
        let (t, dt) = (0.0417, 0.0311);
        let a = st.step_matrix(t, dt).unwrap();
        let m = v.moments(t, dt).unwrap();
        let q = &ops.advection[0];
        let l = &ops.laplacian;
        let id = CsrMatrix::identity(ops.dim());
        let (ll, lq, ql, qq) = (l.matmul(l), l.matmul(q), q.matmul(l), q.matmul(q));
        let manual = CsrMatrix::linear_combination(&[
            (1.0, &id),
            (-dt, l),
            (-m.i0[0], q),
            (0.5 * dt * dt, &ll),
            (m.j1[0], &lq),
            (m.j2[0], &ql),
            (0.5 * m.i0[0] * m.i0[0], &qq),
        ]);
        assert!(a.max_abs_diff(&manual) <= 1e-14 * a.max_abs().max(1.0));
    }

    #[test]
    fn integrate_bookkeeping() {
        let (d, p) = setup(20);
        let v = testcos_field(&d, 1.0, 0.2, 0.01).unwrap();
        let ops = Operators::assemble(&d, &p, &v).unwrap();
        let c0 = gaussian(&d);
        let mut st = Stepper::new(&ops, &v, Scheme::Ua2, SolveSettings::default()).unwrap();
        let r = integrate(&mut st, &c0, 0.1, 0.0, |_, _, _| Ok(())).unwrap();
        assert_eq!(r.steps, 0);
        assert_eq!(r.state.values, c0);
        let mut times = Vec::new();
        let r = integrate(&mut st, &c0, 0.0031, 0.01, |_, t, _| {
            times.push(t);
            Ok(())
        })
        .unwrap();
        assert_eq!(r.steps, 3);
        assert!((r.dt - 0.01 / 3.0).abs() < 1e-18);
        assert_eq!(times.len(), 4);
        assert!((r.state.time - 0.01).abs() < 1e-17);
        // linearity
        let c2: Vec<f64> = c0.iter().map(|x| 2.5 * x).collect();
        let a = integrate(&mut st, &c0, 0.002, 0.01, |_, _, _| Ok(())).unwrap();
        let b = integrate(&mut st, &c2, 0.002, 0.01, |_, _, _| Ok(())).unwrap();
        for (x, y) in a.state.values.iter().zip(&b.state.values) {
            assert!((2.5 * x - y).abs() < 1e-11);
        }
    }

    #[test]
    fn step_errors_carry_index() {
        let (d, p) = setup(20);
        let v = testcos_field(&d, 1.0, 0.2, 0.01).unwrap();
        let ops = Operators::assemble(&d, &p, &v).unwrap();
        let mut st = Stepper::new(
            &ops,
            &v,
            Scheme::Ua2,
            SolveSettings {
                max_iterations: 1,
                tolerance: 1e-15,
                ..SolveSettings::krylov()
            },
        )
        .unwrap();
        let e = integrate(&mut st, &gaussian(&d), 0.01, 0.05, |_, _, _| Ok(())).unwrap_err();
        assert!(matches!(e, Error::Step { step: 1, .. }), "{e}");
        assert!(st.step(&State { values: gaussian(&d), time: 0.0 }, 0.0).is_err());
    }

    #[test]
    fn scheme_names_round_trip() {
        for s in [Scheme::Ua1, Scheme::Ua2, Scheme::Cn, Scheme::Ua2Flipped] {
            assert_eq!(s.name().parse::<Scheme>().unwrap(), s);
        }
        assert!("rk4".parse::<Scheme>().is_err());
    }
}
