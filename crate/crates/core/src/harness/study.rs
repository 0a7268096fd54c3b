//! Experiments: single runs, convergence sweeps, CN comparison, averaged
//! model validation and oracle checks.

use rayon::prelude::*;

use crate::discretization::{PhysicalParams, Potential};
use crate::error::{Error, Result};
use crate::geometry::Domain;
use crate::harness::cache::ReferenceCache;
use crate::harness::config::{Method, StudyConfig, TestCase};
use crate::harness::measure::{initial_condition, relative_error, Detector, Restriction};
use crate::harness::oracle::DenseOracle;
use crate::harness::table::{sort_convergence, AsymptoticRow, ConvergenceRow, OrderRow, TraceRow};
use crate::integrators::{integrate, AutonomousStepper, Integration, Operators, Scheme, Stepper};
use crate::oscillatory::{testcos_field, testosc_field, SeparableVelocity};
use crate::solver::SolveSettings;
use crate::twoscale::{AveragedModel, Order};

/// Everything needed to integrate one `(test, N, ε)` instance.
pub struct Problem {
    pub n: usize,
    pub domain: Domain,
    pub params: PhysicalParams,
    pub velocity: SeparableVelocity,
    pub ops: Operators,
    pub c0: Vec<f64>,
}

impl std::fmt::Debug for Problem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Problem")
            .field("n", &self.n)
            .field("eps", &self.velocity.eps)
            .field("unknowns", &self.domain.n_active())
            .finish()
    }
}

impl Problem {
    pub fn build(cfg: &StudyConfig, n: usize, eps: f64) -> Result<Self> {
        let domain = Domain::circle(n, cfg.radius)?;
        let params = match cfg.adsorption_length {
            Some(m) => PhysicalParams::new(cfg.diffusion, m)?,
            None => PhysicalParams::from_potential(cfg.diffusion, &Potential::new(cfg.delta, cfg.phi))?,
        };
        let velocity = match cfg.test {
            TestCase::TestCos => testcos_field(&domain, cfg.amplitude, cfg.radius, eps)?,
            TestCase::TestOsc => testosc_field(cfg.amplitude, cfg.radius, eps)?,
        };
        let ops = Operators::assemble(&domain, &params, &velocity)?;
        let c0 = initial_condition(&domain, cfg.sigma, cfg.y0)?;
        Ok(Self {
            n,
            domain,
            params,
            velocity,
            ops,
            c0,
        })
    }

    /// Integrate with `method` to `t_fin`; `probe(n, t, c)` sees every step.
    pub fn solve(
        &self,
        method: Method,
        dt: f64,
        t_fin: f64,
        settings: SolveSettings,
        centering: crate::twoscale::Centering,
        probe: impl FnMut(usize, f64, &[f64]) -> Result<()>,
    ) -> Result<Integration> {
        match method {
            Method::Scheme(s) => {
                let mut st = Stepper::new(&self.ops, &self.velocity, s, settings)?;
                integrate(&mut st, &self.c0, dt, t_fin, probe)
            }
            Method::TwoScale(order) => {
                let model = AveragedModel::new(order, &self.ops, &self.velocity, centering)?;
                model.integrate(&self.c0, dt, t_fin, &settings, probe)
            }
        }
    }
}

fn settings(cfg: &StudyConfig, kind: crate::solver::SolverKind) -> SolveSettings {
    SolveSettings {
        method: kind,
        tolerance: cfg.tolerance,
        ..SolveSettings::default()
    }
}

fn no_probe(_: usize, _: f64, _: &[f64]) -> Result<()> {
    Ok(())
}

/// Reference solution for `ε`: `ua2` at `(N_ref, Δt_ref)`, cached on disk
/// when the configuration names a cache directory.
pub fn reference(cfg: &StudyConfig, eps: f64) -> Result<(Problem, Vec<f64>)> {
    let problem = Problem::build(cfg, cfg.n_ref, eps)?;
    let compute = || -> Result<Vec<f64>> {
        let out = problem.solve(
            Method::Scheme(Scheme::Ua2),
            cfg.dt_ref,
            cfg.t_fin,
            settings(cfg, cfg.ref_solver),
            cfg.centering,
            no_probe,
        )?;
        Ok(out.state.values)
    };
    let values = match &cfg.cache {
        Some(dir) => ReferenceCache::new(dir).get_or_compute(&cfg.reference_key(eps), compute)?,
        None => compute()?,
    };
    if values.len() != problem.domain.n_active() {
        return Err(Error::Parse(format!(
            "cached reference has {} values for {} unknowns",
            values.len(),
            problem.domain.n_active()
        )));
    }
    Ok((problem, values))
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn fit_order(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::Argument("order fit needs at least two points".into()));
    }
    if x.iter().chain(y).any(|v| !(*v > 0.0) || !v.is_finite()) {
        return Err(Error::Numeric("order fit needs positive finite data".into()));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::Numeric("order fit needs distinct abscissae".into()));
    }
    Ok(sxy / sxx)
}

/// Error rows plus one fitted order per `ε`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceStudy {
    pub rows: Vec<ConvergenceRow>,
    pub orders: Vec<OrderRow>,
}

impl ConvergenceStudy {
    /// `max_ε error / min_ε error` at each `Δt`, as `(Δt, ratio)`.
    pub fn uniformity(&self) -> Vec<(f64, f64)> {
        let mut dts: Vec<f64> = self.rows.iter().map(|r| r.dt).collect();
        dts.sort_by(f64::total_cmp);
        dts.dedup();
        dts.into_iter()
            .map(|dt| {
                let errs = self.rows.iter().filter(|r| r.dt == dt).map(|r| r.error);
                let (lo, hi) = errs.fold((f64::INFINITY, 0.0f64), |(lo, hi), e| (lo.min(e), hi.max(e)));
                (dt, hi / lo)
            })
            .collect()
    }

    pub fn order(&self, eps: f64) -> Option<f64> {
        self.orders.iter().find(|o| o.eps == eps).map(|o| o.order)
    }
}

fn study_method(cfg: &StudyConfig) -> Method {
    cfg.method
}

/// Temporal convergence at `N = cfg.n[0]` against the reference for each `ε`.
pub fn time_study(cfg: &StudyConfig) -> Result<ConvergenceStudy> {
    let n = *cfg.n.first().ok_or_else(|| Error::Config("N list is empty".into()))?;
    let per_eps: Vec<Result<(Vec<ConvergenceRow>, Option<OrderRow>)>> = cfg
        .eps
        .par_iter()
        .map(|&eps| {
            let (ref_problem, ref_values) = reference(cfg, eps)?;
            let owned;
            let problem = if n == cfg.n_ref {
                &ref_problem
            } else {
                owned = Problem::build(cfg, n, eps)?;
                &owned
            };
            let restriction = (n != cfg.n_ref)
                .then(|| Restriction::new(&ref_problem.domain, &problem.domain))
                .transpose()?;
            let mut rows = Vec::new();
            for &dt in &cfg.dt {
                let out = problem
                    .solve(study_method(cfg), dt, cfg.t_fin, settings(cfg, cfg.solver), cfg.centering, no_probe)
                    .map_err(|e| Error::Config(format!("run ε = {eps}, Δt = {dt}, N = {n}: {e}")))?;
                let error = match &restriction {
                    Some(r) => r.relative_error(&out.state.values, &ref_values)?,
                    None => relative_error(&out.state.values, &ref_values)?,
                };
                rows.push(ConvergenceRow { eps, dt: out.dt, n, error });
            }
            let order = if rows.len() >= 2 {
                let x: Vec<f64> = rows.iter().map(|r| r.dt).collect();
                let y: Vec<f64> = rows.iter().map(|r| r.error).collect();
                Some(OrderRow {
                    eps,
                    order: fit_order(&x, &y)?,
                })
            } else {
                None
            };
            Ok((rows, order))
        })
        .collect();
    assemble(per_eps)
}

fn assemble(per_eps: Vec<Result<(Vec<ConvergenceRow>, Option<OrderRow>)>>) -> Result<ConvergenceStudy> {
    let mut rows = Vec::new();
    let mut orders = Vec::new();
    for r in per_eps {
        let (mut rs, o) = r?;
        rows.append(&mut rs);
        orders.extend(o);
    }
    sort_convergence(&mut rows);
    orders.sort_by(|a, b| a.eps.total_cmp(&b.eps));
    Ok(ConvergenceStudy { rows, orders })
}

/// Spatial convergence: each `N` in `cfg.n` at `Δt = cfg.dt[0]` against
/// the `N_ref` reference restricted to the coarse grid. Orders are fitted
/// against `h = 2/N`.
pub fn space_study(cfg: &StudyConfig) -> Result<ConvergenceStudy> {
    let dt = *cfg.dt.first().ok_or_else(|| Error::Config("dt list is empty".into()))?;
    if cfg.n.iter().any(|&n| n >= cfg.n_ref) {
        return Err(Error::Config(format!("every N must be below N_ref = {}", cfg.n_ref)));
    }
    let per_eps: Vec<Result<(Vec<ConvergenceRow>, Option<OrderRow>)>> = cfg
        .eps
        .par_iter()
        .map(|&eps| {
            let (ref_problem, ref_values) = reference(cfg, eps)?;
            let rows = cfg
                .n
                .par_iter()
                .map(|&n| {
                    let problem = Problem::build(cfg, n, eps)?;
                    let restriction = Restriction::new(&ref_problem.domain, &problem.domain)?;
                    let out = problem
                        .solve(study_method(cfg), dt, cfg.t_fin, settings(cfg, cfg.solver), cfg.centering, no_probe)
                        .map_err(|e| Error::Config(format!("run ε = {eps}, Δt = {dt}, N = {n}: {e}")))?;
                    let error = restriction.relative_error(&out.state.values, &ref_values)?;
                    Ok(ConvergenceRow { eps, dt: out.dt, n, error })
                })
                .collect::<Result<Vec<_>>>()?;
            let order = if rows.len() >= 2 {
                let x: Vec<f64> = rows.iter().map(|r| 2.0 / r.n as f64).collect();
                let y: Vec<f64> = rows.iter().map(|r| r.error).collect();
                Some(OrderRow {
                    eps,
                    order: fit_order(&x, &y)?,
                })
            } else {
                None
            };
            Ok((rows, order))
        })
        .collect();
    assemble(per_eps)
}

/// Detector trace of one run.
pub fn detector_trace(problem: &Problem, cfg: &StudyConfig, method: Method, dt: f64, kind: crate::solver::SolverKind) -> Result<Vec<TraceRow>> {
    let det = Detector::new(&problem.domain, cfg.detector)?;
    let mut trace = Vec::new();
    problem.solve(method, dt, cfg.t_fin, settings(cfg, kind), cfg.centering, |_, t, c| {
        trace.push(TraceRow { t, value: det.value(c) });
        Ok(())
    })?;
    Ok(trace)
}

/// Linear interpolation of a trace with increasing times.
fn sample(trace: &[TraceRow], t: f64) -> Result<f64> {
    let k = trace.partition_point(|r| r.t < t);
    if k < trace.len() && (trace[k].t - t).abs() <= 1e-12 * t.abs().max(1.0) {
        return Ok(trace[k].value);
    }
    if k == 0 || k == trace.len() {
        return Err(Error::Argument(format!("time {t} is outside the reference trace")));
    }
    let (a, b) = (trace[k - 1], trace[k]);
    let w = (t - a.t) / (b.t - a.t);
    Ok((1.0 - w) * a.value + w * b.value)
}

/// `max_n |u(tₙ) − r(tₙ)| / |r(tₙ)|` over the samples of `trace`.
pub fn max_relative_deviation(trace: &[TraceRow], reference: &[TraceRow]) -> Result<f64> {
    let mut worst = 0.0f64;
    for row in trace {
        let r = sample(reference, row.t)?;
        if r == 0.0 {
            return Err(Error::Numeric(format!("reference trace vanishes at t = {}", row.t)));
        }
        worst = worst.max((row.value - r).abs() / r.abs());
    }
    Ok(worst)
}

/// Reference, `ua2` and `cn` detector traces at `(N = cfg.n[0], ε = cfg.eps[0],
/// Δt = cfg.dt[0])`.
#[derive(Debug, Clone, PartialEq)]
pub struct CnComparison {
    pub eps: f64,
    pub dt: f64,
    pub reference: Vec<TraceRow>,
    pub ua2: Vec<TraceRow>,
    pub cn: Vec<TraceRow>,
    pub ua2_deviation: f64,
    pub cn_deviation: f64,
}

pub fn compare_cn(cfg: &StudyConfig) -> Result<CnComparison> {
    let n = cfg.n[0];
    let eps = cfg.eps[0];
    let dt = cfg.dt[0];
    let problem = Problem::build(cfg, n, eps)?;
    let runs: Vec<Result<Vec<TraceRow>>> = [
        (Scheme::Ua2, cfg.dt_ref, cfg.ref_solver),
        (Scheme::Ua2, dt, cfg.solver),
        (Scheme::Cn, dt, cfg.solver),
    ]
    .par_iter()
    .map(|&(s, step, kind)| detector_trace(&problem, cfg, Method::Scheme(s), step, kind))
    .collect();
    let mut runs = runs.into_iter();
    let reference = runs.next().expect("three runs")?;
    let ua2 = runs.next().expect("three runs")?;
    let cn = runs.next().expect("three runs")?;
    Ok(CnComparison {
        eps,
        dt: ua2.get(1).map_or(dt, |r| r.t),
        ua2_deviation: max_relative_deviation(&ua2, &reference)?,
        cn_deviation: max_relative_deviation(&cn, &reference)?,
        reference,
        ua2,
        cn,
    })
}

/// Averaged-model errors `max_t ‖c(t) − c_model(t)‖/‖c(t)‖` against the
/// `ua2` solution at `Δt_ref` on `N = cfg.n[0]`, for both model orders.
pub fn twoscale_study(cfg: &StudyConfig) -> Result<Vec<AsymptoticRow>> {
    let n = cfg.n[0];
    let per_eps: Vec<Result<Vec<AsymptoticRow>>> = cfg
        .eps
        .par_iter()
        .map(|&eps| {
            let problem = Problem::build(cfg, n, eps)?;
            let (steps, dt) = crate::integrators::step_count(cfg.t_fin, cfg.dt_ref)?;
            let mut fine = Stepper::new(&problem.ops, &problem.velocity, Scheme::Ua2, settings(cfg, cfg.ref_solver))?;
            let models = [Order::First, Order::Second]
                .iter()
                .map(|&o| AveragedModel::new(o, &problem.ops, &problem.velocity, cfg.centering))
                .collect::<Result<Vec<_>>>()?;
            let steppers = models
                .iter()
                .map(|m| AutonomousStepper::new(&m.generator, dt, &settings(cfg, cfg.ref_solver)))
                .collect::<Result<Vec<_>>>()?;
            let mut state = crate::integrators::State {
                values: problem.c0.clone(),
                time: 0.0,
            };
            let mut cbar = models
                .iter()
                .map(|m| m.initial(&problem.c0))
                .collect::<Result<Vec<_>>>()?;
            let mut worst = vec![0.0f64; models.len()];
            let mut measure = |state: &crate::integrators::State, cbar: &[Vec<f64>], t: f64| -> Result<()> {
                for ((m, cb), w) in models.iter().zip(cbar).zip(worst.iter_mut()) {
                    let c = m.reconstruct(cb, t)?;
                    *w = w.max(relative_error(&c, &state.values)?);
                }
                Ok(())
            };
            measure(&state, &cbar, 0.0)?;
            for k in 0..steps {
                state.time = k as f64 * dt;
                let next = fine.step(&state, dt).map_err(|e| e.at_step(k + 1))?;
                state.values = next.values;
                state.time = (k + 1) as f64 * dt;
                for (cb, st) in cbar.iter_mut().zip(&steppers) {
                    *cb = st.step(cb).map_err(|e| e.at_step(k + 1))?;
                }
                measure(&state, &cbar, state.time)?;
            }
            Ok(models
                .iter()
                .zip(worst)
                .map(|(m, error)| AsymptoticRow {
                    eps,
                    order: m.order.as_u8(),
                    error,
                })
                .collect())
        })
        .collect();
    let mut rows = Vec::new();
    for r in per_eps {
        rows.extend(r?);
    }
    rows.sort_by(|a, b| a.order.cmp(&b.order).then(a.eps.total_cmp(&b.eps)));
    Ok(rows)
}

/// Fitted slope of model error against `ε` for one order.
pub fn asymptotic_slope(rows: &[AsymptoticRow], order: u8) -> Result<f64> {
    let sel: Vec<&AsymptoticRow> = rows.iter().filter(|r| r.order == order).collect();
    let x: Vec<f64> = sel.iter().map(|r| r.eps).collect();
    let y: Vec<f64> = sel.iter().map(|r| r.error).collect();
    fit_order(&x, &y)
}

/// Relative error of `method` at `Δt` against the dense RK4 oracle on
/// `N = cfg.n[0]` at time `cfg.t_fin`. The oracle step is `cfg.dt_sub`
/// or `ε/100`.
pub fn oracle_error(cfg: &StudyConfig, eps: f64, method: Method, dt: f64) -> Result<f64> {
    let n = cfg.n[0];
    let problem = Problem::build(cfg, n, eps)?;
    let oracle = DenseOracle::new(n, &problem.ops, &problem.velocity)?;
    let dt_sub = cfg.dt_sub.unwrap_or(eps / 100.0);
    let truth = oracle.integrate(&problem.c0, cfg.t_fin, dt_sub)?;
    let out = problem.solve(method, dt, cfg.t_fin, settings(cfg, cfg.solver), cfg.centering, no_probe)?;
    relative_error(&out.state.values, &truth)
}

/// One row per `(ε, Δt)` in the configuration.
pub fn oracle_study(cfg: &StudyConfig) -> Result<Vec<ConvergenceRow>> {
    let n = cfg.n[0];
    let cells: Vec<(f64, f64)> = cfg
        .eps
        .iter()
        .flat_map(|&e| cfg.dt.iter().map(move |&d| (e, d)))
        .collect();
    let mut rows = cells
        .par_iter()
        .map(|&(eps, dt)| {
            Ok(ConvergenceRow {
                eps,
                dt,
                n,
                error: oracle_error(cfg, eps, cfg.method, dt)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    sort_convergence(&mut rows);
    Ok(rows)
}

/// Summary of a single integration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub steps: usize,
    pub dt: f64,
    pub unknowns: usize,
    pub final_norm: f64,
    pub max_norm: f64,
    pub trace: Vec<TraceRow>,
    pub final_state: Vec<f64>,
}

/// Integrate `(N = cfg.n[0], ε = cfg.eps[0], Δt = cfg.dt[0])` with the
/// configured method, recording the detector and the norm history.
pub fn single_run(cfg: &StudyConfig) -> Result<RunSummary> {
    let problem = Problem::build(cfg, cfg.n[0], cfg.eps[0])?;
    let det = Detector::new(&problem.domain, cfg.detector)?;
    let mut trace = Vec::new();
    let mut max_norm = 0.0f64;
    let out = problem.solve(cfg.method, cfg.dt[0], cfg.t_fin, settings(cfg, cfg.solver), cfg.centering, |_, t, c| {
        let norm = crate::solver::norm2(c);
        if !norm.is_finite() {
            return Err(Error::Numeric(format!("non-finite norm at t = {t}")));
        }
        max_norm = max_norm.max(norm);
        trace.push(TraceRow { t, value: det.value(c) });
        Ok(())
    })?;
    Ok(RunSummary {
        steps: out.steps,
        dt: out.dt,
        unknowns: problem.domain.n_active(),
        final_norm: crate::solver::norm2(&out.state.values),
        max_norm,
        trace,
        final_state: out.state.values,
    })
}
