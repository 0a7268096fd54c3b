//! Initial data, error norms, grid restriction and point detectors.

use crate::error::{Error, Result};
use crate::geometry::{Domain, GridIndex, PointClass};

/// `exp(−(x² + (y − y₀)²)/(2σ²))` at every active point, ghosts included.
pub fn initial_condition(domain: &Domain, sigma: f64, y0: f64) -> Result<Vec<f64>> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::Argument(format!("width σ = {sigma} must be positive")));
    }
    let s2 = 2.0 * sigma * sigma;
    Ok(domain
        .active_coordinates()
        .iter()
        .map(|&(x, y)| (-(x * x + (y - y0) * (y - y0)) / s2).exp())
        .collect())
}

/// `‖reference − candidate‖₂ / ‖reference‖₂`.
pub fn relative_error(candidate: &[f64], reference: &[f64]) -> Result<f64> {
    if candidate.len() != reference.len() {
        return Err(Error::Argument(format!(
            "vectors of length {} and {} are not comparable",
            candidate.len(),
            reference.len()
        )));
    }
    let (mut num, mut den) = (0.0, 0.0);
    for (c, r) in candidate.iter().zip(reference) {
        num += (r - c) * (r - c);
        den += r * r;
    }
    if den == 0.0 || !den.is_finite() {
        return Err(Error::Numeric(format!("reference norm² is {den}")));
    }
    let e = (num / den).sqrt();
    if !e.is_finite() {
        return Err(Error::Numeric("non-finite error".into()));
    }
    Ok(e)
}

/// Bilinear weights of the four cell centers around `(x, y)` on `domain`,
/// as `(active index, weight)`. Fails when any of them is not active.
fn bilinear(domain: &Domain, x: f64, y: f64) -> Result<[(usize, f64); 4]> {
    let grid = &domain.grid;
    let (i0, j0) = grid.lower_corner(x, y);
    let h = grid.h();
    let tx = (x - grid.x(i0)) / h;
    let ty = (y - grid.y(j0)) / h;
    let mut out = [(0, 0.0); 4];
    for (k, (di, dj, w)) in [
        (0, 0, (1.0 - tx) * (1.0 - ty)),
        (1, 0, tx * (1.0 - ty)),
        (0, 1, (1.0 - tx) * ty),
        (1, 1, tx * ty),
    ]
    .into_iter()
    .enumerate()
    {
        let (i, j) = (i0 + di, j0 + dj);
        // Beyond the outer wall use the mirror cell.
        let fold = |k: isize| k.clamp(0, grid.n() as isize - 1) as usize;
        let idx = GridIndex::new(fold(i), fold(j));
        let a = domain.classification.active_index(idx).ok_or_else(|| {
            Error::Config(format!(
                "interpolation at ({x}, {y}) needs inactive point ({}, {})",
                idx.i, idx.j
            ))
        })?;
        out[k] = (a, w);
    }
    Ok(out)
}

/// Samples of a fine-grid state at the inside cell centers of a coarser
/// grid, by bilinear interpolation.
#[derive(Debug, Clone)]
pub struct Restriction {
    /// Coarse active index of each compared point.
    pub coarse: Vec<usize>,
    weights: Vec<[(usize, f64); 4]>,
    fine_len: usize,
    coarse_len: usize,
}

impl Restriction {
    pub fn new(fine: &Domain, coarse: &Domain) -> Result<Self> {
        let mut idx = Vec::new();
        let mut weights = Vec::new();
        for (k, g) in coarse.classification.active_points().iter().enumerate() {
            if coarse.classification.class(*g) != PointClass::Inside {
                continue;
            }
            let (x, y) = coarse.grid.center(*g);
            weights.push(bilinear(fine, x, y)?);
            idx.push(k);
        }
        Ok(Self {
            coarse: idx,
            weights,
            fine_len: fine.n_active(),
            coarse_len: coarse.n_active(),
        })
    }

    /// Fine values at the compared coarse points.
    pub fn restrict(&self, fine: &[f64]) -> Result<Vec<f64>> {
        if fine.len() != self.fine_len {
            return Err(Error::Argument(format!(
                "fine state has length {}, expected {}",
                fine.len(),
                self.fine_len
            )));
        }
        Ok(self
            .weights
            .iter()
            .map(|w| w.iter().map(|&(k, a)| a * fine[k]).sum())
            .collect())
    }

    /// Relative L² error of a coarse candidate against a fine reference,
    /// over the coarse inside points.
    pub fn relative_error(&self, coarse: &[f64], fine: &[f64]) -> Result<f64> {
        if coarse.len() != self.coarse_len {
            return Err(Error::Argument(format!(
                "coarse state has length {}, expected {}",
                coarse.len(),
                self.coarse_len
            )));
        }
        let r = self.restrict(fine)?;
        let c: Vec<f64> = self.coarse.iter().map(|&k| coarse[k]).collect();
        relative_error(&c, &r)
    }
}

/// Bilinear probe at a fixed point of the fluid.
#[derive(Debug, Clone)]
pub struct Detector {
    pub point: (f64, f64),
    weights: [(usize, f64); 4],
}

impl Detector {
    pub fn new(domain: &Domain, point: (f64, f64)) -> Result<Self> {
        let (x, y) = point;
        if x.abs() >= 1.0 || y.abs() >= 1.0 {
            return Err(Error::Config(format!("detector ({x}, {y}) lies outside the domain")));
        }
        if domain.level_set.value(x, y) > 0.0 {
            return Err(Error::Config(format!("detector ({x}, {y}) lies inside the obstacle")));
        }
        Ok(Self {
            point,
            weights: bilinear(domain, x, y)?,
        })
    }

    pub fn value(&self, c: &[f64]) -> f64 {
        self.weights.iter().map(|&(k, w)| w * c[k]).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn gaussian_values() {
        let d = Domain::circle(40, 0.2).unwrap();
        let c = initial_condition(&d, 0.2, -0.75).unwrap();
        let pts = d.active_coordinates();
        for (v, (x, y)) in c.iter().zip(&pts) {
            let r2 = x * x + (y + 0.75) * (y + 0.75);
            assert!((v - (-r2 / 0.08).exp()).abs() < 1e-15);
        }
        let det = Detector::new(&d, (0.0, -0.75)).unwrap();
        // bilinear interpolation of the peak is below 1 but close
        assert!(det.value(&c) < 1.0 && det.value(&c) > 0.98);
        assert!(initial_condition(&d, 0.0, 0.0).is_err());
        // one σ above the peak column
        let g = GridIndex::new(20, 0);
        let (x, y) = d.grid.center(g);
        let c = initial_condition(&d, 0.2, y - 0.2).unwrap();
        let k = d.classification.active_index(g).unwrap();
        let expect = (-x * x / 0.08).exp() * (-0.5f64).exp();
        assert!((c[k] - expect).abs() < 1e-15);
    }

    #[test]
    fn relative_error_basics() {
        let r = vec![1.0, -2.0, 3.0];
        assert_eq!(relative_error(&r, &r).unwrap(), 0.0);
        let twice: Vec<f64> = r.iter().map(|x| 2.0 * x).collect();
        assert!((relative_error(&twice, &r).unwrap() - 1.0).abs() < 1e-15);
        assert!(relative_error(&r, &[0.0; 3]).is_err());
        assert!(relative_error(&r, &[1.0]).is_err());
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a: Vec<f64> = (0..100).map(|_| rng.random_range(-1.0..1.0)).collect();
        let b: Vec<f64> = (0..100).map(|_| rng.random_range(-1.0..1.0)).collect();
        let diff = nalgebra::DVector::from_vec(a.iter().zip(&b).map(|(x, y)| x - y).collect());
        let oracle = diff.norm() / nalgebra::DVector::from_vec(b.clone()).norm();
        assert!((relative_error(&a, &b).unwrap() - oracle).abs() < 1e-14);
    }

    #[test]
    fn detector_partition_of_unity_and_nodes() {
        let d = Domain::circle(20, 0.2).unwrap();
        let ones = vec![1.0; d.n_active()];
        let det = Detector::new(&d, (0.0, -0.5)).unwrap();
        assert!((det.value(&ones) - 1.0).abs() < 1e-15);
        let c: Vec<f64> = (0..d.n_active()).map(|k| k as f64).collect();
        let g = GridIndex::new(3, 4);
        let node = Detector::new(&d, d.grid.center(g)).unwrap();
        let k = d.classification.active_index(g).unwrap();
        assert!((node.value(&c) - c[k]).abs() < 1e-12);
        assert!(Detector::new(&d, (0.0, 0.0)).is_err());
        assert!(Detector::new(&d, (1.5, 0.0)).is_err());
    }

    #[test]
    fn restriction_is_exact_on_bilinear_fields() {
        let fine = Domain::circle(80, 0.2).unwrap();
        let coarse = Domain::circle(20, 0.2).unwrap();
        let r = Restriction::new(&fine, &coarse).unwrap();
        let f = |x: f64, y: f64| 1.0 + 2.0 * x - y + 0.5 * x * y;
        let fv: Vec<f64> = fine.active_coordinates().iter().map(|&(x, y)| f(x, y)).collect();
        let cv: Vec<f64> = coarse.active_coordinates().iter().map(|&(x, y)| f(x, y)).collect();
        assert!(r.relative_error(&cv, &fv).unwrap() < 1e-14);
        assert_eq!(r.coarse.len(), coarse.classification.n_inside());
    }
}
