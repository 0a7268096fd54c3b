//! Sparse spatial operators on the active points of a [`Domain`]: the
//! diffusion operator `L_h` (five-point interior rows, interpolated boundary
//! rows at ghosts), advection operators `Q_h[a]` for a fixed spatial field,
//! and the adsorption length `M` entering the boundary condition.

use crate::error::{Error, Result};
use crate::geometry::{Domain, GhostGeometry, GridIndex, PointClass};
use crate::quadrature;
use crate::sparse::{CsrMatrix, RowBuilder};
use crate::stencil::lagrange_coeffs;

/// Lennard-Jones wall potential parameters: range `δ`, depth `φ = E/k_BT`
/// and cutoff `L` (in units of `δ`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Potential {
    pub delta: f64,
    pub phi: f64,
    pub cutoff: f64,
}

impl Potential {
    pub fn new(delta: f64, phi: f64) -> Self {
        Self {
            delta,
            phi,
            cutoff: 2.0,
        }
    }

    /// Non-dimensional potential `U(ζ) = φ(ζ⁻¹² − 2ζ⁻⁶)`.
    pub fn energy(&self, zeta: f64) -> f64 {
        if self.phi == 0.0 {
            return 0.0;
        }
        let s = zeta.powi(-6);
        self.phi * s * (s - 2.0)
    }

    /// Boltzmann factor `exp(−U(ζ))`, extended by its limit 0 at `ζ = 0`.
    pub fn boltzmann(&self, zeta: f64) -> f64 {
        if zeta <= 0.0 {
            return if self.phi == 0.0 { 1.0 } else { 0.0 };
        }
        (-self.energy(zeta)).exp()
    }

    /// `M = δ ∫₀^{L+1} exp(−U(ζ)) dζ`.
    pub fn adsorption_length(&self) -> Result<f64> {
        if !(self.delta > 0.0) {
            return Err(Error::Argument(format!("potential range δ = {} must be positive", self.delta)));
        }
        if !(self.cutoff >= 1.0) {
            return Err(Error::Argument(format!("potential cutoff L = {} must be at least 1", self.cutoff)));
        }
        if !self.phi.is_finite() {
            return Err(Error::Argument(format!("potential depth φ = {} is not finite", self.phi)));
        }
        let q = quadrature::integrate(|z| self.boltzmann(z), 0.0, self.cutoff + 1.0, 1e-12, 0.0)?;
        Ok(self.delta * q.value)
    }
}

/// Diffusion coefficient `D` and adsorption length `M`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    pub diffusion: f64,
    pub adsorption_length: f64,
}

impl PhysicalParams {
    pub fn new(diffusion: f64, adsorption_length: f64) -> Result<Self> {
        if !(diffusion > 0.0) || !diffusion.is_finite() {
            return Err(Error::Argument(format!("diffusion coefficient D = {diffusion} must be positive")));
        }
        if !(adsorption_length > 0.0) || !adsorption_length.is_finite() {
            return Err(Error::Argument(format!(
                "adsorption length M = {adsorption_length} must be positive"
            )));
        }
        Ok(Self {
            diffusion,
            adsorption_length,
        })
    }

    pub fn from_potential(diffusion: f64, potential: &Potential) -> Result<Self> {
        Self::new(diffusion, potential.adsorption_length()?)
    }
}

/// Nine-point weights (indexed `[mx][my]` like [`GhostGeometry::stencil`])
/// reconstructing a value and its derivatives at the boundary point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterpolationWeights {
    pub value: [[f64; 3]; 3],
    pub dx: [[f64; 3]; 3],
    pub dy: [[f64; 3]; 3],
    pub dxx: [[f64; 3]; 3],
    pub dxy: [[f64; 3]; 3],
    pub dyy: [[f64; 3]; 3],
}

impl InterpolationWeights {
    pub fn new(geom: &GhostGeometry, h: f64) -> Result<Self> {
        let cx = lagrange_coeffs(geom.offset_x, h)?;
        let cy = lagrange_coeffs(geom.offset_y, h)?;
        let (sx, sy) = (f64::from(geom.sign_x), f64::from(geom.sign_y));
        let tensor = |a: &[f64; 3], b: &[f64; 3], s: f64| {
            let mut w = [[0.0; 3]; 3];
            for mx in 0..3 {
                for my in 0..3 {
                    w[mx][my] = s * a[mx] * b[my];
                }
            }
            w
        };
        Ok(Self {
            value: tensor(&cx.value, &cy.value, 1.0),
            dx: tensor(&cx.first, &cy.value, sx),
            dy: tensor(&cx.value, &cy.first, sy),
            dxx: tensor(&cx.second, &cy.value, 1.0),
            dxy: tensor(&cx.first, &cy.first, sx * sy),
            dyy: tensor(&cx.value, &cy.second, 1.0),
        })
    }

    /// Apply one weight set to stencil values `f[mx][my]`.
    pub fn apply(w: &[[f64; 3]; 3], f: &[[f64; 3]; 3]) -> f64 {
        let mut s = 0.0;
        for mx in 0..3 {
            for my in 0..3 {
                s += w[mx][my] * f[mx][my];
            }
        }
        s
    }
}

/// Boundary-row weights `D τᵀHτ − (D/M) n·∇` over the nine-point stencil.
pub fn ghost_row_weights(geom: &GhostGeometry, h: f64, params: &PhysicalParams) -> Result<[[f64; 3]; 3]> {
    let w = InterpolationWeights::new(geom, h)?;
    let (tx, ty) = geom.tangent;
    let (nx, ny) = geom.normal;
    let d = params.diffusion;
    let robin = d / params.adsorption_length;
    let mut out = [[0.0; 3]; 3];
    for mx in 0..3 {
        for my in 0..3 {
            let tangential = tx * tx * w.dxx[mx][my] + 2.0 * tx * ty * w.dxy[mx][my] + ty * ty * w.dyy[mx][my];
            let normal = nx * w.dx[mx][my] + ny * w.dy[mx][my];
            out[mx][my] = d * tangential - robin * normal;
        }
    }
    Ok(out)
}

fn active(domain: &Domain, idx: GridIndex) -> Result<usize> {
    domain.classification.active_index(idx).ok_or_else(|| {
        Error::Assembly(format!("stencil references inactive point {idx}"))
    })
}

/// Neighbor index with the outer wall folded back onto the boundary cell.
fn fold(n: usize, i: usize, d: isize) -> usize {
    let k = i as isize + d;
    if k < 0 || k >= n as isize {
        i
    } else {
        k as usize
    }
}

/// Diffusion operator `L_h`.
pub fn assemble_diffusion(domain: &Domain, params: &PhysicalParams) -> Result<CsrMatrix> {
    let grid = &domain.grid;
    let cls = &domain.classification;
    let n = grid.n();
    let h = grid.h();
    let c = params.diffusion / (h * h);
    let mut ghost_rows = domain.ghosts.iter();
    let mut b = RowBuilder::new(cls.n_active());
    for &p in cls.active_points() {
        match cls.class(p) {
            PointClass::Inside => {
                let k = active(domain, p)?;
                b.add(k, -4.0 * c);
                for (di, dj) in [(-1, 0), (1, 0), (0, -1), (0, 1)] {
                    let q = GridIndex::new(fold(n, p.i, di), fold(n, p.j, dj));
                    b.add(active(domain, q)?, c);
                }
            }
            PointClass::Ghost => {
                let geom = ghost_rows
                    .next()
                    .filter(|g| g.ghost == p)
                    .ok_or_else(|| Error::Assembly(format!("missing boundary geometry for ghost {p}")))?;
                let w = ghost_row_weights(geom, h, params)?;
                for mx in 0..3 {
                    for my in 0..3 {
                        b.add(active(domain, geom.stencil[mx][my])?, w[mx][my]);
                    }
                }
            }
            PointClass::Inactive => unreachable!("inactive points carry no unknown"),
        }
        b.finish_row();
    }
    Ok(b.build())
}

/// Advection operator `Q_h[a]` in conservative central form. Ghost rows are
/// zero. Past the outer wall the concentration is mirrored while the field
/// is sampled at the true exterior cell center.
pub fn assemble_advection(domain: &Domain, field: &dyn Fn(f64, f64) -> (f64, f64)) -> Result<CsrMatrix> {
    let grid = &domain.grid;
    let cls = &domain.classification;
    let n = grid.n();
    let inv = 1.0 / (2.0 * grid.h());
    let sample = |i: isize, j: isize| -> Result<(f64, f64)> {
        let (x, y) = (grid.x(i), grid.y(j));
        let a = field(x, y);
        if !a.0.is_finite() || !a.1.is_finite() {
            return Err(Error::Assembly(format!("velocity field is not finite at ({x}, {y})")));
        }
        Ok(a)
    };
    let mut b = RowBuilder::new(cls.n_active());
    for &p in cls.active_points() {
        if cls.class(p) == PointClass::Inside {
            let (i, j) = (p.i as isize, p.j as isize);
            for (di, dj, sign) in [(1, 0, 1.0), (-1, 0, -1.0), (0, 1, 1.0), (0, -1, -1.0)] {
                let a = sample(i + di, j + dj)?;
                let comp = if di != 0 { a.0 } else { a.1 };
                let q = GridIndex::new(fold(n, p.i, di), fold(n, p.j, dj));
                b.add(active(domain, q)?, sign * comp * inv);
            }
        }
        b.finish_row();
    }
    Ok(b.build())
}
