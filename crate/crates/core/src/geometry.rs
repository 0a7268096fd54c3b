//! Cell-centered grid on `[-1, 1]²`, level-set obstacles, point classification
//! and the boundary geometry attached to every ghost point.
//!
//! Points strictly inside the obstacle (`φ > 0`) are *bubble* points. A bubble
//! point with at least one fluid 4-neighbor is a *ghost*; the remaining bubble
//! points are *inactive* and carry no unknown. Fluid points (`φ ≤ 0`) are
//! *inside* points of the computational domain.

use crate::error::{Error, Result};

/// Side length of the square domain.
pub const DOMAIN_LENGTH: f64 = 2.0;

/// Zero-based cell index `(i, j)`, `i` along x and `j` along y.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GridIndex {
    pub i: usize,
    pub j: usize,
}

impl GridIndex {
    pub fn new(i: usize, j: usize) -> Self {
        Self { i, j }
    }
}

impl std::fmt::Display for GridIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {})", self.i, self.j)
    }
}

/// Uniform cell-centered grid with `n` cells per axis over `[-1, 1]²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    n: usize,
    h: f64,
}

impl Grid {
    pub fn new(n: usize) -> Result<Self> {
        if n < 4 {
            return Err(Error::Argument(format!("grid needs at least 4 cells per axis, got {n}")));
        }
        Ok(Self {
            n,
            h: DOMAIN_LENGTH / n as f64,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// x coordinate of cell column `i` (also valid for the mirror cells at
    /// `i = -1` and `i = n`).
    pub fn x(&self, i: isize) -> f64 {
        -0.5 * DOMAIN_LENGTH + (i as f64 + 0.5) * self.h
    }

    pub fn y(&self, j: isize) -> f64 {
        self.x(j)
    }

    pub fn center(&self, idx: GridIndex) -> (f64, f64) {
        (self.x(idx.i as isize), self.y(idx.j as isize))
    }

    pub fn linear(&self, idx: GridIndex) -> usize {
        idx.j * self.n + idx.i
    }

    pub fn contains(&self, i: isize, j: isize) -> bool {
        i >= 0 && j >= 0 && (i as usize) < self.n && (j as usize) < self.n
    }

    /// Cell index of the cell containing `(x, y)`'s lower-left interpolation
    /// corner: the largest `(i, j)` with `x_i ≤ x`, `y_j ≤ y`. May be `-1`.
    pub fn lower_corner(&self, x: f64, y: f64) -> (isize, isize) {
        let fx = (x + 0.5 * DOMAIN_LENGTH) / self.h - 0.5;
        let fy = (y + 0.5 * DOMAIN_LENGTH) / self.h - 0.5;
        (fx.floor() as isize, fy.floor() as isize)
    }
}

/// Projection of a point onto the zero level set together with the unit
/// normal there (pointing into the obstacle, i.e. out of the fluid).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryPoint {
    pub point: (f64, f64),
    pub normal: (f64, f64),
}

/// Implicit obstacle: `φ > 0` inside, `φ < 0` outside, `φ = 0` on the boundary.
pub trait LevelSet: Send + Sync {
    fn value(&self, x: f64, y: f64) -> f64;

    fn gradient(&self, x: f64, y: f64) -> (f64, f64);

    /// Axis-aligned box `[xmin, xmax, ymin, ymax]` enclosing the obstacle, if known.
    fn bounding_box(&self) -> Option<[f64; 4]> {
        None
    }

    /// Closest boundary point, found by repeated steps of length `φ/|∇φ|`
    /// along `∇φ/|∇φ|`.
    fn project(&self, x: f64, y: f64) -> Result<BoundaryPoint> {
        let (mut px, mut py) = (x, y);
        for _ in 0..64 {
            let phi = self.value(px, py);
            let (gx, gy) = self.gradient(px, py);
            let norm = gx.hypot(gy);
            if !(norm > 0.0) || !norm.is_finite() {
                return Err(Error::Config(format!(
                    "level-set gradient vanishes near ({x}, {y})"
                )));
            }
            if phi.abs() <= 1e-14 {
                return Ok(BoundaryPoint {
                    point: (px, py),
                    normal: (gx / norm, gy / norm),
                });
            }
            let d = phi / norm;
            px -= d * gx / norm;
            py -= d * gy / norm;
        }
        Err(Error::Config(format!(
            "projection of ({x}, {y}) onto the level set did not converge"
        )))
    }
}

/// Circular obstacle with signed-distance level set `φ = R - |x - O|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Circle {
    pub center: (f64, f64),
    pub radius: f64,
}

impl Circle {
    pub fn new(center: (f64, f64), radius: f64) -> Self {
        Self { center, radius }
    }

    pub fn centered(radius: f64) -> Self {
        Self::new((0.0, 0.0), radius)
    }
}

impl LevelSet for Circle {
    fn value(&self, x: f64, y: f64) -> f64 {
        self.radius - (x - self.center.0).hypot(y - self.center.1)
    }

    fn gradient(&self, x: f64, y: f64) -> (f64, f64) {
        let (dx, dy) = (x - self.center.0, y - self.center.1);
        let r = dx.hypot(dy);
        (-dx / r, -dy / r)
    }

    fn bounding_box(&self) -> Option<[f64; 4]> {
        let (cx, cy) = self.center;
        let r = self.radius;
        Some([cx - r, cx + r, cy - r, cy + r])
    }

    fn project(&self, x: f64, y: f64) -> Result<BoundaryPoint> {
        let (dx, dy) = (x - self.center.0, y - self.center.1);
        let r = dx.hypot(dy);
        if r == 0.0 {
            return Err(Error::Config(format!(
                "point ({x}, {y}) coincides with the circle center; no unique projection"
            )));
        }
        Ok(BoundaryPoint {
            point: (
                self.center.0 + self.radius * dx / r,
                self.center.1 + self.radius * dy / r,
            ),
            normal: (-dx / r, -dy / r),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PointClass {
    Inside,
    Ghost,
    Inactive,
}

/// Class of every grid point plus a contiguous numbering of the active
/// (inside and ghost) points, in row-major `(j, i)` order.
#[derive(Debug, Clone)]
pub struct Classification {
    n: usize,
    classes: Vec<PointClass>,
    active_index: Vec<Option<usize>>,
    active_points: Vec<GridIndex>,
    n_inside: usize,
    n_ghost: usize,
}

impl Classification {
    pub fn class(&self, idx: GridIndex) -> PointClass {
        self.classes[idx.j * self.n + idx.i]
    }

    pub fn active_index(&self, idx: GridIndex) -> Option<usize> {
        self.active_index[idx.j * self.n + idx.i]
    }

    /// Grid index of active unknown `k`.
    pub fn active_point(&self, k: usize) -> GridIndex {
        self.active_points[k]
    }

    pub fn active_points(&self) -> &[GridIndex] {
        &self.active_points
    }

    pub fn n_inside(&self) -> usize {
        self.n_inside
    }

    pub fn n_ghost(&self) -> usize {
        self.n_ghost
    }

    pub fn n_inactive(&self) -> usize {
        self.n * self.n - self.n_inside - self.n_ghost
    }

    pub fn n_active(&self) -> usize {
        self.n_inside + self.n_ghost
    }

    pub fn ghosts(&self) -> impl Iterator<Item = GridIndex> + '_ {
        self.active_points
            .iter()
            .copied()
            .filter(|&p| self.class(p) == PointClass::Ghost)
    }
}

/// Boundary data attached to one ghost point: projection `B`, normal and
/// tangent at `B`, upwind directions and the nine-point stencil containing `B`.
#[derive(Debug, Clone, PartialEq)]
pub struct GhostGeometry {
    pub ghost: GridIndex,
    pub boundary: (f64, f64),
    pub normal: (f64, f64),
    pub tangent: (f64, f64),
    pub sign_x: i8,
    pub sign_y: i8,
    pub offset_x: f64,
    pub offset_y: f64,
    /// `stencil[mx][my]` is the cell `(i + s_x mx, j + s_y my)`.
    pub stencil: [[GridIndex; 3]; 3],
}

fn sign_of(d: f64) -> i8 {
    // SGN(0) := +1; the offset is then 0 and the stencil is still valid.
    if d >= 0.0 {
        1
    } else {
        -1
    }
}

/// Classify every cell center against the level set.
pub fn classify(grid: &Grid, level_set: &dyn LevelSet) -> Result<Classification> {
    let n = grid.n();
    if let Some([xmin, xmax, ymin, ymax]) = level_set.bounding_box() {
        let half = 0.5 * DOMAIN_LENGTH;
        if xmin <= -half || xmax >= half || ymin <= -half || ymax >= half {
            return Err(Error::Config(format!(
                "obstacle bounding box [{xmin}, {xmax}] x [{ymin}, {ymax}] touches the outer wall"
            )));
        }
    }

    let bubble: Vec<bool> = (0..n * n)
        .map(|k| {
            let (x, y) = grid.center(GridIndex::new(k % n, k / n));
            level_set.value(x, y) > 0.0
        })
        .collect();

    let mut classes = vec![PointClass::Inside; n * n];
    for j in 0..n {
        for i in 0..n {
            let k = j * n + i;
            if !bubble[k] {
                continue;
            }
            if i == 0 || j == 0 || i == n - 1 || j == n - 1 {
                return Err(Error::Config(format!(
                    "obstacle point {} lies on the outermost cell ring",
                    GridIndex::new(i, j)
                )));
            }
            let has_fluid_neighbor =
                !bubble[k - 1] || !bubble[k + 1] || !bubble[k - n] || !bubble[k + n];
            classes[k] = if has_fluid_neighbor {
                PointClass::Ghost
            } else {
                PointClass::Inactive
            };
        }
    }

    let mut active_index = vec![None; n * n];
    let mut active_points = Vec::new();
    let (mut n_inside, mut n_ghost) = (0, 0);
    for (k, class) in classes.iter().enumerate() {
        match class {
            PointClass::Inside => n_inside += 1,
            PointClass::Ghost => n_ghost += 1,
            PointClass::Inactive => continue,
        }
        active_index[k] = Some(active_points.len());
        active_points.push(GridIndex::new(k % n, k / n));
    }

    let cls = Classification {
        n,
        classes,
        active_index,
        active_points,
        n_inside,
        n_ghost,
    };
    for g in cls.ghosts() {
        ghost_geometry(grid, level_set, &cls, g)?;
    }
    Ok(cls)
}

/// Boundary geometry for ghost point `ghost`.
pub fn ghost_geometry(
    grid: &Grid,
    level_set: &dyn LevelSet,
    cls: &Classification,
    ghost: GridIndex,
) -> Result<GhostGeometry> {
    if cls.class(ghost) != PointClass::Ghost {
        return Err(Error::Argument(format!("point {ghost} is not a ghost point")));
    }
    let (xg, yg) = grid.center(ghost);
    let bp = level_set.project(xg, yg)?;
    let (xb, yb) = bp.point;
    let sign_x = sign_of(xb - xg);
    let sign_y = sign_of(yb - yg);
    let offset_x = f64::from(sign_x) * (xb - xg) / grid.h();
    let offset_y = f64::from(sign_y) * (yb - yg) / grid.h();
    if !(0.0..1.0).contains(&offset_x) || !(0.0..1.0).contains(&offset_y) {
        return Err(Error::Config(format!(
            "ghost {ghost}: boundary point is more than one cell away (offsets {offset_x}, {offset_y})"
        )));
    }

    let mut stencil = [[ghost; 3]; 3];
    for (mx, row) in stencil.iter_mut().enumerate() {
        for (my, slot) in row.iter_mut().enumerate() {
            let i = ghost.i as isize + isize::from(sign_x) * mx as isize;
            let j = ghost.j as isize + isize::from(sign_y) * my as isize;
            if !grid.contains(i, j) {
                return Err(Error::Config(format!(
                    "ghost {ghost}: nine-point stencil leaves the grid at ({i}, {j}); grid too coarse"
                )));
            }
            let idx = GridIndex::new(i as usize, j as usize);
            if cls.class(idx) == PointClass::Inactive {
                return Err(Error::Config(format!(
                    "ghost {ghost}: nine-point stencil references inactive point {idx}"
                )));
            }
            *slot = idx;
        }
    }

    let (nx, ny) = bp.normal;
    Ok(GhostGeometry {
        ghost,
        boundary: (xb, yb),
        normal: (nx, ny),
        tangent: (-ny, nx),
        sign_x,
        sign_y,
        offset_x,
        offset_y,
        stencil,
    })
}

/// Grid, obstacle, classification and ghost geometry bundled together.
pub struct Domain {
    pub grid: Grid,
    pub level_set: Box<dyn LevelSet>,
    pub classification: Classification,
    pub ghosts: Vec<GhostGeometry>,
}

impl Domain {
    pub fn new(grid: Grid, level_set: Box<dyn LevelSet>) -> Result<Self> {
        let classification = classify(&grid, level_set.as_ref())?;
        let ghosts = classification
            .ghosts()
            .map(|g| ghost_geometry(&grid, level_set.as_ref(), &classification, g))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            grid,
            level_set,
            classification,
            ghosts,
        })
    }

    /// Circular obstacle of radius `radius` centered at the origin on an `n × n` grid.
    pub fn circle(n: usize, radius: f64) -> Result<Self> {
        Self::new(Grid::new(n)?, Box::new(Circle::centered(radius)))
    }

    pub fn n_active(&self) -> usize {
        self.classification.n_active()
    }

    /// Coordinates of every active point in unknown order.
    pub fn active_coordinates(&self) -> Vec<(f64, f64)> {
        self.classification
            .active_points()
            .iter()
            .map(|&p| self.grid.center(p))
            .collect()
    }
}

impl std::fmt::Debug for Domain {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Domain")
            .field("grid", &self.grid)
            .field("n_inside", &self.classification.n_inside())
            .field("n_ghost", &self.classification.n_ghost())
            .finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_force_counts(n: usize, r: f64) -> (usize, usize, usize) {
        let h = 2.0 / n as f64;
        let c = |i: isize| -1.0 + (i as f64 + 0.5) * h;
        let bubble = |i: isize, j: isize| {
            let (x, y) = (c(i), c(j));
            (x * x + y * y).sqrt() < r
        };
        let (mut inside, mut ghost, mut inactive) = (0, 0, 0);
        for j in 0..n as isize {
            for i in 0..n as isize {
                if !bubble(i, j) {
                    inside += 1;
                } else if !bubble(i - 1, j) || !bubble(i + 1, j) || !bubble(i, j - 1) || !bubble(i, j + 1)
                {
                    ghost += 1;
                } else {
                    inactive += 1;
                }
            }
        }
        (inside, ghost, inactive)
    }

    #[test]
    fn n20_counts() {
        let d = Domain::circle(20, 0.2).unwrap();
        let c = &d.classification;
        assert_eq!(c.n_ghost(), 8);
        assert_eq!(c.n_inactive(), 4);
        assert_eq!(c.n_inside(), 388);
        assert_eq!(brute_force_counts(20, 0.2), (388, 8, 4));
    }

    #[test]
    fn empty_bubble() {
        let d = Domain::circle(16, 0.0).unwrap();
        assert_eq!(d.classification.n_ghost(), 0);
        assert_eq!(d.classification.n_inactive(), 0);
        assert_eq!(d.classification.n_inside(), 256);
    }

    #[test]
    fn n160_counts_and_invariants() {
        let d = Domain::circle(160, 0.2).unwrap();
        let c = &d.classification;
        assert_eq!(c.n_inside() + c.n_ghost() + c.n_inactive(), 25600);
        assert_eq!((c.n_inside(), c.n_ghost(), c.n_inactive()), brute_force_counts(160, 0.2));
        // golden values from the enumeration above
        assert_eq!((c.n_inside(), c.n_ghost(), c.n_inactive()), (24788, 88, 724));
        for g in c.ghosts() {
            let nb = [(g.i - 1, g.j), (g.i + 1, g.j), (g.i, g.j - 1), (g.i, g.j + 1)];
            assert!(nb
                .iter()
                .any(|&(i, j)| c.class(GridIndex::new(i, j)) == PointClass::Inside));
        }
        for &p in c.active_points() {
            if c.class(p) == PointClass::Inside {
                let (x, y) = d.grid.center(p);
                assert!(d.level_set.value(x, y) <= 0.0);
            }
        }
    }

    #[test]
    fn active_numbering_is_contiguous() {
        let d = Domain::circle(40, 0.2).unwrap();
        let c = &d.classification;
        for (k, &p) in c.active_points().iter().enumerate() {
            assert_eq!(c.active_index(p), Some(k));
        }
    }

    #[test]
    fn classification_has_fourfold_symmetry() {
        for n in [20, 21, 40] {
            let d = Domain::circle(n, 0.23).unwrap();
            let c = &d.classification;
            for j in 0..n {
                for i in 0..n {
                    let p = c.class(GridIndex::new(i, j));
                    assert_eq!(p, c.class(GridIndex::new(n - 1 - i, j)));
                    assert_eq!(p, c.class(GridIndex::new(i, n - 1 - j)));
                    assert_eq!(p, c.class(GridIndex::new(j, i)));
                }
            }
        }
    }

    #[test]
    fn refinement_keeps_ghosts_linear() {
        let mut prev_inside = 0;
        for n in [20, 40, 80, 160, 320] {
            let d = Domain::circle(n, 0.2).unwrap();
            let c = &d.classification;
            assert!(c.n_inside() >= prev_inside);
            prev_inside = c.n_inside();
            assert!(c.n_ghost() <= 4 * n, "N_G = {} for N = {n}", c.n_ghost());
        }
    }

    #[test]
    fn ghost_projection_closed_form() {
        let grid = Grid::new(20).unwrap();
        let circle = Circle::centered(0.2);
        let cls = classify(&grid, &circle).unwrap();
        // (0.15, 0.05) is cell (11, 10)
        let g = GridIndex::new(11, 10);
        let (x, y) = grid.center(g);
        assert!((x - 0.15).abs() < 1e-15 && (y - 0.05).abs() < 1e-15);
        let geo = ghost_geometry(&grid, &circle, &cls, g).unwrap();
        let r = 0.15f64.hypot(0.05);
        assert!((geo.boundary.0 - 0.2 * 0.15 / r).abs() < 1e-12);
        assert!((geo.boundary.1 - 0.2 * 0.05 / r).abs() < 1e-12);
        assert!((geo.boundary.0 - 0.18974).abs() < 1e-5);
        assert!((geo.boundary.1 - 0.06325).abs() < 1e-5);
        assert_eq!((geo.sign_x, geo.sign_y), (1, 1));

        // mirror image across the x axis
        let m = ghost_geometry(&grid, &circle, &cls, GridIndex::new(11, 9)).unwrap();
        assert!((m.offset_x - geo.offset_x).abs() < 1e-12);
        assert!((m.offset_y - geo.offset_y).abs() < 1e-12);
        assert_eq!((m.sign_x, m.sign_y), (1, -1));
    }

    #[test]
    fn every_ghost_lies_on_the_circle() {
        for n in [20, 40, 80, 41] {
            let d = Domain::circle(n, 0.2).unwrap();
            for g in &d.ghosts {
                let (bx, by) = g.boundary;
                assert!((bx.hypot(by) - 0.2).abs() < 1e-12);
                assert!(d.level_set.value(bx, by).abs() <= 1e-12);
                let (nx, ny) = g.normal;
                let (tx, ty) = g.tangent;
                assert!((nx.hypot(ny) - 1.0).abs() < 1e-14);
                assert!((nx * tx + ny * ty).abs() < 1e-15);
                assert!((0.0..1.0).contains(&g.offset_x));
                assert!((0.0..1.0).contains(&g.offset_y));
                // B lies between the first and second stencil column/row
                let x0 = d.grid.center(g.stencil[0][0]).0;
                let x2 = d.grid.center(g.stencil[2][0]).0;
                assert!((bx - x0) * (bx - x2) <= 0.0);
                let y0 = d.grid.center(g.stencil[0][0]).1;
                let y2 = d.grid.center(g.stencil[0][2]).1;
                assert!((by - y0) * (by - y2) <= 0.0);
            }
        }
    }

    #[test]
    fn zero_offset_uses_positive_sign() {
        // odd N puts a column of centers on x = 0
        let d = Domain::circle(41, 0.2).unwrap();
        let on_axis: Vec<_> = d
            .ghosts
            .iter()
            .filter(|g| d.grid.center(g.ghost).0 == 0.0)
            .collect();
        assert!(!on_axis.is_empty());
        for g in on_axis {
            assert_eq!(g.sign_x, 1);
            assert_eq!(g.offset_x, 0.0);
        }
    }

    #[test]
    fn rejects_bubble_touching_wall() {
        let err = Domain::new(Grid::new(20).unwrap(), Box::new(Circle::new((0.5, 0.0), 0.6))).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn rejects_too_small_grid() {
        assert!(matches!(Grid::new(3), Err(Error::Argument(_))));
    }

    #[test]
    fn rejects_projection_of_non_ghost() {
        let d = Domain::circle(20, 0.2).unwrap();
        let err = ghost_geometry(&d.grid, d.level_set.as_ref(), &d.classification, GridIndex::new(0, 0))
            .unwrap_err();
        assert!(matches!(err, Error::Argument(_)));
    }

    struct Ellipse {
        a: f64,
        b: f64,
    }

    impl LevelSet for Ellipse {
        fn value(&self, x: f64, y: f64) -> f64 {
            1.0 - ((x / self.a).powi(2) + (y / self.b).powi(2)).sqrt()
        }
        fn gradient(&self, x: f64, y: f64) -> (f64, f64) {
            let s = ((x / self.a).powi(2) + (y / self.b).powi(2)).sqrt();
            (-x / (self.a * self.a * s), -y / (self.b * self.b * s))
        }
    }

    #[test]
    fn generic_level_set_projection_lands_on_boundary() {
        let d = Domain::new(Grid::new(60).unwrap(), Box::new(Ellipse { a: 0.3, b: 0.2 })).unwrap();
        assert!(!d.ghosts.is_empty());
        for g in &d.ghosts {
            let (bx, by) = g.boundary;
            assert!(d.level_set.value(bx, by).abs() < 1e-12);
            assert!((g.normal.0.hypot(g.normal.1) - 1.0).abs() < 1e-14);
        }
    }
}
