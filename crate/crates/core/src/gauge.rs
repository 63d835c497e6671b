//! Gauge bodies `F` and their Minkowski functions.
//!
//! `F` is closed, bounded, convex and contains the origin in its interior.
//! The gauge `rho_F(z) = inf { t >= 0 : z in tF }` plays the role of a
//! (possibly asymmetric) norm; balls of radius `r` about `x` are `x + rF`.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{check_dim, GeomError, Result};
use crate::linalg::{self, Point};
use crate::polytope;

/// Default relative tolerance of [`GaugeBody::membership`].
pub const MEMBERSHIP_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum GaugeKind {
    /// Euclidean closed unit ball.
    EuclideanBall,
    /// `{z : z^T A z <= 1}` for symmetric positive definite `A`.
    Ellipsoid { matrix: Vec<Point> },
    /// `{z : <a_j, z> <= 1 for all j}`.
    HPolytope { rows: Vec<Point> },
}

/// Cached spectral data for an ellipsoidal gauge.
#[derive(Debug, Clone)]
pub(crate) struct Spectral {
    /// Eigenvalues of `A`, ascending order not guaranteed.
    pub eigenvalues: Point,
    /// Eigenvectors of `A`; `eigenvectors[i]` pairs with `eigenvalues[i]`.
    pub eigenvectors: Vec<Point>,
    pub inverse: Vec<Point>,
}

#[derive(Debug, Clone)]
pub struct GaugeBody {
    dim: usize,
    kind: GaugeKind,
    spectral: Option<Spectral>,
    vertices: Option<Vec<Point>>,
    lipschitz: f64,
}

impl PartialEq for GaugeBody {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.kind == other.kind
    }
}

impl GaugeBody {
    pub fn euclidean(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(GeomError::InvalidGauge("dimension must be at least 1".into()));
        }
        Self::finish(dim, GaugeKind::EuclideanBall, None, None)
    }

    pub fn ellipsoid(matrix: Vec<Point>) -> Result<Self> {
        let dim = matrix.len();
        if dim == 0 || matrix.iter().any(|r| r.len() != dim) {
            return Err(GeomError::InvalidGauge("ellipsoid matrix must be square and non-empty".into()));
        }
        if matrix.iter().flatten().any(|v| !v.is_finite()) {
            return Err(GeomError::InvalidGauge("ellipsoid matrix has non-finite entries".into()));
        }
        let scale = matrix.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
        for i in 0..dim {
            for j in 0..i {
                if (matrix[i][j] - matrix[j][i]).abs() > 1e-12 * scale.max(1.0) {
                    return Err(GeomError::InvalidGauge("ellipsoid matrix is not symmetric".into()));
                }
            }
        }
        let a = DMatrix::from_fn(dim, dim, |i, j| 0.5 * (matrix[i][j] + matrix[j][i]));
        let eig = SymmetricEigen::new(a);
        let min_eig = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
        if !(min_eig > 1e-14 * scale) {
            return Err(GeomError::InvalidGauge("ellipsoid matrix is not positive definite".into()));
        }
        let eigenvalues: Point = eig.eigenvalues.iter().cloned().collect();
        let eigenvectors: Vec<Point> = (0..dim)
            .map(|k| eig.eigenvectors.column(k).iter().cloned().collect())
            .collect();
        let inverse = (0..dim)
            .map(|i| {
                (0..dim)
                    .map(|j| {
                        (0..dim)
                            .map(|k| eigenvectors[k][i] * eigenvectors[k][j] / eigenvalues[k])
                            .sum()
                    })
                    .collect()
            })
            .collect();
        let spectral = Spectral {
            eigenvalues,
            eigenvectors,
            inverse,
        };
        Self::finish(dim, GaugeKind::Ellipsoid { matrix }, Some(spectral), None)
    }

    /// Builds `F = {z : <a_j, z> <= 1}`. The rows must positively span the
    /// space so that `F` is bounded; this is checked with one linear program
    /// per signed coordinate direction.
    pub fn hpolytope(rows: Vec<Point>) -> Result<Self> {
        let dim = rows.first().map_or(0, |r| r.len());
        if dim == 0 || rows.iter().any(|r| r.len() != dim) {
            return Err(GeomError::InvalidGauge("polytope rows must share a positive dimension".into()));
        }
        if rows.len() < dim + 1 {
            return Err(GeomError::InvalidGauge(format!(
                "a bounded polytope in dimension {dim} needs at least {} rows, got {}",
                dim + 1,
                rows.len()
            )));
        }
        if rows.iter().flatten().any(|v| !v.is_finite()) {
            return Err(GeomError::InvalidGauge("polytope rows have non-finite entries".into()));
        }
        if let Some(j) = rows.iter().position(|r| linalg::is_zero(r)) {
            return Err(GeomError::InvalidGauge(format!("polytope row {j} is zero")));
        }
        let ones = vec![1.0; rows.len()];
        for i in 0..dim {
            for sign in [1.0, -1.0] {
                let e = linalg::scale(&linalg::unit(dim, i), sign);
                match polytope::lp_support(&rows, &ones, &e) {
                    Ok(_) => {}
                    Err(GeomError::Unbounded) => {
                        return Err(GeomError::InvalidGauge(
                            "polytope rows do not positively span the space (unbounded body)".into(),
                        ))
                    }
                    Err(e) => return Err(e),
                }
            }
        }
        let vertices = polytope::enumerate_vertices(&rows, &ones, dim);
        Self::finish(dim, GaugeKind::HPolytope { rows }, None, vertices)
    }

    fn finish(
        dim: usize,
        kind: GaugeKind,
        spectral: Option<Spectral>,
        vertices: Option<Vec<Point>>,
    ) -> Result<Self> {
        let mut body = GaugeBody {
            dim,
            kind,
            spectral,
            vertices,
            lipschitz: 0.0,
        };
        let mut worst: f64 = 0.0;
        for i in 0..dim {
            for sign in [1.0, -1.0] {
                worst = worst.max(body.eval(&linalg::scale(&linalg::unit(dim, i), sign)));
            }
        }
        body.lipschitz = worst * (dim as f64).sqrt();
        Ok(body)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> &GaugeKind {
        &self.kind
    }

    pub fn is_euclidean(&self) -> bool {
        matches!(self.kind, GaugeKind::EuclideanBall)
    }

    /// Lipschitz constant of the gauge with respect to the Euclidean norm.
    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    /// Vertices of a polytopal body, when they could be enumerated.
    pub fn vertices(&self) -> Option<&[Point]> {
        self.vertices.as_deref()
    }

    pub(crate) fn spectral(&self) -> Option<&Spectral> {
        self.spectral.as_ref()
    }

    /// The Minkowski function `rho_F(z)`.
    pub fn value(&self, z: &[f64]) -> Result<f64> {
        check_dim(self.dim, z.len())?;
        Ok(self.eval(z))
    }

    /// A subgradient of `rho_F` at `z` (the zero vector at the origin).
    pub fn subgradient(&self, z: &[f64]) -> Result<Point> {
        check_dim(self.dim, z.len())?;
        Ok(self.subgrad(z))
    }

    /// Whether `z` lies in `tF`, up to [`MEMBERSHIP_TOL`].
    pub fn membership(&self, z: &[f64], t: f64) -> Result<bool> {
        self.membership_with_tol(z, t, MEMBERSHIP_TOL)
    }

    pub fn membership_with_tol(&self, z: &[f64], t: f64, tol: f64) -> Result<bool> {
        if t < 0.0 || t.is_nan() {
            return Err(GeomError::NegativeScale(t));
        }
        check_dim(self.dim, z.len())?;
        Ok(self.eval(z) <= t + tol * t.max(1.0))
    }

    /// Support function `h_F(u) = max { <u, z> : z in F }` and a maximizer.
    pub fn support(&self, u: &[f64]) -> Result<(f64, Point)> {
        check_dim(self.dim, u.len())?;
        if linalg::is_zero(u) {
            return Err(GeomError::ZeroDirection);
        }
        Ok(self.support_point(u))
    }

    pub(crate) fn eval(&self, z: &[f64]) -> f64 {
        match &self.kind {
            GaugeKind::EuclideanBall => linalg::norm(z),
            GaugeKind::Ellipsoid { matrix } => {
                let q: f64 = matrix
                    .iter()
                    .zip(z)
                    .map(|(row, zi)| zi * linalg::dot(row, z))
                    .sum();
                q.max(0.0).sqrt()
            }
            GaugeKind::HPolytope { rows } => rows
                .iter()
                .map(|a| linalg::dot(a, z))
                .fold(0.0, f64::max),
        }
    }

    pub(crate) fn subgrad(&self, z: &[f64]) -> Point {
        match &self.kind {
            GaugeKind::EuclideanBall => {
                let n = linalg::norm(z);
                if n == 0.0 {
                    linalg::zeros(self.dim)
                } else {
                    linalg::scale(z, 1.0 / n)
                }
            }
            GaugeKind::Ellipsoid { matrix } => {
                let az: Point = matrix.iter().map(|row| linalg::dot(row, z)).collect();
                let r = linalg::dot(z, &az).max(0.0).sqrt();
                if r == 0.0 {
                    linalg::zeros(self.dim)
                } else {
                    linalg::scale(&az, 1.0 / r)
                }
            }
            GaugeKind::HPolytope { rows } => {
                let mut best = 0.0;
                let mut arg = None;
                for (j, a) in rows.iter().enumerate() {
                    let v = linalg::dot(a, z);
                    if v > best {
                        best = v;
                        arg = Some(j);
                    }
                }
                arg.map_or_else(|| linalg::zeros(self.dim), |j| rows[j].clone())
            }
        }
    }

    pub(crate) fn support_point(&self, u: &[f64]) -> (f64, Point) {
        match &self.kind {
            GaugeKind::EuclideanBall => {
                let n = linalg::norm(u);
                (n, linalg::scale(u, 1.0 / n))
            }
            GaugeKind::Ellipsoid { .. } => {
                let inv = &self.spectral.as_ref().expect("ellipsoid spectral data").inverse;
                let w: Point = inv.iter().map(|row| linalg::dot(row, u)).collect();
                let h = linalg::dot(u, &w).max(0.0).sqrt();
                (h, linalg::scale(&w, 1.0 / h))
            }
            GaugeKind::HPolytope { rows } => match &self.vertices {
                Some(vs) => {
                    let mut best = f64::NEG_INFINITY;
                    let mut arg = 0;
                    for (k, v) in vs.iter().enumerate() {
                        let s = linalg::dot(u, v);
                        if s > best {
                            best = s;
                            arg = k;
                        }
                    }
                    (best, vs[arg].clone())
                }
                None => {
                    let ones = vec![1.0; rows.len()];
                    polytope::lp_support(rows, &ones, u).expect("bounded by construction")
                }
            },
        }
    }
}
