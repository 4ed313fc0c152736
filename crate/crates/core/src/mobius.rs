//! Möbius maps of `R^n ∪ {∞}` as compositions of sphere inversions and
//! similarities, and their action on sampled curves.

use crate::curve::{dist, reparametrize_by_arclength, Curve};
use crate::error::{Error, Result};

const ORTHOGONALITY_TOL: f64 = 1e-12;

/// Oversampling factor applied before a map acts on a curve.
pub const TRANSPORT_OVERSAMPLING: usize = 8;

/// Default conditioning threshold: inversion centers must stay at least
/// `CONDITIONING_FRACTION * L` away from the curve.
pub const CONDITIONING_FRACTION: f64 = 1e-3;

#[derive(Clone, Debug, PartialEq)]
pub enum MobiusFactor {
    /// `x -> c + ρ² (x - c) / |x - c|²`.
    Inversion { center: Vec<f64>, radius: f64 },
    Translation { shift: Vec<f64> },
    /// `x -> Q x` with `Q` row-major and orthogonal.
    Rotation { matrix: Vec<f64> },
    Scaling { factor: f64 },
}

/// Factors applied left to right.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct MobiusMap {
    factors: Vec<MobiusFactor>,
}

impl MobiusMap {
    pub fn identity() -> Self {
        MobiusMap::default()
    }

    pub fn new(factors: Vec<MobiusFactor>) -> Result<Self> {
        for f in &factors {
            validate_factor(f)?;
        }
        Ok(MobiusMap { factors })
    }

    pub fn factors(&self) -> &[MobiusFactor] {
        &self.factors
    }

    pub fn then(mut self, factor: MobiusFactor) -> Result<Self> {
        validate_factor(&factor)?;
        self.factors.push(factor);
        Ok(self)
    }

    pub fn inversion(center: &[f64], radius: f64) -> Result<Self> {
        MobiusMap::new(vec![MobiusFactor::Inversion { center: center.to_vec(), radius }])
    }

    pub fn scaling(factor: f64) -> Result<Self> {
        MobiusMap::new(vec![MobiusFactor::Scaling { factor }])
    }

    /// Parses `;`-separated factors:
    /// `inv:c1,..,cn,rho`, `trans:v1,..,vn`, `scale:lambda`,
    /// `rot:i,j,theta` (rotation by `theta` in the coordinate plane `(i, j)`
    /// of an ambient space of dimension `dim`).
    pub fn parse(spec: &str, dim: usize) -> Result<Self> {
        let mut factors = Vec::new();
        for part in spec.split(';').map(str::trim).filter(|p| !p.is_empty()) {
            let (kind, args) = part.split_once(':').unwrap_or((part, ""));
            let v = crate::curve::parse_list(args)?;
            let factor = match kind {
                "inv" => {
                    if v.len() != dim + 1 {
                        return Err(Error::Parse(format!("`{part}`: inversion needs {dim} center coordinates and a radius")));
                    }
                    MobiusFactor::Inversion { center: v[..dim].to_vec(), radius: v[dim] }
                }
                "trans" => {
                    if v.len() != dim {
                        return Err(Error::Parse(format!("`{part}`: translation needs {dim} components")));
                    }
                    MobiusFactor::Translation { shift: v }
                }
                "scale" => {
                    if v.len() != 1 {
                        return Err(Error::Parse(format!("`{part}`: scaling takes one factor")));
                    }
                    MobiusFactor::Scaling { factor: v[0] }
                }
                "rot" => {
                    let ok = v.len() == 3 && v[0].fract() == 0.0 && v[1].fract() == 0.0;
                    let (i, j) = (v.first().copied().unwrap_or(-1.0), v.get(1).copied().unwrap_or(-1.0));
                    if !ok || i < 0.0 || j < 0.0 || i as usize >= dim || j as usize >= dim || i == j {
                        return Err(Error::Parse(format!("`{part}`: expected rot:i,j,theta with distinct axes < {dim}")));
                    }
                    MobiusFactor::Rotation { matrix: plane_rotation(dim, i as usize, j as usize, v[2]) }
                }
                other => return Err(Error::Parse(format!("unknown map factor `{other}`"))),
            };
            factors.push(factor);
        }
        MobiusMap::new(factors)
    }

    /// Image of a point. Fails if the point reaches an inversion center.
    pub fn apply_point(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut y = x.to_vec();
        for f in &self.factors {
            apply_factor(f, &mut y)?;
        }
        Ok(y)
    }

    /// Image of a sampled curve, resampled by arc length to `n_out` points.
    /// The curve is first refined by trigonometric interpolation so that
    /// the arc-length redistribution caused by inversions is resolved.
    pub fn transform_curve(&self, curve: &Curve, n_out: usize) -> Result<Curve> {
        self.transform_curve_with(curve, n_out, CONDITIONING_FRACTION)
    }

    pub fn transform_curve_with(&self, curve: &Curve, n_out: usize, conditioning: f64) -> Result<Curve> {
        let dim = curve.dim();
        for f in &self.factors {
            check_dimension(f, dim)?;
        }
        let mut points = curve.upsampled_positions(TRANSPORT_OVERSAMPLING);
        for f in &self.factors {
            if let MobiusFactor::Inversion { center, .. } = f {
                let distance = points.chunks(dim).map(|p| dist(p, center)).fold(f64::INFINITY, f64::min);
                let threshold = conditioning * polygon_length(&points, dim);
                if distance < threshold {
                    return Err(Error::IllConditioned { distance, threshold });
                }
            }
            for p in points.chunks_mut(dim) {
                apply_factor(f, p)?;
            }
        }
        reparametrize_by_arclength(dim, &points, n_out)
    }
}

fn polygon_length(points: &[f64], dim: usize) -> f64 {
    let m = points.len() / dim;
    (0..m).map(|i| dist(&points[i * dim..(i + 1) * dim], &points[((i + 1) % m) * dim..((i + 1) % m + 1) * dim])).sum()
}

/// Row-major rotation by `theta` in the `(i, j)` coordinate plane.
pub fn plane_rotation(dim: usize, i: usize, j: usize, theta: f64) -> Vec<f64> {
    let mut q = vec![0.0; dim * dim];
    for k in 0..dim {
        q[k * dim + k] = 1.0;
    }
    let (s, c) = theta.sin_cos();
    q[i * dim + i] = c;
    q[j * dim + j] = c;
    q[i * dim + j] = -s;
    q[j * dim + i] = s;
    q
}

fn validate_factor(f: &MobiusFactor) -> Result<()> {
    match f {
        MobiusFactor::Inversion { center, radius } => {
            if !(*radius > 0.0 && radius.is_finite()) || center.iter().any(|c| !c.is_finite()) {
                return Err(Error::InvalidMap(format!("inversion radius {radius} must be positive and finite")));
            }
        }
        MobiusFactor::Translation { shift } => {
            if shift.iter().any(|c| !c.is_finite()) {
                return Err(Error::InvalidMap("translation must be finite".into()));
            }
        }
        MobiusFactor::Scaling { factor } => {
            if !(*factor > 0.0 && factor.is_finite()) {
                return Err(Error::InvalidMap(format!("scaling factor {factor} must be positive")));
            }
        }
        MobiusFactor::Rotation { matrix } => {
            let dim = (matrix.len() as f64).sqrt().round() as usize;
            if dim * dim != matrix.len() || dim == 0 {
                return Err(Error::InvalidMap("rotation matrix is not square".into()));
            }
            for a in 0..dim {
                for b in 0..dim {
                    let qtq: f64 = (0..dim).map(|k| matrix[k * dim + a] * matrix[k * dim + b]).sum();
                    let expected = if a == b { 1.0 } else { 0.0 };
                    if (qtq - expected).abs() > ORTHOGONALITY_TOL {
                        return Err(Error::InvalidMap(format!("rotation matrix not orthogonal: (QᵀQ)[{a}][{b}] = {qtq}")));
                    }
                }
            }
        }
    }
    Ok(())
}

fn check_dimension(f: &MobiusFactor, dim: usize) -> Result<()> {
    let got = match f {
        MobiusFactor::Inversion { center, .. } => center.len(),
        MobiusFactor::Translation { shift } => shift.len(),
        MobiusFactor::Rotation { matrix } => (matrix.len() as f64).sqrt().round() as usize,
        MobiusFactor::Scaling { .. } => dim,
    };
    if got != dim {
        return Err(Error::InvalidMap(format!("factor acts on R^{got}, point lies in R^{dim}")));
    }
    Ok(())
}

fn apply_factor(f: &MobiusFactor, y: &mut [f64]) -> Result<()> {
    check_dimension(f, y.len())?;
    match f {
        MobiusFactor::Inversion { center, radius } => {
            let r2: f64 = y.iter().zip(center).map(|(a, c)| (a - c) * (a - c)).sum();
            if r2 == 0.0 {
                return Err(Error::PointAtInfinity(center.clone()));
            }
            let s = radius * radius / r2;
            for (a, c) in y.iter_mut().zip(center) {
                *a = c + s * (*a - c);
            }
        }
        MobiusFactor::Translation { shift } => y.iter_mut().zip(shift).for_each(|(a, v)| *a += v),
        MobiusFactor::Scaling { factor } => y.iter_mut().for_each(|a| *a *= factor),
        MobiusFactor::Rotation { matrix } => {
            let d = y.len();
            let x = y.to_vec();
            for (r, out) in y.iter_mut().enumerate() {
                *out = (0..d).map(|k| matrix[r * d + k] * x[k]).sum();
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inversion_examples() {
        let m = MobiusMap::inversion(&[0.0; 3], 1.0).unwrap();
        assert_eq!(m.apply_point(&[2.0, 0.0, 0.0]).unwrap(), vec![0.5, 0.0, 0.0]);
        let on_sphere = [0.6, 0.0, 0.8];
        let y = m.apply_point(&on_sphere).unwrap();
        assert!(dist(&y, &on_sphere) < 1e-15);
        assert!(matches!(m.apply_point(&[0.0; 3]), Err(Error::PointAtInfinity(_))));
    }

    #[test]
    fn inversion_is_an_involution() {
        let m = MobiusMap::inversion(&[0.3, -1.0, 2.0], 1.7).unwrap();
        let twice = m.clone().then(m.factors()[0].clone()).unwrap();
        let x = [1.0, 2.0, -0.5];
        assert!(dist(&twice.apply_point(&x).unwrap(), &x) < 1e-12);
    }

    #[test]
    fn invalid_factors_are_rejected() {
        assert!(MobiusMap::inversion(&[0.0; 3], 0.0).is_err());
        assert!(MobiusMap::scaling(-1.0).is_err());
        let skew = vec![1.0, 0.1, 0.0, 1.0];
        assert!(MobiusMap::new(vec![MobiusFactor::Rotation { matrix: skew }]).is_err());
    }

    #[test]
    fn parse_composition() {
        let m = MobiusMap::parse("inv:3,0,0,1; scale:2; trans:1,0,0; rot:0,1,1.5707963267948966", 3).unwrap();
        assert_eq!(m.factors().len(), 4);
        let y = m.apply_point(&[1.0, 0.0, 0.0]).unwrap();
        // (1,0,0) -> (2.5,0,0) -> (5,0,0) -> (6,0,0) -> (0,6,0)
        assert!(dist(&y, &[0.0, 6.0, 0.0]) < 1e-12);
        assert!(MobiusMap::parse("inv:1,2,1", 3).is_err());
        assert!(MobiusMap::parse("shear:1", 3).is_err());
    }
}
