//! Tangent angle ψ, conformal angle φ and the blended angle φ_Φ of a pair
//! of curve points.
//!
//! For points `f(s1)`, `f(s2)` with unit tangents `τ1`, `τ2` and chord
//! direction `u = Δf / |Δf|` (`Δf = f(s1) - f(s2)`):
//!
//! * `cos ψ = τ1 · τ2`
//! * `cos φ = -τ1 · τ2 + 2 (τ1 · u)(τ2 · u)`
//! * `cos φ_Φ = (1 - Θ) cos φ + Θ cos ψ`

use crate::curve::{dist, dot, norm};
use crate::error::{Error, Result};

const UNIT_TOL: f64 = 1e-12;

/// Chords whose normal component relative to a tangent falls below this
/// (relative to the chord length) are treated as straight lines.
pub const LINE_LIMIT_TOL: f64 = 1e-13;

/// Δf, τ(s1), τ(s2) for one pair of sample points.
#[derive(Clone, Copy, Debug)]
pub struct PairGeometry<'a> {
    delta_f: &'a [f64],
    tau1: &'a [f64],
    tau2: &'a [f64],
    chord_len: f64,
}

impl<'a> PairGeometry<'a> {
    pub fn new(delta_f: &'a [f64], tau1: &'a [f64], tau2: &'a [f64]) -> Result<Self> {
        if delta_f.len() != tau1.len() || tau1.len() != tau2.len() {
            return Err(Error::InvalidGeometry("vector dimensions differ".into()));
        }
        for (name, t) in [("tau1", tau1), ("tau2", tau2)] {
            let n = norm(t);
            if (n - 1.0).abs() > UNIT_TOL {
                return Err(Error::InvalidGeometry(format!("{name} has norm {n}")));
            }
        }
        Ok(PairGeometry { delta_f, tau1, tau2, chord_len: norm(delta_f) })
    }

    pub fn delta_f(&self) -> &[f64] {
        self.delta_f
    }

    pub fn tau1(&self) -> &[f64] {
        self.tau1
    }

    pub fn tau2(&self) -> &[f64] {
        self.tau2
    }

    pub fn chord_len(&self) -> f64 {
        self.chord_len
    }

    /// Reduces the pair to its scalar invariants. Requires a non-zero chord.
    pub fn scalars(&self) -> Result<PairScalars> {
        if !(self.chord_len > 0.0) {
            return Err(Error::CoincidentPoints);
        }
        Ok(PairScalars {
            chord: self.chord_len,
            t12: dot(self.tau1, self.tau2),
            t1u: dot(self.tau1, self.delta_f) / self.chord_len,
            t2u: dot(self.tau2, self.delta_f) / self.chord_len,
        })
    }
}

/// Scalar invariants of a pair: `|Δf|`, `τ1·τ2`, `τ1·u`, `τ2·u`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairScalars {
    pub chord: f64,
    pub t12: f64,
    pub t1u: f64,
    pub t2u: f64,
}

impl PairScalars {
    #[inline]
    pub fn cos_psi(&self) -> f64 {
        self.t12.clamp(-1.0, 1.0)
    }

    #[inline]
    pub fn cos_phi(&self) -> f64 {
        (-self.t12 + 2.0 * self.t1u * self.t2u).clamp(-1.0, 1.0)
    }

    /// `|Δτ|^2 = 2 (1 - τ1·τ2)` for unit tangents.
    #[inline]
    pub fn tau_gap_sq(&self) -> f64 {
        2.0 * (1.0 - self.t12)
    }

    /// `⟨τ1 ∧ u, τ2 ∧ u⟩ = τ1·τ2 - (τ1·u)(τ2·u)`.
    #[inline]
    pub fn wedge(&self) -> f64 {
        self.t12 - self.t1u * self.t2u
    }
}

pub fn cos_psi(g: &PairGeometry) -> f64 {
    dot(g.tau1, g.tau2).clamp(-1.0, 1.0)
}

/// Algebraic conformal angle cosine.
pub fn cos_phi_algebraic(g: &PairGeometry) -> Result<f64> {
    Ok(g.scalars()?.cos_phi())
}

/// Cosine of the blended angle `φ_Φ`. `theta` outside `[0, 1]` makes the
/// blend a non-convex combination and is refused.
pub fn cos_phi_blend(cos_phi: f64, cos_psi: f64, theta: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&theta) {
        return Err(Error::NegativeWeight(format!("blend weight {theta} outside [0, 1]")));
    }
    Ok(((1.0 - theta) * cos_phi + theta * cos_psi).clamp(-1.0, 1.0))
}

/// A circle through a point with a prescribed tangent there, or the line
/// through that point when the second point lies on the tangent line.
#[derive(Clone, Debug)]
pub enum TangentCircle {
    Circle { center: Vec<f64>, radius: f64, anchor: Vec<f64>, normal: Vec<f64>, tangent: Vec<f64> },
    Line { direction: Vec<f64> },
}

impl TangentCircle {
    /// The circle tangent to `tangent` at `anchor` passing through `through`.
    pub fn construct(anchor: &[f64], tangent: &[f64], through: &[f64]) -> TangentCircle {
        let d: Vec<f64> = through.iter().zip(anchor).map(|(a, b)| a - b).collect();
        let along = dot(&d, tangent);
        let perp: Vec<f64> = d.iter().zip(tangent).map(|(di, ti)| di - along * ti).collect();
        let perp_len = norm(&perp);
        if perp_len <= LINE_LIMIT_TOL * norm(&d) {
            return TangentCircle::Line { direction: tangent.to_vec() };
        }
        let normal: Vec<f64> = perp.iter().map(|v| v / perp_len).collect();
        // |d - ρ n|² = ρ²  ⇒  ρ = |d|² / (2 d·n)
        let radius = dot(&d, &d) / (2.0 * perp_len);
        let center = anchor.iter().zip(&normal).map(|(a, n)| a + radius * n).collect();
        TangentCircle::Circle { center, radius, anchor: anchor.to_vec(), normal, tangent: tangent.to_vec() }
    }

    /// Unit tangent at `point` (which must lie on the circle), oriented by
    /// the direction of travel fixed by the tangent at the anchor.
    pub fn tangent_at(&self, point: &[f64]) -> Vec<f64> {
        match self {
            TangentCircle::Line { direction } => direction.clone(),
            TangentCircle::Circle { center, radius, normal, tangent, .. } => {
                // In the basis (tangent, normal) the anchor sits at -ρ n and
                // moves along +tangent, so the quarter turn J maps
                // -n -> tangent and tangent -> n.
                let r: Vec<f64> = point.iter().zip(center).map(|(p, c)| p - c).collect();
                let a = dot(&r, tangent);
                let b = dot(&r, normal);
                tangent.iter().zip(normal).map(|(t, n)| (a * n - b * t) / radius).collect()
            }
        }
    }

    pub fn is_line(&self) -> bool {
        matches!(self, TangentCircle::Line { .. })
    }
}

/// Result of the tangent-circle construction of the conformal angle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConformalAngle {
    /// Cosine of the angle between the two circles measured at `f1`.
    pub at_first: f64,
    /// The same angle measured at `f2`.
    pub at_second: f64,
    /// One of the circles degenerated to a line.
    pub line_limit: bool,
}

/// Conformal angle from explicit circles: `C12` is tangent to `tau1` at `f1`
/// and passes through `f2`; `C21` is tangent to `tau2` at `f2` and passes
/// through `f1`. The angle between them is measured at both intersection
/// points.
pub fn cos_phi_geometric(f1: &[f64], f2: &[f64], tau1: &[f64], tau2: &[f64]) -> Result<ConformalAngle> {
    if dist(f1, f2) == 0.0 {
        return Err(Error::CoincidentPoints);
    }
    let c12 = TangentCircle::construct(f1, tau1, f2);
    let c21 = TangentCircle::construct(f2, tau2, f1);
    let at_first = dot(&c12.tangent_at(f1), &c21.tangent_at(f1)) / (norm(tau1) * norm(&c21.tangent_at(f1)));
    let at_second = dot(&c12.tangent_at(f2), &c21.tangent_at(f2)) / (norm(&c12.tangent_at(f2)) * norm(tau2));
    Ok(ConformalAngle {
        at_first: at_first.clamp(-1.0, 1.0),
        at_second: at_second.clamp(-1.0, 1.0),
        line_limit: c12.is_line() || c21.is_line(),
    })
}
