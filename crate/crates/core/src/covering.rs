//! Certified lower bounds for covering the sphere.
//!
//! Running the solver on the poles of `m` caps (or normals of `m` halfspaces)
//! yields a point whose inner product with every pole is at most the
//! guarantee `B(n, m, T)`. Any cap with `cos θ > B` therefore misses that
//! point, so no `m` such caps cover the sphere. In Gaussian terms, no `m`
//! halfspaces of measure below `Φ̄(√n·B)` cover the `√n`-sphere.

use crate::geometry::{cap_volume, gaussian_tail, Cap, GeometryError, Halfspace};
use crate::linalg::{dot, UnitVector};
use crate::solver::{guarantee_bound, solve, GuaranteeBound, Instance, SolverConfig, SolverError};
use crate::sweep::max_over;
use thiserror::Error;

/// Slack subtracted from a body's threshold before a witness counts as
/// outside it, so that `cos(π/2) ≈ 6e-17` cannot certify a tangent point.
pub const CERTIFY_MARGIN: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CoveringError {
    #[error("cover has no bodies")]
    Empty,
    #[error("body {index} has {found} where body 0 has {expected}; covers must be uniform")]
    NonUniform {
        index: usize,
        expected: f64,
        found: f64,
    },
    #[error("body {index} has dimension {found}, expected {expected}")]
    DimensionMismatch {
        index: usize,
        expected: usize,
        found: usize,
    },
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Bodies {
    /// Caps `⟨x, pole⟩ ≥ cos(angle)` on the unit sphere.
    Caps { angle: f64 },
    /// Halfspaces `⟨x, normal⟩ ≥ threshold`, tested on the `√n`-sphere.
    Halfspaces { threshold: f64 },
}

/// `m` bodies of a common size, described by their unit directions.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverInstance {
    n: usize,
    directions: Vec<UnitVector>,
    bodies: Bodies,
}

impl CoverInstance {
    pub fn from_caps(caps: Vec<Cap>) -> Result<Self, CoveringError> {
        let first = caps.first().ok_or(CoveringError::Empty)?;
        let (n, angle) = (first.dim(), first.angle);
        Cap::new(first.pole.clone(), angle)?;
        let mut directions = Vec::with_capacity(caps.len());
        for (index, c) in caps.into_iter().enumerate() {
            check_dim(index, n, c.dim())?;
            if c.angle != angle {
                return Err(CoveringError::NonUniform {
                    index,
                    expected: angle,
                    found: c.angle,
                });
            }
            directions.push(c.pole);
        }
        Ok(Self {
            n,
            directions,
            bodies: Bodies::Caps { angle },
        })
    }

    pub fn from_halfspaces(halfspaces: Vec<Halfspace>) -> Result<Self, CoveringError> {
        let first = halfspaces.first().ok_or(CoveringError::Empty)?;
        let (n, threshold) = (first.dim(), first.threshold);
        let mut directions = Vec::with_capacity(halfspaces.len());
        for (index, h) in halfspaces.into_iter().enumerate() {
            check_dim(index, n, h.dim())?;
            if h.threshold != threshold {
                return Err(CoveringError::NonUniform {
                    index,
                    expected: threshold,
                    found: h.threshold,
                });
            }
            directions.push(h.normal);
        }
        Ok(Self {
            n,
            directions,
            bodies: Bodies::Halfspaces { threshold },
        })
    }

    /// Caps of a common angle around the given poles.
    pub fn caps(poles: Vec<UnitVector>, angle: f64) -> Result<Self, CoveringError> {
        let caps = poles
            .into_iter()
            .map(|p| Cap::new(p, angle))
            .collect::<Result<Vec<_>, _>>()?;
        Self::from_caps(caps)
    }

    pub fn halfspaces(normals: Vec<UnitVector>, threshold: f64) -> Result<Self, CoveringError> {
        let hs = normals
            .into_iter()
            .map(|v| Halfspace::new(v, threshold))
            .collect::<Result<Vec<_>, _>>()?;
        Self::from_halfspaces(hs)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }

    pub fn directions(&self) -> &[UnitVector] {
        &self.directions
    }

    pub fn bodies(&self) -> &Bodies {
        &self.bodies
    }

    /// Largest admissible `max_i ⟨direction_i, x⟩` for a unit `x` to lie
    /// outside every body.
    pub fn unit_threshold(&self) -> f64 {
        match self.bodies {
            Bodies::Caps { angle } => angle.cos(),
            Bodies::Halfspaces { threshold } => threshold / (self.n as f64).sqrt(),
        }
    }

    /// `max_i ⟨direction_i, x⟩` over every body.
    pub fn max_inner(&self, x: &[f64]) -> f64 {
        max_over(self.directions.len(), |i| dot(self.directions[i].as_slice(), x))
    }
}

fn check_dim(index: usize, expected: usize, found: usize) -> Result<(), CoveringError> {
    if found != expected {
        return Err(CoveringError::DimensionMismatch {
            index,
            expected,
            found,
        });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct WitnessReport {
    /// Unit vector returned by the solver.
    pub witness: UnitVector,
    /// The witness in the bodies' own space: itself for caps, scaled by `√n`
    /// for halfspaces.
    pub point: Vec<f64>,
    /// `max_i ⟨direction_i, witness⟩`.
    pub max_inner: f64,
    /// The witness lies strictly outside every body.
    pub certified: bool,
    pub certified_bound: GuaranteeBound,
}

/// Solves on the cover's directions and checks the result against every body.
pub fn find_uncovered_point(
    cover: &CoverInstance,
    config: &SolverConfig,
) -> Result<WitnessReport, CoveringError> {
    let vectors = cover
        .directions
        .iter()
        .map(|d| d.as_slice().to_vec())
        .collect();
    let instance = Instance::new(cover.n, vectors)?;
    let solution = solve(&instance, config)?;

    let x = solution.x.as_slice();
    let max_inner = cover.max_inner(x);
    let (point, certified) = match cover.bodies {
        Bodies::Caps { angle } => (x.to_vec(), max_inner < angle.cos() - CERTIFY_MARGIN),
        Bodies::Halfspaces { threshold } => {
            let s = (cover.n as f64).sqrt();
            let point: Vec<f64> = x.iter().map(|v| v * s).collect();
            let reach = max_over(cover.len(), |i| dot(cover.directions[i].as_slice(), &point));
            (point, reach < threshold - CERTIFY_MARGIN)
        }
    };
    Ok(WitnessReport {
        witness: solution.x,
        point,
        max_inner,
        certified,
        certified_bound: solution.bound,
    })
}

/// `Φ̄(√n·B(n, m, T))`: no `m` halfspaces of common Gaussian measure below this
/// value cover the `√n`-sphere, and the solver exhibits the uncovered point.
pub fn certified_density_bound(n: usize, m: usize, iterations: u64) -> Result<f64, CoveringError> {
    let b = guarantee_bound(n, m, iterations)?;
    Ok(halfspace_bound_for(n, b.value))
}

/// Cap analogue: caps with `cos θ > B`, i.e. volume below
/// `vol(n, arccos B)`, leave the solver's witness uncovered.
pub fn certified_cap_bound(n: usize, m: usize, iterations: u64) -> Result<f64, CoveringError> {
    let b = guarantee_bound(n, m, iterations)?;
    cap_bound_for(n, b.value)
}

pub fn halfspace_bound_for(n: usize, value: f64) -> f64 {
    gaussian_tail((n as f64).sqrt() * value)
}

pub fn cap_bound_for(n: usize, value: f64) -> Result<f64, CoveringError> {
    let angle = value.clamp(-1.0, 1.0).acos();
    if angle <= 0.0 {
        return Ok(0.0);
    }
    Ok(cap_volume(n, angle)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::unit_basis;
    use std::f64::consts::FRAC_PI_2;

    fn e(n: usize, i: usize) -> UnitVector {
        UnitVector::new(unit_basis(n, i)).unwrap()
    }

    #[test]
    fn rejects_mixed_and_empty_covers() {
        let caps = vec![Cap::new(e(3, 0), 1.0).unwrap(), Cap::new(e(3, 1), 1.1).unwrap()];
        assert!(matches!(
            CoverInstance::from_caps(caps),
            Err(CoveringError::NonUniform { index: 1, .. })
        ));
        assert_eq!(CoverInstance::from_caps(vec![]), Err(CoveringError::Empty));
        let hs = vec![
            Halfspace::new(e(3, 0), 1.0).unwrap(),
            Halfspace::new(e(4, 1), 1.0).unwrap(),
        ];
        assert!(matches!(
            CoverInstance::from_halfspaces(hs),
            Err(CoveringError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn single_cap_is_escaped() {
        let n = 16;
        let cover = CoverInstance::caps(vec![e(n, 3)], 1.0).unwrap();
        let report = find_uncovered_point(&cover, &SolverConfig::with_iterations(50_000)).unwrap();
        // Padding one pole to 16n copies puts the bound itself above cos(1);
        // the witness still clears the cap by a wide margin.
        assert!(report.max_inner <= report.certified_bound.value + 1e-6);
        assert!(report.max_inner < 1.0f64.cos());
        assert!(report.certified);
    }

    #[test]
    fn antipodal_hemispheres_cover() {
        let n = 8;
        let mut minus = unit_basis(n, 0);
        minus[0] = -1.0;
        let cover =
            CoverInstance::caps(vec![e(n, 0), UnitVector::new(minus).unwrap()], FRAC_PI_2).unwrap();
        let report = find_uncovered_point(&cover, &SolverConfig::with_iterations(20_000)).unwrap();
        assert!(!report.certified);
        assert!(report.max_inner >= -1e-12);
    }

    #[test]
    fn halfspace_witness_is_scaled() {
        let n = 9;
        let cover = CoverInstance::halfspaces(vec![e(n, 0)], 1.5).unwrap();
        let report = find_uncovered_point(&cover, &SolverConfig::with_iterations(20_000)).unwrap();
        let r: f64 = report.point.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!((r - 3.0).abs() < 1e-9);
        assert_eq!(report.certified, 3.0 * report.max_inner < 1.5);
    }

    #[test]
    fn density_bound_closed_form() {
        let (n, m) = (100usize, 1600usize);
        let lam = (16f64).ln().sqrt();
        let d = 95f64;
        let t = 1e9;
        let delta = (2.0 * d / t).sqrt();
        let b = lam * (2.0 / d).sqrt()
            + lam * lam * delta * 100.0 / (2.0 * d).sqrt()
            + 3f64.ln() / (lam * (2.0 * d).sqrt());
        let got = certified_density_bound(n, m, t as u64).unwrap();
        let want = gaussian_tail(10.0 * b);
        assert!((got - want).abs() <= 1e-9 * want, "{got} vs {want}");
    }

    #[test]
    fn trivial_branch_bound() {
        let n = 6;
        let m = (6.0 * 3f64.exp()).ceil() as usize;
        let d = certified_density_bound(n, m, 1000).unwrap();
        assert_eq!(d, gaussian_tail((n as f64).sqrt()));
    }

    #[test]
    fn density_bound_nonincreasing_in_m() {
        let n = 20;
        let mut prev = f64::INFINITY;
        for m in [320, 400, 800, 1600, 6400, 25_600] {
            let d = certified_density_bound(n, m, 1 << 40).unwrap();
            assert!(d <= prev);
            prev = d;
        }
    }
}
