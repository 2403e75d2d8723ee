//! Integer-lattice geometry on ℤ^ν: points, the L1 metric, cubes and finite
//! regions.
//!
//! Points compare lexicographically on their coordinate vectors. That order is
//! the canonical order used everywhere downstream (regions, graph edges,
//! tracks, families).

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point of ℤ^ν. Serialized as a plain integer array, e.g. `[1,-2,3]`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LatticePoint(Vec<i64>);

impl LatticePoint {
    pub fn new(coords: Vec<i64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::invalid("lattice point needs at least one coordinate"));
        }
        Ok(LatticePoint(coords))
    }

    pub fn origin(nu: usize) -> Self {
        assert!(nu >= 1, "dimension must be positive");
        LatticePoint(vec![0; nu])
    }

    /// The unit vector along `axis`.
    pub fn unit(nu: usize, axis: usize) -> Self {
        let mut coords = vec![0; nu];
        coords[axis] = 1;
        LatticePoint(coords)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    pub fn offset(&self, other: &LatticePoint) -> LatticePoint {
        debug_assert_eq!(self.dim(), other.dim());
        LatticePoint(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn difference(&self, other: &LatticePoint) -> LatticePoint {
        debug_assert_eq!(self.dim(), other.dim());
        LatticePoint(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    /// Moves one unit along `axis` (`step` is +1 or -1).
    pub fn stepped(&self, axis: usize, step: i64) -> LatticePoint {
        let mut coords = self.0.clone();
        coords[axis] += step;
        LatticePoint(coords)
    }

    pub fn norm1(&self) -> u64 {
        self.0.iter().map(|c| c.unsigned_abs()).sum()
    }

    /// The 2ν lattice neighbours in canonical order.
    pub fn neighbours(&self) -> Vec<LatticePoint> {
        let mut out: Vec<LatticePoint> = (0..self.dim())
            .flat_map(|axis| [self.stepped(axis, -1), self.stepped(axis, 1)])
            .collect();
        out.sort();
        out
    }
}

impl fmt::Debug for LatticePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

impl From<Vec<i64>> for LatticePoint {
    fn from(coords: Vec<i64>) -> Self {
        assert!(!coords.is_empty(), "lattice point needs a coordinate");
        LatticePoint(coords)
    }
}

impl<const D: usize> From<[i64; D]> for LatticePoint {
    fn from(coords: [i64; D]) -> Self {
        LatticePoint::from(coords.to_vec())
    }
}

pub fn l1_distance(s: &LatticePoint, t: &LatticePoint) -> Result<u64> {
    if s.dim() != t.dim() {
        return Err(Error::invalid(format!(
            "dimension mismatch: {} vs {}",
            s.dim(),
            t.dim()
        )));
    }
    Ok(s.0.iter().zip(&t.0).map(|(a, b)| a.abs_diff(*b)).sum())
}

/// A finite set of distinct points of one dimension, kept in canonical order.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(try_from = "Vec<LatticePoint>", into = "Vec<LatticePoint>")]
pub struct Region {
    points: Vec<LatticePoint>,
}

impl Region {
    /// Sorts and deduplicates `points`; all points must share one dimension.
    pub fn new(mut points: Vec<LatticePoint>) -> Result<Self> {
        if let Some(first) = points.first() {
            let nu = first.dim();
            if points.iter().any(|p| p.dim() != nu) {
                return Err(Error::invalid("region mixes points of different dimensions"));
            }
        }
        points.sort();
        points.dedup();
        Ok(Region { points })
    }

    /// Builds a region from points already sorted and distinct.
    pub(crate) fn from_sorted(points: Vec<LatticePoint>) -> Self {
        debug_assert!(points.windows(2).all(|w| w[0] < w[1]));
        Region { points }
    }

    pub fn points(&self) -> &[LatticePoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Dimension of the points, `None` for the empty region.
    pub fn dim(&self) -> Option<usize> {
        self.points.first().map(LatticePoint::dim)
    }

    pub fn contains(&self, p: &LatticePoint) -> bool {
        self.points.binary_search(p).is_ok()
    }

    pub fn index_of(&self, p: &LatticePoint) -> Option<usize> {
        self.points.binary_search(p).ok()
    }

    pub fn is_subset_of(&self, other: &Region) -> bool {
        self.points.iter().all(|p| other.contains(p))
    }

    pub fn intersects(&self, other: &Region) -> bool {
        let (small, large) = if self.len() <= other.len() {
            (self, other)
        } else {
            (other, self)
        };
        small.points.iter().any(|p| large.contains(p))
    }

    pub fn union(&self, other: &Region) -> Region {
        let mut points = self.points.clone();
        points.extend(other.points.iter().cloned());
        points.sort();
        points.dedup();
        Region { points }
    }

    pub fn translate(&self, by: &LatticePoint) -> Region {
        // translation preserves lexicographic order
        Region {
            points: self.points.iter().map(|p| p.offset(by)).collect(),
        }
    }

    pub fn iter(&self) -> std::slice::Iter<'_, LatticePoint> {
        self.points.iter()
    }
}

impl fmt::Debug for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.points.iter()).finish()
    }
}

impl TryFrom<Vec<LatticePoint>> for Region {
    type Error = Error;

    fn try_from(points: Vec<LatticePoint>) -> Result<Self> {
        Region::new(points)
    }
}

impl From<Region> for Vec<LatticePoint> {
    fn from(region: Region) -> Self {
        region.points
    }
}

impl<'a> IntoIterator for &'a Region {
    type Item = &'a LatticePoint;
    type IntoIter = std::slice::Iter<'a, LatticePoint>;

    fn into_iter(self) -> Self::IntoIter {
        self.points.iter()
    }
}

/// Λ_N = {t : |t_i| ≤ N for all i}, in lexicographic order.
pub fn cube(n: u32, nu: usize) -> Region {
    assert!(nu >= 1, "dimension must be positive");
    let side = 2 * n as i64 + 1;
    let total = (side as usize).pow(nu as u32);
    let mut points = Vec::with_capacity(total);
    let mut coords = vec![-(n as i64); nu];
    for _ in 0..total {
        points.push(LatticePoint(coords.clone()));
        // odometer, last axis fastest, which yields lexicographic order
        for axis in (0..nu).rev() {
            if coords[axis] < n as i64 {
                coords[axis] += 1;
                break;
            }
            coords[axis] = -(n as i64);
        }
    }
    Region::from_sorted(points)
}

/// min over t ∈ Q of ‖t‖₁.
pub fn distance_to_origin(q: &Region) -> Result<u64> {
    q.iter()
        .map(LatticePoint::norm1)
        .min()
        .ok_or_else(|| Error::invalid("distance to origin of an empty region"))
}

/// Smallest N with Q ⊆ Λ_N (the L∞ radius of Q).
pub fn enclosing_cube_radius(q: &Region) -> u32 {
    q.iter()
        .flat_map(|p| p.coords().iter().map(|c| c.unsigned_abs()))
        .max()
        .unwrap_or(0) as u32
}

/// All points within L1 distance `radius` of `center`, in canonical order.
pub fn l1_ball(center: &LatticePoint, radius: u64) -> Region {
    let nu = center.dim();
    let r = radius as i64;
    let mut points = Vec::new();
    for offset in cube(radius as u32, nu).iter() {
        if offset.norm1() as i64 <= r {
            points.push(center.offset(offset));
        }
    }
    Region::from_sorted(points)
}
