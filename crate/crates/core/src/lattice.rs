//! Integer-lattice geometry on Z^d.
//!
//! Distances are measured in the max-coordinate (ℓ∞) metric throughout, so
//! that the cube `C_R(x) = x + [0, R-1]^d` and the `S`-boundary of a box
//! both have closed-form sizes.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::ops::Deref;

use num_rational::Ratio;

use crate::error::{Error, Result};

/// A point of Z^d.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Point(Vec<i64>);

impl Point {
    pub fn new(coords: Vec<i64>) -> Self {
        assert!(!coords.is_empty(), "points need dimension >= 1");
        Point(coords)
    }

    pub fn origin(dim: usize) -> Self {
        Point::new(vec![0; dim])
    }

    /// Constant point `(v, v, ..., v)`.
    pub fn splat(dim: usize, v: i64) -> Self {
        Point::new(vec![v; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    pub fn add(&self, other: &[i64]) -> Point {
        debug_assert_eq!(self.dim(), other.len());
        Point(self.0.iter().zip(other).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &[i64]) -> Point {
        debug_assert_eq!(self.dim(), other.len());
        Point(self.0.iter().zip(other).map(|(a, b)| a - b).collect())
    }

    pub fn neg(&self) -> Point {
        Point(self.0.iter().map(|a| -a).collect())
    }

    pub fn sup_norm(&self) -> i64 {
        self.0.iter().map(|c| c.abs()).max().unwrap_or(0)
    }

    pub fn l1_norm(&self) -> i64 {
        self.0.iter().map(|c| c.abs()).sum()
    }
}

impl Deref for Point {
    type Target = [i64];
    fn deref(&self) -> &[i64] {
        &self.0
    }
}

impl From<Vec<i64>> for Point {
    fn from(v: Vec<i64>) -> Self {
        Point::new(v)
    }
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// ℓ∞ distance between two points.
pub fn sup_dist(a: &[i64], b: &[i64]) -> i64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .max()
        .unwrap_or(0)
}

/// Axis-aligned box `[lo_1, hi_1] x ... x [lo_d, hi_d]` with inclusive corners.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LatticeBox {
    lo: Point,
    hi: Point,
}

impl LatticeBox {
    pub fn new(lo: Point, hi: Point) -> Result<Self> {
        if lo.dim() != hi.dim() {
            return Err(Error::DimensionMismatch {
                expected: lo.dim(),
                found: hi.dim(),
            });
        }
        if lo.iter().zip(hi.iter()).any(|(l, h)| l > h) {
            return Err(Error::InvalidArgument(format!(
                "box corners out of order: lo = {lo}, hi = {hi}"
            )));
        }
        Ok(LatticeBox { lo, hi })
    }

    /// `C_M = [0, M-1]^d`, the cube of side `M` lying at the origin.
    pub fn cube(dim: usize, side: usize) -> Self {
        assert!(side >= 1, "cube side must be >= 1");
        LatticeBox {
            lo: Point::origin(dim),
            hi: Point::splat(dim, side as i64 - 1),
        }
    }

    /// `C_M(a) = a + C_M`.
    pub fn cube_at(corner: &Point, side: usize) -> Self {
        LatticeBox::cube(corner.dim(), side).translate(corner)
    }

    pub fn dim(&self) -> usize {
        self.lo.dim()
    }

    pub fn lo(&self) -> &Point {
        &self.lo
    }

    pub fn hi(&self) -> &Point {
        &self.hi
    }

    pub fn sides(&self) -> Vec<usize> {
        self.lo
            .iter()
            .zip(self.hi.iter())
            .map(|(l, h)| (h - l + 1) as usize)
            .collect()
    }

    pub fn volume(&self) -> usize {
        self.sides().iter().product()
    }

    pub fn at_origin(&self) -> bool {
        self.lo.iter().all(|&c| c == 0)
    }

    pub fn contains(&self, x: &[i64]) -> bool {
        x.iter()
            .zip(self.lo.iter().zip(self.hi.iter()))
            .all(|(c, (l, h))| l <= c && c <= h)
    }

    pub fn translate(&self, t: &[i64]) -> Self {
        LatticeBox {
            lo: self.lo.add(t),
            hi: self.hi.add(t),
        }
    }

    /// Points in lexicographic order.
    pub fn points(&self) -> BoxPoints<'_> {
        BoxPoints {
            bx: self,
            next: Some(self.lo.clone()),
        }
    }

    /// Row-major offset of `x` inside the box (first coordinate slowest).
    pub fn linear_index(&self, x: &[i64]) -> Option<usize> {
        if !self.contains(x) {
            return None;
        }
        let mut idx = 0usize;
        for (k, side) in self.sides().into_iter().enumerate() {
            idx = idx * side + (x[k] - self.lo[k]) as usize;
        }
        Some(idx)
    }

    /// `|∂^S Q|` in closed form: `Π (L_i + 2S) - Π max(L_i - 2S, 0)`.
    pub fn boundary_len(&self, depth: usize) -> usize {
        let s = depth;
        let sides = self.sides();
        let outer: usize = sides.iter().map(|l| l + 2 * s).product();
        let core: usize = sides.iter().map(|l| l.saturating_sub(2 * s)).product();
        outer - core
    }

    /// The interior core `Q_S` of a box, itself a box unless empty.
    pub fn interior(&self, depth: usize) -> Option<LatticeBox> {
        let s = depth as i64;
        let lo = self.lo.add(&vec![s; self.dim()]);
        let hi = self.hi.sub(&vec![s; self.dim()]);
        LatticeBox::new(lo, hi).ok()
    }
}

impl fmt::Display for LatticeBox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}..{}]", self.lo, self.hi)
    }
}

pub struct BoxPoints<'a> {
    bx: &'a LatticeBox,
    next: Option<Point>,
}

impl Iterator for BoxPoints<'_> {
    type Item = Point;

    fn next(&mut self) -> Option<Point> {
        let current = self.next.take()?;
        let mut succ = current.0.clone();
        let mut k = succ.len();
        loop {
            if k == 0 {
                break;
            }
            k -= 1;
            if succ[k] < self.bx.hi[k] {
                succ[k] += 1;
                self.next = Some(Point(succ));
                break;
            }
            succ[k] = self.bx.lo[k];
        }
        Some(current)
    }
}

/// A finite subset of Z^d with points kept in lexicographic order.
///
/// Regions built from a box remember it so boundary sizes can use the
/// closed form.
#[derive(Clone, Debug)]
pub struct Region {
    dim: usize,
    points: Vec<Point>,
    index: HashMap<Point, usize>,
    shape: Option<LatticeBox>,
}

impl PartialEq for Region {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.points == other.points
    }
}

impl Eq for Region {}

impl Region {
    pub fn from_points<I: IntoIterator<Item = Point>>(dim: usize, points: I) -> Result<Self> {
        let set: BTreeSet<Point> = points.into_iter().collect();
        if let Some(p) = set.iter().find(|p| p.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: p.dim(),
            });
        }
        let points: Vec<Point> = set.into_iter().collect();
        Ok(Self::from_sorted(dim, points, None))
    }

    pub fn from_box(bx: &LatticeBox) -> Self {
        Self::from_sorted(bx.dim(), bx.points().collect(), Some(bx.clone()))
    }

    /// `C_M`.
    pub fn cube(dim: usize, side: usize) -> Self {
        Self::from_box(&LatticeBox::cube(dim, side))
    }

    pub fn empty(dim: usize) -> Self {
        Self::from_sorted(dim, Vec::new(), None)
    }

    fn from_sorted(dim: usize, points: Vec<Point>, shape: Option<LatticeBox>) -> Self {
        let index = points
            .iter()
            .enumerate()
            .map(|(i, p)| (p.clone(), i))
            .collect();
        Region {
            dim,
            points,
            index,
            shape,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn contains(&self, x: &[i64]) -> bool {
        match &self.shape {
            Some(bx) => bx.contains(x),
            None => self.index.contains_key(&Point(x.to_vec())),
        }
    }

    /// Position of `x` in the lexicographic site order.
    pub fn index_of(&self, x: &Point) -> Option<usize> {
        self.index.get(x).copied()
    }

    /// The box this region equals, if it was built from one.
    pub fn as_box(&self) -> Option<&LatticeBox> {
        self.shape.as_ref()
    }

    pub fn translate(&self, t: &[i64]) -> Region {
        let points = self.points.iter().map(|p| p.add(t)).collect();
        Self::from_sorted(
            self.dim,
            points,
            self.shape.as_ref().map(|b| b.translate(t)),
        )
    }

    /// Union of regions; fails if they overlap.
    pub fn disjoint_union(parts: &[Region]) -> Result<Region> {
        let dim = parts.first().map(|r| r.dim).unwrap_or(1);
        let total: usize = parts.iter().map(|r| r.len()).sum();
        let union = Region::from_points(dim, parts.iter().flat_map(|r| r.points.iter().cloned()))?;
        if union.len() != total {
            return Err(Error::InvalidArgument(
                "regions are not pairwise disjoint".into(),
            ));
        }
        Ok(union)
    }

    /// Smallest box containing the region.
    pub fn bounding_box(&self) -> Option<LatticeBox> {
        if let Some(bx) = &self.shape {
            return Some(bx.clone());
        }
        let first = self.points.first()?;
        let mut lo = first.0.clone();
        let mut hi = first.0.clone();
        for p in &self.points {
            for k in 0..self.dim {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        LatticeBox::new(Point(lo), Point(hi)).ok()
    }
}

/// All offsets `δ` with `‖δ‖∞ ≤ r`.
pub fn sup_ball_offsets(dim: usize, r: usize) -> impl Iterator<Item = Point> {
    let r = r as i64;
    let bx = LatticeBox {
        lo: Point::splat(dim, -r),
        hi: Point::splat(dim, r),
    };
    let pts: Vec<Point> = bx.points().collect();
    pts.into_iter()
}

fn near_complement(q: &Region, x: &Point, offsets: &[Point]) -> bool {
    offsets.iter().any(|d| !q.contains(&x.add(d)))
}

/// The `S`-boundary `∂^S Q` by enumeration: outside points within distance `S`
/// of `Q` together with inside points within distance `S` of the complement.
pub fn s_boundary(q: &Region, depth: usize) -> Region {
    let offsets: Vec<Point> = sup_ball_offsets(q.dim(), depth).collect();
    let mut out = BTreeSet::new();
    for x in q.points() {
        let mut touches = false;
        for d in &offsets {
            let y = x.add(d);
            if !q.contains(&y) {
                touches = true;
                out.insert(y);
            }
        }
        if touches {
            out.insert(x.clone());
        }
    }
    Region::from_sorted(q.dim(), out.into_iter().collect(), None)
}

/// `|∂^S Q|`, closed form for boxes and enumeration otherwise.
pub fn s_boundary_len(q: &Region, depth: usize) -> usize {
    match q.as_box() {
        Some(bx) => bx.boundary_len(depth),
        None => s_boundary(q, depth).len(),
    }
}

/// Interior core `Q_S = Q \ ∂^S Q`; may be empty.
pub fn interior_core(q: &Region, depth: usize) -> Region {
    if let Some(bx) = q.as_box() {
        return match bx.interior(depth) {
            Some(core) => Region::from_box(&core),
            None => Region::empty(q.dim()),
        };
    }
    let offsets: Vec<Point> = sup_ball_offsets(q.dim(), depth).collect();
    let pts = q
        .points()
        .iter()
        .filter(|x| !near_complement(q, x, &offsets))
        .cloned()
        .collect();
    Region::from_sorted(q.dim(), pts, None)
}

/// `|∂^S Q| / |Q|` as an exact fraction.
pub fn van_hove_ratio(q: &Region, depth: usize) -> Result<Ratio<u64>> {
    if q.is_empty() {
        return Err(Error::EmptyRegion);
    }
    Ok(Ratio::new(s_boundary_len(q, depth) as u64, q.len() as u64))
}

/// Disjoint covering of a region by translates `C_M(a)`, `a ∈ x + (MZ)^d`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoveringGrid {
    pub side: usize,
    pub offset: Point,
    /// Shifts whose cube lies inside the region.
    pub interior: Vec<Point>,
    /// Shifts whose cube meets the region without lying inside it.
    pub partial: Vec<Point>,
}

pub fn covering_grid(q: &Region, side: usize, offset: &Point) -> Result<CoveringGrid> {
    if side == 0 {
        return Err(Error::InvalidArgument("covering side must be >= 1".into()));
    }
    if offset.dim() != q.dim() {
        return Err(Error::DimensionMismatch {
            expected: q.dim(),
            found: offset.dim(),
        });
    }
    let m = side as i64;
    let shifts: BTreeSet<Point> = q
        .points()
        .iter()
        .map(|p| {
            Point(
                p.iter()
                    .zip(offset.iter())
                    .map(|(c, o)| o + m * (c - o).div_euclid(m))
                    .collect(),
            )
        })
        .collect();
    let mut interior = Vec::new();
    let mut partial = Vec::new();
    for a in shifts {
        let inside = LatticeBox::cube_at(&a, side)
            .points()
            .all(|y| q.contains(&y));
        if inside {
            interior.push(a);
        } else {
            partial.push(a);
        }
    }
    Ok(CoveringGrid {
        side,
        offset: offset.clone(),
        interior,
        partial,
    })
}
