//! Ergodic averages of almost-additive set functions and the integrated
//! density of states.
//!
//! The engine compares two approximants of the same limit `F̄`:
//!
//! * the finite-volume average `F(Q_j) / |Q_j|`, and
//! * the pattern average `Σ_P ν_P F̃(P) / |C_M|`, where `F̃(P) = F(x + C_M)`
//!   at any occurrence `x` of `P`,
//!
//! and evaluates the explicit bound on their distance
//! `b(C_M)/|C_M| + (C + D) |∂^M Q_j|/|Q_j| + C Σ_P |♯_P/|Q_j| - ν_P|`.

use std::collections::BTreeMap;

use num_rational::Ratio;
use rayon::prelude::*;

use crate::colouring::{empirical_frequencies, pattern_at, Colouring, FrequencyTable, Pattern};
use crate::error::{Error, Result};
use crate::lattice::{interior_core, s_boundary_len, LatticeBox, Point, Region};
use crate::operator::{assemble, OperatorSpec};
use crate::spectral::{counting_function, sup_distance, sym_eigen, CountingFunction};

/// Value space of an ergodic function.
pub trait NormedValue: Clone + Send + Sync {
    fn zero() -> Self;
    fn weighted_sum(parts: &[(f64, &Self)]) -> Self;
    fn distance(&self, other: &Self) -> f64;
    fn norm(&self) -> f64;
}

impl NormedValue for f64 {
    fn zero() -> Self {
        0.0
    }

    fn weighted_sum(parts: &[(f64, &Self)]) -> Self {
        parts.iter().map(|(w, v)| w * **v).sum()
    }

    fn distance(&self, other: &Self) -> f64 {
        (self - other).abs()
    }

    fn norm(&self) -> f64 {
        self.abs()
    }
}

impl NormedValue for CountingFunction {
    fn zero() -> Self {
        CountingFunction::zero()
    }

    fn weighted_sum(parts: &[(f64, &Self)]) -> Self {
        CountingFunction::weighted_sum(parts.iter().map(|(w, f)| (*w, *f)))
    }

    fn distance(&self, other: &Self) -> f64 {
        sup_distance(self, other)
    }

    fn norm(&self) -> f64 {
        sup_distance(self, &CountingFunction::zero())
    }
}

/// A colouring-invariant, almost-additive, bounded set function
/// `F: finite subsets of Z^d → X`.
pub trait ErgodicFunction: Sync {
    type Value: NormedValue;

    fn evaluate(&self, q: &Region) -> Result<Self::Value>;

    /// Translation-invariant boundary term `b(Q)`.
    fn boundary_term(&self, q: &Region) -> f64;

    /// `C` with `‖F(Q)‖ ≤ C |Q|`.
    fn bound_constant(&self) -> f64;

    /// `D` with `b(Q) ≤ D |Q|`.
    fn boundary_constant(&self) -> f64;
}

/// `F(Q) = |Q|`.
#[derive(Clone, Copy, Debug)]
pub struct Volume;

impl ErgodicFunction for Volume {
    type Value = f64;

    fn evaluate(&self, q: &Region) -> Result<f64> {
        Ok(q.len() as f64)
    }

    fn boundary_term(&self, _q: &Region) -> f64 {
        0.0
    }

    fn bound_constant(&self) -> f64 {
        1.0
    }

    fn boundary_constant(&self) -> f64 {
        0.0
    }
}

/// `F(Q) = #{x ∈ Q : Λ(x) = colour}`.
#[derive(Clone, Debug)]
pub struct ColourCount<'a> {
    pub colouring: &'a Colouring,
    pub colour: usize,
}

impl ErgodicFunction for ColourCount<'_> {
    type Value = f64;

    fn evaluate(&self, q: &Region) -> Result<f64> {
        Ok(q.points()
            .iter()
            .filter(|x| self.colouring.colour_at(x) == self.colour)
            .count() as f64)
    }

    fn boundary_term(&self, _q: &Region) -> f64 {
        0.0
    }

    fn bound_constant(&self) -> f64 {
        1.0
    }

    fn boundary_constant(&self) -> f64 {
        0.0
    }
}

/// `F(Q) = n(p_{Q_R} H i_{Q_R})`, the counting function of `H` restricted to
/// the interior core at depth `R = R(H)`.
///
/// Boundary term `b(Q) = 4 dim(H) |∂^R Q|`; `C = dim(H)` and
/// `D = 4 dim(H) (2R + 1)^d`, the largest value of `b(Q)/|Q|` (attained at
/// single points).
#[derive(Clone, Debug)]
pub struct CoreCounting<'a> {
    pub spec: &'a OperatorSpec,
    pub colouring: &'a Colouring,
}

impl ErgodicFunction for CoreCounting<'_> {
    type Value = CountingFunction;

    fn evaluate(&self, q: &Region) -> Result<CountingFunction> {
        let core = interior_core(q, self.spec.overall_range());
        if core.is_empty() {
            return Ok(CountingFunction::zero());
        }
        let a = assemble(self.spec, self.colouring, &core)?;
        Ok(counting_function(&sym_eigen(&a.matrix, false)?.values))
    }

    fn boundary_term(&self, q: &Region) -> f64 {
        4.0 * self.spec.dim_h() as f64 * s_boundary_len(q, self.spec.overall_range()) as f64
    }

    fn bound_constant(&self) -> f64 {
        self.spec.dim_h() as f64
    }

    fn boundary_constant(&self) -> f64 {
        let r = self.spec.overall_range();
        4.0 * self.spec.dim_h() as f64 * ((2 * r + 1).pow(self.spec.dim() as u32)) as f64
    }
}

/// Almost-additivity defect `‖F(∪Q_k) - Σ F(Q_k)‖` together with the allowance `Σ b(Q_k)`.
pub fn almost_additivity_defect<F: ErgodicFunction>(f: &F, parts: &[Region]) -> Result<(f64, f64)> {
    let union = Region::disjoint_union(parts)?;
    let whole = f.evaluate(&union)?;
    let values = parts
        .iter()
        .map(|q| f.evaluate(q))
        .collect::<Result<Vec<_>>>()?;
    let weighted: Vec<(f64, &F::Value)> = values.iter().map(|v| (1.0, v)).collect();
    let sum = F::Value::weighted_sum(&weighted);
    let allowance = parts.iter().map(|q| f.boundary_term(q)).sum();
    Ok((whole.distance(&sum), allowance))
}

#[derive(Clone, Debug, PartialEq)]
pub enum ReferenceKind {
    /// Exact limits from the structure of the colouring.
    ClosedForm,
    /// Empirical frequencies over a region of the given volume.
    Empirical { volume: u64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReferenceEntry {
    pub nu: Ratio<u64>,
    /// Up to two anchors at which the pattern occurs.
    pub occurrences: Vec<Point>,
}

/// Reference values `ν_P` for all patterns of one side `M`.
#[derive(Clone, Debug, PartialEq)]
pub struct FrequencyReference {
    pub side: usize,
    pub dim: usize,
    pub kind: ReferenceKind,
    pub entries: BTreeMap<Pattern, ReferenceEntry>,
}

impl FrequencyReference {
    /// Uses `♯_P(Λ ∩ Q) / |Q|` of the given table as `ν_P`.
    pub fn from_table(t: &FrequencyTable) -> Self {
        let entries = t
            .entries
            .iter()
            .map(|(p, s)| {
                let mut occurrences = vec![s.first.clone()];
                if s.last != s.first {
                    occurrences.push(s.last.clone());
                }
                (
                    p.clone(),
                    ReferenceEntry {
                        nu: Ratio::new(s.count, t.volume),
                        occurrences,
                    },
                )
            })
            .collect();
        FrequencyReference {
            side: t.side,
            dim: t.dim,
            kind: ReferenceKind::Empirical { volume: t.volume },
            entries,
        }
    }

    /// Exact frequencies of a periodic colouring: the share of anchors in one
    /// period cell `C_N` carrying each pattern.
    pub fn periodic(colouring: &Colouring, side: usize) -> Result<Self> {
        let (period, _) = colouring.periodic_table().ok_or_else(|| {
            Error::InvalidArgument("closed-form frequencies need a periodic colouring".into())
        })?;
        if side == 0 {
            return Err(Error::InvalidArgument("pattern side must be >= 1".into()));
        }
        let d = colouring.dim();
        let cells = period.pow(d as u32) as u64;
        let mut counts: BTreeMap<Pattern, (u64, Point)> = BTreeMap::new();
        for x in LatticeBox::cube(d, period).points() {
            counts
                .entry(pattern_at(colouring, &x, side))
                .and_modify(|e| e.0 += 1)
                .or_insert((1, x));
        }
        let mut shift = vec![0; d];
        shift[0] = period as i64;
        let entries = counts
            .into_iter()
            .map(|(p, (c, x))| {
                let second = x.add(&shift);
                (
                    p,
                    ReferenceEntry {
                        nu: Ratio::new(c, cells),
                        occurrences: vec![x, second],
                    },
                )
            })
            .collect();
        Ok(FrequencyReference {
            side,
            dim: d,
            kind: ReferenceKind::ClosedForm,
            entries,
        })
    }

    pub fn nu(&self, p: &Pattern) -> Ratio<u64> {
        self.entries.get(p).map_or(Ratio::from_integer(0), |e| e.nu)
    }

    pub fn describe(&self) -> String {
        match self.kind {
            ReferenceKind::ClosedForm => "closed-form".to_string(),
            ReferenceKind::Empirical { volume } => format!("empirical(|Q|={volume})"),
        }
    }

    /// Patterns with positive reference frequency, with the occurrence to evaluate at.
    fn positive(&self) -> Result<Vec<(&Pattern, f64, &[Point])>> {
        self.entries
            .iter()
            .filter(|(_, e)| *e.nu.numer() > 0)
            .map(|(p, e)| {
                if e.occurrences.is_empty() {
                    return Err(Error::NoOccurrence {
                        pattern: p.to_string(),
                    });
                }
                Ok((p, ratio_f64(e.nu), e.occurrences.as_slice()))
            })
            .collect()
    }
}

fn ratio_f64(r: Ratio<u64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// `Σ_{P ∈ P_M} |♯_P(Λ ∩ Q)/|Q| - ν_P|`, over patterns seen in either.
pub fn frequency_deviation(table: &FrequencyTable, reference: &FrequencyReference) -> f64 {
    let mut total = 0.0;
    for (p, s) in &table.entries {
        let f = s.count as f64 / table.volume as f64;
        total += (f - ratio_f64(reference.nu(p))).abs();
    }
    for (p, e) in &reference.entries {
        if !table.entries.contains_key(p) {
            total += ratio_f64(e.nu);
        }
    }
    total
}

/// `Σ_P ν_P F̃(P) / |C_M|`, with `F̃(P)` evaluated at a recorded occurrence
/// and cross-checked at a second one when available.
pub fn pattern_average<F: ErgodicFunction>(
    f: &F,
    reference: &FrequencyReference,
) -> Result<F::Value> {
    let side = reference.side;
    let cube_volume = side.pow(reference.dim as u32) as f64;
    let positive = reference.positive()?;
    let values: Vec<(f64, F::Value)> = positive
        .par_iter()
        .map(|(p, nu, occ)| {
            let at = |x: &Point| f.evaluate(&Region::from_box(&LatticeBox::cube_at(x, side)));
            let v = at(&occ[0])?;
            if let Some(x2) = occ.get(1) {
                let v2 = at(x2)?;
                if v.distance(&v2) > 1e-12 * v.norm().max(1.0) {
                    return Err(Error::NotInvariant {
                        pattern: p.to_string(),
                    });
                }
            }
            Ok((nu / cube_volume, v))
        })
        .collect::<Result<Vec<_>>>()?;
    let parts: Vec<(f64, &F::Value)> = values.iter().map(|(w, v)| (*w, v)).collect();
    Ok(F::Value::weighted_sum(&parts))
}

/// The three terms of the bound on `Δ(j, M)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErrorTerms {
    /// `b(C_M) / |C_M|`.
    pub boundary: f64,
    /// `(C + D) |∂^M Q_j| / |Q_j|`.
    pub van_hove: f64,
    /// `C Σ_P |♯_P(Λ ∩ Q_j)/|Q_j| - ν_P|`.
    pub frequency: f64,
}

impl ErrorTerms {
    pub fn total(&self) -> f64 {
        self.boundary + self.van_hove + self.frequency
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.boundary, self.van_hove, self.frequency]
    }
}

pub fn ergodic_error_terms<F: ErgodicFunction>(
    f: &F,
    q: &Region,
    side: usize,
    deviation: f64,
) -> ErrorTerms {
    let cube = Region::cube(q.dim(), side);
    let c = f.bound_constant();
    let d = f.boundary_constant();
    ErrorTerms {
        boundary: f.boundary_term(&cube) / cube.len() as f64,
        van_hove: (c + d) * s_boundary_len(q, side) as f64 / q.len() as f64,
        frequency: c * deviation,
    }
}

#[derive(Clone, Debug)]
pub struct ApproximationReport<V> {
    pub volume: usize,
    pub side: usize,
    /// `F(Q_j) / |Q_j|`.
    pub finite: V,
    /// `Σ_P ν_P F̃(P) / |C_M|`.
    pub pattern: V,
    /// `Δ(j, M)`.
    pub delta: f64,
    pub terms: ErrorTerms,
    pub bound: f64,
}

impl<V> ApproximationReport<V> {
    pub fn certified(&self) -> bool {
        self.delta <= self.bound
    }
}

/// Both approximants and the error bound for each region of the sequence.
pub fn ergodic_average<F: ErgodicFunction>(
    f: &F,
    colouring: &Colouring,
    sequence: &[Region],
    reference: &FrequencyReference,
) -> Result<Vec<ApproximationReport<F::Value>>> {
    let side = reference.side;
    let pattern = pattern_average(f, reference)?;
    sequence
        .par_iter()
        .map(|q| {
            if q.is_empty() {
                return Err(Error::EmptyRegion);
            }
            let finite = f.evaluate(q)?.clone();
            let finite = F::Value::weighted_sum(&[(1.0 / q.len() as f64, &finite)]);
            let table = empirical_frequencies(colouring, side, q)?;
            let terms = ergodic_error_terms(f, q, side, frequency_deviation(&table, reference));
            Ok(ApproximationReport {
                volume: q.len(),
                side,
                delta: finite.distance(&pattern),
                finite,
                pattern: pattern.clone(),
                bound: terms.total(),
                terms,
            })
        })
        .collect()
}

/// The a-priori bounds on `‖F̄ - F(Q_j)/|Q_j|‖` and `‖F̄ - Σ ν_P F̃(P)/|C_M|‖`,
/// with the measured deviations when a high-volume estimate of `F̄` is given.
#[derive(Clone, Debug, PartialEq)]
pub struct AprioriBounds {
    pub bound_finite: f64,
    pub bound_pattern: f64,
    pub measured_finite: Option<f64>,
    pub measured_pattern: Option<f64>,
}

pub fn apriori_bounds<F: ErgodicFunction>(
    f: &F,
    colouring: &Colouring,
    q: &Region,
    reference: &FrequencyReference,
    limit_estimate: Option<&F::Value>,
) -> Result<AprioriBounds> {
    let side = reference.side;
    let table = empirical_frequencies(colouring, side, q)?;
    let terms = ergodic_error_terms(f, q, side, frequency_deviation(&table, reference));
    let mut out = AprioriBounds {
        bound_finite: 2.0 * terms.boundary + terms.frequency + terms.van_hove,
        bound_pattern: terms.boundary,
        measured_finite: None,
        measured_pattern: None,
    };
    if let Some(limit) = limit_estimate {
        let finite = f.evaluate(q)?;
        let finite = F::Value::weighted_sum(&[(1.0 / q.len() as f64, &finite)]);
        out.measured_finite = Some(limit.distance(&finite));
        out.measured_pattern = Some(limit.distance(&pattern_average(f, reference)?));
    }
    Ok(out)
}

/// Normalised eigenvalue counting function of `p_Q H i_Q`.
#[derive(Clone, Debug)]
pub struct IdsResult {
    /// `n(p_Q H i_Q) / |Q|`; total mass `dim(H)`.
    pub counting: CountingFunction,
    pub volume: usize,
    pub dim_h: usize,
    pub eigenvalues: Vec<f64>,
}

impl IdsResult {
    /// Counting function divided additionally by `dim(H)` (total mass 1).
    pub fn per_fibre(&self) -> CountingFunction {
        self.counting.scaled(1.0 / self.dim_h as f64)
    }
}

pub fn finite_volume_ids(
    spec: &OperatorSpec,
    colouring: &Colouring,
    q: &Region,
) -> Result<IdsResult> {
    let a = assemble(spec, colouring, q)?;
    let eig = sym_eigen(&a.matrix, false)?;
    Ok(IdsResult {
        counting: counting_function(&eig.values).scaled(1.0 / q.len() as f64),
        volume: q.len(),
        dim_h: spec.dim_h(),
        eigenvalues: eig.values,
    })
}

/// `Σ_{ν_P > 0} ν_P n_P / |C_M|` with `n_P = n(p_{x + (C_M)_R} H i_{x + (C_M)_R})`.
pub fn pattern_ids(
    spec: &OperatorSpec,
    colouring: &Colouring,
    reference: &FrequencyReference,
) -> Result<CountingFunction> {
    let side = reference.side;
    let range = spec.overall_range();
    if LatticeBox::cube(spec.dim(), side).interior(range).is_none() {
        return Err(Error::SideTooSmall { side, range });
    }
    pattern_average(&CoreCounting { spec, colouring }, reference)
}

/// Terms of the explicit IDS bound for `(Q_j, M)`:
/// `8 dim(H) |∂^R C_M|/|C_M|`, the frequency deviation, and
/// `5 |C_R| dim(H) |∂^M Q_j|/|Q_j|`.
pub fn bound_n1(q: &Region, side: usize, range: usize, dim_h: usize, deviation: f64) -> [f64; 3] {
    let d = q.dim();
    let cube = LatticeBox::cube(d, side);
    let dim_h = dim_h as f64;
    let c_r = (range.pow(d as u32)) as f64;
    [
        8.0 * dim_h * cube.boundary_len(range) as f64 / cube.volume() as f64,
        deviation,
        5.0 * c_r * dim_h * s_boundary_len(q, side) as f64 / q.len() as f64,
    ]
}

/// `8 dim(H) |∂^R C_M| / |C_M|`.
pub fn bound_n2(dim: usize, side: usize, range: usize, dim_h: usize) -> f64 {
    let cube = LatticeBox::cube(dim, side);
    8.0 * dim_h as f64 * cube.boundary_len(range) as f64 / cube.volume() as f64
}

/// Closed-form bounds for translation-invariant operators along `Q_j = C_j`:
/// `(8 d dim(H) (4R/M + 5 R^d M / j) + d M / j,  dim(H) 16 d R / M)`.
pub fn periodic_bounds(
    dim: usize,
    range: usize,
    dim_h: usize,
    j: usize,
    side: usize,
) -> (f64, f64) {
    let (d, r, h, j, m) = (
        dim as f64,
        range as f64,
        dim_h as f64,
        j as f64,
        side as f64,
    );
    let full = 8.0 * d * h * (4.0 * r / m + 5.0 * r.powi(dim as i32) * m / j) + d * m / j;
    let pattern = h * 16.0 * d * r / m;
    (full, pattern)
}
