//! Symmetric eigensolves and eigenvalue counting functions.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::colouring::Colouring;
use crate::error::{Error, Result};
use crate::lattice::{interior_core, Point, Region};
use crate::operator::{assemble, OperatorSpec};

/// Right-continuous nondecreasing step function, zero left of the first
/// breakpoint.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct CountingFunction {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

impl CountingFunction {
    pub fn zero() -> Self {
        Self::default()
    }

    /// Builds the function `λ ↦ Σ { inc : loc ≤ λ }`. Increments at equal
    /// locations are merged; zero increments are dropped.
    pub fn from_steps(mut steps: Vec<(f64, f64)>) -> Self {
        steps.retain(|&(_, inc)| inc != 0.0);
        steps.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut breakpoints: Vec<f64> = Vec::with_capacity(steps.len());
        let mut values: Vec<f64> = Vec::with_capacity(steps.len());
        let mut acc = 0.0;
        for (loc, inc) in steps {
            acc += inc;
            if breakpoints.last() == Some(&loc) {
                *values.last_mut().expect("paired") = acc;
            } else {
                breakpoints.push(loc);
                values.push(acc);
            }
        }
        CountingFunction {
            breakpoints,
            values,
        }
    }

    /// Nonnegative combination `Σ w_k f_k`.
    pub fn weighted_sum<'a, I>(parts: I) -> Self
    where
        I: IntoIterator<Item = (f64, &'a CountingFunction)>,
    {
        let mut steps = Vec::new();
        for (w, f) in parts {
            steps.extend(f.increments().map(|(b, inc)| (b, w * inc)));
        }
        Self::from_steps(steps)
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    /// Cumulative value at and after each breakpoint.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn increments(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.breakpoints.iter().enumerate().map(move |(i, &b)| {
            let before = if i == 0 { 0.0 } else { self.values[i - 1] };
            (b, self.values[i] - before)
        })
    }

    pub fn eval(&self, lambda: f64) -> f64 {
        let k = self.breakpoints.partition_point(|&b| b <= lambda);
        if k == 0 {
            0.0
        } else {
            self.values[k - 1]
        }
    }

    /// `lim_{μ ↑ λ} f(μ)`.
    pub fn left_limit(&self, lambda: f64) -> f64 {
        let k = self.breakpoints.partition_point(|&b| b < lambda);
        if k == 0 {
            0.0
        } else {
            self.values[k - 1]
        }
    }

    pub fn total(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    pub fn scaled(&self, c: f64) -> Self {
        CountingFunction {
            breakpoints: self.breakpoints.clone(),
            values: self.values.iter().map(|v| v * c).collect(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.breakpoints.is_empty()
    }

    /// Strictly increasing breakpoints and nondecreasing values.
    pub fn is_valid(&self) -> bool {
        self.breakpoints.len() == self.values.len()
            && self.breakpoints.windows(2).all(|w| w[0] < w[1])
            && self.values.windows(2).all(|w| w[0] <= w[1])
            && self.values.first().is_none_or(|&v| v >= 0.0)
    }

    /// `breakpoint,cumulative_value` lines with 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("breakpoint,cumulative_value\n");
        for (b, v) in self.breakpoints.iter().zip(&self.values) {
            out.push_str(&format!("{b:.16e},{v:.16e}\n"));
        }
        out
    }
}

/// `n(A)` from eigenvalues (with multiplicity, any order).
pub fn counting_function(eigenvalues: &[f64]) -> CountingFunction {
    CountingFunction::from_steps(eigenvalues.iter().map(|&e| (e, 1.0)).collect())
}

/// Exact `sup_λ |f(λ) - g(λ)|`, attained at a breakpoint or a left limit.
pub fn sup_distance(f: &CountingFunction, g: &CountingFunction) -> f64 {
    let mut best: f64 = 0.0;
    for &b in f.breakpoints.iter().chain(&g.breakpoints) {
        best = best
            .max((f.eval(b) - g.eval(b)).abs())
            .max((f.left_limit(b) - g.left_limit(b)).abs());
    }
    best
}

/// Exact `sup_λ |f(λ) - g(λ)|` for a continuous nondecreasing `g` with
/// `g = lo` below `support.0` and `g = hi` above `support.1`.
pub fn sup_distance_to_continuous<G: Fn(f64) -> f64>(
    f: &CountingFunction,
    g: G,
    support: (f64, f64),
) -> f64 {
    let mut knots: Vec<f64> = f.breakpoints.clone();
    knots.push(support.0);
    knots.push(support.1);
    knots.sort_by(f64::total_cmp);
    knots.dedup();
    let mut best: f64 = 0.0;
    for &k in &knots {
        let gk = g(k);
        best = best
            .max((f.eval(k) - gk).abs())
            .max((f.left_limit(k) - gk).abs());
    }
    best
}

#[derive(Clone, Debug)]
pub struct EigenResult {
    /// Ascending, with multiplicity.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors as columns, in the order of `values`.
    pub vectors: Option<DMatrix<f64>>,
    /// `max_i ‖A v_i - λ_i v_i‖ / max(1, ‖A‖)` when vectors were computed.
    pub residual: Option<f64>,
}

/// Full spectrum of a real symmetric matrix.
pub fn sym_eigen(a: &DMatrix<f64>, want_vectors: bool) -> Result<EigenResult> {
    if a.nrows() != a.ncols() {
        return Err(Error::InvalidArgument("matrix is not square".into()));
    }
    if a.nrows() == 0 {
        return Ok(EigenResult {
            values: Vec::new(),
            vectors: want_vectors.then(|| DMatrix::zeros(0, 0)),
            residual: want_vectors.then_some(0.0),
        });
    }
    if !want_vectors {
        let mut values = Vec::with_capacity(a.nrows());
        for comp in components(a) {
            if comp.len() == 1 {
                values.push(a[(comp[0], comp[0])]);
                continue;
            }
            let sub = DMatrix::from_fn(comp.len(), comp.len(), |r, c| a[(comp[r], comp[c])]);
            values.extend(sub.symmetric_eigenvalues().iter());
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonConvergence("non-finite eigenvalue".into()));
        }
        values.sort_by(f64::total_cmp);
        return Ok(EigenResult {
            values,
            vectors: None,
            residual: None,
        });
    }
    let eig = SymmetricEigen::try_new(a.clone(), f64::EPSILON, 1_000_000)
        .ok_or_else(|| Error::NonConvergence("symmetric QR iteration did not converge".into()))?;
    let mut order: Vec<usize> = (0..a.nrows()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonConvergence("non-finite eigenvalue".into()));
    }
    let vectors = DMatrix::from_fn(a.nrows(), a.ncols(), |r, c| eig.eigenvectors[(r, order[c])]);
    let scale = values.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let av = a * &vectors;
    let residual = (0..a.ncols())
        .map(|c| (av.column(c) - vectors.column(c) * values[c]).norm())
        .fold(0.0f64, f64::max)
        / scale;
    Ok(EigenResult {
        values,
        vectors: Some(vectors),
        residual: Some(residual),
    })
}

/// Connected components of the nonzero pattern of a symmetric matrix, each
/// sorted, in order of their smallest index.
fn components(a: &DMatrix<f64>) -> Vec<Vec<usize>> {
    let n = a.nrows();
    let mut parent: Vec<usize> = (0..n).collect();
    fn root(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for c in 0..n {
        for r in c + 1..n {
            if a[(r, c)] != 0.0 {
                let (x, y) = (root(&mut parent, r), root(&mut parent, c));
                if x != y {
                    parent[x.max(y)] = x.min(y);
                }
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..n {
        let r = root(&mut parent, i);
        groups.entry(r).or_default().push(i);
    }
    groups.into_values().collect()
}

/// `n(p A i)` for the principal submatrix on the given coordinate axes.
pub fn restriction_counting(a: &DMatrix<f64>, axes: &[usize]) -> Result<CountingFunction> {
    let n = a.nrows();
    let mut seen = vec![false; n];
    for &i in axes {
        if i >= n || seen[i] {
            return Err(Error::InvalidArgument(format!("bad or repeated axis {i}")));
        }
        seen[i] = true;
    }
    if axes.is_empty() {
        return Ok(CountingFunction::zero());
    }
    // Axis order only permutes p A i; a canonical order keeps results reproducible.
    let axes: Vec<usize> = (0..n).filter(|&i| seen[i]).collect();
    let sub = DMatrix::from_fn(axes.len(), axes.len(), |r, c| a[(axes[r], axes[c])]);
    Ok(counting_function(&sym_eigen(&sub, false)?.values))
}

#[derive(Clone, Debug, PartialEq)]
pub struct Jump {
    pub location: f64,
    pub size: f64,
}

/// Jumps of size at least `threshold`. Breakpoints closer than
/// `1e-9 · max(1, max |b|)` are treated as one jump.
pub fn jumps(f: &CountingFunction, threshold: f64) -> Vec<Jump> {
    let scale = f.breakpoints.iter().fold(1.0f64, |m, b| m.max(b.abs()));
    let tol = 1e-9 * scale;
    let mut out = Vec::new();
    let incs: Vec<(f64, f64)> = f.increments().collect();
    let mut i = 0;
    while i < incs.len() {
        let mut j = i;
        while j + 1 < incs.len() && incs[j + 1].0 - incs[j].0 <= tol {
            j += 1;
        }
        let size: f64 = incs[i..=j].iter().map(|s| s.1).sum();
        let location = incs[i + 1..=j]
            .iter()
            .fold(incs[i], |best, s| if s.1 > best.1 { *s } else { best })
            .0;
        if size >= threshold {
            out.push(Jump { location, size });
        }
        i = j + 1;
    }
    out
}

/// A normalised vector supported in the interior core with small residual.
#[derive(Clone, Debug)]
pub struct CompactEigenfunction {
    /// Sites carrying a nonzero component.
    pub support: Vec<Point>,
    /// Components over the sites of `Q` (with fibres), lexicographic order.
    pub vector: DVector<f64>,
    /// `‖(p_Q H i_Q - λ) u‖`, equal to `‖(H - λ) u‖` on the whole lattice.
    pub residual: f64,
}

fn residual(a: &DMatrix<f64>, lambda: f64, u: &DVector<f64>) -> f64 {
    (a * u - u * lambda).norm()
}

/// Looks for `u` supported in `Q_R` with `‖(H - λ) u‖ < ε`.
///
/// Single-site vectors are tried first; otherwise eigenvectors of `p_Q H i_Q`
/// with eigenvalue within `ε` of `λ` are truncated to the core and
/// renormalised. Returns the candidate with the smallest residual.
pub fn find_compact_eigenfunction(
    spec: &OperatorSpec,
    colouring: &Colouring,
    lambda: f64,
    q: &Region,
    eps: f64,
) -> Result<Option<CompactEigenfunction>> {
    if eps <= 0.0 || !eps.is_finite() {
        return Err(Error::InvalidArgument("epsilon must be positive".into()));
    }
    let depth = spec.overall_range();
    let core = interior_core(q, depth);
    if core.is_empty() {
        return Err(Error::RegionTooSmall { depth });
    }
    let a = assemble(spec, colouring, q)?;
    let n = a.dim_h;
    let core_axes: Vec<usize> = core
        .points()
        .iter()
        .flat_map(|p| {
            let s = q.index_of(p).expect("core lies in Q");
            (0..n).map(move |k| s * n + k)
        })
        .collect();

    let mut best: Option<(f64, DVector<f64>)> = None;
    let consider = |u: DVector<f64>, best: &mut Option<(f64, DVector<f64>)>| {
        let r = residual(&a.matrix, lambda, &u);
        if r < eps && best.as_ref().is_none_or(|(b, _)| r < *b) {
            *best = Some((r, u));
        }
    };

    for &i in &core_axes {
        let mut u = DVector::zeros(a.size());
        u[i] = 1.0;
        consider(u, &mut best);
        if matches!(best, Some((r, _)) if r == 0.0) {
            break;
        }
    }

    if !matches!(best, Some((r, _)) if r == 0.0) {
        let eig = sym_eigen(&a.matrix, true)?;
        let vectors = eig.vectors.expect("requested");
        for (c, &mu) in eig.values.iter().enumerate() {
            if (mu - lambda).abs() > eps {
                continue;
            }
            let mut u = DVector::zeros(a.size());
            for &i in &core_axes {
                u[i] = vectors[(i, c)];
            }
            let norm = u.norm();
            if norm < 1e-8 {
                continue;
            }
            u /= norm;
            // Rounding noise below 1e-12 is dropped so exact eigenfunctions
            // with small support are recovered exactly.
            let mut cleaned = u.map(|v| if v.abs() < 1e-12 { 0.0 } else { v });
            let cn = cleaned.norm();
            if cn > 0.0 {
                cleaned /= cn;
                consider(cleaned, &mut best);
            }
            consider(u, &mut best);
        }
    }

    Ok(best.map(|(residual, vector)| {
        let support = (0..q.len())
            .filter(|&s| (0..n).any(|k| vector[s * n + k] != 0.0))
            .map(|s| q.points()[s].clone())
            .collect();
        CompactEigenfunction {
            support,
            vector,
            residual,
        }
    }))
}
