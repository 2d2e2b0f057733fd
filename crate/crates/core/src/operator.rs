//! Finite-range, colouring-invariant selfadjoint operators on `ℓ²(Z^d, H)`
//! and their restrictions `p_Q H i_Q` as dense real symmetric matrices.
//!
//! An operator is given by a local rule returning the `dim(H) x dim(H)` block
//! `p_y H i_x`. In the assembled matrix that block sits at rows of `y`,
//! columns of `x`.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::colouring::{Colouring, Potential, VISIBLE};
use crate::error::{Error, Result};
use crate::lattice::{sup_ball_offsets, sup_dist, LatticeBox, Point, Region};

pub type Block = DMatrix<f64>;

type KernelFn = Arc<dyn Fn(&Colouring, &[i64], &[i64]) -> Block + Send + Sync>;

/// Translation-invariant blocks indexed by the offset `δ = y - x`.
#[derive(Clone, Debug, PartialEq)]
pub struct HoppingTable {
    dim: usize,
    dim_h: usize,
    blocks: BTreeMap<Point, Block>,
}

impl HoppingTable {
    pub fn block(&self, offset: &Point) -> Option<&Block> {
        self.blocks.get(offset)
    }

    pub fn range(&self) -> usize {
        self.blocks
            .keys()
            .map(|d| d.sup_norm() as usize)
            .max()
            .unwrap_or(0)
    }

    pub fn dim_h(&self) -> usize {
        self.dim_h
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
}

#[derive(Clone)]
enum Kernel {
    Hopping(HoppingTable),
    AndersonPercolation {
        hopping: HoppingTable,
        potentials: Vec<Potential>,
    },
    VisibleLaplacian,
    Custom {
        label: String,
        f: KernelFn,
    },
}

/// Local rule describing a finite-range, colouring-invariant operator.
#[derive(Clone)]
pub struct OperatorSpec {
    dim: usize,
    dim_h: usize,
    range_fr: usize,
    range_inv: usize,
    kernel: Kernel,
}

impl fmt::Debug for OperatorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("OperatorSpec")
            .field("kernel", &self.describe())
            .field("dim_h", &self.dim_h)
            .field("range_fr", &self.range_fr)
            .field("range_inv", &self.range_inv)
            .finish()
    }
}

impl OperatorSpec {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn dim_h(&self) -> usize {
        self.dim_h
    }

    pub fn range_fr(&self) -> usize {
        self.range_fr
    }

    pub fn range_inv(&self) -> usize {
        self.range_inv
    }

    /// `R = max{R_fr, R_inv}`.
    pub fn overall_range(&self) -> usize {
        self.range_fr.max(self.range_inv)
    }

    pub fn describe(&self) -> String {
        match &self.kernel {
            Kernel::Hopping(t) => format!("periodic-hopping(R={})", t.range()),
            Kernel::AndersonPercolation { hopping, .. } => {
                format!("anderson-percolation(R={})", hopping.range())
            }
            Kernel::VisibleLaplacian => "visible-laplacian".to_string(),
            Kernel::Custom { label, .. } => format!("custom({label})"),
        }
    }

    /// Operator given by an arbitrary local rule `(Λ, x, y) ↦ p_y H i_x`.
    ///
    /// The rule is only ever evaluated for `‖y - x‖∞ ≤ range_fr`; assembly
    /// checks hermiticity of every evaluated pair.
    pub fn custom<F>(
        dim: usize,
        dim_h: usize,
        range_fr: usize,
        range_inv: usize,
        label: &str,
        f: F,
    ) -> Result<Self>
    where
        F: Fn(&Colouring, &[i64], &[i64]) -> Block + Send + Sync + 'static,
    {
        if dim == 0 || dim_h == 0 {
            return Err(Error::InvalidArgument(
                "dimension and dim(H) must be >= 1".into(),
            ));
        }
        Ok(OperatorSpec {
            dim,
            dim_h,
            range_fr,
            range_inv,
            kernel: Kernel::Custom {
                label: label.to_string(),
                f: Arc::new(f),
            },
        })
    }

    /// `p_y H i_x`; zero beyond the hopping range.
    pub fn block(&self, colouring: &Colouring, x: &[i64], y: &[i64]) -> Block {
        let n = self.dim_h;
        if sup_dist(x, y) as usize > self.range_fr {
            return Block::zeros(n, n);
        }
        match &self.kernel {
            Kernel::Hopping(t) => hopping_block(t, x, y),
            Kernel::AndersonPercolation {
                hopping,
                potentials,
            } => {
                let px = potentials[colouring.colour_at(x)];
                let py = potentials[colouring.colour_at(y)];
                if !px.is_finite() || !py.is_finite() {
                    return Block::zeros(n, n);
                }
                let mut b = hopping_block(hopping, x, y);
                if x == y {
                    let v = px.value().expect("finite");
                    for i in 0..n {
                        b[(i, i)] += v;
                    }
                }
                b
            }
            Kernel::VisibleLaplacian => {
                let adjacent = x.iter().zip(y).map(|(a, b)| (a - b).abs()).sum::<i64>() == 1;
                let v = adjacent
                    && colouring.colour_at(x) == VISIBLE
                    && colouring.colour_at(y) == VISIBLE;
                Block::from_element(1, 1, if v { 1.0 } else { 0.0 })
            }
            Kernel::Custom { f, .. } => f(colouring, x, y),
        }
    }
}

fn hopping_block(t: &HoppingTable, x: &[i64], y: &[i64]) -> Block {
    let delta = Point::new(y.iter().zip(x).map(|(a, b)| a - b).collect());
    t.blocks
        .get(&delta)
        .cloned()
        .unwrap_or_else(|| Block::zeros(t.dim_h, t.dim_h))
}

/// Validates a translation-invariant block table: offsets within `R`, square
/// blocks of a common size and `B(-δ) = B(δ)^T` exactly.
pub fn hopping_table(
    dim: usize,
    range: usize,
    blocks: Vec<(Point, Block)>,
) -> Result<HoppingTable> {
    if dim == 0 {
        return Err(Error::InvalidArgument("dimension must be >= 1".into()));
    }
    let dim_h = blocks.first().map(|(_, b)| b.nrows()).unwrap_or(1);
    if dim_h == 0 {
        return Err(Error::InvalidArgument("blocks must be non-empty".into()));
    }
    let mut map = BTreeMap::new();
    for (delta, b) in blocks {
        if delta.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: delta.dim(),
            });
        }
        if delta.sup_norm() as usize > range {
            return Err(Error::InvalidArgument(format!(
                "offset {delta} beyond range {range}"
            )));
        }
        if b.nrows() != dim_h || b.ncols() != dim_h {
            return Err(Error::InvalidArgument(format!(
                "block at {delta} is {}x{}, expected {dim_h}x{dim_h}",
                b.nrows(),
                b.ncols()
            )));
        }
        if map.insert(delta.clone(), b).is_some() {
            return Err(Error::InvalidArgument(format!("duplicate offset {delta}")));
        }
    }
    for (delta, b) in &map {
        let mirrored = map
            .get(&delta.neg())
            .cloned()
            .unwrap_or_else(|| Block::zeros(dim_h, dim_h));
        if mirrored != b.transpose() {
            return Err(Error::NonHermitian(format!(
                "block at {} is not the transpose of the block at {delta}",
                delta.neg()
            )));
        }
    }
    Ok(HoppingTable {
        dim,
        dim_h,
        blocks: map,
    })
}

/// Nearest-neighbour hopping `δ = ±e_k ↦ t` with `dim(H) = 1`.
pub fn nearest_neighbour_table(dim: usize, amplitude: f64) -> HoppingTable {
    let mut blocks = Vec::with_capacity(2 * dim);
    for k in 0..dim {
        for s in [-1, 1] {
            let mut d = vec![0; dim];
            d[k] = s;
            blocks.push((Point::new(d), Block::from_element(1, 1, amplitude)));
        }
    }
    hopping_table(dim, 1, blocks).expect("nearest-neighbour table is hermitian")
}

/// Colouring-independent operator from a translation-invariant block table.
pub fn spec_periodic_hopping(table: HoppingTable) -> OperatorSpec {
    OperatorSpec {
        dim: table.dim,
        dim_h: table.dim_h,
        range_fr: table.range(),
        range_inv: 0,
        kernel: Kernel::Hopping(table),
    }
}

/// `c · I` on `ℓ²(Z^d, R^n)`.
pub fn spec_multiplication(dim: usize, dim_h: usize, c: f64) -> OperatorSpec {
    let table = hopping_table(
        dim,
        0,
        vec![(Point::origin(dim), Block::identity(dim_h, dim_h) * c)],
    )
    .expect("diagonal table is hermitian");
    spec_periodic_hopping(table)
}

/// Hopping restricted to sites with finite potential, plus the potential;
/// extended by zero on deleted sites.
pub fn spec_anderson_percolation(
    hopping: &OperatorSpec,
    potentials: Vec<Potential>,
) -> Result<OperatorSpec> {
    let table = match &hopping.kernel {
        Kernel::Hopping(t) => t.clone(),
        _ => {
            return Err(Error::InvalidArgument(
                "percolation needs a colouring-independent hopping operator".into(),
            ))
        }
    };
    if potentials.is_empty() {
        return Err(Error::InvalidArgument("potential map is empty".into()));
    }
    if potentials
        .iter()
        .any(|p| matches!(p, Potential::Finite(v) if !v.is_finite()))
    {
        return Err(Error::InvalidArgument(
            "finite potentials must be finite numbers".into(),
        ));
    }
    Ok(OperatorSpec {
        dim: hopping.dim,
        dim_h: hopping.dim_h,
        range_fr: hopping.range_fr,
        range_inv: 1,
        kernel: Kernel::AndersonPercolation {
            hopping: table,
            potentials,
        },
    })
}

/// Nearest-neighbour hopping on the visible points.
pub fn spec_visible_laplacian(dim: usize) -> Result<OperatorSpec> {
    if dim == 0 {
        return Err(Error::InvalidArgument("dimension must be >= 1".into()));
    }
    Ok(OperatorSpec {
        dim,
        dim_h: 1,
        range_fr: 1,
        range_inv: 1,
        kernel: Kernel::VisibleLaplacian,
    })
}

/// `p_Q H i_Q` as a dense symmetric matrix over the lexicographically ordered sites.
#[derive(Clone, Debug, PartialEq)]
pub struct AssembledMatrix {
    pub sites: Vec<Point>,
    pub dim_h: usize,
    pub matrix: DMatrix<f64>,
}

impl AssembledMatrix {
    pub fn size(&self) -> usize {
        self.matrix.nrows()
    }

    /// Matrix index of fibre component `k` at site number `site`.
    pub fn index(&self, site: usize, k: usize) -> usize {
        site * self.dim_h + k
    }

    /// One row per line, space separated, 17 significant digits.
    pub fn to_dense_text(&self) -> String {
        let mut out = String::new();
        for i in 0..self.matrix.nrows() {
            let row: Vec<String> = (0..self.matrix.ncols())
                .map(|j| format!("{:.16e}", self.matrix[(i, j)]))
                .collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out
    }
}

pub fn assemble(spec: &OperatorSpec, colouring: &Colouring, q: &Region) -> Result<AssembledMatrix> {
    if q.is_empty() {
        return Err(Error::EmptyRegion);
    }
    if q.dim() != spec.dim || colouring.dim() != spec.dim {
        return Err(Error::DimensionMismatch {
            expected: spec.dim,
            found: if q.dim() != spec.dim {
                q.dim()
            } else {
                colouring.dim()
            },
        });
    }
    let n = spec.dim_h;
    let size = q.len() * n;
    let mut m = DMatrix::<f64>::zeros(size, size);
    let offsets: Vec<Point> = sup_ball_offsets(spec.dim, spec.range_fr).collect();
    let custom = matches!(spec.kernel, Kernel::Custom { .. });
    for (ix, x) in q.points().iter().enumerate() {
        for d in &offsets {
            let y = x.add(d);
            let Some(iy) = q.index_of(&y) else { continue };
            if iy < ix {
                continue;
            }
            let b = spec.block(colouring, x, &y);
            if b.nrows() != n || b.ncols() != n {
                return Err(Error::InvalidArgument(format!(
                    "kernel returned a {}x{} block, expected {n}x{n}",
                    b.nrows(),
                    b.ncols()
                )));
            }
            if iy == ix {
                if b != b.transpose() {
                    return Err(Error::NonHermitian(format!(
                        "diagonal block at {x} is not symmetric"
                    )));
                }
            } else if custom && spec.block(colouring, &y, x) != b.transpose() {
                return Err(Error::NonHermitian(format!("blocks between {x} and {y}")));
            }
            for r in 0..n {
                for c in 0..n {
                    m[(iy * n + r, ix * n + c)] = b[(r, c)];
                    m[(ix * n + c, iy * n + r)] = b[(r, c)];
                }
            }
        }
    }
    Ok(AssembledMatrix {
        sites: q.points().to_vec(),
        dim_h: n,
        matrix: m,
    })
}

/// `Λ ∩ (C_R(x) ∪ C_R(y))` translated back by `-base`, as sorted (offset, colour) pairs.
fn local_window(
    colouring: &Colouring,
    x: &Point,
    y: &Point,
    r: usize,
    base: &Point,
) -> Vec<(Point, usize)> {
    if r == 0 {
        return Vec::new();
    }
    let mut w: Vec<(Point, usize)> = [x, y]
        .iter()
        .flat_map(|c| LatticeBox::cube_at(c, r).points().collect::<Vec<_>>())
        .map(|p| {
            let colour = colouring.colour_at(&p);
            (p.sub(base), colour)
        })
        .collect();
    w.sort();
    w.dedup();
    w
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InvarianceViolation {
    pub x: Point,
    pub y: Point,
    pub t: Point,
}

#[derive(Clone, Debug, Default)]
pub struct InvarianceReport {
    /// Triples with matching windows whose blocks were compared.
    pub checked: usize,
    pub violations: Vec<InvarianceViolation>,
}

impl InvarianceReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Samples `(x, y, t)` with `t + (Λ ∩ window(x, y)) = Λ ∩ window(x+t, y+t)` and
/// checks `p_y H i_x = p_{y+t} H i_{x+t}`.
pub fn check_invariance(
    spec: &OperatorSpec,
    colouring: &Colouring,
    samples: usize,
    seed: u64,
) -> Result<InvarianceReport> {
    if samples == 0 {
        return Err(Error::InvalidArgument("sample budget must be >= 1".into()));
    }
    const SPREAD: i64 = 64;
    const ATTEMPTS: usize = 500;
    let d = spec.dim;
    let r_fr = spec.range_fr as i64;
    let mut rng = StdRng::seed_from_u64(seed);
    let mut report = InvarianceReport::default();
    for _ in 0..samples {
        let x = Point::new((0..d).map(|_| rng.gen_range(-SPREAD..=SPREAD)).collect());
        let delta: Vec<i64> = (0..d).map(|_| rng.gen_range(-r_fr..=r_fr)).collect();
        let y = x.add(&delta);
        let window = local_window(colouring, &x, &y, spec.range_inv, &x);
        for _ in 0..ATTEMPTS {
            let t = Point::new((0..d).map(|_| rng.gen_range(-SPREAD..=SPREAD)).collect());
            let xt = x.add(&t);
            let yt = y.add(&t);
            if local_window(colouring, &xt, &yt, spec.range_inv, &xt) != window {
                continue;
            }
            report.checked += 1;
            if spec.block(colouring, &x, &y) != spec.block(colouring, &xt, &yt) {
                report.violations.push(InvarianceViolation {
                    x: x.clone(),
                    y: y.clone(),
                    t,
                });
            }
            break;
        }
    }
    Ok(report)
}
