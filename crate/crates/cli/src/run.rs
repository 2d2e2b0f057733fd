//! Subcommands. Each computes its results in parallel, then writes every
//! output file from the calling thread.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use ids_core::colouring::empirical_frequencies;
use ids_core::ids::{
    bound_n1, bound_n2, ergodic_error_terms, finite_volume_ids, frequency_deviation, pattern_ids,
    periodic_bounds, CoreCounting, ErgodicFunction, IdsResult,
};
use ids_core::lattice::Region;
use ids_core::spectral::{
    find_compact_eigenfunction, jumps, sup_distance, sup_distance_to_continuous, CountingFunction,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{ExperimentConfig, ModelKind};
use crate::model::Model;
use crate::CliError;

pub const ERGODIC_BOUND: &str = "b(C_M)/|C_M| + (C+D)|∂^M Q_j|/|Q_j| + C·Σ_P|♯_P/|Q_j| - ν_P|";
pub const IDS_BOUND: &str =
    "8·dimH·|∂^R C_M|/|C_M| + Σ_P|♯_P/|Q_j| - ν_P| + 5·|C_R|·dimH·|∂^M Q_j|/|Q_j|";
pub const PATTERN_BOUND: &str = "8·dimH·|∂^R C_M|/|C_M|";
pub const PERIODIC_FULL: &str = "8·d·dimH·(4R/M + 5R^d·M/j) + d·M/j";
pub const PERIODIC_PATTERN: &str = "dimH·16·d·R/M";

/// CSV decimal with 17 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn status(ok: bool) -> &'static str {
    if ok {
        "pass"
    } else {
        "fail"
    }
}

fn write(out: &Path, name: &str, content: &str) -> Result<PathBuf, CliError> {
    fs::create_dir_all(out)?;
    let path = out.join(name);
    fs::write(&path, content)?;
    Ok(path)
}

fn write_json<T: Serialize>(out: &Path, name: &str, value: &T) -> Result<PathBuf, CliError> {
    let mut text =
        serde_json::to_string_pretty(value).map_err(|e| CliError::Config(e.to_string()))?;
    text.push('\n');
    write(out, name, &text)
}

fn in_pool<T: Send>(c: &ExperimentConfig, f: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(c.threads)
        .build()
        .map_err(|e| CliError::Config(e.to_string()))?;
    Ok(pool.install(f))
}

fn sorted(v: &[usize]) -> Vec<usize> {
    let mut v = v.to_vec();
    v.sort_unstable();
    v.dedup();
    v
}

fn cells(c: &ExperimentConfig) -> Vec<(usize, usize)> {
    let ms = sorted(&c.grid.m);
    sorted(&c.grid.j)
        .into_iter()
        .flat_map(|j| ms.iter().map(move |&m| (j, m)))
        .collect()
}

// ---------------------------------------------------------------- freq

#[derive(Serialize)]
struct PatternRow {
    pattern_hex: String,
    count: u64,
    frequency: f64,
    frequency_exact: String,
}

#[derive(Serialize)]
struct FreqDocument {
    model: String,
    colouring: String,
    seed: Option<u64>,
    d: usize,
    #[serde(rename = "M")]
    m: usize,
    #[serde(rename = "Q")]
    q: String,
    volume: u64,
    anchors: u64,
    total_count: u64,
    patterns: Vec<PatternRow>,
}

/// Frequency tables on `C_j` for every grid cell.
pub fn cmd_freq(c: &ExperimentConfig) -> Result<Vec<PathBuf>, CliError> {
    let model = Model::build(c)?;
    let letters = model.colouring.alphabet().len();
    let tables = in_pool(c, || {
        cells(c)
            .into_par_iter()
            .map(|(j, m)| {
                Ok((
                    j,
                    m,
                    empirical_frequencies(&model.colouring, m, &Region::cube(c.d, j))?,
                ))
            })
            .collect::<Result<Vec<_>, CliError>>()
    })??;
    let mut written = Vec::new();
    for (j, m, t) in tables {
        let rows: Vec<PatternRow> = t
            .entries
            .iter()
            .map(|(p, s)| {
                let f = t.frequency(p);
                PatternRow {
                    pattern_hex: p.to_hex(letters),
                    count: s.count,
                    frequency: s.count as f64 / t.volume as f64,
                    frequency_exact: format!("{}/{}", f.numer(), f.denom()),
                }
            })
            .collect();
        let mut csv = String::from("pattern_hex,count,volume,frequency\n");
        for r in &rows {
            csv.push_str(&format!(
                "{},{},{},{}\n",
                r.pattern_hex,
                r.count,
                t.volume,
                num(r.frequency)
            ));
        }
        let stem = format!("freq_j{j}_M{m}");
        written.push(write(&c.out, &format!("{stem}.csv"), &csv)?);
        let doc = FreqDocument {
            model: c.model.name().to_string(),
            colouring: model.colouring.describe(),
            seed: model.colouring.seed(),
            d: c.d,
            m,
            q: Region::cube(c.d, j)
                .as_box()
                .map(|b| b.to_string())
                .unwrap_or_default(),
            volume: t.volume,
            anchors: t.anchors,
            total_count: t.total_count(),
            patterns: rows,
        };
        written.push(write_json(&c.out, &format!("{stem}.json"), &doc)?);
    }
    Ok(written)
}

// ---------------------------------------------------------------- grid

#[derive(Clone, Debug, Serialize)]
pub struct Certificate {
    pub formula: &'static str,
    pub terms: Vec<f64>,
    pub bound: f64,
    pub measured: f64,
    pub status: &'static str,
}

impl Certificate {
    fn new(formula: &'static str, terms: Vec<f64>, measured: f64) -> Self {
        let bound = terms.iter().sum();
        Certificate {
            formula,
            terms,
            bound,
            measured,
            status: status(measured <= bound),
        }
    }

    pub fn passed(&self) -> bool {
        self.status == "pass"
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Certificates {
    /// `Δ(j, M)` for `F(Q) = n(p_{Q_R} H i_{Q_R})`.
    pub ergodic: Certificate,
    /// Sup-distance between the finite-volume IDS and the pattern approximant.
    pub ids: Certificate,
}

#[derive(Clone, Debug, Serialize)]
pub struct GridCell {
    pub j: usize,
    #[serde(rename = "M")]
    pub m: usize,
    pub volume: usize,
    pub frequency_deviation: f64,
    pub delta: f64,
    pub bound_terms: [f64; 3],
    pub sup_distance: f64,
    pub certificates: Certificates,
}

impl GridCell {
    pub fn passed(&self) -> bool {
        self.certificates.ergodic.passed() && self.certificates.ids.passed()
    }
}

/// Everything computed over one `(j, M)` grid.
pub struct GridRun {
    pub cells: Vec<GridCell>,
    /// `n(p_{C_j} H i_{C_j}) / |C_j|` per `j`.
    pub finite: BTreeMap<usize, IdsResult>,
    /// `Σ ν_P n_P / |C_M|` per `M`.
    pub patterns: BTreeMap<usize, CountingFunction>,
    pub reference: String,
}

pub fn compute_grid(c: &ExperimentConfig, model: &Model) -> Result<GridRun, CliError> {
    let spec = &model.spec;
    let range = spec.overall_range();
    c.validate_pattern_sides(range)?;
    let f = CoreCounting {
        spec,
        colouring: &model.colouring,
    };
    in_pool(c, || -> Result<GridRun, CliError> {
        let references = sorted(&c.grid.m)
            .into_par_iter()
            .map(|m| {
                let r = model.reference(c, m)?;
                let p = pattern_ids(spec, &model.colouring, &r)?;
                Ok((m, (r, p)))
            })
            .collect::<Result<BTreeMap<_, _>, CliError>>()?;
        let per_j = sorted(&c.grid.j)
            .into_par_iter()
            .map(|j| {
                let q = Region::cube(c.d, j);
                let finite = finite_volume_ids(spec, &model.colouring, &q)?;
                let core = f.evaluate(&q)?.scaled(1.0 / q.len() as f64);
                Ok((j, (finite, core)))
            })
            .collect::<Result<BTreeMap<_, _>, CliError>>()?;
        let cells = cells(c)
            .into_par_iter()
            .map(|(j, m)| {
                let q = Region::cube(c.d, j);
                let (reference, pattern) = &references[&m];
                let (finite, core) = &per_j[&j];
                let table = empirical_frequencies(&model.colouring, m, &q)?;
                let dev = frequency_deviation(&table, reference);
                let e = ergodic_error_terms(&f, &q, m, dev);
                let n1 = bound_n1(&q, m, range, spec.dim_h(), dev);
                let delta = sup_distance(core, pattern);
                let sup = sup_distance(&finite.counting, pattern);
                Ok(GridCell {
                    j,
                    m,
                    volume: q.len(),
                    frequency_deviation: dev,
                    delta,
                    bound_terms: n1,
                    sup_distance: sup,
                    certificates: Certificates {
                        ergodic: Certificate::new(ERGODIC_BOUND, e.as_array().to_vec(), delta),
                        ids: Certificate::new(IDS_BOUND, n1.to_vec(), sup),
                    },
                })
            })
            .collect::<Result<Vec<_>, CliError>>()?;
        let reference = references
            .values()
            .next()
            .map(|(r, _)| r.describe())
            .unwrap_or_default();
        Ok(GridRun {
            cells,
            finite: per_j.into_iter().map(|(j, (f, _))| (j, f)).collect(),
            patterns: references.into_iter().map(|(m, (_, p))| (m, p)).collect(),
            reference,
        })
    })?
}

fn violations(cells: &[GridCell]) -> Result<(), CliError> {
    let failed: Vec<String> = cells
        .iter()
        .filter(|c| !c.passed())
        .map(|c| format!("(j={}, M={})", c.j, c.m))
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Certificate(format!(
            "bound exceeded at {}",
            failed.join(", ")
        )))
    }
}

// ---------------------------------------------------------------- ids

#[derive(Serialize)]
pub struct IdsReport {
    pub model: String,
    pub operator: String,
    pub seed: Option<u64>,
    pub d: usize,
    #[serde(rename = "R")]
    pub range: usize,
    #[serde(rename = "dimH")]
    pub dim_h: usize,
    pub nu_reference: String,
    pub normalization: &'static str,
    pub grid: Vec<GridCell>,
    pub ids_curve_csv_path: String,
    pub finite_curve_csv_paths: BTreeMap<usize, String>,
    pub pattern_curve_csv_paths: BTreeMap<usize, String>,
}

impl IdsReport {
    pub fn passed(&self) -> bool {
        self.grid.iter().all(GridCell::passed)
    }
}

/// IDS curves, the JSON report, and the certificates. Files are written
/// even when a certificate fails.
pub fn cmd_ids(c: &ExperimentConfig) -> Result<IdsReport, CliError> {
    let model = Model::build(c)?;
    let run = compute_grid(c, &model)?;
    let mut finite_paths = BTreeMap::new();
    for (j, r) in &run.finite {
        let name = format!("ids_finite_j{j}.csv");
        write(&c.out, &name, &r.counting.to_csv())?;
        finite_paths.insert(*j, name);
    }
    let mut pattern_paths = BTreeMap::new();
    for (m, p) in &run.patterns {
        let name = format!("ids_pattern_M{m}.csv");
        write(&c.out, &name, &p.to_csv())?;
        pattern_paths.insert(*m, name);
    }
    let report = IdsReport {
        model: c.model.name().to_string(),
        operator: model.spec.describe(),
        seed: model.colouring.seed(),
        d: c.d,
        range: model.spec.overall_range(),
        dim_h: model.spec.dim_h(),
        nu_reference: run.reference.clone(),
        normalization: "n(p_Q H i_Q)/|Q|, total mass dimH",
        ids_curve_csv_path: finite_paths[&c.max_j()].clone(),
        grid: run.cells,
        finite_curve_csv_paths: finite_paths,
        pattern_curve_csv_paths: pattern_paths,
    };
    write_json(&c.out, "ids_report.json", &report)?;
    Ok(report)
}

// ---------------------------------------------------------------- bounds

/// Bound terms against measured deviations, one row per grid cell.
pub fn cmd_bounds(c: &ExperimentConfig) -> Result<Vec<GridCell>, CliError> {
    let model = Model::build(c)?;
    let run = compute_grid(c, &model)?;
    let range = model.spec.overall_range();
    let dim_h = model.spec.dim_h();
    let mut csv = String::from(
        "j,M,volume,frequency_deviation,\
         erg_boundary,erg_van_hove,erg_frequency,erg_bound,delta,erg_status,\
         ids_boundary,ids_frequency,ids_van_hove,ids_bound,sup_distance,ids_status,\
         pattern_bound,periodic_full,periodic_pattern\n",
    );
    for cell in &run.cells {
        let e = &cell.certificates.ergodic;
        let n = &cell.certificates.ids;
        let (full, pattern) = if model.translation_invariant() {
            let (a, b) = periodic_bounds(c.d, range, dim_h, cell.j, cell.m);
            (num(a), num(b))
        } else {
            (String::new(), String::new())
        };
        let fields = [
            cell.j.to_string(),
            cell.m.to_string(),
            cell.volume.to_string(),
            num(cell.frequency_deviation),
            num(e.terms[0]),
            num(e.terms[1]),
            num(e.terms[2]),
            num(e.bound),
            num(e.measured),
            e.status.to_string(),
            num(n.terms[0]),
            num(n.terms[1]),
            num(n.terms[2]),
            num(n.bound),
            num(n.measured),
            n.status.to_string(),
            num(bound_n2(c.d, cell.m, range, dim_h)),
            full,
            pattern,
        ];
        csv.push_str(&fields.join(","));
        csv.push('\n');
    }
    write(&c.out, "bounds.csv", &csv)?;
    violations(&run.cells)?;
    Ok(run.cells)
}

// ---------------------------------------------------------------- converge

#[derive(Clone, Debug, Serialize)]
pub struct ConvergeRow {
    pub j: usize,
    #[serde(rename = "M")]
    pub m: usize,
    pub delta: f64,
    pub erg_bound: f64,
    pub sup_distance: f64,
    pub ids_bound: f64,
    /// `‖N̂_H - Σ ν_P n_P/|C_M|‖∞` against the largest-j curve.
    pub pattern_to_reference: f64,
    pub pattern_bound: f64,
    /// Known distance of `N̂_H` from the exact IDS, when a closed form exists.
    pub reference_slack: Option<f64>,
    pub pattern_status: &'static str,
    /// `‖n(p_{C_j} H i_{C_j})/|C_j| - N̂_H‖∞`.
    pub finite_to_reference: f64,
    pub periodic_full: Option<f64>,
    pub periodic_pattern: Option<f64>,
}

/// `N(E) = 1 - arccos(E / 2a) / π`, the IDS of path hopping with amplitude `a`.
pub fn path_ids(a: f64, e: f64) -> f64 {
    let x = (e / (2.0 * a.abs())).clamp(-1.0, 1.0);
    1.0 - x.acos() / std::f64::consts::PI
}

/// `Δ(j, M)` sweeps plus the single-cube approximant against the
/// largest-volume curve.
pub fn cmd_converge(c: &ExperimentConfig) -> Result<Vec<ConvergeRow>, CliError> {
    let model = Model::build(c)?;
    let run = compute_grid(c, &model)?;
    let range = model.spec.overall_range();
    let dim_h = model.spec.dim_h();
    let reference = &run.finite[&c.max_j()].counting;
    let slack = model.path_amplitude.map(|a| {
        let w = 2.0 * a.abs();
        sup_distance_to_continuous(reference, |e| path_ids(a, e), (-w, w))
    });
    let rows: Vec<ConvergeRow> = run
        .cells
        .iter()
        .map(|cell| {
            let pattern = &run.patterns[&cell.m];
            let to_ref = sup_distance(reference, pattern);
            let pb = bound_n2(c.d, cell.m, range, dim_h);
            let pattern_status = match slack {
                Some(s) => status(to_ref <= pb + s),
                None if to_ref <= pb => "pass",
                None => "inconclusive",
            };
            let (full, pat) = if model.translation_invariant() {
                let (a, b) = periodic_bounds(c.d, range, dim_h, cell.j, cell.m);
                (Some(a), Some(b))
            } else {
                (None, None)
            };
            ConvergeRow {
                j: cell.j,
                m: cell.m,
                delta: cell.delta,
                erg_bound: cell.certificates.ergodic.bound,
                sup_distance: cell.sup_distance,
                ids_bound: cell.certificates.ids.bound,
                pattern_to_reference: to_ref,
                pattern_bound: pb,
                reference_slack: slack,
                pattern_status,
                finite_to_reference: sup_distance(&run.finite[&cell.j].counting, reference),
                periodic_full: full,
                periodic_pattern: pat,
            }
        })
        .collect();
    let opt = |x: Option<f64>| x.map(num).unwrap_or_default();
    let mut csv = String::from(
        "j,M,delta,erg_bound,sup_distance,ids_bound,pattern_to_reference,pattern_bound,reference_slack,pattern_status,\
         finite_to_reference,periodic_full,periodic_pattern\n",
    );
    for r in &rows {
        let fields = [
            r.j.to_string(),
            r.m.to_string(),
            num(r.delta),
            num(r.erg_bound),
            num(r.sup_distance),
            num(r.ids_bound),
            num(r.pattern_to_reference),
            num(r.pattern_bound),
            opt(r.reference_slack),
            r.pattern_status.to_string(),
            num(r.finite_to_reference),
            opt(r.periodic_full),
            opt(r.periodic_pattern),
        ];
        csv.push_str(&fields.join(","));
        csv.push('\n');
    }
    write(&c.out, "converge.csv", &csv)?;
    violations(&run.cells)?;
    Ok(rows)
}

// ---------------------------------------------------------------- jumps

#[derive(Clone, Debug, Serialize)]
pub struct JumpRow {
    pub location: f64,
    pub size: f64,
    /// `found`, `not-found`, or `skipped` (probe cube has no interior core).
    pub probe: &'static str,
    pub residual: Option<f64>,
    pub support_size: Option<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct JumpReport {
    pub model: String,
    pub operator: String,
    pub seed: Option<u64>,
    pub d: usize,
    pub j: usize,
    pub threshold: f64,
    pub probe_side: usize,
    pub probe_eps: f64,
    /// Share of closed sites in `C_j` (percolation only).
    pub closed_fraction: Option<f64>,
    pub jumps: Vec<JumpRow>,
}

/// Jumps of the largest-volume IDS and an eigenfunction probe at each.
pub fn cmd_jumps(c: &ExperimentConfig) -> Result<JumpReport, CliError> {
    let model = Model::build(c)?;
    let j = c.max_j();
    let q = Region::cube(c.d, j);
    let ids = finite_volume_ids(&model.spec, &model.colouring, &q)?;
    let found = jumps(&ids.counting, c.threshold());
    let probe_q = Region::cube(c.d, c.probe_side());
    let rows = in_pool(c, || {
        found
            .par_iter()
            .map(|jump| {
                let probe = find_compact_eigenfunction(
                    &model.spec,
                    &model.colouring,
                    jump.location,
                    &probe_q,
                    c.probe_eps,
                );
                Ok(match probe {
                    Ok(Some(u)) => JumpRow {
                        location: jump.location,
                        size: jump.size,
                        probe: "found",
                        residual: Some(u.residual),
                        support_size: Some(u.support.len()),
                    },
                    Ok(None) => JumpRow {
                        location: jump.location,
                        size: jump.size,
                        probe: "not-found",
                        residual: None,
                        support_size: None,
                    },
                    Err(ids_core::Error::RegionTooSmall { .. }) => JumpRow {
                        location: jump.location,
                        size: jump.size,
                        probe: "skipped",
                        residual: None,
                        support_size: None,
                    },
                    Err(e) => return Err(CliError::from(e)),
                })
            })
            .collect::<Result<Vec<_>, CliError>>()
    })??;
    let closed_fraction = (c.model == ModelKind::Percolation).then(|| {
        let closed = q
            .points()
            .iter()
            .filter(|x| model.colouring.colour_at(x) == 1)
            .count();
        closed as f64 / q.len() as f64
    });
    let report = JumpReport {
        model: c.model.name().to_string(),
        operator: model.spec.describe(),
        seed: model.colouring.seed(),
        d: c.d,
        j,
        threshold: c.threshold(),
        probe_side: c.probe_side(),
        probe_eps: c.probe_eps,
        closed_fraction,
        jumps: rows,
    };
    let opt = |x: Option<f64>| x.map(num).unwrap_or_default();
    let mut csv = String::from("location,size,probe,residual,support_size\n");
    for r in &report.jumps {
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            num(r.location),
            num(r.size),
            r.probe,
            opt(r.residual),
            r.support_size.map(|s| s.to_string()).unwrap_or_default()
        ));
    }
    write(&c.out, "jumps.csv", &csv)?;
    write_json(&c.out, "jumps.json", &report)?;
    Ok(report)
}
