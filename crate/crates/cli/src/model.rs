//! Colourings and operators built from a configuration.

use ids_core::colouring::{
    empirical_frequencies, make_percolation, make_periodic, make_visible, Alphabet, Colouring,
    Potential, Token,
};
use ids_core::ids::FrequencyReference;
use ids_core::lattice::{Point, Region};
use ids_core::operator::{
    hopping_table, nearest_neighbour_table, spec_anderson_percolation, spec_periodic_hopping,
    spec_visible_laplacian, Block, HoppingTable, OperatorSpec,
};

use crate::config::{ExperimentConfig, ModelKind, NuRef};
use crate::CliError;

pub struct Model {
    pub colouring: Colouring,
    pub spec: OperatorSpec,
    /// Nearest-neighbour amplitude when the operator is plain 1D path hopping.
    pub path_amplitude: Option<f64>,
}

impl Model {
    pub fn build(c: &ExperimentConfig) -> Result<Self, CliError> {
        c.validate()?;
        let d = c.d;
        let table = hopping(c)?;
        let hop = spec_periodic_hopping(table);
        let plain_hopping = c.operator.blocks.is_none();
        let (colouring, spec, path) = match c.model {
            ModelKind::Periodic => {
                let cells = c.periodic_table();
                let colours = cells.iter().max().map_or(1, |m| m + 1);
                let tokens: Vec<Token> = (0..colours)
                    .map(|k| match &c.periodic.potentials {
                        Some(v) => Token::with_potential(format!("c{k}"), Potential::Finite(v[k])),
                        None => Token::plain(format!("c{k}")),
                    })
                    .collect();
                let alphabet = Alphabet::new(tokens)?;
                let colouring = make_periodic(d, c.periodic.period, alphabet.clone(), cells)?;
                let (spec, path) = match &c.periodic.potentials {
                    Some(_) => (
                        spec_anderson_percolation(&hop, alphabet.potentials())?,
                        false,
                    ),
                    None => (hop, plain_hopping && d == 1),
                };
                (colouring, spec, path)
            }
            ModelKind::Percolation => {
                let p = &c.percolation;
                let alphabet = Alphabet::new(vec![
                    Token::with_potential("open", Potential::Finite(p.open_potential)),
                    Token::with_potential("closed", Potential::Infinite),
                ])?;
                let seed = p
                    .seed
                    .ok_or_else(|| CliError::Config("percolation requires a seed".into()))?;
                let colouring =
                    make_percolation(d, alphabet.clone(), &[1.0 - p.p_closed, p.p_closed], seed)?;
                (
                    colouring,
                    spec_anderson_percolation(&hop, alphabet.potentials())?,
                    false,
                )
            }
            ModelKind::Visible => (make_visible(d)?, spec_visible_laplacian(d)?, false),
        };
        Ok(Model {
            colouring,
            spec,
            path_amplitude: path.then_some(c.operator.amplitude),
        })
    }

    /// `ν_P` for side `m`, from the configured source.
    pub fn reference(
        &self,
        c: &ExperimentConfig,
        m: usize,
    ) -> Result<FrequencyReference, CliError> {
        Ok(match c.nu_ref() {
            NuRef::ClosedForm => FrequencyReference::periodic(&self.colouring, m)?,
            NuRef::LargestJ => {
                let q = Region::cube(c.d, c.reference_side());
                FrequencyReference::from_table(&empirical_frequencies(&self.colouring, m, &q)?)
            }
        })
    }

    /// The operator does not look at the colouring.
    pub fn translation_invariant(&self) -> bool {
        self.spec.range_inv() == 0
    }
}

fn hopping(c: &ExperimentConfig) -> Result<HoppingTable, CliError> {
    let Some(blocks) = &c.operator.blocks else {
        return Ok(nearest_neighbour_table(c.d, c.operator.amplitude));
    };
    let mut entries = Vec::with_capacity(blocks.len());
    let mut range = 0;
    for b in blocks {
        let n = b.matrix.len();
        if n == 0 || b.matrix.iter().any(|row| row.len() != n) {
            return Err(CliError::Config(format!(
                "block at {:?} must be a non-empty square matrix",
                b.offset
            )));
        }
        let offset = Point::new(b.offset.clone());
        range = range.max(offset.sup_norm() as usize);
        entries.push((offset, Block::from_fn(n, n, |r, k| b.matrix[r][k])));
    }
    Ok(hopping_table(c.d, range, entries)?)
}
