//! Colourings `Λ: Z^d → A`, box patterns and their occurrence counts.
//!
//! A colouring is a pure rule: evaluating it twice at the same point gives the
//! same colour. Colours are referred to by their index in the [`Alphabet`].

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_rational::Ratio;

use crate::error::{Error, Result};
use crate::lattice::{LatticeBox, Point, Region};

/// Potential value attached to a colour; `Infinite` marks a deleted site.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Potential {
    Finite(f64),
    Infinite,
}

impl Potential {
    pub fn is_finite(self) -> bool {
        matches!(self, Potential::Finite(_))
    }

    pub fn value(self) -> Option<f64> {
        match self {
            Potential::Finite(v) => Some(v),
            Potential::Infinite => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Token {
    pub name: String,
    pub potential: Option<Potential>,
}

impl Token {
    pub fn plain(name: impl Into<String>) -> Self {
        Token {
            name: name.into(),
            potential: None,
        }
    }

    pub fn with_potential(name: impl Into<String>, potential: Potential) -> Self {
        Token {
            name: name.into(),
            potential: Some(potential),
        }
    }
}

/// Finite ordered set of colours. Token order fixes the pattern encoding.
#[derive(Clone, Debug, PartialEq)]
pub struct Alphabet {
    tokens: Vec<Token>,
}

impl Alphabet {
    pub fn new(tokens: Vec<Token>) -> Result<Self> {
        if tokens.is_empty() {
            return Err(Error::InvalidArgument("alphabet must be non-empty".into()));
        }
        if tokens.len() > u16::MAX as usize {
            return Err(Error::InvalidArgument("alphabet too large".into()));
        }
        for (i, t) in tokens.iter().enumerate() {
            if tokens[..i].iter().any(|u| u.name == t.name) {
                return Err(Error::InvalidArgument(format!(
                    "duplicate colour {:?}",
                    t.name
                )));
            }
        }
        Ok(Alphabet { tokens })
    }

    /// Alphabet of plain tokens with the given names.
    pub fn named(names: &[&str]) -> Result<Self> {
        Self::new(names.iter().map(|n| Token::plain(*n)).collect())
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    pub fn token(&self, index: usize) -> &Token {
        &self.tokens[index]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.tokens.iter().position(|t| t.name == name)
    }

    /// Potential of each colour, with unset payloads read as zero.
    pub fn potentials(&self) -> Vec<Potential> {
        self.tokens
            .iter()
            .map(|t| t.potential.unwrap_or(Potential::Finite(0.0)))
            .collect()
    }
}

type ColourFn = Arc<dyn Fn(&[i64]) -> usize + Send + Sync>;

#[derive(Clone)]
enum Rule {
    Periodic { period: usize, table: Vec<usize> },
    Random { seed: u64, cumulative: Vec<f64> },
    Visible,
    Product(Arc<Colouring>, Arc<Colouring>),
    Custom { label: String, f: ColourFn },
}

#[derive(Clone)]
pub struct Colouring {
    dim: usize,
    alphabet: Alphabet,
    rule: Rule,
}

impl fmt::Debug for Colouring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Colouring")
            .field("dim", &self.dim)
            .field("rule", &self.describe())
            .finish()
    }
}

pub const VISIBLE: usize = 1;
pub const INVISIBLE: usize = 0;

impl Colouring {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    /// Index of the colour at `x`.
    pub fn colour_at(&self, x: &[i64]) -> usize {
        debug_assert_eq!(x.len(), self.dim);
        match &self.rule {
            Rule::Periodic { period, table } => {
                let n = *period as i64;
                let mut idx = 0usize;
                for &c in x {
                    idx = idx * *period + c.rem_euclid(n) as usize;
                }
                table[idx]
            }
            Rule::Random { seed, cumulative } => {
                let u = site_uniform(*seed, x);
                cumulative
                    .iter()
                    .position(|&c| u < c)
                    .unwrap_or(cumulative.len() - 1)
            }
            Rule::Visible => {
                if is_visible(x) {
                    VISIBLE
                } else {
                    INVISIBLE
                }
            }
            Rule::Product(a, b) => a.colour_at(x) * b.alphabet.len() + b.colour_at(x),
            Rule::Custom { f, .. } => f(x),
        }
    }

    /// Short human-readable description of the rule.
    pub fn describe(&self) -> String {
        match &self.rule {
            Rule::Periodic { period, .. } => format!("periodic(d={}, N={period})", self.dim),
            Rule::Random { seed, .. } => format!("iid(d={}, seed={seed})", self.dim),
            Rule::Visible => format!("visible(d={})", self.dim),
            Rule::Product(a, b) => format!("product({}, {})", a.describe(), b.describe()),
            Rule::Custom { label, .. } => format!("custom({label})"),
        }
    }

    /// Period and cell table when the colouring is periodic.
    pub fn periodic_table(&self) -> Option<(usize, &[usize])> {
        match &self.rule {
            Rule::Periodic { period, table } => Some((*period, table)),
            _ => None,
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match &self.rule {
            Rule::Random { seed, .. } => Some(*seed),
            Rule::Product(a, b) => a.seed().or_else(|| b.seed()),
            _ => None,
        }
    }

    /// Colouring given by an arbitrary pure function (tests, ad-hoc models).
    pub fn custom<F>(dim: usize, alphabet: Alphabet, label: &str, f: F) -> Self
    where
        F: Fn(&[i64]) -> usize + Send + Sync + 'static,
    {
        Colouring {
            dim,
            alphabet,
            rule: Rule::Custom {
                label: label.to_string(),
                f: Arc::new(f),
            },
        }
    }
}

/// `N`-periodic colouring; `table` holds the colours on `C_N` in row-major order.
pub fn make_periodic(
    dim: usize,
    period: usize,
    alphabet: Alphabet,
    table: Vec<usize>,
) -> Result<Colouring> {
    if dim == 0 || period == 0 {
        return Err(Error::InvalidArgument(
            "dimension and period must be >= 1".into(),
        ));
    }
    if table.is_empty() {
        return Err(Error::InvalidArgument("empty period table".into()));
    }
    let cells = period.pow(dim as u32);
    if table.len() != cells {
        return Err(Error::InvalidArgument(format!(
            "period table has {} entries, C_{period} has {cells} sites",
            table.len()
        )));
    }
    if let Some(&bad) = table.iter().find(|&&c| c >= alphabet.len()) {
        return Err(Error::InvalidArgument(format!(
            "colour index {bad} outside alphabet"
        )));
    }
    Ok(Colouring {
        dim,
        alphabet,
        rule: Rule::Periodic { period, table },
    })
}

/// Single-colour colouring.
pub fn make_constant(dim: usize, token: Token) -> Colouring {
    make_periodic(
        dim,
        1,
        Alphabet::new(vec![token]).expect("one token"),
        vec![0],
    )
    .expect("constant colouring is valid")
}

/// I.i.d. site colouring: the colour at `x` is a pure function of `(seed, x)`.
pub fn make_percolation(
    dim: usize,
    alphabet: Alphabet,
    weights: &[f64],
    seed: u64,
) -> Result<Colouring> {
    if dim == 0 {
        return Err(Error::InvalidArgument("dimension must be >= 1".into()));
    }
    if weights.len() != alphabet.len() {
        return Err(Error::InvalidArgument(format!(
            "{} weights for {} colours",
            weights.len(),
            alphabet.len()
        )));
    }
    if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(Error::InvalidArgument(
            "weights must be finite and >= 0".into(),
        ));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidArgument(format!(
            "weights sum to {total}, not 1"
        )));
    }
    let mut acc = 0.0;
    let mut cumulative: Vec<f64> = weights
        .iter()
        .map(|w| {
            acc += w;
            acc
        })
        .collect();
    // Last colour with positive weight absorbs rounding.
    if let Some(last) = weights.iter().rposition(|&w| w > 0.0) {
        for c in cumulative.iter_mut().skip(last) {
            *c = f64::INFINITY;
        }
    }
    Ok(Colouring {
        dim,
        alphabet,
        rule: Rule::Random { seed, cumulative },
    })
}

/// Characteristic function of the visible points: colour 1 iff the gcd of the
/// coordinates is 1, or the point is the origin.
pub fn make_visible(dim: usize) -> Result<Colouring> {
    if dim == 0 {
        return Err(Error::InvalidArgument("dimension must be >= 1".into()));
    }
    Ok(Colouring {
        dim,
        alphabet: Alphabet::named(&["invisible", "visible"]).expect("two tokens"),
        rule: Rule::Visible,
    })
}

/// Pairs the colours of two colourings. Potentials combine additively, an
/// infinite potential on either side wins.
pub fn make_product(a: Colouring, b: Colouring) -> Result<Colouring> {
    if a.dim != b.dim {
        return Err(Error::DimensionMismatch {
            expected: a.dim,
            found: b.dim,
        });
    }
    let mut tokens = Vec::with_capacity(a.alphabet.len() * b.alphabet.len());
    for ta in a.alphabet.tokens() {
        for tb in b.alphabet.tokens() {
            let potential = match (ta.potential, tb.potential) {
                (None, None) => None,
                (Some(Potential::Infinite), _) | (_, Some(Potential::Infinite)) => {
                    Some(Potential::Infinite)
                }
                (p, q) => Some(Potential::Finite(
                    p.and_then(Potential::value).unwrap_or(0.0)
                        + q.and_then(Potential::value).unwrap_or(0.0),
                )),
            };
            tokens.push(Token {
                name: format!("{}|{}", ta.name, tb.name),
                potential,
            });
        }
    }
    Ok(Colouring {
        dim: a.dim,
        alphabet: Alphabet::new(tokens)?,
        rule: Rule::Product(Arc::new(a), Arc::new(b)),
    })
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// `gcd(|x_1|, ..., |x_d|) == 1`, with the origin counted as visible.
pub fn is_visible(x: &[i64]) -> bool {
    let g = x.iter().fold(0u64, |g, &c| gcd(g, c.unsigned_abs()));
    g == 1 || g == 0
}

fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Uniform in `[0, 1)`, keyed by the seed and the site coordinates.
fn site_uniform(seed: u64, x: &[i64]) -> f64 {
    const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;
    let mut h = mix64(seed ^ GOLDEN);
    for &c in x {
        h = mix64(h.wrapping_add(GOLDEN) ^ c as u64);
    }
    (h >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Colour assignment on `C_M`, flattened row-major.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pattern {
    side: usize,
    dim: usize,
    values: Vec<u16>,
}

impl Pattern {
    pub fn new(dim: usize, side: usize, values: Vec<u16>) -> Result<Self> {
        if side == 0 || dim == 0 {
            return Err(Error::InvalidArgument(
                "pattern side and dimension must be >= 1".into(),
            ));
        }
        let expected = side.pow(dim as u32);
        if values.len() != expected {
            return Err(Error::InvalidArgument(format!(
                "pattern has {} values, C_{side} has {expected} sites",
                values.len()
            )));
        }
        Ok(Pattern { side, dim, values })
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn values(&self) -> &[u16] {
        &self.values
    }

    /// Hex key: two digits per site for alphabets up to 256 colours, four otherwise.
    pub fn to_hex(&self, alphabet_len: usize) -> String {
        if alphabet_len <= 256 {
            hex::encode(self.values.iter().map(|&v| v as u8).collect::<Vec<_>>())
        } else {
            hex::encode(
                self.values
                    .iter()
                    .flat_map(|v| v.to_be_bytes())
                    .collect::<Vec<_>>(),
            )
        }
    }
}

impl fmt::Debug for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Pattern(M={}, {:?})", self.side, self.values)
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let hex = self.to_hex(if self.values.iter().all(|&v| v < 256) {
            256
        } else {
            65536
        });
        write!(f, "M{}:{}", self.side, hex)
    }
}

/// The shifted pattern `-x + (Λ ∩ C_M(x))`.
pub fn pattern_at(colouring: &Colouring, x: &Point, side: usize) -> Pattern {
    let values = LatticeBox::cube_at(x, side)
        .points()
        .map(|y| colouring.colour_at(&y) as u16)
        .collect();
    Pattern {
        side,
        dim: colouring.dim(),
        values,
    }
}

fn cube_fits(q: &Region, x: &Point, side: usize) -> bool {
    LatticeBox::cube_at(x, side)
        .points()
        .all(|y| q.contains(&y))
}

/// Number of anchor positions `x ∈ Q` with `x + C_M ⊆ Q`.
pub fn anchor_count(q: &Region, side: usize) -> usize {
    if let Some(bx) = q.as_box() {
        return bx
            .sides()
            .iter()
            .map(|l| (l + 1).saturating_sub(side))
            .product();
    }
    q.points().iter().filter(|x| cube_fits(q, x, side)).count()
}

/// `♯_P(Λ ∩ Q)` by direct scan.
pub fn count_occurrences(pattern: &Pattern, colouring: &Colouring, q: &Region) -> usize {
    q.points()
        .iter()
        .filter(|x| {
            cube_fits(q, x, pattern.side) && pattern_at(colouring, x, pattern.side) == *pattern
        })
        .count()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PatternStats {
    pub count: u64,
    /// Lexicographically first and last anchors at which the pattern occurs.
    pub first: Point,
    pub last: Point,
}

/// Occurrence counts of all box patterns of side `M` in `Λ ∩ Q`.
#[derive(Clone, Debug, PartialEq)]
pub struct FrequencyTable {
    pub side: usize,
    pub dim: usize,
    /// `|Q|`.
    pub volume: u64,
    /// `#{x : x + C_M ⊆ Q}`.
    pub anchors: u64,
    pub entries: BTreeMap<Pattern, PatternStats>,
}

impl FrequencyTable {
    pub fn count(&self, p: &Pattern) -> u64 {
        self.entries.get(p).map_or(0, |s| s.count)
    }

    /// `♯_P(Λ ∩ Q) / |Q|`.
    pub fn frequency(&self, p: &Pattern) -> Ratio<u64> {
        Ratio::new(self.count(p), self.volume)
    }

    pub fn total_count(&self) -> u64 {
        self.entries.values().map(|s| s.count).sum()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Merges counts from a table over a disjoint region.
    pub fn merge(&mut self, other: &FrequencyTable) -> Result<()> {
        if other.side != self.side || other.dim != self.dim {
            return Err(Error::InvalidArgument(
                "cannot merge tables of different shape".into(),
            ));
        }
        self.volume += other.volume;
        self.anchors += other.anchors;
        for (p, s) in &other.entries {
            self.entries
                .entry(p.clone())
                .and_modify(|e| {
                    e.count += s.count;
                    if s.first < e.first {
                        e.first = s.first.clone();
                    }
                    if s.last > e.last {
                        e.last = s.last.clone();
                    }
                })
                .or_insert_with(|| s.clone());
        }
        Ok(())
    }
}

/// Empirical pattern frequencies of side `M` over `Q`, one pass over anchors.
///
/// Colours on the bounding box are evaluated once and cached; the scan itself
/// is the plain `O(|Q| M^d)` one.
pub fn empirical_frequencies(
    colouring: &Colouring,
    side: usize,
    q: &Region,
) -> Result<FrequencyTable> {
    if side == 0 {
        return Err(Error::InvalidArgument("pattern side must be >= 1".into()));
    }
    if q.is_empty() {
        return Err(Error::EmptyRegion);
    }
    if q.dim() != colouring.dim() {
        return Err(Error::DimensionMismatch {
            expected: colouring.dim(),
            found: q.dim(),
        });
    }
    let bbox = q.bounding_box().expect("non-empty region");
    let cache: Vec<u16> = bbox
        .points()
        .map(|y| colouring.colour_at(&y) as u16)
        .collect();
    let offsets: Vec<Point> = LatticeBox::cube(q.dim(), side).points().collect();

    let mut entries: BTreeMap<Pattern, PatternStats> = BTreeMap::new();
    let mut anchors = 0u64;
    let mut values = Vec::with_capacity(offsets.len());
    for x in q.points() {
        values.clear();
        let mut fits = true;
        for d in &offsets {
            let y = x.add(d);
            if !q.contains(&y) {
                fits = false;
                break;
            }
            let i = bbox.linear_index(&y).expect("inside bounding box");
            values.push(cache[i]);
        }
        if !fits {
            continue;
        }
        anchors += 1;
        let p = Pattern {
            side,
            dim: q.dim(),
            values: values.clone(),
        };
        // Points are visited in lexicographic order, so `last` only moves forward.
        entries
            .entry(p)
            .and_modify(|s| {
                s.count += 1;
                s.last = x.clone();
            })
            .or_insert_with(|| PatternStats {
                count: 1,
                first: x.clone(),
                last: x.clone(),
            });
    }
    Ok(FrequencyTable {
        side,
        dim: q.dim(),
        volume: q.len() as u64,
        anchors,
        entries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p1(v: i64) -> Point {
        Point::new(vec![v])
    }

    fn interval(a: i64, b: i64) -> Region {
        Region::from_box(&LatticeBox::new(p1(a), p1(b)).unwrap())
    }

    fn mod2() -> Colouring {
        make_periodic(1, 2, Alphabet::named(&["0", "1"]).unwrap(), vec![0, 1]).unwrap()
    }

    #[test]
    fn pattern_at_examples() {
        let vis = make_visible(1).unwrap();
        assert_eq!(pattern_at(&vis, &p1(-1), 3).values(), &[1, 1, 1]);
        let trivial = make_constant(1, Token::plain("*"));
        assert_eq!(pattern_at(&trivial, &p1(17), 2).values(), &[0, 0]);
        assert_eq!(pattern_at(&mod2(), &p1(3), 2).values(), &[1, 0]);
    }

    #[test]
    fn count_examples() {
        let vis = make_visible(1).unwrap();
        let p = Pattern::new(1, 2, vec![1, 1]).unwrap();
        assert_eq!(count_occurrences(&p, &vis, &interval(-2, 2)), 2);

        let trivial = make_constant(1, Token::plain("*"));
        let p = Pattern::new(1, 2, vec![0, 0]).unwrap();
        assert_eq!(count_occurrences(&p, &trivial, &Region::cube(1, 10)), 9);

        let p = Pattern::new(1, 2, vec![0, 1]).unwrap();
        assert_eq!(count_occurrences(&p, &mod2(), &Region::cube(1, 10)), 5);
    }

    #[test]
    fn frequency_examples() {
        let trivial = make_constant(1, Token::plain("*"));
        let t = empirical_frequencies(&trivial, 2, &Region::cube(1, 10)).unwrap();
        assert_eq!(t.len(), 1);
        let (p, _) = t.entries.iter().next().unwrap();
        assert_eq!(t.frequency(p), Ratio::new(9, 10));

        let t = empirical_frequencies(&mod2(), 1, &Region::cube(1, 10)).unwrap();
        for p in t.entries.keys() {
            assert_eq!(t.frequency(p), Ratio::new(1, 2));
        }
    }

    #[test]
    fn frequency_table_records_occurrences() {
        let t = empirical_frequencies(&mod2(), 2, &Region::cube(1, 10)).unwrap();
        let p = Pattern::new(1, 2, vec![1, 0]).unwrap();
        let s = &t.entries[&p];
        assert_eq!(
            (s.count, s.first.clone(), s.last.clone()),
            (4, p1(1), p1(7))
        );
        assert_eq!(pattern_at(&mod2(), &s.last, 2), p);
    }

    #[test]
    fn periodic_examples() {
        let c = make_periodic(1, 2, Alphabet::named(&["a", "b"]).unwrap(), vec![0, 1]).unwrap();
        assert_eq!(c.colour_at(&[5]), 1);
        assert_eq!(c.colour_at(&[-3]), 1);
        assert_eq!(c.colour_at(&[-4]), 0);

        let table: Vec<usize> = (0..9).map(|i| (i * 7 + 1) % 4).collect();
        let c =
            make_periodic(2, 3, Alphabet::named(&["a", "b", "c", "d"]).unwrap(), table).unwrap();
        for x in -7..7 {
            for y in -7..7 {
                assert_eq!(c.colour_at(&[x, y]), c.colour_at(&[x + 3, y]));
                assert_eq!(c.colour_at(&[x, y]), c.colour_at(&[x, y - 3]));
            }
        }
    }

    #[test]
    fn periodic_rejects_bad_tables() {
        let ab = Alphabet::named(&["a"]).unwrap();
        assert!(make_periodic(1, 2, ab.clone(), vec![]).is_err());
        assert!(make_periodic(1, 2, ab.clone(), vec![0]).is_err());
        assert!(make_periodic(1, 1, ab, vec![3]).is_err());
    }

    #[test]
    fn percolation_examples() {
        let ab = Alphabet::new(vec![
            Token::with_potential("open", Potential::Finite(0.0)),
            Token::with_potential("closed", Potential::Infinite),
        ])
        .unwrap();
        let all_open = make_percolation(2, ab.clone(), &[1.0, 0.0], 9).unwrap();
        for x in -20..20 {
            assert_eq!(all_open.colour_at(&[x, 3 * x - 1]), 0);
        }
        let c = make_percolation(2, ab.clone(), &[0.7, 0.3], 42).unwrap();
        for x in -20..20 {
            assert_eq!(c.colour_at(&[x, 7]), c.colour_at(&[x, 7]));
        }
        let t = empirical_frequencies(&c, 1, &Region::cube(2, 200)).unwrap();
        let closed = t.count(&Pattern::new(2, 1, vec![1]).unwrap()) as f64 / 40000.0;
        assert!((closed - 0.3).abs() < 0.01, "closed fraction {closed}");
        assert!(make_percolation(2, ab.clone(), &[0.7, 0.2], 1).is_err());
        assert!(make_percolation(2, ab, &[0.7], 1).is_err());
    }

    #[test]
    fn visible_examples() {
        assert!(!is_visible(&[2, 4]));
        assert!(is_visible(&[3, 5]));
        assert!(!is_visible(&[0, 7]));
        assert!(is_visible(&[0, 1]));
        assert!(is_visible(&[0, 0]));
        let v = make_visible(1).unwrap();
        let visible: Vec<i64> = (-10..=10)
            .filter(|&x| v.colour_at(&[x]) == VISIBLE)
            .collect();
        assert_eq!(visible, vec![-1, 0, 1]);
    }

    #[test]
    fn product_pairs_colours() {
        let c = make_product(mod2(), make_visible(1).unwrap()).unwrap();
        assert_eq!(c.alphabet().len(), 4);
        assert_eq!(c.colour_at(&[1]), 3);
        assert_eq!(c.colour_at(&[4]), 0);
        assert_eq!(c.alphabet().token(3).name, "1|visible");
    }

    #[test]
    fn hex_keys() {
        let p = Pattern::new(1, 3, vec![0, 1, 255]).unwrap();
        assert_eq!(p.to_hex(256), "0001ff");
        assert_eq!(p.to_hex(300), "0000000100ff");
    }

    #[test]
    fn frequencies_reject_bad_input() {
        let c = mod2();
        assert!(empirical_frequencies(&c, 0, &Region::cube(1, 4)).is_err());
        assert_eq!(
            empirical_frequencies(&c, 1, &Region::empty(1)),
            Err(Error::EmptyRegion)
        );
        assert!(empirical_frequencies(&c, 1, &Region::cube(2, 4)).is_err());
    }
}
