//! Finite distributions and exact information measures.
//!
//! All quantities are in bits. `0 log 0` is taken as 0, and conditional
//! quantities given a zero-probability event contribute nothing.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on total probability mass.
pub const MASS_TOL: f64 = 1e-9;

/// Shannon entropy in bits of a (not necessarily normalized) list of masses.
///
/// Non-positive entries are skipped.
pub fn entropy_bits<I: IntoIterator<Item = f64>>(probs: I) -> f64 {
    probs
        .into_iter()
        .filter(|&p| p > 0.0)
        .map(|p| -p * p.log2())
        .sum()
}

/// Binary entropy `h(a) = -a log a - (1-a) log(1-a)`.
pub fn binary_entropy(a: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&a) || a.is_nan() {
        return Err(Error::DomainError(a));
    }
    Ok(entropy_bits([a, 1.0 - a]))
}

fn check_mass(values: impl Iterator<Item = (usize, usize, f64)>) -> Result<()> {
    let mut sum = 0.0;
    for (row, col, value) in values {
        if value < 0.0 || value.is_nan() {
            return Err(Error::NegativeMass { row, col, value });
        }
        sum += value;
    }
    if (sum - 1.0).abs() > MASS_TOL {
        return Err(Error::MassNotOne { sum });
    }
    Ok(())
}

/// A labeled probability mass function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pmf {
    pub labels: Vec<String>,
    pub probs: Vec<f64>,
}

impl Pmf {
    pub fn new(labels: Vec<String>, probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::EmptyAlphabet);
        }
        if labels.len() != probs.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} labels for {} masses",
                labels.len(),
                probs.len()
            )));
        }
        check_mass(probs.iter().enumerate().map(|(i, &p)| (0, i, p)))?;
        Ok(Self { labels, probs })
    }

    /// Pmf with labels `0..n`.
    pub fn from_probs(probs: Vec<f64>) -> Result<Self> {
        let labels = (0..probs.len()).map(|i| i.to_string()).collect();
        Self::new(labels, probs)
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn support_size(&self) -> usize {
        self.probs.iter().filter(|&&p| p > 0.0).count()
    }

    pub fn max_prob(&self) -> f64 {
        self.probs.iter().copied().fold(0.0, f64::max)
    }
}

/// `H(p) = -Σ p log2 p`.
pub fn entropy(p: &Pmf) -> f64 {
    entropy_bits(p.probs.iter().copied())
}

/// Which variable is conditioned on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    /// Quantities of the form `H(Y|X)`.
    YGivenX,
    /// Quantities of the form `H(X|Y)`.
    XGivenY,
}

/// Joint pmf of a private variable X (rows) and a useful variable Y (columns).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawJoint")]
pub struct JointDistribution {
    x_labels: Vec<String>,
    y_labels: Vec<String>,
    pmf: Vec<Vec<f64>>,
}

#[derive(Deserialize)]
struct RawJoint {
    x_labels: Vec<String>,
    y_labels: Vec<String>,
    pmf: Vec<Vec<f64>>,
}

impl TryFrom<RawJoint> for JointDistribution {
    type Error = Error;

    fn try_from(raw: RawJoint) -> Result<Self> {
        JointDistribution::new(raw.pmf, raw.x_labels, raw.y_labels)
    }
}

impl JointDistribution {
    /// Validates a row-major `|X| x |Y|` matrix against its labels.
    pub fn new(pmf: Vec<Vec<f64>>, x_labels: Vec<String>, y_labels: Vec<String>) -> Result<Self> {
        if x_labels.is_empty() || y_labels.is_empty() {
            return Err(Error::EmptyAlphabet);
        }
        if pmf.len() != x_labels.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} rows for {} x-labels",
                pmf.len(),
                x_labels.len()
            )));
        }
        if let Some((i, row)) = pmf
            .iter()
            .enumerate()
            .find(|(_, r)| r.len() != y_labels.len())
        {
            return Err(Error::DimensionMismatch(format!(
                "row {i} has {} entries for {} y-labels",
                row.len(),
                y_labels.len()
            )));
        }
        check_mass(
            pmf.iter()
                .enumerate()
                .flat_map(|(i, r)| r.iter().enumerate().map(move |(j, &p)| (i, j, p))),
        )?;
        Ok(Self {
            x_labels,
            y_labels,
            pmf,
        })
    }

    /// Joint with labels `x0, x1, ...` and `y0, y1, ...`.
    pub fn from_matrix(pmf: Vec<Vec<f64>>) -> Result<Self> {
        let nx = pmf.len();
        let ny = pmf.first().map_or(0, Vec::len);
        Self::new(
            pmf,
            (0..nx).map(|i| format!("x{i}")).collect(),
            (0..ny).map(|j| format!("y{j}")).collect(),
        )
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::ParseError(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("joint serializes")
    }

    pub fn nx(&self) -> usize {
        self.x_labels.len()
    }

    pub fn ny(&self) -> usize {
        self.y_labels.len()
    }

    pub fn x_labels(&self) -> &[String] {
        &self.x_labels
    }

    pub fn y_labels(&self) -> &[String] {
        &self.y_labels
    }

    pub fn matrix(&self) -> &[Vec<f64>] {
        &self.pmf
    }

    #[inline]
    pub fn prob(&self, x: usize, y: usize) -> f64 {
        self.pmf[x][y]
    }

    pub fn p_x(&self) -> Pmf {
        Pmf {
            labels: self.x_labels.clone(),
            probs: self.pmf.iter().map(|r| r.iter().sum()).collect(),
        }
    }

    pub fn p_y(&self) -> Pmf {
        let probs = (0..self.ny())
            .map(|j| self.pmf.iter().map(|r| r[j]).sum())
            .collect();
        Pmf {
            labels: self.y_labels.clone(),
            probs,
        }
    }

    /// `P(Y | X = x)`, or `None` when `P_X(x) = 0`.
    pub fn y_given_x(&self, x: usize) -> Option<Vec<f64>> {
        let px: f64 = self.pmf[x].iter().sum();
        (px > 0.0).then(|| self.pmf[x].iter().map(|p| p / px).collect())
    }

    pub fn joint_entropy(&self) -> f64 {
        entropy_bits(self.pmf.iter().flatten().copied())
    }

    /// Swaps the roles of X and Y.
    pub fn transpose(&self) -> Self {
        let pmf = (0..self.ny())
            .map(|j| self.pmf.iter().map(|r| r[j]).collect())
            .collect();
        Self {
            x_labels: self.y_labels.clone(),
            y_labels: self.x_labels.clone(),
            pmf,
        }
    }

    /// Every positive-mass `(x, y)` pair with its probability, row-major.
    pub fn support(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.pmf.iter().enumerate().flat_map(|(x, row)| {
            row.iter()
                .enumerate()
                .filter(|(_, &p)| p > 0.0)
                .map(move |(y, &p)| (x, y, p))
        })
    }
}

/// `H(Y|X)` or `H(X|Y)`.
pub fn conditional_entropy(j: &JointDistribution, direction: Direction) -> f64 {
    let h = match direction {
        Direction::YGivenX => j.joint_entropy() - entropy(&j.p_x()),
        Direction::XGivenY => j.joint_entropy() - entropy(&j.p_y()),
    };
    h.max(0.0)
}

/// `H(Y | X = x)` for each x, with their sum and minimum over positive-mass x.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PerSymbolEntropies {
    /// `None` for symbols with `P_X(x) = 0`.
    pub values: Vec<Option<f64>>,
    pub sum: f64,
    pub min: f64,
    /// Minimum over strictly positive values; `None` if all are zero.
    pub min_nonzero: Option<f64>,
}

pub fn per_symbol_conditional_entropies(j: &JointDistribution) -> PerSymbolEntropies {
    let values: Vec<Option<f64>> = (0..j.nx())
        .map(|x| j.y_given_x(x).map(entropy_bits))
        .collect();
    let realized = || values.iter().flatten().copied();
    PerSymbolEntropies {
        sum: realized().sum(),
        min: realized().fold(f64::INFINITY, f64::min),
        min_nonzero: realized().filter(|&h| h > 0.0).reduce(f64::min),
        values,
    }
}

/// `I(X;Y) = H(X) + H(Y) - H(X,Y)`, clamped at 0.
pub fn mutual_information(j: &JointDistribution) -> f64 {
    (entropy(&j.p_x()) + entropy(&j.p_y()) - j.joint_entropy()).max(0.0)
}

/// True iff the first variable of `direction` is a deterministic function of
/// the conditioning one: `XGivenY` asks whether X = f(Y).
pub fn is_deterministic_function(j: &JointDistribution, direction: Direction) -> bool {
    match direction {
        Direction::XGivenY => {
            (0..j.ny()).all(|y| (0..j.nx()).filter(|&x| j.prob(x, y) > 0.0).count() <= 1)
        }
        Direction::YGivenX => j
            .pmf
            .iter()
            .all(|r| r.iter().filter(|&&p| p > 0.0).count() <= 1),
    }
}

/// Dense pmf over a product of finite alphabets, row-major in `dims`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointTable {
    dims: Vec<usize>,
    probs: Vec<f64>,
}

impl JointTable {
    pub fn new(dims: Vec<usize>, probs: Vec<f64>) -> Result<Self> {
        if dims.contains(&0) || dims.is_empty() {
            return Err(Error::EmptyAlphabet);
        }
        let size: usize = dims.iter().product();
        if size != probs.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} masses for a table of size {size}",
                probs.len()
            )));
        }
        check_mass(probs.iter().enumerate().map(|(i, &p)| (i, 0, p)))?;
        Ok(Self { dims, probs })
    }

    /// All-zero table, to be filled with [`JointTable::add`] and checked with
    /// [`JointTable::validate`].
    pub fn zeros(dims: Vec<usize>) -> Self {
        let size = dims.iter().product();
        Self {
            dims,
            probs: vec![0.0; size],
        }
    }

    pub fn validate(self) -> Result<Self> {
        Self::new(self.dims, self.probs)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    fn flat(&self, coords: &[usize]) -> usize {
        coords.iter().zip(&self.dims).fold(0, |acc, (&c, &d)| {
            debug_assert!(c < d);
            acc * d + c
        })
    }

    pub fn add(&mut self, coords: &[usize], mass: f64) {
        let i = self.flat(coords);
        self.probs[i] += mass;
    }

    pub fn get(&self, coords: &[usize]) -> f64 {
        self.probs[self.flat(coords)]
    }

    /// Marginal masses over `axes` (in the given order).
    pub fn marginal(&self, axes: &[usize]) -> Vec<f64> {
        let size: usize = axes.iter().map(|&a| self.dims[a]).product();
        let mut out = vec![0.0; size];
        let mut coords = vec![0usize; self.dims.len()];
        for &p in &self.probs {
            if p != 0.0 {
                let idx = axes
                    .iter()
                    .fold(0, |acc, &a| acc * self.dims[a] + coords[a]);
                out[idx] += p;
            }
            for k in (0..coords.len()).rev() {
                coords[k] += 1;
                if coords[k] < self.dims[k] {
                    break;
                }
                coords[k] = 0;
            }
        }
        out
    }

    /// Joint entropy of the variables on `axes`. Empty `axes` gives 0.
    pub fn entropy(&self, axes: &[usize]) -> f64 {
        if axes.is_empty() {
            return 0.0;
        }
        entropy_bits(self.marginal(axes))
    }

    /// `H(A | B)`.
    pub fn conditional_entropy(&self, a: &[usize], b: &[usize]) -> f64 {
        let ab: Vec<usize> = a.iter().chain(b).copied().collect();
        self.entropy(&ab) - self.entropy(b)
    }

    /// `I(A; B)`.
    pub fn mutual_information(&self, a: &[usize], b: &[usize]) -> f64 {
        let ab: Vec<usize> = a.iter().chain(b).copied().collect();
        self.entropy(a) + self.entropy(b) - self.entropy(&ab)
    }

    /// `I(A; B | C)`.
    pub fn conditional_mutual_information(&self, a: &[usize], b: &[usize], c: &[usize]) -> f64 {
        let ac: Vec<usize> = a.iter().chain(c).copied().collect();
        let bc: Vec<usize> = b.iter().chain(c).copied().collect();
        let abc: Vec<usize> = a.iter().chain(b).chain(c).copied().collect();
        self.entropy(&ac) + self.entropy(&bc) - self.entropy(&abc) - self.entropy(c)
    }
}

/// Joint pmf over `(X, Y, W, U)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourWayJoint(JointTable);

impl FourWayJoint {
    pub const X: usize = 0;
    pub const Y: usize = 1;
    pub const W: usize = 2;
    pub const U: usize = 3;

    pub fn new(table: JointTable) -> Result<Self> {
        if table.dims().len() != 4 {
            return Err(Error::DimensionMismatch(format!(
                "expected 4 axes, got {}",
                table.dims().len()
            )));
        }
        Ok(Self(table))
    }

    pub fn table(&self) -> &JointTable {
        &self.0
    }
}

/// Residual of the decomposition
/// `I(U;Y,W) = I(U;X) + H(Y,W|X) - H(Y,W|X,U) - I(X;U|Y,W)`,
/// which holds for every joint.
pub fn key_identity_residual(f: &FourWayJoint) -> f64 {
    let t = f.table();
    let (x, y, w, u) = (
        FourWayJoint::X,
        FourWayJoint::Y,
        FourWayJoint::W,
        FourWayJoint::U,
    );
    let lhs = t.mutual_information(&[u], &[y, w]);
    let rhs = t.mutual_information(&[u], &[x]) + t.conditional_entropy(&[y, w], &[x])
        - t.conditional_entropy(&[y, w], &[x, u])
        - t.conditional_mutual_information(&[x], &[u], &[y, w]);
    (lhs - rhs).abs()
}
