//! Representations of X as a pair (X1, X2) laid out on a grid.
//!
//! A separation places every X symbol in one cell of an `|X1| x |X2|` grid;
//! X1 is the row and X2 the column. When `|X|` is prime the grid has one
//! extra zero-mass cell, pinned to the bottom-right corner.
//!
//! The search objective only depends on the row (or column) sums, so the
//! exhaustive search walks multiset partitions of the masses into groups of
//! equal size instead of all bijections.

use serde::{Deserialize, Serialize};

use crate::coding::ceil_log2;
use crate::dist::{entropy_bits, JointDistribution, Pmf};
use crate::error::{Error, Result};

/// Alphabets above this size are searched greedily in [`SearchMode::Auto`].
pub const EXHAUSTIVE_LIMIT: usize = 14;

pub const PAD_LABEL: &str = "<pad>";

const OBJ_TOL: f64 = 1e-12;

/// Which factor's entropy is bounded by ε.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Family {
    /// `H(X1) <= ε`; the row variable is revealed, the column is padded.
    S1,
    /// `H(X2) <= ε`; the column variable is revealed, the row is padded.
    S2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchMode {
    Exhaustive,
    Greedy,
    /// Exhaustive up to [`EXHAUSTIVE_LIMIT`] symbols, greedy above.
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Shape {
    pub rows: usize,
    pub cols: usize,
    pub padded: bool,
}

fn is_prime(n: usize) -> bool {
    n >= 2
        && (2..)
            .take_while(|d| d * d <= n)
            .all(|d| !n.is_multiple_of(d))
}

/// Grid shapes `(|X1|, |X2|)` with both sides above one and `|X1||X2| = n`,
/// or `n + 1` with a zero-mass pad when `n` is prime. Ordered by `|X1|`.
pub fn enumerate_shapes(n: usize) -> Vec<Shape> {
    let (total, padded) = if is_prime(n) {
        (n + 1, true)
    } else {
        (n, false)
    };
    (2..total)
        .filter(|r| total % r == 0)
        .map(|rows| Shape {
            rows,
            cols: total / rows,
            padded,
        })
        .collect()
}

/// Serialized form: `{"shape": [r, c], "rows": [[x-label or null, ...], ...]}`.
/// `shape` may be omitted on input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparationSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shape: Option<[usize; 2]>,
    pub rows: Vec<Vec<Option<String>>>,
}

/// Placement of X symbols on an `|X1| x |X2|` grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Separation {
    shape: [usize; 2],
    /// `grid[x1][x2]` is the X symbol in that cell, `None` for the pad.
    grid: Vec<Vec<Option<usize>>>,
    x1_pmf: Vec<f64>,
    x2_pmf: Vec<f64>,
}

impl Separation {
    pub fn new(grid: Vec<Vec<Option<usize>>>, p_x: &Pmf) -> Result<Self> {
        let n = p_x.len();
        let rows = grid.len();
        let cols = grid.first().map_or(0, Vec::len);
        if rows == 0 || cols == 0 || grid.iter().any(|r| r.len() != cols) {
            return Err(Error::BadSeparation(
                "grid must be a non-empty rectangle".into(),
            ));
        }
        let mut seen = vec![false; n];
        let mut pads = 0;
        for cell in grid.iter().flatten() {
            match *cell {
                Some(x) if x < n && !seen[x] => seen[x] = true,
                Some(x) => {
                    return Err(Error::BadSeparation(format!(
                        "symbol {x} repeated or out of range"
                    )))
                }
                None => pads += 1,
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::BadSeparation(
                "grid does not cover every symbol".into(),
            ));
        }
        if pads > 1 || (pads == 1 && !is_prime(n)) {
            return Err(Error::BadSeparation(
                "a single pad cell is allowed only for prime alphabet sizes".into(),
            ));
        }
        let mass = |c: &Option<usize>| c.map_or(0.0, |x| p_x.probs[x]);
        let x1_pmf = grid.iter().map(|r| r.iter().map(mass).sum()).collect();
        let x2_pmf = (0..cols)
            .map(|k| grid.iter().map(|r| mass(&r[k])).sum())
            .collect();
        Ok(Self {
            shape: [rows, cols],
            grid,
            x1_pmf,
            x2_pmf,
        })
    }

    /// Row-major placement: symbol `i` goes to cell `(i / cols, i % cols)`.
    pub fn row_major(rows: usize, cols: usize, p_x: &Pmf) -> Result<Self> {
        let n = p_x.len();
        if rows * cols != n && rows * cols != n + 1 {
            return Err(Error::BadSeparation(format!(
                "{rows}x{cols} grid cannot hold {n} symbols"
            )));
        }
        let grid = (0..rows)
            .map(|r| {
                (0..cols)
                    .map(|c| Some(r * cols + c).filter(|&i| i < n))
                    .collect()
            })
            .collect();
        Self::new(grid, p_x)
    }

    pub fn from_spec(spec: &SeparationSpec, p_x: &Pmf) -> Result<Self> {
        if let Some([r, c]) = spec.shape {
            if spec.rows.len() != r || spec.rows.iter().any(|row| row.len() != c) {
                return Err(Error::BadSeparation(
                    "rows do not match the declared shape".into(),
                ));
            }
        }
        let grid = spec
            .rows
            .iter()
            .map(|row| {
                row.iter()
                    .map(|cell| match cell {
                        None => Ok(None),
                        Some(label) => p_x
                            .labels
                            .iter()
                            .position(|l| l == label)
                            .map(Some)
                            .ok_or_else(|| Error::BadSeparation(format!("unknown symbol {label}"))),
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(grid, p_x)
    }

    pub fn to_spec(&self, labels: &[String]) -> SeparationSpec {
        SeparationSpec {
            shape: Some(self.shape),
            rows: self
                .grid
                .iter()
                .map(|r| r.iter().map(|c| c.map(|x| labels[x].clone())).collect())
                .collect(),
        }
    }

    /// `(|X1|, |X2|)`.
    pub fn shape(&self) -> (usize, usize) {
        (self.shape[0], self.shape[1])
    }

    pub fn grid(&self) -> &[Vec<Option<usize>>] {
        &self.grid
    }

    pub fn x1_pmf(&self) -> &[f64] {
        &self.x1_pmf
    }

    pub fn x2_pmf(&self) -> &[f64] {
        &self.x2_pmf
    }

    pub fn h_x1(&self) -> f64 {
        entropy_bits(self.x1_pmf.iter().copied())
    }

    pub fn h_x2(&self) -> f64 {
        entropy_bits(self.x2_pmf.iter().copied())
    }

    pub fn is_padded(&self) -> bool {
        self.grid.iter().flatten().any(Option::is_none)
    }

    /// `H(X1) + ⌈log2 |X2|⌉` for S1, `H(X2) + ⌈log2 |X1|⌉` for S2.
    pub fn objective(&self, family: Family) -> f64 {
        match family {
            Family::S1 => self.h_x1() + ceil_log2(self.shape[1]) as f64,
            Family::S2 => self.h_x2() + ceil_log2(self.shape[0]) as f64,
        }
    }

    /// Rejects a constant X1.
    pub fn check_split_shape(&self) -> Result<()> {
        let (r, c) = self.shape();
        if r <= 1 {
            return Err(Error::BadSeparation(format!(
                "shape {r}x{c} has a constant X1"
            )));
        }
        Ok(())
    }

    /// For each row, the single positive-mass column; fails if some row has
    /// two, i.e. X2 is not a function of X1.
    pub fn functional_columns(&self, p_x: &Pmf) -> Result<Vec<Option<usize>>> {
        self.grid
            .iter()
            .map(|row| {
                let mut positive = row
                    .iter()
                    .enumerate()
                    .filter(|(_, c)| c.is_some_and(|x| p_x.probs[x] > 0.0))
                    .map(|(k, _)| k);
                let first = positive.next();
                match positive.next() {
                    Some(_) => Err(Error::NotFunctional),
                    None => Ok(first),
                }
            })
            .collect()
    }
}

/// A grid on which X2 is a function of X1: each positive-mass symbol gets its
/// own row, using the fewest rows that divide `|X|`.
pub fn functional_separation(p_x: &Pmf) -> Result<Separation> {
    let n = p_x.len();
    let support = p_x.support_size().max(1);
    let rows = (support.max(2)..=n)
        .find(|r| n.is_multiple_of(*r))
        .unwrap_or(n);
    let cols = n / rows;
    let (positive, zero): (Vec<usize>, Vec<usize>) = (0..n).partition(|&x| p_x.probs[x] > 0.0);
    let mut grid = vec![vec![None; cols]; rows];
    let mut fill = zero.into_iter();
    for (r, row) in grid.iter_mut().enumerate() {
        for (c, cell) in row.iter_mut().enumerate() {
            *cell = if c == 0 && r < positive.len() {
                Some(positive[r])
            } else {
                fill.next()
            };
        }
    }
    Separation::new(grid, p_x)
}

/// Relabels the joint over the grid cells, row-major: `x = x1 * |X2| + x2`.
pub fn lift_separation(j: &JointDistribution, s: &Separation) -> Result<JointDistribution> {
    let n_cells = s.shape[0] * s.shape[1];
    let placed = s.grid.iter().flatten().flatten().count();
    if placed != j.nx() || s.grid.iter().flatten().flatten().any(|&x| x >= j.nx()) {
        return Err(Error::BadSeparation(format!(
            "separation covers {placed} symbols, joint has {}",
            j.nx()
        )));
    }
    let mut pmf = Vec::with_capacity(n_cells);
    let mut labels = Vec::with_capacity(n_cells);
    for cell in s.grid.iter().flatten() {
        match *cell {
            Some(x) => {
                pmf.push(j.matrix()[x].clone());
                labels.push(j.x_labels()[x].clone());
            }
            None => {
                pmf.push(vec![0.0; j.ny()]);
                labels.push(PAD_LABEL.to_string());
            }
        }
    }
    JointDistribution::new(pmf, labels, j.y_labels().to_vec())
}

/// Result of a separation search.
#[derive(Debug, Clone, Serialize)]
pub struct SearchOutcome {
    pub best: Separation,
    pub family: Family,
    pub objective: f64,
    /// Entropy of the revealed factor (`H(X1)` for S1, `H(X2)` for S2).
    pub revealed_entropy: f64,
    /// Size of the padded factor, i.e. the key size.
    pub key_size: usize,
    pub feasible_count: u64,
    pub enumerated: u64,
    /// False when the greedy heuristic produced the result.
    pub optimal: bool,
}

/// Number of ways to split `n` labeled items into `g` unordered groups of `k`.
fn partition_count(g: usize, k: usize) -> f64 {
    let ln_fact = |m: usize| (1..=m).map(|i| (i as f64).ln()).sum::<f64>();
    (ln_fact(g * k) - g as f64 * ln_fact(k) - ln_fact(g)).exp()
}

struct Candidate {
    groups: Vec<Vec<usize>>,
    entropy: f64,
}

/// Walks partitions of `masses` (sorted ascending) into `g` groups of `k`,
/// skipping choices that only permute equal masses.
struct PartitionWalk<'a> {
    masses: &'a [f64],
    k: usize,
    eps: f64,
    used: Vec<bool>,
    groups: Vec<Vec<usize>>,
    best: Option<Candidate>,
    feasible: u64,
    enumerated: u64,
}

impl PartitionWalk<'_> {
    fn run(&mut self) {
        let Some(head) = self.used.iter().position(|u| !u) else {
            self.leaf();
            return;
        };
        self.used[head] = true;
        self.groups.push(vec![head]);
        self.fill(head + 1);
        self.groups.pop();
        self.used[head] = false;
    }

    fn fill(&mut self, start: usize) {
        if self.groups.last().unwrap().len() == self.k {
            self.run();
            return;
        }
        let mut prev: Option<f64> = None;
        for j in start..self.masses.len() {
            if self.used[j] {
                continue;
            }
            if prev == Some(self.masses[j]) {
                continue;
            }
            prev = Some(self.masses[j]);
            self.used[j] = true;
            self.groups.last_mut().unwrap().push(j);
            self.fill(j + 1);
            self.groups.last_mut().unwrap().pop();
            self.used[j] = false;
        }
    }

    fn leaf(&mut self) {
        self.enumerated += 1;
        let h = entropy_bits(
            self.groups
                .iter()
                .map(|g| g.iter().map(|&i| self.masses[i]).sum()),
        );
        if h > self.eps + OBJ_TOL {
            return;
        }
        self.feasible += 1;
        if self.best.as_ref().is_none_or(|b| h < b.entropy - OBJ_TOL) {
            self.best = Some(Candidate {
                groups: self.groups.clone(),
                entropy: h,
            });
        }
    }
}

fn group_entropy(groups: &[Vec<usize>], masses: &[f64]) -> f64 {
    entropy_bits(groups.iter().map(|g| g.iter().map(|&i| masses[i]).sum()))
}

/// Descending-mass packing followed by pairwise swaps until no swap lowers
/// the group-sum entropy.
fn greedy_groups(masses: &[f64], g: usize, k: usize) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..masses.len()).collect();
    order.sort_by(|&a, &b| masses[b].total_cmp(&masses[a]).then(a.cmp(&b)));
    let mut groups: Vec<Vec<usize>> = order.chunks(k).map(<[usize]>::to_vec).collect();
    debug_assert_eq!(groups.len(), g);
    let mut current = group_entropy(&groups, masses);
    loop {
        let mut improved = false;
        for a in 0..g {
            for b in a + 1..g {
                for ia in 0..k {
                    for ib in 0..k {
                        let (ea, eb) = (groups[a][ia], groups[b][ib]);
                        groups[a][ia] = eb;
                        groups[b][ib] = ea;
                        let h = group_entropy(&groups, masses);
                        if h < current - OBJ_TOL {
                            current = h;
                            improved = true;
                        } else {
                            groups[a][ia] = ea;
                            groups[b][ib] = eb;
                        }
                    }
                }
            }
        }
        if !improved {
            return groups;
        }
    }
}

/// Converts groups of sorted-mass positions into a grid of X indices with the
/// pad (if any) in the last cell.
fn groups_to_grid(
    mut groups: Vec<Vec<usize>>,
    order: &[Option<usize>],
    family: Family,
) -> Vec<Vec<Option<usize>>> {
    if let Some(gi) = groups
        .iter()
        .position(|g| g.iter().any(|&i| order[i].is_none()))
    {
        let mut g = groups.remove(gi);
        let pi = g.iter().position(|&i| order[i].is_none()).unwrap();
        let pad = g.remove(pi);
        g.push(pad);
        groups.push(g);
    }
    let cells: Vec<Vec<Option<usize>>> = groups
        .iter()
        .map(|g| g.iter().map(|&i| order[i]).collect())
        .collect();
    match family {
        Family::S1 => cells,
        Family::S2 => {
            let (ncols, nrows) = (cells.len(), cells[0].len());
            (0..nrows)
                .map(|r| (0..ncols).map(|c| cells[c][r]).collect())
                .collect()
        }
    }
}

/// Minimizes the family's objective over all separations whose revealed
/// factor has entropy at most `eps`.
pub fn search_separations(
    p_x: &Pmf,
    eps: f64,
    family: Family,
    mode: SearchMode,
    budget: u64,
) -> Result<SearchOutcome> {
    let n = p_x.len();
    let shapes = enumerate_shapes(n);
    if shapes.is_empty() || eps.is_nan() || eps < 0.0 {
        return Err(Error::EmptyFeasibleSet);
    }
    let exhaustive = match mode {
        SearchMode::Exhaustive => true,
        SearchMode::Greedy => false,
        SearchMode::Auto => n <= EXHAUSTIVE_LIMIT,
    };

    // symbols sorted by ascending mass; `None` is the pad
    let mut order: Vec<Option<usize>> = (0..n).map(Some).collect();
    if shapes[0].padded {
        order.push(None);
    }
    let mass_of = |s: &Option<usize>| s.map_or(0.0, |x| p_x.probs[x]);
    order.sort_by(|a, b| mass_of(a).total_cmp(&mass_of(b)));
    let masses: Vec<f64> = order.iter().map(mass_of).collect();

    let group_shape = |s: &Shape| match family {
        Family::S1 => (s.rows, s.cols),
        Family::S2 => (s.cols, s.rows),
    };
    if exhaustive {
        let needed: f64 = shapes
            .iter()
            .map(|s| {
                let (g, k) = group_shape(s);
                partition_count(g, k)
            })
            .sum();
        if needed > budget as f64 {
            return Err(Error::BudgetExceeded {
                needed: needed.round() as u128,
                budget: budget as u128,
            });
        }
    }

    let mut best: Option<(f64, Separation, f64, usize)> = None;
    let (mut feasible_count, mut enumerated) = (0u64, 0u64);
    for shape in &shapes {
        let (g, k) = group_shape(shape);
        let candidate = if exhaustive {
            let mut walk = PartitionWalk {
                masses: &masses,
                k,
                eps,
                used: vec![false; masses.len()],
                groups: Vec::with_capacity(g),
                best: None,
                feasible: 0,
                enumerated: 0,
            };
            walk.run();
            feasible_count += walk.feasible;
            enumerated += walk.enumerated;
            walk.best
        } else {
            let groups = greedy_groups(&masses, g, k);
            let entropy = group_entropy(&groups, &masses);
            enumerated += 1;
            (entropy <= eps + OBJ_TOL).then(|| {
                feasible_count += 1;
                Candidate { groups, entropy }
            })
        };
        let Some(c) = candidate else { continue };
        let sep = Separation::new(groups_to_grid(c.groups, &order, family), p_x)?;
        let objective = sep.objective(family);
        if best.as_ref().is_none_or(|b| objective < b.0 - OBJ_TOL) {
            let key_size = match family {
                Family::S1 => shape.cols,
                Family::S2 => shape.rows,
            };
            best = Some((objective, sep, c.entropy, key_size));
        }
    }
    let (objective, best, revealed_entropy, key_size) = best.ok_or(Error::EmptyFeasibleSet)?;
    Ok(SearchOutcome {
        best,
        family,
        objective,
        revealed_entropy,
        key_size,
        feasible_count,
        enumerated,
        optimal: exhaustive,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::{
        conditional_entropy, mutual_information, per_symbol_conditional_entropies, Direction,
    };
    use approx::assert_abs_diff_eq;

    fn example2_px() -> Pmf {
        let mut probs = vec![0.005; 10];
        probs.extend([0.475, 0.475]);
        Pmf::from_probs(probs).unwrap()
    }

    fn shape_pairs(n: usize) -> Vec<(usize, usize)> {
        enumerate_shapes(n)
            .iter()
            .map(|s| (s.rows, s.cols))
            .collect()
    }

    #[test]
    fn shapes() {
        assert_eq!(shape_pairs(12), vec![(2, 6), (3, 4), (4, 3), (6, 2)]);
        assert_eq!(shape_pairs(11), shape_pairs(12));
        assert!(enumerate_shapes(11).iter().all(|s| s.padded));
        assert_eq!(shape_pairs(4), vec![(2, 2)]);
        assert_eq!(shape_pairs(2), vec![]);
        assert_eq!(shape_pairs(3), vec![(2, 2)]);
        assert_eq!(shape_pairs(16), vec![(2, 8), (4, 4), (8, 2)]);
    }

    #[test]
    fn partition_counts() {
        assert_eq!(partition_count(6, 2).round(), 10395.0);
        assert_eq!(partition_count(2, 6).round(), 462.0);
        assert_eq!(partition_count(3, 4).round(), 5775.0);
    }

    #[test]
    fn example2_optimum() {
        let out = search_separations(
            &example2_px(),
            0.41,
            Family::S1,
            SearchMode::Exhaustive,
            1_000_000,
        )
        .unwrap();
        assert_eq!(out.best.shape(), (6, 2));
        assert_abs_diff_eq!(out.revealed_entropy, 0.4025, epsilon = 1e-4);
        assert_abs_diff_eq!(out.objective, 1.4025, epsilon = 1e-4);
        assert_eq!(out.key_size, 2);
        let mut rows: Vec<f64> = out.best.x1_pmf().to_vec();
        rows.sort_by(f64::total_cmp);
        for r in &rows[..5] {
            assert_abs_diff_eq!(*r, 0.01, epsilon = 1e-15);
        }
        assert_abs_diff_eq!(rows[5], 0.95, epsilon = 1e-15);
        assert!(out.optimal);
    }

    #[test]
    fn uniform_four() {
        let p = Pmf::from_probs(vec![0.25; 4]).unwrap();
        let out = search_separations(&p, 1.0, Family::S1, SearchMode::Exhaustive, 1000).unwrap();
        assert_abs_diff_eq!(out.revealed_entropy, 1.0, epsilon = 1e-12);
        assert_eq!(
            search_separations(&p, 0.99, Family::S1, SearchMode::Exhaustive, 1000).unwrap_err(),
            Error::EmptyFeasibleSet
        );
    }

    #[test]
    fn equal_mass_dedupe_enumerates_less() {
        let p = Pmf::from_probs(vec![1.0 / 12.0; 12]).unwrap();
        let out =
            search_separations(&p, 10.0, Family::S1, SearchMode::Exhaustive, 1_000_000).unwrap();
        assert_eq!(out.enumerated, 4);
    }

    #[test]
    fn prime_pad_sits_in_last_cell() {
        let p = Pmf::from_probs(vec![0.3, 0.2, 0.2, 0.15, 0.15]).unwrap();
        for family in [Family::S1, Family::S2] {
            let out = search_separations(&p, 10.0, family, SearchMode::Exhaustive, 1000).unwrap();
            let grid = out.best.grid();
            assert_eq!(*grid.last().unwrap().last().unwrap(), None);
            assert!(out.best.is_padded());
        }
    }

    #[test]
    fn s2_transposes_roles() {
        let p = example2_px();
        let out =
            search_separations(&p, 0.41, Family::S2, SearchMode::Exhaustive, 1_000_000).unwrap();
        assert!(out.best.h_x2() <= 0.41 + 1e-12);
        assert_abs_diff_eq!(
            out.objective,
            out.best.h_x2() + ceil_log2(out.best.shape().0) as f64
        );
    }

    #[test]
    fn greedy_never_beats_exhaustive() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
        for _ in 0..20 {
            let w: Vec<f64> = (0..8).map(|_| rng.random::<f64>().powi(3) + 1e-4).collect();
            let s: f64 = w.iter().sum();
            let p = Pmf::from_probs(w.iter().map(|v| v / s).collect()).unwrap();
            let ex = search_separations(&p, 10.0, Family::S1, SearchMode::Exhaustive, 1_000_000)
                .unwrap();
            let gr =
                search_separations(&p, 10.0, Family::S1, SearchMode::Greedy, 1_000_000).unwrap();
            assert!(gr.objective >= ex.objective - 1e-12);
            assert!(!gr.optimal);
        }
    }

    #[test]
    fn budget_is_enforced() {
        let p = Pmf::from_probs(vec![1.0 / 12.0; 12]).unwrap();
        assert!(matches!(
            search_separations(&p, 10.0, Family::S1, SearchMode::Exhaustive, 100),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn lifting_preserves_measures() {
        let mut rows = Vec::new();
        for i in 0..5 {
            let a = 0.02 * (i + 1) as f64;
            rows.push(vec![a, 0.2 - a]);
        }
        let j = JointDistribution::from_matrix(rows).unwrap();
        let p = j.p_x();
        let out = search_separations(&p, 10.0, Family::S1, SearchMode::Exhaustive, 1000).unwrap();
        let lifted = lift_separation(&j, &out.best).unwrap();
        assert_eq!(lifted.nx(), 6);
        assert!(lifted.x_labels().contains(&PAD_LABEL.to_string()));
        for d in [Direction::YGivenX, Direction::XGivenY] {
            assert_abs_diff_eq!(
                conditional_entropy(&lifted, d),
                conditional_entropy(&j, d),
                epsilon = 1e-9
            );
        }
        assert_abs_diff_eq!(
            mutual_information(&lifted),
            mutual_information(&j),
            epsilon = 1e-9
        );
        assert_abs_diff_eq!(
            per_symbol_conditional_entropies(&lifted).sum,
            per_symbol_conditional_entropies(&j).sum,
            epsilon = 1e-9
        );

        let ident = Separation::row_major(1, 5, &p).unwrap();
        assert_eq!(lift_separation(&j, &ident).unwrap(), j);
    }

    #[test]
    fn spec_round_trip_and_validation() {
        let p = example2_px();
        let out =
            search_separations(&p, 0.41, Family::S1, SearchMode::Exhaustive, 1_000_000).unwrap();
        let spec = out.best.to_spec(&p.labels);
        let json = serde_json::to_value(&spec).unwrap();
        assert_eq!(json["shape"], serde_json::json!([6, 2]));
        assert_eq!(Separation::from_spec(&spec, &p).unwrap(), out.best);

        let bad = vec![vec![Some(0), Some(0)], vec![Some(1), Some(2)]];
        assert!(Separation::new(bad, &Pmf::from_probs(vec![0.25; 4]).unwrap()).is_err());
        let padded_composite = vec![vec![Some(0), Some(1)], vec![Some(2), None]];
        assert!(Separation::new(
            padded_composite,
            &Pmf::from_probs(vec![0.5, 0.25, 0.25]).unwrap()
        )
        .is_ok());
        let one_row =
            Separation::row_major(1, 4, &Pmf::from_probs(vec![0.25; 4]).unwrap()).unwrap();
        assert!(matches!(
            one_row.check_split_shape(),
            Err(Error::BadSeparation(_))
        ));
    }

    #[test]
    fn functional_grid() {
        // 6 symbols, 2 with mass: two rows of three
        let p = Pmf::from_probs(vec![0.0, 0.4, 0.0, 0.0, 0.6, 0.0]).unwrap();
        let s = functional_separation(&p).unwrap();
        assert_eq!(s.shape(), (2, 3));
        assert_eq!(s.functional_columns(&p).unwrap(), vec![Some(0), Some(0)]);
        let dense = Separation::row_major(2, 2, &Pmf::from_probs(vec![0.25; 4]).unwrap()).unwrap();
        assert_eq!(
            dense.functional_columns(&Pmf::from_probs(vec![0.25; 4]).unwrap()),
            Err(Error::NotFunctional)
        );
    }
}
