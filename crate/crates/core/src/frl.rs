//! Functional representation of Y given X.
//!
//! [`build_frl`] produces an auxiliary variable U that is independent of X and
//! such that Y is a deterministic function of (U, X). The construction draws
//! one uniform V on [0, 1) and splits the unit interval at the union of all
//! conditional CDF breakpoints of `P(Y | X = x)`; U is the index of the piece
//! containing V, and `Y = F_x^{-1}(V)` for the observed x.
//!
//! [`build_efrl`] extends U with a revelation component T that equals X with
//! probability `α = ε / H(X)` and an erasure symbol otherwise, which makes
//! `I(U; X) = ε` exactly.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::dist::{
    entropy, entropy_bits, is_deterministic_function, mutual_information, Direction,
    JointDistribution, JointTable,
};
use crate::error::{Error, Result};

/// Breakpoints closer than this are merged.
pub const BREAKPOINT_TOL: f64 = 1e-12;

/// Tolerance on leakage targets.
const EPS_TOL: f64 = 1e-9;

/// Two independent random streams derived from one seed: one for the
/// uniform draw behind U, one for the revelation coin.
#[derive(Debug, Clone)]
pub struct EncoderRng {
    pub cell: ChaCha8Rng,
    pub coin: ChaCha8Rng,
}

impl EncoderRng {
    pub fn from_seed(seed: u64) -> Self {
        let mut cell = ChaCha8Rng::seed_from_u64(seed);
        let mut coin = ChaCha8Rng::seed_from_u64(seed);
        cell.set_stream(0);
        coin.set_stream(1);
        Self { cell, coin }
    }
}

fn draw_index<R: Rng + ?Sized>(weights: &[(usize, f64)], rng: &mut R) -> usize {
    let r: f64 = rng.random();
    let mut acc = 0.0;
    for &(idx, p) in weights {
        acc += p;
        if r < acc {
            return idx;
        }
    }
    weights
        .last()
        .map(|&(idx, _)| idx)
        .expect("non-empty sampler")
}

/// Size bound on an auxiliary alphabet together with the realized size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CardinalityCertificate {
    pub bound: u64,
    pub actual: u64,
    /// X is a deterministic function of Y, so the tighter bound applies.
    pub functional_case: bool,
}

impl CardinalityCertificate {
    pub fn holds(&self) -> bool {
        self.actual <= self.bound
    }
}

fn support_sizes(j: &JointDistribution) -> (u64, u64) {
    let sx = j.p_x().support_size() as u64;
    let sy = j.p_y().support_size() as u64;
    (sx, sy)
}

/// `|X|(|Y|-1)+1`, or `|Y|-|X|+1` on the supports when X = f(Y).
fn frl_bound(j: &JointDistribution) -> (u64, bool) {
    if is_deterministic_function(j, Direction::XGivenY) {
        let (sx, sy) = support_sizes(j);
        (sy + 1 - sx, true)
    } else {
        ((j.nx() * (j.ny() - 1) + 1) as u64, false)
    }
}

/// Output of the functional representation construction.
#[derive(Debug, Clone, Serialize)]
pub struct FrlChannel {
    x_labels: Vec<String>,
    y_labels: Vec<String>,
    u_labels: Vec<String>,
    u_pmf: Vec<f64>,
    /// Half-open pieces `[start, end)` of the unit interval, one per U symbol.
    cells: Vec<[f64; 2]>,
    /// `decode_map[u][x]`; `None` when `P_X(x) = 0`.
    decode_map: Vec<Vec<Option<usize>>>,
    /// `cond_sampler[x][y]`: `P(U = u | X = x, Y = y)` as sparse `(u, p)`.
    cond_sampler: Vec<Vec<Vec<(usize, f64)>>>,
    #[serde(skip)]
    functional_case: bool,
}

pub fn build_frl(j: &JointDistribution) -> Result<FrlChannel> {
    let (nx, ny) = (j.nx(), j.ny());
    let conditionals: Vec<Option<Vec<f64>>> = (0..nx).map(|x| j.y_given_x(x)).collect();
    if conditionals.iter().all(Option::is_none) {
        return Err(Error::DegenerateJoint);
    }
    let cdfs: Vec<Option<Vec<f64>>> = conditionals
        .iter()
        .map(|c| {
            c.as_ref().map(|p| {
                p.iter()
                    .scan(0.0, |acc, &q| {
                        *acc += q;
                        Some(*acc)
                    })
                    .collect()
            })
        })
        .collect();

    let mut points: Vec<f64> = cdfs
        .iter()
        .flatten()
        .flat_map(|cdf| cdf[..ny - 1].iter().copied())
        .filter(|&b| b > BREAKPOINT_TOL && b < 1.0 - BREAKPOINT_TOL)
        .collect();
    points.sort_by(f64::total_cmp);
    let mut edges = vec![0.0];
    for b in points {
        if b - edges.last().unwrap() > BREAKPOINT_TOL {
            edges.push(b);
        }
    }
    edges.push(1.0);

    let cells: Vec<[f64; 2]> = edges.windows(2).map(|w| [w[0], w[1]]).collect();
    let u_pmf: Vec<f64> = cells.iter().map(|c| c[1] - c[0]).collect();

    let decode_map: Vec<Vec<Option<usize>>> = cells
        .iter()
        .map(|c| {
            let mid = 0.5 * (c[0] + c[1]);
            cdfs.iter()
                .zip(&conditionals)
                .map(|(cdf, cond)| {
                    let (cdf, cond) = (cdf.as_ref()?, cond.as_ref()?);
                    (0..ny)
                        .find(|&y| cond[y] > 0.0 && cdf[y] > mid)
                        .or_else(|| (0..ny).rev().find(|&y| cond[y] > 0.0))
                })
                .collect()
        })
        .collect();

    let mut cond_sampler = vec![vec![Vec::new(); ny]; nx];
    for (x, y, _) in j.support() {
        let cells_for: Vec<(usize, f64)> = (0..cells.len())
            .filter(|&u| decode_map[u][x] == Some(y))
            .map(|u| (u, u_pmf[u]))
            .collect();
        let total: f64 = cells_for.iter().map(|&(_, p)| p).sum();
        if total <= 0.0 {
            return Err(Error::Resolution { x, y });
        }
        cond_sampler[x][y] = cells_for.into_iter().map(|(u, p)| (u, p / total)).collect();
    }

    Ok(FrlChannel {
        x_labels: j.x_labels().to_vec(),
        y_labels: j.y_labels().to_vec(),
        u_labels: (0..cells.len()).map(|u| format!("u{u}")).collect(),
        u_pmf,
        cells,
        decode_map,
        cond_sampler,
        functional_case: is_deterministic_function(j, Direction::XGivenY),
    })
}

impl FrlChannel {
    pub fn num_symbols(&self) -> usize {
        self.u_pmf.len()
    }

    pub fn u_pmf(&self) -> &[f64] {
        &self.u_pmf
    }

    pub fn u_labels(&self) -> &[String] {
        &self.u_labels
    }

    pub fn cells(&self) -> &[[f64; 2]] {
        &self.cells
    }

    pub fn entropy(&self) -> f64 {
        entropy_bits(self.u_pmf.iter().copied())
    }

    /// The y recovered from `(u, x)`; `None` outside the support.
    pub fn decode(&self, u: usize, x: usize) -> Option<usize> {
        self.decode_map.get(u)?.get(x).copied().flatten()
    }

    pub fn cond_sampler(&self, x: usize, y: usize) -> Result<&[(usize, f64)]> {
        match self.cond_sampler.get(x).and_then(|r| r.get(y)) {
            Some(s) if !s.is_empty() => Ok(s),
            _ => Err(Error::ZeroMassPair { x, y }),
        }
    }

    pub fn sample_u<R: Rng + ?Sized>(&self, x: usize, y: usize, rng: &mut R) -> Result<usize> {
        Ok(draw_index(self.cond_sampler(x, y)?, rng))
    }

    /// The `(X, Y, U)` joint induced by the channel.
    pub fn assembled_joint(&self, j: &JointDistribution) -> JointTable {
        let mut t = JointTable::zeros(vec![j.nx(), j.ny(), self.num_symbols()]);
        for (x, y, p) in j.support() {
            for &(u, q) in &self.cond_sampler[x][y] {
                t.add(&[x, y, u], p * q);
            }
        }
        t
    }

    /// Largest total-variation distance between `P(U | X = x)` and `P(U)`.
    pub fn max_independence_gap(&self, j: &JointDistribution) -> f64 {
        let t = self.assembled_joint(j);
        let p_x = j.p_x();
        let p_u = t.marginal(&[2]);
        let p_xu = t.marginal(&[0, 2]);
        let nu = self.num_symbols();
        (0..j.nx())
            .filter(|&x| p_x.probs[x] > 0.0)
            .map(|x| {
                0.5 * (0..nu)
                    .map(|u| (p_xu[x * nu + u] / p_x.probs[x] - p_u[u]).abs())
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    /// `Σ P(x, y, u) [y != decode(u, x)]`.
    pub fn decoding_error_mass(&self, j: &JointDistribution) -> f64 {
        j.support()
            .flat_map(|(x, y, p)| {
                self.cond_sampler[x][y]
                    .iter()
                    .filter(move |&&(u, _)| self.decode(u, x) != Some(y))
                    .map(move |&(_, q)| p * q)
            })
            .sum()
    }

    pub fn cardinality_certificate(&self, j: &JointDistribution) -> CardinalityCertificate {
        let (bound, functional_case) = frl_bound(j);
        CardinalityCertificate {
            bound,
            actual: self.num_symbols() as u64,
            functional_case,
        }
    }

    pub fn is_functional_case(&self) -> bool {
        self.functional_case
    }

    pub fn to_json(&self) -> serde_json::Value {
        let decode: Vec<Vec<Option<&str>>> = self
            .decode_map
            .iter()
            .map(|row| {
                row.iter()
                    .map(|y| y.map(|y| self.y_labels[y].as_str()))
                    .collect()
            })
            .collect();
        serde_json::json!({
            "x_labels": self.x_labels,
            "u_labels": self.u_labels,
            "u_pmf": self.u_pmf,
            "cells": self.cells,
            "decode_map": decode,
        })
    }
}

/// Whether a leakage target lies in the range `ε < I(X;Y)` or beyond it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LeakageRegime {
    BelowMutualInformation,
    UpToEntropy,
}

/// Auxiliary variable `U = (Ũ, T)` with `I(U; X) = ε`.
#[derive(Debug, Clone, Serialize)]
pub struct EfrlChannel {
    base: FrlChannel,
    eps: f64,
    alpha: f64,
    regime: LeakageRegime,
    /// X labels followed by the erasure symbol.
    t_labels: Vec<String>,
    #[serde(skip)]
    p_x: Vec<f64>,
}

pub const ERASURE_LABEL: &str = "e";

pub fn build_efrl(j: &JointDistribution, eps: f64) -> Result<EfrlChannel> {
    let p_x = j.p_x();
    let h_x = entropy(&p_x);
    if eps.is_nan() || eps < 0.0 {
        return Err(Error::EpsOutOfRange { eps, max: h_x });
    }
    if h_x <= EPS_TOL && eps > EPS_TOL {
        return Err(Error::DegenerateX(eps));
    }
    if eps > h_x + EPS_TOL {
        return Err(Error::EpsOutOfRange { eps, max: h_x });
    }
    // below tolerance, X is constant and any target is zero
    let eps = if h_x <= EPS_TOL { 0.0 } else { eps.min(h_x) };
    let alpha = if eps == 0.0 {
        0.0
    } else {
        (eps / h_x).min(1.0)
    };
    let regime = if eps < mutual_information(j) {
        LeakageRegime::BelowMutualInformation
    } else {
        LeakageRegime::UpToEntropy
    };
    let mut t_labels = j.x_labels().to_vec();
    t_labels.push(ERASURE_LABEL.to_string());
    Ok(EfrlChannel {
        base: build_frl(j)?,
        eps,
        alpha,
        regime,
        t_labels,
        p_x: p_x.probs,
    })
}

impl EfrlChannel {
    pub fn base(&self) -> &FrlChannel {
        &self.base
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn regime(&self) -> LeakageRegime {
        self.regime
    }

    fn t_size(&self) -> usize {
        self.p_x.len() + 1
    }

    fn erasure(&self) -> usize {
        self.p_x.len()
    }

    /// Size of the composite alphabet `Ũ x T`.
    pub fn num_symbols(&self) -> usize {
        self.base.num_symbols() * self.t_size()
    }

    pub fn compose(&self, u_base: usize, t: usize) -> usize {
        u_base * self.t_size() + t
    }

    /// Splits a composite symbol into `(ũ, t)`.
    pub fn split(&self, u: usize) -> (usize, usize) {
        (u / self.t_size(), u % self.t_size())
    }

    pub fn t_pmf(&self) -> Vec<f64> {
        let mut t: Vec<f64> = self.p_x.iter().map(|p| self.alpha * p).collect();
        t.push(1.0 - self.alpha);
        t
    }

    pub fn u_pmf(&self) -> Vec<f64> {
        let t = self.t_pmf();
        self.base
            .u_pmf()
            .iter()
            .flat_map(|&pu| t.iter().map(move |&pt| pu * pt))
            .collect()
    }

    pub fn entropy(&self) -> f64 {
        entropy_bits(self.u_pmf())
    }

    pub fn decode(&self, u: usize, x: usize) -> Option<usize> {
        let (ub, _) = self.split(u);
        self.base.decode(ub, x)
    }

    /// `P(U | X = x, Y = y)` as sparse `(u, p)`.
    pub fn cond_sampler(&self, x: usize, y: usize) -> Result<Vec<(usize, f64)>> {
        let base = self.base.cond_sampler(x, y)?;
        let mut out = Vec::with_capacity(base.len() * 2);
        for &(ub, q) in base {
            if self.alpha > 0.0 {
                out.push((self.compose(ub, x), q * self.alpha));
            }
            if self.alpha < 1.0 {
                out.push((self.compose(ub, self.erasure()), q * (1.0 - self.alpha)));
            }
        }
        Ok(out)
    }

    pub fn sample_u(&self, x: usize, y: usize, rng: &mut EncoderRng) -> Result<usize> {
        let ub = self.base.sample_u(x, y, &mut rng.cell)?;
        let reveal = rng.coin.random::<f64>() < self.alpha;
        Ok(self.compose(ub, if reveal { x } else { self.erasure() }))
    }

    /// The `(X, Y, U)` joint with U flattened to the composite index.
    pub fn assembled_joint(&self, j: &JointDistribution) -> JointTable {
        let mut t = JointTable::zeros(vec![j.nx(), j.ny(), self.num_symbols()]);
        for (x, y, p) in j.support() {
            for (u, q) in self.cond_sampler(x, y).expect("support pair") {
                t.add(&[x, y, u], p * q);
            }
        }
        t
    }

    pub fn cardinality_certificate(&self, j: &JointDistribution) -> CardinalityCertificate {
        let (bound, functional_case) = frl_bound(j);
        CardinalityCertificate {
            bound: bound * (j.nx() as u64 + 1),
            actual: self.num_symbols() as u64,
            functional_case,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "base": self.base.to_json(),
            "eps": self.eps,
            "alpha": self.alpha,
            "regime": self.regime,
            "t_labels": self.t_labels,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn leakage(t: &JointTable) -> f64 {
        t.mutual_information(&[0], &[2])
    }

    #[test]
    fn independent_source_copies_y() {
        let j = JointDistribution::from_matrix(vec![vec![0.25, 0.25], vec![0.25, 0.25]]).unwrap();
        let ch = build_frl(&j).unwrap();
        assert_eq!(ch.cells(), &[[0.0, 0.5], [0.5, 1.0]]);
        assert_eq!(ch.u_pmf(), &[0.5, 0.5]);
        for x in 0..2 {
            assert_eq!(ch.decode(0, x), Some(0));
            assert_eq!(ch.decode(1, x), Some(1));
        }
    }

    #[test]
    fn two_cell_hand_example() {
        // X uniform; P(Y|X=0) = (1, 0), P(Y|X=1) = (0.5, 0.5).
        let j = JointDistribution::from_matrix(vec![vec![0.5, 0.0], vec![0.25, 0.25]]).unwrap();
        let ch = build_frl(&j).unwrap();
        assert_eq!(ch.num_symbols(), 2);
        assert_eq!(ch.decode(0, 0), Some(0));
        assert_eq!(ch.decode(1, 0), Some(0));
        assert_eq!(ch.decode(0, 1), Some(0));
        assert_eq!(ch.decode(1, 1), Some(1));
        // hand enumeration: P(u|x=0) = (0.5, 0.5) = P(u|x=1)
        assert_eq!(ch.cond_sampler(0, 0).unwrap(), &[(0, 0.5), (1, 0.5)]);
        assert_eq!(ch.cond_sampler(1, 0).unwrap(), &[(0, 1.0)]);
        assert_eq!(ch.cond_sampler(1, 1).unwrap(), &[(1, 1.0)]);
        assert_abs_diff_eq!(leakage(&ch.assembled_joint(&j)), 0.0, epsilon = 1e-12);
        assert_eq!(
            ch.cond_sampler(0, 1),
            Err(Error::ZeroMassPair { x: 0, y: 1 })
        );
    }

    #[test]
    fn functional_cardinality() {
        // |Y| = 4, X = f(Y) with |X| = 2.
        let j = JointDistribution::from_matrix(vec![
            vec![0.1, 0.3, 0.0, 0.0],
            vec![0.0, 0.0, 0.2, 0.4],
        ])
        .unwrap();
        let ch = build_frl(&j).unwrap();
        let cert = ch.cardinality_certificate(&j);
        assert!(cert.functional_case);
        assert_eq!(cert.bound, 3);
        assert!(cert.holds());
    }

    #[test]
    fn efrl_bounds_and_extremes() {
        let j = JointDistribution::from_matrix(vec![vec![0.25, 0.25], vec![0.25, 0.25]]).unwrap();
        let ch = build_efrl(&j, 0.3).unwrap();
        let cert = ch.cardinality_certificate(&j);
        assert_eq!(cert.bound, 9);
        assert!(cert.holds());

        let copy = JointDistribution::from_matrix(vec![vec![0.5, 0.0], vec![0.0, 0.5]]).unwrap();
        assert_eq!(
            build_efrl(&copy, 0.0)
                .unwrap()
                .cardinality_certificate(&copy)
                .bound,
            3
        );

        let zero = build_efrl(&copy, 0.0).unwrap();
        assert_eq!(zero.alpha(), 0.0);
        assert_abs_diff_eq!(leakage(&zero.assembled_joint(&copy)), 0.0, epsilon = 1e-12);

        let full = build_efrl(&copy, 1.0).unwrap();
        assert_eq!(full.alpha(), 1.0);
        assert_abs_diff_eq!(leakage(&full.assembled_joint(&copy)), 1.0, epsilon = 1e-12);
        assert_eq!(full.regime(), LeakageRegime::UpToEntropy);
    }

    #[test]
    fn efrl_exact_leakage_on_copy() {
        let copy = JointDistribution::from_matrix(vec![vec![0.5, 0.0], vec![0.0, 0.5]]).unwrap();
        let ch = build_efrl(&copy, 0.3).unwrap();
        assert_abs_diff_eq!(ch.alpha(), 0.3, epsilon = 1e-15);
        let t = ch.assembled_joint(&copy);
        assert_abs_diff_eq!(leakage(&t), 0.3, epsilon = 1e-9);
        assert!(t.conditional_entropy(&[1], &[0, 2]) <= 1e-9);
    }

    #[test]
    fn efrl_errors() {
        let j = JointDistribution::from_matrix(vec![vec![0.25, 0.25], vec![0.25, 0.25]]).unwrap();
        assert!(matches!(
            build_efrl(&j, -0.1),
            Err(Error::EpsOutOfRange { .. })
        ));
        assert!(matches!(
            build_efrl(&j, 1.5),
            Err(Error::EpsOutOfRange { .. })
        ));
        let constant = JointDistribution::from_matrix(vec![vec![0.5, 0.5]]).unwrap();
        assert_eq!(
            build_efrl(&constant, 0.2).unwrap_err(),
            Error::DegenerateX(0.2)
        );
        assert!(build_efrl(&constant, 0.0).is_ok());
    }

    #[test]
    fn sampling_is_reproducible_and_degenerate_cells_are_certain() {
        let j = JointDistribution::from_matrix(vec![vec![0.5, 0.0], vec![0.25, 0.25]]).unwrap();
        let ch = build_frl(&j).unwrap();
        for _ in 0..20 {
            let mut rng = ChaCha8Rng::seed_from_u64(7);
            assert_eq!(ch.sample_u(1, 1, &mut rng).unwrap(), 1);
        }
        let draw = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..64)
                .map(|_| ch.sample_u(0, 0, &mut rng).unwrap())
                .collect::<Vec<_>>()
        };
        assert_eq!(draw(42), draw(42));
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(
            ch.sample_u(0, 1, &mut rng),
            Err(Error::ZeroMassPair { .. })
        ));
    }

    #[test]
    fn sampling_frequencies_match() {
        let j = JointDistribution::from_matrix(vec![vec![0.3, 0.2], vec![0.1, 0.4]]).unwrap();
        let ch = build_frl(&j).unwrap();
        let sampler = ch.cond_sampler(1, 1).unwrap().to_vec();
        let n = 100_000;
        let mut counts = vec![0usize; ch.num_symbols()];
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..n {
            counts[ch.sample_u(1, 1, &mut rng).unwrap()] += 1;
        }
        for (u, p) in sampler {
            let sigma = (p * (1.0 - p) / n as f64).sqrt();
            let freq = counts[u] as f64 / n as f64;
            assert!(
                (freq - p).abs() <= 3.0 * sigma + 1e-12,
                "u={u} freq={freq} p={p}"
            );
        }
    }

    #[test]
    fn efrl_streams_are_independent_and_seeded() {
        let copy = JointDistribution::from_matrix(vec![vec![0.5, 0.0], vec![0.0, 0.5]]).unwrap();
        let ch = build_efrl(&copy, 0.5).unwrap();
        let run = || {
            let mut rng = EncoderRng::from_seed(9);
            (0..32)
                .map(|_| ch.sample_u(0, 0, &mut rng).unwrap())
                .collect::<Vec<_>>()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn channel_json_has_tables() {
        let j = JointDistribution::from_matrix(vec![vec![0.5, 0.0], vec![0.25, 0.25]]).unwrap();
        let v = build_efrl(&j, 0.5).unwrap().to_json();
        assert_eq!(v["base"]["cells"][1][0], 0.5);
        assert_eq!(v["base"]["decode_map"][1][1], "y1");
        assert_eq!(v["t_labels"][2], "e");
    }
}
