//! Keyed two-part codecs and their exact leakage audit.
//!
//! Every codeword has the layout `[pad field][prefix field(s)]`: a fixed-width
//! one-time-pad field carrying the private part, then prefix-coded fields.
//! The output set is therefore prefix-free and parses positionally.
//!
//! * [`build_eps_private`]: pad X with a key of size `|X|`, then code
//!   `U = (Ũ, T)` from the extended representation; leaks exactly ε.
//! * [`build_bounded_split`]: on a separation `X = (X1, X2)`, pad one factor,
//!   Huffman-code the other in the clear, then code Ũ; leaks exactly the
//!   entropy of the revealed factor, with a key smaller than `|X|`.
//! * [`build_perfect_functional`]: when X2 is a function of X1, pad X1 only
//!   and code Ũ; leaks nothing with key size `|X1|`.
//!
//! The encoder observes the source pair `(x, y)` and is stochastic only
//! through the choice of U.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::coding::{huffman_build, Bitstring, OneTimePad, PrefixCode};
use crate::dist::{entropy, entropy_bits, JointDistribution};
use crate::error::{Error, Result};
use crate::frl::{build_efrl, build_frl, EfrlChannel, EncoderRng, FrlChannel};
use crate::separation::{lift_separation, Separation, SeparationSpec};

/// Default cap on enumerated `(x, y, w, u)` atoms.
pub const DEFAULT_ATOM_BUDGET: u64 = 10_000_000;

const THRESHOLD_TOL: f64 = 1e-9;

/// How the auxiliary variable U is written.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CodingMode {
    Huffman,
    FixedLength,
}

/// Which factor of the separation goes through the one-time pad.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SplitVariant {
    /// Pad X2 (key size `|X2|`), reveal X1.
    OtpX2,
    /// Pad X1 (key size `|X1|`), reveal X2.
    OtpX1,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SchemeKind {
    EpsPrivate { eps: f64 },
    BoundedSplit { eps: f64, variant: SplitVariant },
    PerfectFunctional,
}

#[derive(Debug, Clone)]
enum Aux {
    Frl(FrlChannel),
    Efrl(EfrlChannel),
}

impl Aux {
    fn u_pmf(&self) -> Vec<f64> {
        match self {
            Aux::Frl(c) => c.u_pmf().to_vec(),
            Aux::Efrl(c) => c.u_pmf(),
        }
    }

    fn decode(&self, u: usize, x: usize) -> Option<usize> {
        match self {
            Aux::Frl(c) => c.decode(u, x),
            Aux::Efrl(c) => c.decode(u, x),
        }
    }

    fn cond_sampler(&self, x: usize, y: usize) -> Result<Vec<(usize, f64)>> {
        match self {
            Aux::Frl(c) => c.cond_sampler(x, y).map(<[_]>::to_vec),
            Aux::Efrl(c) => c.cond_sampler(x, y),
        }
    }

    fn sample(&self, x: usize, y: usize, rng: &mut EncoderRng) -> Result<usize> {
        match self {
            Aux::Frl(c) => c.sample_u(x, y, &mut rng.cell),
            Aux::Efrl(c) => c.sample_u(x, y, rng),
        }
    }

    fn labels(&self, x_labels: &[String]) -> Vec<String> {
        match self {
            Aux::Frl(c) => c.u_labels().to_vec(),
            Aux::Efrl(c) => (0..c.num_symbols())
                .map(|u| {
                    let (ub, t) = c.split(u);
                    let t = x_labels
                        .get(t)
                        .map_or(crate::frl::ERASURE_LABEL, String::as_str);
                    format!("{}|{t}", c.base().u_labels()[ub])
                })
                .collect(),
        }
    }

    fn num_symbols(&self) -> usize {
        match self {
            Aux::Frl(c) => c.num_symbols(),
            Aux::Efrl(c) => c.num_symbols(),
        }
    }
}

/// A built keyed encoder/decoder pair.
#[derive(Debug, Clone)]
pub struct CodecScheme {
    kind: SchemeKind,
    mode: CodingMode,
    original: JointDistribution,
    /// The joint the scheme codes: `original`, or its lift onto the grid.
    source: JointDistribution,
    /// Original X index to `source` X index.
    x_to_source: Vec<usize>,
    separation: Option<Separation>,
    functional_cols: Option<Vec<Option<usize>>>,
    key_size: usize,
    pad: OneTimePad,
    aux: Aux,
    u_code: PrefixCode,
    revealed_code: Option<PrefixCode>,
}

fn code_for(probs: &[f64], mode: CodingMode) -> Result<PrefixCode> {
    match mode {
        CodingMode::Huffman => huffman_build(probs),
        CodingMode::FixedLength => PrefixCode::fixed_length(probs),
    }
}

fn grid_index_map(j: &JointDistribution, sep: &Separation) -> Vec<usize> {
    let cols = sep.shape().1;
    let mut map = vec![0; j.nx()];
    for (r, row) in sep.grid().iter().enumerate() {
        for (c, cell) in row.iter().enumerate() {
            if let Some(x) = cell {
                map[*x] = r * cols + c;
            }
        }
    }
    map
}

/// Pads X over `Z_k`, `k` the support size of X, and codes the extended
/// representation `U = (Ũ, T)`. Zero-mass symbols never reach the encoder.
pub fn build_eps_private(j: &JointDistribution, eps: f64, mode: CodingMode) -> Result<CodecScheme> {
    let p_x = j.p_x();
    let live: Vec<usize> = (0..j.nx()).filter(|&x| p_x.probs[x] > 0.0).collect();
    let mut x_to_source = vec![usize::MAX; j.nx()];
    for (i, &x) in live.iter().enumerate() {
        x_to_source[x] = i;
    }
    let source = if live.len() == j.nx() {
        j.clone()
    } else {
        JointDistribution::new(
            live.iter().map(|&x| j.matrix()[x].clone()).collect(),
            live.iter().map(|&x| j.x_labels()[x].clone()).collect(),
            j.y_labels().to_vec(),
        )?
    };
    let channel = build_efrl(&source, eps)?;
    let u_code = code_for(&channel.u_pmf(), mode)?;
    Ok(CodecScheme {
        kind: SchemeKind::EpsPrivate { eps: channel.eps() },
        mode,
        original: j.clone(),
        source,
        x_to_source,
        separation: None,
        functional_cols: None,
        key_size: live.len(),
        pad: OneTimePad::new(live.len()),
        aux: Aux::Efrl(channel),
        u_code,
        revealed_code: None,
    })
}

/// Pads one factor of `separation`, reveals the other, and codes Ũ.
pub fn build_bounded_split(
    j: &JointDistribution,
    separation: &Separation,
    eps: f64,
    variant: SplitVariant,
    mode: CodingMode,
) -> Result<CodecScheme> {
    separation.check_split_shape()?;
    let (rows, cols) = separation.shape();
    let (required, key_size, revealed) = match variant {
        SplitVariant::OtpX2 => (separation.h_x1(), cols, separation.x1_pmf()),
        SplitVariant::OtpX1 => (separation.h_x2(), rows, separation.x2_pmf()),
    };
    if eps.is_nan() || eps < required - THRESHOLD_TOL {
        return Err(Error::ThresholdNotMet { eps, required });
    }
    let source = lift_separation(j, separation)?;
    let channel = build_frl(&source)?;
    Ok(CodecScheme {
        kind: SchemeKind::BoundedSplit { eps, variant },
        mode,
        original: j.clone(),
        x_to_source: grid_index_map(j, separation),
        source,
        separation: Some(separation.clone()),
        functional_cols: None,
        key_size,
        pad: OneTimePad::new(key_size),
        u_code: code_for(channel.u_pmf(), mode)?,
        aux: Aux::Frl(channel),
        revealed_code: Some(huffman_build(revealed)?),
    })
}

/// Pads X1 only, relying on X2 = f(X1), and codes Ũ.
pub fn build_perfect_functional(
    j: &JointDistribution,
    separation: &Separation,
    mode: CodingMode,
) -> Result<CodecScheme> {
    let cols_of = separation.functional_columns(&j.p_x())?;
    let source = lift_separation(j, separation)?;
    let channel = build_frl(&source)?;
    let key_size = separation.shape().0;
    Ok(CodecScheme {
        kind: SchemeKind::PerfectFunctional,
        mode,
        original: j.clone(),
        x_to_source: grid_index_map(j, separation),
        source,
        separation: Some(separation.clone()),
        functional_cols: Some(cols_of),
        key_size,
        pad: OneTimePad::new(key_size),
        u_code: code_for(channel.u_pmf(), mode)?,
        aux: Aux::Frl(channel),
        revealed_code: None,
    })
}

impl CodecScheme {
    pub fn kind(&self) -> SchemeKind {
        self.kind
    }

    pub fn mode(&self) -> CodingMode {
        self.mode
    }

    pub fn key_size(&self) -> usize {
        self.key_size
    }

    pub fn separation(&self) -> Option<&Separation> {
        self.separation.as_ref()
    }

    pub fn joint(&self) -> &JointDistribution {
        &self.original
    }

    /// The joint actually coded (lifted onto the separation grid if any).
    pub fn source(&self) -> &JointDistribution {
        &self.source
    }

    pub fn u_code(&self) -> &PrefixCode {
        &self.u_code
    }

    pub fn revealed_code(&self) -> Option<&PrefixCode> {
        self.revealed_code.as_ref()
    }

    /// Number of U symbols (composite for the ε-private scheme).
    pub fn aux_alphabet_size(&self) -> usize {
        self.aux.num_symbols()
    }

    pub fn aux_entropy(&self) -> f64 {
        entropy_bits(self.aux.u_pmf())
    }

    pub fn pad_width(&self) -> u32 {
        self.pad.width()
    }

    /// The leakage the construction is designed to have.
    pub fn designed_leakage(&self) -> f64 {
        match (self.kind, &self.separation) {
            (SchemeKind::EpsPrivate { eps }, _) => eps,
            (
                SchemeKind::BoundedSplit {
                    variant: SplitVariant::OtpX2,
                    ..
                },
                Some(s),
            ) => s.h_x1(),
            (
                SchemeKind::BoundedSplit {
                    variant: SplitVariant::OtpX1,
                    ..
                },
                Some(s),
            ) => s.h_x2(),
            _ => 0.0,
        }
    }

    fn grid_cols(&self) -> usize {
        self.separation.as_ref().map_or(1, |s| s.shape().1)
    }

    fn check_input(&self, x: usize, y: usize, w: usize) -> Result<usize> {
        if x >= self.original.nx() {
            return Err(Error::UnknownSymbol(x));
        }
        if y >= self.original.ny() {
            return Err(Error::UnknownSymbol(y));
        }
        if w >= self.key_size {
            return Err(Error::KeyOutOfRange {
                key: w,
                key_size: self.key_size,
            });
        }
        if self.original.prob(x, y) <= 0.0 {
            return Err(Error::ZeroMassPair { x, y });
        }
        Ok(self.x_to_source[x])
    }

    /// Encoder randomness for a source pair: the U values with their
    /// conditional probabilities.
    pub fn randomness(&self, x: usize, y: usize) -> Result<Vec<(usize, f64)>> {
        match self.x_to_source.get(x) {
            Some(&xs) if xs != usize::MAX => self.aux.cond_sampler(xs, y),
            Some(_) => Err(Error::ZeroMassPair { x, y }),
            None => Err(Error::UnknownSymbol(x)),
        }
    }

    /// Deterministic part of the encoder once U has been drawn.
    pub fn encode_with(&self, x: usize, y: usize, w: usize, u: usize) -> Result<Bitstring> {
        let xs = self.check_input(x, y, w)?;
        let cols = self.grid_cols();
        let (x1, x2) = (xs / cols, xs % cols);
        let mut out = Bitstring::new();
        match self.kind {
            SchemeKind::EpsPrivate { .. } => self.pad.emit(xs, w, &mut out)?,
            SchemeKind::BoundedSplit {
                variant: SplitVariant::OtpX2,
                ..
            } => {
                self.pad.emit(x2, w, &mut out)?;
                self.revealed_code.as_ref().unwrap().encode(x1, &mut out)?;
            }
            SchemeKind::BoundedSplit {
                variant: SplitVariant::OtpX1,
                ..
            } => {
                self.pad.emit(x1, w, &mut out)?;
                self.revealed_code.as_ref().unwrap().encode(x2, &mut out)?;
            }
            SchemeKind::PerfectFunctional => self.pad.emit(x1, w, &mut out)?,
        }
        self.u_code.encode(u, &mut out)?;
        Ok(out)
    }

    /// Encodes the source pair `(x, y)` under key `w`.
    pub fn encode(&self, x: usize, y: usize, w: usize, rng: &mut EncoderRng) -> Result<Bitstring> {
        let xs = self.check_input(x, y, w)?;
        let u = self.aux.sample(xs, y, rng)?;
        self.encode_with(x, y, w, u)
    }

    /// Recovers y from a codeword and the key.
    pub fn decode(&self, bits: &Bitstring, w: usize) -> Result<usize> {
        if w >= self.key_size {
            return Err(Error::KeyOutOfRange {
                key: w,
                key_size: self.key_size,
            });
        }
        let cols = self.grid_cols();
        let (padded, cursor) = self.pad.parse(bits, 0, w)?;
        let (xs, cursor) = match self.kind {
            SchemeKind::EpsPrivate { .. } => (padded, cursor),
            SchemeKind::BoundedSplit { variant, .. } => {
                let (revealed, cursor) = self
                    .revealed_code
                    .as_ref()
                    .unwrap()
                    .prefix_decode(bits, cursor)?;
                match variant {
                    SplitVariant::OtpX2 => (revealed * cols + padded, cursor),
                    SplitVariant::OtpX1 => (padded * cols + revealed, cursor),
                }
            }
            SchemeKind::PerfectFunctional => {
                let x2 = self.functional_cols.as_ref().unwrap()[padded].ok_or_else(|| {
                    Error::MalformedCodeword(format!("X1 = {padded} has no mass"))
                })?;
                (padded * cols + x2, cursor)
            }
        };
        let (u, cursor) = self.u_code.prefix_decode(bits, cursor)?;
        if cursor != bits.len() {
            return Err(Error::MalformedCodeword(format!(
                "{} trailing bits",
                bits.len() - cursor
            )));
        }
        self.aux
            .decode(u, xs)
            .ok_or_else(|| Error::MalformedCodeword(format!("no y for u = {u} at x = {xs}")))
    }

    /// Exact atom count of [`audit`].
    pub fn atom_count(&self) -> u64 {
        self.original
            .support()
            .map(|(x, y, _)| self.randomness(x, y).map_or(0, |r| r.len() as u64))
            .sum::<u64>()
            * self.key_size as u64
    }

    pub fn descriptor(&self, seed: Option<u64>) -> SchemeDescriptor {
        let x_labels = self.source.x_labels();
        let u_labels = self.aux.labels(x_labels);
        let revealed_labels: Vec<String> = match (&self.separation, self.kind) {
            (
                Some(s),
                SchemeKind::BoundedSplit {
                    variant: SplitVariant::OtpX2,
                    ..
                },
            ) => (0..s.shape().0).map(|i| format!("x1={i}")).collect(),
            (Some(s), _) => (0..s.shape().1).map(|i| format!("x2={i}")).collect(),
            _ => Vec::new(),
        };
        let (eps, variant) = match self.kind {
            SchemeKind::EpsPrivate { eps } => (Some(eps), None),
            SchemeKind::BoundedSplit { eps, variant } => (Some(eps), Some(variant)),
            SchemeKind::PerfectFunctional => (None, None),
        };
        SchemeDescriptor {
            kind: match self.kind {
                SchemeKind::EpsPrivate { .. } => "eps",
                SchemeKind::BoundedSplit { .. } => "split",
                SchemeKind::PerfectFunctional => "functional",
            }
            .to_string(),
            eps,
            variant,
            key_size: self.key_size,
            pad_width: self.pad.width(),
            u_mode: self.mode,
            separation: self
                .separation
                .as_ref()
                .map(|s| s.to_spec(self.original.x_labels())),
            seed,
            u_code: self.u_code.table(&u_labels),
            revealed_code: self
                .revealed_code
                .as_ref()
                .map(|c| c.table(&revealed_labels)),
        }
    }
}

/// Everything needed to rebuild a scheme and reproduce its audit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeDescriptor {
    pub kind: String,
    pub eps: Option<f64>,
    pub variant: Option<SplitVariant>,
    pub key_size: usize,
    pub pad_width: u32,
    pub u_mode: CodingMode,
    pub separation: Option<SeparationSpec>,
    pub seed: Option<u64>,
    /// `(symbol label, codeword)` pairs.
    pub u_code: Vec<(String, String)>,
    pub revealed_code: Option<Vec<(String, String)>>,
}

/// Exact leakage and length statistics of a scheme.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LeakageAudit {
    /// `I(C; X)` in bits.
    pub exact_leakage: f64,
    pub designed_leakage: f64,
    /// `E[L(C(Y, w))]` for each key value w.
    pub per_key_expected_length: Vec<f64>,
    pub expected_length: f64,
    /// `H(C)`.
    pub codeword_entropy: f64,
    pub atom_count: u64,
    pub distinct_codewords: usize,
    /// Atoms whose codeword failed to decode to their y.
    pub decode_failures: u64,
    pub max_codeword_prob: f64,
    pub max_x_prob: f64,
}

impl LeakageAudit {
    pub fn lossless(&self) -> bool {
        self.decode_failures == 0
    }

    pub fn per_key_spread(&self) -> f64 {
        let max = self
            .per_key_expected_length
            .iter()
            .copied()
            .fold(f64::MIN, f64::max);
        let min = self
            .per_key_expected_length
            .iter()
            .copied()
            .fold(f64::MAX, f64::min);
        max - min
    }
}

/// Enumerates every `(x, y, w, u)` atom, decoding each codeword and
/// accumulating the joint of `(C, X)`.
pub fn audit(scheme: &CodecScheme, budget: u64) -> Result<LeakageAudit> {
    let needed = scheme.atom_count();
    if needed > budget {
        return Err(Error::BudgetExceeded {
            needed: needed as u128,
            budget: budget as u128,
        });
    }
    let j = &scheme.original;
    let m = scheme.key_size;
    let pw = 1.0 / m as f64;

    let mut ids: HashMap<Bitstring, usize> = HashMap::new();
    // per codeword: (mass by x, sparse)
    let mut by_x: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut per_key = vec![0.0; m];
    let mut decode_failures = 0u64;
    let mut atoms = 0u64;

    for (x, y, pxy) in j.support() {
        let choices = scheme.randomness(x, y)?;
        for w in 0..m {
            for &(u, q) in &choices {
                let mass = pxy * q * pw;
                let c = scheme.encode_with(x, y, w, u)?;
                atoms += 1;
                per_key[w] += pxy * q * c.len() as f64;
                if scheme.decode(&c, w).ok() != Some(y) {
                    decode_failures += 1;
                }
                let id = match ids.get(&c) {
                    Some(&id) => id,
                    None => {
                        ids.insert(c, by_x.len());
                        by_x.push(Vec::new());
                        by_x.len() - 1
                    }
                };
                match by_x[id].iter_mut().find(|(xx, _)| *xx == x) {
                    Some(slot) => slot.1 += mass,
                    None => by_x[id].push((x, mass)),
                }
            }
        }
    }

    let p_c: Vec<f64> = by_x
        .iter()
        .map(|v| v.iter().map(|(_, p)| p).sum())
        .collect();
    let h_c = entropy_bits(p_c.iter().copied());
    let h_cx = entropy_bits(by_x.iter().flatten().map(|&(_, p)| p));
    let p_x = j.p_x();
    let exact_leakage = (h_c + entropy(&p_x) - h_cx).max(0.0);
    Ok(LeakageAudit {
        exact_leakage,
        designed_leakage: scheme.designed_leakage(),
        expected_length: per_key.iter().sum::<f64>() * pw,
        per_key_expected_length: per_key,
        codeword_entropy: h_c,
        atom_count: atoms,
        distinct_codewords: by_x.len(),
        decode_failures,
        max_codeword_prob: p_c.iter().copied().fold(0.0, f64::max),
        max_x_prob: p_x.max_prob(),
    })
}

/// Plug-in estimate of `I(C; X)` from `samples` simulated transmissions.
pub fn monte_carlo_leakage(scheme: &CodecScheme, samples: usize, seed: u64) -> Result<f64> {
    let j = &scheme.original;
    let atoms: Vec<(usize, usize, f64)> = j.support().collect();
    let mut source_rng = ChaCha8Rng::seed_from_u64(seed);
    source_rng.set_stream(2);
    let mut enc_rng = EncoderRng::from_seed(seed);
    let mut joint: HashMap<(Bitstring, usize), u64> = HashMap::new();
    for _ in 0..samples {
        let r: f64 = source_rng.random();
        let mut acc = 0.0;
        let &(x, y, _) = atoms
            .iter()
            .find(|&&(_, _, p)| {
                acc += p;
                r < acc
            })
            .unwrap_or(atoms.last().unwrap());
        let w = source_rng.random_range(0..scheme.key_size);
        *joint
            .entry((scheme.encode(x, y, w, &mut enc_rng)?, x))
            .or_default() += 1;
    }
    let n = samples as f64;
    let mut p_c: HashMap<&Bitstring, f64> = HashMap::new();
    let mut p_x = vec![0.0; j.nx()];
    for ((c, x), &k) in &joint {
        *p_c.entry(c).or_default() += k as f64 / n;
        p_x[*x] += k as f64 / n;
    }
    let h_cx = entropy_bits(joint.values().map(|&k| k as f64 / n));
    Ok((entropy_bits(p_c.values().copied()) + entropy_bits(p_x) - h_cx).max(0.0))
}
