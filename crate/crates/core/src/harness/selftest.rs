use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use super::commands::evaluate_scheme;
use super::{Checker, ExperimentReport, VerdictKind, CHECK_TOL};
use crate::bounds::{bounds_report, check_remark4, summarize, BoundsOptions};
use crate::codec::{
    audit, build_bounded_split, build_eps_private, build_perfect_functional, CodingMode,
    SplitVariant, DEFAULT_ATOM_BUDGET,
};
use crate::coding::{
    huffman_build, huffman_build_largest_first, otp_decode, otp_encode, PrefixCode,
};
use crate::dist::{
    binary_entropy, entropy_bits, key_identity_residual, per_symbol_conditional_entropies,
    FourWayJoint, JointDistribution, JointTable,
};
use crate::error::Result;
use crate::frl::{build_efrl, build_frl};
use crate::instances::{
    example2_joint, random_functional_grid, random_functional_joint, random_joint,
    random_split_instance,
};
use crate::separation::{search_separations, Family, SearchMode};

/// Deliberate defects the self-test must catch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Fault {
    /// Huffman merges the two largest nodes instead of the two smallest.
    BrokenHuffman,
}

/// Case counts per suite.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SelftestSizes {
    pub joints: usize,
    pub split: usize,
    pub functional: usize,
    pub identity: usize,
    pub pmfs: usize,
    pub otp: usize,
    pub remark4: usize,
}

impl SelftestSizes {
    pub fn from_trials(t: usize) -> Self {
        let t = t.max(1);
        SelftestSizes {
            joints: t,
            split: t.div_ceil(4),
            functional: t.div_ceil(4),
            identity: t.div_ceil(2),
            pmfs: (5 * t).div_ceil(2),
            otp: t.div_ceil(2),
            remark4: 500 * t,
        }
    }
}

fn suite_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// The i-th shared instance: small generic joints, every third one with
/// X = f(Y).
fn joint_instances(seed: u64, count: usize) -> Vec<JointDistribution> {
    let mut rng = suite_rng(seed, 1);
    (0..count)
        .map(|i| {
            let nx = rng.random_range(1..=4);
            let ny = rng.random_range(1..=6);
            if i % 3 == 2 && ny >= nx {
                random_functional_joint(&mut rng, nx, ny)
            } else {
                random_joint(&mut rng, nx, ny)
            }
        })
        .collect()
}

fn eps_grid(h_x: f64) -> [f64; 4] {
    [0.0, 0.25 * h_x, 0.5 * h_x, h_x]
}

fn fail<E: std::fmt::Debug>(chk: &mut Checker, name: &str, kind: VerdictKind, case: usize, e: E) {
    chk.check(name, kind, false, || format!("case {case}: {e:?}"));
}

pub fn suite_frl(seed: u64, count: usize, chk: &mut Checker) {
    for (i, j) in joint_instances(seed, count).iter().enumerate() {
        let c = match build_frl(j) {
            Ok(c) => c,
            Err(e) => {
                fail(chk, "frl.build", VerdictKind::Lossless, i, e);
                continue;
            }
        };
        let t = c.assembled_joint(j);
        chk.le(
            "frl.independence",
            VerdictKind::Leakage,
            t.mutual_information(&[2], &[0]),
            0.0,
            || format!("case {i}: I(U;X)"),
        );
        chk.le(
            "frl.decodability",
            VerdictKind::Lossless,
            c.decoding_error_mass(j),
            0.0,
            || format!("case {i}: P(Y != f(U,X))"),
        );
        let cert = c.cardinality_certificate(j);
        chk.check("frl.cardinality", VerdictKind::Bound, cert.holds(), || {
            format!("case {i}: {cert:?}")
        });
        let general = (j.nx() * (j.ny() - 1) + 1) as u64;
        chk.check(
            "frl.cardinality_general",
            VerdictKind::Bound,
            cert.actual <= general,
            || format!("case {i}: |U| = {} > {general}", cert.actual),
        );
        let sum = per_symbol_conditional_entropies(j).sum;
        chk.le("frl.entropy", VerdictKind::Bound, c.entropy(), sum, || {
            format!("case {i}: H(U) vs sum")
        });
    }
}

pub fn suite_efrl(seed: u64, count: usize, chk: &mut Checker) {
    for (i, j) in joint_instances(seed, count).iter().enumerate() {
        let s = summarize(j);
        for eps in eps_grid(s.h_x) {
            let c = match build_efrl(j, eps) {
                Ok(c) => c,
                Err(e) => {
                    fail(chk, "efrl.build", VerdictKind::Lossless, i, e);
                    continue;
                }
            };
            let t = c.assembled_joint(j);
            chk.close(
                "efrl.leakage",
                VerdictKind::Leakage,
                t.mutual_information(&[2], &[0]),
                eps,
                || format!("case {i}: I(U;X) at eps {eps}"),
            );
            chk.le(
                "efrl.decodability",
                VerdictKind::Lossless,
                t.conditional_entropy(&[1], &[0, 2]),
                0.0,
                || format!("case {i}: H(Y|U,X)"),
            );
            let cert = c.cardinality_certificate(j);
            chk.check("efrl.cardinality", VerdictKind::Bound, cert.holds(), || {
                format!("case {i}: {cert:?}")
            });
            let h_alpha = binary_entropy(c.alpha()).unwrap_or(f64::NAN);
            chk.le(
                "efrl.entropy",
                VerdictKind::Bound,
                c.entropy(),
                s.sum_h_y_given_x + eps + h_alpha,
                || format!("case {i}: H(U) at eps {eps}"),
            );
        }
    }
}

pub fn suite_thm1(seed: u64, count: usize, budget: u64, chk: &mut Checker) {
    for (i, j) in joint_instances(seed, count).iter().enumerate() {
        let s = summarize(j);
        for eps in eps_grid(s.h_x) {
            let bounds = match bounds_report(j, eps, &BoundsOptions::default()) {
                Ok(b) => b,
                Err(e) => {
                    fail(chk, "thm1.bounds", VerdictKind::Bound, i, e);
                    continue;
                }
            };
            for mode in [CodingMode::Huffman, CodingMode::FixedLength] {
                let result =
                    build_eps_private(j, eps, mode).and_then(|sc| Ok((audit(&sc, budget)?, sc)));
                match result {
                    Ok((a, scheme)) => evaluate_scheme("thm1", &scheme, &bounds, &a, chk),
                    Err(e) => {
                        fail(chk, "thm1.build", VerdictKind::Lossless, i, e);
                        continue;
                    }
                }
            }
        }
    }
}

/// Example 2 followed by `count` random split instances.
pub fn suite_split(seed: u64, count: usize, budget: u64, chk: &mut Checker) {
    let mut rng = suite_rng(seed, 2);
    let ex2 = example2_joint();
    let ex2_sep = search_separations(
        &ex2.p_x(),
        0.4025,
        Family::S1,
        SearchMode::Exhaustive,
        1_000_000,
    )
    .expect("example separation exists")
    .best;
    let mut cases = vec![(ex2, ex2_sep)];
    cases.extend((0..count).map(|_| random_split_instance(&mut rng)));
    for (i, (j, sep)) in cases.iter().enumerate() {
        let h_x = summarize(j).h_x;
        for (variant, revealed) in [
            (SplitVariant::OtpX2, sep.h_x1()),
            (SplitVariant::OtpX1, sep.h_x2()),
        ] {
            let eps = revealed + 0.5 * (h_x - revealed).max(0.0);
            let opts = BoundsOptions {
                split: Some(sep.clone()),
                ..Default::default()
            };
            let bounds = match bounds_report(j, eps.min(h_x), &opts) {
                Ok(b) => b,
                Err(e) => {
                    fail(chk, "split.bounds", VerdictKind::Bound, i, e);
                    continue;
                }
            };
            for mode in [CodingMode::Huffman, CodingMode::FixedLength] {
                let result = build_bounded_split(j, sep, eps, variant, mode)
                    .and_then(|sc| Ok((audit(&sc, budget)?, sc)));
                let (a, scheme) = match result {
                    Ok(r) => r,
                    Err(e) => {
                        fail(chk, "split.build", VerdictKind::Lossless, i, e);
                        continue;
                    }
                };
                evaluate_scheme("split", &scheme, &bounds, &a, chk);
                chk.close(
                    "split.revealed_entropy",
                    VerdictKind::Leakage,
                    a.exact_leakage,
                    revealed,
                    || format!("case {i}: {variant:?}"),
                );
                chk.check(
                    "split.key_below_alphabet",
                    VerdictKind::Bound,
                    scheme.key_size() < j.nx(),
                    || format!("case {i}: key {} vs |X| {}", scheme.key_size(), j.nx()),
                );
            }
        }
    }
}

pub fn suite_functional(seed: u64, count: usize, budget: u64, chk: &mut Checker) {
    let mut rng = suite_rng(seed, 3);
    for i in 0..count {
        let (j, sep) = random_functional_grid(&mut rng);
        let opts = BoundsOptions {
            functional: Some(sep.clone()),
            ..Default::default()
        };
        let bounds = match bounds_report(&j, 0.0, &opts) {
            Ok(b) => b,
            Err(e) => {
                fail(chk, "functional.bounds", VerdictKind::Bound, i, e);
                continue;
            }
        };
        for mode in [CodingMode::Huffman, CodingMode::FixedLength] {
            let result = build_perfect_functional(&j, &sep, mode)
                .and_then(|sc| Ok((audit(&sc, budget)?, sc)));
            let (a, scheme) = match result {
                Ok(r) => r,
                Err(e) => {
                    fail(chk, "functional.build", VerdictKind::Lossless, i, e);
                    continue;
                }
            };
            evaluate_scheme("functional", &scheme, &bounds, &a, chk);
            chk.check(
                "functional.key_size",
                VerdictKind::Bound,
                scheme.key_size() == sep.shape().0,
                || {
                    format!(
                        "case {i}: key {} vs |X1| {}",
                        scheme.key_size(),
                        sep.shape().0
                    )
                },
            );
        }
        // the special-case bound, when it exists, must sit above every lower bound
        if let Some(v) = bounds.upper.special_case.get() {
            chk.le(
                "functional.special_case_above_lower",
                VerdictKind::Bound,
                bounds.lower.best_bounded(),
                v,
                || format!("case {i}"),
            );
        }
    }
}

fn random_table<R: Rng>(rng: &mut R, dims: Vec<usize>) -> JointTable {
    let n: usize = dims.iter().product();
    let w: Vec<f64> = (0..n)
        .map(|_| {
            if rng.random_bool(0.25) {
                0.0
            } else {
                rng.random::<f64>()
            }
        })
        .collect();
    let total: f64 = w.iter().sum::<f64>().max(f64::MIN_POSITIVE);
    let probs = if total > 0.0 {
        w.iter().map(|v| v / total).collect()
    } else {
        vec![1.0 / n as f64; n]
    };
    JointTable::new(dims, probs).expect("normalized")
}

pub fn suite_identity(seed: u64, count: usize, chk: &mut Checker) {
    let mut rng = suite_rng(seed, 4);
    for i in 0..count {
        let dims: Vec<usize> = (0..4).map(|_| rng.random_range(2..=3)).collect();
        let f = FourWayJoint::new(random_table(&mut rng, dims)).expect("four axes");
        chk.le(
            "identity.residual",
            VerdictKind::Bound,
            key_identity_residual(&f),
            0.0,
            || format!("case {i}"),
        );
    }
}

/// Minimum expected length over all prefix codes, by exhausting integer
/// length vectors under the Kraft inequality. Zero-mass symbols are ignored.
pub fn optimal_expected_length(probs: &[f64]) -> f64 {
    let p: Vec<f64> = probs.iter().copied().filter(|&v| v > 0.0).collect();
    let n = p.len();
    if n <= 1 {
        return 0.0;
    }
    let mut lengths = vec![1u32; n];
    let mut best = f64::INFINITY;
    loop {
        let kraft: f64 = lengths.iter().map(|&l| 0.5f64.powi(l as i32)).sum();
        if kraft <= 1.0 + 1e-12 {
            best = best.min(lengths.iter().zip(&p).map(|(&l, q)| l as f64 * q).sum());
        }
        let mut k = 0;
        loop {
            if k == n {
                return best;
            }
            lengths[k] += 1;
            if (lengths[k] as usize) < n {
                break;
            }
            lengths[k] = 1;
            k += 1;
        }
    }
}

fn random_pmf<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    loop {
        let w: Vec<f64> = (0..n)
            .map(|_| {
                if rng.random_bool(0.15) {
                    0.0
                } else {
                    rng.random::<f64>() + 1e-3
                }
            })
            .collect();
        let total: f64 = w.iter().sum();
        if total > 0.0 {
            return w.into_iter().map(|v| v / total).collect();
        }
    }
}

pub fn suite_coding(seed: u64, pmfs: usize, otp: usize, fault: Option<Fault>, chk: &mut Checker) {
    let build: fn(&[f64]) -> Result<PrefixCode> = match fault {
        Some(Fault::BrokenHuffman) => huffman_build_largest_first,
        None => huffman_build,
    };
    let mut rng = suite_rng(seed, 5);
    for i in 0..pmfs {
        let n = rng.random_range(1..=8);
        let p = random_pmf(&mut rng, n);
        let code = match build(&p) {
            Ok(c) => c,
            Err(e) => {
                fail(chk, "coding.build", VerdictKind::Lossless, i, e);
                continue;
            }
        };
        let (h, el) = (entropy_bits(p.iter().copied()), code.expected_length());
        chk.le(
            "coding.kraft",
            VerdictKind::Bound,
            code.kraft_sum(),
            1.0,
            || format!("case {i}"),
        );
        chk.le(
            "coding.entropy_below_length",
            VerdictKind::Bound,
            h,
            el,
            || format!("case {i}"),
        );
        chk.le(
            "coding.length_below_entropy_plus_one",
            VerdictKind::Bound,
            el,
            h + 1.0,
            || format!("case {i}"),
        );
        if p.iter().filter(|&&v| v > 0.0).count() <= 6 {
            let best = optimal_expected_length(&p);
            chk.close(
                "coding.huffman_optimal",
                VerdictKind::Bound,
                el,
                best,
                || format!("case {i}: {p:?}"),
            );
        }
    }
    for i in 0..otp {
        let m = rng.random_range(1..=12);
        let p = random_pmf(&mut rng, m);
        let mut joint = vec![0.0; m * m];
        let mut round_trip = true;
        for (x, &px) in p.iter().enumerate() {
            for w in 0..m {
                let c = otp_encode(x, w, m).expect("in range");
                round_trip &= otp_decode(c, w, m) == Ok(x);
                joint[x * m + c] += px / m as f64;
            }
        }
        let p_c: Vec<f64> = (0..m)
            .map(|c| (0..m).map(|x| joint[x * m + c]).sum())
            .collect();
        let mi = entropy_bits(p.iter().copied()) + entropy_bits(p_c) - entropy_bits(joint);
        chk.le(
            "coding.otp_independence",
            VerdictKind::Leakage,
            mi.abs(),
            0.0,
            || format!("case {i}: m = {m}"),
        );
        chk.check(
            "coding.otp_round_trip",
            VerdictKind::Lossless,
            round_trip,
            || format!("case {i}"),
        );
    }
}

pub fn suite_remark4(seed: u64, count: usize, chk: &mut Checker) {
    let mut rng = suite_rng(seed, 6);
    for _ in 0..count {
        let (a, b) = (rng.random::<f64>() * 20.0, rng.random::<f64>() * 20.0);
        chk.check(
            "remark4.ceiling_sum",
            VerdictKind::Bound,
            check_remark4(a, b),
            || format!("a={a} b={b}"),
        );
    }
}

/// Runs every suite with the default atom budget.
pub fn cmd_selftest(seed: u64, trials: usize, fault: Option<Fault>) -> Result<ExperimentReport> {
    let sizes = SelftestSizes::from_trials(trials);
    let mut report = ExperimentReport::new(
        "selftest",
        json!({ "seed": seed, "trials": trials, "fault": fault, "sizes": sizes }),
    );
    let budget = DEFAULT_ATOM_BUDGET;
    let mut chk = Checker::new();
    suite_frl(seed, sizes.joints, &mut chk);
    suite_efrl(seed, sizes.joints, &mut chk);
    suite_thm1(seed, sizes.joints, budget, &mut chk);
    suite_split(seed, sizes.split, budget, &mut chk);
    suite_functional(seed, sizes.functional, budget, &mut chk);
    suite_identity(seed, sizes.identity, &mut chk);
    suite_coding(seed, sizes.pmfs, sizes.otp, fault, &mut chk);
    suite_remark4(seed, sizes.remark4, &mut chk);
    report.set("tolerance", CHECK_TOL);
    report.set("checks", chk.verdicts().len());
    report.set("cases", chk.verdicts().iter().map(|v| v.cases).sum::<u64>());
    report.verdicts = chk.into_verdicts();
    Ok(report)
}
