use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use super::{Checker, ExperimentReport, VerdictKind};
use crate::bounds::{
    bounds_report, upper_thm6, Bound, BoundsOptions, BoundsReport, DEFAULT_SEARCH_BUDGET,
};
use crate::codec::{
    audit, build_bounded_split, build_eps_private, build_perfect_functional, CodecScheme,
    CodingMode, LeakageAudit, SchemeKind, SplitVariant,
};
use crate::dist::{conditional_entropy, Direction, JointDistribution};
use crate::error::{Error, Result};
use crate::frl::EncoderRng;
use crate::instances::{example1_joint, example2_joint};
use crate::separation::{
    functional_separation, search_separations, Family, SearchMode, Separation,
};

/// Largest bit-string length for the binomial instance.
pub const EXAMPLE1_MAX_N: u32 = 16;

const EXAMPLE2_EPS: f64 = 0.4025;
const PRINTED_TOL: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeChoice {
    Eps,
    Split,
    Functional,
}

#[derive(Debug, Clone)]
pub struct CodecRequest {
    pub scheme: SchemeChoice,
    /// `None` picks a separation automatically.
    pub separation: Option<Separation>,
    pub eps: f64,
    pub seed: u64,
    pub mode: CodingMode,
    pub variant: SplitVariant,
    /// Sampled transmissions pushed through encode/decode.
    pub samples: usize,
}

impl Default for CodecRequest {
    fn default() -> Self {
        CodecRequest {
            scheme: SchemeChoice::Eps,
            separation: None,
            eps: 0.0,
            seed: 0,
            mode: CodingMode::Huffman,
            variant: SplitVariant::OtpX2,
            samples: 1000,
        }
    }
}

fn min_applicable<'a>(
    cands: impl IntoIterator<Item = (&'static str, &'a Bound)>,
) -> Option<(&'static str, f64)> {
    cands
        .into_iter()
        .filter_map(|(n, b)| b.get().map(|v| (n, v)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
}

/// The upper bound the scheme's construction realizes, if the report has it.
fn matching_upper(scheme: &CodecScheme, b: &BoundsReport) -> Option<(&'static str, f64)> {
    let t1 = &b.upper.thm1;
    let fixed = scheme.mode() == CodingMode::FixedLength;
    match scheme.kind() {
        SchemeKind::EpsPrivate { .. } if fixed => {
            min_applicable([("eq13_parseable", &t1.eq13_parseable), ("eq14", &t1.eq14)])
        }
        SchemeKind::EpsPrivate { .. } => min_applicable([("eq12", &t1.eq12)]),
        SchemeKind::BoundedSplit { variant, .. } => {
            let t = b.upper.thm3.as_ref()?;
            match (variant, fixed) {
                (SplitVariant::OtpX2, false) => min_applicable([("eq21", &t.eq21)]),
                (SplitVariant::OtpX2, true) => {
                    min_applicable([("eq22", &t.eq22), ("eq23", &t.eq23)])
                }
                (SplitVariant::OtpX1, false) => min_applicable([("eq24", &t.eq24)]),
                (SplitVariant::OtpX1, true) => min_applicable([("eq24_fixed", &t.eq24_fixed)]),
            }
        }
        SchemeKind::PerfectFunctional => {
            let t = b.upper.thm6.as_ref()?;
            if fixed {
                min_applicable([("eq31", &t.eq31), ("eq32", &t.eq32)])
            } else {
                min_applicable([("eq30", &t.eq30)])
            }
        }
    }
}

/// Bounds options that evaluate the per-separation bounds on the scheme's
/// own separation.
fn options_for(scheme: &CodecScheme) -> BoundsOptions {
    let sep = scheme.separation().cloned();
    match scheme.kind() {
        SchemeKind::BoundedSplit { .. } => BoundsOptions {
            split: sep,
            ..Default::default()
        },
        SchemeKind::PerfectFunctional => BoundsOptions {
            functional: sep,
            ..Default::default()
        },
        SchemeKind::EpsPrivate { .. } => BoundsOptions::default(),
    }
}

/// Records every invariant of an audited scheme under `prefix`.
pub fn evaluate_scheme(
    prefix: &str,
    scheme: &CodecScheme,
    bounds: &BoundsReport,
    a: &LeakageAudit,
    chk: &mut Checker,
) {
    let name = |s: &str| format!("{prefix}.{s}");
    chk.check(
        &name("lossless"),
        VerdictKind::Lossless,
        a.lossless(),
        || {
            format!(
                "{} of {} atoms failed to decode",
                a.decode_failures, a.atom_count
            )
        },
    );
    match scheme.kind() {
        SchemeKind::EpsPrivate { eps } => chk.close(
            &name("leakage"),
            VerdictKind::Leakage,
            a.exact_leakage,
            eps,
            || "I(C;X) vs eps".into(),
        ),
        SchemeKind::BoundedSplit { eps, .. } => {
            chk.close(
                &name("leakage"),
                VerdictKind::Leakage,
                a.exact_leakage,
                a.designed_leakage,
                || "I(C;X) vs revealed entropy".into(),
            );
            chk.le(
                &name("leakage_budget"),
                VerdictKind::Leakage,
                a.exact_leakage,
                eps,
                || "I(C;X) vs eps".into(),
            );
        }
        SchemeKind::PerfectFunctional => chk.le(
            &name("leakage"),
            VerdictKind::Leakage,
            a.exact_leakage,
            0.0,
            || "I(C;X) vs 0".into(),
        ),
    }
    chk.le(
        &name("per_key_uniform"),
        VerdictKind::Bound,
        a.per_key_spread(),
        0.0,
        || "spread of per-key expected lengths".into(),
    );
    chk.le(
        &name("entropy_below_length"),
        VerdictKind::Bound,
        a.codeword_entropy,
        a.expected_length,
        || "H(C) vs E[L]".into(),
    );
    let lower = match scheme.kind() {
        SchemeKind::EpsPrivate { .. } => bounds.lower.best_exact(),
        _ => bounds.lower.best_bounded(),
    };
    chk.le(
        &name("lower_bound"),
        VerdictKind::Bound,
        lower,
        a.expected_length,
        || "lower bound vs E[L]".into(),
    );
    match matching_upper(scheme, bounds) {
        Some((bound, v)) => chk.le(
            &name("upper_bound"),
            VerdictKind::Bound,
            a.expected_length,
            v,
            || format!("E[L] vs {bound}"),
        ),
        None => chk.check(&name("upper_bound"), VerdictKind::Bound, false, || {
            "no applicable upper bound".into()
        }),
    }
    if bounds.summary.x_function_of_y {
        chk.check(
            &name("max_codeword_prob"),
            VerdictKind::Bound,
            a.max_codeword_prob <= a.max_x_prob + 1e-12,
            || {
                format!(
                    "max P(c) = {} > max P(x) = {}",
                    a.max_codeword_prob, a.max_x_prob
                )
            },
        );
    }
    let issues = bounds.inconsistencies();
    chk.check(
        &name("bounds_consistent"),
        VerdictKind::Bound,
        issues.is_empty(),
        || issues.join("; "),
    );
}

fn distribution_json(j: &JointDistribution) -> serde_json::Value {
    serde_json::to_value(j).expect("joint serializes")
}

pub fn cmd_bounds(
    j: &JointDistribution,
    eps: f64,
    opts: &BoundsOptions,
) -> Result<ExperimentReport> {
    let mut report = ExperimentReport::new(
        "bounds",
        json!({
            "distribution": distribution_json(j),
            "eps": eps,
            "split": opts.split.as_ref().map(|s| s.to_spec(j.x_labels())),
            "functional": opts.functional.as_ref().map(|s| s.to_spec(j.x_labels())),
        }),
    );
    let b = bounds_report(j, eps, opts)?;
    let mut chk = Checker::new();
    let issues = b.inconsistencies();
    chk.check(
        "bounds.consistent",
        VerdictKind::Bound,
        issues.is_empty(),
        || issues.join("; "),
    );
    report.notes = b.notes.clone();
    report.bounds = Some(b);
    report.verdicts = chk.into_verdicts();
    Ok(report)
}

fn sample_pair<R: Rng>(rng: &mut R, support: &[(usize, usize, f64)]) -> (usize, usize) {
    let r: f64 = rng.random();
    let mut acc = 0.0;
    for &(x, y, p) in support {
        acc += p;
        if r < acc {
            return (x, y);
        }
    }
    let &(x, y, _) = support.last().expect("non-empty support");
    (x, y)
}

pub fn cmd_codec(
    j: &JointDistribution,
    req: &CodecRequest,
    budget: u64,
) -> Result<ExperimentReport> {
    let mut report = ExperimentReport::new(
        "codec",
        json!({
            "distribution": distribution_json(j),
            "scheme": req.scheme,
            "separation": req.separation.as_ref().map(|s| s.to_spec(j.x_labels())),
            "eps": req.eps,
            "seed": req.seed,
            "umode": req.mode,
            "variant": req.variant,
            "samples": req.samples,
        }),
    );
    let p_x = j.p_x();
    let scheme = match req.scheme {
        SchemeChoice::Eps => build_eps_private(j, req.eps, req.mode)?,
        SchemeChoice::Split => {
            let sep = match &req.separation {
                Some(s) => s.clone(),
                None => {
                    let family = match req.variant {
                        SplitVariant::OtpX2 => Family::S1,
                        SplitVariant::OtpX1 => Family::S2,
                    };
                    let out = search_separations(
                        &p_x,
                        req.eps,
                        family,
                        SearchMode::Auto,
                        DEFAULT_SEARCH_BUDGET,
                    )?;
                    if !out.optimal {
                        report
                            .notes
                            .push("separation found by the greedy heuristic".into());
                    }
                    out.best
                }
            };
            build_bounded_split(j, &sep, req.eps, req.variant, req.mode)?
        }
        SchemeChoice::Functional => {
            let sep = match &req.separation {
                Some(s) => s.clone(),
                None => functional_separation(&p_x)?,
            };
            build_perfect_functional(j, &sep, req.mode)?
        }
    };
    let bounds = bounds_report(j, req.eps, &options_for(&scheme))?;
    let a = audit(&scheme, budget)?;
    let mut chk = Checker::new();
    evaluate_scheme("codec", &scheme, &bounds, &a, &mut chk);

    let support: Vec<(usize, usize, f64)> = j.support().collect();
    let mut source = ChaCha8Rng::seed_from_u64(req.seed);
    source.set_stream(2);
    let mut enc = EncoderRng::from_seed(req.seed);
    for _ in 0..req.samples {
        let (x, y) = sample_pair(&mut source, &support);
        let w = source.random_range(0..scheme.key_size());
        let decoded = scheme
            .encode(x, y, w, &mut enc)
            .and_then(|c| scheme.decode(&c, w));
        chk.check(
            "codec.sampled_round_trip",
            VerdictKind::Lossless,
            decoded == Ok(y),
            || format!("x={x} y={y} w={w}: {decoded:?}"),
        );
    }

    report.set("key_size", scheme.key_size());
    report.set("aux_alphabet_size", scheme.aux_alphabet_size());
    report.set("aux_entropy", scheme.aux_entropy());
    report.set("designed_leakage", scheme.designed_leakage());
    report.set("matching_upper", matching_upper(&scheme, &bounds));
    report.set(
        "lower",
        match scheme.kind() {
            SchemeKind::EpsPrivate { .. } => bounds.lower.best_exact(),
            _ => bounds.lower.best_bounded(),
        },
    );
    report.scheme = Some(scheme.descriptor(Some(req.seed)));
    report.notes.extend(bounds.notes.iter().cloned());
    report.bounds = Some(bounds);
    report.audit = Some(a);
    report.verdicts = chk.into_verdicts();
    Ok(report)
}

/// `H(Y|X)` of the binomial instance from the closed form
/// `Σ_k C(n,k) 2^-n log2 C(n,k)`.
pub(crate) fn binomial_conditional_entropy(n: u32) -> f64 {
    let mut c = 1.0f64;
    let mut h = 0.0;
    for k in 0..=n {
        if k > 0 {
            c = c * (n - k + 1) as f64 / k as f64;
        }
        h += c / 2f64.powi(n as i32) * c.log2();
    }
    h
}

pub fn cmd_example1(n: u32, eps: f64, budget: u64) -> Result<ExperimentReport> {
    let mut report = ExperimentReport::new("example1", json!({ "n": n, "eps": eps }));
    if n == 0 {
        return Err(Error::DimensionMismatch("n must be at least 1".into()));
    }
    if n > EXAMPLE1_MAX_N {
        return Err(Error::BudgetExceeded {
            needed: (1u128 << n) * (n as u128 + 1),
            budget: budget as u128,
        });
    }
    let j = example1_joint(n)?;
    let h = conditional_entropy(&j, Direction::YGivenX);
    let closed_form = binomial_conditional_entropy(n);
    let bounds = bounds_report(&j, eps, &BoundsOptions::default())?;
    let lower = bounds.lower.l3.get().expect("always applicable");
    let upper = bounds
        .upper
        .thm1
        .eq14
        .pre_ceiling
        .expect("functional instance");

    let scheme = build_eps_private(&j, eps, CodingMode::Huffman)?;
    let a = audit(&scheme, budget)?;
    let mut chk = Checker::new();
    evaluate_scheme("example1", &scheme, &bounds, &a, &mut chk);
    chk.close(
        "example1.closed_form",
        VerdictKind::Bound,
        h,
        closed_form,
        || "H(Y|X) vs binomial sum".into(),
    );
    chk.le(
        "example1.sandwich_lower",
        VerdictKind::Bound,
        lower,
        a.expected_length,
        || "eps + H(Y|X) vs E[L]".into(),
    );
    chk.le(
        "example1.sandwich_upper",
        VerdictKind::Bound,
        a.expected_length,
        upper,
        || "E[L] vs log2((n+2)(2^n-n)) + log2(n+1)".into(),
    );

    let trend: Vec<(u32, f64)> = [4u32, 8, 12]
        .iter()
        .map(|&m| (m, binomial_conditional_entropy(m) / m as f64))
        .collect();
    chk.check(
        "example1.trend",
        VerdictKind::Bound,
        trend.windows(2).all(|w| w[1].1 > w[0].1),
        || format!("H(Y|X)/n not increasing: {trend:?}"),
    );

    report.set("h_y_given_x", h);
    report.set("h_y_given_x_closed_form", closed_form);
    report.set("h_y_given_x_per_bit", h / n as f64);
    report.set("sandwich_lower", lower);
    report.set("sandwich_upper", upper);
    report.set("expected_length", a.expected_length);
    report.set("trend_per_bit", trend);
    report.scheme = Some(scheme.descriptor(None));
    report.bounds = Some(bounds);
    report.audit = Some(a);
    report.verdicts = chk.into_verdicts();
    Ok(report)
}

pub fn cmd_example2(budget: u64) -> Result<ExperimentReport> {
    let j = example2_joint();
    let eps = EXAMPLE2_EPS;
    let mut report = ExperimentReport::new(
        "example2",
        json!({ "distribution": distribution_json(&j), "eps": eps }),
    );
    let p_x = j.p_x();
    let mut chk = Checker::new();
    let near = |chk: &mut Checker, name: &str, got: f64, want: f64| {
        chk.check(
            name,
            VerdictKind::Bound,
            (got - want).abs() <= PRINTED_TOL,
            || format!("{got} vs {want}"),
        );
    };

    let search = search_separations(
        &p_x,
        eps,
        Family::S1,
        SearchMode::Exhaustive,
        DEFAULT_SEARCH_BUDGET,
    )?;
    chk.check(
        "example2.optimum_shape",
        VerdictKind::Bound,
        search.best.shape() == (6, 2),
        || format!("{:?}", search.best.shape()),
    );
    near(
        &mut chk,
        "example2.optimum_objective",
        search.objective,
        1.4025,
    );
    near(&mut chk, "example2.h_x1", search.revealed_entropy, 0.4025);

    let opts = BoundsOptions {
        split: Some(search.best.clone()),
        ..Default::default()
    };
    let bounds = bounds_report(&j, eps, &opts)?;
    let eq21 = bounds
        .upper
        .thm3
        .as_ref()
        .and_then(|t| t.eq21.get())
        .unwrap_or(f64::NAN);
    let alternative = bounds.upper.thm5.eq27_finite_y.get().unwrap_or(f64::NAN);
    near(&mut chk, "example2.eq21", eq21, 15.4025);
    near(&mut chk, "example2.alternative_bound", alternative, 7.4025);
    report.notes.push(format!(
        "eq21 = 12 + H(X1) + 2 + 1 = {eq21:.4}; the value 15.45 does not match this sum"
    ));

    // perfect privacy with key size |X|: X1 = X, X2 constant
    let trivial = Separation::row_major(12, 1, &p_x)?;
    let perfect = upper_thm6(&j, &trivial)?;
    let (pp_entropy, pp_fixed) = (
        perfect.eq30.get().unwrap_or(f64::NAN),
        perfect.eq31.get().unwrap_or(f64::NAN),
    );
    near(
        &mut chk,
        "example2.perfect_privacy_entropy_coded",
        pp_entropy,
        17.0,
    );
    near(
        &mut chk,
        "example2.perfect_privacy_fixed_length",
        pp_fixed,
        9.0,
    );

    let scheme = build_bounded_split(
        &j,
        &search.best,
        eps,
        SplitVariant::OtpX2,
        CodingMode::Huffman,
    )?;
    let a = audit(&scheme, budget)?;
    evaluate_scheme("example2.split", &scheme, &bounds, &a, &mut chk);
    near(&mut chk, "example2.split_leakage", a.exact_leakage, 0.4025);
    chk.check(
        "example2.split_key_size",
        VerdictKind::Bound,
        scheme.key_size() == 2,
        || format!("key size {}", scheme.key_size()),
    );

    report.set("separation", search.best.to_spec(j.x_labels()));
    report.set("h_x1", search.revealed_entropy);
    report.set("objective", search.objective);
    report.set("partitions_enumerated", search.enumerated);
    report.set("eq21", eq21);
    report.set("alternative_bound", alternative);
    report.set(
        "perfect_privacy",
        json!({
            "key_size": 12,
            "entropy_coded": pp_entropy,
            "fixed_length": pp_fixed,
        }),
    );
    report.set("split_expected_length", a.expected_length);
    report.set("split_key_size", scheme.key_size());
    report.scheme = Some(scheme.descriptor(None));
    report.bounds = Some(bounds);
    report.audit = Some(a);
    report.verdicts = chk.into_verdicts();
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::DEFAULT_ATOM_BUDGET;

    #[test]
    fn binomial_closed_form() {
        assert!((binomial_conditional_entropy(2) - 0.5).abs() < 1e-12);
        assert!((binomial_conditional_entropy(10) - 7.2936).abs() < 1e-3);
    }

    #[test]
    fn codec_on_binary_copy() {
        let j = JointDistribution::from_matrix(vec![vec![0.5, 0.0], vec![0.0, 0.5]]).unwrap();
        let req = CodecRequest {
            eps: 0.5,
            seed: 7,
            ..Default::default()
        };
        let r = cmd_codec(&j, &req, DEFAULT_ATOM_BUDGET).unwrap();
        assert!(r.passed(), "{:#?}", r.verdicts);
        let a = r.audit.unwrap();
        assert!((a.exact_leakage - 0.5).abs() < 1e-9);
        assert!(a.expected_length >= 0.5 && a.expected_length <= 3.5);
    }

    #[test]
    fn example2_report_passes() {
        let r = cmd_example2(DEFAULT_ATOM_BUDGET).unwrap();
        assert!(r.passed(), "{:#?}", r.verdicts);
        assert_eq!(r.exit_code(), 0);
    }

    #[test]
    fn example1_rejects_large_n() {
        assert!(matches!(
            cmd_example1(17, 0.5, DEFAULT_ATOM_BUDGET),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn example1_small_passes() {
        let r = cmd_example1(4, 0.5, DEFAULT_ATOM_BUDGET).unwrap();
        assert!(r.passed(), "{:#?}", r.verdicts);
        let again = cmd_example1(4, 0.5, DEFAULT_ATOM_BUDGET).unwrap();
        assert_eq!(r.to_json(), again.to_json());
    }
}
