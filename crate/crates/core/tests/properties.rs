use proptest::prelude::*;

use privcode::bounds::{bounds_report, BoundsOptions};
use privcode::codec::{
    audit, build_bounded_split, build_eps_private, build_perfect_functional, CodingMode,
    SplitVariant,
};
use privcode::coding::{huffman_build, otp_decode, otp_encode, Bitstring};
use privcode::dist::{
    conditional_entropy, entropy, entropy_bits, mutual_information, Direction, JointDistribution,
};
use privcode::frl::{build_efrl, build_frl, EncoderRng};
use privcode::separation::Separation;

const TOL: f64 = 1e-9;

fn joint() -> impl Strategy<Value = JointDistribution> {
    (1usize..=4, 1usize..=5)
        .prop_flat_map(|(nx, ny)| {
            prop::collection::vec(0u32..10, nx * ny).prop_map(move |w| (ny, w))
        })
        .prop_filter("needs mass", |(_, w)| w.iter().any(|&v| v > 0))
        .prop_map(|(ny, w)| {
            let total: u32 = w.iter().sum();
            let pmf = w
                .chunks(ny)
                .map(|r| r.iter().map(|&v| v as f64 / total as f64).collect())
                .collect();
            JointDistribution::from_matrix(pmf).unwrap()
        })
}

fn pmf() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0u32..20, 1..9)
        .prop_filter("needs mass", |w| w.iter().any(|&v| v > 0))
        .prop_map(|w| {
            let total: u32 = w.iter().sum();
            w.iter().map(|&v| v as f64 / total as f64).collect()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn chain_rule(j in joint()) {
        let hxy = j.joint_entropy();
        let hx = entropy(&j.p_x());
        let hy = entropy(&j.p_y());
        prop_assert!((hxy - hx - conditional_entropy(&j, Direction::YGivenX)).abs() < TOL);
        prop_assert!((hxy - hy - conditional_entropy(&j, Direction::XGivenY)).abs() < TOL);
    }

    #[test]
    fn mutual_information_is_symmetric_and_bounded(j in joint()) {
        let mi = mutual_information(&j);
        prop_assert!(mi >= 0.0);
        prop_assert!((mi - mutual_information(&j.transpose())).abs() < TOL);
        prop_assert!(mi <= entropy(&j.p_x()).min(entropy(&j.p_y())) + TOL);
    }

    #[test]
    fn entropy_ignores_order(p in pmf(), k in 0usize..8) {
        let mut q = p.clone();
        let k = k % q.len();
        q.rotate_left(k);
        q.reverse();
        prop_assert!((entropy_bits(p.iter().copied()) - entropy_bits(q.iter().copied())).abs() < TOL);
    }

    #[test]
    fn conditioning_reduces_entropy(j in joint()) {
        prop_assert!(conditional_entropy(&j, Direction::YGivenX) <= entropy(&j.p_y()) + TOL);
    }

    #[test]
    fn json_round_trip(j in joint()) {
        let back = JointDistribution::from_json(&j.to_json()).unwrap();
        prop_assert_eq!(back, j);
    }

    #[test]
    fn huffman_sandwich_and_round_trip(p in pmf()) {
        let code = huffman_build(&p).unwrap();
        let h = entropy_bits(p.iter().copied());
        prop_assert!(code.kraft_sum() <= 1.0 + TOL);
        prop_assert!(code.expected_length() >= h - TOL);
        prop_assert!(code.expected_length() < h + 1.0 + TOL);
        let mut stream = Bitstring::new();
        let symbols: Vec<usize> = (0..p.len()).filter(|&i| p[i] > 0.0).collect();
        for &s in &symbols {
            code.encode(s, &mut stream).unwrap();
        }
        let mut cursor = 0;
        for &s in &symbols {
            let (got, next) = code.prefix_decode(&stream, cursor).unwrap();
            prop_assert_eq!(got, s);
            cursor = next;
        }
        prop_assert_eq!(cursor, stream.len());
    }

    #[test]
    fn one_time_pad_inverts(m in 1usize..40, x in 0usize..40, w in 0usize..40) {
        let (x, w) = (x % m, w % m);
        let c = otp_encode(x, w, m).unwrap();
        prop_assert!(c < m);
        prop_assert_eq!(otp_decode(c, w, m).unwrap(), x);
    }

    #[test]
    fn frl_is_independent_and_decodable(j in joint()) {
        let c = build_frl(&j).unwrap();
        prop_assert!(c.max_independence_gap(&j) <= TOL);
        prop_assert!(c.decoding_error_mass(&j) <= TOL);
        prop_assert!(c.cardinality_certificate(&j).holds());
        let total: f64 = c.u_pmf().iter().sum();
        prop_assert!((total - 1.0).abs() < TOL);
    }

    #[test]
    fn efrl_leaks_exactly_eps(j in joint(), frac in 0.0f64..=1.0) {
        let eps = frac * entropy(&j.p_x());
        let c = build_efrl(&j, eps).unwrap();
        let t = c.assembled_joint(&j);
        // axes: x, y, u
        prop_assert!((t.mutual_information(&[2], &[0]) - c.eps()).abs() <= TOL);
        prop_assert!(t.conditional_entropy(&[1], &[2, 0]) <= TOL);
    }

    #[test]
    fn eps_scheme_audit(j in joint(), frac in 0.0f64..=1.0, fixed in any::<bool>()) {
        let eps = frac * entropy(&j.p_x());
        let mode = if fixed { CodingMode::FixedLength } else { CodingMode::Huffman };
        let scheme = build_eps_private(&j, eps, mode).unwrap();
        let a = audit(&scheme, 1_000_000).unwrap();
        prop_assert!(a.lossless());
        prop_assert!((a.exact_leakage - scheme.designed_leakage()).abs() <= TOL);
        prop_assert!(a.per_key_spread() <= TOL);
        prop_assert!(a.codeword_entropy <= a.expected_length + TOL);
    }

    #[test]
    fn encode_decode_round_trip(j in joint(), seed in any::<u64>(), w in 0usize..8) {
        let scheme = build_eps_private(&j, 0.0, CodingMode::Huffman).unwrap();
        let w = w % scheme.key_size();
        let mut rng = EncoderRng::from_seed(seed);
        for (x, y, _) in j.support() {
            let bits = scheme.encode(x, y, w, &mut rng).unwrap();
            prop_assert_eq!(scheme.decode(&bits, w).unwrap(), y);
            let mut longer = bits.clone();
            longer.push(false);
            prop_assert!(scheme.decode(&longer, w).is_err());
        }
    }

    #[test]
    fn upper_bounds_dominate_lower(j in joint(), frac in 0.0f64..=1.0) {
        let eps = frac * entropy(&j.p_x());
        let r = bounds_report(&j, eps, &BoundsOptions::default()).unwrap();
        prop_assert!(r.inconsistencies().is_empty(), "{:?}", r.inconsistencies());
    }

    #[test]
    fn split_scheme_leaks_revealed_factor(
        w in prop::collection::vec(1u32..10, 6),
        ny in 1usize..4,
        pad_x1 in any::<bool>(),
    ) {
        let total: u32 = w.iter().sum::<u32>() * ny as u32;
        let pmf = w.iter().map(|&v| vec![v as f64 / total as f64; ny]).collect();
        let j = JointDistribution::from_matrix(pmf).unwrap();
        let sep = Separation::row_major(2, 3, &j.p_x()).unwrap();
        let (variant, revealed) = if pad_x1 {
            (SplitVariant::OtpX1, sep.h_x2())
        } else {
            (SplitVariant::OtpX2, sep.h_x1())
        };
        let scheme = build_bounded_split(&j, &sep, revealed, variant, CodingMode::Huffman).unwrap();
        let a = audit(&scheme, 1_000_000).unwrap();
        prop_assert!(a.lossless());
        prop_assert!((a.exact_leakage - revealed).abs() <= TOL);
        prop_assert!(scheme.key_size() < j.nx());
    }

    #[test]
    fn functional_scheme_is_perfectly_private(
        rows in prop::collection::vec((1u32..10, 0usize..3), 2..5),
        ny in 1usize..4,
    ) {
        let total: u32 = rows.iter().map(|r| r.0).sum::<u32>() * ny as u32;
        let mut pmf = vec![vec![0.0; ny]; rows.len() * 3];
        for (r, &(wt, col)) in rows.iter().enumerate() {
            pmf[r * 3 + col] = vec![wt as f64 / total as f64; ny];
        }
        let j = JointDistribution::from_matrix(pmf).unwrap();
        let sep = Separation::row_major(rows.len(), 3, &j.p_x()).unwrap();
        let scheme = build_perfect_functional(&j, &sep, CodingMode::Huffman).unwrap();
        let a = audit(&scheme, 1_000_000).unwrap();
        prop_assert!(a.lossless());
        prop_assert!(a.exact_leakage <= TOL);
        prop_assert_eq!(scheme.key_size(), rows.len());
    }
}
