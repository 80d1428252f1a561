mod common;

use common::*;
use proptest::prelude::*;
use secmm_core::rng::{streams, FieldRng};
use secmm_core::ssmm::{decode_ssmm, SsmmParams, Variant, VariantChoice};
use secmm_core::{matmul_oracle, Error};

#[test]
fn worked_example_any_25_of_30() {
    let f = field(257);
    let params = SsmmParams::new(f, dims(2, 3, 2), 2, 3, 30, VariantChoice::AMajor).unwrap();
    assert_eq!(params.threshold(), 25);
    let mut rng = FieldRng::new(1, streams::DATA_A);
    let (a, b) = factors(f, params.partition, (6, 4, 6), &mut rng);
    let expect = matmul_oracle(&a, &b).unwrap();
    let all = ssmm_responses(&params, &a, &b, 2);
    for trial in 0..5 {
        let idx = rng.sample_indices(30, 25);
        let mut order = idx.clone();
        order.rotate_left(trial);
        assert_eq!(decode_ssmm(&pick(&all, &order), &params).unwrap(), expect);
    }
    assert_eq!(
        decode_ssmm(&all[..24], &params),
        Err(Error::InsufficientResponses { needed: 25, got: 24 })
    );
}

#[test]
fn b_major_needs_24() {
    let f = field(257);
    let params = SsmmParams::new(f, dims(2, 3, 2), 2, 3, 30, VariantChoice::Auto).unwrap();
    assert_eq!(params.variant, Variant::BMajor);
    let mut rng = FieldRng::new(5, streams::DATA_A);
    let (a, b) = factors(f, params.partition, (6, 4, 6), &mut rng);
    let all = ssmm_responses(&params, &a, &b, 3);
    assert_eq!(decode_ssmm(&all[6..], &params).unwrap(), matmul_oracle(&a, &b).unwrap());
}

#[test]
fn disjoint_subsets_agree() {
    let f = field(7919);
    let k = secmm_core::ssmm::recovery_threshold_ssmm(2, 2, 3, 2, 1).unwrap().k;
    let params = SsmmParams::new(f, dims(2, 2, 3), 2, 1, 2 * k, VariantChoice::Auto).unwrap();
    assert_eq!(params.threshold(), k);
    let mut rng = FieldRng::new(8, streams::DATA_A);
    let (a, b) = factors(f, params.partition, (2, 3, 1), &mut rng);
    let all = ssmm_responses(&params, &a, &b, 4);
    let first = decode_ssmm(&all[..k], &params).unwrap();
    let second = decode_ssmm(&all[k..2 * k], &params).unwrap();
    assert_eq!(first, second);
}

#[test]
fn duplicate_responses_rejected() {
    let f = field(101);
    let params = SsmmParams::new(f, dims(1, 1, 1), 1, 1, 5, VariantChoice::Auto).unwrap();
    let mut rng = FieldRng::new(0, streams::DATA_A);
    let (a, b) = factors(f, params.partition, (2, 2, 2), &mut rng);
    let all = ssmm_responses(&params, &a, &b, 0);
    let dup = pick(&all, &[0, 0, 1]);
    assert!(matches!(decode_ssmm(&dup, &params), Err(Error::DuplicatePoint(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn random_instances_decode(
        m in 1usize..4, p in 1usize..4, n in 1usize..4,
        xa in 1usize..4, xb in 1usize..4,
        extra in 0usize..4, seed in any::<u64>(), b_major in any::<bool>(),
    ) {
        let f = field(7919);
        let v = if b_major { VariantChoice::BMajor } else { VariantChoice::AMajor };
        let k = secmm_core::ssmm::recovery_threshold_ssmm(m, p, n, xa, xb).unwrap();
        let k = if b_major { k.b_major } else { k.a_major };
        let params = SsmmParams::new(f, dims(m, p, n), xa, xb, k + extra, v).unwrap();
        let mut rng = FieldRng::new(seed, streams::DATA_A);
        let (a, b) = factors(f, params.partition, (1, 2, 1), &mut rng);
        let all = ssmm_responses(&params, &a, &b, seed);
        let idx = rng.sample_indices(k + extra, k);
        prop_assert_eq!(decode_ssmm(&pick(&all, &idx), &params).unwrap(), matmul_oracle(&a, &b).unwrap());
    }
}
