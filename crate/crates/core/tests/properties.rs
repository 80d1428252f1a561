mod common;

use common::*;
use secmm_core::linalg::{determinant, rank};
use secmm_core::rng::{streams, FieldRng};
use secmm_core::smbmm::decode_smbmm;
use secmm_core::ssmm::decode_ssmm;
use secmm_core::{matmul_oracle, Fe};

#[test]
fn cauchy_vandermonde_is_nonsingular() {
    for q in [101, 257, 7919] {
        let f = field(q);
        let mut rng = FieldRng::new(q, streams::POINTS);
        for _ in 0..100 {
            let v = random_cauchy_vandermonde(f, &mut rng).unwrap();
            assert_eq!(rank(&v), v.rows());
            assert_ne!(determinant(&v).unwrap(), Fe::ZERO);
        }
    }
}

#[test]
fn ssmm_oracle_and_subset_invariance() {
    let mut rng = FieldRng::new(2024, streams::DATA_A);
    for _ in 0..200 {
        let (params, a, b) = random_ssmm_case(&mut rng);
        let k = params.threshold();
        let all = ssmm_responses(&params, &a, &b, rng.next_u64());
        let expect = matmul_oracle(&a, &b).unwrap();
        let first = decode_ssmm(&pick(&all, &rng.sample_indices(params.n_servers, k)), &params).unwrap();
        let second = decode_ssmm(&pick(&all, &rng.sample_indices(params.n_servers, k)), &params).unwrap();
        assert_eq!(first, expect);
        assert_eq!(second, expect);
    }
}

#[test]
fn smbmm_oracle_and_subset_invariance() {
    let mut rng = FieldRng::new(2025, streams::DATA_A);
    for _ in 0..100 {
        let (params, a, b) = random_smbmm_case(&mut rng);
        let k = params.threshold();
        let all = smbmm_responses(&params, &a, &b, rng.next_u64());
        let first = decode_smbmm(&pick(&all, &rng.sample_indices(params.n_servers, k)), &params).unwrap();
        let second = decode_smbmm(&pick(&all, &rng.sample_indices(params.n_servers, k)), &params).unwrap();
        assert_eq!(first, second);
        for (c, (x, y)) in first.iter().zip(a.iter().zip(&b)) {
            assert_eq!(*c, matmul_oracle(x, y).unwrap());
        }
    }
}
