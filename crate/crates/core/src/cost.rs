//! Normalized communication and randomness costs as exact rationals.

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::matrix::PartitionSpec;
use crate::smbmm::SmbmmParams;
use crate::ssmm::SsmmParams;

pub type Rational = Ratio<u64>;

/// Serializes rationals as `"num/den"` (or `"num"` for integers).
pub mod ratio_string {
    use super::Rational;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&r.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(|_| D::Error::custom(format!("not a rational: {s:?}")))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostReport {
    pub k: usize,
    pub n_servers: usize,
    #[serde(with = "ratio_string")]
    pub upload_a: Rational,
    #[serde(with = "ratio_string")]
    pub upload_b: Rational,
    #[serde(with = "ratio_string")]
    pub download: Rational,
    #[serde(with = "ratio_string")]
    pub randomness: Rational,
    /// Asymptotic operation counts, as formula strings. Not measured.
    pub complexity: Complexity,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Complexity {
    pub encode_a: String,
    pub encode_b: String,
    pub server: String,
    pub decode: String,
}

fn ratio(num: usize, den: usize) -> Rational {
    Ratio::new(num as u64, den as u64)
}

pub fn ssmm_costs(dims: PartitionSpec, n_servers: usize, k: usize) -> CostReport {
    let PartitionSpec { m, p, n } = dims;
    CostReport {
        k,
        n_servers,
        upload_a: ratio(n_servers, m * p),
        upload_b: ratio(n_servers, n * p),
        download: ratio(k, m * n),
        randomness: Ratio::from_integer(0),
        complexity: Complexity {
            encode_a: "O~(lambda*xi*N*log^2(N)/(m*p))".into(),
            encode_b: "O~(xi*theta*N*log^2(N)/(n*p))".into(),
            server: "O(lambda*xi*theta/(m*p*n))".into(),
            decode: "O~(lambda*theta*K*log^2(K)/(m*n))".into(),
        },
    }
}

pub fn smbmm_costs(dims: PartitionSpec, g: usize, l: usize, n_servers: usize, k: usize) -> CostReport {
    let PartitionSpec { m, p, n } = dims;
    let products = g * l * m * n;
    CostReport {
        k,
        n_servers,
        upload_a: ratio(n_servers, l * m * p),
        upload_b: ratio(n_servers, l * n * p),
        download: ratio(k, products),
        randomness: ratio(k - products, products),
        complexity: Complexity {
            encode_a: "O~(lambda*xi*N*log^2(N)/(L*m*p))".into(),
            encode_b: "O~(xi*theta*N*log^2(N)/(L*n*p))".into(),
            server: "O(lambda*xi*theta/(L*m*p*n))".into(),
            decode: "O~(lambda*theta*K*log^2(K)/(L*G*m*n))".into(),
        },
    }
}

pub fn cost_report_ssmm(params: &SsmmParams) -> CostReport {
    ssmm_costs(params.partition, params.n_servers, params.threshold())
}

pub fn cost_report_smbmm(params: &SmbmmParams) -> CostReport {
    smbmm_costs(params.partition, params.g, params.l, params.n_servers, params.threshold())
}
