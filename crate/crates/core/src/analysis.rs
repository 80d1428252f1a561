//! Closed-form thresholds of this construction and of published baselines.
//!
//! All formulas are integer arithmetic; nothing here runs a protocol.

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Gasp,
    A3s,
    Uscsa0,
    Uscsa1,
    Sgpd,
    Ps,
    DftP,
    /// Needs the bilinear complexity `R(m,p,n)`.
    Eep,
    ChenEtAl,
    /// This construction, row-by-column partition (`p = 1`), `X_A = X_B`.
    Degraded1,
    /// This construction, arbitrary partition, `X_A = X_B`.
    Degraded2,
    /// This construction for batches, `X_A = X_B`.
    Batch,
}

impl Scheme {
    pub const ALL: [Scheme; 12] = [
        Scheme::Gasp,
        Scheme::A3s,
        Scheme::Uscsa0,
        Scheme::Uscsa1,
        Scheme::Sgpd,
        Scheme::Ps,
        Scheme::DftP,
        Scheme::Eep,
        Scheme::ChenEtAl,
        Scheme::Degraded1,
        Scheme::Degraded2,
        Scheme::Batch,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Scheme::Gasp => "GASP",
            Scheme::A3s => "A3S",
            Scheme::Uscsa0 => "USCSA(0)",
            Scheme::Uscsa1 => "USCSA(1)",
            Scheme::Sgpd => "S-GPD",
            Scheme::Ps => "PS",
            Scheme::DftP => "DFT-P",
            Scheme::Eep => "E-EP",
            Scheme::ChenEtAl => "Chen et al.",
            Scheme::Degraded1 => "ours (p=1)",
            Scheme::Degraded2 => "ours (single)",
            Scheme::Batch => "ours (batch)",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchemeParams {
    pub m: usize,
    pub p: usize,
    pub n: usize,
    pub x: usize,
    pub g: usize,
    pub l: usize,
    pub r: Option<usize>,
}

impl SchemeParams {
    pub fn single(m: usize, p: usize, n: usize, x: usize) -> Self {
        SchemeParams { m, p, n, x, g: 1, l: 1, r: None }
    }

    pub fn batch(m: usize, p: usize, n: usize, x: usize, g: usize, l: usize) -> Self {
        SchemeParams { m, p, n, x, g, l, r: None }
    }
}

fn require_row_by_column(scheme: Scheme, p: usize) -> Result<()> {
    if p != 1 {
        return Err(Error::Domain(format!("{} is defined for row-by-column partitions (p = 1), got p = {p}", scheme.label())));
    }
    Ok(())
}

fn gasp(m: usize, n: usize, x: usize) -> Result<usize> {
    // the printed cases assume n <= m; otherwise swap
    let (m, n) = if m < n { (n, m) } else { (m, n) };
    if x == 1 && 1 < n {
        Ok(m * n + m + n)
    } else if 2 <= x && x < n {
        Ok(m * n + m + n + x * x + x - 3)
    } else if m <= x {
        Ok((m + x) * (n + 1) - 1)
    } else {
        Err(Error::Domain(format!("GASP threshold is not tabulated for m={m}, n={n}, X={x}")))
    }
}

fn sgpd(m: usize, p: usize, n: usize, x: usize) -> usize {
    let c = x.div_ceil(p);
    if p < m {
        if x.is_multiple_of(p) {
            (m + c) * p * (n + 1) + p * c - 1
        } else {
            (m + c) * p * (n + 1) - p * c + 2 * x - 1
        }
    } else {
        let d = x.div_ceil(m.min(n));
        m * (p * n + n * d - d) + m * p + 2 * x - 1
    }
}

pub fn baseline_threshold(scheme: Scheme, sp: &SchemeParams) -> Result<usize> {
    let SchemeParams { m, p, n, x, g, l, r } = *sp;
    if [m, p, n, x].contains(&0) {
        return Err(Error::InvalidParams("m, p, n and X must be at least 1".into()));
    }
    let batch_ok = || {
        if g == 0 || l == 0 {
            Err(Error::InvalidParams("G and L must be at least 1".into()))
        } else {
            Ok(())
        }
    };
    match scheme {
        Scheme::Gasp => {
            require_row_by_column(scheme, p)?;
            gasp(m, n, x)
        }
        Scheme::A3s => {
            require_row_by_column(scheme, p)?;
            Ok((n + 1) * (m + x) - 1)
        }
        Scheme::Uscsa0 => {
            require_row_by_column(scheme, p)?;
            Ok(m * n + m + 2 * x - 1)
        }
        Scheme::Uscsa1 => {
            require_row_by_column(scheme, p)?;
            Ok(m * n + n + 2 * x - 1)
        }
        Scheme::Sgpd => Ok(sgpd(m, p, n, x)),
        Scheme::Ps => Ok(2 * m * p * n + 2 * x - 1),
        Scheme::DftP => Ok(m * p * n + 2 * m * n * x),
        Scheme::Eep => Ok(2 * r.ok_or(Error::MissingR)? + 2 * x - 1),
        Scheme::ChenEtAl => {
            batch_ok()?;
            Ok((l * g + l) * m * p * n + 2 * x - 1)
        }
        Scheme::Degraded1 => {
            require_row_by_column(scheme, p)?;
            Ok(((m + 1) * (n + x)).min((n + 1) * (m + x)) - 1)
        }
        Scheme::Degraded2 => Ok(((m + 1) * (n * p + x) - 1).min((n + 1) * (m * p + x) - 1)),
        Scheme::Batch => {
            batch_ok()?;
            let body = (l * g + l - 1) * m * p * n;
            Ok((body + n * p + (g * m - g + m) * x - 1).min(body + m * p + (g * n - g + n) * x - 1))
        }
    }
}

/// Comparison with the batch baseline in the degraded case.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Regime {
    /// `X (G + 1) <= max(np, mp)`.
    pub predicate: bool,
    pub k_ours: usize,
    pub k_baseline: usize,
    /// `K_C - K_SM`; positive means fewer servers are needed here.
    pub margin: i64,
}

pub fn improvement_regime(m: usize, p: usize, n: usize, x_a: usize, x_b: usize, g: usize, l: usize) -> Result<Regime> {
    if x_a != x_b {
        return Err(Error::DegradedOnly { x_a, x_b });
    }
    let sp = SchemeParams::batch(m, p, n, x_a, g, l);
    let k_ours = baseline_threshold(Scheme::Batch, &sp)?;
    let k_baseline = baseline_threshold(Scheme::ChenEtAl, &sp)?;
    Ok(Regime {
        predicate: x_a * (g + 1) <= (n * p).max(m * p),
        k_ours,
        k_baseline,
        margin: k_baseline as i64 - k_ours as i64,
    })
}

/// Common randomness per product of the batch baseline.
pub fn baseline_randomness(m: usize, p: usize, n: usize, x: usize, g: usize, l: usize) -> Ratio<i64> {
    let num = ((g * l + l) * m * p * n + p + x - 1) as i64 - (m * p) as i64;
    let den = (g * l * m * n) as i64;
    Ratio::new(num, den) - 1
}

/// Interference dimensions of this construction in the degraded batch case.
/// The desired products occupy `LGmpn` further dimensions.
pub fn interference_dimensions(m: usize, p: usize, n: usize, x: usize, g: usize, l: usize) -> usize {
    let body = (l - 1) * m * p * n;
    (body + n * p + (g * (m - 1) + m) * x - 1).min(body + m * p + (g * (n - 1) + n) * x - 1)
}

/// Interference dimensions of the batch baseline.
pub fn baseline_interference_dimensions(m: usize, p: usize, n: usize, x: usize, l: usize) -> usize {
    l * m * p * n + 2 * x - 1
}

/// A rendered comparison table.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Table {
    pub title: String,
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.headers).map_err(|e| Error::Io(e.to_string()))?;
        for r in &self.rows {
            w.write_record(r).map_err(|e| Error::Io(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
    }

    pub fn to_markdown(&self) -> String {
        let mut out = format!("### {}\n\n| {} |\n|", self.title, self.headers.join(" | "));
        out.push_str(&"---|".repeat(self.headers.len()));
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!("| {} |\n", r.join(" | ")));
        }
        out
    }
}

fn cell(r: Result<usize>) -> String {
    match r {
        Ok(v) => v.to_string(),
        Err(Error::Domain(_)) => "n/a".into(),
        Err(e) => format!("error: {e}"),
    }
}

/// Batch comparison: one row per `X`, ours before the baseline.
pub fn table_v(m: usize, p: usize, n: usize, g: usize, l: usize, xs: &[usize]) -> Result<Table> {
    let headers = [
        "m", "p", "n", "G", "L", "X", "K_SM", "K_C", "rho_SM", "rho_C", "D_SM", "D_C", "K_SM<K_C", "regime",
    ];
    let mut rows = Vec::with_capacity(xs.len());
    for &x in xs {
        let reg = improvement_regime(m, p, n, x, x, g, l)?;
        let products = (g * l * m * n) as i64;
        let rho_sm = Ratio::new(reg.k_ours as i64, products) - 1;
        rows.push(vec![
            m.to_string(),
            p.to_string(),
            n.to_string(),
            g.to_string(),
            l.to_string(),
            x.to_string(),
            reg.k_ours.to_string(),
            reg.k_baseline.to_string(),
            rho_sm.to_string(),
            baseline_randomness(m, p, n, x, g, l).to_string(),
            Ratio::new(reg.k_ours as i64, products).to_string(),
            Ratio::new(reg.k_baseline as i64, products).to_string(),
            (reg.margin > 0).to_string(),
            reg.predicate.to_string(),
        ]);
    }
    Ok(Table { title: "Batch multiplication: ours vs Chen et al.".into(), headers: headers.map(String::from).to_vec(), rows })
}

/// Single-product comparison against E-EP codes with a given `R(m,p,n)`.
pub fn table_iv(m: usize, p: usize, n: usize, r: Option<usize>, xs: &[usize]) -> Result<Table> {
    let headers = ["m", "p", "n", "R", "X", "K_EP", "K_D2", "K_D2<K_EP"];
    let mut rows = Vec::with_capacity(xs.len());
    for &x in xs {
        let sp = SchemeParams { r, ..SchemeParams::single(m, p, n, x) };
        let k_ep = baseline_threshold(Scheme::Eep, &sp)?;
        let k_d2 = baseline_threshold(Scheme::Degraded2, &sp)?;
        rows.push(vec![
            m.to_string(),
            p.to_string(),
            n.to_string(),
            r.map_or_else(String::new, |v| v.to_string()),
            x.to_string(),
            k_ep.to_string(),
            k_d2.to_string(),
            (k_d2 < k_ep).to_string(),
        ]);
    }
    Ok(Table { title: "Single product: ours vs E-EP".into(), headers: headers.map(String::from).to_vec(), rows })
}

/// Row-by-column single-product comparison.
pub fn table_ii(m: usize, n: usize, xs: &[usize]) -> Table {
    let headers = ["m", "n", "X", "K_GP", "K_AS", "K_U0", "K_U1", "K_D1"];
    let schemes = [Scheme::Gasp, Scheme::A3s, Scheme::Uscsa0, Scheme::Uscsa1, Scheme::Degraded1];
    let rows = xs
        .iter()
        .map(|&x| {
            let sp = SchemeParams::single(m, 1, n, x);
            let mut row = vec![m.to_string(), n.to_string(), x.to_string()];
            row.extend(schemes.iter().map(|&s| cell(baseline_threshold(s, &sp))));
            row
        })
        .collect();
    Table { title: "Row-by-column partition".into(), headers: headers.map(String::from).to_vec(), rows }
}

/// Arbitrary-partition single-product comparison.
pub fn table_iii(m: usize, p: usize, n: usize, r: Option<usize>, xs: &[usize]) -> Table {
    let headers = ["m", "p", "n", "X", "K_SD", "K_PS", "K_DP", "K_EP", "K_D2"];
    let schemes = [Scheme::Sgpd, Scheme::Ps, Scheme::DftP, Scheme::Eep, Scheme::Degraded2];
    let rows = xs
        .iter()
        .map(|&x| {
            let sp = SchemeParams { r, ..SchemeParams::single(m, p, n, x) };
            let mut row = vec![m.to_string(), p.to_string(), n.to_string(), x.to_string()];
            row.extend(schemes.iter().map(|&s| match baseline_threshold(s, &sp) {
                Err(Error::MissingR) => String::new(),
                other => cell(other),
            }));
            row
        })
        .collect();
    Table { title: "Arbitrary partition".into(), headers: headers.map(String::from).to_vec(), rows }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::smbmm::DerivedIndices;
    use crate::ssmm::Variant;
    use crate::PartitionSpec;
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(20))]

        #[test]
        fn interference_accounting(
            m in 2usize..5, p in 1usize..4, n in 2usize..5, x in 1usize..5, g in 1usize..4, l in 2usize..4,
        ) {
            let dims = PartitionSpec::new(m, p, n).unwrap();
            let desired = l * g * m * p * n;
            let by_variant = [Variant::AMajor, Variant::BMajor].map(|v| {
                let d = DerivedIndices::new(v, dims, x, x, g, l);
                prop_assert_eq!(d.k - desired, d.phi + 1 + g * (d.psi - d.kappa));
                Ok(d.k - desired)
            });
            let [a, b] = by_variant;
            let k_int = interference_dimensions(m, p, n, x, g, l);
            prop_assert_eq!(a?.min(b?), k_int);
            let sp = SchemeParams::batch(m, p, n, x, g, l);
            prop_assert_eq!(baseline_threshold(Scheme::Batch, &sp).unwrap() - desired, k_int);
            prop_assert_eq!(
                baseline_threshold(Scheme::ChenEtAl, &sp).unwrap() - desired,
                baseline_interference_dimensions(m, p, n, x, l)
            );
        }
    }

    #[test]
    fn worked_interference() {
        assert_eq!(interference_dimensions(2, 3, 2, 2, 2, 2), 25);
        assert_eq!(baseline_interference_dimensions(2, 3, 2, 2, 2), 27);
    }

    #[test]
    fn worked_values() {
        assert_eq!(baseline_threshold(Scheme::A3s, &SchemeParams::single(2, 1, 2, 1)).unwrap(), 8);
        let eep = SchemeParams { r: Some(7), ..SchemeParams::single(2, 2, 2, 1) };
        assert_eq!(baseline_threshold(Scheme::Eep, &eep).unwrap(), 15);
        assert_eq!(baseline_threshold(Scheme::Degraded2, &eep).unwrap(), 14);
        assert_eq!(baseline_threshold(Scheme::Eep, &SchemeParams::single(2, 2, 2, 1)), Err(Error::MissingR));
        let b = SchemeParams::batch(2, 1, 2, 1, 1, 2);
        assert_eq!(baseline_threshold(Scheme::ChenEtAl, &b).unwrap(), 17);
        assert_eq!(baseline_threshold(Scheme::Batch, &b).unwrap(), 16);
    }

    #[test]
    fn gasp_cases() {
        // 1 = X < n <= m
        assert_eq!(gasp(3, 2, 1).unwrap(), 11);
        // 2 <= X < n <= m
        assert_eq!(gasp(4, 3, 2).unwrap(), 12 + 4 + 3 + 4 + 2 - 3);
        // n <= m <= X
        assert_eq!(gasp(2, 2, 3).unwrap(), 14);
        // interchange
        assert_eq!(gasp(2, 3, 1).unwrap(), gasp(3, 2, 1).unwrap());
        assert!(matches!(gasp(4, 2, 3), Err(Error::Domain(_))));
        assert!(matches!(gasp(3, 1, 1), Err(Error::Domain(_))));
        assert!(matches!(baseline_threshold(Scheme::Gasp, &SchemeParams::single(2, 2, 2, 1)), Err(Error::Domain(_))));
    }

    #[test]
    fn sgpd_cases() {
        // p | X, p < m
        assert_eq!(sgpd(3, 2, 2, 4), (3 + 2) * 2 * 3 + 4 - 1);
        // p does not divide X, p < m
        assert_eq!(sgpd(3, 2, 2, 3), (3 + 2) * 2 * 3 - 4 + 6 - 1);
        // p >= m
        assert_eq!(sgpd(2, 3, 2, 3), 2 * (6 + 2 * 2 - 2) + 6 + 6 - 1);
    }

    #[test]
    fn degraded_formulas_match_general_thresholds() {
        use crate::smbmm::recovery_threshold_smbmm;
        use crate::ssmm::recovery_threshold_ssmm;
        for m in 1..5 {
            for p in 1..4 {
                for n in 1..5 {
                    for x in 1..5 {
                        let t = recovery_threshold_ssmm(m, p, n, x, x).unwrap();
                        let sp = SchemeParams::single(m, p, n, x);
                        assert_eq!(baseline_threshold(Scheme::Degraded2, &sp).unwrap(), t.k);
                        if p == 1 {
                            assert_eq!(baseline_threshold(Scheme::Degraded1, &sp).unwrap(), t.k);
                        }
                        if m > 1 && n > 1 {
                            for (g, l) in [(1, 2), (2, 2), (3, 4)] {
                                let t = recovery_threshold_smbmm(m, p, n, x, x, g, l).unwrap();
                                let sp = SchemeParams::batch(m, p, n, x, g, l);
                                assert_eq!(baseline_threshold(Scheme::Batch, &sp).unwrap(), t.k);
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn regime_examples() {
        let r = improvement_regime(2, 3, 2, 2, 2, 2, 2).unwrap();
        assert!(r.predicate);
        assert_eq!((r.k_ours, r.k_baseline, r.margin), (73, 75, 2));
        let r = improvement_regime(2, 3, 2, 3, 3, 2, 2).unwrap();
        assert!(!r.predicate);
        assert_eq!(improvement_regime(2, 3, 2, 1, 2, 2, 2), Err(Error::DegradedOnly { x_a: 1, x_b: 2 }));
    }

    #[test]
    fn regime_implies_improvement_on_grid() {
        for m in 2..5 {
            for p in 1..4 {
                for n in 2..5 {
                    for g in 1..4 {
                        for l in 2..4 {
                            for x in 1..10 {
                                let r = improvement_regime(m, p, n, x, x, g, l).unwrap();
                                if r.predicate {
                                    assert!(r.margin > 0, "{m} {p} {n} {x} {g} {l}");
                                }
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn tables_render() {
        let t = table_v(2, 3, 2, 2, 2, &[1, 2, 3]).unwrap();
        assert_eq!(t.rows.len(), 3);
        let ks: Vec<(&str, &str, &str)> =
            t.rows.iter().map(|r| (r[6].as_str(), r[7].as_str(), r[12].as_str())).collect();
        assert_eq!(ks, vec![("69", "73", "true"), ("73", "75", "true"), ("77", "77", "false")]);
        assert!(t.to_csv().unwrap().starts_with("m,p,n,G,L,X,K_SM,K_C"));
        assert!(t.to_markdown().contains("| 2 | 3 | 2 | 2 | 2 | 1 | 69 | 73 |"));
        let t4 = table_iv(2, 2, 2, Some(7), &[1, 2]).unwrap();
        assert_eq!(t4.rows[0][5..].to_vec(), vec!["15", "14", "true"]);
        assert_eq!(t4.rows[1][5..].to_vec(), vec!["17", "17", "false"]);
        assert_eq!(table_ii(2, 2, &[1]).rows[0][3], "8");
        assert_eq!(table_ii(4, 2, &[3]).rows[0][3], "n/a");
        assert_eq!(table_iii(2, 2, 2, None, &[1]).rows[0][7], "");
    }
}
