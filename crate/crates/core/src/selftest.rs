//! Embedded oracle suite run by `qgk selftest`.
//!
//! Every check uses fixed internal seeds, so the report does not depend on
//! any user-supplied seed.

use std::f64::consts::LN_2;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::alignment::{correspondence_set, pair_stream_seed};
use crate::ctqw::{amm_matrix, cesaro_oracle, check_doubly_stochastic, vertex_entropies, AmmMatrix};
use crate::features::GraphFeatures;
use crate::generate::random_connected_graph;
use crate::graph::Graph;
use crate::matrix::Matrix;
use crate::spectral::spectral_decomposition;

const ORACLE_SEED: u64 = 0x5EED_0001;

#[derive(Debug, Clone, Default)]
pub struct SelftestOptions {
    /// Added to one off-diagonal entry of each closed-form mixing matrix
    /// before the stochasticity check; used to confirm the check bites.
    pub perturb_q: Option<f64>,
    /// Random graphs for the Cesàro comparison.
    pub cesaro_graphs: usize,
}

impl SelftestOptions {
    pub fn standard() -> Self {
        Self {
            perturb_q: None,
            cesaro_graphs: 6,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SelftestReport {
    pub checks: Vec<Check>,
}

impl SelftestReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    fn record(&mut self, name: &str, passed: bool, detail: String) {
        self.checks.push(Check {
            name: name.to_string(),
            passed,
            detail,
        });
    }
}

impl fmt::Display for SelftestReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(
                f,
                "[{}] {:<34} {}",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.detail
            )?;
        }
        let failed = self.checks.iter().filter(|c| !c.passed).count();
        writeln!(f, "{} checks, {} failed", self.checks.len(), failed)
    }
}

fn closed_forms() -> Vec<(&'static str, Graph, Matrix)> {
    let mut k3 = Matrix::filled(3, 3, 2.0 / 9.0);
    (0..3).for_each(|i| k3[(i, i)] = 5.0 / 9.0);
    vec![
        ("K2", Graph::complete(2), Matrix::filled(2, 2, 0.5)),
        ("K3", Graph::complete(3), k3),
        (
            "P3",
            Graph::path(3),
            Matrix::from_rows(&[
                vec![0.375, 0.25, 0.375],
                vec![0.25, 0.5, 0.25],
                vec![0.375, 0.25, 0.375],
            ]),
        ),
    ]
}

pub fn run_selftest(opts: &SelftestOptions) -> SelftestReport {
    let mut report = SelftestReport::default();

    for (name, g, expected) in closed_forms() {
        let result = spectral_decomposition(&g.adjacency_matrix()).and_then(|sd| amm_matrix(&sd));
        match result {
            Ok(q) => {
                let err = q.matrix().max_abs_diff(&expected);
                report.record(&format!("closed-form AMM {name}"), err <= 1e-9, format!("max error {err:.3e}"));

                let mut m = q.into_matrix();
                if let Some(delta) = opts.perturb_q {
                    m[(0, 1)] += delta;
                }
                let check = check_doubly_stochastic(&m);
                report.record(
                    &format!("doubly stochastic {name}"),
                    check.is_ok(),
                    check.err().map_or_else(|| "ok".into(), |e| e.to_string()),
                );
            }
            Err(e) => report.record(&format!("closed-form AMM {name}"), false, e.to_string()),
        }
    }

    let entropy = |g: &Graph| -> Vec<f64> {
        AmmMatrix::new(closed_or_computed(g))
            .and_then(|q| vertex_entropies(&q))
            .map(|p| p.as_slice().to_vec())
            .unwrap_or_default()
    };
    let k2 = entropy(&Graph::complete(2));
    let p3 = entropy(&Graph::path(3));
    let end = -2.0 * 0.375 * 0.375f64.ln() - 0.25 * 0.25f64.ln();
    let ok = k2.len() == 2
        && k2.iter().all(|h| (h - LN_2).abs() < 1e-12)
        && p3.len() == 3
        && (p3[1] - 1.5 * LN_2).abs() < 1e-12
        && (p3[0] - end).abs() < 1e-12;
    report.record("closed-form entropies", ok, format!("K2={k2:?} P3={p3:?}"));

    let mut rng = ChaCha8Rng::seed_from_u64(ORACLE_SEED);
    let mut worst_cesaro: f64 = 0.0;
    let mut worst_proj: f64 = 0.0;
    let mut failure = None;
    for _ in 0..opts.cesaro_graphs {
        let n = rng.gen_range(3..=8);
        let g = random_connected_graph(n, 0.3, &mut rng);
        let a = g.adjacency_matrix();
        let outcome = spectral_decomposition(&a).and_then(|sd| {
            worst_proj = worst_proj.max(sd.residuals().max());
            let q = amm_matrix(&sd)?;
            let avg = cesaro_oracle(&a, 500.0, 20_000)?;
            Ok(avg.max_abs_diff(q.matrix()))
        });
        match outcome {
            Ok(err) => worst_cesaro = worst_cesaro.max(err),
            Err(e) => failure = Some(e.to_string()),
        }
    }
    report.record(
        "Cesaro vs spectral AMM",
        failure.is_none() && worst_cesaro <= 5e-3,
        failure.clone().unwrap_or_else(|| format!("max deviation {worst_cesaro:.3e} (limit 5e-3)")),
    );
    report.record(
        "projector algebra",
        failure.is_none() && worst_proj <= 1e-9,
        format!("max residual {worst_proj:.3e}"),
    );

    let mut bad = Vec::new();
    for pair in 0..20 {
        let gp = random_connected_graph(rng.gen_range(1..=7), 0.3, &mut rng).with_id(2 * pair);
        let gq = random_connected_graph(rng.gen_range(1..=7), 0.3, &mut rng).with_id(2 * pair + 1);
        let set = GraphFeatures::compute(&gp, 4)
            .and_then(|fp| Ok((fp, GraphFeatures::compute(&gq, 4)?)))
            .and_then(|(fp, fq)| correspondence_set(&fp, &fq, 4, pair_stream_seed(7, gp.graph_id(), gq.graph_id())));
        match set {
            Ok(set) => {
                for h in 1..=4 {
                    let c = set.binary(h).to_dense();
                    let rows_ok = c.row_sums().iter().all(|&s| s <= 1.0);
                    let cols_ok = c.col_sums().iter().all(|&s| s <= 1.0);
                    let range_ok = set.entropic(h).entries().iter().all(|e| e.2 > 0.0 && e.2 <= 0.5);
                    if !(rows_ok && cols_ok && range_ok) {
                        bad.push(format!("pair {pair} level {h}"));
                    }
                }
            }
            Err(e) => bad.push(e.to_string()),
        }
    }
    report.record(
        "partial permutations",
        bad.is_empty(),
        if bad.is_empty() { "20 pairs x 4 levels".into() } else { bad.join("; ") },
    );
    report
}

fn closed_or_computed(g: &Graph) -> Matrix {
    spectral_decomposition(&g.adjacency_matrix())
        .and_then(|sd| amm_matrix(&sd))
        .map(AmmMatrix::into_matrix)
        .unwrap_or_else(|_| Matrix::zeros(0, 0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick() -> SelftestOptions {
        SelftestOptions {
            perturb_q: None,
            cesaro_graphs: 2,
        }
    }

    #[test]
    fn passes_on_clean_build() {
        let r = run_selftest(&quick());
        assert!(r.passed(), "{r}");
    }

    #[test]
    fn perturbation_is_caught() {
        let r = run_selftest(&SelftestOptions {
            perturb_q: Some(1e-3),
            ..quick()
        });
        assert!(!r.passed());
        assert!(r
            .checks
            .iter()
            .filter(|c| c.name.starts_with("doubly stochastic"))
            .all(|c| !c.passed));
    }
}
