//! Exact predictions for totally tangent Fermat line triples.
//!
//! For a branch curve `B` of degree `b` that meets each of three tangent
//! lines `L_i` only at its tangency point `P_i`, the connected number of
//! `L_1 + L_2 + L_3` for the cyclic cover of degree `b` is the largest
//! divisor `λ` of `b` for which some curve `D` of degree `b/λ` satisfies
//! `D|_{L_i} = (b/λ)·P_i` for all three lines. For the Fermat tangent lines
//! the existence of `D` is the congruence in [`carnot_exists`];
//! [`contact_divisor_oracle`] decides the same question by linear algebra.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fermat::{standard_triple, tangency_chart, triple_from_js};
use crate::polynomials::{restrict_to_line, TrivariateForm};
use crate::rng::{self, domains};

/// Default relative singular-value threshold for the oracle's kernel.
pub const DEFAULT_RANK_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CarnotQuery {
    pub mu: u32,
    pub j: [u32; 3],
    pub d: u32,
}

impl CarnotQuery {
    pub fn new(mu: u32, j: [u32; 3], d: u32) -> Result<Self> {
        if mu < 2 {
            return Err(Error::ConfigInvalid(format!(
                "mu must be at least 2, got {mu}"
            )));
        }
        if j.iter().any(|&ji| ji < 1 || ji > mu) {
            return Err(Error::ConfigInvalid(format!(
                "j entries must lie in 1..={mu}"
            )));
        }
        if d == 0 {
            return Err(Error::ConfigInvalid("d must be positive".into()));
        }
        Ok(Self { mu, j, d })
    }

    /// Exponent `2(j₁+j₂+j₃) - 3` of `ζ_{2μ}`.
    pub fn exponent(&self) -> u64 {
        2 * self.j.iter().map(|&x| x as u64).sum::<u64>() - 3
    }
}

/// True iff `(ζ_{2μ}^{2j₁+2j₂+2j₃-3})^{2d} = 1`, i.e. `2d·e ≡ 0 (mod 2μ)`.
pub fn carnot_exists(q: &CarnotQuery) -> bool {
    (2 * q.d as u64 * q.exponent()).is_multiple_of(2 * q.mu as u64)
}

pub fn divisors(n: u64) -> Vec<u64> {
    (1..=n).filter(|k| n.is_multiple_of(*k)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DivisorWitness {
    pub lambda: u64,
    pub d: u64,
    pub exists: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredictionReport {
    pub b: u64,
    pub mu: u64,
    pub nu: u64,
    pub j: [u32; 3],
    /// Predicted connected number.
    pub lambda: u64,
    pub witnesses: Vec<DivisorWitness>,
}

/// Largest divisor `λ` of `b` such that a degree-`b/λ` curve has full
/// contact with all three lines at their tangency points.
pub fn predicted_connected_number(b: u64, mu: u64, j: [u32; 3]) -> Result<PredictionReport> {
    if mu == 0 || !b.is_multiple_of(mu) {
        return Err(Error::NotADivisor { b, mu });
    }
    let mu32 = u32::try_from(mu).map_err(|_| Error::ConfigInvalid("mu too large".into()))?;
    let witnesses: Vec<DivisorWitness> = divisors(b)
        .into_iter()
        .map(|lambda| {
            let d = b / lambda;
            let q = CarnotQuery::new(mu32, j, d as u32)?;
            Ok(DivisorWitness {
                lambda,
                d,
                exists: carnot_exists(&q),
            })
        })
        .collect::<Result<_>>()?;
    let lambda = witnesses
        .iter()
        .filter(|w| w.exists)
        .map(|w| w.lambda)
        .max()
        .expect("d = b always satisfies the congruence");
    Ok(PredictionReport {
        b,
        mu,
        nu: b / mu,
        j,
        lambda,
        witnesses,
    })
}

/// Prediction for the standard triple `(1,1), (2,1), (3,μ)`.
pub fn predicted_standard(b: u64, mu: u64) -> Result<PredictionReport> {
    let mu32 = u32::try_from(mu).map_err(|_| Error::ConfigInvalid("mu too large".into()))?;
    let js = standard_triple(mu32)?.map(|i| i.j);
    predicted_connected_number(b, mu, js)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificateEntry {
    pub mu: u64,
    pub c: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ZariskiCertificate {
    pub b: u64,
    pub entries: Vec<CertificateEntry>,
    /// All predicted connected numbers differ.
    pub distinct: bool,
}

impl ZariskiCertificate {
    pub fn k(&self) -> usize {
        self.entries.len()
    }
}

/// One family member per divisor `μ ≥ 2` of `b`, with its predicted connected number.
pub fn zariski_certificate(b: u64) -> Result<ZariskiCertificate> {
    if b < 3 {
        return Err(Error::ConfigInvalid(format!(
            "b must be at least 3, got {b}"
        )));
    }
    let entries: Vec<CertificateEntry> = divisors(b)
        .into_iter()
        .filter(|&mu| mu >= 2)
        .map(|mu| {
            Ok(CertificateEntry {
                mu,
                c: predicted_standard(b, mu)?.lambda,
            })
        })
        .collect::<Result<_>>()?;
    let mut cs: Vec<u64> = entries.iter().map(|e| e.c).collect();
    cs.sort();
    cs.dedup();
    let distinct = cs.len() == entries.len();
    Ok(ZariskiCertificate {
        b,
        entries,
        distinct,
    })
}

/// Decides by linear algebra whether a degree-`d` curve `D` exists with
/// `D|_{L_i} = d·P_i` on the three tangent lines `L^μ_{i,j_i}`.
///
/// On the chart of `L_i` based at `P_i` the condition says the restriction
/// of `D` is a multiple of `t^d`: its coefficients of `t^0..t^{d-1}` vanish
/// and the `t^d` coefficient does not. The first part is the kernel of a
/// `3d × (d+1)(d+2)/2` matrix, computed by SVD; the second is tested on
/// seeded random kernel vectors.
pub fn contact_divisor_oracle(mu: u32, j: [u32; 3], d: u32, rank_tol: f64) -> Result<bool> {
    let triple = triple_from_js(mu, j)?;
    if d == 0 {
        return Err(Error::ConfigInvalid("d must be positive".into()));
    }
    let basis: Vec<TrivariateForm> = {
        let proto = TrivariateForm::zero(d);
        proto
            .terms()
            .map(|(e, _)| {
                TrivariateForm::from_terms(d, &[(e, Complex64::new(1.0, 0.0))])
                    .expect("monomial of degree d")
            })
            .collect()
    };
    let n = basis.len();
    // restrictions[i][k] = coefficients of basis form k on line i
    let restrictions: Vec<Vec<Vec<Complex64>>> = triple
        .iter()
        .map(|idx| {
            let chart = tangency_chart(idx);
            basis
                .iter()
                .map(|f| restrict_to_line(f, &chart).coefficients().to_vec())
                .collect()
        })
        .collect();

    let rows = (3 * d as usize).max(n);
    let mut a = DMatrix::<Complex64>::zeros(rows, n);
    for (i, per_line) in restrictions.iter().enumerate() {
        for (k, coeffs) in per_line.iter().enumerate() {
            for power in 0..d as usize {
                a[(i * d as usize + power, k)] = coeffs[power];
            }
        }
    }

    let svd = a.svd(false, true);
    let v_t = svd.v_t.expect("requested V");
    let sigma_max = svd.singular_values.max();
    let threshold = rank_tol * sigma_max.max(f64::MIN_POSITIVE);
    let mut kernel: Vec<Vec<Complex64>> = Vec::new();
    for (r, &s) in svd.singular_values.iter().enumerate() {
        if s > threshold / 10.0 && s < threshold * 10.0 {
            return Err(Error::NumericalRankAmbiguous {
                value: s,
                threshold,
            });
        }
        if s <= threshold {
            kernel.push((0..n).map(|k| v_t[(r, k)].conj()).collect());
        }
    }
    if kernel.is_empty() {
        return Ok(false);
    }

    let mut rng = rng::seeded(
        ((mu as u64) << 40)
            ^ ((d as u64) << 32)
            ^ ((j[0] as u64) << 16)
            ^ ((j[1] as u64) << 8)
            ^ j[2] as u64,
        domains::ORACLE_KERNEL,
    );
    for _ in 0..4 {
        let weights: Vec<Complex64> = kernel.iter().map(|_| rng::unit_disk(&mut rng)).collect();
        let v: Vec<Complex64> = (0..n)
            .map(|k| kernel.iter().zip(&weights).map(|(b, w)| b[k] * w).sum())
            .collect();
        let vnorm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if vnorm == 0.0 {
            continue;
        }
        let nonvanishing = restrictions.iter().all(|per_line| {
            let top: Complex64 = per_line
                .iter()
                .zip(&v)
                .map(|(coeffs, vk)| coeffs[d as usize] * vk)
                .sum();
            top.norm() >= 1e-6 * vnorm
        });
        if nonvanishing {
            return Ok(true);
        }
    }
    Ok(false)
}
