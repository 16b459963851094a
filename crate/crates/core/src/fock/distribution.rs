//! Output photon-number distributions by direct expansion of creation
//! operators through the dilated network.

use std::collections::BTreeMap;

use num_complex::Complex64;

use super::{FockInput, ModeNetwork};
use crate::error::{Error, Result};

/// Probability of each signal-mode occupation pattern. Particles lost to the
/// loss modes are traced out, so patterns may hold fewer particles than were
/// sent in.
pub type Distribution = BTreeMap<Vec<u8>, f64>;

/// Sum of the distribution may deviate from 1 by at most this much.
const NORMALIZATION_TOL: f64 = 1e-10;

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Output distribution over the signal modes for `input`.
///
/// Each particle `j` in input mode `m_j` with internal state `v_j` is created
/// by `sum_{o,k} W[o, m_j] v_j[k] a^dagger_{o,k}`. The product of these
/// operators is expanded into monomials over the (port, internal) modes; a
/// monomial with coefficient `c` and occupations `n` has probability
/// `|c|^2 prod n!`.
pub fn output_distribution(net: &ModeNetwork, input: &FockInput) -> Result<Distribution> {
    let m = net.signal_modes();
    if input.occupations().len() != m {
        return Err(Error::Precondition(format!(
            "input has {} modes, network has {m}",
            input.occupations().len()
        )));
    }
    let n = input.particles();
    if n > super::MAX_PARTICLES {
        return Err(Error::UnsupportedScale(n));
    }
    let w = net.dilation();
    let ports = w.nrows();
    let states = input.internal_states();
    let d = states.first().map_or(1, Vec::len).max(1);

    let mut terms: BTreeMap<Vec<usize>, Complex64> = BTreeMap::new();
    terms.insert(Vec::new(), Complex64::new(1.0, 0.0));
    for (mode, v) in input.particle_modes().into_iter().zip(&states) {
        let mut next: BTreeMap<Vec<usize>, Complex64> = BTreeMap::new();
        for (key, coeff) in &terms {
            for o in 0..ports {
                let wo = w[(o, mode)];
                if wo == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for (k, vk) in v.iter().enumerate() {
                    if *vk == 0.0 {
                        continue;
                    }
                    let label = o * d + k;
                    let mut new_key = key.clone();
                    let at = new_key.partition_point(|x| *x <= label);
                    new_key.insert(at, label);
                    *next.entry(new_key).or_default() += coeff * wo * *vk;
                }
            }
        }
        terms = next;
    }

    let mut dist = Distribution::new();
    for (key, coeff) in terms {
        let mut weight = coeff.norm_sqr();
        let mut pattern = vec![0u8; m];
        let mut run = 0usize;
        for (i, label) in key.iter().enumerate() {
            run += 1;
            if i + 1 == key.len() || key[i + 1] != *label {
                weight *= factorial(run);
                run = 0;
            }
            let port = label / d;
            if port < m {
                pattern[port] += 1;
            }
        }
        *dist.entry(pattern).or_default() += weight;
    }
    dist.retain(|_, p| *p > 0.0);

    let total: f64 = dist.values().sum();
    if (total - 1.0).abs() > NORMALIZATION_TOL {
        return Err(Error::ProbabilityRange {
            what: "total output probability".into(),
            value: total,
        });
    }
    Ok(dist)
}

/// `p[o][i]`: probability that a single particle entering signal mode `i`
/// leaves through signal mode `o`, computed by running one particle at a time.
pub fn routing_probabilities(net: &ModeNetwork) -> Result<Vec<Vec<f64>>> {
    let m = net.signal_modes();
    let mut p = vec![vec![0.0; m]; m];
    for i in 0..m {
        let mut occ = vec![0u8; m];
        occ[i] = 1;
        let dist = output_distribution(net, &FockInput::indistinguishable(occ)?)?;
        for (o, row) in p.iter_mut().enumerate() {
            let mut pattern = vec![0u8; m];
            pattern[o] = 1;
            row[i] = dist.get(&pattern).copied().unwrap_or(0.0);
        }
    }
    Ok(p)
}

/// Two-port coincidence bookkeeping for one particle per input.
struct Coincidence {
    p11: f64,
    /// Both particles take the direct path.
    through: f64,
    /// Both particles take the crossed path.
    crossed: f64,
}

fn coincidence(net: &ModeNetwork, dist: &Distribution) -> Result<Coincidence> {
    if net.signal_modes() != 2 {
        return Err(Error::Precondition(
            "two-photon correlation needs a two-mode network".into(),
        ));
    }
    let p = routing_probabilities(net)?;
    Ok(Coincidence {
        p11: dist.get(&vec![1, 1]).copied().unwrap_or(0.0),
        through: p[0][0] * p[1][1],
        crossed: p[0][1] * p[1][0],
    })
}

/// Normalized two-photon coincidence for one particle in each input of a
/// two-mode network:
///
/// ```text
/// g2 = 1 + (P11 - P_through - P_crossed) / (2 sqrt(P_through P_crossed))
/// ```
///
/// The excess coincidence is measured against the largest interference term
/// the two paths can produce, so `g2 - 1` is the interference visibility.
/// For a balanced splitter this equals `P11 / (P_through + P_crossed)`.
pub fn g2_from_distribution(net: &ModeNetwork, dist: &Distribution) -> Result<f64> {
    let c = coincidence(net, dist)?;
    let scale = 2.0 * (c.through * c.crossed).sqrt();
    if !(scale > 0.0) {
        return Err(Error::UndefinedCorrelation);
    }
    Ok(1.0 + (c.p11 - c.through - c.crossed) / scale)
}

/// `P11 / (P_through + P_crossed)`: the coincidence rate relative to fully
/// distinguishable particles. Reaches `1 + 2x / (1 + x^2)` rather than 2 for
/// indistinguishable particles when `x = |t1 t2| / |r1 r2|` differs from 1.
pub fn g2_product_normalized(net: &ModeNetwork, dist: &Distribution) -> Result<f64> {
    let c = coincidence(net, dist)?;
    let reference = c.through + c.crossed;
    if !(reference > 0.0) {
        return Err(Error::UndefinedCorrelation);
    }
    Ok(c.p11 / reference)
}

/// Triple coincidence `P111` over its value for distinguishable particles,
/// the permanent of the single-particle routing matrix.
pub fn g3_from_distribution(net: &ModeNetwork, dist: &Distribution) -> Result<f64> {
    if net.signal_modes() != 3 {
        return Err(Error::Precondition(
            "three-photon correlation needs a three-mode network".into(),
        ));
    }
    let p = routing_probabilities(net)?;
    const PERMS: [[usize; 3]; 6] = [
        [0, 1, 2],
        [0, 2, 1],
        [1, 0, 2],
        [1, 2, 0],
        [2, 0, 1],
        [2, 1, 0],
    ];
    let reference: f64 = PERMS
        .iter()
        .map(|s| (0..3).map(|i| p[s[i]][i]).product::<f64>())
        .sum();
    if !(reference > 0.0) {
        return Err(Error::UndefinedCorrelation);
    }
    Ok(dist.get(&vec![1, 1, 1]).copied().unwrap_or(0.0) / reference)
}
