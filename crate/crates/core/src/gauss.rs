//! Cut values for independent unit-power Gaussian inputs.
//!
//! For transmitters `A` and receivers `B` with `|B| x |A|` gain matrix `H`, the cut carries
//! `log2 det(I + H H^†)` bits, halved for real-valued channels. The determinant is taken
//! through a Cholesky factor of the smaller of `I + H H^†` and `I + H^† H`.

use num_complex::Complex64;

use crate::cutgraph::{self, CutEvaluator};
use crate::error::{Error, Result};
use crate::net::{ChannelModel, Network, NodeSet};
use crate::schedule::{Cut, GroupSchedule, ModeConfig, Schedule};

/// Natural log of `det(M)` for Hermitian positive definite `M` (row-major, `n x n`).
///
/// Returns `None` if a pivot is not strictly positive.
pub fn hermitian_logdet(m: &[Complex64], n: usize) -> Option<f64> {
    let mut l = vec![Complex64::new(0.0, 0.0); n * n];
    let mut logdet = 0.0;
    for j in 0..n {
        let mut d = m[j * n + j].re;
        for k in 0..j {
            d -= l[j * n + k].norm_sqr();
        }
        if !(d > 0.0) {
            return None;
        }
        let ljj = d.sqrt();
        l[j * n + j] = Complex64::new(ljj, 0.0);
        logdet += 2.0 * ljj.ln();
        for i in j + 1..n {
            let mut s = m[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k].conj();
            }
            l[i * n + j] = s / ljj;
        }
    }
    Some(logdet)
}

/// Gaussian mutual information in bits from `tx` to `rx`.
pub(crate) fn set_mutual_info(net: &Network, tx: NodeSet, rx: NodeSet) -> f64 {
    if tx.is_empty() || rx.is_empty() {
        return 0.0;
    }
    let a: Vec<usize> = tx.to_vec();
    let b: Vec<usize> = rx.to_vec();
    // Gram matrix over the smaller side.
    let (dim, gram) = if b.len() <= a.len() {
        let d = b.len();
        let mut g = vec![Complex64::new(0.0, 0.0); d * d];
        for (i, &vi) in b.iter().enumerate() {
            for (j, &vj) in b.iter().enumerate().skip(i) {
                let mut s = Complex64::new(0.0, 0.0);
                for &u in &a {
                    s += net.gauss_gain(u, vi) * net.gauss_gain(u, vj).conj();
                }
                g[i * d + j] = s;
                g[j * d + i] = s.conj();
            }
            g[i * d + i] += 1.0;
        }
        (d, g)
    } else {
        let d = a.len();
        let mut g = vec![Complex64::new(0.0, 0.0); d * d];
        for (i, &ui) in a.iter().enumerate() {
            for (j, &uj) in a.iter().enumerate().skip(i) {
                let mut s = Complex64::new(0.0, 0.0);
                for &v in &b {
                    s += net.gauss_gain(ui, v).conj() * net.gauss_gain(uj, v);
                }
                g[i * d + j] = s;
                g[j * d + i] = s.conj();
            }
            g[i * d + i] += 1.0;
        }
        (d, g)
    };
    let logdet = hermitian_logdet(&gram, dim).expect("I + H H^† is positive definite");
    let bits = logdet / std::f64::consts::LN_2;
    match net.model() {
        ChannelModel::GaussianReal => 0.5 * bits,
        _ => bits,
    }
}

fn require_gaussian(net: &Network) -> Result<()> {
    if net.model().is_gaussian() {
        Ok(())
    } else {
        Err(Error::ModelMismatch { expected: "Gaussian" })
    }
}

/// Bits across `cut` in mode `m`: from `Ω ∩ T(m)` to `Ω^c ∩ R(m)`.
pub fn mode_cut_value(net: &Network, cut: &Cut, mode: &ModeConfig) -> Result<f64> {
    require_gaussian(net)?;
    let omega = cut.omega();
    let a = omega.intersect(mode.transmitters());
    let b = omega.complement(net.num_nodes()).intersect(mode.receivers());
    Ok(set_mutual_info(net, a, b))
}

/// `Σ_m q(m) · mode_cut_value(cut, m)` over the support of `q`.
pub fn expected_cut_value(net: &Network, cut: &Cut, q: &Schedule) -> Result<f64> {
    require_gaussian(net)?;
    Ok(CutEvaluator::new(net).expected(cut.omega(), q))
}

/// Cut value summed over the connected components of the cut graph, each weighted by the
/// local distribution of the first group that covers it.
pub fn decomposed_cut_value(net: &Network, cut: &Cut, locals: &GroupSchedule) -> Result<f64> {
    require_gaussian(net)?;
    cutgraph::decomposed_cut_value_any(net, cut, locals)
}
