//! Linear deterministic channels over a prime field: transfer matrices and rank-based cut values.

use crate::cutgraph::{self, CutEvaluator};
use crate::error::{Error, Result};
use crate::net::{ChannelModel, Network, NodeSet};
use crate::schedule::{Cut, GroupSchedule, ModeConfig, Schedule};

/// Dense matrix over `F_p`, row-major, entries in `0..p`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldMatrix {
    p: u64,
    rows: usize,
    cols: usize,
    data: Vec<u64>,
}

#[inline]
fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, p: u64) -> u64 {
    let mut acc = 1 % p;
    base %= p;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, p);
        }
        base = mul_mod(base, base, p);
        exp >>= 1;
    }
    acc
}

/// Multiplicative inverse of a nonzero element of the prime field `F_p`.
#[inline]
fn inv_mod(a: u64, p: u64) -> u64 {
    pow_mod(a, p - 2, p)
}

impl FieldMatrix {
    pub fn zeros(p: u64, rows: usize, cols: usize) -> Self {
        FieldMatrix { p, rows, cols, data: vec![0; rows * cols] }
    }

    /// Builds from rows, reducing every entry mod `p`. All rows must share one length.
    pub fn from_rows(p: u64, rows: &[Vec<u64>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == cols), "ragged field matrix");
        let data = rows.iter().flatten().map(|&x| x % p).collect();
        FieldMatrix { p, rows: rows.len(), cols, data }
    }

    /// `S^j` for the `k x k` down-shift `S` (ones on the subdiagonal).
    pub fn shift_power(p: u64, k: usize, j: usize) -> Self {
        let mut m = FieldMatrix::zeros(p, k, k);
        for i in j..k {
            m.set(i, i - j, 1);
        }
        m
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> u64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, x: u64) {
        self.data[r * self.cols + c] = x % self.p;
    }

    pub fn to_rows(&self) -> Vec<Vec<u64>> {
        self.data.chunks(self.cols.max(1)).take(self.rows).map(<[u64]>::to_vec).collect()
    }

    /// Rank over `F_p` by Gaussian elimination in exact modular arithmetic.
    pub fn rank(&self) -> usize {
        rank_mod_p(self)
    }
}

/// ADT channel: shift level `n` on vectors of length `k`, i.e. the matrix `S^(k-n)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ShiftMatrix {
    pub k: usize,
    pub n: usize,
}

impl ShiftMatrix {
    pub fn new(k: usize, n: usize) -> Option<Self> {
        (n <= k).then_some(ShiftMatrix { k, n })
    }

    pub fn expand(&self, p: u64) -> FieldMatrix {
        FieldMatrix::shift_power(p, self.k, self.k - self.n)
    }
}

/// Rank over `F_p`.
pub fn rank_mod_p(m: &FieldMatrix) -> usize {
    let p = m.p;
    let (rows, cols) = (m.rows, m.cols);
    let mut a = m.data.clone();
    let mut rank = 0;
    for c in 0..cols {
        if rank == rows {
            break;
        }
        let Some(pivot) = (rank..rows).find(|&r| a[r * cols + c] != 0) else {
            continue;
        };
        if pivot != rank {
            for j in 0..cols {
                a.swap(pivot * cols + j, rank * cols + j);
            }
        }
        let inv = inv_mod(a[rank * cols + c], p);
        for j in c..cols {
            a[rank * cols + j] = mul_mod(a[rank * cols + j], inv, p);
        }
        for r in rank + 1..rows {
            let f = a[r * cols + c];
            if f == 0 {
                continue;
            }
            for j in c..cols {
                let sub = mul_mod(f, a[rank * cols + j], p);
                a[r * cols + j] = (a[r * cols + j] + p - sub) % p;
            }
        }
        rank += 1;
    }
    rank
}

/// Block transfer matrix from the stacked inputs of `tx` to the stacked outputs of `rx`.
/// Block `(v, u)` is the channel `u -> v`, zero when there is no edge.
pub fn transfer_matrix(net: &Network, tx: NodeSet, rx: NodeSet) -> Result<FieldMatrix> {
    let ChannelModel::LinearDeterministic { p, k } = net.model() else {
        return Err(Error::ModelMismatch { expected: "linear deterministic" });
    };
    let mut lambda = FieldMatrix::zeros(p, rx.len() * k, tx.len() * k);
    for (bi, v) in rx.iter().enumerate() {
        for (ai, u) in tx.iter().enumerate() {
            if let Some(g) = net.field_gain(u, v) {
                for r in 0..k {
                    for c in 0..k {
                        let x = g.get(r, c);
                        if x != 0 {
                            lambda.set(bi * k + r, ai * k + c, x);
                        }
                    }
                }
            }
        }
    }
    Ok(lambda)
}

/// `rank(Λ_{A,B})` for transmitter set `A` and receiver set `B`.
pub(crate) fn set_rank(net: &Network, tx: NodeSet, rx: NodeSet) -> usize {
    if tx.is_empty() || rx.is_empty() {
        return 0;
    }
    transfer_matrix(net, tx, rx).map(|m| m.rank()).unwrap_or(0)
}

fn require_lindet(net: &Network) -> Result<()> {
    match net.model() {
        ChannelModel::LinearDeterministic { .. } => Ok(()),
        _ => Err(Error::ModelMismatch { expected: "linear deterministic" }),
    }
}

/// Rank of the transfer matrix from `Ω ∩ T(m)` to `Ω^c ∩ R(m)`.
pub fn lindet_mode_cut_value(net: &Network, cut: &Cut, mode: &ModeConfig) -> Result<usize> {
    require_lindet(net)?;
    let omega = cut.omega();
    let n = net.num_nodes();
    let a = omega.intersect(mode.transmitters());
    let b = omega.complement(n).intersect(mode.receivers());
    Ok(set_rank(net, a, b))
}

/// Expected rank across the cut under a joint schedule.
pub fn lindet_expected_cut_value(net: &Network, cut: &Cut, q: &Schedule) -> Result<f64> {
    require_lindet(net)?;
    Ok(CutEvaluator::new(net).expected(cut.omega(), q))
}

/// Component-decomposed expected rank under local distributions.
pub fn lindet_decomposed_cut_value(net: &Network, cut: &Cut, locals: &GroupSchedule) -> Result<f64> {
    require_lindet(net)?;
    cutgraph::decomposed_cut_value_any(net, cut, locals)
}
