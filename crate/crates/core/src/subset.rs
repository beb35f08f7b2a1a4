//! Bitmask indexing of the nonempty node subsets of a finite network.
//!
//! Subset `Ω` is the mask with bit `m` set for every `m ∈ Ω`; its position in
//! a dense state vector is `mask − 1`, so the empty set is never stored.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::network::{GeneralNetwork, MASTER_NODE_CAP};

const CHUNK_BITS: usize = 10;
const CHUNK: usize = 1 << CHUNK_BITS;

/// Per-subset rate sums of a [`GeneralNetwork`].
///
/// `q_{k→Ω} = Σ_{m∈Ω} q_{k→m}` is read from two tables over the low and high
/// ten bits of the mask, so the footprint stays `O(M·2^{M/2})` per node.
#[derive(Debug, Clone)]
pub struct SubsetIndex {
    nodes: usize,
    p_base: Vec<f64>,
    p_gain: Vec<f64>,
    out_base: Vec<f64>,
    out_gain: Vec<f64>,
    lo_len: usize,
    hi_len: usize,
    lo_base: Vec<f64>,
    lo_gain: Vec<f64>,
    hi_base: Vec<f64>,
    hi_gain: Vec<f64>,
}

fn chunk_sums(net: &GeneralNetwork, k: usize, offset: usize, len: usize, base: &mut [f64], gain: &mut [f64]) {
    let m = net.nodes();
    for bits in 1..len {
        // extend the sum of `bits` without its lowest set bit
        let low = bits.trailing_zeros() as usize;
        let rest = bits & (bits - 1);
        let node = offset + low;
        let (b, g) = if node < m {
            (net.q_base()[k * m + node], net.q_gain()[k * m + node])
        } else {
            (0.0, 0.0)
        };
        base[bits] = base[rest] + b;
        gain[bits] = gain[rest] + g;
    }
}

impl SubsetIndex {
    pub fn new(net: &GeneralNetwork) -> Result<Self> {
        Self::with_cap(net, MASTER_NODE_CAP)
    }

    /// Builds the index, rejecting networks above `cap` nodes.
    pub fn with_cap(net: &GeneralNetwork, cap: usize) -> Result<Self> {
        let m = net.nodes();
        if m > cap || m >= usize::BITS as usize - 1 {
            return Err(Error::NetworkTooLarge { nodes: m, cap });
        }
        let full = 1usize << m;
        let lo_len = 1usize << m.min(CHUNK_BITS);
        let hi_len = 1usize << m.saturating_sub(CHUNK_BITS);
        let mut lo_base = vec![0.0; m * lo_len];
        let mut lo_gain = vec![0.0; m * lo_len];
        let mut hi_base = vec![0.0; m * hi_len];
        let mut hi_gain = vec![0.0; m * hi_len];
        for k in 0..m {
            let r = k * lo_len..(k + 1) * lo_len;
            chunk_sums(net, k, 0, lo_len, &mut lo_base[r.clone()], &mut lo_gain[r]);
            let r = k * hi_len..(k + 1) * hi_len;
            chunk_sums(net, k, CHUNK_BITS, hi_len, &mut hi_base[r.clone()], &mut hi_gain[r]);
        }
        let mut idx = SubsetIndex {
            nodes: m,
            p_base: vec![0.0; full],
            p_gain: vec![0.0; full],
            out_base: vec![0.0; full],
            out_gain: vec![0.0; full],
            lo_len,
            hi_len,
            lo_base,
            lo_gain,
            hi_base,
            hi_gain,
        };
        for mask in 1..full {
            let low = mask.trailing_zeros() as usize;
            let rest = mask & (mask - 1);
            idx.p_base[mask] = idx.p_base[rest] + net.p_base()[low];
            idx.p_gain[mask] = idx.p_gain[rest] + net.p_gain()[low];
            let (mut ob, mut og) = (0.0, 0.0);
            for k in (0..m).filter(|k| mask & (1 << k) == 0) {
                ob += idx.q_base(k, mask);
                og += idx.q_gain(k, mask);
            }
            idx.out_base[mask] = ob;
            idx.out_gain[mask] = og;
        }
        Ok(idx)
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    /// Number of stored subsets, `2^M − 1`.
    pub fn len(&self) -> usize {
        (1usize << self.nodes) - 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn full_mask(&self) -> usize {
        self.len()
    }

    #[inline]
    pub fn index(mask: usize) -> usize {
        mask - 1
    }

    #[inline]
    pub fn mask(index: usize) -> usize {
        index + 1
    }

    /// Index of the singleton `{j}`.
    #[inline]
    pub fn singleton(j: usize) -> usize {
        (1usize << j) - 1
    }

    #[inline]
    pub fn p_base(&self, mask: usize) -> f64 {
        self.p_base[mask]
    }

    #[inline]
    pub fn p_gain(&self, mask: usize) -> f64 {
        self.p_gain[mask]
    }

    /// `Σ_{k∉Ω} q_{k→Ω}` at zero spend.
    #[inline]
    pub fn out_base(&self, mask: usize) -> f64 {
        self.out_base[mask]
    }

    #[inline]
    pub fn out_gain(&self, mask: usize) -> f64 {
        self.out_gain[mask]
    }

    #[inline]
    pub fn q_base(&self, k: usize, mask: usize) -> f64 {
        self.lo_base[k * self.lo_len + (mask & (CHUNK - 1))]
            + self.hi_base[k * self.hi_len + (mask >> CHUNK_BITS)]
    }

    #[inline]
    pub fn q_gain(&self, k: usize, mask: usize) -> f64 {
        self.lo_gain[k * self.lo_len + (mask & (CHUNK - 1))]
            + self.hi_gain[k * self.hi_len + (mask >> CHUNK_BITS)]
    }

    /// `p_Ω(φ_p)`.
    #[inline]
    pub fn p(&self, mask: usize, phi_p: f64) -> f64 {
        self.p_base[mask] + self.p_gain[mask] * phi_p
    }

    /// `q_{k→Ω}(φ_q)`.
    #[inline]
    pub fn q(&self, k: usize, mask: usize, phi_q: f64) -> f64 {
        self.q_base(k, mask) + self.q_gain(k, mask) * phi_q
    }

    /// Total exit rate `p_Ω + Σ_{k∉Ω} q_{k→Ω}`.
    #[inline]
    pub fn exit_rate(&self, mask: usize, phi_p: f64, phi_q: f64) -> f64 {
        self.p(mask, phi_p) + self.out_base[mask] + self.out_gain[mask] * phi_q
    }
}
