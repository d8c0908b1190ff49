//! Polar transform combinatorics.
//!
//! The encoder computes `x = u·B_L·F^{⊗l}` with `F = [[1, 0], [1, 1]]` and
//! `B_L` the bit-reversal permutation, built recursively: adjacent input pairs
//! are combined as `(u₂ᵢ₋₁ ⊕ u₂ᵢ, u₂ᵢ)`, the results are reverse-shuffled
//! (odd positions to the first half, even positions to the second), and each
//! half is encoded by the transform of half the length.
//!
//! Indices are 0-based in the API; reports convert to 1-based.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolarTransform {
    layers: u32,
    len: usize,
    reversal: Vec<usize>,
}

/// Reverses the lowest `bits` bits of `i`.
pub fn bit_reverse(i: usize, bits: u32) -> usize {
    if bits == 0 {
        0
    } else {
        i.reverse_bits() >> (usize::BITS - bits)
    }
}

pub fn log2_len(len: usize) -> Result<u32> {
    if len == 0 || !len.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(len));
    }
    Ok(len.trailing_zeros())
}

impl PolarTransform {
    pub fn new(len: usize) -> Result<Self> {
        let layers = log2_len(len)?;
        let reversal = (0..len).map(|i| bit_reverse(i, layers)).collect();
        Ok(Self {
            layers,
            len,
            reversal,
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn layers(&self) -> u32 {
        self.layers
    }

    /// The bit-reversal permutation, an involution.
    pub fn permutation(&self) -> &[usize] {
        &self.reversal
    }

    fn check(&self, u: &[u8]) -> Result<()> {
        if u.len() != self.len {
            return Err(Error::LengthMismatch {
                expected: self.len,
                got: u.len(),
            });
        }
        Ok(())
    }

    /// All intermediate vectors: element 0 is `u`, element `l` is the codeword.
    pub fn encode_layers(&self, u: &[u8]) -> Result<Vec<Vec<u8>>> {
        self.check(u)?;
        let mut out = vec![u.to_vec()];
        let mut cur = u.to_vec();
        for stage in 0..self.layers {
            let block = self.len >> stage;
            let half = block / 2;
            let mut next = vec![0u8; self.len];
            for (b, chunk) in cur.chunks_exact(block).enumerate() {
                let base = b * block;
                for k in 0..half {
                    next[base + k] = chunk[2 * k] ^ chunk[2 * k + 1];
                    next[base + half + k] = chunk[2 * k + 1];
                }
            }
            out.push(next.clone());
            cur = next;
        }
        Ok(out)
    }

    pub fn encode(&self, u: &[u8]) -> Result<Vec<u8>> {
        let mut x = u.to_vec();
        self.check(&x)?;
        encode_in_place(&mut x);
        Ok(x)
    }

    /// `b_i` for every output position `i`: the inputs `j` on which `x_i` depends.
    pub fn bit_index_sets(&self) -> Vec<Vec<usize>> {
        let mut sets = vec![Vec::new(); self.len];
        let mut u = vec![0u8; self.len];
        for j in 0..self.len {
            u[j] = 1;
            let x = self.encode(&u).expect("length checked");
            u[j] = 0;
            for (i, &xi) in x.iter().enumerate() {
                if xi == 1 {
                    sets[i].push(j);
                }
            }
        }
        sets
    }
}

/// Encodes a power-of-two length slice in place.
pub fn encode_in_place(u: &mut [u8]) {
    let len = u.len();
    if len <= 1 {
        return;
    }
    let half = len / 2;
    let mut tmp = vec![0u8; len];
    for k in 0..half {
        tmp[k] = u[2 * k] ^ u[2 * k + 1];
        tmp[half + k] = u[2 * k + 1];
    }
    u.copy_from_slice(&tmp);
    let (a, b) = u.split_at_mut(half);
    encode_in_place(a);
    encode_in_place(b);
}

/// Frozen subchannel indices (0-based, sorted); frozen values are zero.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrozenSet {
    len: usize,
    indices: Vec<usize>,
}

impl FrozenSet {
    pub fn new(len: usize, mut indices: Vec<usize>) -> Result<Self> {
        log2_len(len)?;
        indices.sort_unstable();
        indices.dedup();
        if indices.last().is_some_and(|&i| i >= len) {
            return Err(Error::InvalidParameter(format!(
                "frozen index out of range for length {len}"
            )));
        }
        Ok(Self { len, indices })
    }

    pub fn none(len: usize) -> Result<Self> {
        Self::new(len, Vec::new())
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    /// 1-based indices for reports.
    pub fn one_based(&self) -> Vec<usize> {
        self.indices.iter().map(|i| i + 1).collect()
    }

    pub fn info_count(&self) -> usize {
        self.len - self.indices.len()
    }

    pub fn mask(&self) -> Vec<bool> {
        let mut m = vec![false; self.len];
        for &i in &self.indices {
            m[i] = true;
        }
        m
    }
}

/// Freezes the `⌈(1 − rate)·L⌉` least reliable indices by Bhattacharyya value.
///
/// Larger `Z` is frozen first; ties freeze the smaller index first.
pub fn select_frozen_by_z(z: &[f64], rate: f64) -> Result<FrozenSet> {
    if !(rate > 0.0 && rate <= 1.0) {
        return Err(Error::InvalidParameter(format!("rate {rate} not in (0, 1]")));
    }
    let len = z.len();
    let count = (((1.0 - rate) * len as f64) - 1e-9).ceil().max(0.0) as usize;
    let mut order: Vec<usize> = (0..len).collect();
    order.sort_by(|&a, &b| z[b].total_cmp(&z[a]).then(a.cmp(&b)));
    FrozenSet::new(len, order[..count].to_vec())
}

pub fn select_frozen(report: &crate::trellis::PolarIndexReport, rate: f64) -> Result<FrozenSet> {
    if report.rows.len() != report.len || report.rows.iter().enumerate().any(|(k, r)| r.index != k + 1) {
        return Err(Error::Missing(format!(
            "report must cover all {} indices in order",
            report.len
        )));
    }
    let z: Vec<f64> = report.rows.iter().map(|r| r.z.value).collect();
    select_frozen_by_z(&z, rate)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// `B_L·F^{⊗l}` built from explicit Kronecker products and a permutation matrix.
    fn generator(len: usize) -> Vec<Vec<u8>> {
        let mut g = vec![vec![1u8]];
        while g.len() < len {
            let m = g.len();
            let mut next = vec![vec![0u8; 2 * m]; 2 * m];
            for i in 0..m {
                for j in 0..m {
                    next[i][j] = g[i][j];
                    next[m + i][j] = g[i][j];
                    next[m + i][m + j] = g[i][j];
                }
            }
            g = next;
        }
        let bits = len.trailing_zeros();
        // Row i of B·G is row bitrev(i) of G.
        (0..len).map(|i| g[bit_reverse(i, bits)].clone()).collect()
    }

    fn mat_encode(g: &[Vec<u8>], u: &[u8]) -> Vec<u8> {
        let len = u.len();
        (0..len)
            .map(|i| (0..len).fold(0u8, |acc, j| acc ^ (u[j] & g[j][i])))
            .collect()
    }

    #[test]
    fn kernel_and_length_four() {
        let t = PolarTransform::new(2).unwrap();
        assert_eq!(t.encode(&[1, 0]).unwrap(), vec![1, 0]);
        assert_eq!(t.encode(&[0, 1]).unwrap(), vec![1, 1]);
        assert_eq!(t.encode(&[1, 1]).unwrap(), vec![0, 1]);
        let t = PolarTransform::new(4).unwrap();
        // x = (u₁⊕u₂⊕u₃⊕u₄, u₃⊕u₄, u₂⊕u₄, u₄)
        for v in 0..16u8 {
            let u: Vec<u8> = (0..4).map(|k| (v >> k) & 1).collect();
            let x = t.encode(&u).unwrap();
            assert_eq!(x, vec![u[0] ^ u[1] ^ u[2] ^ u[3], u[2] ^ u[3], u[1] ^ u[3], u[3]]);
        }
        let heavy = t.encode(&[0, 0, 0, 1]).unwrap();
        assert_eq!(heavy.iter().filter(|&&b| b == 1).count(), 4);
    }

    #[test]
    fn matches_matrix_oracle() {
        for len in [2usize, 4, 8, 16] {
            let g = generator(len);
            let t = PolarTransform::new(len).unwrap();
            for v in 0..(1u32 << len.min(12)) {
                let u: Vec<u8> = (0..len).map(|k| ((v >> (k % 12)) & 1) as u8).collect();
                assert_eq!(t.encode(&u).unwrap(), mat_encode(&g, &u));
            }
            // Generator squared is the identity over GF(2).
            for i in 0..len {
                let row = mat_encode(&g, &g[i]);
                let unit: Vec<u8> = (0..len).map(|j| u8::from(i == j)).collect();
                assert_eq!(row, unit);
            }
        }
    }

    #[test]
    fn layers_end_in_codeword() {
        let t = PolarTransform::new(8).unwrap();
        let u = [1, 0, 1, 1, 0, 0, 1, 0];
        let layers = t.encode_layers(&u).unwrap();
        assert_eq!(layers.len(), 4);
        assert_eq!(layers[0], u.to_vec());
        assert_eq!(layers[3], t.encode(&u).unwrap());
    }

    #[test]
    fn bit_index_sets_small() {
        let t = PolarTransform::new(4).unwrap();
        let b = t.bit_index_sets();
        assert_eq!(b[0], vec![0, 1, 2, 3]);
        assert_eq!(b[1], vec![2, 3]);
        assert_eq!(b[2], vec![1, 3]);
        assert_eq!(b[3], vec![3]);
        for len in [8usize, 16] {
            let g = generator(len);
            let b = PolarTransform::new(len).unwrap().bit_index_sets();
            for i in 0..len {
                let from_matrix: Vec<usize> = (0..len).filter(|&j| g[j][i] == 1).collect();
                assert_eq!(b[i], from_matrix);
            }
        }
    }

    #[test]
    fn permutation_is_involution() {
        for len in [1usize, 2, 8, 1024] {
            let t = PolarTransform::new(len).unwrap();
            let p = t.permutation();
            assert!((0..len).all(|i| p[p[i]] == i));
        }
        assert!(PolarTransform::new(6).is_err());
    }

    #[test]
    fn involution_at_256() {
        use rand::Rng;
        let t = PolarTransform::new(256).unwrap();
        let mut rng = crate::rng::stream_rng(1, 0);
        for _ in 0..1000 {
            let u: Vec<u8> = (0..256).map(|_| rng.random::<bool>() as u8).collect();
            assert_eq!(t.encode(&t.encode(&u).unwrap()).unwrap(), u);
        }
    }

    proptest! {
        #[test]
        fn involution_and_linearity(l in 1u32..=10, seed: u64) {
            use rand::Rng;
            let len = 1usize << l;
            let t = PolarTransform::new(len).unwrap();
            let mut rng = crate::rng::stream_rng(seed, 0);
            let u: Vec<u8> = (0..len).map(|_| rng.random::<bool>() as u8).collect();
            let v: Vec<u8> = (0..len).map(|_| rng.random::<bool>() as u8).collect();
            let x = t.encode(&u).unwrap();
            prop_assert_eq!(t.encode(&x).unwrap(), u.clone());
            let uv: Vec<u8> = u.iter().zip(&v).map(|(a, b)| a ^ b).collect();
            let xv = t.encode(&v).unwrap();
            let sum: Vec<u8> = x.iter().zip(&xv).map(|(a, b)| a ^ b).collect();
            prop_assert_eq!(t.encode(&uv).unwrap(), sum);
        }

        #[test]
        fn flipping_an_input_flips_its_index_set(l in 1u32..=6, j in 0usize..64, seed: u64) {
            use rand::Rng;
            let len = 1usize << l;
            let j = j % len;
            let t = PolarTransform::new(len).unwrap();
            let sets = t.bit_index_sets();
            let mut rng = crate::rng::stream_rng(seed, 0);
            let mut u: Vec<u8> = (0..len).map(|_| rng.random::<bool>() as u8).collect();
            let x = t.encode(&u).unwrap();
            u[j] ^= 1;
            let y = t.encode(&u).unwrap();
            for i in 0..len {
                prop_assert_eq!(x[i] != y[i], sets[i].contains(&j));
            }
        }
    }

    #[test]
    fn frozen_selection() {
        let z = [0.5, 0.9, 0.1, 0.9, 0.3, 0.7, 0.2, 0.0];
        assert!(select_frozen_by_z(&z, 1.0).unwrap().is_empty());
        let f = select_frozen_by_z(&z, 0.5).unwrap();
        assert_eq!(f.indices(), &[0, 1, 3, 5]);
        assert_eq!(f.one_based(), vec![1, 2, 4, 6]);
        let flat = [0.4; 8];
        assert_eq!(select_frozen_by_z(&flat, 0.5).unwrap().indices(), &[0, 1, 2, 3]);
        assert_eq!(select_frozen_by_z(&flat, 0.3).unwrap().indices().len(), 6);
        assert!(select_frozen_by_z(&z, 0.0).is_err());
        assert!(select_frozen_by_z(&z, 1.5).is_err());
    }
}
