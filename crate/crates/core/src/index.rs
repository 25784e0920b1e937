//! Flat indexing of Cartesian outcome spaces.
//!
//! A tuple of variables `(V1, .., Vk)` with domain sizes `(d1, .., dk)` is
//! flattened with the first variable varying slowest and the last fastest:
//! `o1·(d2·…·dk) + o2·(d3·…·dk) + … + ok`. Every matrix in the crate uses this
//! convention for both its rows and its columns.

/// Mixed-radix index over a tuple of finite domains.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutcomeIndex {
    dims: Vec<usize>,
    strides: Vec<usize>,
    size: usize,
}

impl OutcomeIndex {
    pub fn new(dims: Vec<usize>) -> Self {
        let mut strides = vec![0; dims.len()];
        let mut acc = 1usize;
        for (i, &d) in dims.iter().enumerate().rev() {
            strides[i] = acc;
            acc *= d;
        }
        OutcomeIndex {
            dims,
            strides,
            size: acc,
        }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn strides(&self) -> &[usize] {
        &self.strides
    }

    /// Number of joint outcomes (1 for the empty tuple).
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn encode(&self, tuple: &[usize]) -> usize {
        debug_assert_eq!(tuple.len(), self.dims.len());
        tuple.iter().zip(&self.strides).map(|(o, s)| o * s).sum()
    }

    pub fn decode(&self, flat: usize) -> Vec<usize> {
        let mut out = vec![0; self.dims.len()];
        self.decode_into(flat, &mut out);
        out
    }

    pub fn decode_into(&self, mut flat: usize, out: &mut [usize]) {
        debug_assert!(flat < self.size);
        for (i, &s) in self.strides.iter().enumerate() {
            out[i] = flat / s;
            flat %= s;
        }
    }
}

/// Advance `state` to the next tuple in flat order. Returns `false` after the
/// last tuple (the state wraps back to all zeros).
pub(crate) fn advance(state: &mut [usize], dims: &[usize]) -> bool {
    for i in (0..state.len()).rev() {
        state[i] += 1;
        if state[i] < dims[i] {
            return true;
        }
        state[i] = 0;
    }
    false
}

/// For a reordering of axes, map each flat index of the target ordering to the
/// flat index of the source ordering.
///
/// `perm[k]` is the source position of the k-th target axis.
pub fn axis_permutation(source_dims: &[usize], perm: &[usize]) -> Vec<usize> {
    debug_assert_eq!(source_dims.len(), perm.len());
    let source = OutcomeIndex::new(source_dims.to_vec());
    let target_dims: Vec<usize> = perm.iter().map(|&p| source_dims[p]).collect();
    let target = OutcomeIndex::new(target_dims.clone());
    let mut map = Vec::with_capacity(target.size());
    let mut tuple = vec![0usize; perm.len()];
    let mut src = vec![0usize; perm.len()];
    for _ in 0..target.size() {
        for (k, &p) in perm.iter().enumerate() {
            src[p] = tuple[k];
        }
        map.push(source.encode(&src));
        advance(&mut tuple, &target_dims);
    }
    map
}
