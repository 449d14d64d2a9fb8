use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A relabeling of `0..n`. `forward[node]` is the position a node moves to,
/// `inverse[position]` the node found there.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Permutation {
    forward: Vec<usize>,
    inverse: Vec<usize>,
}

impl Permutation {
    pub fn new(forward: Vec<usize>) -> Result<Self> {
        let n = forward.len();
        let mut inverse = vec![usize::MAX; n];
        for (node, &pos) in forward.iter().enumerate() {
            if pos >= n {
                return Err(Error::InvalidPermutation(format!(
                    "position {pos} out of range for length {n}"
                )));
            }
            if inverse[pos] != usize::MAX {
                return Err(Error::InvalidPermutation(format!(
                    "position {pos} assigned twice"
                )));
            }
            inverse[pos] = node;
        }
        Ok(Self { forward, inverse })
    }

    /// Builds the permutation whose `inverse` is `order`, i.e. `order[p]`
    /// is the node placed at position `p`.
    pub fn from_order(order: Vec<usize>) -> Result<Self> {
        let p = Self::new(order)?;
        Ok(p.inverted())
    }

    pub fn identity(n: usize) -> Self {
        let v: Vec<usize> = (0..n).collect();
        Self {
            forward: v.clone(),
            inverse: v,
        }
    }

    /// `i -> n-1-i`.
    pub fn reversal(n: usize) -> Self {
        let v: Vec<usize> = (0..n).rev().collect();
        Self {
            forward: v.clone(),
            inverse: v,
        }
    }

    pub fn len(&self) -> usize {
        self.forward.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forward.is_empty()
    }

    pub fn forward(&self) -> &[usize] {
        &self.forward
    }

    pub fn inverse(&self) -> &[usize] {
        &self.inverse
    }

    pub fn is_identity(&self) -> bool {
        self.forward.iter().enumerate().all(|(i, &p)| i == p)
    }

    pub fn inverted(&self) -> Self {
        Self {
            forward: self.inverse.clone(),
            inverse: self.forward.clone(),
        }
    }

    /// Positions mirrored: node that sat at `p` now sits at `n-1-p`.
    pub fn reversed(&self) -> Self {
        let n = self.len();
        let forward: Vec<usize> = self.forward.iter().map(|&p| n - 1 - p).collect();
        let inverse: Vec<usize> = (0..n).map(|p| self.inverse[n - 1 - p]).collect();
        Self { forward, inverse }
    }

    /// Moves entries to their new positions: `out[forward[i]] = x[i]`.
    pub fn apply<T: Copy>(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.len());
        self.inverse.iter().map(|&node| x[node]).collect()
    }

    /// Undoes [`Permutation::apply`].
    pub fn unapply<T: Copy>(&self, y: &[T]) -> Vec<T> {
        assert_eq!(y.len(), self.len());
        self.forward.iter().map(|&pos| y[pos]).collect()
    }
}

impl TryFrom<Vec<usize>> for Permutation {
    type Error = Error;

    fn try_from(v: Vec<usize>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<Permutation> for Vec<usize> {
    fn from(p: Permutation) -> Self {
        p.forward
    }
}
