use std::fmt;

/// An element of `Γ = Z^d`, or of `Γ_N = (Z/NZ)^d` once reduced.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroupElement(pub Vec<i64>);

impl GroupElement {
    pub fn zero(dimension: usize) -> Self {
        Self(vec![0; dimension])
    }

    pub fn dimension(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    /// Canonical representative with every coordinate in `0..n`.
    pub fn reduced(&self, n: usize) -> Self {
        let n = n as i64;
        Self(self.0.iter().map(|c| c.rem_euclid(n)).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        debug_assert_eq!(self.dimension(), other.dimension());
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }
}

impl From<Vec<i64>> for GroupElement {
    fn from(v: Vec<i64>) -> Self {
        Self(v)
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// Word length of `σ` in `Γ_N` with respect to the generators `±σ_i`.
///
/// On the discrete torus this is the per-coordinate wrap-around ℓ¹ norm.
pub fn word_length(sigma: &GroupElement, n: usize) -> usize {
    let n_i = n as i64;
    sigma
        .0
        .iter()
        .map(|c| {
            let r = c.rem_euclid(n_i);
            r.min(n_i - r) as usize
        })
        .sum()
}

/// All reduced `σ ∈ Γ_N` with `|σ| ≤ radius`, in row-major order.
pub fn ball_offsets(dimension: usize, n: usize, radius: f64) -> Vec<GroupElement> {
    let cells = n.pow(dimension as u32);
    (0..cells)
        .map(|flat| {
            let mut coords = vec![0i64; dimension];
            let mut rest = flat;
            for c in coords.iter_mut().rev() {
                *c = (rest % n) as i64;
                rest /= n;
            }
            GroupElement(coords)
        })
        .filter(|s| word_length(s, n) as f64 <= radius)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::{HashMap, VecDeque};

    /// Breadth-first distances from the identity on the Cayley graph of
    /// `(Z/NZ)^d` with generators `±e_i`.
    fn bfs_lengths(d: usize, n: usize) -> HashMap<Vec<i64>, usize> {
        let mut dist = HashMap::new();
        let start = vec![0i64; d];
        dist.insert(start.clone(), 0);
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            let dv = dist[&v];
            for i in 0..d {
                for step in [-1i64, 1] {
                    let mut w = v.clone();
                    w[i] = (w[i] + step).rem_euclid(n as i64);
                    if !dist.contains_key(&w) {
                        dist.insert(w.clone(), dv + 1);
                        queue.push_back(w);
                    }
                }
            }
        }
        dist
    }

    #[test]
    fn word_length_examples() {
        assert_eq!(word_length(&GroupElement(vec![0, 0]), 7), 0);
        assert_eq!(word_length(&GroupElement(vec![3]), 4), 1);
        assert_eq!(word_length(&GroupElement(vec![2, 3]), 5), 4);
        // unreduced input is reduced first
        assert_eq!(word_length(&GroupElement(vec![-1, 8]), 5), 3);
    }

    #[test]
    fn word_length_matches_bfs_exhaustively() {
        for d in 1..=2 {
            for n in 1..=8 {
                let bfs = bfs_lengths(d, n);
                assert_eq!(bfs.len(), n.pow(d as u32));
                for (coords, len) in bfs {
                    assert_eq!(word_length(&GroupElement(coords), n), len);
                }
            }
        }
    }

    #[test]
    fn ball_offset_counts() {
        // d=1, N=10, R=2: {-2,-1,0,1,2}
        assert_eq!(ball_offsets(1, 10, 2.0).len(), 5);
        assert_eq!(ball_offsets(2, 10, 0.0).len(), 1);
        // ℓ¹ ball of radius 1 in 2D
        assert_eq!(ball_offsets(2, 10, 1.0).len(), 5);
        assert_eq!(ball_offsets(2, 4, 4.0).len(), 16);
    }
}
