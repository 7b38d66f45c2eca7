use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Integer partition: non-increasing list of positive parts.
///
/// Ordered graded reverse-lexicographically: by weight first, then larger
/// leading parts first.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Partition(Vec<u32>);

impl Partition {
    pub fn empty() -> Self {
        Partition(Vec::new())
    }

    /// Builds a partition from arbitrary parts; zeros are dropped and the
    /// rest sorted.
    pub fn new(mut parts: Vec<u32>) -> Self {
        parts.retain(|&p| p > 0);
        parts.sort_unstable_by(|a, b| b.cmp(a));
        Partition(parts)
    }

    pub fn single(k: u32) -> Self {
        Partition::new(vec![k])
    }

    pub fn parts(&self) -> &[u32] {
        &self.0
    }

    pub fn weight(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn largest(&self) -> u32 {
        self.0.first().copied().unwrap_or(0)
    }

    /// Union of the multisets of parts.
    pub fn join(&self, other: &Partition) -> Partition {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Partition::new(v)
    }

    pub fn with_part(&self, k: u32) -> Partition {
        let mut v = self.0.clone();
        v.push(k);
        Partition::new(v)
    }

    /// Removes the part at position `i` (in sorted order).
    pub fn without_index(&self, i: usize) -> Partition {
        let mut v = self.0.clone();
        v.remove(i);
        Partition(v)
    }

    /// Multiplicities `m_k` of each distinct part value.
    pub fn multiplicities(&self) -> Vec<(u32, usize)> {
        let mut out: Vec<(u32, usize)> = Vec::new();
        for &p in &self.0 {
            match out.last_mut() {
                Some((v, m)) if *v == p => *m += 1,
                _ => out.push((p, 1)),
            }
        }
        out
    }

    /// `prod_k m_k!`, the number of orderings of the parts giving the same
    /// sequence.
    pub fn multiplicity_factorial(&self) -> u64 {
        self.multiplicities()
            .iter()
            .map(|&(_, m)| (1..=m as u64).product::<u64>())
            .product()
    }

    /// Parses `"3,1"`; the empty string or `"0"` is the empty partition.
    pub fn parse(s: &str) -> Option<Partition> {
        let s = s.trim();
        if s.is_empty() || s == "()" || s == "-" {
            return Some(Partition::empty());
        }
        let parts: Option<Vec<u32>> = s.split(',').map(|t| t.trim().parse().ok()).collect();
        parts.map(Partition::new)
    }
}

impl Ord for Partition {
    fn cmp(&self, other: &Self) -> Ordering {
        self.weight()
            .cmp(&other.weight())
            .then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for Partition {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, p) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, ")")
    }
}

impl fmt::Debug for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Serialize for Partition {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.0.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Partition {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = Vec::<u32>::deserialize(d)?;
        Ok(Partition::new(v))
    }
}

/// All partitions with at most `n` parts, each part at most `maxpart`, in
/// graded reverse-lexicographic order. There are `binom(n + maxpart, n)`.
pub fn partitions_in_box(n: usize, maxpart: u32) -> Vec<Partition> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(n: usize, maxpart: u32, cur: &mut Vec<u32>, out: &mut Vec<Partition>) {
        out.push(Partition(cur.clone()));
        if cur.len() == n {
            return;
        }
        let cap = cur.last().copied().unwrap_or(maxpart).min(maxpart);
        for p in 1..=cap {
            cur.push(p);
            rec(n, maxpart, cur, out);
            cur.pop();
        }
    }
    rec(n, maxpart, &mut cur, &mut out);
    out.sort();
    out
}

/// All partitions of `w` with at most `max_len` parts (sorted).
pub fn partitions_of_weight(w: u32, max_len: usize) -> Vec<Partition> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(rem: u32, cap: u32, max_len: usize, cur: &mut Vec<u32>, out: &mut Vec<Partition>) {
        if rem == 0 {
            out.push(Partition(cur.clone()));
            return;
        }
        if cur.len() == max_len {
            return;
        }
        for p in (1..=cap.min(rem)).rev() {
            cur.push(p);
            rec(rem - p, p, max_len, cur, out);
            cur.pop();
        }
    }
    rec(w, w, max_len, &mut cur, &mut out);
    out.sort();
    out
}

/// Weak compositions of `n` into `parts` non-negative entries, ordered
/// lexicographically descending: `(2,0), (1,1), (0,2)`.
pub fn compositions(n: usize, parts: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if parts == 0 {
        if n == 0 {
            out.push(Vec::new());
        }
        return out;
    }
    fn rec(rem: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if left == 1 {
            cur.push(rem);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for first in (0..=rem).rev() {
            cur.push(first);
            rec(rem - first, left - 1, cur, out);
            cur.pop();
        }
    }
    rec(n, parts, &mut Vec::new(), &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn binom(n: u64, k: u64) -> u64 {
        (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
    }

    #[test]
    fn box_examples() {
        let b = partitions_in_box(2, 1);
        assert_eq!(
            b,
            vec![Partition::empty(), Partition::new(vec![1]), Partition::new(vec![1, 1])]
        );
        assert_eq!(partitions_in_box(3, 0), vec![Partition::empty()]);
        let b = partitions_in_box(2, 2);
        let expect: Vec<Partition> = [vec![], vec![1], vec![2], vec![1, 1], vec![2, 1], vec![2, 2]]
            .into_iter()
            .map(Partition::new)
            .collect();
        assert_eq!(b, expect);
    }

    #[test]
    fn box_cardinality() {
        for n in 1..=6usize {
            for d in 1..=5u32 {
                let count = partitions_in_box(n, d - 1).len() as u64;
                assert_eq!(count, binom(n as u64 + d as u64 - 1, n as u64), "N={n} d={d}");
            }
        }
    }

    #[test]
    fn ordering_is_graded() {
        let mut v = vec![
            Partition::new(vec![1, 1]),
            Partition::new(vec![3]),
            Partition::new(vec![2]),
            Partition::empty(),
        ];
        v.sort();
        assert_eq!(format!("{v:?}"), "[(), (2), (1,1), (3)]");
    }

    #[test]
    fn compositions_order() {
        assert_eq!(compositions(2, 2), vec![vec![2, 0], vec![1, 1], vec![0, 2]]);
        assert_eq!(compositions(3, 3).len(), 10);
    }

    #[test]
    fn weight_enumeration() {
        assert_eq!(partitions_of_weight(4, 10).len(), 5);
        assert_eq!(partitions_of_weight(4, 2).len(), 3);
        assert_eq!(partitions_of_weight(0, 3), vec![Partition::empty()]);
    }

    #[test]
    fn parse_partition() {
        assert_eq!(Partition::parse("1,3").unwrap(), Partition::new(vec![3, 1]));
        assert_eq!(Partition::parse("").unwrap(), Partition::empty());
        assert!(Partition::parse("a").is_none());
    }
}
