use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Element of N^d with the graded order: first by weight `|α|`, then at the
/// largest index where two entries differ.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(pub Vec<u32>);

impl MultiIndex {
    pub fn new(v: Vec<u32>) -> Self {
        MultiIndex(v)
    }

    pub fn zero(d: usize) -> Self {
        MultiIndex(vec![0; d])
    }

    /// `(0, ..., 0, r)`: the largest index of weight `r`.
    pub fn top(d: usize, r: u32) -> Self {
        let mut v = vec![0; d];
        if d > 0 {
            v[d - 1] = r;
        }
        MultiIndex(v)
    }

    pub fn unit(d: usize, i: usize) -> Self {
        let mut v = vec![0; d];
        v[i] = 1;
        MultiIndex(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn weight(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    /// Parse `"0,2"`.
    pub fn parse(s: &str) -> Result<Self> {
        let v: std::result::Result<Vec<u32>, _> =
            s.split(',').map(|t| t.trim().parse::<u32>()).collect();
        match v {
            Ok(v) if !v.is_empty() => Ok(MultiIndex(v)),
            _ => Err(Error::Parse {
                pos: 0,
                msg: format!("bad multi-index {s:?}"),
            }),
        }
    }

    pub fn add(&self, o: &MultiIndex) -> MultiIndex {
        MultiIndex(self.0.iter().zip(&o.0).map(|(a, b)| a + b).collect())
    }

    /// All `β ⪯ self`, in increasing order.
    pub fn down_set(&self) -> Vec<MultiIndex> {
        let mut out = vec![MultiIndex::zero(self.dim())];
        while out.last().expect("nonempty") != self {
            let next = mi_succ(out.last().expect("nonempty"));
            out.push(next);
        }
        out
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|k| k.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

fn cmp_unchecked(a: &[u32], b: &[u32]) -> Ordering {
    let wa: u32 = a.iter().sum();
    let wb: u32 = b.iter().sum();
    if wa != wb {
        return wa.cmp(&wb);
    }
    for k in (0..a.len()).rev() {
        if a[k] != b[k] {
            return a[k].cmp(&b[k]);
        }
    }
    Ordering::Equal
}

pub fn mi_cmp(a: &MultiIndex, b: &MultiIndex) -> Result<Ordering> {
    if a.dim() != b.dim() {
        return Err(Error::LengthMismatch(a.dim(), b.dim()));
    }
    Ok(cmp_unchecked(&a.0, &b.0))
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        mi_cmp(self, other).ok()
    }
}

pub fn mi_leq(a: &MultiIndex, b: &MultiIndex) -> Result<bool> {
    Ok(mi_cmp(a, b)? != Ordering::Greater)
}

/// The least multi-index strictly above `a`.
pub fn mi_succ(a: &MultiIndex) -> MultiIndex {
    let d = a.dim();
    if d == 0 {
        return a.clone();
    }
    // Within a weight the order is lexicographic on the reversed vector.
    let mut r: Vec<u32> = a.0.iter().rev().cloned().collect();
    for i in (0..d.saturating_sub(1)).rev() {
        let tail: u32 = r[i + 1..].iter().sum();
        if tail > 0 {
            r[i] += 1;
            for x in &mut r[i + 1..] {
                *x = 0;
            }
            r[d - 1] = tail - 1;
            return MultiIndex(r.into_iter().rev().collect());
        }
    }
    let mut v = vec![0; d];
    v[0] = a.weight() + 1;
    MultiIndex(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mi(v: &[u32]) -> MultiIndex {
        MultiIndex(v.to_vec())
    }

    #[test]
    fn order_examples() {
        assert!(mi_leq(&mi(&[1, 0]), &mi(&[0, 1])).unwrap());
        assert!(mi_leq(&mi(&[2, 0]), &mi(&[1, 1])).unwrap());
        assert!(!mi_leq(&mi(&[0, 2]), &mi(&[1, 1])).unwrap());
        assert!(mi_leq(&mi(&[1]), &mi(&[1, 0])).is_err());
    }

    #[test]
    fn successor_chain() {
        let chain = [
            mi(&[1, 0]),
            mi(&[0, 1]),
            mi(&[2, 0]),
            mi(&[1, 1]),
            mi(&[0, 2]),
            mi(&[3, 0]),
        ];
        for w in chain.windows(2) {
            assert_eq!(mi_succ(&w[0]), w[1]);
        }
        assert_eq!(mi_succ(&mi(&[3])), mi(&[4]));
    }

    #[test]
    fn down_set_of_top_is_everything_up_to_weight() {
        assert_eq!(MultiIndex::top(2, 2).down_set().len(), 6);
        assert_eq!(mi(&[1, 0]).down_set(), vec![mi(&[0, 0]), mi(&[1, 0])]);
        assert_eq!(MultiIndex::parse("0, 2").unwrap(), mi(&[0, 2]));
    }
}
