//! Finite ordered partitions of `{1..n}` stored as min-ordered label strings.
//!
//! A partition into `k` classes is kept as the sequence `labels[e-1]` giving
//! the class of element `e`. Classes are indexed so that their minima
//! increase with the index, which makes the label string a restricted-growth
//! string: the first occurrence of class `i` precedes the first occurrence of
//! class `j` whenever `i < j`. Every partition therefore has exactly one
//! representation and validation is a single left-to-right scan.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use serde::{de, Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PartitionError {
    #[error("label sequence is empty")]
    EmptyLabels,
    #[error("label at position {position} is zero; classes are numbered from 1")]
    ZeroLabel { position: usize },
    #[error("class {missing_class} has no members")]
    NotSurjective { missing_class: u32 },
    #[error(
        "not min-ordered at position {position}: class {found} appears before class {expected}"
    )]
    NotMinOrdered {
        position: usize,
        found: u32,
        expected: u32,
    },
    #[error("ground sets differ: {left} vs {right}")]
    GroundSetMismatch { left: usize, right: usize },
    #[error("{k} does not divide {n}")]
    NotDivisible { n: usize, k: usize },
    #[error("partition is not homogeneous")]
    NotHomogeneous,
    #[error("class count {k} invalid for ground set of size {n}")]
    InvalidClassCount { n: usize, k: usize },
    #[error("rank {rank} out of range [0, {count})")]
    RankOutOfRange { rank: BigUint, count: BigUint },
    #[error("grouping has {found} classes, expected {expected}")]
    ArityMismatch { expected: usize, found: usize },
    #[error("cannot parse label token {token:?}")]
    ParseLabel { token: String },
}

/// A partition of `{1..n}` onto classes `{1..k}` in canonical min-ordered
/// form. Immutable after construction; `labels()[e-1]` is the class of `e`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OrderedPartition {
    labels: Vec<u32>,
    k: u32,
}

impl OrderedPartition {
    /// Checks surjectivity and min-ordering and returns the partition.
    /// The input is already canonical on success (identity on valid input).
    pub fn validate(labels: Vec<u32>) -> Result<Self, PartitionError> {
        if labels.is_empty() {
            return Err(PartitionError::EmptyLabels);
        }
        let mut max = 0u32;
        for (i, &c) in labels.iter().enumerate() {
            if c == 0 {
                return Err(PartitionError::ZeroLabel { position: i + 1 });
            }
            if c > max + 1 {
                return Err(PartitionError::NotMinOrdered {
                    position: i + 1,
                    found: c,
                    expected: max + 1,
                });
            }
            if c == max + 1 {
                max = c;
            }
        }
        Ok(OrderedPartition { labels, k: max })
    }

    /// Relabels an arbitrary positive label string into canonical min-ordered
    /// form (classes renumbered by first occurrence).
    pub(crate) fn canonical_from(raw: &[u32]) -> Self {
        let mut map: HashMap<u32, u32> = HashMap::new();
        let mut next = 0u32;
        let labels: Vec<u32> = raw
            .iter()
            .map(|&c| {
                *map.entry(c).or_insert_with(|| {
                    next += 1;
                    next
                })
            })
            .collect();
        debug_assert!(!labels.is_empty());
        OrderedPartition { labels, k: next }
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn k(&self) -> usize {
        self.k as usize
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    /// Class of element `e`, 1-based. Panics if `e` is out of `1..=n`.
    pub fn class_of(&self, e: usize) -> u32 {
        self.labels[e - 1]
    }

    /// Elements of class `c` in increasing order, 1-based.
    pub fn class_members(&self, c: u32) -> Vec<usize> {
        self.labels
            .iter()
            .enumerate()
            .filter(|(_, &l)| l == c)
            .map(|(i, _)| i + 1)
            .collect()
    }

    pub fn class_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0usize; self.k()];
        for &c in &self.labels {
            sizes[(c - 1) as usize] += 1;
        }
        sizes
    }

    /// True when all `k` classes have the same cardinality `n/k`.
    pub fn is_homogeneous(&self) -> bool {
        let n = self.n();
        let k = self.k();
        n.is_multiple_of(k) && self.class_sizes().iter().all(|&s| s == n / k)
    }
}

impl fmt::Display for OrderedPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for &c in &self.labels {
            if !first {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
            first = false;
        }
        Ok(())
    }
}

impl FromStr for OrderedPartition {
    type Err = PartitionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let labels = parse_labels(s)?;
        OrderedPartition::validate(labels)
    }
}

/// Parses a comma-separated label string like `"1,2,2,1"`.
pub fn parse_labels(s: &str) -> Result<Vec<u32>, PartitionError> {
    s.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<u32>()
                .map_err(|_| PartitionError::ParseLabel {
                    token: tok.trim().to_string(),
                })
        })
        .collect()
}

impl Serialize for OrderedPartition {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for OrderedPartition {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(de::Error::custom)
    }
}

/// A min-ordered surjection `{1..m} -> {1..k}` describing how `m` classes
/// merge into `k` groups.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassGrouping {
    assignment: OrderedPartition,
}

impl ClassGrouping {
    pub fn new(assignment: OrderedPartition) -> Self {
        ClassGrouping { assignment }
    }

    /// Builds a grouping from raw labels, checking that it reaches exactly
    /// `groups` output groups.
    pub fn with_group_count(labels: Vec<u32>, groups: usize) -> Result<Self, PartitionError> {
        let assignment = OrderedPartition::validate(labels)?;
        if assignment.k() < groups {
            return Err(PartitionError::NotSurjective {
                missing_class: assignment.k + 1,
            });
        }
        if assignment.k() > groups {
            return Err(PartitionError::ArityMismatch {
                expected: groups,
                found: assignment.k(),
            });
        }
        Ok(ClassGrouping { assignment })
    }

    /// Number of input classes.
    pub fn m(&self) -> usize {
        self.assignment.n()
    }

    /// Number of output groups.
    pub fn groups(&self) -> usize {
        self.assignment.k()
    }

    pub fn group_of(&self, class: u32) -> u32 {
        self.assignment.class_of(class as usize)
    }

    pub fn as_partition(&self) -> &OrderedPartition {
        &self.assignment
    }

    pub fn is_homogeneous(&self) -> bool {
        self.assignment.is_homogeneous()
    }
}

/// True iff every class of `u` lies inside a single class of `t`.
pub fn is_coarser(t: &OrderedPartition, u: &OrderedPartition) -> Result<bool, PartitionError> {
    if t.n() != u.n() {
        return Err(PartitionError::GroundSetMismatch {
            left: t.n(),
            right: u.n(),
        });
    }
    // u-class -> t-class, 0 meaning unseen
    let mut map = vec![0u32; u.k() + 1];
    for e in 0..u.n() {
        let uc = u.labels[e] as usize;
        let tc = t.labels[e];
        if map[uc] == 0 {
            map[uc] = tc;
        } else if map[uc] != tc {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Merges whole classes of `u` according to `g` and recanonicalises.
///
/// The result is coarser than `u`; it is homogeneous whenever both `u` and
/// `g` are.
pub fn merge_classes(
    u: &OrderedPartition,
    g: &ClassGrouping,
) -> Result<OrderedPartition, PartitionError> {
    if g.m() != u.k() {
        return Err(PartitionError::ArityMismatch {
            expected: u.k(),
            found: g.m(),
        });
    }
    let raw: Vec<u32> = u.labels.iter().map(|&c| g.group_of(c)).collect();
    Ok(OrderedPartition::canonical_from(&raw))
}

/// All homogeneous `k`-partitions coarser than the homogeneous `u`, obtained
/// by merging whole classes of `u` through every homogeneous grouping of its
/// class set. Sorted lexicographically; the count is `count_hom(u.k, k)`
/// independent of `u`.
pub fn coarsenings_hom(
    u: &OrderedPartition,
    k: usize,
) -> Result<Vec<OrderedPartition>, PartitionError> {
    if !u.is_homogeneous() {
        return Err(PartitionError::NotHomogeneous);
    }
    let m = u.k();
    if k == 0 || k > m {
        return Err(PartitionError::InvalidClassCount { n: m, k });
    }
    if !m.is_multiple_of(k) {
        return Err(PartitionError::NotDivisible { n: m, k });
    }
    let mut out: Vec<OrderedPartition> = enumerate_hom(m, k)?
        .map(|g| merge_classes(u, &ClassGrouping::new(g)).expect("grouping arity matches u"))
        .collect();
    out.sort();
    out.dedup();
    Ok(out)
}

/// All `k`-partitions coarser than `u` (no homogeneity constraints), one per
/// grouping of `u`'s classes into `k` groups. Sorted lexicographically.
pub fn coarsenings_all(
    u: &OrderedPartition,
    k: usize,
) -> Result<Vec<OrderedPartition>, PartitionError> {
    let m = u.k();
    if k == 0 || k > m {
        return Err(PartitionError::InvalidClassCount { n: m, k });
    }
    let mut out: Vec<OrderedPartition> = enumerate_all(m, k)?
        .map(|g| merge_classes(u, &ClassGrouping::new(g)).expect("grouping arity matches u"))
        .collect();
    out.sort();
    out.dedup();
    Ok(out)
}

fn check_class_count(n: usize, k: usize) -> Result<(), PartitionError> {
    if k == 0 || k > n {
        return Err(PartitionError::InvalidClassCount { n, k });
    }
    Ok(())
}

/// Streams every homogeneous `k`-partition of `{1..n}` exactly once in
/// lexicographic label order.
pub fn enumerate_hom(n: usize, k: usize) -> Result<PartitionIter, PartitionError> {
    check_class_count(n, k)?;
    if !n.is_multiple_of(k) {
        return Err(PartitionError::NotDivisible { n, k });
    }
    Ok(PartitionIter::new(n, k, Some(n / k)))
}

/// Streams every `k`-partition of `{1..n}` exactly once in lexicographic
/// label order.
pub fn enumerate_all(n: usize, k: usize) -> Result<PartitionIter, PartitionError> {
    check_class_count(n, k)?;
    Ok(PartitionIter::new(n, k, None))
}

/// Lexicographic generator over min-ordered label strings, either with every
/// class capped at exactly `n/k` members (homogeneous) or merely surjective.
pub struct PartitionIter {
    n: usize,
    k: usize,
    cap: Option<usize>,
    labels: Vec<u32>,
    counts: Vec<usize>,
    used: usize,
    state: IterState,
}

enum IterState {
    Fresh,
    Mid,
    Done,
}

impl PartitionIter {
    fn new(n: usize, k: usize, cap: Option<usize>) -> Self {
        PartitionIter {
            n,
            k,
            cap,
            labels: vec![0; n],
            counts: vec![0; k + 1],
            used: 0,
            state: IterState::Fresh,
        }
    }

    fn can_place(&self, c: usize, pos: usize) -> bool {
        if c > self.k || c > self.used + 1 {
            return false;
        }
        match self.cap {
            Some(q) => self.counts[c] < q,
            None => {
                // every still-unopened class needs at least one later slot
                let opened = self.used.max(c);
                self.k - opened < self.n - pos
            }
        }
    }

    fn place(&mut self, pos: usize, c: usize) {
        if self.counts[c] == 0 {
            debug_assert_eq!(c, self.used + 1);
            self.used = c;
        }
        self.counts[c] += 1;
        self.labels[pos] = c as u32;
    }

    fn unplace(&mut self, pos: usize) -> usize {
        let c = self.labels[pos] as usize;
        self.counts[c] -= 1;
        if self.counts[c] == 0 {
            debug_assert_eq!(c, self.used);
            self.used -= 1;
        }
        c
    }

    fn fill_from(&mut self, start: usize) -> bool {
        for pos in start..self.n {
            let mut placed = false;
            for c in 1..=(self.used + 1).min(self.k) {
                if self.can_place(c, pos) {
                    self.place(pos, c);
                    placed = true;
                    break;
                }
            }
            if !placed {
                return false;
            }
        }
        true
    }

    fn advance(&mut self) -> bool {
        if self.n == 1 {
            return false;
        }
        let mut pos = self.n - 1;
        loop {
            let old = self.unplace(pos);
            let mut found = None;
            for c in (old + 1)..=(self.used + 1).min(self.k) {
                if self.can_place(c, pos) {
                    found = Some(c);
                    break;
                }
            }
            if let Some(c) = found {
                self.place(pos, c);
                let ok = self.fill_from(pos + 1);
                debug_assert!(ok, "suffix fill must succeed after a feasible increment");
                return ok;
            }
            if pos == 1 {
                return false;
            }
            pos -= 1;
        }
    }

    fn emit(&self) -> OrderedPartition {
        debug_assert_eq!(self.used, self.k);
        OrderedPartition {
            labels: self.labels.clone(),
            k: self.k as u32,
        }
    }
}

impl Iterator for PartitionIter {
    type Item = OrderedPartition;

    fn next(&mut self) -> Option<OrderedPartition> {
        match self.state {
            IterState::Fresh => {
                if self.fill_from(0) {
                    self.state = IterState::Mid;
                    Some(self.emit())
                } else {
                    self.state = IterState::Done;
                    None
                }
            }
            IterState::Mid => {
                if self.advance() {
                    Some(self.emit())
                } else {
                    self.state = IterState::Done;
                    None
                }
            }
            IterState::Done => None,
        }
    }
}

fn factorial(x: usize) -> BigUint {
    let mut acc = BigUint::from(1u32);
    for i in 2..=x {
        acc *= BigUint::from(i);
    }
    acc
}

/// Number of homogeneous `k`-partitions of `{1..n}`: `n! / ((n/k)!^k * k!)`.
pub fn count_hom(n: usize, k: usize) -> Result<BigUint, PartitionError> {
    check_class_count(n, k)?;
    if !n.is_multiple_of(k) {
        return Err(PartitionError::NotDivisible { n, k });
    }
    let q = n / k;
    Ok(factorial(n) / (factorial(q).pow(k as u32) * factorial(k)))
}

/// Number of `k`-partitions of `{1..n}` (Stirling number of the second kind).
pub fn count_all(n: usize, k: usize) -> Result<BigUint, PartitionError> {
    check_class_count(n, k)?;
    // S(n, k) = k*S(n-1, k) + S(n-1, k-1)
    let mut row: Vec<BigUint> = vec![BigUint::from(0u32); k + 1];
    row[0] = BigUint::from(1u32);
    for _ in 1..=n {
        for j in (1..=k).rev() {
            row[j] = BigUint::from(j) * &row[j] + &row[j - 1];
        }
        row[0] = BigUint::from(0u32);
    }
    Ok(row[k].clone())
}

/// Number of homogeneous completions of a label prefix with class counts
/// `counts[1..=used]`, all classes capped at `q`, `k` classes total and
/// `remaining` positions left.
///
/// Open classes contribute their deficits `q - counts[c]`; the `k - used`
/// unopened classes contribute `q` each but only one ordering of their first
/// occurrences is min-ordered, dividing out `(k - used)!`.
fn hom_completions(counts: &[usize], used: usize, k: usize, q: usize, remaining: usize) -> BigUint {
    let mut denom = BigUint::from(1u32);
    for &cnt in counts.iter().take(used + 1).skip(1) {
        denom *= factorial(q - cnt);
    }
    denom *= factorial(q).pow((k - used) as u32);
    denom *= factorial(k - used);
    factorial(remaining) / denom
}

/// Index of a homogeneous partition in `enumerate_hom`'s lexicographic order.
pub fn rank_hom(p: &OrderedPartition) -> Result<BigUint, PartitionError> {
    if !p.is_homogeneous() {
        return Err(PartitionError::NotHomogeneous);
    }
    let n = p.n();
    let k = p.k();
    let q = n / k;
    let mut counts = vec![0usize; k + 1];
    let mut used = 0usize;
    let mut rank = BigUint::from(0u32);
    for pos in 0..n {
        let label = p.labels[pos] as usize;
        for c in 1..label {
            if c <= used + 1 && counts[c] < q {
                counts[c] += 1;
                let u2 = used.max(c);
                rank += hom_completions(&counts, u2, k, q, n - pos - 1);
                counts[c] -= 1;
            }
        }
        counts[label] += 1;
        used = used.max(label);
    }
    Ok(rank)
}

/// Inverse of [`rank_hom`]: the homogeneous partition at lexicographic index
/// `r` among `enumerate_hom(n, k)`.
pub fn unrank_hom(n: usize, k: usize, r: &BigUint) -> Result<OrderedPartition, PartitionError> {
    let total = count_hom(n, k)?;
    if r >= &total {
        return Err(PartitionError::RankOutOfRange {
            rank: r.clone(),
            count: total,
        });
    }
    let q = n / k;
    let mut rem = r.clone();
    let mut counts = vec![0usize; k + 1];
    let mut used = 0usize;
    let mut labels = Vec::with_capacity(n);
    for pos in 0..n {
        let mut chosen = None;
        for c in 1..=(used + 1).min(k) {
            if counts[c] >= q {
                continue;
            }
            counts[c] += 1;
            let u2 = used.max(c);
            let below = hom_completions(&counts, u2, k, q, n - pos - 1);
            if rem < below {
                chosen = Some(c);
                used = u2;
                break;
            }
            counts[c] -= 1;
            rem -= below;
        }
        let c = chosen.expect("rank in range admits a label at every position");
        labels.push(c as u32);
    }
    debug_assert_eq!(rem, BigUint::from(0u32));
    Ok(OrderedPartition {
        labels,
        k: k as u32,
    })
}

/// `rank_hom` squeezed into a machine word; only valid while the instance
/// caps keep counts below `usize::MAX`.
pub(crate) fn rank_hom_usize(p: &OrderedPartition) -> Result<usize, PartitionError> {
    Ok(rank_hom(p)?
        .to_usize()
        .expect("rank exceeds usize; instance caps should prevent this"))
}
