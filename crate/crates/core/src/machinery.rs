//! Finite prefixes of infinite min-ordered partitions and their
//! approximation calculus.
//!
//! An infinite partition of the positive integers is only ever touched
//! through a [`PartitionPrefix`]: the first `L` values of the partition read
//! as a surjection. Every operation here is determined by a sufficiently
//! long prefix; when the prefix is too short the operation reports exactly
//! which class needs more occurrences, so callers can extend it.
//!
//! The central objects are [`Approximation`]s — tuples of finite, disjoint,
//! nonempty, min-ordered classes produced by the approximation functions
//! `r` and `s` — and their grounded refinement whose union is an initial
//! segment `{1..l}`.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::partition::{ClassGrouping, OrderedPartition};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MachineryError {
    #[error("prefix is empty")]
    EmptyPrefix,
    #[error("prefix label at position {position} is zero")]
    ZeroLabel { position: usize },
    #[error("prefix not min-ordered at position {position}: class {found} appears before class {expected}")]
    NotMinOrdered {
        position: usize,
        found: u32,
        expected: u32,
    },
    #[error("prefix label at position {position} exceeds declared bound {bound}")]
    LabelBeyondBound { position: usize, bound: u32 },
    #[error(
        "prefix too short: class {class} needs at least {occurrences_needed} occurrences to decide this"
    )]
    PrefixTooShort {
        class: u32,
        occurrences_needed: usize,
    },
    #[error("class {class} does not exist below the declared bound {bound}")]
    ClassBeyondBound { class: u32, bound: u32 },
    #[error("operation requires a {expected} prefix")]
    WrongBound { expected: &'static str },
    #[error("approximation class {class} is empty")]
    EmptyClass { class: usize },
    #[error("element {element} occurs in more than one class")]
    OverlappingClasses { element: u64 },
    #[error("approximation classes not min-ordered at class {class}")]
    ClassesNotMinOrdered { class: usize },
    #[error("approximation elements must be positive")]
    ZeroElement,
    #[error("union of classes is not an initial segment of the positive integers")]
    NotGrounded,
    #[error("arity mismatch: expected {expected}, found {found}")]
    ArityMismatch { expected: usize, found: usize },
    #[error("{k} must divide {m} and not exceed it")]
    DivisibilityViolated { k: usize, m: usize },
    #[error("constructed extension fails the membership conditions for this base")]
    TMembershipViolated,
    #[error("not a valid extension of the base approximation")]
    NotInT,
    #[error("invalid approximation JSON: {0}")]
    Json(String),
}

/// Whether a prefix stands for a partition with finitely many classes
/// (`Finite(k)`) or infinitely many (`Unbounded`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bound {
    Finite(u32),
    Unbounded,
}

/// A finite initial segment of an infinite min-ordered partition, read as a
/// surjection-so-far `{1..L} -> class indices`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionPrefix {
    labels: Vec<u32>,
    bound: Bound,
}

impl PartitionPrefix {
    pub fn new(labels: Vec<u32>, bound: Bound) -> Result<Self, MachineryError> {
        if labels.is_empty() {
            return Err(MachineryError::EmptyPrefix);
        }
        let mut max = 0u32;
        for (i, &c) in labels.iter().enumerate() {
            if c == 0 {
                return Err(MachineryError::ZeroLabel { position: i + 1 });
            }
            if let Bound::Finite(k) = bound {
                if c > k {
                    return Err(MachineryError::LabelBeyondBound {
                        position: i + 1,
                        bound: k,
                    });
                }
            }
            if c > max + 1 {
                return Err(MachineryError::NotMinOrdered {
                    position: i + 1,
                    found: c,
                    expected: max + 1,
                });
            }
            if c == max + 1 {
                max = c;
            }
        }
        Ok(PartitionPrefix { labels, bound })
    }

    pub fn unbounded(labels: Vec<u32>) -> Result<Self, MachineryError> {
        Self::new(labels, Bound::Unbounded)
    }

    pub fn finite(labels: Vec<u32>, k: u32) -> Result<Self, MachineryError> {
        Self::new(labels, Bound::Finite(k))
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction rejects empty prefixes
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn bound(&self) -> Bound {
        self.bound
    }

    /// Highest class index that occurs in the prefix. Classes seen so far
    /// are exactly `1..=classes_seen()`.
    pub fn classes_seen(&self) -> u32 {
        self.labels.iter().copied().max().unwrap_or(0)
    }

    /// 1-based position of the first occurrence of `class`, i.e. the minimum
    /// of that class, if witnessed by the prefix.
    pub fn first_occurrence(&self, class: u32) -> Option<usize> {
        self.labels.iter().position(|&c| c == class).map(|i| i + 1)
    }

    /// Occurrence positions (1-based) of `class` in increasing order. These
    /// are the smallest elements of the class in the full partition.
    pub fn occurrences(&self, class: u32) -> Vec<usize> {
        self.labels
            .iter()
            .enumerate()
            .filter(|(_, &c)| c == class)
            .map(|(i, _)| i + 1)
            .collect()
    }

    /// Relabels the prefix through a class grouping, yielding the prefix of
    /// the coarser partition obtained by merging whole classes. Only defined
    /// for finite bounds, with the grouping covering every class.
    pub fn merge_through(&self, g: &ClassGrouping) -> Result<PartitionPrefix, MachineryError> {
        let k = match self.bound {
            Bound::Finite(k) => k as usize,
            Bound::Unbounded => return Err(MachineryError::WrongBound { expected: "finite" }),
        };
        if g.m() != k {
            return Err(MachineryError::ArityMismatch {
                expected: k,
                found: g.m(),
            });
        }
        let labels: Vec<u32> = self.labels.iter().map(|&c| g.group_of(c)).collect();
        PartitionPrefix::new(labels, Bound::Finite(g.groups() as u32))
    }
}

impl fmt::Display for PartitionPrefix {
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

/// A tuple of finite, disjoint, nonempty subsets of the positive integers
/// with strictly increasing minima. The zero-class tuple is allowed (the
/// 0th approximation of anything).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Approximation {
    classes: Vec<Vec<u64>>,
}

impl Approximation {
    pub fn new(classes: Vec<Vec<u64>>) -> Result<Self, MachineryError> {
        let mut sorted: Vec<Vec<u64>> = Vec::with_capacity(classes.len());
        for (i, mut class) in classes.into_iter().enumerate() {
            if class.is_empty() {
                return Err(MachineryError::EmptyClass { class: i + 1 });
            }
            class.sort_unstable();
            sorted.push(class);
        }
        let mut seen = BTreeSet::new();
        for class in &sorted {
            for &x in class {
                if x == 0 {
                    return Err(MachineryError::ZeroElement);
                }
                if !seen.insert(x) {
                    return Err(MachineryError::OverlappingClasses { element: x });
                }
            }
        }
        for i in 1..sorted.len() {
            if sorted[i - 1][0] >= sorted[i][0] {
                return Err(MachineryError::ClassesNotMinOrdered { class: i + 1 });
            }
        }
        Ok(Approximation { classes: sorted })
    }

    pub fn empty() -> Self {
        Approximation { classes: vec![] }
    }

    pub fn arity(&self) -> usize {
        self.classes.len()
    }

    pub fn classes(&self) -> &[Vec<u64>] {
        &self.classes
    }

    pub fn union(&self) -> Vec<u64> {
        let mut all: Vec<u64> = self.classes.iter().flatten().copied().collect();
        all.sort_unstable();
        all
    }

    pub fn union_size(&self) -> usize {
        self.classes.iter().map(|c| c.len()).sum()
    }

    /// Class index (1-based) containing `element`, if any.
    pub fn class_of(&self, element: u64) -> Option<u32> {
        self.classes
            .iter()
            .position(|c| c.binary_search(&element).is_ok())
            .map(|i| i as u32 + 1)
    }

    /// `Some(l)` when the union is exactly `{1..l}` (the empty approximation
    /// is grounded with `l = 0`), `None` otherwise.
    pub fn is_grounded(&self) -> Option<u64> {
        let union = self.union();
        for (i, &x) in union.iter().enumerate() {
            if x != i as u64 + 1 {
                return None;
            }
        }
        Some(union.len() as u64)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.classes).expect("vec of ints serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, MachineryError> {
        let classes: Vec<Vec<u64>> =
            serde_json::from_str(s).map_err(|e| MachineryError::Json(e.to_string()))?;
        Approximation::new(classes)
    }
}

impl fmt::Display for Approximation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_json())
    }
}

impl FromStr for Approximation {
    type Err = MachineryError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Approximation::from_json(s)
    }
}

/// An approximation whose union is an initial segment `{1..l}`; `l` is
/// exposed as [`size_sharp`](GroundedApproximation::size_sharp).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundedApproximation {
    inner: Approximation,
    size_sharp: u64,
}

impl GroundedApproximation {
    pub fn as_approximation(&self) -> &Approximation {
        &self.inner
    }

    pub fn size_sharp(&self) -> u64 {
        self.size_sharp
    }

    pub fn arity(&self) -> usize {
        self.inner.arity()
    }

    pub fn classes(&self) -> &[Vec<u64>] {
        self.inner.classes()
    }

    pub fn into_approximation(self) -> Approximation {
        self.inner
    }
}

impl TryFrom<Approximation> for GroundedApproximation {
    type Error = MachineryError;

    fn try_from(inner: Approximation) -> Result<Self, MachineryError> {
        match inner.is_grounded() {
            Some(size_sharp) => Ok(GroundedApproximation { inner, size_sharp }),
            None => Err(MachineryError::NotGrounded),
        }
    }
}

impl fmt::Display for GroundedApproximation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.inner.fmt(f)
    }
}

/// The `i`-th approximation of a prefix: for `i = 0` the empty tuple, else
/// the classes `1..=i` cut to `{1..min(class i)}`. The result partitions
/// `{1..min(class i)}` and is always grounded.
pub fn r_approx(prefix: &PartitionPrefix, i: usize) -> Result<Approximation, MachineryError> {
    if i == 0 {
        return Ok(Approximation::empty());
    }
    if let Bound::Finite(k) = prefix.bound() {
        if i > k as usize {
            return Err(MachineryError::ClassBeyondBound {
                class: i as u32,
                bound: k,
            });
        }
    }
    let cut = prefix
        .first_occurrence(i as u32)
        .ok_or(MachineryError::PrefixTooShort {
            class: i as u32,
            occurrences_needed: 1,
        })?;
    let mut classes = vec![Vec::new(); i];
    for (pos, &c) in prefix.labels().iter().take(cut).enumerate() {
        debug_assert!(c as usize <= i, "min-ordering bounds labels below the cut");
        classes[(c - 1) as usize].push(pos as u64 + 1);
    }
    Approximation::new(classes)
}

/// Projects an unbounded prefix onto `k` classes: labels above `k` collapse
/// to class 1, labels at most `k` are preserved. Requires classes `1..=k` to
/// be witnessed so the image is verifiably a `k`-class prefix.
pub fn project_pi(prefix: &PartitionPrefix, k: u32) -> Result<PartitionPrefix, MachineryError> {
    if prefix.bound() != Bound::Unbounded {
        return Err(MachineryError::WrongBound {
            expected: "unbounded",
        });
    }
    if k == 0 || prefix.classes_seen() < k {
        return Err(MachineryError::PrefixTooShort {
            class: k,
            occurrences_needed: 1,
        });
    }
    let labels: Vec<u32> = prefix
        .labels()
        .iter()
        .map(|&c| if c <= k { c } else { 1 })
        .collect();
    PartitionPrefix::new(labels, Bound::Finite(k))
}

/// Which reading of the depth-`i <= k` case of the approximation function to
/// use. The default cuts the first `i` classes at `min(class i)`, agreeing
/// with [`r_approx`]; the literal variant keeps all `k` classes and cuts at
/// `min(class k)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SReading {
    #[default]
    RConsistent,
    DisplayLiteral,
}

/// The `i`-th approximation of a `k`-class prefix under the default reading.
///
/// For `i <= k` this matches [`r_approx`]; for `i > k` each class grows from
/// the previous approximation by the least element of that class not already
/// present, so all classes gain exactly one element per step and stay
/// initial segments of their classes.
pub fn s_approx(prefix: &PartitionPrefix, i: usize) -> Result<Approximation, MachineryError> {
    s_approx_with(prefix, i, SReading::RConsistent)
}

pub fn s_approx_with(
    prefix: &PartitionPrefix,
    i: usize,
    reading: SReading,
) -> Result<Approximation, MachineryError> {
    let k = match prefix.bound() {
        Bound::Finite(k) => k as usize,
        Bound::Unbounded => return Err(MachineryError::WrongBound { expected: "finite" }),
    };
    if i == 0 {
        return Ok(Approximation::empty());
    }
    if i <= k {
        return match reading {
            SReading::RConsistent => r_approx(prefix, i),
            SReading::DisplayLiteral => {
                let cut =
                    prefix
                        .first_occurrence(k as u32)
                        .ok_or(MachineryError::PrefixTooShort {
                            class: k as u32,
                            occurrences_needed: 1,
                        })?;
                let mut classes = vec![Vec::new(); k];
                for (pos, &c) in prefix.labels().iter().take(cut).enumerate() {
                    classes[(c - 1) as usize].push(pos as u64 + 1);
                }
                Approximation::new(classes)
            }
        };
    }
    // depth k as the base, then one growth step per extra level
    let occ: Vec<Vec<usize>> = (1..=k as u32).map(|c| prefix.occurrences(c)).collect();
    let base = r_approx(prefix, k)?;
    let mut lens: Vec<usize> = base.classes().iter().map(|c| c.len()).collect();
    for _step in (k + 1)..=i {
        for (j, len) in lens.iter_mut().enumerate() {
            if *len >= occ[j].len() {
                return Err(MachineryError::PrefixTooShort {
                    class: j as u32 + 1,
                    occurrences_needed: *len + 1,
                });
            }
            *len += 1;
        }
    }
    let classes: Vec<Vec<u64>> = lens
        .iter()
        .enumerate()
        .map(|(j, &len)| occ[j][..len].iter().map(|&p| p as u64).collect())
        .collect();
    Approximation::new(classes)
}

/// Decides whether `b` extends the grounded `a` the way the approximation
/// function does at some depth strictly beyond `k`: every class of `b`
/// restricted to `{1..#a}` is the corresponding class of `a`, and all
/// classes grow by the same positive number of elements.
pub fn is_sk_of(
    a: &GroundedApproximation,
    b: &Approximation,
    k: usize,
) -> Result<bool, MachineryError> {
    if a.arity() != k {
        return Err(MachineryError::ArityMismatch {
            expected: k,
            found: a.arity(),
        });
    }
    if b.arity() != k {
        return Ok(false);
    }
    let la = a.size_sharp();
    let mut growth = None;
    for (aj, bj) in a.classes().iter().zip(b.classes()) {
        let below: Vec<u64> = bj.iter().copied().filter(|&x| x <= la).collect();
        if &below != aj {
            return Ok(false);
        }
        let g = bj.len() - aj.len();
        match growth {
            None => growth = Some(g),
            Some(prev) if prev != g => return Ok(false),
            _ => {}
        }
    }
    Ok(growth.unwrap_or(0) >= 1)
}

/// Extends the grounded base `a` by a homogeneous partition `t`, appending
/// element `#a + j` to the class `t(j)`. The image is grounded over
/// `{1..#a + n}` and its membership conditions are checked before returning.
pub fn t_to_b(
    t: &OrderedPartition,
    a: &GroundedApproximation,
) -> Result<GroundedApproximation, MachineryError> {
    let k = a.arity();
    if t.k() != k {
        return Err(MachineryError::ArityMismatch {
            expected: k,
            found: t.k(),
        });
    }
    let la = a.size_sharp();
    let mut classes: Vec<Vec<u64>> = a.classes().to_vec();
    for j in 1..=t.n() {
        let c = t.class_of(j) as usize;
        classes[c - 1].push(la + j as u64);
    }
    let b = Approximation::new(classes)?;
    let grounded = GroundedApproximation::try_from(b).expect("appended elements fill {#a+1..#a+n}");
    if !is_sk_of(a, grounded.as_approximation(), k)? {
        return Err(MachineryError::TMembershipViolated);
    }
    Ok(grounded)
}

/// Inverse of [`t_to_b`]: recovers the homogeneous partition from a grounded
/// extension of `a`, relabelled to canonical min-ordered form if needed.
pub fn b_to_t(
    b: &GroundedApproximation,
    a: &GroundedApproximation,
) -> Result<OrderedPartition, MachineryError> {
    let la = a.size_sharp();
    let lb = b.size_sharp();
    if lb <= la || b.arity() != a.arity() {
        return Err(MachineryError::NotInT);
    }
    if !is_sk_of(a, b.as_approximation(), a.arity())? {
        return Err(MachineryError::NotInT);
    }
    let n = (lb - la) as usize;
    let raw: Vec<u32> = (1..=n)
        .map(|j| {
            b.as_approximation()
                .class_of(la + j as u64)
                .expect("grounded extension covers {#a+1..#b}")
        })
        .collect();
    let t = OrderedPartition::canonical_from(&raw);
    debug_assert!(t.is_homogeneous(), "equal class growth forces homogeneity");
    Ok(t)
}

/// Smallest depth `i0 > m` at which the union of the `i0`-th approximation
/// exceeds the base by a multiple of `m`, together with that excess `n`.
///
/// For a `k`-class prefix the union grows by exactly `k` elements per depth
/// beyond `k`, so the excess at depth `i` is `k(i - k)` independently of the
/// prefix contents; both `k` and `m` divide the returned `n`. Requires
/// `k | m` and the base approximation (class `k` witnessed).
pub fn compute_i0_n(prefix: &PartitionPrefix, m: usize) -> Result<(usize, usize), MachineryError> {
    let k = match prefix.bound() {
        Bound::Finite(k) => k as usize,
        Bound::Unbounded => return Err(MachineryError::WrongBound { expected: "finite" }),
    };
    if k > m || !m.is_multiple_of(k) {
        return Err(MachineryError::DivisibilityViolated { k, m });
    }
    if prefix.first_occurrence(k as u32).is_none() {
        return Err(MachineryError::PrefixTooShort {
            class: k as u32,
            occurrences_needed: 1,
        });
    }
    let mut i = m + 1;
    while !(k * (i - k)).is_multiple_of(m) {
        i += 1;
    }
    Ok((i, k * (i - k)))
}

/// Builds the grounded extension determined by the `i0`-th approximation of
/// the prefix: list the union of that approximation in increasing order as
/// `x_1 < ... < x_{#a+n}`; position `j` keeps the base class for `j <= #a`
/// and takes the class of `x_j` beyond.
pub fn build_bx(
    prefix: &PartitionPrefix,
    m: usize,
) -> Result<GroundedApproximation, MachineryError> {
    let k = match prefix.bound() {
        Bound::Finite(k) => k as usize,
        Bound::Unbounded => return Err(MachineryError::WrongBound { expected: "finite" }),
    };
    let a = GroundedApproximation::try_from(s_approx(prefix, k)?)
        .expect("depth-k approximation partitions an initial segment");
    let (i0, n) = compute_i0_n(prefix, m)?;
    let deep = s_approx(prefix, i0)?;
    let xs = deep.union();
    let la = a.size_sharp() as usize;
    debug_assert_eq!(xs.len(), la + n, "union grows by k per depth beyond k");
    let mut classes: Vec<Vec<u64>> = vec![Vec::new(); k];
    for j in 1..=xs.len() {
        let class = if j <= la {
            a.as_approximation()
                .class_of(j as u64)
                .expect("base partitions {1..#a}")
        } else {
            deep.class_of(xs[j - 1]).expect("x_j lies in the union")
        };
        classes[(class - 1) as usize].push(j as u64);
    }
    let b = Approximation::new(classes)?;
    let grounded =
        GroundedApproximation::try_from(b).expect("reindexing over the sorted union is grounded");
    debug_assert!(
        is_sk_of(&a, grounded.as_approximation(), k).unwrap(),
        "constructed extension satisfies the membership conditions"
    );
    Ok(grounded)
}
