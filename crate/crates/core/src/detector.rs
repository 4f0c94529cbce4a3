//! Monochromatic permuted copies of a gap tuple in a colouring of `Z_n`.
//!
//! A copy is a set of `k` vertices whose cyclically consecutive
//! counterclockwise differences are the instance's gaps in some order.
//! Two independent deciders live here: [`detect_bruteforce`] walks every
//! gap order from every start vertex, while [`detect_dp`] runs the
//! subset-sum dynamic program over (start vertex, arc length) pairs, which
//! requires all subset sums of the gaps to be distinct.
//!
//! Both report the same witness: the smallest start vertex, then the
//! lexicographically smallest gap order (by gap value), red before blue.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::colouring::{Colour, Colouring};
use crate::tuple::DiscreteInstance;

/// Largest gap count for which the `2^k` subset table is built.
pub const MAX_DP_GAPS: usize = 24;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DetectorError {
    #[error("colouring has {colouring} vertices but the instance lives on Z_{instance}")]
    DimensionMismatch { colouring: usize, instance: u64 },
    #[error("gap subsets {first:?} and {second:?} both sum to {sum}")]
    SubsetSumCollision {
        first: Vec<usize>,
        second: Vec<usize>,
        sum: u64,
    },
    #[error("{0} gaps are too many for the subset-sum table (max {MAX_DP_GAPS})")]
    TooManyGaps(usize),
    #[error("copy counting needs pairwise distinct gaps")]
    DuplicateGaps,
    #[error("copy counting does not accept a black vertex")]
    BlackVertex,
    #[error("restricted order {0:?} is not a permutation of the gaps")]
    BadRestriction(Vec<u64>),
    #[error("enumerating copies as bitmasks needs n <= 64, got {0}")]
    GridTooLarge(u64),
}

/// Colour class of a witness. The `*OrBlack` variants mark copies that use
/// the wildcard vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CopyColour {
    Red,
    Blue,
    RedOrBlack,
    BlueOrBlack,
}

impl CopyColour {
    pub fn class(self) -> Colour {
        match self {
            CopyColour::Red | CopyColour::RedOrBlack => Colour::Red,
            CopyColour::Blue | CopyColour::BlueOrBlack => Colour::Blue,
        }
    }

    fn with_black(class: Colour, uses_black: bool) -> CopyColour {
        match (class, uses_black) {
            (Colour::Red, false) => CopyColour::Red,
            (Colour::Blue, false) => CopyColour::Blue,
            (Colour::Red, true) => CopyColour::RedOrBlack,
            (Colour::Blue, true) => CopyColour::BlueOrBlack,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct CopyWitness {
    /// Vertices in counterclockwise order, starting at the start vertex.
    pub vertices: Vec<usize>,
    /// `gap_order[i]` is the difference from `vertices[i]` to the next vertex.
    pub gap_order: Vec<u64>,
    pub colour: CopyColour,
}

impl CopyWitness {
    fn build(c: &Colouring, start: usize, order: Vec<u64>, class: Colour) -> CopyWitness {
        let n = c.n() as u64;
        let mut vertices = Vec::with_capacity(order.len());
        let mut v = start as u64;
        for g in &order {
            vertices.push(v as usize);
            v = (v + g) % n;
        }
        let uses_black = vertices.iter().any(|&v| c.is_black(v));
        CopyWitness {
            vertices,
            gap_order: order,
            colour: CopyColour::with_black(class, uses_black),
        }
    }

    /// Re-checks the witness from scratch: consecutive differences, gap
    /// multiset, colour class and black usage.
    pub fn validate(&self, c: &Colouring, inst: &DiscreteInstance) -> bool {
        let n = inst.n();
        let k = inst.k();
        if c.n() as u64 != n || self.vertices.len() != k || self.gap_order.len() != k {
            return false;
        }
        for i in 0..k {
            let a = self.vertices[i] as u64;
            let b = self.vertices[(i + 1) % k] as u64;
            if a >= n || (b + n - a) % n != self.gap_order[i] % n {
                return false;
            }
        }
        let mut expected = inst.gaps().to_vec();
        let mut got = self.gap_order.clone();
        expected.sort_unstable();
        got.sort_unstable();
        if expected != got {
            return false;
        }
        let class = self.colour.class();
        let uses_black = self.vertices.iter().any(|&v| c.is_black(v));
        self.vertices.iter().all(|&v| c.matches(v, class))
            && CopyColour::with_black(class, uses_black) == self.colour
    }

    /// The same copy after rotating the circle by `r` steps.
    pub fn rotated(&self, r: usize, n: usize) -> CopyWitness {
        CopyWitness {
            vertices: self.vertices.iter().map(|v| (v + r) % n).collect(),
            gap_order: self.gap_order.clone(),
            colour: self.colour,
        }
    }
}

/// A family of allowed cyclic gap orders.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Restriction {
    orders: BTreeSet<Vec<u64>>,
}

fn min_rotation(order: &[u64]) -> Vec<u64> {
    (0..order.len().max(1))
        .map(|r| {
            let mut v = order.to_vec();
            v.rotate_left(r);
            v
        })
        .min()
        .unwrap_or_default()
}

impl Restriction {
    /// Each order must be a permutation of the instance's gaps; orders are
    /// compared up to rotation.
    pub fn new(orders: Vec<Vec<u64>>, inst: &DiscreteInstance) -> Result<Self, DetectorError> {
        let mut target = inst.gaps().to_vec();
        target.sort_unstable();
        let mut set = BTreeSet::new();
        for order in orders {
            let mut sorted = order.clone();
            sorted.sort_unstable();
            if sorted != target {
                return Err(DetectorError::BadRestriction(order));
            }
            set.insert(min_rotation(&order));
        }
        Ok(Restriction { orders: set })
    }

    pub fn allows(&self, order: &[u64]) -> bool {
        self.orders.contains(&min_rotation(order))
    }

    pub fn len(&self) -> usize {
        self.orders.len()
    }

    pub fn is_empty(&self) -> bool {
        self.orders.is_empty()
    }

    /// True when every order allowed here is also allowed by `other`.
    pub fn is_subset(&self, other: &Restriction) -> bool {
        self.orders.is_subset(&other.orders)
    }
}

fn check_dims(c: &Colouring, inst: &DiscreteInstance) -> Result<(), DetectorError> {
    if c.n() as u64 != inst.n() {
        return Err(DetectorError::DimensionMismatch {
            colouring: c.n(),
            instance: inst.n(),
        });
    }
    Ok(())
}

const BOTH: [Colour; 2] = [Colour::Red, Colour::Blue];

/// Lexicographically smallest gap order from `start` whose vertices all
/// match `class`, or `None`. Gap values in `sorted_gaps` are ascending.
fn first_order_from(
    c: &Colouring,
    sorted_gaps: &[u64],
    start: usize,
    class: Colour,
    restriction: Option<&Restriction>,
) -> Option<Vec<u64>> {
    fn dfs(
        c: &Colouring,
        gaps: &[u64],
        used: &mut [bool],
        order: &mut Vec<u64>,
        at: u64,
        class: Colour,
        restriction: Option<&Restriction>,
    ) -> bool {
        if order.len() == gaps.len() {
            return restriction.is_none_or(|r| r.allows(order));
        }
        let n = c.n() as u64;
        let mut last = None;
        for i in 0..gaps.len() {
            if used[i] || last == Some(gaps[i]) {
                continue;
            }
            last = Some(gaps[i]);
            let next = (at + gaps[i]) % n;
            // the final step closes the polygon back onto the start vertex
            if order.len() + 1 < gaps.len() && !c.matches(next as usize, class) {
                continue;
            }
            used[i] = true;
            order.push(gaps[i]);
            if dfs(c, gaps, used, order, next, class, restriction) {
                return true;
            }
            order.pop();
            used[i] = false;
        }
        false
    }

    if !c.matches(start, class) {
        return None;
    }
    let mut used = vec![false; sorted_gaps.len()];
    let mut order = Vec::with_capacity(sorted_gaps.len());
    dfs(
        c,
        sorted_gaps,
        &mut used,
        &mut order,
        start as u64,
        class,
        restriction,
    )
    .then_some(order)
}

fn pick_witness(
    c: &Colouring,
    start: usize,
    candidates: impl IntoIterator<Item = (Colour, Vec<u64>)>,
) -> Option<CopyWitness> {
    // min by gap order; the stable min keeps red ahead of blue on ties
    candidates
        .into_iter()
        .fold(
            None::<(Colour, Vec<u64>)>,
            |best, (class, order)| match best {
                Some((bc, bo)) if bo <= order => Some((bc, bo)),
                _ => Some((class, order)),
            },
        )
        .map(|(class, order)| CopyWitness::build(c, start, order, class))
}

/// Exhaustive search over start vertices and gap orders, optionally limited
/// to the cyclic orders in `restriction`.
pub fn detect_bruteforce(
    c: &Colouring,
    inst: &DiscreteInstance,
    restriction: Option<&Restriction>,
) -> Result<Option<CopyWitness>, DetectorError> {
    detect_bruteforce_in(c, inst, restriction, &BOTH)
}

/// [`detect_bruteforce`] limited to the colour classes in `classes`.
pub fn detect_bruteforce_in(
    c: &Colouring,
    inst: &DiscreteInstance,
    restriction: Option<&Restriction>,
    classes: &[Colour],
) -> Result<Option<CopyWitness>, DetectorError> {
    check_dims(c, inst)?;
    let mut sorted = inst.gaps().to_vec();
    sorted.sort_unstable();
    Ok((0..c.n()).into_par_iter().find_map_first(|start| {
        let found = classes.iter().filter_map(|&class| {
            first_order_from(c, &sorted, start, class, restriction).map(|o| (class, o))
        });
        pick_witness(c, start, found)
    }))
}

/// The unique-subset-sum table: for each arc length `l` in `1..=n`, the size
/// and identity of the unique gap subset summing to `l`.
#[derive(Debug, Clone)]
pub struct SubsetSumTable {
    n: u64,
    gaps: Vec<u64>,
    /// `subset[l]` is the gap-index bitmask summing to `l`, or 0.
    subset: Vec<u32>,
}

impl SubsetSumTable {
    pub fn new(inst: &DiscreteInstance) -> Result<Self, DetectorError> {
        let k = inst.k();
        if k > MAX_DP_GAPS {
            return Err(DetectorError::TooManyGaps(k));
        }
        let n = inst.n();
        let gaps = inst.gaps().to_vec();
        let mut sums = vec![0u64; 1 << k];
        let mut subset = vec![0u32; n as usize + 1];
        let indices = |mask: u32| -> Vec<usize> { (0..k).filter(|i| mask >> i & 1 == 1).collect() };
        for mask in 1u32..(1 << k) {
            let low = mask.trailing_zeros() as usize;
            let s = sums[(mask & (mask - 1)) as usize] + gaps[low];
            sums[mask as usize] = s;
            let prev = subset[s as usize];
            if prev != 0 {
                return Err(DetectorError::SubsetSumCollision {
                    first: indices(prev),
                    second: indices(mask),
                    sum: s,
                });
            }
            subset[s as usize] = mask;
        }
        Ok(SubsetSumTable { n, gaps, subset })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    /// `b_l`: size of the subset summing to `l`, 0 if there is none.
    pub fn size(&self, l: u64) -> u32 {
        self.subset.get(l as usize).map_or(0, |m| m.count_ones())
    }

    /// `S_l` as gap indices.
    pub fn subset(&self, l: u64) -> Option<Vec<usize>> {
        let mask = *self.subset.get(l as usize)?;
        (mask != 0).then(|| {
            (0..self.gaps.len())
                .filter(|i| mask >> i & 1 == 1)
                .collect()
        })
    }

    fn mask(&self, l: u64) -> u32 {
        self.subset[l as usize]
    }
}

/// Path predicates for one colour class: `row(l)[i]` holds when there is a
/// counterclockwise path from `i` to `i + l` through vertices of the class,
/// using each gap of `S_l` exactly once.
struct PathTable {
    slot: Vec<usize>,
    rows: Vec<Vec<bool>>,
}

const NO_SLOT: usize = usize::MAX;

impl PathTable {
    fn build(table: &SubsetSumTable, c: &Colouring, class: Colour) -> PathTable {
        let n = table.n as usize;
        let k = table.gaps.len();
        let member: Vec<bool> = (0..n).map(|v| c.matches(v, class)).collect();
        // lengths grouped by subset size; each level reads only the previous one
        let mut by_size: Vec<Vec<usize>> = vec![Vec::new(); k + 1];
        for l in 1..=n {
            let b = table.size(l as u64) as usize;
            if b > 0 {
                by_size[b].push(l);
            }
        }
        let mut slot = vec![NO_SLOT; n + 1];
        let mut rows: Vec<Vec<bool>> = Vec::new();
        for (b, lengths) in by_size.iter().enumerate().skip(1) {
            for &l in lengths {
                let row: Vec<bool> = if b == 1 {
                    (0..n).map(|i| member[i] && member[(i + l) % n]).collect()
                } else {
                    let mask = table.mask(l as u64);
                    let prev: Vec<usize> = (0..k)
                        .filter(|d| mask >> d & 1 == 1)
                        .map(|d| slot[l - table.gaps[d] as usize])
                        .collect();
                    (0..n)
                        .map(|i| member[(i + l) % n] && prev.iter().any(|&s| rows[s][i]))
                        .collect()
                };
                slot[l] = rows.len();
                rows.push(row);
            }
        }
        PathTable { slot, rows }
    }

    fn holds(&self, from: usize, l: usize) -> bool {
        match self.slot[l] {
            NO_SLOT => false,
            s => self.rows[s][from],
        }
    }
}

/// Forward reconstruction of the smallest gap order from `start`.
fn backtrack_order(
    table: &SubsetSumTable,
    paths: &PathTable,
    c: &Colouring,
    start: usize,
    class: Colour,
) -> Vec<u64> {
    let n = table.n as usize;
    let mut order = Vec::with_capacity(table.gaps.len());
    let mut at = start;
    let mut remaining = n;
    while remaining > 0 {
        let mask = table.mask(remaining as u64);
        let mut choices: Vec<u64> = (0..table.gaps.len())
            .filter(|d| mask >> d & 1 == 1)
            .map(|d| table.gaps[d])
            .collect();
        choices.sort_unstable();
        let g = choices
            .into_iter()
            .find(|&g| {
                let next = (at + g as usize) % n;
                let rest = remaining - g as usize;
                if rest == 0 {
                    next == start
                } else {
                    c.matches(next, class) && paths.holds(next, rest)
                }
            })
            .expect("path table promised a continuation");
        order.push(g);
        at = (at + g as usize) % n;
        remaining -= g as usize;
    }
    order
}

/// Dynamic-programming decider. Requires pairwise distinct subset sums.
pub fn detect_dp(
    c: &Colouring,
    inst: &DiscreteInstance,
) -> Result<Option<CopyWitness>, DetectorError> {
    detect_dp_in(c, inst, &BOTH)
}

/// [`detect_dp`] limited to the colour classes in `classes`.
pub fn detect_dp_in(
    c: &Colouring,
    inst: &DiscreteInstance,
    classes: &[Colour],
) -> Result<Option<CopyWitness>, DetectorError> {
    check_dims(c, inst)?;
    let table = SubsetSumTable::new(inst)?;
    let n = c.n();
    let tables: Vec<(Colour, PathTable)> = classes
        .iter()
        .map(|&class| (class, PathTable::build(&table, c, class)))
        .collect();
    for start in 0..n {
        let found = tables
            .iter()
            .filter(|(_, p)| p.holds(start, n))
            .map(|(class, p)| (*class, backtrack_order(&table, p, c, start, *class)));
        if let Some(w) = pick_witness(c, start, found) {
            return Ok(Some(w));
        }
    }
    Ok(None)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CopyCounts {
    pub red: u64,
    pub blue: u64,
}

impl CopyCounts {
    pub fn total(&self) -> u64 {
        self.red + self.blue
    }
}

/// Visits every copy once, as (start vertex of the largest gap, order of the
/// remaining gaps), pruning branches that leave the colour class. With
/// `class = None` nothing is pruned.
fn visit_canonical_copies(
    c: Option<&Colouring>,
    inst: &DiscreteInstance,
    class: Option<Colour>,
    visit: &mut dyn FnMut(&[usize]),
) {
    let n = inst.n() as usize;
    let k = inst.k();
    let mut gaps = inst.gaps().to_vec();
    gaps.sort_unstable_by(|a, b| b.cmp(a));
    let (largest, rest) = gaps.split_first().expect("instance has gaps");
    let ok = |v: usize| match (c, class) {
        (Some(c), Some(class)) => c.matches(v, class),
        _ => true,
    };

    // Once k vertices are placed, the one unused gap closes the polygon.
    fn extend(
        rest: &[u64],
        used: &mut [bool],
        vertices: &mut Vec<usize>,
        k: usize,
        n: usize,
        ok: &dyn Fn(usize) -> bool,
        visit: &mut dyn FnMut(&[usize]),
    ) {
        if vertices.len() == k {
            visit(vertices);
            return;
        }
        let at = *vertices.last().unwrap();
        for i in 0..rest.len() {
            if used[i] {
                continue;
            }
            let next = (at + rest[i] as usize) % n;
            if !ok(next) {
                continue;
            }
            used[i] = true;
            vertices.push(next);
            extend(rest, used, vertices, k, n, ok, visit);
            vertices.pop();
            used[i] = false;
        }
    }

    let mut used = vec![false; rest.len()];
    let mut vertices = Vec::with_capacity(k);
    for start in 0..n {
        if !ok(start) {
            continue;
        }
        vertices.clear();
        vertices.push(start);
        if k > 1 {
            let second = (start + *largest as usize) % n;
            if !ok(second) {
                continue;
            }
            vertices.push(second);
        }
        extend(rest, &mut used, &mut vertices, k, n, &ok, visit);
    }
}

/// Exact numbers of red and blue monochromatic copies.
pub fn count_copies(c: &Colouring, inst: &DiscreteInstance) -> Result<CopyCounts, DetectorError> {
    check_dims(c, inst)?;
    if !inst.has_distinct_gaps() {
        return Err(DetectorError::DuplicateGaps);
    }
    if c.black().is_some() {
        return Err(DetectorError::BlackVertex);
    }
    let count = |class| {
        let mut total = 0u64;
        visit_canonical_copies(Some(c), inst, Some(class), &mut |_| total += 1);
        total
    };
    Ok(CopyCounts {
        red: count(Colour::Red),
        blue: count(Colour::Blue),
    })
}

/// Number of copies of a distinct-gap instance: `n * (k-1)!`.
pub fn total_copies(inst: &DiscreteInstance) -> Result<u64, DetectorError> {
    if !inst.has_distinct_gaps() {
        return Err(DetectorError::DuplicateGaps);
    }
    let mut total = 0u64;
    visit_canonical_copies(None, inst, None, &mut |_| total += 1);
    Ok(total)
}

/// Every copy exactly once, as a vertex list starting at the start vertex of
/// the largest gap. Requires distinct gaps.
pub fn canonical_copies(inst: &DiscreteInstance) -> Result<Vec<Vec<usize>>, DetectorError> {
    if !inst.has_distinct_gaps() {
        return Err(DetectorError::DuplicateGaps);
    }
    let mut out = Vec::new();
    visit_canonical_copies(None, inst, None, &mut |v| out.push(v.to_vec()));
    Ok(out)
}

/// All distinct copies as vertex bitmasks (any gap multiset, `n <= 64`),
/// sorted ascending.
pub fn copy_masks(inst: &DiscreteInstance) -> Result<Vec<u64>, DetectorError> {
    let n = inst.n();
    if n > 64 {
        return Err(DetectorError::GridTooLarge(n));
    }
    let mut gaps = inst.gaps().to_vec();
    gaps.sort_unstable();
    let mut masks = BTreeSet::new();
    let mut order = Vec::with_capacity(gaps.len());
    let mut used = vec![false; gaps.len()];

    fn perms(gaps: &[u64], used: &mut [bool], order: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
        if order.len() == gaps.len() {
            out.push(order.clone());
            return;
        }
        let mut last = None;
        for i in 0..gaps.len() {
            if used[i] || last == Some(gaps[i]) {
                continue;
            }
            last = Some(gaps[i]);
            used[i] = true;
            order.push(gaps[i]);
            perms(gaps, used, order, out);
            order.pop();
            used[i] = false;
        }
    }

    let mut all_orders = Vec::new();
    perms(&gaps, &mut used, &mut order, &mut all_orders);
    for start in 0..n {
        for order in &all_orders {
            let mut v = start;
            let mut mask = 0u64;
            for g in order {
                mask |= 1 << v;
                v = (v + g) % n;
            }
            masks.insert(mask);
        }
    }
    Ok(masks.into_iter().collect())
}
