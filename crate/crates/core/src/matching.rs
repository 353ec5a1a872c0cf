//! Maximum-weight matching over a downward-closed feasibility family.
//!
//! Only pairs with weight above [`WEIGHT_EPS`] are ever matched. Among
//! maximizers the engine returns the lexicographically smallest sorted pair
//! list, so the empty matching wins every zero-weight tie.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::market::{FeasibilityFamily, Pair};

/// Weights at or below this are treated as non-positive; totals within this
/// distance are ties.
pub const WEIGHT_EPS: f64 = 1e-9;

/// Default cap on enumerated family members for `cap` and `explicit` families.
pub const DEFAULT_FAMILY_CAP: usize = 1_000_000;

#[derive(Clone, Debug)]
pub struct WeightedBipartiteGraph<'a> {
    n: usize,
    m: usize,
    weights: Vec<f64>,
    family: &'a FeasibilityFamily,
}

impl<'a> WeightedBipartiteGraph<'a> {
    /// `weights` is row-major: `weights[i * m + j]` is the weight of `(i, j)`.
    pub fn new(
        n: usize,
        m: usize,
        weights: Vec<f64>,
        family: &'a FeasibilityFamily,
    ) -> Result<Self> {
        if weights.len() != n * m {
            return Err(Error::WeightShape {
                got: weights.len(),
                expected: n * m,
            });
        }
        if let Some(pos) = weights.iter().position(|w| !w.is_finite()) {
            return Err(Error::NonFiniteWeight {
                pair: (pos / m, pos % m),
            });
        }
        Ok(Self {
            n,
            m,
            weights,
            family,
        })
    }

    pub fn from_fn(
        n: usize,
        m: usize,
        family: &'a FeasibilityFamily,
        weight: impl Fn(usize, usize) -> f64,
    ) -> Result<Self> {
        let weights = (0..n)
            .flat_map(|i| (0..m).map(move |j| (i, j)))
            .map(|(i, j)| weight(i, j))
            .collect();
        Self::new(n, m, weights, family)
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.weights[i * self.m + j]
    }

    fn positive(&self, i: usize, j: usize) -> bool {
        self.weight(i, j) > WEIGHT_EPS
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn family(&self) -> &FeasibilityFamily {
        self.family
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Matching {
    /// Sorted ascending by `(buyer, seller)`.
    pub pairs: Vec<Pair>,
    pub weight: f64,
}

impl Matching {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn contains(&self, pair: Pair) -> bool {
        self.pairs.binary_search(&pair).is_ok()
    }

    pub fn buyer_matched(&self, i: usize) -> bool {
        self.pairs.iter().any(|&(b, _)| b == i)
    }

    pub fn seller_matched(&self, j: usize) -> bool {
        self.pairs.iter().any(|&(_, s)| s == j)
    }

    pub fn partner_of_buyer(&self, i: usize) -> Option<usize> {
        self.pairs.iter().find(|&&(b, _)| b == i).map(|&(_, s)| s)
    }
}

pub fn max_weight_matching(graph: &WeightedBipartiteGraph) -> Result<Matching> {
    max_weight_matching_capped(graph, DEFAULT_FAMILY_CAP)
}

pub fn max_weight_matching_capped(graph: &WeightedBipartiteGraph, cap: usize) -> Result<Matching> {
    match graph.family {
        FeasibilityFamily::AllMatchings => Ok(assignment_lex_min(graph)),
        FeasibilityFamily::Cap(k) => enumerate_best(graph, *k, cap),
        FeasibilityFamily::Explicit(sets) => explicit_best(graph, sets, cap),
    }
}

pub fn pair_in_matching(graph: &WeightedBipartiteGraph, i: usize, j: usize) -> Result<bool> {
    Ok(max_weight_matching(graph)?.contains((i, j)))
}

fn total(graph: &WeightedBipartiteGraph, pairs: &[Pair]) -> f64 {
    pairs.iter().map(|&(i, j)| graph.weight(i, j)).sum()
}

fn explicit_best(
    graph: &WeightedBipartiteGraph,
    sets: &[Vec<Pair>],
    cap: usize,
) -> Result<Matching> {
    if sets.len() > cap {
        return Err(Error::FamilyTooLarge { cap });
    }
    // sets are sorted lexicographically, so the first strict improvement wins ties
    let mut best = Matching::empty();
    for set in sets {
        if !set.iter().all(|&(i, j)| graph.positive(i, j)) {
            continue;
        }
        let w = total(graph, set);
        if w > best.weight + WEIGHT_EPS {
            best = Matching {
                pairs: set.clone(),
                weight: w,
            };
        }
    }
    Ok(best)
}

struct Search<'g, 'a> {
    graph: &'g WeightedBipartiteGraph<'a>,
    max_size: usize,
    used_s: Vec<bool>,
    current: Vec<Pair>,
    best: Matching,
    visited: usize,
    cap: usize,
    // sorted descending, for the size-limited optimistic bound
    positive_desc: Vec<f64>,
}

impl Search<'_, '_> {
    fn bound(&self, weight: f64) -> f64 {
        let room = self.max_size - self.current.len();
        weight + self.positive_desc.iter().take(room).sum::<f64>()
    }

    // Pre-order over extensions by strictly later buyers visits sorted pair
    // lists in lexicographic order.
    fn visit(&mut self, first_buyer: usize, weight: f64) -> Result<()> {
        self.visited += 1;
        if self.visited > self.cap {
            return Err(Error::FamilyTooLarge { cap: self.cap });
        }
        if weight > self.best.weight + WEIGHT_EPS {
            self.best = Matching {
                pairs: self.current.clone(),
                weight,
            };
        }
        if self.current.len() == self.max_size || self.bound(weight) <= self.best.weight + WEIGHT_EPS
        {
            return Ok(());
        }
        for i in first_buyer..self.graph.n {
            for j in 0..self.graph.m {
                if self.used_s[j] || !self.graph.positive(i, j) {
                    continue;
                }
                self.used_s[j] = true;
                self.current.push((i, j));
                self.visit(i + 1, weight + self.graph.weight(i, j))?;
                self.current.pop();
                self.used_s[j] = false;
            }
        }
        Ok(())
    }
}

/// Branch-and-bound enumeration of matchings with at most `max_size` pairs.
pub(crate) fn enumerate_best(
    graph: &WeightedBipartiteGraph,
    max_size: usize,
    cap: usize,
) -> Result<Matching> {
    let mut positive_desc: Vec<f64> = graph
        .weights
        .iter()
        .copied()
        .filter(|&w| w > WEIGHT_EPS)
        .collect();
    positive_desc.sort_by(|a, b| b.total_cmp(a));
    let mut search = Search {
        graph,
        max_size: max_size.min(graph.n).min(graph.m),
        used_s: vec![false; graph.m],
        current: Vec::new(),
        best: Matching::empty(),
        visited: 0,
        cap,
        positive_desc,
    };
    search.visit(0, 0.0)?;
    Ok(search.best)
}

/// Optimal value of the assignment problem on buyers `rows` and sellers
/// `cols`, using only positive-weight pairs.
fn assignment_value(graph: &WeightedBipartiteGraph, rows: &[usize], cols: &[usize]) -> f64 {
    if rows.is_empty() || cols.is_empty() {
        return 0.0;
    }
    let size = rows.len().max(cols.len());
    let mut cost = vec![0.0; size * size];
    for (r, &i) in rows.iter().enumerate() {
        for (c, &j) in cols.iter().enumerate() {
            if graph.positive(i, j) {
                cost[r * size + c] = -graph.weight(i, j);
            }
        }
    }
    let assignment = hungarian(&cost, size);
    assignment
        .iter()
        .enumerate()
        .filter(|&(r, &c)| r < rows.len() && c < cols.len())
        .map(|(r, &c)| (rows[r], cols[c]))
        .filter(|&(i, j)| graph.positive(i, j))
        .map(|(i, j)| graph.weight(i, j))
        .sum()
}

/// Lexicographically smallest optimal matching: fix pairs one at a time in
/// sorted order, keeping a pair only if the optimum remains reachable.
fn assignment_lex_min(graph: &WeightedBipartiteGraph) -> Matching {
    let all_rows: Vec<usize> = (0..graph.n).collect();
    let all_cols: Vec<usize> = (0..graph.m).collect();
    let optimum = assignment_value(graph, &all_rows, &all_cols);

    let mut pairs = Vec::new();
    let mut used_s = vec![false; graph.m];
    let mut acc = 0.0;
    let mut next_buyer = 0;
    #[allow(clippy::mut_range_bound)]
    'outer: while acc < optimum - WEIGHT_EPS {
        for i in next_buyer..graph.n {
            for j in 0..graph.m {
                if used_s[j] || !graph.positive(i, j) {
                    continue;
                }
                let rows: Vec<usize> = (i + 1..graph.n).collect();
                let cols: Vec<usize> = (0..graph.m).filter(|&c| c != j && !used_s[c]).collect();
                let rest = assignment_value(graph, &rows, &cols);
                if acc + graph.weight(i, j) + rest >= optimum - WEIGHT_EPS {
                    pairs.push((i, j));
                    used_s[j] = true;
                    acc += graph.weight(i, j);
                    // restarts the scan past buyer i
                    next_buyer = i + 1;
                    continue 'outer;
                }
            }
        }
        break;
    }
    Matching { pairs, weight: acc }
}

/// Minimum-cost perfect assignment on a square `size x size` cost matrix
/// (row-major). Returns the column assigned to each row.
pub(crate) fn hungarian(cost: &[f64], size: usize) -> Vec<usize> {
    // 1-based potentials formulation; column 0 is a virtual start.
    let inf = f64::INFINITY;
    let mut u = vec![0.0; size + 1];
    let mut v = vec![0.0; size + 1];
    let mut row_of = vec![0usize; size + 1];
    let mut way = vec![0usize; size + 1];
    for row in 1..=size {
        row_of[0] = row;
        let mut col0 = 0;
        let mut min_to = vec![inf; size + 1];
        let mut used = vec![false; size + 1];
        loop {
            used[col0] = true;
            let r = row_of[col0];
            let mut delta = inf;
            let mut col1 = 0;
            for c in 1..=size {
                if used[c] {
                    continue;
                }
                let reduced = cost[(r - 1) * size + (c - 1)] - u[r] - v[c];
                if reduced < min_to[c] {
                    min_to[c] = reduced;
                    way[c] = col0;
                }
                if min_to[c] < delta {
                    delta = min_to[c];
                    col1 = c;
                }
            }
            for c in 0..=size {
                if used[c] {
                    u[row_of[c]] += delta;
                    v[c] -= delta;
                } else {
                    min_to[c] -= delta;
                }
            }
            col0 = col1;
            if row_of[col0] == 0 {
                break;
            }
        }
        loop {
            let prev = way[col0];
            row_of[col0] = row_of[prev];
            col0 = prev;
            if col0 == 0 {
                break;
            }
        }
    }
    let mut assignment = vec![0; size];
    for c in 1..=size {
        if row_of[c] > 0 {
            assignment[row_of[c] - 1] = c - 1;
        }
    }
    assignment
}
