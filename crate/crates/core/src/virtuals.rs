//! Discrete virtual values and ironing.
//!
//! For a buyer with support `b_0 < ... < b_{K-1}` the raw virtual value is
//! `phi_k = b_k - (b_{k+1} - b_k) * Pr[b > b_k] / f(b_k)` with `phi_{K-1} = b_{K-1}`;
//! for a seller, `tau_k = s_k + (s_k - s_{k-1}) * Pr[s < s_k] / f(s_k)` with
//! `tau_0 = s_0`. Both are the slopes of a piecewise-linear curve in quantile
//! space whose segment `k` has width `f_k`: the buyer's revenue curve
//! `(Pr[b >= b_k], b_k * Pr[b >= b_k])` read from the top type down, and the
//! seller's cost curve `(F(s_k), s_k * F(s_k))`. Ironing replaces these slopes
//! by the slopes of the concave (buyer) or convex (seller) hull; in index order
//! both hulls are the weighted non-decreasing regression of the raw slopes,
//! computed here by a stack sweep that merges adjacent runs while they violate
//! monotonicity.

use serde::{Deserialize, Serialize};

use crate::market::DiscreteDistribution;

/// Raw/ironed gaps below this are not reported as ironed intervals.
pub const IRONING_REPORT_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Buyer,
    Seller,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VirtualValueTable {
    pub side: Side,
    pub support: Vec<f64>,
    pub raw: Vec<f64>,
    pub ironed: Vec<f64>,
    /// Inclusive index ranges `[lo, hi]` sharing one ironed value.
    pub ironed_intervals: Vec<(usize, usize)>,
}

impl VirtualValueTable {
    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    /// True if index `k` lies strictly inside an ironed interval, i.e. its
    /// point on the revenue/cost curve is not on the hull. A buyer's tail sum
    /// from `k` reads the curve at the lower end of the run, so the buyer
    /// interior is `lo + 1..=hi`; a seller's prefix sum up to `k` reads it at
    /// the upper end, so the seller interior is `lo..hi`.
    pub fn is_interior(&self, k: usize) -> bool {
        self.ironed_intervals.iter().any(|&(lo, hi)| match self.side {
            Side::Buyer => k > lo && k <= hi,
            Side::Seller => k >= lo && k < hi,
        })
    }

    pub fn is_regular(&self) -> bool {
        self.raw.windows(2).all(|w| w[0] <= w[1])
    }
}

pub fn buyer_virtual_values(dist: &DiscreteDistribution) -> VirtualValueTable {
    let k_max = dist.len();
    let support = dist.support().to_vec();
    let mut raw = Vec::with_capacity(k_max);
    let mut above = 0.0;
    let mut tails = vec![0.0; k_max];
    for k in (0..k_max).rev() {
        tails[k] = above;
        above += dist.prob(k);
    }
    for k in 0..k_max {
        if k + 1 == k_max {
            raw.push(support[k]);
        } else {
            raw.push(support[k] - (support[k + 1] - support[k]) * tails[k] / dist.prob(k));
        }
    }
    iron(Side::Buyer, support, raw, dist.pmf())
}

pub fn seller_virtual_values(dist: &DiscreteDistribution) -> VirtualValueTable {
    let support = dist.support().to_vec();
    let mut raw = Vec::with_capacity(support.len());
    let mut below = 0.0;
    for k in 0..support.len() {
        if k == 0 {
            raw.push(support[0]);
        } else {
            raw.push(support[k] + (support[k] - support[k - 1]) * below / dist.prob(k));
        }
        below += dist.prob(k);
    }
    iron(Side::Seller, support, raw, dist.pmf())
}

struct Run {
    lo: usize,
    hi: usize,
    mass: f64,
    area: f64,
    slope: f64,
}

fn iron(side: Side, support: Vec<f64>, raw: Vec<f64>, pmf: &[f64]) -> VirtualValueTable {
    let mut stack: Vec<Run> = Vec::with_capacity(raw.len());
    for (k, (&slope, &mass)) in raw.iter().zip(pmf).enumerate() {
        let mut run = Run {
            lo: k,
            hi: k,
            mass,
            area: slope * mass,
            slope,
        };
        while let Some(prev) = stack.last() {
            if prev.slope <= run.slope {
                break;
            }
            let prev = stack.pop().unwrap();
            let mass = prev.mass + run.mass;
            let area = prev.area + run.area;
            run = Run {
                lo: prev.lo,
                hi: run.hi,
                mass,
                area,
                slope: area / mass,
            };
        }
        stack.push(run);
    }

    let mut ironed = vec![0.0; raw.len()];
    let mut ironed_intervals = Vec::new();
    for run in &stack {
        if run.lo == run.hi {
            // single segment: keep the raw slope bit-for-bit
            ironed[run.lo] = raw[run.lo];
            continue;
        }
        for v in &mut ironed[run.lo..=run.hi] {
            *v = run.slope;
        }
        let gap = raw[run.lo..=run.hi]
            .iter()
            .map(|r| (r - run.slope).abs())
            .fold(0.0, f64::max);
        if gap > IRONING_REPORT_TOLERANCE {
            ironed_intervals.push((run.lo, run.hi));
        }
    }

    VirtualValueTable {
        side,
        support,
        raw,
        ironed,
        ironed_intervals,
    }
}
