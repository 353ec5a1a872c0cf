//! GSOM and GBOM for general double auctions.
//!
//! GSOM matches buyers and sellers by maximum weight under `phi~_i(b_i) - s_j`,
//! GBOM under `b_i - tau~_j(s_j)`. Matched buyers pay their smallest winning
//! report and matched sellers receive their largest winning report, scanned
//! over the agent's support with everyone else's report fixed.
//!
//! A [`MechanismTable`] is the exchange format between mechanisms, the budget
//! transforms and the auditor: one row per type profile in enumeration order.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::market::{Agent, Instance, Pair, ProfileSpace, TypeProfile};
use crate::matching::{max_weight_matching, Matching, WeightedBipartiteGraph};
use crate::virtuals::{buyer_virtual_values, seller_virtual_values, VirtualValueTable};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MechanismKind {
    #[serde(rename = "GSOM")]
    Gsom,
    #[serde(rename = "GBOM")]
    Gbom,
}

impl fmt::Display for MechanismKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MechanismKind::Gsom => "GSOM",
            MechanismKind::Gbom => "GBOM",
        })
    }
}

impl std::str::FromStr for MechanismKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gsom" => Ok(Self::Gsom),
            "gbom" => Ok(Self::Gbom),
            other => Err(Error::InvalidArgument(format!("unknown mechanism {other}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Label {
    #[serde(rename = "GSOM")]
    Gsom,
    #[serde(rename = "GBOM")]
    Gbom,
    #[serde(rename = "SOM")]
    Som,
    #[serde(rename = "BOM")]
    Bom,
    #[serde(rename = "custom")]
    Custom,
}

impl From<MechanismKind> for Label {
    fn from(kind: MechanismKind) -> Self {
        match kind {
            MechanismKind::Gsom => Label::Gsom,
            MechanismKind::Gbom => Label::Gbom,
        }
    }
}

/// Ironed virtual value tables for every agent of an instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VirtualTables {
    pub buyers: Vec<VirtualValueTable>,
    pub sellers: Vec<VirtualValueTable>,
}

impl VirtualTables {
    pub fn new(instance: &Instance) -> Self {
        Self {
            buyers: instance.buyers().iter().map(buyer_virtual_values).collect(),
            sellers: instance.sellers().iter().map(seller_virtual_values).collect(),
        }
    }

    /// Virtual weight of pair `(i, j)` at type indices `(kb, ks)`.
    pub fn weight(&self, kind: MechanismKind, i: usize, kb: usize, j: usize, ks: usize) -> f64 {
        match kind {
            MechanismKind::Gsom => self.buyers[i].ironed[kb] - self.sellers[j].support[ks],
            MechanismKind::Gbom => self.buyers[i].support[kb] - self.sellers[j].ironed[ks],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LotteryEntry {
    pub matching: Vec<Pair>,
    pub prob: f64,
}

/// Allocation and payments at one type profile.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileRow {
    pub b: Vec<f64>,
    pub s: Vec<f64>,
    pub prob: f64,
    pub matching: Vec<Pair>,
    /// Randomized allocation; when present it overrides `matching`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lottery: Option<Vec<LotteryEntry>>,
    #[serde(rename = "pB")]
    pub p_b: Vec<f64>,
    #[serde(rename = "pS")]
    pub p_s: Vec<f64>,
}

impl ProfileRow {
    fn prob_where(&self, pred: impl Fn(&[Pair]) -> bool) -> f64 {
        match &self.lottery {
            Some(entries) => entries
                .iter()
                .filter(|e| pred(&e.matching))
                .map(|e| e.prob)
                .sum(),
            None => {
                if pred(&self.matching) {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// Probability that buyer `i` trades.
    pub fn buyer_alloc(&self, i: usize) -> f64 {
        self.prob_where(|m| m.iter().any(|&(b, _)| b == i))
    }

    /// Probability that seller `j` trades.
    pub fn seller_alloc(&self, j: usize) -> f64 {
        self.prob_where(|m| m.iter().any(|&(_, s)| s == j))
    }

    pub fn pair_alloc(&self, pair: Pair) -> f64 {
        self.prob_where(|m| m.contains(&pair))
    }

    pub fn alloc(&self, agent: Agent) -> f64 {
        match agent {
            Agent::Buyer(i) => self.buyer_alloc(i),
            Agent::Seller(j) => self.seller_alloc(j),
        }
    }

    /// Buyer payment or seller gain.
    pub fn payment(&self, agent: Agent) -> f64 {
        match agent {
            Agent::Buyer(i) => self.p_b[i],
            Agent::Seller(j) => self.p_s[j],
        }
    }

    pub fn payment_mut(&mut self, agent: Agent) -> &mut f64 {
        match agent {
            Agent::Buyer(i) => &mut self.p_b[i],
            Agent::Seller(j) => &mut self.p_s[j],
        }
    }

    /// Expected realized gains from trade at this profile.
    pub fn gft(&self) -> f64 {
        let gain = |m: &[Pair]| m.iter().map(|&(i, j)| self.b[i] - self.s[j]).sum::<f64>();
        match &self.lottery {
            Some(entries) => entries.iter().map(|e| e.prob * gain(&e.matching)).sum(),
            None => gain(&self.matching),
        }
    }

    /// Buyer payments minus seller gains.
    pub fn surplus(&self) -> f64 {
        self.p_b.iter().sum::<f64>() - self.p_s.iter().sum::<f64>()
    }

    /// Ex-post utility of `agent` with true value `value` facing this row.
    pub fn utility(&self, agent: Agent, value: f64) -> f64 {
        match agent {
            Agent::Buyer(i) => value * self.buyer_alloc(i) - self.p_b[i],
            Agent::Seller(j) => self.p_s[j] - value * self.seller_alloc(j),
        }
    }

    fn matchings(&self) -> Vec<&[Pair]> {
        match &self.lottery {
            Some(entries) => entries.iter().map(|e| e.matching.as_slice()).collect(),
            None => vec![self.matching.as_slice()],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MechanismTable {
    pub label: Label,
    pub instance: Instance,
    pub profiles: Vec<ProfileRow>,
}

impl MechanismTable {
    pub fn from_json(json: &str) -> Result<Self> {
        let table: Self = serde_json::from_str(json)?;
        table.validate()?;
        Ok(table)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("table serializes")
    }

    pub fn space(&self) -> Result<ProfileSpace> {
        self.instance.profile_space()
    }

    /// Checks shape, profile order, probabilities and feasibility.
    pub fn validate(&self) -> Result<()> {
        let inst = &self.instance;
        let space = inst.profile_space()?;
        if space.len() != self.profiles.len() {
            return Err(Error::TableMismatch(format!(
                "{} rows for {} profiles",
                self.profiles.len(),
                space.len()
            )));
        }
        for (idx, row) in self.profiles.iter().enumerate() {
            let digits = space.digits(idx);
            let expected = inst.profile_from_indices(&digits);
            if row.b != expected.b || row.s != expected.s {
                return Err(Error::TableMismatch(format!("row {idx} is out of order")));
            }
            if (row.prob - inst.prob_of_indices(&digits)).abs() > 1e-12 {
                return Err(Error::TableMismatch(format!("row {idx} has wrong probability")));
            }
            if row.p_b.len() != inst.n() || row.p_s.len() != inst.m() {
                return Err(Error::TableMismatch(format!("row {idx} has wrong payment shape")));
            }
            if !row.p_b.iter().chain(&row.p_s).all(|p| p.is_finite()) {
                return Err(Error::TableMismatch(format!("row {idx} has non-finite payments")));
            }
            for m in row.matchings() {
                if !is_sorted_matching(m) || !inst.feasibility().contains(m) {
                    return Err(Error::TableMismatch(format!(
                        "row {idx} allocates infeasible set {m:?}"
                    )));
                }
                if m.iter().any(|&(i, j)| i >= inst.n() || j >= inst.m()) {
                    return Err(Error::TableMismatch(format!("row {idx} pair out of range")));
                }
            }
            if let Some(entries) = &row.lottery {
                let total: f64 = entries.iter().map(|e| e.prob).sum();
                if entries.iter().any(|e| e.prob < -1e-12) || (total - 1.0).abs() > 1e-9 {
                    return Err(Error::TableMismatch(format!("row {idx} lottery is not a distribution")));
                }
            }
        }
        Ok(())
    }
}

fn is_sorted_matching(m: &[Pair]) -> bool {
    m.windows(2).all(|w| w[0] < w[1])
}

fn allocate_at(
    instance: &Instance,
    tables: &VirtualTables,
    kind: MechanismKind,
    digits: &[usize],
) -> Result<Matching> {
    let n = instance.n();
    let graph = WeightedBipartiteGraph::from_fn(n, instance.m(), instance.feasibility(), |i, j| {
        tables.weight(kind, i, digits[i], j, digits[n + j])
    })?;
    max_weight_matching(&graph)
}

fn allocate_profile(
    instance: &Instance,
    kind: MechanismKind,
    profile: &TypeProfile,
) -> Result<Matching> {
    let tables = VirtualTables::new(instance);
    let digits = instance.indices_of(profile)?;
    allocate_at(instance, &tables, kind, &digits)
}

/// GSOM matching at `profile`: maximum weight under `phi~_i(b_i) - s_j`.
pub fn gsom_allocate(instance: &Instance, profile: &TypeProfile) -> Result<Matching> {
    allocate_profile(instance, MechanismKind::Gsom, profile)
}

/// GBOM matching at `profile`: maximum weight under `b_i - tau~_j(s_j)`.
pub fn gbom_allocate(instance: &Instance, profile: &TypeProfile) -> Result<Matching> {
    allocate_profile(instance, MechanismKind::Gbom, profile)
}

/// Threshold payments at `profile` for an arbitrary deterministic allocation
/// rule. A matched buyer pays the smallest support value at which she is still
/// matched (others fixed); a matched seller receives the largest.
pub fn threshold_payments(
    instance: &Instance,
    allocate: impl Fn(&TypeProfile) -> Result<Matching>,
    profile: &TypeProfile,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let current = allocate(profile)?;
    let mut p_b = vec![0.0; instance.n()];
    let mut p_s = vec![0.0; instance.m()];
    for (i, pay) in p_b.iter_mut().enumerate() {
        if !current.buyer_matched(i) {
            continue;
        }
        for &v in instance.buyer(i).support() {
            let mut probe = profile.clone();
            probe.b[i] = v;
            if allocate(&probe)?.buyer_matched(i) {
                *pay = v;
                break;
            }
        }
    }
    for (j, gain) in p_s.iter_mut().enumerate() {
        if !current.seller_matched(j) {
            continue;
        }
        for &v in instance.seller(j).support().iter().rev() {
            let mut probe = profile.clone();
            probe.s[j] = v;
            if allocate(&probe)?.seller_matched(j) {
                *gain = v;
                break;
            }
        }
    }
    Ok((p_b, p_s))
}

/// Threshold payments at profile `idx` given allocations at every profile.
fn threshold_from_table(
    instance: &Instance,
    space: &ProfileSpace,
    allocations: &[Matching],
    idx: usize,
) -> (Vec<f64>, Vec<f64>) {
    let here = &allocations[idx];
    let p_b = (0..instance.n())
        .map(|i| {
            if !here.buyer_matched(i) {
                return 0.0;
            }
            let agent = Agent::Buyer(i);
            (0..space.radix(agent))
                .find(|&k| allocations[space.with_digit(idx, agent, k)].buyer_matched(i))
                .map_or(0.0, |k| instance.buyer(i).value(k))
        })
        .collect();
    let p_s = (0..instance.m())
        .map(|j| {
            if !here.seller_matched(j) {
                return 0.0;
            }
            let agent = Agent::Seller(j);
            (0..space.radix(agent))
                .rev()
                .find(|&k| allocations[space.with_digit(idx, agent, k)].seller_matched(j))
                .map_or(0.0, |k| instance.seller(j).value(k))
        })
        .collect();
    (p_b, p_s)
}

/// Builds the full GSOM or GBOM table with threshold payments.
pub fn build_mechanism(instance: &Instance, kind: MechanismKind) -> Result<MechanismTable> {
    let tables = VirtualTables::new(instance);
    let space = instance.profile_space()?;
    let allocations: Vec<Matching> = (0..space.len())
        .into_par_iter()
        .map(|idx| allocate_at(instance, &tables, kind, &space.digits(idx)))
        .collect::<Result<_>>()?;
    let profiles = (0..space.len())
        .into_par_iter()
        .map(|idx| {
            let digits = space.digits(idx);
            let profile = instance.profile_from_indices(&digits);
            let (p_b, p_s) = threshold_from_table(instance, &space, &allocations, idx);
            ProfileRow {
                b: profile.b,
                s: profile.s,
                prob: instance.prob_of_indices(&digits),
                matching: allocations[idx].pairs.clone(),
                lottery: None,
                p_b,
                p_s,
            }
        })
        .collect();
    Ok(MechanismTable {
        label: kind.into(),
        instance: instance.clone(),
        profiles,
    })
}

/// Builds a table from an arbitrary deterministic allocation with threshold
/// payments; used for hand-built mechanisms in tests and the CLI.
pub fn build_from_allocation(
    instance: &Instance,
    label: Label,
    allocate: impl Fn(&[usize]) -> Vec<Pair> + Sync,
) -> Result<MechanismTable> {
    let space = instance.profile_space()?;
    let allocations: Vec<Matching> = (0..space.len())
        .map(|idx| {
            let mut pairs = allocate(&space.digits(idx));
            pairs.sort_unstable();
            Matching { pairs, weight: 0.0 }
        })
        .collect();
    let profiles = (0..space.len())
        .map(|idx| {
            let digits = space.digits(idx);
            let profile = instance.profile_from_indices(&digits);
            let (p_b, p_s) = threshold_from_table(instance, &space, &allocations, idx);
            ProfileRow {
                b: profile.b,
                s: profile.s,
                prob: instance.prob_of_indices(&digits),
                matching: allocations[idx].pairs.clone(),
                lottery: None,
                p_b,
                p_s,
            }
        })
        .collect();
    let table = MechanismTable {
        label,
        instance: instance.clone(),
        profiles,
    };
    table.validate()?;
    Ok(table)
}

/// Expected gains from trade.
pub fn gft_exact(table: &MechanismTable) -> f64 {
    table.profiles.iter().map(|r| r.prob * r.gft()).sum()
}

/// Expected virtual weight of the realized matchings under `kind`'s weights.
pub fn virtual_gft(table: &MechanismTable, kind: MechanismKind) -> Result<f64> {
    let tables = VirtualTables::new(&table.instance);
    let space = table.space()?;
    let n = table.instance.n();
    let mut total = 0.0;
    for (idx, row) in table.profiles.iter().enumerate() {
        let digits = space.digits(idx);
        let weight = |m: &[Pair]| {
            m.iter()
                .map(|&(i, j)| tables.weight(kind, i, digits[i], j, digits[n + j]))
                .sum::<f64>()
        };
        let w = match &row.lottery {
            Some(entries) => entries.iter().map(|e| e.prob * weight(&e.matching)).sum(),
            None => weight(&row.matching),
        };
        total += row.prob * w;
    }
    Ok(total)
}

/// `E[sum of buyer payments] - E[sum of seller gains]`.
pub fn exante_surplus(table: &MechanismTable) -> f64 {
    table.profiles.iter().map(|r| r.prob * r.surplus()).sum()
}

/// Worst slice of the per-pair budget inequality.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairSurplus {
    /// Smallest `E[x_ij (p^B_i - p^S_j)]` over all slices (non-negative when the
    /// inequality holds everywhere).
    pub worst: f64,
    pub pair: Option<Pair>,
    /// A profile in the worst slice, with the varied coordinate at its lowest type.
    pub profile: Option<usize>,
}

/// For each pair `(i, j)` and each fixing of all reports except one, the
/// expected buyer payment attributed to the pair covers the expected seller
/// gain attributed to it. GSOM slices vary the buyer's report, GBOM slices the
/// seller's.
pub fn pairwise_surplus(table: &MechanismTable, kind: MechanismKind) -> Result<PairSurplus> {
    let inst = &table.instance;
    let space = table.space()?;
    let mut worst = PairSurplus {
        worst: f64::INFINITY,
        pair: None,
        profile: None,
    };
    for i in 0..inst.n() {
        for j in 0..inst.m() {
            let varied = match kind {
                MechanismKind::Gsom => Agent::Buyer(i),
                MechanismKind::Gbom => Agent::Seller(j),
            };
            let dist = inst.distribution(varied);
            for base in 0..space.len() {
                if space.digit(base, varied) != 0 {
                    continue;
                }
                let mut slack = 0.0;
                for k in 0..dist.len() {
                    let row = &table.profiles[space.with_digit(base, varied, k)];
                    let x = row.pair_alloc((i, j));
                    slack += dist.prob(k) * x * (row.p_b[i] - row.p_s[j]);
                }
                if slack < worst.worst {
                    worst = PairSurplus {
                        worst: slack,
                        pair: Some((i, j)),
                        profile: Some(base),
                    };
                }
            }
        }
    }
    if worst.worst == f64::INFINITY {
        worst.worst = 0.0;
    }
    Ok(worst)
}

/// An all-empty table with zero payments.
pub fn empty_mechanism(instance: &Instance) -> Result<MechanismTable> {
    build_from_allocation(instance, Label::Custom, |_| Vec::new())
}
