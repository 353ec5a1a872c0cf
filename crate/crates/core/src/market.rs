//! Discrete double-auction instances.
//!
//! An [`Instance`] holds one independent [`DiscreteDistribution`] per buyer and
//! per seller together with a downward-closed [`FeasibilityFamily`] of
//! buyer-seller matchings. Type profiles are enumerated in a fixed mixed-radix
//! order (buyer 0 varies fastest, then the remaining buyers, then the sellers)
//! which every table in this crate shares.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A buyer-seller pair `(buyer index, seller index)`.
pub type Pair = (usize, usize);

/// Tolerance on `sum(pmf) == 1` when parsing.
pub const PMF_TOLERANCE: f64 = 1e-12;
/// Tolerance on derived probability sums.
pub const DERIVED_PROB_TOLERANCE: f64 = 1e-9;
/// Default cap on the number of enumerated type profiles.
pub const DEFAULT_PROFILE_CAP: usize = 10_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "side", content = "index")]
pub enum Agent {
    Buyer(usize),
    Seller(usize),
}

impl fmt::Display for Agent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Agent::Buyer(i) => write!(f, "buyer {i}"),
            Agent::Seller(j) => write!(f, "seller {j}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct DistributionDoc {
    support: Vec<f64>,
    pmf: Vec<f64>,
}

/// Finite-support distribution over non-negative values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DistributionDoc", into = "DistributionDoc")]
pub struct DiscreteDistribution {
    support: Vec<f64>,
    pmf: Vec<f64>,
}

impl TryFrom<DistributionDoc> for DiscreteDistribution {
    type Error = Error;

    fn try_from(doc: DistributionDoc) -> Result<Self> {
        Self::new(doc.support, doc.pmf)
    }
}

impl From<DiscreteDistribution> for DistributionDoc {
    fn from(d: DiscreteDistribution) -> Self {
        DistributionDoc {
            support: d.support,
            pmf: d.pmf,
        }
    }
}

impl DiscreteDistribution {
    pub fn new(support: Vec<f64>, pmf: Vec<f64>) -> Result<Self> {
        Self::validated("distribution", support, pmf)
    }

    fn validated(agent: &str, support: Vec<f64>, pmf: Vec<f64>) -> Result<Self> {
        let agent = agent.to_string();
        if support.is_empty() {
            return Err(Error::EmptySupport { agent });
        }
        if support.len() != pmf.len() {
            return Err(Error::LengthMismatch {
                agent,
                support: support.len(),
                pmf: pmf.len(),
            });
        }
        for &v in &support {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::NegativeValue { agent, value: v });
            }
        }
        if let Some(index) = support.windows(2).position(|w| w[0] >= w[1]) {
            return Err(Error::NonAscendingSupport {
                agent,
                index: index + 1,
            });
        }
        for (index, &p) in pmf.iter().enumerate() {
            if !(p > 0.0 && p <= 1.0) {
                return Err(Error::NonPositiveProbability {
                    agent,
                    index,
                    value: p,
                });
            }
        }
        let deviation = (pmf.iter().sum::<f64>() - 1.0).abs();
        if deviation > PMF_TOLERANCE {
            return Err(Error::PmfNotNormalized { agent, deviation });
        }
        Ok(Self { support, pmf })
    }

    /// Uniform distribution over `support`.
    pub fn uniform(support: Vec<f64>) -> Result<Self> {
        let k = support.len().max(1);
        let pmf = vec![1.0 / k as f64; support.len()];
        Self::new(support, pmf)
    }

    pub fn point_mass(value: f64) -> Result<Self> {
        Self::new(vec![value], vec![1.0])
    }

    pub fn support(&self) -> &[f64] {
        &self.support
    }

    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn value(&self, k: usize) -> f64 {
        self.support[k]
    }

    pub fn prob(&self, k: usize) -> f64 {
        self.pmf[k]
    }

    /// Index of `value` in the support, matched exactly.
    pub fn index_of(&self, value: f64) -> Option<usize> {
        self.support.iter().position(|&v| v == value)
    }

    /// `Pr[X <= support[k]]`.
    pub fn cdf(&self, k: usize) -> f64 {
        self.pmf[..=k].iter().sum()
    }

    /// `Pr[X >= support[k]]`.
    pub fn tail(&self, k: usize) -> f64 {
        self.pmf[k..].iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.support.iter().zip(&self.pmf).map(|(v, p)| v * p).sum()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum FamilyDoc {
    AllMatchings,
    Cap { k: usize },
    Explicit { sets: Vec<Vec<Pair>> },
}

/// Downward-closed family of buyer-seller matchings.
///
/// `Explicit` families are stored closed under subsets as a sorted,
/// deduplicated list of sorted pair lists; the empty set is always the first
/// member.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FamilyDoc", into = "FamilyDoc")]
pub enum FeasibilityFamily {
    AllMatchings,
    Cap(usize),
    Explicit(Vec<Vec<Pair>>),
}

impl TryFrom<FamilyDoc> for FeasibilityFamily {
    type Error = Error;

    fn try_from(doc: FamilyDoc) -> Result<Self> {
        match doc {
            FamilyDoc::AllMatchings => Ok(Self::AllMatchings),
            FamilyDoc::Cap { k } => Self::cap(k),
            FamilyDoc::Explicit { sets } => Self::explicit(sets),
        }
    }
}

impl From<FeasibilityFamily> for FamilyDoc {
    fn from(f: FeasibilityFamily) -> Self {
        match f {
            FeasibilityFamily::AllMatchings => FamilyDoc::AllMatchings,
            FeasibilityFamily::Cap(k) => FamilyDoc::Cap { k },
            FeasibilityFamily::Explicit(sets) => FamilyDoc::Explicit { sets },
        }
    }
}

fn is_matching(set: &[Pair]) -> bool {
    let mut buyers = BTreeSet::new();
    let mut sellers = BTreeSet::new();
    set.iter()
        .all(|&(i, j)| buyers.insert(i) && sellers.insert(j))
}

impl FeasibilityFamily {
    pub fn cap(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::ZeroCap);
        }
        Ok(Self::Cap(k))
    }

    /// Builds an explicit family from generating sets, closing it under subsets.
    pub fn explicit(sets: Vec<Vec<Pair>>) -> Result<Self> {
        let mut closed: BTreeSet<Vec<Pair>> = BTreeSet::new();
        closed.insert(Vec::new());
        for mut set in sets {
            if !is_matching(&set) {
                return Err(Error::NotAMatching { set });
            }
            set.sort_unstable();
            let size = set.len();
            for mask in 0u64..(1u64 << size) {
                let subset: Vec<Pair> = (0..size)
                    .filter(|b| mask & (1 << b) != 0)
                    .map(|b| set[b])
                    .collect();
                closed.insert(subset);
            }
        }
        Ok(Self::Explicit(closed.into_iter().collect()))
    }

    pub fn label(&self) -> String {
        match self {
            Self::AllMatchings => "all_matchings".into(),
            Self::Cap(k) => format!("cap({k})"),
            Self::Explicit(sets) => format!("explicit({} sets)", sets.len()),
        }
    }

    /// Largest matching size permitted on an `n x m` market.
    pub fn max_size(&self, n: usize, m: usize) -> usize {
        match self {
            Self::AllMatchings => n.min(m),
            Self::Cap(k) => (*k).min(n).min(m),
            Self::Explicit(sets) => sets.iter().map(Vec::len).max().unwrap_or(0),
        }
    }

    /// Membership test for a sorted pair list.
    pub fn contains(&self, set: &[Pair]) -> bool {
        match self {
            Self::AllMatchings => is_matching(set),
            Self::Cap(k) => set.len() <= *k && is_matching(set),
            Self::Explicit(sets) => {
                let mut sorted = set.to_vec();
                sorted.sort_unstable();
                sets.binary_search(&sorted).is_ok()
            }
        }
    }

    fn check_indices(&self, n: usize, m: usize) -> Result<()> {
        if let Self::Explicit(sets) = self {
            for set in sets {
                for &pair in set {
                    if pair.0 >= n || pair.1 >= m {
                        return Err(Error::PairOutOfRange { pair, n, m });
                    }
                }
            }
        }
        Ok(())
    }

    /// All members on an `n x m` market in lexicographic order of their
    /// canonical pair lists (the empty set first).
    pub fn members(&self, n: usize, m: usize, cap: usize) -> Result<Vec<Vec<Pair>>> {
        if let Self::Explicit(sets) = self {
            if sets.len() > cap {
                return Err(Error::FamilyTooLarge { cap });
            }
            return Ok(sets.clone());
        }
        let max = self.max_size(n, m);
        let mut out = Vec::new();
        let mut current = Vec::new();
        let mut used_s = vec![false; m];
        collect_matchings(n, m, 0, max, &mut used_s, &mut current, &mut out, cap)?;
        Ok(out)
    }
}

#[allow(clippy::too_many_arguments)]
fn collect_matchings(
    n: usize,
    m: usize,
    first_buyer: usize,
    max: usize,
    used_s: &mut [bool],
    current: &mut Vec<Pair>,
    out: &mut Vec<Vec<Pair>>,
    cap: usize,
) -> Result<()> {
    if out.len() >= cap {
        return Err(Error::FamilyTooLarge { cap });
    }
    out.push(current.clone());
    if current.len() == max {
        return Ok(());
    }
    for i in first_buyer..n {
        for j in 0..m {
            if used_s[j] {
                continue;
            }
            used_s[j] = true;
            current.push((i, j));
            collect_matchings(n, m, i + 1, max, used_s, current, out, cap)?;
            current.pop();
            used_s[j] = false;
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct InstanceDoc {
    buyers: Vec<DistributionDoc>,
    sellers: Vec<DistributionDoc>,
    feasibility: FamilyDoc,
}

/// A validated double-auction instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "InstanceDoc", into = "InstanceDoc")]
pub struct Instance {
    buyers: Vec<DiscreteDistribution>,
    sellers: Vec<DiscreteDistribution>,
    feasibility: FeasibilityFamily,
}

impl TryFrom<InstanceDoc> for Instance {
    type Error = Error;

    fn try_from(doc: InstanceDoc) -> Result<Self> {
        let buyers = doc
            .buyers
            .into_iter()
            .enumerate()
            .map(|(i, d)| DiscreteDistribution::validated(&format!("buyer {i}"), d.support, d.pmf))
            .collect::<Result<Vec<_>>>()?;
        let sellers = doc
            .sellers
            .into_iter()
            .enumerate()
            .map(|(j, d)| {
                DiscreteDistribution::validated(&format!("seller {j}"), d.support, d.pmf)
            })
            .collect::<Result<Vec<_>>>()?;
        let feasibility = FeasibilityFamily::try_from(doc.feasibility)?;
        Instance::new(buyers, sellers, feasibility)
    }
}

impl From<Instance> for InstanceDoc {
    fn from(inst: Instance) -> Self {
        InstanceDoc {
            buyers: inst.buyers.into_iter().map(Into::into).collect(),
            sellers: inst.sellers.into_iter().map(Into::into).collect(),
            feasibility: inst.feasibility.into(),
        }
    }
}

/// Parses and validates an instance document.
pub fn validate_instance(json: &str) -> Result<Instance> {
    Ok(serde_json::from_str(json)?)
}

impl Instance {
    pub fn new(
        buyers: Vec<DiscreteDistribution>,
        sellers: Vec<DiscreteDistribution>,
        feasibility: FeasibilityFamily,
    ) -> Result<Self> {
        if buyers.is_empty() || sellers.is_empty() {
            return Err(Error::NoAgents);
        }
        feasibility.check_indices(buyers.len(), sellers.len())?;
        Ok(Self {
            buyers,
            sellers,
            feasibility,
        })
    }

    /// One buyer, one seller, trivially feasible.
    pub fn bilateral(buyer: DiscreteDistribution, seller: DiscreteDistribution) -> Self {
        Self {
            buyers: vec![buyer],
            sellers: vec![seller],
            feasibility: FeasibilityFamily::AllMatchings,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("instance serializes")
    }

    pub fn n(&self) -> usize {
        self.buyers.len()
    }

    pub fn m(&self) -> usize {
        self.sellers.len()
    }

    pub fn buyers(&self) -> &[DiscreteDistribution] {
        &self.buyers
    }

    pub fn sellers(&self) -> &[DiscreteDistribution] {
        &self.sellers
    }

    pub fn buyer(&self, i: usize) -> &DiscreteDistribution {
        &self.buyers[i]
    }

    pub fn seller(&self, j: usize) -> &DiscreteDistribution {
        &self.sellers[j]
    }

    pub fn distribution(&self, agent: Agent) -> &DiscreteDistribution {
        match agent {
            Agent::Buyer(i) => &self.buyers[i],
            Agent::Seller(j) => &self.sellers[j],
        }
    }

    pub fn feasibility(&self) -> &FeasibilityFamily {
        &self.feasibility
    }

    pub fn is_bilateral(&self) -> bool {
        self.n() == 1 && self.m() == 1
    }

    pub fn agents(&self) -> impl Iterator<Item = Agent> + '_ {
        (0..self.n())
            .map(Agent::Buyer)
            .chain((0..self.m()).map(Agent::Seller))
    }

    pub fn profile_space(&self) -> Result<ProfileSpace> {
        self.profile_space_capped(DEFAULT_PROFILE_CAP)
    }

    pub fn profile_space_capped(&self, cap: usize) -> Result<ProfileSpace> {
        let radices: Vec<usize> = self
            .buyers
            .iter()
            .chain(&self.sellers)
            .map(DiscreteDistribution::len)
            .collect();
        let size: f64 = radices.iter().map(|&r| r as f64).product();
        if size > cap as f64 {
            return Err(Error::ProfileSpaceTooLarge { size, cap });
        }
        Ok(ProfileSpace::new(self.n(), radices))
    }

    /// Joint probability of the profile given by per-agent type indices.
    pub fn prob_of_indices(&self, digits: &[usize]) -> f64 {
        let n = self.n();
        digits
            .iter()
            .enumerate()
            .map(|(pos, &k)| {
                if pos < n {
                    self.buyers[pos].prob(k)
                } else {
                    self.sellers[pos - n].prob(k)
                }
            })
            .product()
    }

    pub fn profile_from_indices(&self, digits: &[usize]) -> TypeProfile {
        let n = self.n();
        TypeProfile {
            b: (0..n).map(|i| self.buyers[i].value(digits[i])).collect(),
            s: (0..self.m())
                .map(|j| self.sellers[j].value(digits[n + j]))
                .collect(),
        }
    }

    /// Per-agent type indices of a value profile.
    pub fn indices_of(&self, profile: &TypeProfile) -> Result<Vec<usize>> {
        if profile.b.len() != self.n() {
            return Err(Error::ProfileShape {
                side: "buyers",
                got: profile.b.len(),
                expected: self.n(),
            });
        }
        if profile.s.len() != self.m() {
            return Err(Error::ProfileShape {
                side: "sellers",
                got: profile.s.len(),
                expected: self.m(),
            });
        }
        let mut digits = Vec::with_capacity(self.n() + self.m());
        for (agent, &value) in self.agents().zip(profile.b.iter().chain(&profile.s)) {
            let k = self
                .distribution(agent)
                .index_of(value)
                .ok_or_else(|| Error::TypeNotInSupport {
                    agent: agent.to_string(),
                    value,
                })?;
            digits.push(k);
        }
        Ok(digits)
    }
}

/// A realized value for every buyer and seller.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TypeProfile {
    pub b: Vec<f64>,
    pub s: Vec<f64>,
}

/// Mixed-radix indexing of the product of all agents' supports.
///
/// Position `i < n` is buyer `i`, position `n + j` is seller `j`; position 0
/// varies fastest.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProfileSpace {
    n: usize,
    radices: Vec<usize>,
    strides: Vec<usize>,
    len: usize,
}

impl ProfileSpace {
    fn new(n: usize, radices: Vec<usize>) -> Self {
        let mut strides = Vec::with_capacity(radices.len());
        let mut acc = 1;
        for &r in &radices {
            strides.push(acc);
            acc *= r;
        }
        Self {
            n,
            radices,
            strides,
            len: acc,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn num_agents(&self) -> usize {
        self.radices.len()
    }

    pub fn position(&self, agent: Agent) -> usize {
        match agent {
            Agent::Buyer(i) => i,
            Agent::Seller(j) => self.n + j,
        }
    }

    pub fn radix(&self, agent: Agent) -> usize {
        self.radices[self.position(agent)]
    }

    pub fn digits(&self, mut index: usize) -> Vec<usize> {
        self.radices
            .iter()
            .map(|&r| {
                let d = index % r;
                index /= r;
                d
            })
            .collect()
    }

    pub fn index(&self, digits: &[usize]) -> usize {
        digits.iter().zip(&self.strides).map(|(d, s)| d * s).sum()
    }

    pub fn digit(&self, index: usize, agent: Agent) -> usize {
        let pos = self.position(agent);
        (index / self.strides[pos]) % self.radices[pos]
    }

    /// Index of the profile that differs from `index` only in `agent`'s type.
    pub fn with_digit(&self, index: usize, agent: Agent, k: usize) -> usize {
        let pos = self.position(agent);
        let stride = self.strides[pos];
        let current = (index / stride) % self.radices[pos];
        index - current * stride + k * stride
    }
}

/// All type profiles with their probabilities, buyer 0 varying fastest.
pub fn enumerate_profiles(instance: &Instance) -> Result<Vec<(TypeProfile, f64)>> {
    enumerate_profiles_capped(instance, DEFAULT_PROFILE_CAP)
}

pub fn enumerate_profiles_capped(
    instance: &Instance,
    cap: usize,
) -> Result<Vec<(TypeProfile, f64)>> {
    let space = instance.profile_space_capped(cap)?;
    Ok((0..space.len())
        .map(|idx| {
            let digits = space.digits(idx);
            (
                instance.profile_from_indices(&digits),
                instance.prob_of_indices(&digits),
            )
        })
        .collect())
}

pub fn profile_probability(instance: &Instance, profile: &TypeProfile) -> Result<f64> {
    let digits = instance.indices_of(profile)?;
    Ok(instance.prob_of_indices(&digits))
}
