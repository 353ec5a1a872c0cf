//! Benchmarks for the mechanisms: first-best gains from trade, the duality
//! upper bound, and the exact second-best optimum over IR, BIC and strongly
//! budget-balanced mechanisms as a linear program.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::{solve_lp, LpProblem, LpStatus, Sense, VarBound};
use crate::market::{Agent, Instance, Pair, ProfileSpace, TypeProfile};
use crate::matching::{max_weight_matching, Matching, WeightedBipartiteGraph, DEFAULT_FAMILY_CAP};
use crate::mechanism::{Label, LotteryEntry, MechanismTable, ProfileRow, VirtualTables};

/// Default cap on second-best LP variables (before free-variable splitting).
pub const DEFAULT_LP_VAR_CAP: usize = 20_000;

/// Expected value over profiles of the best feasible matching under `weight`.
fn expected_best_matching(
    instance: &Instance,
    weight: impl Fn(&[usize], usize, usize) -> f64 + Sync,
) -> Result<f64> {
    let space = instance.profile_space()?;
    let n = instance.n();
    let values: Vec<f64> = (0..space.len())
        .into_par_iter()
        .map(|idx| {
            let digits = space.digits(idx);
            let graph = WeightedBipartiteGraph::from_fn(n, instance.m(), instance.feasibility(), |i, j| {
                weight(&digits, i, j)
            })?;
            Ok(instance.prob_of_indices(&digits) * max_weight_matching(&graph)?.weight)
        })
        .collect::<Result<_>>()?;
    Ok(values.iter().sum())
}

/// Full-efficiency gains from trade: best feasible matching under `b_i - s_j`
/// at every profile.
pub fn first_best(instance: &Instance) -> Result<f64> {
    let n = instance.n();
    expected_best_matching(instance, |d, i, j| {
        instance.buyer(i).value(d[i]) - instance.seller(j).value(d[n + j])
    })
}

/// Upper bound on the second-best optimum: expected best feasible matching
/// under `(b_i + alpha phi~_i(b_i)) - (s_j + alpha tau~_j(s_j))`.
pub fn duality_benchmark(instance: &Instance, alpha: f64) -> Result<f64> {
    if alpha.is_nan() || alpha < 0.0 || alpha.is_infinite() {
        return Err(Error::NegativeAlpha(alpha));
    }
    let tables = VirtualTables::new(instance);
    let n = instance.n();
    expected_best_matching(instance, |d, i, j| {
        let buyer = &tables.buyers[i];
        let seller = &tables.sellers[j];
        (buyer.support[d[i]] + alpha * buyer.ironed[d[i]])
            - (seller.support[d[n + j]] + alpha * seller.ironed[d[n + j]])
    })
}

/// The second-best LP with the bookkeeping needed to read a mechanism back.
#[derive(Clone, Debug)]
pub struct SecondBestLp {
    pub problem: LpProblem,
    pub members: Vec<Vec<Pair>>,
    /// `lottery_vars[t][k]` is the weight of `members[k]` at profile `t`.
    pub lottery_vars: Vec<Vec<usize>>,
    pub buyer_payment_vars: Vec<Vec<usize>>,
    pub seller_payment_vars: Vec<Vec<usize>>,
}

pub fn build_second_best_lp(instance: &Instance) -> Result<SecondBestLp> {
    build_second_best_lp_capped(instance, DEFAULT_LP_VAR_CAP)
}

pub fn build_second_best_lp_capped(instance: &Instance, cap: usize) -> Result<SecondBestLp> {
    let space = instance.profile_space()?;
    let members = instance
        .feasibility()
        .members(instance.n(), instance.m(), DEFAULT_FAMILY_CAP)?;
    let (n, m) = (instance.n(), instance.m());
    let vars = space.len() * (members.len() + n + m);
    if vars > cap {
        return Err(Error::LpTooLarge { vars, cap });
    }

    let mut lp = LpProblem::new();
    let mut lottery_vars = Vec::with_capacity(space.len());
    let mut buyer_payment_vars = Vec::with_capacity(space.len());
    let mut seller_payment_vars = Vec::with_capacity(space.len());
    for idx in 0..space.len() {
        let digits = space.digits(idx);
        let profile = instance.profile_from_indices(&digits);
        let prob = instance.prob_of_indices(&digits);
        let zs: Vec<usize> = members
            .iter()
            .map(|set| lp.add_var(VarBound::NonNegative, prob * gains(&profile, set)))
            .collect();
        lp.add_row(zs.iter().map(|&z| (z, 1.0)).collect(), Sense::Eq, 1.0);
        lottery_vars.push(zs);
        buyer_payment_vars.push((0..n).map(|_| lp.add_var(VarBound::Free, 0.0)).collect::<Vec<_>>());
        seller_payment_vars.push((0..m).map(|_| lp.add_var(VarBound::Free, 0.0)).collect::<Vec<_>>());
    }
    // strong budget balance at every profile
    for idx in 0..space.len() {
        let mut coeffs: Vec<(usize, f64)> = buyer_payment_vars[idx].iter().map(|&v| (v, 1.0)).collect();
        coeffs.extend(seller_payment_vars[idx].iter().map(|&v| (v, -1.0)));
        lp.add_row(coeffs, Sense::Eq, 0.0);
    }

    let lottery = |idx: usize| lottery_vars[idx].as_slice();
    let bic = BicRows {
        instance,
        space: &space,
        members: &members,
    };
    for agent in instance.agents() {
        let payments = |idx: usize| match agent {
            Agent::Buyer(i) => buyer_payment_vars[idx][i],
            Agent::Seller(j) => seller_payment_vars[idx][j],
        };
        bic.add(&mut lp, agent, &|idx, member| lottery(idx)[member], &payments);
    }

    Ok(SecondBestLp {
        problem: lp,
        members,
        lottery_vars,
        buyer_payment_vars,
        seller_payment_vars,
    })
}

fn gains(profile: &TypeProfile, set: &[Pair]) -> f64 {
    set.iter().map(|&(i, j)| profile.b[i] - profile.s[j]).sum()
}

fn involves(set: &[Pair], agent: Agent) -> bool {
    match agent {
        Agent::Buyer(i) => set.iter().any(|&(b, _)| b == i),
        Agent::Seller(j) => set.iter().any(|&(_, s)| s == j),
    }
}

/// Interim incentive rows, with misreport "absent" encoding participation.
struct BicRows<'a> {
    instance: &'a Instance,
    space: &'a ProfileSpace,
    members: &'a [Vec<Pair>],
}

impl BicRows<'_> {
    /// Adds, for every true type and every misreport (including absence), the
    /// row `E[u(truth)] - E[u(misreport)] >= 0` over the others' types.
    /// Allocation enters through lottery variables (`lottery(idx, k)`).
    fn add(
        &self,
        lp: &mut LpProblem,
        agent: Agent,
        lottery: &dyn Fn(usize, usize) -> usize,
        payment: &dyn Fn(usize) -> usize,
    ) {
        let dist = self.instance.distribution(agent);
        let sign = match agent {
            Agent::Buyer(_) => 1.0,
            Agent::Seller(_) => -1.0,
        };
        let trading: Vec<usize> = (0..self.members.len())
            .filter(|&k| involves(&self.members[k], agent))
            .collect();
        for truth in 0..dist.len() {
            let value = dist.value(truth);
            let f = dist.prob(truth);
            for report in (0..dist.len()).map(Some).chain(std::iter::once(None)) {
                if report == Some(truth) {
                    continue;
                }
                let mut coeffs = Vec::new();
                for idx in 0..self.space.len() {
                    if self.space.digit(idx, agent) != truth {
                        continue;
                    }
                    let others = self.instance.prob_of_indices(&self.space.digits(idx)) / f;
                    // buyer utility v x - p, seller utility p - v x
                    for &k in &trading {
                        coeffs.push((lottery(idx, k), sign * others * value));
                    }
                    coeffs.push((payment(idx), -sign * others));
                    if let Some(r) = report {
                        let alt = self.space.with_digit(idx, agent, r);
                        for &k in &trading {
                            coeffs.push((lottery(alt, k), -sign * others * value));
                        }
                        coeffs.push((payment(alt), sign * others));
                    }
                }
                lp.add_row(coeffs, Sense::Ge, 0.0);
            }
        }
    }
}

/// Second-best optimum value.
pub fn opt_lp(instance: &Instance) -> Result<f64> {
    Ok(solve_second_best(instance)?.0)
}

/// Solves the second-best LP and returns its value and the optimal mechanism
/// (lotteries over family members with the LP payments).
pub fn solve_second_best(instance: &Instance) -> Result<(f64, MechanismTable)> {
    let built = build_second_best_lp(instance)?;
    let sol = solve_lp(&built.problem)?;
    if sol.status != LpStatus::Optimal {
        return Err(Error::LpNotOptimal(sol.status.as_str()));
    }
    let space = instance.profile_space()?;
    let mut profiles = Vec::with_capacity(space.len());
    for idx in 0..space.len() {
        let digits = space.digits(idx);
        let profile = instance.profile_from_indices(&digits);
        let weights: Vec<f64> = built.lottery_vars[idx]
            .iter()
            .map(|&v| sol.values[v].max(0.0))
            .collect();
        let total: f64 = weights.iter().sum();
        let entries: Vec<LotteryEntry> = built
            .members
            .iter()
            .zip(&weights)
            .filter(|(_, &w)| w > 1e-12)
            .map(|(set, &w)| LotteryEntry {
                matching: set.clone(),
                prob: w / total,
            })
            .collect();
        let matching = entries
            .iter()
            .max_by(|a, b| a.prob.total_cmp(&b.prob))
            .map(|e| e.matching.clone())
            .unwrap_or_default();
        profiles.push(ProfileRow {
            b: profile.b,
            s: profile.s,
            prob: instance.prob_of_indices(&digits),
            matching,
            lottery: Some(entries),
            p_b: built.buyer_payment_vars[idx].iter().map(|&v| sol.values[v]).collect(),
            p_s: built.seller_payment_vars[idx].iter().map(|&v| sol.values[v]).collect(),
        });
    }
    Ok((
        sol.objective,
        MechanismTable {
            label: Label::Custom,
            instance: instance.clone(),
            profiles,
        },
    ))
}

/// Result of the budget-feasibility test for a fixed allocation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SbbCheck {
    pub implementable: bool,
    /// Interim allocations monotone (buyers non-decreasing, sellers non-increasing).
    pub monotone: bool,
    /// `E[sum_i x_i phi_i(b_i) - sum_j x_j tau_j(s_j)]` with raw virtual values.
    pub virtual_surplus: f64,
}

/// Allocation at every profile index.
fn allocation_table(
    instance: &Instance,
    allocate: impl Fn(&TypeProfile) -> Result<Matching>,
) -> Result<Vec<Vec<Pair>>> {
    let space = instance.profile_space()?;
    (0..space.len())
        .map(|idx| {
            let mut pairs = allocate(&instance.profile_from_indices(&space.digits(idx)))?.pairs;
            pairs.sort_unstable();
            if !instance.feasibility().contains(&pairs) {
                return Err(Error::InvalidArgument(format!(
                    "allocation {pairs:?} is not in the feasibility family"
                )));
            }
            Ok(pairs)
        })
        .collect()
}

/// Interim trade probability of `agent` at each of its types.
fn interim_allocation(
    instance: &Instance,
    space: &ProfileSpace,
    allocations: &[Vec<Pair>],
    agent: Agent,
) -> Vec<f64> {
    let dist = instance.distribution(agent);
    let mut x = vec![0.0; dist.len()];
    for (idx, set) in allocations.iter().enumerate() {
        if involves(set, agent) {
            let k = space.digit(idx, agent);
            x[k] += instance.prob_of_indices(&space.digits(idx)) / dist.prob(k);
        }
    }
    x
}

/// Discrete analog of the characterization of allocations that admit IR, BIC
/// and strongly budget-balanced payments: interim monotonicity plus a
/// non-negative expected raw virtual surplus.
pub fn check_sbb_implementable(
    instance: &Instance,
    allocate: impl Fn(&TypeProfile) -> Result<Matching>,
) -> Result<SbbCheck> {
    let allocations = allocation_table(instance, allocate)?;
    let space = instance.profile_space()?;
    let tables = VirtualTables::new(instance);
    let mut monotone = true;
    for agent in instance.agents() {
        let x = interim_allocation(instance, &space, &allocations, agent);
        let ok = match agent {
            Agent::Buyer(_) => x.windows(2).all(|w| w[0] <= w[1] + 1e-12),
            Agent::Seller(_) => x.windows(2).all(|w| w[0] + 1e-12 >= w[1]),
        };
        monotone &= ok;
    }
    let n = instance.n();
    let virtual_surplus: f64 = allocations
        .iter()
        .enumerate()
        .map(|(idx, set)| {
            let d = space.digits(idx);
            let prob = instance.prob_of_indices(&d);
            prob * set
                .iter()
                .map(|&(i, j)| tables.buyers[i].raw[d[i]] - tables.sellers[j].raw[d[n + j]])
                .sum::<f64>()
        })
        .sum();
    Ok(SbbCheck {
        implementable: monotone && virtual_surplus >= -1e-9,
        monotone,
        virtual_surplus,
    })
}

/// Decides by LP whether the allocation admits payments that are IR, BIC and
/// strongly budget balanced.
pub fn sbb_payments_exist(
    instance: &Instance,
    allocate: impl Fn(&TypeProfile) -> Result<Matching>,
) -> Result<bool> {
    let allocations = allocation_table(instance, allocate)?;
    let space = instance.profile_space()?;
    let (n, m) = (instance.n(), instance.m());
    let mut lp = LpProblem::new();
    // one fixed "lottery" column per profile pinned to 1 carries the allocation
    let fixed: Vec<usize> = (0..space.len())
        .map(|_| lp.add_var(VarBound::NonNegative, 0.0))
        .collect();
    for &v in &fixed {
        lp.add_row(vec![(v, 1.0)], Sense::Eq, 1.0);
    }
    let pb: Vec<Vec<usize>> = (0..space.len())
        .map(|_| (0..n).map(|_| lp.add_var(VarBound::Free, 0.0)).collect())
        .collect();
    let ps: Vec<Vec<usize>> = (0..space.len())
        .map(|_| (0..m).map(|_| lp.add_var(VarBound::Free, 0.0)).collect())
        .collect();
    for idx in 0..space.len() {
        let mut coeffs: Vec<(usize, f64)> = pb[idx].iter().map(|&v| (v, 1.0)).collect();
        coeffs.extend(ps[idx].iter().map(|&v| (v, -1.0)));
        lp.add_row(coeffs, Sense::Eq, 0.0);
    }
    // members[k] = allocation at profile k; lottery(idx, k) is only queried
    // for the member realized at idx
    let members = allocations.clone();
    let bic = BicRows {
        instance,
        space: &space,
        members: &members,
    };
    for agent in instance.agents() {
        let payment = |idx: usize| match agent {
            Agent::Buyer(i) => pb[idx][i],
            Agent::Seller(j) => ps[idx][j],
        };
        bic.add_fixed(&mut lp, agent, &fixed, &payment);
    }
    let sol = solve_lp(&lp)?;
    Ok(sol.status == LpStatus::Optimal)
}

impl BicRows<'_> {
    /// Incentive rows for a deterministic allocation where `members[idx]` is
    /// the matching at profile `idx`, carried by the pinned column `fixed[idx]`.
    fn add_fixed(
        &self,
        lp: &mut LpProblem,
        agent: Agent,
        fixed: &[usize],
        payment: &dyn Fn(usize) -> usize,
    ) {
        let dist = self.instance.distribution(agent);
        let sign = match agent {
            Agent::Buyer(_) => 1.0,
            Agent::Seller(_) => -1.0,
        };
        for truth in 0..dist.len() {
            let value = dist.value(truth);
            let f = dist.prob(truth);
            for report in (0..dist.len()).map(Some).chain(std::iter::once(None)) {
                if report == Some(truth) {
                    continue;
                }
                let mut coeffs = Vec::new();
                for idx in 0..self.space.len() {
                    if self.space.digit(idx, agent) != truth {
                        continue;
                    }
                    let others = self.instance.prob_of_indices(&self.space.digits(idx)) / f;
                    if involves(&self.members[idx], agent) {
                        coeffs.push((fixed[idx], sign * others * value));
                    }
                    coeffs.push((payment(idx), -sign * others));
                    if let Some(r) = report {
                        let alt = self.space.with_digit(idx, agent, r);
                        if involves(&self.members[alt], agent) {
                            coeffs.push((fixed[alt], -sign * others * value));
                        }
                        coeffs.push((payment(alt), sign * others));
                    }
                }
                lp.add_row(coeffs, Sense::Ge, 0.0);
            }
        }
    }
}
