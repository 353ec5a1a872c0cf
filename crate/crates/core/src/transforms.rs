//! Payment transformations that tighten budget balance without touching the
//! allocation.
//!
//! The rebate step spreads the expected surplus evenly across sellers, turning
//! ex-ante weak balance into ex-ante strong balance. The reshaping step then
//! rewrites payments as a product of interim payments so that the budget
//! balances at every profile while every agent's interim payment — and hence
//! every interim incentive constraint — is preserved.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::market::{Agent, Instance};
use crate::mechanism::{exante_surplus, MechanismTable};

const BUDGET_GATE: f64 = 1e-9;
const NEGATIVE_GATE: f64 = -1e-12;
/// Interim expectations at or below this count as zero.
const ZERO_EXPECTATION: f64 = 1e-12;

/// Interim payments per agent and type, with their ex-ante expectations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InterimPaymentView {
    /// `buyers[i][k]`: expected payment of buyer `i` reporting its `k`-th type.
    pub buyers: Vec<Vec<f64>>,
    /// `sellers[j][k]`: expected gain of seller `j` reporting its `k`-th type.
    pub sellers: Vec<Vec<f64>>,
    pub buyer_totals: Vec<f64>,
    pub seller_totals: Vec<f64>,
}

impl InterimPaymentView {
    pub fn interim(&self, agent: Agent) -> &[f64] {
        match agent {
            Agent::Buyer(i) => &self.buyers[i],
            Agent::Seller(j) => &self.sellers[j],
        }
    }

    pub fn total(&self, agent: Agent) -> f64 {
        match agent {
            Agent::Buyer(i) => self.buyer_totals[i],
            Agent::Seller(j) => self.seller_totals[j],
        }
    }
}

pub fn interim_payments(table: &MechanismTable) -> Result<InterimPaymentView> {
    let inst = &table.instance;
    let space = table.space()?;
    let per_agent = |agent: Agent| {
        let dist = inst.distribution(agent);
        let mut interim = vec![0.0; dist.len()];
        for (idx, row) in table.profiles.iter().enumerate() {
            interim[space.digit(idx, agent)] += row.prob * row.payment(agent);
        }
        for (k, p) in interim.iter_mut().enumerate() {
            *p /= dist.prob(k);
        }
        let total: f64 = (0..dist.len()).map(|k| dist.prob(k) * interim[k]).sum();
        (interim, total)
    };
    let (buyers, buyer_totals) = (0..inst.n()).map(|i| per_agent(Agent::Buyer(i))).unzip();
    let (sellers, seller_totals) = (0..inst.m()).map(|j| per_agent(Agent::Seller(j))).unzip();
    Ok(InterimPaymentView {
        buyers,
        sellers,
        buyer_totals,
        seller_totals,
    })
}

fn check_non_negative(table: &MechanismTable) -> Result<()> {
    for (idx, row) in table.profiles.iter().enumerate() {
        for agent in table.instance.agents() {
            let value = row.payment(agent);
            if value < NEGATIVE_GATE {
                return Err(Error::NegativePayment {
                    agent: agent.to_string(),
                    profile: idx,
                    value,
                });
            }
        }
    }
    Ok(())
}

/// Hands the expected budget surplus back to the sellers in equal shares at
/// every profile.
pub fn exante_wbb_to_exante_sbb(table: &MechanismTable) -> Result<MechanismTable> {
    let surplus = exante_surplus(table);
    if surplus < -BUDGET_GATE {
        return Err(Error::NotExAnteWbb { surplus });
    }
    check_non_negative(table)?;
    let mut out = table.clone();
    let rebate = surplus / table.instance.m() as f64;
    if rebate != 0.0 {
        for row in &mut out.profiles {
            row.p_s.iter_mut().for_each(|p| *p += rebate);
        }
    }
    Ok(out)
}

/// Rewrites payments in product form so that the budget balances at every
/// profile and interim payments stay the same.
pub fn exante_sbb_to_sbb(table: &MechanismTable) -> Result<MechanismTable> {
    let surplus = exante_surplus(table);
    if surplus.abs() > BUDGET_GATE {
        return Err(Error::NotExAnteSbb { surplus });
    }
    check_non_negative(table)?;
    let inst: &Instance = &table.instance;
    let view = interim_payments(table)?;
    let space = table.space()?;
    let active: Vec<Agent> = inst
        .agents()
        .filter(|&a| view.total(a) > ZERO_EXPECTATION)
        .collect();
    let denominator: f64 = active.iter().map(|&a| view.total(a)).product();

    let mut out = table.clone();
    for (idx, row) in out.profiles.iter_mut().enumerate() {
        let numerator: f64 = active
            .iter()
            .map(|&a| view.interim(a)[space.digit(idx, a)])
            .product();
        let scale = if active.is_empty() { 0.0 } else { numerator / denominator };
        for agent in inst.agents() {
            *row.payment_mut(agent) = if active.contains(&agent) {
                scale * view.total(agent)
            } else {
                0.0
            };
        }
    }
    Ok(out)
}

/// Ex-ante weakly balanced, IR and BIC mechanism with non-negative payments
/// to an IR, BIC and strongly balanced one with the same allocation.
pub fn wbb_to_sbb_pipeline(table: &MechanismTable) -> Result<MechanismTable> {
    exante_sbb_to_sbb(&exante_wbb_to_exante_sbb(table)?)
}
