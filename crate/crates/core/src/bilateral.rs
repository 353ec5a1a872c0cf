//! Posted-price mechanisms for one buyer and one seller.
//!
//! In the seller-offering mechanism (SOM) the seller posts the take-it-or-leave-it
//! price that maximizes her expected utility against the buyer's distribution;
//! in the buyer-offering mechanism (BOM) the buyer does the same against the
//! seller's. Optimal prices are read off the ironed virtual values, which fixes
//! how utility ties between candidate prices are broken.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::market::{DiscreteDistribution, Instance};
use crate::matching::WEIGHT_EPS;
use crate::virtuals::{buyer_virtual_values, seller_virtual_values, VirtualValueTable};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PostedPrice {
    Price(f64),
    NoTrade,
}

impl fmt::Display for PostedPrice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PostedPrice::Price(p) => write!(f, "{p}"),
            PostedPrice::NoTrade => write!(f, "∞"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PostedPriceOutcome {
    pub price: PostedPrice,
    /// Index of the price in the counterparty's support.
    pub price_index: Option<usize>,
    /// Whether trade happens, per counterparty support point.
    pub trades: Vec<bool>,
    /// Expected utility of the agent posting the price.
    pub utility: f64,
}

impl PostedPriceOutcome {
    pub fn price_value(&self) -> Option<f64> {
        match self.price {
            PostedPrice::Price(p) => Some(p),
            PostedPrice::NoTrade => None,
        }
    }
}

fn non_negative(v: f64, what: &str) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{what} must be a non-negative value, got {v}")))
    }
}

/// Seller utility from posting `support[k]` to a buyer drawn from `dist`.
pub fn seller_posting_utility(s: f64, dist: &DiscreteDistribution, k: usize) -> f64 {
    (dist.value(k) - s) * dist.tail(k)
}

/// Buyer utility from posting `support[k]` to a seller drawn from `dist`.
pub fn buyer_posting_utility(b: f64, dist: &DiscreteDistribution, k: usize) -> f64 {
    (b - dist.value(k)) * dist.cdf(k)
}

pub fn som_price(s: f64, buyer: &DiscreteDistribution) -> Result<PostedPriceOutcome> {
    som_price_with(s, buyer, &buyer_virtual_values(buyer))
}

/// SOM price using a precomputed buyer table: the smallest support point whose
/// ironed virtual value exceeds `s`.
pub fn som_price_with(
    s: f64,
    buyer: &DiscreteDistribution,
    table: &VirtualValueTable,
) -> Result<PostedPriceOutcome> {
    non_negative(s, "seller value")?;
    let k_star = table.ironed.iter().position(|&phi| phi - s > WEIGHT_EPS);
    let outcome = match k_star {
        None => PostedPriceOutcome {
            price: PostedPrice::NoTrade,
            price_index: None,
            trades: vec![false; buyer.len()],
            utility: 0.0,
        },
        Some(k) => PostedPriceOutcome {
            price: PostedPrice::Price(buyer.value(k)),
            price_index: Some(k),
            trades: (0..buyer.len()).map(|r| r >= k).collect(),
            utility: seller_posting_utility(s, buyer, k),
        },
    };
    debug_assert!((0..buyer.len())
        .all(|k| seller_posting_utility(s, buyer, k) <= outcome.utility + 1e-7));
    Ok(outcome)
}

pub fn bom_price(b: f64, seller: &DiscreteDistribution) -> Result<PostedPriceOutcome> {
    bom_price_with(b, seller, &seller_virtual_values(seller))
}

/// BOM price using a precomputed seller table: the largest support point whose
/// ironed virtual value is below `b`.
pub fn bom_price_with(
    b: f64,
    seller: &DiscreteDistribution,
    table: &VirtualValueTable,
) -> Result<PostedPriceOutcome> {
    non_negative(b, "buyer value")?;
    let k_dagger = table.ironed.iter().rposition(|&tau| b - tau > WEIGHT_EPS);
    let outcome = match k_dagger {
        None => PostedPriceOutcome {
            price: PostedPrice::NoTrade,
            price_index: None,
            trades: vec![false; seller.len()],
            utility: 0.0,
        },
        Some(k) => PostedPriceOutcome {
            price: PostedPrice::Price(seller.value(k)),
            price_index: Some(k),
            trades: (0..seller.len()).map(|r| r <= k).collect(),
            utility: buyer_posting_utility(b, seller, k),
        },
    };
    debug_assert!((0..seller.len())
        .all(|k| buyer_posting_utility(b, seller, k) <= outcome.utility + 1e-7));
    Ok(outcome)
}

fn require_bilateral(instance: &Instance) -> Result<(&DiscreteDistribution, &DiscreteDistribution)> {
    if !instance.is_bilateral() {
        return Err(Error::NotBilateral {
            n: instance.n(),
            m: instance.m(),
        });
    }
    Ok((instance.buyer(0), instance.seller(0)))
}

/// `E[(b - s) * 1[phi~(b) > s]]`.
pub fn gft_som(instance: &Instance) -> Result<f64> {
    let (buyer, seller) = require_bilateral(instance)?;
    let phi = buyer_virtual_values(buyer);
    Ok(expect_pairs(buyer, seller, |kb, ks| {
        phi.ironed[kb] - seller.value(ks) > WEIGHT_EPS
    }))
}

/// `E[(b - s) * 1[b > tau~(s)]]`.
pub fn gft_bom(instance: &Instance) -> Result<f64> {
    let (buyer, seller) = require_bilateral(instance)?;
    let tau = seller_virtual_values(seller);
    Ok(expect_pairs(buyer, seller, |kb, ks| {
        buyer.value(kb) - tau.ironed[ks] > WEIGHT_EPS
    }))
}

fn expect_pairs(
    buyer: &DiscreteDistribution,
    seller: &DiscreteDistribution,
    trades: impl Fn(usize, usize) -> bool,
) -> f64 {
    let mut total = 0.0;
    for ks in 0..seller.len() {
        for kb in 0..buyer.len() {
            if trades(kb, ks) {
                total += buyer.prob(kb) * seller.prob(ks) * (buyer.value(kb) - seller.value(ks));
            }
        }
    }
    total
}

/// SOM gains from trade by running the posted-price game for each seller type.
pub fn gft_som_simulated(instance: &Instance) -> Result<f64> {
    let (buyer, seller) = require_bilateral(instance)?;
    let phi = buyer_virtual_values(buyer);
    let mut total = 0.0;
    for ks in 0..seller.len() {
        let s = seller.value(ks);
        let offer = som_price_with(s, buyer, &phi)?;
        for kb in 0..buyer.len() {
            if offer.trades[kb] {
                total += seller.prob(ks) * buyer.prob(kb) * (buyer.value(kb) - s);
            }
        }
    }
    Ok(total)
}

/// BOM gains from trade by running the posted-price game for each buyer type.
pub fn gft_bom_simulated(instance: &Instance) -> Result<f64> {
    let (buyer, seller) = require_bilateral(instance)?;
    let tau = seller_virtual_values(seller);
    let mut total = 0.0;
    for kb in 0..buyer.len() {
        let b = buyer.value(kb);
        let offer = bom_price_with(b, seller, &tau)?;
        for ks in 0..seller.len() {
            if offer.trades[ks] {
                total += seller.prob(ks) * buyer.prob(kb) * (b - seller.value(ks));
            }
        }
    }
    Ok(total)
}

/// Trade indicator of SOM at support indices `(kb, ks)`.
pub fn som_trades(instance: &Instance) -> Result<Vec<Vec<bool>>> {
    let (buyer, seller) = require_bilateral(instance)?;
    let phi = buyer_virtual_values(buyer);
    (0..seller.len())
        .map(|ks| Ok(som_price_with(seller.value(ks), buyer, &phi)?.trades))
        .collect::<Result<Vec<_>>>()
        .map(transpose)
}

/// Trade indicator of BOM at support indices `(kb, ks)`.
pub fn bom_trades(instance: &Instance) -> Result<Vec<Vec<bool>>> {
    let (buyer, seller) = require_bilateral(instance)?;
    let tau = seller_virtual_values(seller);
    (0..buyer.len())
        .map(|kb| Ok(bom_price_with(buyer.value(kb), seller, &tau)?.trades))
        .collect()
}

fn transpose(rows: Vec<Vec<bool>>) -> Vec<Vec<bool>> {
    let inner = rows.first().map_or(0, Vec::len);
    (0..inner)
        .map(|c| rows.iter().map(|r| r[c]).collect())
        .collect()
}
