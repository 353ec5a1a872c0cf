//! Budget-balanced mechanisms for gains-from-trade maximization in discrete
//! double auctions.
//!
//! The crate builds the seller-offering and buyer-offering matching mechanisms
//! (GSOM/GBOM) with threshold payments, evaluates them exactly over the full
//! type-profile space, compares them with the first-best, a duality bound and
//! the LP second-best optimum, turns ex-ante weakly budget-balanced tables into
//! strongly budget-balanced ones, and certifies incentive and budget properties
//! by brute force.

pub mod audit;
pub mod bilateral;
pub mod cli;
pub mod error;
pub mod lp;
pub mod market;
pub mod matching;
pub mod mechanism;
pub mod second_best;
pub mod transforms;
pub mod virtuals;

pub use error::{Error, Result};
pub use market::{
    enumerate_profiles, profile_probability, validate_instance, Agent, DiscreteDistribution,
    FeasibilityFamily, Instance, Pair, TypeProfile,
};
pub use matching::{max_weight_matching, Matching, WeightedBipartiteGraph};
pub use mechanism::{build_mechanism, MechanismKind, MechanismTable};
pub use virtuals::{buyer_virtual_values, seller_virtual_values, VirtualValueTable};
