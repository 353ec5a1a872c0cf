//! Exhaustive certification of mechanism properties from a table.
//!
//! Every check scans the whole profile grid. Misreports include abstaining,
//! which yields zero utility, so participation constraints are checked as one
//! more incentive constraint.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::market::Agent;
use crate::mechanism::{exante_surplus, MechanismTable};

pub const DEFAULT_TOL_IC: f64 = 1e-7;
pub const DEFAULT_TOL_BB: f64 = 1e-9;

/// A deviation: report another type, or stay out.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Misreport {
    Type(f64),
    Abstain,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub agent: Option<Agent>,
    pub true_type: Option<f64>,
    pub misreport: Option<Misreport>,
    /// Row index in the table.
    pub profile: Option<usize>,
}

impl Witness {
    fn budget(profile: Option<usize>) -> Self {
        Self {
            agent: None,
            true_type: None,
            misreport: None,
            profile,
        }
    }
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if let Some(a) = self.agent {
            parts.push(a.to_string());
        }
        if let Some(t) = self.true_type {
            parts.push(format!("type {t}"));
        }
        match self.misreport {
            Some(Misreport::Type(r)) => parts.push(format!("reports {r}")),
            Some(Misreport::Abstain) => parts.push("abstains".into()),
            None => {}
        }
        if let Some(p) = self.profile {
            parts.push(format!("profile #{p}"));
        }
        write!(f, "{}", parts.join(", "))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropertyCheck {
    pub pass: bool,
    /// Largest violation found (zero if none).
    pub worst_violation: f64,
    pub tolerance: f64,
    pub witness: Option<Witness>,
}

/// Running maximum of violations; the first argmax wins ties.
struct Worst {
    value: f64,
    witness: Option<Witness>,
}

impl Worst {
    fn new() -> Self {
        Self {
            value: 0.0,
            witness: None,
        }
    }

    fn offer(&mut self, value: f64, witness: impl FnOnce() -> Witness) {
        if value > self.value {
            self.value = value;
            self.witness = Some(witness());
        }
    }

    fn merge(mut self, other: Worst) -> Worst {
        if other.value > self.value {
            self = other;
        }
        self
    }

    fn finish(self, tolerance: f64) -> PropertyCheck {
        let pass = self.value <= tolerance;
        PropertyCheck {
            pass,
            worst_violation: self.value,
            tolerance,
            witness: if pass { None } else { self.witness },
        }
    }
}

/// Interim utility of `agent` with true type `truth` when reporting type `report`.
fn interim_utility(table: &MechanismTable, agent: Agent, truth: usize, report: usize) -> f64 {
    let inst = &table.instance;
    let dist = inst.distribution(agent);
    let space = table.space().expect("validated table");
    let value = dist.value(truth);
    let total: f64 = table
        .profiles
        .iter()
        .enumerate()
        .filter(|(idx, _)| space.digit(*idx, agent) == report)
        .map(|(_, row)| row.prob * row.utility(agent, value))
        .sum();
    total / dist.prob(report)
}

fn interim_check(table: &MechanismTable, tol: f64, with_type_misreports: bool) -> PropertyCheck {
    let agents: Vec<Agent> = table.instance.agents().collect();
    agents
        .par_iter()
        .map(|&agent| {
            let dist = table.instance.distribution(agent);
            let mut worst = Worst::new();
            for truth in 0..dist.len() {
                let honest = interim_utility(table, agent, truth, truth);
                let witness = |misreport| Witness {
                    agent: Some(agent),
                    true_type: Some(dist.value(truth)),
                    misreport: Some(misreport),
                    profile: None,
                };
                worst.offer(-honest, || witness(Misreport::Abstain));
                if with_type_misreports {
                    for report in (0..dist.len()).filter(|&r| r != truth) {
                        let gain = interim_utility(table, agent, truth, report) - honest;
                        worst.offer(gain, || witness(Misreport::Type(dist.value(report))));
                    }
                }
            }
            worst
        })
        .reduce(Worst::new, Worst::merge)
        .finish(tol)
}

/// Interim BIC with abstention as a misreport (so interim IR is included).
pub fn check_interim_bic_ir(table: &MechanismTable, tol: f64) -> PropertyCheck {
    interim_check(table, tol, true)
}

/// Interim IR only.
pub fn check_interim_ir(table: &MechanismTable, tol: f64) -> PropertyCheck {
    interim_check(table, tol, false)
}

/// Ex-post incentive compatibility against every unilateral misreport,
/// including abstention (ex-post IR).
pub fn check_dsic(table: &MechanismTable, tol: f64) -> PropertyCheck {
    let inst = &table.instance;
    let space = table.space().expect("validated table");
    (0..table.profiles.len())
        .into_par_iter()
        .map(|idx| {
            let row = &table.profiles[idx];
            let mut worst = Worst::new();
            for agent in inst.agents() {
                let dist = inst.distribution(agent);
                let truth = space.digit(idx, agent);
                let value = dist.value(truth);
                let honest = row.utility(agent, value);
                let witness = |misreport| Witness {
                    agent: Some(agent),
                    true_type: Some(value),
                    misreport: Some(misreport),
                    profile: Some(idx),
                };
                worst.offer(-honest, || witness(Misreport::Abstain));
                for report in (0..dist.len()).filter(|&r| r != truth) {
                    let alt = &table.profiles[space.with_digit(idx, agent, report)];
                    let gain = alt.utility(agent, value) - honest;
                    worst.offer(gain, || witness(Misreport::Type(dist.value(report))));
                }
            }
            worst
        })
        .reduce(Worst::new, Worst::merge)
        .finish(tol)
}

/// Buyers' trade probability non-decreasing and sellers' non-increasing in
/// their own report, on every single-coordinate slice. The witness names the
/// lower type, the higher one as "misreport", and the lower-type profile.
pub fn check_monotone(table: &MechanismTable, tol: f64) -> PropertyCheck {
    let inst = &table.instance;
    let space = table.space().expect("validated table");
    let mut worst = Worst::new();
    for agent in inst.agents() {
        let dist = inst.distribution(agent);
        for idx in 0..table.profiles.len() {
            let k = space.digit(idx, agent);
            if k + 1 == dist.len() {
                continue;
            }
            let lo = table.profiles[idx].alloc(agent);
            let hi = table.profiles[space.with_digit(idx, agent, k + 1)].alloc(agent);
            let drop = match agent {
                Agent::Buyer(_) => lo - hi,
                Agent::Seller(_) => hi - lo,
            };
            worst.offer(drop, || Witness {
                agent: Some(agent),
                true_type: Some(dist.value(k)),
                misreport: Some(Misreport::Type(dist.value(k + 1))),
                profile: Some(idx),
            });
        }
    }
    worst.finish(tol)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BudgetVariant {
    Sbb,
    Wbb,
    ExAnteSbb,
    ExAnteWbb,
}

pub fn check_budget(table: &MechanismTable, variant: BudgetVariant, tol: f64) -> PropertyCheck {
    let mut worst = Worst::new();
    match variant {
        BudgetVariant::Sbb | BudgetVariant::Wbb => {
            for (idx, row) in table.profiles.iter().enumerate() {
                let surplus = row.surplus();
                let violation = if variant == BudgetVariant::Sbb {
                    surplus.abs()
                } else {
                    -surplus
                };
                worst.offer(violation, || Witness::budget(Some(idx)));
            }
        }
        BudgetVariant::ExAnteSbb | BudgetVariant::ExAnteWbb => {
            let surplus = exante_surplus(table);
            let violation = if variant == BudgetVariant::ExAnteSbb {
                surplus.abs()
            } else {
                -surplus
            };
            worst.offer(violation, || Witness::budget(None));
        }
    }
    worst.finish(tol)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub tol_ic: f64,
    pub tol_bb: f64,
    pub ir: PropertyCheck,
    pub bic: PropertyCheck,
    pub dsic: PropertyCheck,
    pub monotone: PropertyCheck,
    pub sbb: PropertyCheck,
    pub wbb: PropertyCheck,
    pub exante_sbb: PropertyCheck,
    pub exante_wbb: PropertyCheck,
}

impl AuditReport {
    pub fn entries(&self) -> [(&'static str, &PropertyCheck); 8] {
        [
            ("IR", &self.ir),
            ("BIC", &self.bic),
            ("DSIC", &self.dsic),
            ("monotone", &self.monotone),
            ("SBB", &self.sbb),
            ("WBB", &self.wbb),
            ("ex-ante SBB", &self.exante_sbb),
            ("ex-ante WBB", &self.exante_wbb),
        ]
    }

    /// What every threshold-payment matching mechanism must satisfy.
    pub fn mechanism_ok(&self) -> bool {
        self.ir.pass && self.dsic.pass && self.exante_wbb.pass
    }

    /// What every budget-balancing pipeline output must satisfy.
    pub fn pipeline_ok(&self) -> bool {
        self.ir.pass && self.bic.pass && self.sbb.pass
    }
}

impl fmt::Display for AuditReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<12} {:<5} {:>12}  witness", "property", "pass", "worst")?;
        for (name, check) in self.entries() {
            let witness = check.witness.as_ref().map(|w| w.to_string()).unwrap_or_default();
            writeln!(
                f,
                "{:<12} {:<5} {:>12.3e}  {}",
                name,
                if check.pass { "yes" } else { "NO" },
                check.worst_violation,
                witness
            )?;
        }
        Ok(())
    }
}

pub fn audit_all(table: &MechanismTable, tol_ic: f64, tol_bb: f64) -> AuditReport {
    AuditReport {
        tol_ic,
        tol_bb,
        ir: check_interim_ir(table, tol_ic),
        bic: check_interim_bic_ir(table, tol_ic),
        dsic: check_dsic(table, tol_ic),
        monotone: check_monotone(table, tol_bb),
        sbb: check_budget(table, BudgetVariant::Sbb, tol_bb),
        wbb: check_budget(table, BudgetVariant::Wbb, tol_bb),
        exante_sbb: check_budget(table, BudgetVariant::ExAnteSbb, tol_bb),
        exante_wbb: check_budget(table, BudgetVariant::ExAnteWbb, tol_bb),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::{DiscreteDistribution, Instance};
    use crate::mechanism::{build_from_allocation, build_mechanism, empty_mechanism, Label, MechanismKind};
    use crate::transforms::wbb_to_sbb_pipeline;

    fn uniform(v: &[f64]) -> DiscreteDistribution {
        DiscreteDistribution::uniform(v.to_vec()).unwrap()
    }

    fn instance_a() -> Instance {
        Instance::bilateral(uniform(&[1.0, 2.0]), DiscreteDistribution::point_mass(0.0).unwrap())
    }

    fn instance_b() -> Instance {
        Instance::bilateral(uniform(&[0.0, 1.0]), uniform(&[0.0, 1.0]))
    }

    #[test]
    fn gsom_instance_a() {
        let table = build_mechanism(&instance_a(), MechanismKind::Gsom).unwrap();
        let report = audit_all(&table, DEFAULT_TOL_IC, DEFAULT_TOL_BB);
        assert!(report.mechanism_ok() && report.bic.pass && report.monotone.pass);
        assert!(report.wbb.pass);
        assert!(!report.sbb.pass);
        assert_eq!(report.sbb.worst_violation, 2.0);
        // b = 2, s = 0 is row 1
        assert_eq!(report.sbb.witness.as_ref().unwrap().profile, Some(1));
        assert!(!report.exante_sbb.pass);
    }

    #[test]
    fn overcharge_breaks_ir() {
        let mut table = build_mechanism(&instance_b(), MechanismKind::Gsom).unwrap();
        let row = table
            .profiles
            .iter()
            .position(|r| !r.matching.is_empty())
            .unwrap();
        table.profiles[row].p_b[0] = table.profiles[row].b[0] + 1.0;
        let ir = check_interim_ir(&table, DEFAULT_TOL_IC);
        assert!(!ir.pass);
        let w = ir.witness.unwrap();
        assert_eq!(w.agent, Some(Agent::Buyer(0)));
        assert_eq!(w.misreport, Some(Misreport::Abstain));
        assert!(!check_dsic(&table, DEFAULT_TOL_IC).pass);
    }

    #[test]
    fn empty_table_passes_everything() {
        let table = empty_mechanism(&instance_b()).unwrap();
        let report = audit_all(&table, DEFAULT_TOL_IC, DEFAULT_TOL_BB);
        for (name, check) in report.entries() {
            assert!(check.pass, "{name}");
            assert_eq!(check.worst_violation, 0.0);
            assert!(check.witness.is_none());
        }
    }

    #[test]
    fn non_monotone_allocation_caught() {
        // trade only when the buyer is low
        let inst = instance_b();
        let table = build_from_allocation(&inst, Label::Custom, |d| {
            if d[0] == 0 { vec![(0, 0)] } else { vec![] }
        })
        .unwrap();
        let check = check_monotone(&table, DEFAULT_TOL_BB);
        assert!(!check.pass);
        assert_eq!(check.worst_violation, 1.0);
        assert_eq!(check.witness.unwrap().agent, Some(Agent::Buyer(0)));

        let constant = build_from_allocation(&inst, Label::Custom, |_| vec![(0, 0)]).unwrap();
        assert!(check_monotone(&constant, DEFAULT_TOL_BB).pass);
    }

    #[test]
    fn pipeline_output_is_sbb() {
        let table = build_mechanism(&instance_a(), MechanismKind::Gsom).unwrap();
        let sbb = wbb_to_sbb_pipeline(&table).unwrap();
        let report = audit_all(&sbb, DEFAULT_TOL_IC, DEFAULT_TOL_BB);
        assert!(report.pipeline_ok());
    }

    #[test]
    fn planted_violation_magnitude() {
        let mut table = empty_mechanism(&instance_b()).unwrap();
        let eps = 1e-4;
        table.profiles[2].p_b[0] = eps;
        let wbb = check_budget(&table, BudgetVariant::ExAnteSbb, DEFAULT_TOL_BB);
        assert!(!wbb.pass);
        assert!((wbb.worst_violation - eps * 0.25).abs() < 1e-15);
        let sbb = check_budget(&table, BudgetVariant::Sbb, DEFAULT_TOL_BB);
        assert_eq!(sbb.worst_violation, eps);
        assert_eq!(sbb.witness.unwrap().profile, Some(2));
    }
}
