//! Bertrand competition over monotone wage menus: allocations, profits,
//! blocking constructions, exhaustive oracles and equilibrium checks.

pub mod blocking;
pub mod choice;
pub mod equilibrium;
pub mod error;
pub mod experiment;
pub mod fixtures;
pub mod index_set;
pub mod market;
pub mod oracle;
pub mod payoff;
pub mod sample;
pub mod scalar;
pub mod scenario;

pub use blocking::{
    classify_non_bertrand, construct_block, find_block, find_block_in_case, verify_block, BlockConfig, BlockError,
    BlockProposal, BlockVerdict, CaseHit, CaseLabel, Condition,
};
pub use choice::{induce_allocation, TiePolicy};
pub use equilibrium::{
    best_response, best_response_dynamics, block_to_deviation, verify_equilibrium, BestResponse, BestResponseParams,
    Deviation, DeviationError, DynamicsTrace, EquilibriumReport, FirmReport, WageSource,
};
pub use error::ModelError;
pub use experiment::{run_experiment, ConfigError, ExperimentConfig, ExperimentReport, ExperimentSummary, TrialRow};
pub use index_set::{IndexSet, Interval};
pub use market::{
    validate_allocation, Allocation, Firm, FirmAllocation, MarketPopulation, Offer, OfferMenu, OfferProfile, Position,
    Violation,
};
pub use oracle::{
    enumerate_proposals, oracle_best_response, oracle_find_block, oracle_is_core, OracleError, SearchLattice,
};
pub use payoff::{firm_profit, is_bertrand, total_profit, BertrandCertificate, BertrandFailure, ProfitReport};
pub use scalar::{Exact, NumericMode, Scalar};
pub use scenario::{parse_scenario, AnyScenario, Scenario, ScenarioError};
