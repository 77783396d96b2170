//! Finite-domain constraint propagation by chaotic iteration of reduction rules,
//! with proof-tree explanations for every withdrawn value.
//!
//! The pieces, bottom up:
//!
//! * [`model`]: CSP instances, domain families and a generate-and-test oracle.
//! * [`rules`]: reduction rules in hyper-arc form and their standard constructors.
//! * [`propagation`]: iterations, closures and withdrawal traces.
//! * [`explanation`]: deduction rules, explanation trees, replay and export.
//! * [`parser`] and [`cli`]: the model text format and the command-line driver.
//!
//! ```
//! use fdexplain::prelude::*;
//!
//! let src = ModelSource::inline(
//!     "var x in {0,1,2}; var y in {0,1,2}; var z in {0,1,2};
//!      constraint x < y; constraint y < z; constraint z < x;",
//! );
//! let model = parse_model(&src).unwrap();
//! let rules = build_rules(&model, RuleMode::Full).unwrap();
//! let run = Run::Strategy(Strategy::Worklist);
//! let result = iterate(&model, &rules, &run, false).unwrap();
//! let x = model.var_by_name("x").unwrap();
//! let why = explain_from_trace(&model, &result.trace, 0, x).unwrap();
//! assert_eq!(render_text(&why, &model), "(0, x) [(0, r6)]\n");
//! ```

pub mod cli;
pub mod error;
pub mod explanation;
pub mod model;
pub mod parser;
pub mod propagation;
pub mod rules;

pub use error::{Error, Result};

pub mod prelude {
    pub use crate::error::{Error, Result};
    pub use crate::explanation::{
        all_deduction_instances, deduction_instance, explain_from_trace, explanation_exists, export_dot,
        render_text, replay, Atom, DeductionRule, Explanation,
    };
    pub use crate::model::{
        enumerate_solutions, family_leq, is_solution, Assignment, ConstraintDef, ConstraintId, CspModel, Domain,
        DomainFamily, Relation, Value, VarId,
    };
    pub use crate::parser::{parse_model, print_model, Diagnostic, ModelSource};
    pub use crate::propagation::{
        is_common_fixpoint, iterate, run_script, simultaneous_closure, ClosureResult, Run, Status, Strategy,
        WithdrawalEvent, WithdrawalTrace,
    };
    pub use crate::rules::{
        apply_rule, build_rules, build_rules_with, check_correct, check_correct_wrt_constraint, reduce_operator,
        rules_for_constraint, ReductionOutcome, ReductionRule, RuleId, RuleMode, SupportFn,
    };
}
