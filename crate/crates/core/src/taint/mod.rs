//! Def-use reachability and propagation of weakness candidates into
//! resource attributes.

mod ddg;
mod defuse;

pub use ddg::{
    build_ddg, build_ddg_with, collect_propagations, confirm_findings, DataDependenceGraph,
    DdgNode, PropagationResult,
};
pub use defuse::{reaches, uses_of, uses_of_filtered, DefId, DefKind, DefSite, DefUseChains, UseSite};
