use super::action::AgentDef;
use super::store::{Store, VarDecl, VarId, VarKind};
use crate::dsl::Loc;

/// One agent instance in the initial parallel network.
#[derive(Clone, Debug, PartialEq)]
pub struct NetworkEntry {
    pub agent: String,
    pub loc: Loc,
}

/// A parsed model: variables with initial values, agent definitions and
/// the initial network `A1 || A2 || ...`.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct Program {
    pub variables: Vec<VarDecl>,
    pub definitions: Vec<AgentDef>,
    pub network: Vec<NetworkEntry>,
}

impl Program {
    pub fn var_id(&self, name: &str) -> Option<VarId> {
        self.variables
            .iter()
            .position(|v| v.name == name)
            .map(VarId)
    }

    pub fn var_name(&self, id: VarId) -> &str {
        &self.variables[id.index()].name
    }

    pub fn definition(&self, name: &str) -> Option<&AgentDef> {
        self.definitions.iter().find(|d| d.name == name)
    }

    pub fn time_var(&self) -> Option<VarId> {
        self.variables
            .iter()
            .position(|v| v.kind == VarKind::Time)
            .map(VarId)
    }

    pub fn initial_store(&self) -> Store {
        Store::from_decls(&self.variables)
    }

    /// Closure mapping ids to source names, for rendering expressions.
    pub fn namer(&self) -> impl Fn(VarId) -> String + '_ {
        move |v| self.variables[v.index()].name.clone()
    }

    /// Whether any guard, rate or reset references the clock.
    pub fn uses_time(&self) -> bool {
        self.time_var().is_some()
    }
}
