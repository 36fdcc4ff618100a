use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use super::{actions, ActionContext};
use crate::error::{Error, Result};
use crate::frame::Frame;
use crate::metadata::MetadataSet;
use crate::vis::{CompiledVisSpec, ScoreKind};

pub type TriggerFn = Arc<dyn Fn(&ActionContext<'_>) -> bool + Send + Sync>;
pub type GeneratorFn = Arc<dyn Fn(&ActionContext<'_>) -> ActionOutput + Send + Sync>;
pub type CustomScorer = Arc<dyn Fn(&Frame, &MetadataSet, &CompiledVisSpec) -> Option<f64> + Send + Sync>;

/// One candidate vis plus its secondary ranking key (lower ranks first
/// among equal scores).
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub spec: CompiledVisSpec,
    pub secondary: u64,
}

impl Candidate {
    pub fn new(spec: CompiledVisSpec) -> Candidate {
        Candidate { spec, secondary: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ActionOutput {
    pub candidates: Vec<Candidate>,
    /// The vis that candidates extend, for Enhance/Filter style scores.
    pub base: Option<CompiledVisSpec>,
    pub diagnostics: Vec<String>,
}

impl ActionOutput {
    pub fn of(candidates: Vec<Candidate>) -> ActionOutput {
        ActionOutput { candidates, ..ActionOutput::default() }
    }
}

#[derive(Clone)]
pub enum Scorer {
    /// A built-in formula. These can be evaluated on a sample.
    Builtin(ScoreKind),
    /// Arbitrary scoring over the full frame; never pruned.
    Custom(CustomScorer),
}

impl fmt::Debug for Scorer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scorer::Builtin(k) => write!(f, "Builtin({k:?})"),
            Scorer::Custom(_) => f.write_str("Custom"),
        }
    }
}

/// A named trigger/generator/scorer triple.
#[derive(Clone)]
pub struct Action {
    pub name: String,
    pub trigger: TriggerFn,
    pub generator: GeneratorFn,
    pub scorer: Scorer,
}

impl fmt::Debug for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Action").field("name", &self.name).field("scorer", &self.scorer).finish()
    }
}

impl Action {
    pub fn new<T, G>(name: impl Into<String>, trigger: T, generator: G, scorer: Scorer) -> Action
    where
        T: Fn(&ActionContext<'_>) -> bool + Send + Sync + 'static,
        G: Fn(&ActionContext<'_>) -> ActionOutput + Send + Sync + 'static,
    {
        Action { name: name.into(), trigger: Arc::new(trigger), generator: Arc::new(generator), scorer }
    }
}

/// Registered actions in display order: the built-ins first, then custom
/// actions in registration order.
#[derive(Debug, Clone, Default)]
pub struct ActionRegistry {
    actions: Vec<Action>,
}

impl ActionRegistry {
    pub fn empty() -> ActionRegistry {
        ActionRegistry::default()
    }

    pub fn with_defaults() -> ActionRegistry {
        ActionRegistry { actions: actions::defaults() }
    }

    pub fn register(&mut self, action: Action) -> Result<()> {
        if self.get(&action.name).is_some() {
            return Err(Error::DuplicateAction(action.name));
        }
        self.actions.push(action);
        Ok(())
    }

    /// Swaps the implementation of an existing action, keeping its position.
    pub fn replace(&mut self, action: Action) -> Result<()> {
        match self.actions.iter_mut().find(|a| a.name == action.name) {
            Some(slot) => {
                *slot = action;
                Ok(())
            }
            None => Err(Error::UnknownAction(action.name)),
        }
    }

    pub fn remove(&mut self, name: &str) -> Option<Action> {
        let i = self.actions.iter().position(|a| a.name == name)?;
        Some(self.actions.remove(i))
    }

    pub fn get(&self, name: &str) -> Option<&Action> {
        self.actions.iter().find(|a| a.name == name)
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &Action> {
        self.actions.iter()
    }

    pub fn names(&self) -> Vec<&str> {
        self.actions.iter().map(|a| a.name.as_str()).collect()
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }
}
