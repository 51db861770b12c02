//! SUO-KIF parsing, a small ontology store, forward-chaining rules and a
//! transition-based microworld simulator.

pub mod fact;
pub mod fragments;
pub mod kif;
pub mod lexicon;
pub mod ontology;
pub mod rules;
pub mod scenarios;
pub mod sym;
pub mod transition;
pub mod world;

pub use fact::{Binding, Fact, FactPattern, Ground, Pattern};
pub use kif::{parse, print_term, ParseError, SourceSpan, Term, TermKind};
pub use ontology::{KbError, KnowledgeBase, LoadError};
pub use rules::{infer_closure, Closure, Rule, RuleError, SkolemRegistry};
pub use sym::Sym;
pub use transition::{Engine, Guard, Outcome, Probe, Transition, TransitionRecord, ValidationPolicy};
pub use world::{Microworld, WorldError};
