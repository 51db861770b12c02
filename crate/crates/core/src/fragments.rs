//! Ontology fragments shipped with the crate.

use crate::ontology::{KbError, KnowledgeBase};

pub const STRUCTURAL: &str = include_str!("../data/structural.kif");
pub const ENGINE: &str = include_str!("../data/engine.kif");
pub const DINING: &str = include_str!("../data/dining.kif");
pub const VEHICLES: &str = include_str!("../data/vehicles.kif");
pub const LEXICON: &str = include_str!("../data/lexicon.kif");

/// `(file name, text)` for every ontology fragment, in load order.
pub const ONTOLOGY: [(&str, &str); 4] = [
    ("structural.kif", STRUCTURAL),
    ("engine.kif", ENGINE),
    ("dining.kif", DINING),
    ("vehicles.kif", VEHICLES),
];

/// Knowledge base holding every shipped ontology fragment.
pub fn shipped_kb() -> Result<KnowledgeBase, KbError> {
    let mut kb = KnowledgeBase::new();
    for (_, text) in ONTOLOGY {
        kb.load_str(text)?;
    }
    Ok(kb)
}
