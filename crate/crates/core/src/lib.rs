//! Incremental anaphora resolution under the centering model.
//!
//! Words are attached one at a time into competing dependency readings.
//! Pronouns and definite noun phrases launch antecedent searches against the
//! previous utterance's forward-looking centers and, failing that, within the
//! current sentence. Local (mid-sentence) ambiguity is kept as one centering
//! copy per phrase reading; global ambiguity as several center readings of
//! one utterance.

pub mod error;
pub mod lexicon;
pub mod centering;
pub mod constraints;
pub mod corpus;
pub mod dependency;
pub mod engine;
