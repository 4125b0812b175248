//! Lexical phishing URL classification.

pub mod eval;
pub mod external;
pub mod features;
pub mod learners;
pub mod lexer;
pub mod persist;
pub mod pipeline;
pub mod similarity;
