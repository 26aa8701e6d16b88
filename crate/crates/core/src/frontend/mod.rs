//! Reading and writing the surface syntax, and first-order export.

pub mod fol;
pub mod parse;
pub mod print;
pub mod sexpr;

pub use fol::{fol_formula, print_fol};
pub use parse::{parse, parse_term, parse_with, Form, Formula, SourceUnit};
pub use print::{print_analysis, print_formula, print_goal, print_protocol, print_skeleton};
pub use sexpr::{Diagnostic, Pos};
