pub mod chebyshev;
pub mod claims;
pub mod expr;
pub mod harness;
pub mod identity;
pub mod numeric;
pub mod report;
pub mod sequence;
