//! Four small effect calculi over a common call-by-push-value core:
//! effect handlers, monadic reflection and delimited control, with typed
//! translations between them.

pub mod ast;
pub mod denot;
pub mod gen;
pub mod opsem;
pub mod surface;
pub mod typesys;
pub mod xlate;
