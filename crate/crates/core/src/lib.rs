pub mod banded;
pub mod domain;
pub mod error;
pub mod robin;
pub mod scalar;
pub mod diagnostics;
pub mod mass;
pub mod oracle;
pub mod quadrature;
pub mod rootfind;
