pub mod catalog;
pub mod corpus;
pub mod decide;
pub mod formula;
pub mod interp;
pub mod ops;
pub mod oracle;
pub mod props;
pub mod spectrum;
pub mod table;
pub mod three;
pub mod witness;
