pub mod assets;
pub mod bench;
pub mod dsl;
pub mod encoding;
pub mod engine;
pub mod incremental;
pub mod ingestion;
pub mod oracle;
pub mod sparse;
