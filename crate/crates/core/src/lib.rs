pub mod backend;
pub mod bench;
pub mod codec;
pub mod envelope;
pub mod idmpms;
pub mod liuxiao;
pub mod seeds;
pub mod session;
pub mod symmetric;
pub mod tags;
pub mod warrant;
