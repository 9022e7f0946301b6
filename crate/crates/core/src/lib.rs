//! Packs excerpts of the Apollo 11 Lunar Module guidance source into a
//! self-extracting HTML page small enough for a single QR symbol, and
//! verifies the chain by decoding it again.

pub mod codec;
pub mod corpus;
pub mod qr;
pub mod payload;
pub mod cli;
