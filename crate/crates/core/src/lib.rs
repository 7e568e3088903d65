//! Link-level simulator for non-orthogonal HARQ with chase combining.
//!
//! A failed packet is retransmitted superimposed, in the power domain,
//! with the next fresh packet. The receiver MRC-combines stored copies,
//! decodes the stronger new packet first and removes it by SIC before
//! decoding the old one. Type-I HARQ and HARQ-CC are provided as
//! baselines, and [`sim`] sweeps all three over SNR.

pub mod channel;
pub mod cli;
pub mod framing;
pub mod harq;
pub mod phy;
pub mod sim;

pub use phy::MessageId;
