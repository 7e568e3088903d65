//! CRC-32 (IEEE 802.3 / zlib), table driven.

const POLYNOMIAL: u32 = 0xEDB8_8320;
const INIT: u32 = 0xFFFF_FFFF;

const TABLE: [u32; 256] = build_table();

const fn build_table() -> [u32; 256] {
    let mut table = [0u32; 256];
    let mut i = 0;
    while i < 256 {
        let mut crc = i as u32;
        let mut j = 0;
        while j < 8 {
            crc = if crc & 1 != 0 {
                (crc >> 1) ^ POLYNOMIAL
            } else {
                crc >> 1
            };
            j += 1;
        }
        table[i] = crc;
        i += 1;
    }
    table
}

/// Residue left by running the register over `data || crc32(data)` (CRC
/// appended little-endian), before the final XOR is applied.
pub const RESIDUE: u32 = 0xDEBB_20E3;

pub fn crc32(data: &[u8]) -> u32 {
    let mut crc = INIT;
    for &byte in data {
        crc = (crc >> 8) ^ TABLE[((crc ^ byte as u32) & 0xFF) as usize];
    }
    crc ^ INIT
}
