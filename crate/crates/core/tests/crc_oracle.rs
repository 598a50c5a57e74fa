mod common;

use common::{crc16_bitwise, random_bytes};
use paracom_core::rng::SplitMix64;
use paracom_core::wire::crc16;

#[test]
fn oracle_check_value() {
    assert_eq!(crc16_bitwise(b"123456789"), 0x29B1);
    assert_eq!(crc16(b"123456789"), 0x29B1);
}

#[test]
fn table_matches_bitwise_oracle() {
    let mut rng = SplitMix64::new(0xC0FFEE);
    for _ in 0..5000 {
        let data = random_bytes(&mut rng, 64);
        assert_eq!(crc16(&data), crc16_bitwise(&data), "{data:02x?}");
    }
}

#[test]
fn appending_crc_big_endian_leaves_zero_residue() {
    let mut rng = SplitMix64::new(3);
    for _ in 0..200 {
        let mut data = random_bytes(&mut rng, 40);
        data.extend_from_slice(&crc16(&data).to_be_bytes());
        assert_eq!(crc16_bitwise(&data), 0);
    }
}
