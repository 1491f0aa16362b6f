// Recover the generator taps of an unknown K=3 encoder from one
// (message, codeword) pair.

use std::error::Error;

use texpand::bits::BitVec;
use texpand::convcode::search_taps;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let data: BitVec = "110100".parse()?;
    let codeword: BitVec = "10 01 11 10 11 00".parse()?;
    let found = search_taps(3, &data, &codeword);
    for spec in &found {
        let (a, b) = spec.taps();
        println!("K={} taps {a:#05b} {b:#05b}", spec.constraint_length());
    }
    assert!(!found.is_empty());
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
