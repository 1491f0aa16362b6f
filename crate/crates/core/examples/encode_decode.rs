// Encode a message, corrupt two bits, and recover it with the Viterbi decoder.

use std::error::Error;

use texpand::bits::BitVec;
use texpand::convcode::{encode, viterbi_decode_traced, EXAMPLE_SPEC, STANDARD_75_SPEC};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let spec = EXAMPLE_SPEC;
    let data: BitVec = "110100".parse()?;
    let sent = encode(&spec, &data);
    let received = sent.flip_bits(&[3, 7])?;
    let decoded = viterbi_decode_traced(&spec, &received)?;
    println!("data      {data}");
    println!("sent      {}", sent.to_pair_string());
    println!("received  {}", received.to_pair_string());
    println!(
        "decoded   {} (weight {}, {} stages, {} live nodes)",
        decoded.bits, decoded.weight, decoded.trace.acs_calls, decoded.trace.node_expansions
    );
    assert_eq!(decoded.bits, data);

    let msg: BitVec = "1011001".parse()?;
    let code75 = texpand::convcode::with_flush(&STANDARD_75_SPEC, &msg);
    let noisy = encode(&STANDARD_75_SPEC, &code75).flip_bits(&[2])?;
    let back = viterbi_decode_traced(&STANDARD_75_SPEC, &noisy)?;
    println!(
        "(7,5): {msg} -> {} -> {}",
        noisy.to_pair_string(),
        back.bits
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
