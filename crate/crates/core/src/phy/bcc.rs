//! Rate-1/2, constraint-length-7 binary convolutional code (generators 133
//! and 171 octal) with a hard-decision Viterbi decoder.
//!
//! The encoder appends 6 zero tail bits, so `n` input bits produce
//! `2 (n + 6)` coded bits, output pairs ordered (g0, g1). The decoder emits
//! each bit after a traceback of `5 K = 35` steps and flushes the remaining
//! bits from the known all-zero final state.

use crate::error::{Error, Result};

pub const CONSTRAINT_LENGTH: usize = 7;
pub const TAIL_BITS: usize = CONSTRAINT_LENGTH - 1;
pub const G0: u8 = 0o133;
pub const G1: u8 = 0o171;
pub const TRACEBACK: usize = 5 * CONSTRAINT_LENGTH;

const N_STATES: usize = 1 << TAIL_BITS;

#[inline]
fn parity(x: u8) -> u8 {
    (x.count_ones() & 1) as u8
}

/// Output pair for shifting `bit` into a register holding `state`
/// (most recent previous bit in the highest state bit).
#[inline]
fn branch(state: usize, bit: u8) -> (u8, u8, usize) {
    let reg = ((bit as usize) << TAIL_BITS | state) as u8;
    (parity(reg & G0), parity(reg & G1), (reg >> 1) as usize)
}

pub fn bcc_encode(bits: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(2 * (bits.len() + TAIL_BITS));
    let mut state = 0usize;
    for &b in bits.iter().chain(std::iter::repeat_n(&0u8, TAIL_BITS)) {
        let (a, c, next) = branch(state, b & 1);
        out.push(a);
        out.push(c);
        state = next;
    }
    out
}

pub fn viterbi_decode(coded: &[u8]) -> Result<Vec<u8>> {
    if !coded.len().is_multiple_of(2) {
        return Err(Error::invalid(format!("coded length {} is odd", coded.len())));
    }
    let steps = coded.len() / 2;
    if steps < TAIL_BITS {
        return Err(Error::invalid("coded sequence shorter than the tail"));
    }
    let n_info = steps - TAIL_BITS;

    // Expected output pair per (state, bit).
    let mut table = [[(0u8, 0u8, 0usize); 2]; N_STATES];
    for (s, row) in table.iter_mut().enumerate() {
        for bit in 0..2u8 {
            row[bit as usize] = branch(s, bit);
        }
    }

    const INF: u32 = u32::MAX / 2;
    let mut metric = [INF; N_STATES];
    metric[0] = 0;
    // decisions[j][ns] = low bit of the predecessor state at step j.
    let mut decisions: Vec<[u8; N_STATES]> = Vec::with_capacity(steps);
    let mut out = Vec::with_capacity(n_info);

    let trace = |decisions: &[[u8; N_STATES]], mut state: usize, from: usize, to: usize| -> usize {
        // Walks back from the state after step `from - 1` to the state after step `to - 1`.
        for j in (to..from).rev() {
            state = ((state & (N_STATES / 2 - 1)) << 1) | decisions[j][state] as usize;
        }
        state
    };

    for j in 0..steps {
        let (r0, r1) = (coded[2 * j] & 1, coded[2 * j + 1] & 1);
        let mut next = [INF; N_STATES];
        let mut dec = [0u8; N_STATES];
        for ns in 0..N_STATES {
            let bit = (ns >> (TAIL_BITS - 1)) as u8;
            for x in 0..2usize {
                let ps = ((ns & (N_STATES / 2 - 1)) << 1) | x;
                if metric[ps] >= INF {
                    continue;
                }
                let (a, c, _) = table[ps][bit as usize];
                let m = metric[ps] + (a ^ r0) as u32 + (c ^ r1) as u32;
                if m < next[ns] {
                    next[ns] = m;
                    dec[ns] = x as u8;
                }
            }
        }
        metric = next;
        decisions.push(dec);

        let done = j + 1;
        if done > TRACEBACK {
            let decided = done - TRACEBACK - 1;
            if decided < n_info && decided == out.len() {
                let best = (0..N_STATES).min_by_key(|&s| metric[s]).unwrap();
                let s = trace(&decisions, best, done, decided + 1);
                out.push((s >> (TAIL_BITS - 1)) as u8);
            }
        }
    }

    // Flush from the terminated all-zero state.
    let remaining = n_info - out.len();
    let mut state = trace(&decisions, 0, steps, out.len() + remaining);
    let mut tail = Vec::with_capacity(remaining);
    for j in (out.len()..out.len() + remaining).rev() {
        tail.push((state >> (TAIL_BITS - 1)) as u8);
        state = ((state & (N_STATES / 2 - 1)) << 1) | decisions[j][state] as usize;
    }
    tail.reverse();
    out.extend(tail);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::Rng;

    #[test]
    fn zero_input_zero_codeword() {
        assert!(bcc_encode(&[0; 20]).iter().all(|&b| b == 0));
    }

    #[test]
    fn length_arithmetic() {
        assert_eq!(bcc_encode(&[1; 37]).len(), 2 * (37 + 6));
    }

    #[test]
    fn impulse_response_is_generators() {
        let c = bcc_encode(&[1]);
        let a: Vec<u8> = c.iter().step_by(2).copied().collect();
        let b: Vec<u8> = c.iter().skip(1).step_by(2).copied().collect();
        // g0 = 1011011, g1 = 1111001 read from the current bit backwards.
        assert_eq!(a, vec![1, 0, 1, 1, 0, 1, 1]);
        assert_eq!(b, vec![1, 1, 1, 1, 0, 0, 1]);
    }

    #[test]
    fn noiseless_round_trip() {
        let mut rng = Rng::new(99, 0);
        for n in [0usize, 1, 5, 34, 35, 36, 200, 1000] {
            let bits: Vec<u8> = (0..n).map(|_| rng.bit()).collect();
            assert_eq!(viterbi_decode(&bcc_encode(&bits)).unwrap(), bits, "n = {n}");
        }
    }

    #[test]
    fn corrects_isolated_errors() {
        let mut rng = Rng::new(5, 1);
        let bits: Vec<u8> = (0..500).map(|_| rng.bit()).collect();
        let mut coded = bcc_encode(&bits);
        for pos in (10..coded.len()).step_by(60) {
            coded[pos] ^= 1;
        }
        assert_eq!(viterbi_decode(&coded).unwrap(), bits);
    }

    #[test]
    fn odd_length_rejected() {
        assert!(viterbi_decode(&[0, 1, 0]).is_err());
    }
}
