//! Format 212: pairs of 12-bit two's complement samples packed into three bytes.
//!
//! For a pair `(s1, s2)` the layout is
//! `byte0 = s1[7:0]`, `byte1 = s2[11:8] << 4 | s1[11:8]`, `byte2 = s2[7:0]`.
//! An odd trailing sample occupies the first two bytes of a triple.

#[inline]
fn sign_extend_12(v: u16) -> i16 {
    ((v << 4) as i16) >> 4
}

/// Decodes `count` samples from a format-212 byte stream.
///
/// Returns `None` if the stream is shorter than `count` samples require.
pub fn decode(bytes: &[u8], count: usize) -> Option<Vec<i16>> {
    if bytes.len() < encoded_len(count) {
        return None;
    }
    let mut out = Vec::with_capacity(count);
    let mut chunks = bytes.chunks(3);
    while out.len() < count {
        let c = chunks.next()?;
        let b0 = c[0] as u16;
        let b1 = c[1] as u16;
        out.push(sign_extend_12(b0 | ((b1 & 0x0F) << 8)));
        if out.len() < count {
            let b2 = c[2] as u16;
            out.push(sign_extend_12(((b1 & 0xF0) << 4) | b2));
        }
    }
    Some(out)
}

/// Number of whole samples contained in a byte stream of the given length.
pub fn samples_in(byte_len: usize) -> usize {
    (byte_len / 3) * 2 + usize::from(byte_len % 3 == 2)
}

pub fn encoded_len(count: usize) -> usize {
    (count / 2) * 3 + if count % 2 == 1 { 2 } else { 0 }
}

/// Packs samples into format 212. Values are truncated to 12 bits.
pub fn encode(samples: &[i16]) -> Vec<u8> {
    let mut out = Vec::with_capacity(encoded_len(samples.len()));
    for pair in samples.chunks(2) {
        let s1 = (pair[0] as u16) & 0x0FFF;
        match pair.get(1) {
            Some(&s2) => {
                let s2 = (s2 as u16) & 0x0FFF;
                out.push((s1 & 0xFF) as u8);
                out.push((((s2 >> 8) << 4) | (s1 >> 8)) as u8);
                out.push((s2 & 0xFF) as u8);
            }
            None => {
                out.push((s1 & 0xFF) as u8);
                out.push((s1 >> 8) as u8);
            }
        }
    }
    out
}
