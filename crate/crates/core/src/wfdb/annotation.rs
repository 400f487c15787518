//! MIT-format binary annotation files.
//!
//! Each entry is a little-endian 16-bit word: the top 6 bits hold the
//! annotation code, the low 10 bits the sample interval from the previous
//! annotation. Codes above 58 are pseudo-annotations:
//!
//! | code | meaning |
//! |------|---------|
//! | 59 SKIP | interval carried in the next 4 bytes (high word first) |
//! | 60 NUM  | sets `num` for following annotations |
//! | 61 SUB  | sets `subtyp` of the preceding annotation |
//! | 62 CHN  | sets `chan` for following annotations |
//! | 63 AUX  | low 10 bits give aux length; bytes follow, padded to even |
//!
//! A zero word terminates the file.

use std::path::Path;

use super::aami::{map_beat_class, AamiClass};
use crate::{Error, Result};

const SKIP: u8 = 59;
const NUM: u8 = 60;
const SUB: u8 = 61;
const CHN: u8 = 62;
const AUX: u8 = 63;

/// WFDB mnemonic for each annotation code (index = code).
const MNEMONICS: [char; 42] = [
    ' ', 'N', 'L', 'R', 'a', 'V', 'F', 'J', 'A', 'S', 'E', 'j', '/', 'Q', '~', ' ', '|', ' ', 's',
    'T', '*', 'D', '"', '=', 'p', 'B', '^', 't', '+', 'u', '?', '!', '[', ']', 'e', 'n', '@', 'x',
    'f', '(', ')', 'r',
];

pub fn code_to_symbol(code: u8) -> Option<char> {
    MNEMONICS
        .get(code as usize)
        .copied()
        .filter(|&c| c != ' ' && code != 0)
}

pub fn symbol_to_code(symbol: char) -> Option<u8> {
    MNEMONICS
        .iter()
        .enumerate()
        .skip(1)
        .find(|&(_, &c)| c == symbol && c != ' ')
        .map(|(i, _)| i as u8)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Annotation {
    pub sample_index: usize,
    pub symbol: char,
    pub code: u8,
    pub aami_class: Option<AamiClass>,
    pub subtype: i8,
    pub chan: u8,
    pub num: i8,
    pub aux: Option<String>,
}

impl Annotation {
    pub fn new(sample_index: usize, symbol: char) -> Self {
        Annotation {
            sample_index,
            symbol,
            code: symbol_to_code(symbol).unwrap_or(0),
            aami_class: map_beat_class(symbol),
            subtype: 0,
            chan: 0,
            num: 0,
            aux: None,
        }
    }

    pub fn is_beat(&self) -> bool {
        super::aami::is_beat_symbol(self.symbol)
    }
}

fn malformed(path: &Path, reason: impl Into<String>) -> Error {
    Error::MalformedAnnotation {
        path: path.to_path_buf(),
        reason: reason.into(),
    }
}

pub fn parse_annotations(path: &Path, bytes: &[u8]) -> Result<Vec<Annotation>> {
    let mut out: Vec<Annotation> = Vec::new();
    let mut time: u64 = 0;
    let mut chan = 0u8;
    let mut num = 0i8;
    let mut pos = 0usize;
    while pos + 1 < bytes.len() {
        let word = u16::from_le_bytes([bytes[pos], bytes[pos + 1]]);
        pos += 2;
        let code = (word >> 10) as u8;
        let value = word & 0x03FF;
        match code {
            0 if value == 0 => break,
            SKIP => {
                if pos + 4 > bytes.len() {
                    return Err(malformed(path, "truncated SKIP interval"));
                }
                let hi = u16::from_le_bytes([bytes[pos], bytes[pos + 1]]) as u32;
                let lo = u16::from_le_bytes([bytes[pos + 2], bytes[pos + 3]]) as u32;
                pos += 4;
                let skip = ((hi << 16) | lo) as i32;
                time = time
                    .checked_add_signed(skip as i64)
                    .ok_or_else(|| malformed(path, "negative annotation time"))?;
            }
            NUM => num = value as i16 as i8,
            SUB => {
                if let Some(last) = out.last_mut() {
                    last.subtype = value as i16 as i8;
                }
            }
            CHN => chan = value as u8,
            AUX => {
                let len = value as usize;
                if pos + len > bytes.len() {
                    return Err(malformed(path, "truncated AUX payload"));
                }
                let text = String::from_utf8_lossy(&bytes[pos..pos + len])
                    .trim_end_matches('\0')
                    .to_string();
                pos += len + (len & 1);
                if let Some(last) = out.last_mut() {
                    last.aux = Some(text);
                }
            }
            _ => {
                time += value as u64;
                let symbol = code_to_symbol(code).unwrap_or(' ');
                out.push(Annotation {
                    sample_index: time as usize,
                    symbol,
                    code,
                    aami_class: map_beat_class(symbol),
                    subtype: 0,
                    chan,
                    num,
                    aux: None,
                });
            }
        }
    }
    Ok(out)
}

/// Encodes annotations in MIT format. `chan`, `num` and `subtype` are written
/// only when they differ from the running state.
pub fn encode_annotations(annotations: &[Annotation]) -> Vec<u8> {
    let mut out = Vec::new();
    let push = |out: &mut Vec<u8>, code: u8, value: u16| {
        let word = ((code as u16) << 10) | (value & 0x03FF);
        out.extend_from_slice(&word.to_le_bytes());
    };
    let mut time = 0usize;
    let mut chan = 0u8;
    let mut num = 0i8;
    for a in annotations {
        let mut delta = a.sample_index - time;
        if delta > 0x03FF {
            push(&mut out, SKIP, 0);
            let d = delta as u32;
            out.extend_from_slice(&((d >> 16) as u16).to_le_bytes());
            out.extend_from_slice(&((d & 0xFFFF) as u16).to_le_bytes());
            delta = 0;
        }
        if a.chan != chan {
            push(&mut out, CHN, a.chan as u16);
            chan = a.chan;
        }
        if a.num != num {
            push(&mut out, NUM, a.num as u8 as u16);
            num = a.num;
        }
        push(&mut out, a.code, delta as u16);
        time = a.sample_index;
        if a.subtype != 0 {
            push(&mut out, SUB, a.subtype as u8 as u16);
        }
        if let Some(aux) = &a.aux {
            let bytes = aux.as_bytes();
            push(&mut out, AUX, bytes.len() as u16);
            out.extend_from_slice(bytes);
            if bytes.len() % 2 == 1 {
                out.push(0);
            }
        }
    }
    out.extend_from_slice(&[0, 0]);
    out
}
