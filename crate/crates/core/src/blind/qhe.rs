//! Homomorphic encryption interface and two mock schemes.
//!
//! Keys and ciphertexts are plain byte strings so they can travel inside
//! protocol messages. Decryption never fails: anything that does not parse
//! under the given key decrypts to the empty message.

use std::cell::RefCell;
use std::collections::HashMap;
use std::fmt;
use std::ops::Range;
use std::rc::Rc;

use rand::{Rng, RngCore, SeedableRng};

use super::QheError;
use crate::rng::SimRng;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PublicKey(pub Vec<u8>);

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SecretKey(pub Vec<u8>);

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Ciphertext(pub Vec<u8>);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Capabilities {
    /// Key generation, encryption of classical messages and decryption are
    /// classical algorithms.
    pub classical_friendly: bool,
    /// Arbitrary [`Program::Function`] evaluation.
    pub functions: bool,
}

pub type ByteFn = Rc<dyn Fn(&[u8]) -> Vec<u8>>;

/// A function on the concatenation of the input plaintexts.
#[derive(Clone)]
pub enum Program {
    /// Concatenation of the listed byte ranges, each clamped to the input.
    Select(Vec<Range<usize>>),
    Function(ByteFn),
}

impl fmt::Debug for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Program::Select(r) => f.debug_tuple("Select").field(r).finish(),
            Program::Function(_) => f.write_str("Function(..)"),
        }
    }
}

impl Program {
    /// A single byte range.
    #[allow(clippy::single_range_in_vec_init)]
    pub fn range(r: Range<usize>) -> Self {
        Program::Select(vec![r])
    }

    pub fn apply(&self, input: &[u8]) -> Vec<u8> {
        match self {
            Program::Select(ranges) => {
                let mut out = Vec::new();
                for r in ranges {
                    let end = r.end.min(input.len());
                    if r.start < end {
                        out.extend_from_slice(&input[r.start..end]);
                    }
                }
                out
            }
            Program::Function(f) => f(input),
        }
    }
}

#[derive(Clone, Debug)]
pub enum EvalFn {
    Program(Program),
    /// Homomorphic decryption of the hardcoded ciphertext, keyed by the
    /// single encrypted secret key passed as input.
    DecryptWith(Ciphertext),
}

pub trait QheScheme {
    fn name(&self) -> &'static str;
    fn capabilities(&self) -> Capabilities;
    fn max_level(&self) -> usize;
    /// `capacity` bounds the plaintext bytes the key will encrypt.
    fn keygen(&self, level: usize, capacity: usize, rng: &mut SimRng) -> Result<(PublicKey, SecretKey), QheError>;
    fn enc(&self, pk: &PublicKey, message: &[u8], rng: &mut SimRng) -> Result<Ciphertext, QheError>;
    fn eval(&self, pk: &PublicKey, f: &EvalFn, inputs: &[&Ciphertext]) -> Result<Ciphertext, QheError>;
    fn dec(&self, sk: &SecretKey, ct: &Ciphertext) -> Vec<u8>;
}

fn tagged(tag: &[u8; 3], id: u64, rest: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(11 + rest.len());
    out.extend_from_slice(tag);
    out.extend_from_slice(&id.to_le_bytes());
    out.extend_from_slice(rest);
    out
}

fn untag<'a>(tag: &[u8; 3], bytes: &'a [u8]) -> Option<(u64, &'a [u8])> {
    if bytes.len() < 11 || &bytes[..3] != tag {
        return None;
    }
    Some((u64::from_le_bytes(bytes[3..11].try_into().ok()?), &bytes[11..]))
}

/// Ciphertexts are the tagged plaintext; evaluation applies the function
/// directly.
#[derive(Clone, Copy, Debug, Default)]
pub struct TransparentQhe;

pub fn transparent_qhe() -> TransparentQhe {
    TransparentQhe
}

impl TransparentQhe {
    fn payload<'a>(&self, id: u64, ct: &'a Ciphertext) -> &'a [u8] {
        match untag(b"TCT", &ct.0) {
            Some((cid, payload)) if cid == id => payload,
            _ => &[],
        }
    }
}

impl QheScheme for TransparentQhe {
    fn name(&self) -> &'static str {
        "transparent"
    }

    fn capabilities(&self) -> Capabilities {
        Capabilities { classical_friendly: true, functions: true }
    }

    fn max_level(&self) -> usize {
        64
    }

    fn keygen(&self, level: usize, _capacity: usize, rng: &mut SimRng) -> Result<(PublicKey, SecretKey), QheError> {
        if level > self.max_level() {
            return Err(QheError::LevelExceeded { requested: level, max: self.max_level() });
        }
        let id = rng.random::<u64>();
        Ok((PublicKey(tagged(b"TPK", id, &[])), SecretKey(tagged(b"TSK", id, &[]))))
    }

    fn enc(&self, pk: &PublicKey, message: &[u8], _rng: &mut SimRng) -> Result<Ciphertext, QheError> {
        let (id, _) = untag(b"TPK", &pk.0).ok_or(QheError::MalformedKey)?;
        Ok(Ciphertext(tagged(b"TCT", id, message)))
    }

    fn eval(&self, pk: &PublicKey, f: &EvalFn, inputs: &[&Ciphertext]) -> Result<Ciphertext, QheError> {
        let (id, _) = untag(b"TPK", &pk.0).ok_or(QheError::MalformedKey)?;
        let plain = match f {
            EvalFn::Program(p) => {
                let input: Vec<u8> = inputs.iter().flat_map(|c| self.payload(id, c).iter().copied()).collect();
                p.apply(&input)
            }
            EvalFn::DecryptWith(old) => {
                let [sk] = inputs else {
                    return Err(QheError::Unsupported("key switching takes one encrypted key".into()));
                };
                self.dec(&SecretKey(self.payload(id, sk).to_vec()), old)
            }
        };
        Ok(Ciphertext(tagged(b"TCT", id, &plain)))
    }

    fn dec(&self, sk: &SecretKey, ct: &Ciphertext) -> Vec<u8> {
        match untag(b"TSK", &sk.0) {
            Some((id, _)) => self.payload(id, ct).to_vec(),
            None => Vec::new(),
        }
    }
}

/// A ciphertext byte: the plaintext byte XOR the key's pad at `offset`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct PadByte {
    offset: u32,
    body: u8,
}

fn encode_otp(id: u64, bytes: &[PadByte]) -> Ciphertext {
    let mut segments: Vec<(u32, u32)> = Vec::new();
    for b in bytes {
        match segments.last_mut() {
            Some((start, len)) if *start + *len == b.offset => *len += 1,
            _ => segments.push((b.offset, 1)),
        }
    }
    let mut rest = Vec::new();
    rest.extend_from_slice(&(segments.len() as u32).to_le_bytes());
    for (start, len) in &segments {
        rest.extend_from_slice(&start.to_le_bytes());
        rest.extend_from_slice(&len.to_le_bytes());
    }
    rest.extend(bytes.iter().map(|b| b.body));
    Ciphertext(tagged(b"OCT", id, &rest))
}

fn decode_otp(ct: &Ciphertext) -> Option<(u64, Vec<PadByte>)> {
    let (id, rest) = untag(b"OCT", &ct.0)?;
    let read = |at: usize| -> Option<u32> { Some(u32::from_le_bytes(rest.get(at..at + 4)?.try_into().ok()?)) };
    let count = read(0)? as usize;
    let header = 4usize.checked_add(count.checked_mul(8)?)?;
    let body = rest.get(header..)?;
    let mut offsets = Vec::with_capacity(body.len());
    for s in 0..count {
        let (start, len) = (read(4 + 8 * s)?, read(8 + 8 * s)?);
        for k in 0..len {
            offsets.push(start.checked_add(k)?);
            if offsets.len() > body.len() {
                return None;
            }
        }
    }
    if offsets.len() != body.len() {
        return None;
    }
    Some((id, offsets.into_iter().zip(body).map(|(offset, &body)| PadByte { offset, body }).collect()))
}

#[derive(Debug)]
struct OtpKey {
    pad: Vec<u8>,
    cursor: usize,
}

/// One-time pad under fresh random pads. The scheme object holds each
/// key's pad and consumption cursor so that no pad byte is used twice;
/// running out of pad is reported as key reuse. Evaluation supports byte
/// selection and key switching, both computed on public data only.
///
/// The reusing variant draws every pad from a fixed seed and starts every
/// encryption at offset 0. It exists as a negative control.
#[derive(Debug, Default)]
pub struct OtpQhe {
    keys: RefCell<HashMap<u64, OtpKey>>,
    reuse: bool,
}

pub fn otp_qhe() -> OtpQhe {
    OtpQhe::default()
}

pub fn otp_qhe_reusing() -> OtpQhe {
    OtpQhe { keys: RefCell::default(), reuse: true }
}

const SK_HEADER: usize = 11;

impl OtpQhe {
    pub fn reuses_keys(&self) -> bool {
        self.reuse
    }

    fn key_id(pk: &PublicKey) -> Result<u64, QheError> {
        untag(b"OPK", &pk.0).map(|(id, _)| id).ok_or(QheError::MalformedKey)
    }

    /// The input ciphertexts as pad bytes under `id`; foreign or malformed
    /// ciphertexts contribute nothing.
    fn gather(id: u64, inputs: &[&Ciphertext]) -> Vec<PadByte> {
        inputs
            .iter()
            .filter_map(|c| decode_otp(c))
            .filter(|(cid, _)| *cid == id)
            .flat_map(|(_, bytes)| bytes)
            .collect()
    }
}

impl QheScheme for OtpQhe {
    fn name(&self) -> &'static str {
        if self.reuse {
            "otp-reusing"
        } else {
            "otp"
        }
    }

    fn capabilities(&self) -> Capabilities {
        Capabilities { classical_friendly: true, functions: false }
    }

    fn max_level(&self) -> usize {
        64
    }

    fn keygen(&self, level: usize, capacity: usize, rng: &mut SimRng) -> Result<(PublicKey, SecretKey), QheError> {
        if level > self.max_level() {
            return Err(QheError::LevelExceeded { requested: level, max: self.max_level() });
        }
        let id = rng.random::<u64>();
        let mut pad = vec![0u8; capacity];
        if self.reuse {
            SimRng::seed_from_u64(0).fill_bytes(&mut pad);
        } else {
            rng.fill_bytes(&mut pad);
        }
        let sk = SecretKey(tagged(b"OSK", id, &pad));
        self.keys.borrow_mut().insert(id, OtpKey { pad, cursor: 0 });
        Ok((PublicKey(tagged(b"OPK", id, &(capacity as u32).to_le_bytes())), sk))
    }

    fn enc(&self, pk: &PublicKey, message: &[u8], _rng: &mut SimRng) -> Result<Ciphertext, QheError> {
        let id = Self::key_id(pk)?;
        let mut keys = self.keys.borrow_mut();
        let key = keys.get_mut(&id).ok_or(QheError::UnknownKey(id))?;
        let start = if self.reuse { 0 } else { key.cursor };
        if start + message.len() > key.pad.len() {
            return Err(QheError::KeyReuse(id));
        }
        if !self.reuse {
            key.cursor += message.len();
        }
        let bytes: Vec<PadByte> = message
            .iter()
            .enumerate()
            .map(|(k, &m)| PadByte { offset: (start + k) as u32, body: m ^ key.pad[start + k] })
            .collect();
        Ok(encode_otp(id, &bytes))
    }

    fn eval(&self, pk: &PublicKey, f: &EvalFn, inputs: &[&Ciphertext]) -> Result<Ciphertext, QheError> {
        let id = Self::key_id(pk)?;
        match f {
            EvalFn::Program(Program::Select(ranges)) => {
                let bytes = Self::gather(id, inputs);
                let mut out = Vec::new();
                for r in ranges {
                    let end = r.end.min(bytes.len());
                    if r.start < end {
                        out.extend_from_slice(&bytes[r.start..end]);
                    }
                }
                Ok(encode_otp(id, &out))
            }
            EvalFn::Program(Program::Function(_)) => {
                Err(QheError::Unsupported("one-time pad evaluates byte selections only".into()))
            }
            EvalFn::DecryptWith(old) => {
                // Byte j of the encrypted old key is old_sk[j] ^ pad[o_j], and
                // old_sk carries the old pad after its header. Old ciphertext
                // byte m ^ old_pad[p] thus becomes m ^ pad[o_{header + p}].
                let [sk] = inputs else {
                    return Err(QheError::Unsupported("key switching takes one encrypted key".into()));
                };
                let key_bytes = Self::gather(id, &[sk]);
                let Some((_, old_bytes)) = decode_otp(old) else {
                    return Ok(encode_otp(id, &[]));
                };
                let switched: Vec<PadByte> = old_bytes
                    .iter()
                    .filter_map(|b| {
                        let k = key_bytes.get(SK_HEADER + b.offset as usize)?;
                        Some(PadByte { offset: k.offset, body: b.body ^ k.body })
                    })
                    .collect();
                Ok(encode_otp(id, &switched))
            }
        }
    }

    fn dec(&self, sk: &SecretKey, ct: &Ciphertext) -> Vec<u8> {
        let (Some((id, pad)), Some((cid, bytes))) = (untag(b"OSK", &sk.0), decode_otp(ct)) else {
            return Vec::new();
        };
        if id != cid {
            return Vec::new();
        }
        bytes.iter().map(|b| b.body ^ pad.get(b.offset as usize).copied().unwrap_or(0)).collect()
    }
}
