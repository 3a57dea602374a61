//! ABI encoding of `diamondCut` calldata per the canonical head/tail
//! rules: static heads, dynamic offsets, 32-byte words, `bytes4` values
//! left-aligned. A strict decoder provides the round-trip check and lets
//! existing calldata be inspected.

use crate::hash::{from_hex_fixed, to_hex};
use crate::security::{compute_selector, DIAMOND_CUT_SIGNATURE};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const ZERO_ADDRESS: [u8; 20] = [0u8; 20];
const WORD: usize = 32;
const MAX_SELECTORS_PER_CUT: usize = 65536;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AbiError {
    #[error("unresolved address placeholder `{0}`")]
    UnresolvedPlaceholder(String),
    #[error("selector list exceeds {MAX_SELECTORS_PER_CUT} entries")]
    OversizeSelectorList,
    #[error("decode error: {0}")]
    Decode(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CutAction {
    Add = 0,
    Replace = 1,
    Remove = 2,
}

impl CutAction {
    pub fn from_u8(v: u8) -> Option<CutAction> {
        match v {
            0 => Some(CutAction::Add),
            1 => Some(CutAction::Replace),
            2 => Some(CutAction::Remove),
            _ => None,
        }
    }
}

/// Facet address in a cut: concrete 20 bytes, or a symbolic placeholder
/// resolved at execution time (`@deploy:<FacetName>`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FacetAddress {
    Concrete([u8; 20]),
    Symbolic(String),
}

impl FacetAddress {
    pub fn zero() -> FacetAddress {
        FacetAddress::Concrete(ZERO_ADDRESS)
    }

    pub fn deploy_symbol(facet: &str) -> FacetAddress {
        FacetAddress::Symbolic(format!("@deploy:{facet}"))
    }

    pub fn render(&self) -> String {
        match self {
            FacetAddress::Concrete(a) => to_hex(a),
            FacetAddress::Symbolic(s) => s.clone(),
        }
    }

    pub fn parse(s: &str) -> Result<FacetAddress, String> {
        if s.starts_with('@') {
            return Ok(FacetAddress::Symbolic(s.to_string()));
        }
        from_hex_fixed::<20>(s)
            .map(FacetAddress::Concrete)
            .ok_or_else(|| format!("invalid address `{s}`"))
    }
}

impl Serialize for FacetAddress {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.render())
    }
}

impl<'de> Deserialize<'de> for FacetAddress {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        FacetAddress::parse(&s).map_err(serde::de::Error::custom)
    }
}

/// One entry of a diamondCut: Add/Replace/Remove a selector set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct FacetCut {
    pub facet_name: String,
    pub action: CutAction,
    /// Unique and sorted.
    #[serde(with = "selector_hex_list")]
    pub selectors: Vec<[u8; 4]>,
    pub facet_address: FacetAddress,
}

impl FacetCut {
    pub fn new(
        facet_name: impl Into<String>,
        action: CutAction,
        mut selectors: Vec<[u8; 4]>,
        facet_address: FacetAddress,
    ) -> FacetCut {
        selectors.sort_unstable();
        selectors.dedup();
        FacetCut { facet_name: facet_name.into(), action, selectors, facet_address }
    }
}

mod selector_hex_list {
    use super::*;
    use serde::ser::SerializeSeq;

    pub fn serialize<S: serde::Serializer>(
        selectors: &[[u8; 4]],
        serializer: S,
    ) -> Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(selectors.len()))?;
        for s in selectors {
            seq.serialize_element(&to_hex(s))?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> Result<Vec<[u8; 4]>, D::Error> {
        let raw: Vec<String> = Vec::deserialize(deserializer)?;
        raw.into_iter()
            .map(|s| {
                from_hex_fixed::<4>(&s)
                    .ok_or_else(|| serde::de::Error::custom(format!("invalid selector `{s}`")))
            })
            .collect()
    }
}

/// Byte offset (within the full calldata) of an address word that stands
/// in for a symbolic facet address.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AddressPlaceholder {
    pub byte_offset: usize,
    pub symbol: String,
}

fn pad_usize(v: usize) -> [u8; 32] {
    let mut w = [0u8; 32];
    w[24..].copy_from_slice(&(v as u64).to_be_bytes());
    w
}

fn pad_address(a: &[u8; 20]) -> [u8; 32] {
    let mut w = [0u8; 32];
    w[12..].copy_from_slice(a);
    w
}

/// `diamondCut` calldata with every placeholder resolved.
pub fn encode_diamond_cut(
    cuts: &[FacetCut],
    init: [u8; 20],
    init_calldata: &[u8],
) -> Result<Vec<u8>, AbiError> {
    for cut in cuts {
        if let FacetAddress::Symbolic(s) = &cut.facet_address {
            return Err(AbiError::UnresolvedPlaceholder(s.clone()));
        }
    }
    let (bytes, _) = encode_with_placeholders(cuts, init, init_calldata)?;
    Ok(bytes)
}

/// Encoding that tolerates symbolic facet addresses: they encode as zero
/// words and their byte offsets are reported so an executor can patch
/// the real addresses in after deployment.
pub fn encode_with_placeholders(
    cuts: &[FacetCut],
    init: [u8; 20],
    init_calldata: &[u8],
) -> Result<(Vec<u8>, Vec<AddressPlaceholder>), AbiError> {
    let selector = compute_selector(DIAMOND_CUT_SIGNATURE).expect("core signature is canonical");
    let mut out = Vec::new();
    out.extend_from_slice(&selector);

    let args_base = out.len(); // offsets are relative to the args block
    let head_len = 3 * WORD;

    // Tail 1: the cuts array.
    let mut placeholders = Vec::new();
    let mut cuts_tail = Vec::new();
    cuts_tail.extend_from_slice(&pad_usize(cuts.len()));
    let elements_base = cuts_tail.len() + cuts.len() * WORD; // after offset table
    let mut tuple_sizes = Vec::with_capacity(cuts.len());
    for cut in cuts {
        if cut.selectors.len() > MAX_SELECTORS_PER_CUT {
            return Err(AbiError::OversizeSelectorList);
        }
        tuple_sizes.push((4 + cut.selectors.len()) * WORD);
    }
    // Offset table, relative to the start of the elements area.
    let mut acc = 0usize;
    for size in &tuple_sizes {
        cuts_tail.extend_from_slice(&pad_usize(elements_base - WORD + acc));
        acc += size;
    }
    // Tuples.
    for cut in cuts {
        let addr_word_offset = args_base + head_len + cuts_tail.len();
        match &cut.facet_address {
            FacetAddress::Concrete(a) => cuts_tail.extend_from_slice(&pad_address(a)),
            FacetAddress::Symbolic(symbol) => {
                placeholders.push(AddressPlaceholder {
                    byte_offset: addr_word_offset,
                    symbol: symbol.clone(),
                });
                cuts_tail.extend_from_slice(&pad_address(&ZERO_ADDRESS));
            }
        }
        cuts_tail.extend_from_slice(&pad_usize(cut.action as usize));
        cuts_tail.extend_from_slice(&pad_usize(3 * WORD)); // selectors offset in tuple
        cuts_tail.extend_from_slice(&pad_usize(cut.selectors.len()));
        for sel in &cut.selectors {
            let mut w = [0u8; 32];
            w[..4].copy_from_slice(sel); // bytes4: left-aligned
            cuts_tail.extend_from_slice(&w);
        }
    }

    // Tail 2: init calldata bytes.
    let mut bytes_tail = Vec::new();
    bytes_tail.extend_from_slice(&pad_usize(init_calldata.len()));
    bytes_tail.extend_from_slice(init_calldata);
    let rem = init_calldata.len() % WORD;
    if rem != 0 {
        bytes_tail.extend(std::iter::repeat(0u8).take(WORD - rem));
    }

    // Heads.
    out.extend_from_slice(&pad_usize(head_len)); // offset of cuts array
    out.extend_from_slice(&pad_address(&init));
    out.extend_from_slice(&pad_usize(head_len + cuts_tail.len())); // offset of bytes
    out.extend_from_slice(&cuts_tail);
    out.extend_from_slice(&bytes_tail);
    Ok((out, placeholders))
}

// ---------------------------------------------------------------------------
// Strict decoder
// ---------------------------------------------------------------------------

struct Reader<'a> {
    data: &'a [u8],
}

impl<'a> Reader<'a> {
    fn word(&self, offset: usize) -> Result<&'a [u8], AbiError> {
        self.data
            .get(offset..offset + WORD)
            .ok_or_else(|| AbiError::Decode(format!("truncated at byte {offset}")))
    }

    fn usize_at(&self, offset: usize) -> Result<usize, AbiError> {
        let w = self.word(offset)?;
        if w[..24].iter().any(|b| *b != 0) {
            return Err(AbiError::Decode(format!("oversized integer at byte {offset}")));
        }
        let mut buf = [0u8; 8];
        buf.copy_from_slice(&w[24..]);
        Ok(u64::from_be_bytes(buf) as usize)
    }

    fn address_at(&self, offset: usize) -> Result<[u8; 20], AbiError> {
        let w = self.word(offset)?;
        if w[..12].iter().any(|b| *b != 0) {
            return Err(AbiError::Decode(format!(
                "address word at byte {offset} has nonzero padding"
            )));
        }
        let mut a = [0u8; 20];
        a.copy_from_slice(&w[12..]);
        Ok(a)
    }
}

/// Decode `diamondCut` calldata produced by [`encode_diamond_cut`].
/// Canonical offsets are enforced, so `decode(encode(x)) == x` and any
/// accepted byte string re-encodes to itself.
pub fn decode_diamond_cut(
    data: &[u8],
) -> Result<(Vec<FacetCut>, [u8; 20], Vec<u8>), AbiError> {
    let selector = compute_selector(DIAMOND_CUT_SIGNATURE).expect("core signature is canonical");
    if data.len() < 4 || data[..4] != selector {
        return Err(AbiError::Decode("missing diamondCut selector".to_string()));
    }
    let args = &data[4..];
    if args.len() % WORD != 0 {
        return Err(AbiError::Decode("calldata not word-aligned".to_string()));
    }
    let r = Reader { data: args };

    let cuts_offset = r.usize_at(0)?;
    if cuts_offset != 3 * WORD {
        return Err(AbiError::Decode(format!(
            "non-canonical cuts offset {cuts_offset}"
        )));
    }
    let init = r.address_at(WORD)?;
    let bytes_offset = r.usize_at(2 * WORD)?;

    // Cuts array.
    let n = r.usize_at(cuts_offset)?;
    if n > 10_000 {
        return Err(AbiError::Decode(format!("implausible cut count {n}")));
    }
    let elements_base = cuts_offset + WORD;
    let mut cuts = Vec::with_capacity(n);
    let mut expected_elem = n * WORD;
    for i in 0..n {
        let elem_offset = r.usize_at(elements_base + i * WORD)?;
        if elem_offset != expected_elem {
            return Err(AbiError::Decode(format!(
                "non-canonical element offset for cut {i}: {elem_offset} != {expected_elem}"
            )));
        }
        let tuple = elements_base + elem_offset;
        let address = r.address_at(tuple)?;
        let action_raw = r.usize_at(tuple + WORD)?;
        let action = u8::try_from(action_raw)
            .ok()
            .and_then(CutAction::from_u8)
            .ok_or_else(|| AbiError::Decode(format!("invalid action {action_raw}")))?;
        let sel_offset = r.usize_at(tuple + 2 * WORD)?;
        if sel_offset != 3 * WORD {
            return Err(AbiError::Decode(format!(
                "non-canonical selector offset {sel_offset}"
            )));
        }
        let sel_count = r.usize_at(tuple + 3 * WORD)?;
        if sel_count > MAX_SELECTORS_PER_CUT {
            return Err(AbiError::OversizeSelectorList);
        }
        let mut selectors = Vec::with_capacity(sel_count);
        for k in 0..sel_count {
            let w = r.word(tuple + 4 * WORD + k * WORD)?;
            if w[4..].iter().any(|b| *b != 0) {
                return Err(AbiError::Decode(
                    "bytes4 word has nonzero right padding".to_string(),
                ));
            }
            selectors.push([w[0], w[1], w[2], w[3]]);
        }
        expected_elem += (4 + sel_count) * WORD;
        cuts.push(FacetCut {
            facet_name: String::new(),
            action,
            selectors,
            facet_address: FacetAddress::Concrete(address),
        });
    }

    let cuts_tail_len = WORD + expected_elem;
    if bytes_offset != cuts_offset + cuts_tail_len {
        return Err(AbiError::Decode(format!(
            "non-canonical bytes offset {bytes_offset}"
        )));
    }
    let len = r.usize_at(bytes_offset)?;
    let start = bytes_offset + WORD;
    let bytes = args
        .get(start..start + len)
        .ok_or_else(|| AbiError::Decode("truncated init calldata".to_string()))?
        .to_vec();
    let padded = len.div_ceil(WORD) * WORD;
    let tail = args
        .get(start + len..start + padded)
        .ok_or_else(|| AbiError::Decode("truncated padding".to_string()))?;
    if tail.iter().any(|b| *b != 0) {
        return Err(AbiError::Decode("nonzero bytes padding".to_string()));
    }
    if start + padded != args.len() {
        return Err(AbiError::Decode("trailing bytes after calldata".to_string()));
    }
    Ok((cuts, init, bytes))
}

/// Patch placeholder address words with concrete addresses.
pub fn resolve_placeholders(
    calldata: &mut [u8],
    placeholders: &[AddressPlaceholder],
    resolve: impl Fn(&str) -> Option<[u8; 20]>,
) -> Result<(), AbiError> {
    for p in placeholders {
        let addr = resolve(&p.symbol)
            .ok_or_else(|| AbiError::UnresolvedPlaceholder(p.symbol.clone()))?;
        let word = calldata
            .get_mut(p.byte_offset..p.byte_offset + WORD)
            .ok_or_else(|| AbiError::Decode("placeholder offset out of range".to_string()))?;
        word.copy_from_slice(&pad_address(&addr));
    }
    Ok(())
}
