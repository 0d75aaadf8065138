use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use serde::Serialize;

use crate::coding::{ceil_log2, Bitstring};
use crate::dist::entropy_bits;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Default)]
struct Node {
    children: [Option<u32>; 2],
    symbol: Option<usize>,
}

/// Prefix-free code over symbol indices `0..n`, with statistics under the
/// pmf it was built for.
#[derive(Debug, Clone, Serialize)]
pub struct PrefixCode {
    codewords: Vec<Option<Bitstring>>,
    expected_length: f64,
    kraft_sum: f64,
    entropy: f64,
    #[serde(skip)]
    trie: Vec<Node>,
}

impl PrefixCode {
    /// Builds a code from explicit codewords. Fails if the set is not prefix-free.
    pub fn from_codewords(codewords: Vec<Option<Bitstring>>, probs: &[f64]) -> Result<Self> {
        if codewords.len() != probs.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} codewords for {} masses",
                codewords.len(),
                probs.len()
            )));
        }
        let mut trie = vec![Node::default()];
        for (sym, cw) in codewords.iter().enumerate() {
            let Some(cw) = cw else { continue };
            let mut node = 0usize;
            for bit in cw.iter() {
                if trie[node].symbol.is_some() {
                    return Err(Error::MalformedCodeword(
                        "codeword set is not prefix-free".into(),
                    ));
                }
                node = match trie[node].children[bit as usize] {
                    Some(next) => next as usize,
                    None => {
                        trie.push(Node::default());
                        let next = trie.len() - 1;
                        trie[node].children[bit as usize] = Some(next as u32);
                        next
                    }
                };
            }
            if trie[node].symbol.is_some() || trie[node].children.iter().any(Option::is_some) {
                return Err(Error::MalformedCodeword(
                    "codeword set is not prefix-free".into(),
                ));
            }
            trie[node].symbol = Some(sym);
        }
        let expected_length = codewords
            .iter()
            .zip(probs)
            .filter_map(|(cw, &p)| cw.as_ref().map(|c| p * c.len() as f64))
            .sum();
        let kraft_sum = codewords
            .iter()
            .flatten()
            .map(|c| 2f64.powi(-(c.len() as i32)))
            .sum();
        Ok(Self {
            codewords,
            expected_length,
            kraft_sum,
            entropy: entropy_bits(probs.iter().copied()),
            trie,
        })
    }

    /// Fixed-length code: the positive-mass symbols, in index order, get
    /// consecutive `⌈log2 k⌉`-bit indices.
    pub fn fixed_length(probs: &[f64]) -> Result<Self> {
        let support: Vec<usize> = (0..probs.len()).filter(|&i| probs[i] > 0.0).collect();
        if support.is_empty() {
            return Err(Error::EmptySupport);
        }
        let width = ceil_log2(support.len());
        let mut codewords = vec![None; probs.len()];
        for (rank, &sym) in support.iter().enumerate() {
            let mut b = Bitstring::new();
            b.push_bits(rank as u64, width);
            codewords[sym] = Some(b);
        }
        Self::from_codewords(codewords, probs)
    }

    pub fn codeword(&self, symbol: usize) -> Option<&Bitstring> {
        self.codewords.get(symbol).and_then(Option::as_ref)
    }

    pub fn codewords(&self) -> &[Option<Bitstring>] {
        &self.codewords
    }

    pub fn lengths(&self) -> Vec<Option<usize>> {
        self.codewords
            .iter()
            .map(|c| c.as_ref().map(Bitstring::len))
            .collect()
    }

    pub fn expected_length(&self) -> f64 {
        self.expected_length
    }

    pub fn kraft_sum(&self) -> f64 {
        self.kraft_sum
    }

    /// Entropy of the pmf the code was built for.
    pub fn entropy(&self) -> f64 {
        self.entropy
    }

    pub fn support_size(&self) -> usize {
        self.codewords.iter().flatten().count()
    }

    pub fn encode(&self, symbol: usize, out: &mut Bitstring) -> Result<()> {
        let cw = self.codeword(symbol).ok_or(Error::UnknownSymbol(symbol))?;
        out.extend(cw);
        Ok(())
    }

    pub fn prefix_encode(&self, symbol: usize) -> Result<Bitstring> {
        let mut b = Bitstring::new();
        self.encode(symbol, &mut b)?;
        Ok(b)
    }

    /// Decodes one codeword at `cursor`; returns the symbol and the cursor
    /// just past the codeword.
    pub fn prefix_decode(&self, bits: &Bitstring, cursor: usize) -> Result<(usize, usize)> {
        let mut node = 0usize;
        let mut pos = cursor;
        loop {
            if let Some(sym) = self.trie[node].symbol {
                return Ok((sym, pos));
            }
            if pos >= bits.len() {
                return Err(Error::TruncatedStream);
            }
            node = match self.trie[node].children[bits.get(pos) as usize] {
                Some(next) => next as usize,
                None => {
                    return Err(Error::MalformedCodeword(format!(
                        "no codeword matches at bit {cursor}"
                    )))
                }
            };
            pos += 1;
        }
    }

    pub fn table(&self, labels: &[String]) -> Vec<(String, String)> {
        self.codewords
            .iter()
            .enumerate()
            .filter_map(|(i, c)| c.as_ref().map(|c| (labels[i].clone(), c.to_string())))
            .collect()
    }
}

#[derive(Debug, Clone, Copy)]
struct HeapKey {
    prob: f64,
    min_symbol: usize,
    order: usize,
}

impl PartialEq for HeapKey {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for HeapKey {}

impl PartialOrd for HeapKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for HeapKey {
    fn cmp(&self, other: &Self) -> Ordering {
        self.prob
            .total_cmp(&other.prob)
            .then(self.min_symbol.cmp(&other.min_symbol))
            .then(self.order.cmp(&other.order))
    }
}

/// Huffman code. Ties are broken by the smallest symbol index in a subtree,
/// then by creation order; the first node popped is the 0-branch.
pub fn huffman_build(probs: &[f64]) -> Result<PrefixCode> {
    build(probs, false)
}

/// Merges the two most probable nodes first. Produces a valid but
/// non-optimal code; exists to exercise failure detection.
pub fn huffman_build_largest_first(probs: &[f64]) -> Result<PrefixCode> {
    build(probs, true)
}

fn build(probs: &[f64], largest_first: bool) -> Result<PrefixCode> {
    let support: Vec<usize> = (0..probs.len()).filter(|&i| probs[i] > 0.0).collect();
    if support.is_empty() {
        return Err(Error::EmptySupport);
    }
    let mut codewords = vec![None; probs.len()];
    if support.len() == 1 {
        codewords[support[0]] = Some(Bitstring::new());
        return PrefixCode::from_codewords(codewords, probs);
    }

    // nodes: leaves first, then internal nodes with (left, right) children
    let mut children: Vec<Option<(usize, usize)>> = Vec::new();
    let mut leaf_symbol: Vec<Option<usize>> = Vec::new();
    let mut heap = BinaryHeap::new();
    let mut max_heap = BinaryHeap::new();
    for &s in &support {
        let key = HeapKey {
            prob: probs[s],
            min_symbol: s,
            order: children.len(),
        };
        children.push(None);
        leaf_symbol.push(Some(s));
        if largest_first {
            max_heap.push((key, key.order));
        } else {
            heap.push(Reverse((key, key.order)));
        }
    }
    let pop = |heap: &mut BinaryHeap<Reverse<(HeapKey, usize)>>,
               max_heap: &mut BinaryHeap<(HeapKey, usize)>| {
        if largest_first {
            max_heap.pop()
        } else {
            heap.pop().map(|Reverse(k)| k)
        }
    };
    loop {
        let (ka, a) = pop(&mut heap, &mut max_heap).expect("non-empty heap");
        let Some((kb, b)) = pop(&mut heap, &mut max_heap) else {
            break;
        };
        let key = HeapKey {
            prob: ka.prob + kb.prob,
            min_symbol: ka.min_symbol.min(kb.min_symbol),
            order: children.len(),
        };
        children.push(Some((a, b)));
        leaf_symbol.push(None);
        if largest_first {
            max_heap.push((key, key.order));
        } else {
            heap.push(Reverse((key, key.order)));
        }
    }

    let root = children.len() - 1;
    let mut stack = vec![(root, Bitstring::new())];
    while let Some((node, prefix)) = stack.pop() {
        match children[node] {
            Some((a, b)) => {
                let mut left = prefix.clone();
                left.push(false);
                let mut right = prefix;
                right.push(true);
                stack.push((b, right));
                stack.push((a, left));
            }
            None => codewords[leaf_symbol[node].unwrap()] = Some(prefix),
        }
    }
    PrefixCode::from_codewords(codewords, probs)
}
