use std::fmt;

use super::SiteMeasure;

/// Anything that can say whether a vertex is in a good state.
pub trait Configuration {
    fn len(&self) -> usize;

    fn is_good(&self, x: usize, measure: &SiteMeasure) -> bool;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Bit-packed 0-1 configuration; bit `x` is the state of vertex `x`.
///
/// For 0-1 models the good state is `0` (vacant) and `1` is occupied.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct SpinConfig {
    len: usize,
    words: Vec<u64>,
}

impl SpinConfig {
    pub fn zeros(len: usize) -> Self {
        SpinConfig { len, words: vec![0; len.div_ceil(64)] }
    }

    pub fn ones(len: usize) -> Self {
        let mut c = Self::zeros(len);
        for w in &mut c.words {
            *w = u64::MAX;
        }
        c.trim();
        c
    }

    /// Configuration whose bit `x` is bit `x` of `bits` (`len ≤ 64`).
    pub fn from_bits(len: usize, bits: u64) -> Self {
        assert!(len <= 64, "from_bits supports at most 64 vertices");
        let mut c = SpinConfig { len, words: vec![bits; len.div_ceil(64)] };
        c.trim();
        c
    }

    pub fn from_states(states: &[u8]) -> Self {
        let mut c = Self::zeros(states.len());
        for (x, &s) in states.iter().enumerate() {
            c.set(x, s != 0);
        }
        c
    }

    fn trim(&mut self) {
        let rem = self.len % 64;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// `true` when vertex `x` is occupied (state 1).
    #[inline]
    pub fn get(&self, x: usize) -> bool {
        debug_assert!(x < self.len);
        (self.words[x / 64] >> (x % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, x: usize, occupied: bool) {
        debug_assert!(x < self.len);
        let mask = 1u64 << (x % 64);
        if occupied {
            self.words[x / 64] |= mask;
        } else {
            self.words[x / 64] &= !mask;
        }
    }

    pub fn state(&self, x: usize) -> u8 {
        self.get(x) as u8
    }

    /// Low 64 bits (the whole configuration when `len ≤ 64`).
    pub fn bits(&self) -> u64 {
        self.words.first().copied().unwrap_or(0)
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn count_zeros(&self) -> usize {
        self.len - self.count_ones()
    }

    pub fn is_all_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn zeros_iter(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(move |&x| !self.get(x))
    }

    /// Good-set partial order for 0-1 models: `self ≤ other` iff every vacancy
    /// of `self` is also a vacancy of `other`.
    pub fn le(&self, other: &SpinConfig) -> bool {
        assert_eq!(self.len, other.len);
        self.words.iter().zip(&other.words).all(|(a, b)| b & !a == 0)
    }
}

impl fmt::Debug for SpinConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: String = (0..self.len).map(|x| if self.get(x) { '1' } else { '0' }).collect();
        write!(f, "SpinConfig({s})")
    }
}

impl Configuration for SpinConfig {
    fn len(&self) -> usize {
        self.len
    }

    #[inline]
    fn is_good(&self, x: usize, measure: &SiteMeasure) -> bool {
        measure.is_good(self.state(x))
    }
}

/// Configuration over an arbitrary finite state space `S = {0, …, k-1}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GeneralConfig {
    pub states: Vec<u8>,
}

impl Configuration for GeneralConfig {
    fn len(&self) -> usize {
        self.states.len()
    }

    fn is_good(&self, x: usize, measure: &SiteMeasure) -> bool {
        measure.is_good(self.states[x])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn ones_and_zeros() {
        let c = SpinConfig::ones(70);
        assert_eq!(c.count_ones(), 70);
        assert!(SpinConfig::zeros(70).is_all_zero());
        assert!(c.le(&SpinConfig::zeros(70)));
        assert!(!SpinConfig::zeros(70).le(&c));
    }

    proptest! {
        #[test]
        fn states_round_trip(states in proptest::collection::vec(0u8..2, 0..150)) {
            let c = SpinConfig::from_states(&states);
            let back: Vec<u8> = (0..c.len()).map(|x| c.state(x)).collect();
            prop_assert_eq!(back, states);
        }
    }
}
