//! Server-side randomness detection over fixed-length request streams.
//!
//! Arriving requests are cut into consecutive windows of `W` requests
//! regardless of process or file. Each window's offsets are sorted and every
//! adjacent pair scores a random factor of 0 (the head does not need to move)
//! or 1 (a seek). The sum `S` over a window of `N` requests gives the random
//! percentage `S / (N - 1)`.

use crate::error::{config_err, Error, Result};
use crate::trace::Request;

/// Default stream length; matches the CFQ queue depth.
pub const DEFAULT_WINDOW: usize = 128;

/// Random-factor summary of one request stream.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StreamStats {
    /// Random factor sum.
    pub s: u32,
    /// Requests in the stream.
    pub n: u32,
    /// `s / (n - 1)`.
    pub percentage: f64,
}

impl StreamStats {
    pub fn new(s: u32, n: u32) -> Result<Self> {
        if n < 2 {
            return Err(Error::UndefinedStats(n as usize));
        }
        if s > n - 1 {
            return Err(config_err(format!("random factor sum {s} exceeds {}", n - 1)));
        }
        Ok(Self {
            s,
            n,
            percentage: f64::from(s) / f64::from(n - 1),
        })
    }
}

/// Iterator over consecutive, non-overlapping windows of requests.
#[derive(Debug)]
pub struct Streams<I> {
    inner: I,
    width: usize,
}

impl<I: Iterator<Item = Request>> Iterator for Streams<I> {
    type Item = Vec<Request>;

    fn next(&mut self) -> Option<Vec<Request>> {
        let window: Vec<Request> = self.inner.by_ref().take(self.width).collect();
        (!window.is_empty()).then_some(window)
    }
}

/// Groups requests, in arrival order, into windows of `width`. The final
/// window may be shorter.
pub fn group<I>(requests: I, width: usize) -> Result<Streams<I::IntoIter>>
where
    I: IntoIterator<Item = Request>,
{
    if width < 2 {
        return Err(config_err(format!("stream length must be at least 2, got {width}")));
    }
    Ok(Streams {
        inner: requests.into_iter(),
        width,
    })
}

/// Random factor of two sorted offsets: 0 when the second request starts
/// exactly one request after the first, or at the same offset (merged).
pub fn rf_pair(first: u64, second: u64, req_size: u64) -> Result<u32> {
    if first > second {
        return Err(Error::Unsorted { first, second });
    }
    Ok(rf_sorted(first, second, req_size))
}

#[inline]
fn rf_sorted(first: u64, second: u64, req_size: u64) -> u32 {
    let gap = second - first;
    u32::from(gap != 0 && gap != req_size)
}

/// Random factor sum of already sorted offsets.
pub fn rf_sum_sorted(offsets: &[u64], req_size: u64) -> u32 {
    offsets.windows(2).map(|w| rf_sorted(w[0], w[1], req_size)).sum()
}

/// Scores one stream. The window is not modified; offsets are sorted on a copy.
pub fn stream_stats(window: &[Request]) -> Result<StreamStats> {
    if window.len() < 2 {
        return Err(Error::UndefinedStats(window.len()));
    }
    let req_size = window[0].size;
    if let Some(r) = window.iter().find(|r| r.size != req_size) {
        return Err(config_err(format!(
            "stream mixes request sizes {req_size} and {}",
            r.size
        )));
    }
    let mut offsets: Vec<u64> = window.iter().map(|r| r.offset).collect();
    offsets.sort_unstable();
    StreamStats::new(rf_sum_sorted(&offsets, req_size), window.len() as u32)
}

/// Scores every window of `requests`, skipping a trailing one-request window.
pub fn analyze(requests: &[Request], width: usize) -> Result<Vec<StreamStats>> {
    group(requests.iter().copied(), width)?
        .filter(|w| w.len() >= 2)
        .map(|w| stream_stats(&w))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const KIB: u64 = 1024;

    fn reqs(offsets: &[u64], size: u64) -> Vec<Request> {
        offsets
            .iter()
            .enumerate()
            .map(|(i, &offset)| Request { seq: i as u64, proc: 0, file: 0, offset, size })
            .collect()
    }

    #[test]
    fn grouping_sizes() {
        let r = reqs(&vec![0; 300], 1);
        let lens: Vec<usize> = group(r, 128).unwrap().map(|w| w.len()).collect();
        assert_eq!(lens, vec![128, 128, 44]);
        assert_eq!(group(reqs(&[0; 128], 1), 128).unwrap().count(), 1);
        assert_eq!(group(Vec::new(), 128).unwrap().count(), 0);
        assert!(matches!(group(Vec::new(), 1), Err(Error::Config(_))));
    }

    #[test]
    fn random_factor_pairs() {
        assert_eq!(rf_pair(0, 262_144, 262_144).unwrap(), 0);
        assert_eq!(rf_pair(0, 524_288, 262_144).unwrap(), 1);
        assert_eq!(rf_pair(4096, 4096, 262_144).unwrap(), 0);
        assert!(matches!(rf_pair(5, 4, 1), Err(Error::Unsorted { .. })));
    }

    #[test]
    fn sequential_stream_scores_zero() {
        let st = stream_stats(&reqs(&[768 * KIB, 0, 512 * KIB, 256 * KIB], 256 * KIB)).unwrap();
        assert_eq!((st.s, st.n, st.percentage), (0, 4, 0.0));
    }

    #[test]
    fn reported_percentages() {
        let p = |s| StreamStats::new(s, 128).unwrap().percentage;
        assert!((p(15) - 0.118).abs() < 5e-4);
        assert!((p(57) - 0.449).abs() < 5e-4);
        assert_eq!(p(127), 1.0);
    }

    #[test]
    fn short_streams_have_no_stats() {
        assert!(matches!(stream_stats(&reqs(&[0], 1)), Err(Error::UndefinedStats(1))));
        assert!(matches!(stream_stats(&[]), Err(Error::UndefinedStats(0))));
    }

    #[test]
    fn mixed_sizes_rejected() {
        let mut r = reqs(&[0, 8], 8);
        r[1].size = 16;
        assert!(stream_stats(&r).is_err());
    }

    #[test]
    fn analyze_skips_singleton_tail() {
        let stats = analyze(&reqs(&(0..257).collect::<Vec<_>>(), 1), 128).unwrap();
        assert_eq!(stats.len(), 2);
        let stats = analyze(&reqs(&(0..258).collect::<Vec<_>>(), 1), 128).unwrap();
        assert_eq!(stats.len(), 3);
        assert_eq!(stats[2].n, 2);
    }
}
