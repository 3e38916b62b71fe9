//! Write-request data model, synthetic HPC access patterns and the trace CSV format.
//!
//! Three canonical patterns are generated per process and then merged into a
//! single server-side arrival order:
//!
//! * segmented-contiguous: process `j` writes its `1/n` segment front to back;
//! * segmented-random: process `j` writes its segment in a seeded random order;
//! * strided: at iteration `i` process `j` writes block `i * n + j`.
//!
//! The arrival interleaving is an explicit parameter because measured
//! randomness depends on it.

use std::collections::BTreeSet;
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{config_err, Error, Result};

/// Header line of the trace CSV format.
pub const TRACE_HEADER: &str = "seq,proc,file,offset,size";

/// One write request as seen by the I/O server.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Request {
    /// Arrival index, dense from 0 within a trace.
    pub seq: u64,
    /// Issuing process.
    pub proc: u32,
    /// File id; distinguishes applications in mixed loads.
    pub file: u32,
    /// Logical byte offset into `file`.
    pub offset: u64,
    /// Request size in bytes.
    pub size: u64,
}

impl Request {
    pub fn end(&self) -> u64 {
        self.offset + self.size
    }
}

/// An ordered, uniform-size list of requests.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Trace {
    requests: Vec<Request>,
    req_size: Option<u64>,
}

impl Trace {
    /// Builds a trace, checking that `seq` is dense and every size is equal.
    pub fn new(requests: Vec<Request>) -> Result<Self> {
        let req_size = requests.first().map(|r| r.size);
        for (i, r) in requests.iter().enumerate() {
            if r.seq != i as u64 {
                return Err(config_err(format!(
                    "request {i} has seq {}; seq must be dense from 0",
                    r.seq
                )));
            }
            if r.size == 0 {
                return Err(config_err(format!("request {i} has zero size")));
            }
            if Some(r.size) != req_size {
                return Err(config_err(format!(
                    "request {i} has size {} but the trace uses {}",
                    r.size,
                    req_size.unwrap_or_default()
                )));
            }
        }
        Ok(Self { requests, req_size })
    }

    pub fn requests(&self) -> &[Request] {
        &self.requests
    }

    pub fn len(&self) -> usize {
        self.requests.len()
    }

    pub fn is_empty(&self) -> bool {
        self.requests.is_empty()
    }

    /// The common request size. Fails for an empty trace.
    pub fn req_size(&self) -> Result<u64> {
        self.req_size.ok_or(Error::EmptyTrace)
    }

    pub fn total_bytes(&self) -> u64 {
        self.requests.iter().map(|r| r.size).sum()
    }

    pub fn files(&self) -> BTreeSet<u32> {
        self.requests.iter().map(|r| r.file).collect()
    }

    /// Returns the same requests with every file id replaced by `file`.
    pub fn with_file(mut self, file: u32) -> Self {
        for r in &mut self.requests {
            r.file = file;
        }
        self
    }
}

/// Canonical IOR-style access patterns.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AccessPattern {
    SegmentedContiguous,
    SegmentedRandom,
    Strided,
}

impl FromStr for AccessPattern {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "contig" | "segmented-contiguous" => Ok(Self::SegmentedContiguous),
            "random" | "segmented-random" => Ok(Self::SegmentedRandom),
            "strided" => Ok(Self::Strided),
            other => Err(config_err(format!("unknown access pattern {other:?}"))),
        }
    }
}

impl fmt::Display for AccessPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::SegmentedContiguous => "segmented-contiguous",
            Self::SegmentedRandom => "segmented-random",
            Self::Strided => "strided",
        })
    }
}

/// Parameters of one synthetic application.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternSpec {
    pub pattern: AccessPattern,
    /// Number of processes, `n`.
    pub procs: u32,
    pub total_bytes: u64,
    pub req_size: u64,
    /// Seeds the per-process permutations of segmented-random.
    pub seed: u64,
    /// File id written by every request of this application.
    pub file: u32,
}

impl PatternSpec {
    pub fn new(pattern: AccessPattern, procs: u32, total_bytes: u64, req_size: u64) -> Self {
        Self {
            pattern,
            procs,
            total_bytes,
            req_size,
            seed: 0,
            file: 0,
        }
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn file(mut self, file: u32) -> Self {
        self.file = file;
        self
    }

    /// Requests issued by each process.
    pub fn per_proc(&self) -> Result<u64> {
        if self.procs == 0 {
            return Err(config_err("procs must be at least 1"));
        }
        if self.req_size == 0 {
            return Err(config_err("req_size must be positive"));
        }
        if self.total_bytes == 0 || self.total_bytes % self.req_size != 0 {
            return Err(config_err(format!(
                "total_bytes {} is not a positive multiple of req_size {}",
                self.total_bytes, self.req_size
            )));
        }
        let count = self.total_bytes / self.req_size;
        if count % u64::from(self.procs) != 0 {
            return Err(config_err(format!(
                "{count} requests cannot be split evenly over {} processes",
                self.procs
            )));
        }
        Ok(count / u64::from(self.procs))
    }

    /// Offsets each process writes, in that process's issue order.
    pub fn proc_offsets(&self) -> Result<Vec<Vec<u64>>> {
        let k = self.per_proc()?;
        let n = u64::from(self.procs);
        let size = self.req_size;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let lanes = (0..n)
            .map(|j| match self.pattern {
                AccessPattern::SegmentedContiguous => (0..k).map(|i| (j * k + i) * size).collect(),
                AccessPattern::SegmentedRandom => {
                    let mut segment: Vec<u64> = (0..k).map(|i| (j * k + i) * size).collect();
                    segment.shuffle(&mut rng);
                    segment
                }
                AccessPattern::Strided => (0..k).map(|i| (i * n + j) * size).collect(),
            })
            .collect();
        Ok(lanes)
    }
}

/// How per-process request sequences merge into one arrival order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InterleavePolicy {
    /// Iteration-major, process-minor: every process issues its `i`-th
    /// request before any process issues its `i + 1`-th.
    #[default]
    RoundRobin,
    /// At each step a process with requests left is drawn uniformly.
    Random { seed: u64 },
}

/// Generates one application's trace.
pub fn generate(spec: &PatternSpec, interleave: InterleavePolicy) -> Result<Trace> {
    let lanes = spec.proc_offsets()?;
    let k = spec.per_proc()? as usize;
    let total = k * lanes.len();
    let mut requests = Vec::with_capacity(total);
    let push = |proc: usize, offset: u64, requests: &mut Vec<Request>| {
        requests.push(Request {
            seq: requests.len() as u64,
            proc: proc as u32,
            file: spec.file,
            offset,
            size: spec.req_size,
        })
    };
    match interleave {
        InterleavePolicy::RoundRobin => {
            for i in 0..k {
                for (j, lane) in lanes.iter().enumerate() {
                    push(j, lane[i], &mut requests);
                }
            }
        }
        InterleavePolicy::Random { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(1);
            let mut cursor = vec![0usize; lanes.len()];
            let mut live: Vec<usize> = (0..lanes.len()).collect();
            while !live.is_empty() {
                let pick = rng.gen_range(0..live.len());
                let j = live[pick];
                push(j, lanes[j][cursor[j]], &mut requests);
                cursor[j] += 1;
                if cursor[j] == k {
                    live.swap_remove(pick);
                }
            }
        }
    }
    Trace::new(requests)
}

/// Interleaves several applications' traces into one server-side stream.
///
/// Each step draws uniformly among inputs that still have requests, so every
/// input keeps its internal order. Process ids are shifted so they stay
/// distinct across inputs; `seq` is renumbered densely.
pub fn mix(traces: &[Trace], seed: u64) -> Result<Trace> {
    let mut req_size = None;
    let mut seen_files = BTreeSet::new();
    for (t, trace) in traces.iter().enumerate() {
        if trace.is_empty() {
            continue;
        }
        let size = trace.req_size()?;
        if *req_size.get_or_insert(size) != size {
            return Err(config_err(format!(
                "trace {t} uses request size {size}, expected {}",
                req_size.unwrap_or_default()
            )));
        }
        let files = trace.files();
        if let Some(f) = files.intersection(&seen_files).next() {
            return Err(config_err(format!("file id {f} appears in more than one input trace")));
        }
        seen_files.extend(files);
    }

    let mut proc_base = Vec::with_capacity(traces.len());
    let mut next_base = 0u32;
    for trace in traces {
        proc_base.push(next_base);
        let max_proc = trace.requests().iter().map(|r| r.proc).max();
        if let Some(p) = max_proc {
            next_base = next_base.saturating_add(p + 1);
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cursor = vec![0usize; traces.len()];
    let mut live: Vec<usize> = (0..traces.len()).filter(|&t| !traces[t].is_empty()).collect();
    let mut out = Vec::with_capacity(traces.iter().map(Trace::len).sum());
    while !live.is_empty() {
        let pick = if live.len() == 1 { 0 } else { rng.gen_range(0..live.len()) };
        let t = live[pick];
        let r = traces[t].requests()[cursor[t]];
        out.push(Request {
            seq: out.len() as u64,
            proc: r.proc + proc_base[t],
            ..r
        });
        cursor[t] += 1;
        if cursor[t] == traces[t].len() {
            live.remove(pick);
        }
    }
    Trace::new(out)
}

/// Writes `trace` in the trace CSV format (LF line endings, no quoting).
pub fn save_trace<W: Write>(trace: &Trace, sink: W) -> Result<()> {
    let mut w = csv_writer(sink);
    w.write_record(TRACE_HEADER.split(','))?;
    for r in trace.requests() {
        w.write_record(&[
            r.seq.to_string(),
            r.proc.to_string(),
            r.file.to_string(),
            r.offset.to_string(),
            r.size.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Parses the trace CSV format. Errors carry the 1-based line number.
pub fn load_trace<R: Read>(source: R) -> Result<Trace> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .quoting(false)
        .from_reader(source);
    let mut records = reader.records();

    match records.next() {
        None => return Err(Error::Parse { line: 1, msg: "missing header".into() }),
        Some(header) => {
            let header = header?;
            let got: Vec<&str> = header.iter().collect();
            if got.join(",") != TRACE_HEADER {
                return Err(Error::Parse {
                    line: 1,
                    msg: format!("header must be `{TRACE_HEADER}`, got `{}`", got.join(",")),
                });
            }
        }
    }

    let mut requests = Vec::new();
    let mut req_size = None;
    for record in records {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let err = |msg: String| Error::Parse { line, msg };
        if record.len() != 5 {
            return Err(err(format!("expected 5 fields, found {}", record.len())));
        }
        let field = |i: usize, name: &str| -> Result<u64> {
            record[i]
                .parse::<u64>()
                .map_err(|_| err(format!("{name} is not a non-negative integer: {:?}", &record[i])))
        };
        let narrow = |v: u64, name: &str| -> Result<u32> {
            u32::try_from(v).map_err(|_| err(format!("{name} {v} does not fit in 32 bits")))
        };
        let req = Request {
            seq: field(0, "seq")?,
            proc: narrow(field(1, "proc")?, "proc")?,
            file: narrow(field(2, "file")?, "file")?,
            offset: field(3, "offset")?,
            size: field(4, "size")?,
        };
        let expected = requests.len() as u64;
        if req.seq < expected {
            return Err(err(format!("duplicate seq {}", req.seq)));
        }
        if req.seq != expected {
            return Err(err(format!("expected seq {expected}, found {}", req.seq)));
        }
        if req.size == 0 {
            return Err(err("size must be positive".into()));
        }
        if *req_size.get_or_insert(req.size) != req.size {
            return Err(err(format!(
                "size {} differs from the trace request size {}",
                req.size,
                req_size.unwrap_or_default()
            )));
        }
        requests.push(req);
    }
    Trace::new(requests)
}

pub(crate) fn csv_writer<W: Write>(sink: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .has_headers(false)
        .terminator(csv::Terminator::Any(b'\n'))
        .quote_style(csv::QuoteStyle::Never)
        .from_writer(sink)
}
