//! Fitness computed by an external process.
//!
//! Each evaluation spawns the command, writes one JSON line with the decoded
//! architecture to its stdin, e.g.
//!
//! ```text
//! {"learning_rate":0.0001,"dropout":0.0,"units":[250,200,75,200,75,200,275,200]}
//! ```
//!
//! and reads one JSON line `{"fitness": 0.47}` from its stdout. Results,
//! including failures, are memoized per genotype.

use std::fmt;
use std::io::{BufRead, BufReader, Write};
use std::process::{Command, Stdio};
use std::sync::{Arc, OnceLock};

use dashmap::DashMap;
use rustc_hash::FxBuildHasher;
use serde_json::Value;

use super::NetGenotype;
use crate::error::EvalError;

type Slot = Arc<OnceLock<Result<f64, EvalError>>>;

pub struct ExternalEvaluator {
    program: String,
    args: Vec<String>,
    cache: DashMap<NetGenotype, Slot, FxBuildHasher>,
}

impl fmt::Debug for ExternalEvaluator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ExternalEvaluator")
            .field("program", &self.program)
            .field("args", &self.args)
            .field("cached", &self.cache.len())
            .finish()
    }
}

impl ExternalEvaluator {
    pub fn new(program: impl Into<String>, args: Vec<String>) -> Self {
        ExternalEvaluator { program: program.into(), args, cache: DashMap::with_hasher(FxBuildHasher) }
    }

    /// Memoized fitness. Concurrent requests for the same genotype wait for
    /// the first one instead of spawning another process.
    pub fn fitness(&self, genotype: &NetGenotype) -> Result<f64, EvalError> {
        let slot = self.cache.entry(genotype.clone()).or_default().clone();
        slot.get_or_init(|| self.invoke(genotype)).clone()
    }

    pub fn cached(&self) -> usize {
        self.cache.len()
    }

    fn invoke(&self, genotype: &NetGenotype) -> Result<f64, EvalError> {
        let request = serde_json::to_string(&genotype.decode()).expect("architecture serializes");
        let mut child = Command::new(&self.program)
            .args(&self.args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|e| EvalError::Evaluator(format!("cannot start {}: {e}", self.program)))?;
        {
            let mut stdin = child.stdin.take().expect("stdin is piped");
            // The evaluator may exit without reading; its exit status decides.
            let _ = writeln!(stdin, "{request}");
        }
        let mut line = String::new();
        let stdout = child.stdout.take().expect("stdout is piped");
        let read = BufReader::new(stdout).read_line(&mut line);
        let status = child
            .wait()
            .map_err(|e| EvalError::Evaluator(format!("waiting for {}: {e}", self.program)))?;
        if !status.success() {
            return Err(EvalError::Evaluator(format!("{} exited with {status}", self.program)));
        }
        read.map_err(|e| EvalError::MalformedReply(e.to_string()))?;
        let fitness = parse_reply(line.trim())?;
        if fitness.is_finite() {
            Ok(fitness)
        } else {
            Err(EvalError::NonFinite { genotype: genotype.to_string(), value: fitness })
        }
    }
}

/// Reads `fitness` from a reply line. String values such as `"NaN"` are
/// accepted so that non-finite results surface as such.
fn parse_reply(line: &str) -> Result<f64, EvalError> {
    let malformed = || EvalError::MalformedReply(line.to_string());
    let value: Value = serde_json::from_str(line).map_err(|_| malformed())?;
    match value.get("fitness") {
        Some(Value::Number(n)) => n.as_f64().ok_or_else(malformed),
        Some(Value::String(s)) => s.trim().parse::<f64>().map_err(|_| malformed()),
        _ => Err(malformed()),
    }
}
